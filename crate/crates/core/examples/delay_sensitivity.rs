//! One-sided derivatives of the delayed cost, compared with finite differences.
use tubevar::catalog;
use tubevar::sensitivity::{sensitivity_derivative, DerivativeSide, SensitivitySettings};

fn main() -> tubevar::Result<()> {
    let sys = catalog::system("integrator")?;
    let settings = SensitivitySettings::default();
    for id in ["ramp", "bangbang-half", "jump-at-end"] {
        let u = catalog::control(id)?;
        let r = sensitivity_derivative(&sys, &u, 0.0, DerivativeSide::Right, &settings)?;
        let fd = r.fd.as_ref().unwrap();
        println!(
            "{id:<14} right {:+.6} (fd {:+.6})  left {:+.6} (fd {:+.6})  two-sided {:?}",
            r.right_derivative, fd.right_extrapolated, r.left_derivative, fd.left_extrapolated, r.two_sided
        );
    }
    Ok(())
}
