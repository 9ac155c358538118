//! For absolutely continuous controls the derivative is a plain integral;
//! the finite-difference oracle fixes its sign.
use tubevar::catalog;
use tubevar::sensitivity::{smooth_gradient, SensitivitySettings};

fn main() -> tubevar::Result<()> {
    let settings = SensitivitySettings::default();
    for sys_id in catalog::SYSTEMS {
        for u_id in ["ramp", "tent"] {
            let g = smooth_gradient(&catalog::system(sys_id)?, &catalog::control(u_id)?, &settings)?;
            println!(
                "{sys_id:<10} {u_id:<5} integral {:+.6}  fd {:+.6}  {:?}",
                g.integral, g.fd_symmetric, g.orientation
            );
        }
    }
    Ok(())
}
