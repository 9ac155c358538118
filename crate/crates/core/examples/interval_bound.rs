//! Local bound on how far the measure of [a, b] can be from the increment
//! of m at a frozen state.
use tubevar::catalog;
use tubevar::measure::{IntervalBoundContext, MeasureSettings};

fn main() -> tubevar::Result<()> {
    let settings = MeasureSettings::default();
    for id in catalog::FIELDS {
        let (m, xbar) = catalog::field(id)?;
        let probes = [(0.1, 0.3, 0.2), (0.4, 0.6, 0.45), (0.7, 0.9, 0.9)];
        let ends: Vec<f64> = probes.iter().flat_map(|p| [p.0, p.1]).collect();
        let ctx = IntervalBoundContext::new(&m, &xbar, 0.25, &ends, 12, 1e-6, &settings)?;
        for (a, b, xi) in probes {
            let r = ctx.check(a, b, xi)?;
            println!("{id:<10} [{a}, {b}]: lhs {:.3e} <= rhs {:.3e} (margin {:.3e})", r.lhs, r.rhs, r.margin);
        }
    }
    Ok(())
}
