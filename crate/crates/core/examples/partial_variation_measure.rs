//! Partial variation measure of a step field: the discrete measures
//! concentrate into a unit atom at t = 1/2.
use tubevar::catalog;
use tubevar::measure::{partial_variation_measure, test_catalog, MeasureSettings};

fn main() -> tubevar::Result<()> {
    let (m, xbar) = catalog::field("step-field")?;
    let lim = partial_variation_measure(&m, &xbar, &MeasureSettings::default(), None, &[])?;
    println!("converged: {}", lim.converged);
    for c in &lim.cauchy_trace {
        println!(
            "level {:>2}: sup diff {:.3e} (worst {}), bound margin {:.3e}",
            c.level, c.sup_difference, c.worst_test, c.min_bound_margin
        );
    }
    let heavy: Vec<_> = lim.measure.atoms.iter().filter(|a| a.weight[0].abs() > 1e-6).collect();
    println!("atoms above 1e-6: {heavy:?}");
    for (name, v) in lim.pairings(&test_catalog(m.span(), 1)).iter().take(6) {
        println!("<mu, {name}> = {v:.6}");
    }
    Ok(())
}
