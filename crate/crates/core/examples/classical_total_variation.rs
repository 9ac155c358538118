//! For x-independent scalars the cumulative variation is the classical
//! total variation.
use tubevar::catalog;
use tubevar::variation::{eta, VariationSettings};

fn main() -> tubevar::Result<()> {
    let probes = [0.25, 0.5, 0.75, 1.0];
    for (id, _, _) in catalog::piecewise_monotone() {
        let p = catalog::variation_problem(id)?;
        let prof = eta(&p.f, &p.xbar, &probes, &VariationSettings::default())?;
        let row: Vec<String> = probes.iter().map(|&t| format!("{:.6}", prof.at(t))).collect();
        println!("{id:<16} {}", row.join("  "));
    }
    Ok(())
}
