//! Cumulative variation of F(t, x) = {t x} along x(t) = t, against the
//! simple variant that takes the inner supremum over all of X = [0, 1].
use tubevar::catalog;
use tubevar::variation::{eta, eta_delta, eta_simple, VariationSettings};

fn main() -> tubevar::Result<()> {
    let p = catalog::variation_problem("section2-example")?;
    let probes = [0.2, 0.4, 0.6, 0.8, 1.0];
    let settings = VariationSettings::default();

    let full = eta(&p.f, &p.xbar, &probes, &settings)?;
    let tube = eta_delta(&p.f, &p.xbar, &probes, 0.1, &settings)?;
    let simple = eta_simple(&p.f, &probes, &p.x_set, &settings)?;

    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "t", "eta", "t^2/2", "eta^0.1", "simple");
    for &t in &probes {
        println!(
            "{t:>5.2} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            full.at(t),
            t * t / 2.0,
            tube.at(t),
            simple.at(t)
        );
    }
    println!("delta schedule:");
    for step in &full.schedule_trace {
        println!("  delta = {:?}: eta(1) = {:.6}", step.delta, step.value);
    }
    Ok(())
}
