//! Removing endpoint jumps lowers the cumulative variation by the jump
//! size and leaves interior increments alone.
use tubevar::catalog;
use tubevar::variation::{check_endpoint_identities, LimitSchedule, VariationSettings};

fn main() -> tubevar::Result<()> {
    for id in ["jump-at-start", "jump-at-end"] {
        let p = catalog::variation_problem(id)?;
        let r = check_endpoint_identities(&p.f, &p.xbar, 0.5, &VariationSettings::default(), &LimitSchedule::default(), 1e-3)?;
        println!(
            "{id}: jumps ({}, {}), identity error {:.2e}, increment error {:.2e}, passed {}",
            r.jump_at_start, r.jump_at_end, r.identity_error, r.increment_error, r.passed
        );
        for row in &r.rows {
            println!("  t = {:.4}: eta = {:.6}, regularized = {:.6}", row.t, row.eta, row.eta_tilde);
        }
    }
    Ok(())
}
