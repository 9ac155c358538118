//! One-sided limits, a discontinuity scan and endpoint regularization.
use tubevar::catalog;
use tubevar::variation::{
    discontinuity_scan, endpoint_regularize, one_sided_limit, LimitSchedule, Side, TubeResolution,
};

fn main() -> tubevar::Result<()> {
    let sched = LimitSchedule::default();
    let res = TubeResolution::default();

    let step = catalog::variation_problem("step-half")?;
    for side in [Side::Left, Side::Right] {
        let v = one_sided_limit(&step.f, &step.xbar, 0.5, side, &[0.0], &[], &sched)?;
        println!("step at 1/2, {side:?} limit: {v:?}");
    }

    let two = catalog::variation_problem("two-steps")?;
    let grid: Vec<f64> = (0..=16).map(|i| i as f64 / 16.0).collect();
    for j in discontinuity_scan(&two.f, &two.xbar, 0.1, &grid, 1e-6, &res, &sched)? {
        println!("jump at t = {} of size {}", j.t, j.size);
    }

    let start = catalog::variation_problem("jump-at-start")?;
    let g = endpoint_regularize(&start.f, &start.xbar, &res, &sched)?;
    println!("F(0) = {:?}, regularized {:?}", start.f.eval(0.0, &[0.0], &[]), g.eval(0.0, &[0.0], &[]));
    Ok(())
}
