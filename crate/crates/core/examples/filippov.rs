//! The delayed trajectory stays within a constant multiple of |h| of the
//! original one.
use tubevar::catalog;
use tubevar::sensitivity::{filippov_check, ratio_spread, SimSettings};

fn main() -> tubevar::Result<()> {
    let hs: Vec<f64> = (3..=8).map(|k| 0.5f64.powi(k)).collect();
    let u = catalog::control("bangbang-half")?;
    for id in catalog::SYSTEMS {
        let rows = filippov_check(&catalog::system(id)?, &u, &hs, &SimSettings::default())?;
        let ratios: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.ratio)).collect();
        println!("{id:<10} ratios {}  spread {:.4}", ratios.join(" "), ratio_spread(&rows));
    }
    Ok(())
}
