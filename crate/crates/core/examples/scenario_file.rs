//! Runs a scenario file from the crate's scenarios/ directory into a
//! temporary output root.
use std::path::Path;

use tubevar::scenario::run_file;

fn main() -> tubevar::Result<()> {
    let file = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/quickstart.toml");
    let root = std::env::temp_dir().join("tubevar-example");
    for r in run_file(&file, &root, None)? {
        println!("{} [{}] passed={} -> {}", r.name, r.kind, r.passed, root.join(&r.name).display());
        for c in &r.checks {
            println!("  {} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
    }
    Ok(())
}
