//! Loads the bundled configuration, shortens the horizon, and runs it through
//! the same driver the command line tool uses.

use std::path::Path;

use thermistor::driver;
use thermistor::RunConfig;

fn main() -> thermistor::Result<()> {
    let mut cfg = RunConfig::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/default.cfg"))?;
    cfg.solver.horizon = 0.2;
    cfg.solver.cascade_levels = vec![0.1, 0.05];
    cfg.output.dir = std::env::temp_dir().join("thermistor_config_run");

    let check = driver::check(&cfg)?;
    println!("assumptions hold: {}, contact trace norm {:.6}", check.passed(), check.trace.norm);
    let summary = driver::run(&cfg)?;
    println!("{} steps, config hash {}", summary.steps, cfg.hash());
    for f in &summary.files {
        println!("  {}", f.display());
    }
    println!("violations: {}", summary.violations.len());
    Ok(())
}
