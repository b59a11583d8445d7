//! Solves the default scenario for a sequence of delays at a shared time
//! step and prints the Cauchy differences between consecutive levels.

use thermistor::{run_cascade, Mesh, Models, SideTags, SolverConfig};

fn main() -> thermistor::Result<()> {
    let mesh = Mesh::unit_square(8, SideTags::thermistor())?;
    let models = Models::default_ptc();
    let config = SolverConfig {
        cascade_levels: vec![0.1, 0.05, 0.025, 0.0125],
        ..SolverConfig::default()
    };
    let report = run_cascade(&mesh, &models, &config)?;

    println!("{:>8} {:>14} {:>14} {:>14} {:>14}", "h", "max mech", "max thermal", "majorant", "dual");
    for level in &report.levels {
        let (mech, thermal) = level.energy_maxima();
        println!(
            "{:>8} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
            level.delay, mech, thermal, level.regularizer.majorant, level.regularizer.dual
        );
    }
    println!();
    println!("{:>8} {:>8} {:>14} {:>14} {:>14}", "h", "h/2", "theta", "phi", "v");
    for row in &report.cauchy {
        println!(
            "{:>8} {:>8} {:>14.6e} {:>14.6e} {:>14.6e}",
            row.coarse, row.fine, row.theta, row.phi, row.v
        );
    }
    Ok(())
}
