//! Runs the reference scenario and prints per-step diagnostics: potential
//! bound, friction traction, energies and the regularizer size.

use thermistor::diagnostics::DiagnosticsAccumulator;
use thermistor::scheme::Discretization;
use thermistor::{Mesh, Models, SideTags, Simulation, SolverConfig};

fn main() -> thermistor::Result<()> {
    let mesh = Mesh::unit_square(8, SideTags::thermistor())?;
    let models = Models::default_ptc();
    let config = SolverConfig::default();
    let disc = Discretization::new(mesh.clone(), &models.material);
    let mut acc = DiagnosticsAccumulator::new(&disc, &models, &config)?;
    let mut sim = Simulation::initialize_at_rest(mesh, models.clone(), config)?;

    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "t", "|phi|_V", "C", "max |xi|", "mech lhs", "thermal lhs", "reg dual"
    );
    sim.advance(|_, s| {
        let r = acc.push(s)?;
        if s.step % 4 == 0 {
            println!(
                "{:>6.4} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
                s.t,
                r.phi_v,
                r.potential_constant,
                r.xi_max,
                r.energy.mechanical_lhs,
                r.energy.thermal_lhs,
                r.regularizer_dual
            );
        }
        Ok(())
    })?;
    println!("violations: {}", acc.violations.len());
    Ok(())
}
