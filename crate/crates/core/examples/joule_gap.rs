//! Compares the direct and reformulated Joule heat loads under mesh
//! refinement at a fixed temperature profile.

use std::f64::consts::PI;

use thermistor::diagnostics::joule_gap;
use thermistor::scheme::{solve_electric, Discretization};
use thermistor::{Mesh, Models, SideTags};

fn main() -> thermistor::Result<()> {
    let models = Models::default_ptc();
    let theta = |x: [f64; 2]| 1.0 + (PI * x[0]).sin() * (PI * x[1]).sin();
    println!("{:>4} {:>14} {:>8}", "n", "gap", "ratio");
    let mut last = None;
    for n in [4, 8, 16, 32] {
        let disc = Discretization::new(Mesh::unit_square(n, SideTags::thermistor())?, &models.material);
        let th = disc.dofs.interpolate_scalar(&disc.mesh, theta);
        let (phi, _) = solve_electric(&disc, &models, &th, 0.0)?;
        let gap = joule_gap(&disc, &models, &th, &phi, 0.0);
        let ratio = last.map_or(f64::NAN, |g: f64| g / gap);
        println!("{n:>4} {gap:>14.6e} {ratio:>8.3}");
        last = Some(gap);
    }
    Ok(())
}
