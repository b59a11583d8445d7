//! Manufactured-solution study for the electric problem: constant
//! conductivity, exact potential `x₁x₂` imposed on the whole boundary.

use std::sync::Arc;

use nalgebra::DVector;
use thermistor::diagnostics::p1_errors;
use thermistor::materials::ElectricConductivity;
use thermistor::scheme::{solve_electric, Discretization};
use thermistor::{BoundaryTag, Mesh, Models, SideTags};

fn main() -> thermistor::Result<()> {
    let exact = |x: [f64; 2]| x[0] * x[1];
    let mut models = Models::default_ptc();
    models.material.electric = ElectricConductivity::Constant(1.0);
    models.boundary.phi_b = Arc::new(exact);

    println!("{:>4} {:>14} {:>8} {:>14} {:>8}", "n", "L2 error", "order", "H1 error", "order");
    let mut last: Option<(f64, f64)> = None;
    for n in [4, 8, 16, 32] {
        let mesh = Mesh::unit_square(n, SideTags::uniform(BoundaryTag::Dirichlet))?;
        let disc = Discretization::new(mesh, &models.material);
        let (phi, _) = solve_electric(&disc, &models, &DVector::zeros(disc.dofs.n_scalar()), 0.0)?;
        let total: Vec<f64> = disc
            .dofs
            .expand_scalar(&phi)
            .iter()
            .zip(disc.mesh.nodes())
            .map(|(p, &x)| p + exact(x))
            .collect();
        let (l2, h1) = p1_errors(&disc.mesh, &total, exact, |x| [x[1], x[0]]);
        let (ol2, oh1) = last.map_or((f64::NAN, f64::NAN), |(a, b)| ((a / l2).log2(), (b / h1).log2()));
        println!("{n:>4} {l2:>14.6e} {ol2:>8.3} {h1:>14.6e} {oh1:>8.3}");
        last = Some((l2, h1));
    }
    Ok(())
}
