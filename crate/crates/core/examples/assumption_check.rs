//! Validates the reference model, then shows the contact smallness
//! condition failing once the nonmonotonicity constant is inflated.

use thermistor::materials::{Assumption, FrictionCoefficient};
use thermistor::mesh::estimate_trace_norm;
use thermistor::{validate_assumptions, DofMap, Mesh, Models, SideTags, ValidationOptions};

fn main() -> thermistor::Result<()> {
    let mesh = Mesh::unit_square(8, SideTags::thermistor())?;
    let trace = estimate_trace_norm(&mesh, &DofMap::new(&mesh))?.norm;
    let mut models = Models::default_ptc();
    let opts = ValidationOptions::default();

    let report = validate_assumptions(&models.material, &models.friction, &models.boundary, trace, &opts);
    print!("{report}");
    println!("all passed: {}\n", report.all_passed());

    let law = models.friction.coefficient.clone();
    models.friction.coefficient = FrictionCoefficient::Custom {
        law: std::sync::Arc::new(move |s| law.eval(s)),
        mu_bar: models.friction.mu_bar(),
        d_mu: 1e6 * models.friction.d_mu(),
        lipschitz: models.friction.coefficient.lipschitz(),
    };
    let report = validate_assumptions(&models.material, &models.friction, &models.boundary, trace, &opts);
    let a8 = report.get(Assumption::A8).expect("contact condition is always checked");
    println!("inflated d_mu: {} passed = {}, margin {:e}", a8.assumption, a8.passed, a8.margin);
    Ok(())
}
