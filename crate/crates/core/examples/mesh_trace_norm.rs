//! Builds the thermistor square at several resolutions and estimates the
//! contact and scalar trace norms by power iteration.

use thermistor::mesh::{estimate_scalar_trace_norm, estimate_trace_norm};
use thermistor::{DofMap, Mesh, SideTags};

fn main() -> thermistor::Result<()> {
    println!("{:>4} {:>6} {:>8} {:>14} {:>14} {:>6}", "n", "nodes", "free", "contact", "scalar", "iters");
    for n in [2, 4, 8, 16] {
        let mesh = Mesh::unit_square(n, SideTags::thermistor())?;
        let dofs = DofMap::new(&mesh);
        let contact = estimate_trace_norm(&mesh, &dofs)?;
        let scalar = estimate_scalar_trace_norm(&mesh, &dofs)?;
        println!(
            "{:>4} {:>6} {:>8} {:>14.8} {:>14.8} {:>6}",
            n,
            mesh.nodes().len(),
            dofs.n_scalar(),
            contact.norm,
            scalar.norm,
            contact.iterations
        );
    }
    Ok(())
}
