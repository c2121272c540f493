//! Width certificates: a constant-width body against the Reuleaux tetrahedron.

use peabody::assembly::{reuleaux_tetrahedron, roberts_body};
use peabody::geom::mesh_tolerance;
use peabody::verify::{binormal_check, width_report};

fn main() -> peabody::Result<()> {
    let (side, res) = (2.0, 64);
    let tol = mesh_tolerance(side, res);
    let robert = roberts_body(side, res)?;
    let reuleaux = reuleaux_tetrahedron(side, res)?;
    for (name, mesh) in [("robert", &robert), ("reuleaux", &reuleaux)] {
        let r = width_report(mesh, 10_000, tol, Some(side))?;
        println!("{name}: {}", serde_json::to_string(&r).expect("report serializes"));
    }
    println!("2√3 - √2 = {:.9}", 2.0 * 3f64.sqrt() - 2f64.sqrt());
    let b = binormal_check(&robert, 1000)?;
    println!("binormal partners: gap {:.2e}, misalignment {:.2e}", b.max_gap, b.max_misalignment);
    Ok(())
}
