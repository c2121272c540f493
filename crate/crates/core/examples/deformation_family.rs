//! Continuous family from the Meissner body (λ = 0) to Robert's body (λ = 1).
//!
//! λ is the eccentricity of the elliptic strings on the sharp-side edges.

use peabody::assembly::family_body;
use peabody::geom::mesh_tolerance;
use peabody::verify::{volume_area, width_report};

fn main() -> peabody::Result<()> {
    let (side, res) = (2.0, 32);
    println!("lambda  min width  max width  volume");
    for k in 0..=10 {
        let lambda = k as f64 / 10.0;
        let mesh = family_body(lambda, side, res)?;
        let r = width_report(&mesh, 2000, mesh_tolerance(side, res), Some(side))?;
        let (volume, _) = volume_area(&mesh);
        println!("{lambda:>6.1}  {:.6}   {:.6}   {volume:.5}", r.min_width, r.max_width);
    }
    Ok(())
}
