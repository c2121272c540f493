//! Builds Robert's body, certifies its width and writes OBJ + STL.
//!
//! `cargo run --release --example robert_body [out_dir]`

use std::path::PathBuf;

use peabody::assembly::roberts_body;
use peabody::geom::mesh_tolerance;
use peabody::mesh::MeshFormat;
use peabody::verify::{volume_area, width_report};

fn main() -> peabody::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("peabody"));
    std::fs::create_dir_all(&out)?;
    let (side, res) = (2.0, 64);
    let mesh = roberts_body(side, res)?;
    println!("{} vertices, {} triangles", mesh.vertex_count(), mesh.triangle_count());

    let report = width_report(&mesh, 10_000, mesh_tolerance(side, res), Some(side))?;
    println!(
        "width in [{:.6}, {:.6}], diameter {:.12}, pass = {}",
        report.min_width, report.max_width, report.diameter, report.pass
    );
    let (volume, area) = volume_area(&mesh);
    println!("volume {volume:.5}, area {area:.5}");

    for (name, format) in [("robert.obj", MeshFormat::Obj), ("robert.stl", MeshFormat::Stl)] {
        let path = out.join(name);
        mesh.save(&path, format)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
