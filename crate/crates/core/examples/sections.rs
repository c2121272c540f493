//! Planar section of Robert's body through ab and the midpoint of cd.

use peabody::assembly::roberts_body;
use peabody::geom::{mesh_tolerance, Tetrahedron};
use peabody::verify::{plane_section, Plane};

fn main() -> peabody::Result<()> {
    let (side, res) = (2.0, 64);
    let t = Tetrahedron::regular(side)?;
    let (a, b) = (t.vertex(0), t.vertex(1));
    let mid = (t.vertex(2) + t.vertex(3)) / 2.0;
    let plane = Plane::new(mid, (b - a).cross(&(mid - a)))?;
    let mesh = roberts_body(side, res)?;
    let section = plane_section(&mesh, &plane, mesh_tolerance(side, res))?;
    let (lo, hi) = section.width_range(720);
    println!("{} points, perimeter {:.6}, planar width [{lo:.6}, {hi:.6}]", section.polyline.len(), section.perimeter());
    for arc in section.arcs.iter().filter(|a| a.points > 3) {
        println!(
            "arc r = {:.5} centre ({:+.4}, {:+.4}, {:+.4}) over {:.1}°..{:.1}°",
            arc.radius, arc.center[0], arc.center[1], arc.center[2], arc.span_deg.0, arc.span_deg.1
        );
    }
    Ok(())
}
