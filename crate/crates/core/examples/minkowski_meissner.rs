//! Minkowski sum of the two width-1 Meissner bodies against Robert's body.
//!
//! Both have width 2 and tetrahedral symmetry; their sections through ab and
//! the midpoint of cd differ.

use peabody::assembly::{meissner_body, roberts_body, MeissnerVariant};
use peabody::geom::{mesh_tolerance, Tetrahedron};
use peabody::verify::{curvature_profile_distance, minkowski_sum, plane_section, support_distance, width_report, Plane};

fn main() -> peabody::Result<()> {
    let res = 64;
    let m1 = meissner_body(MeissnerVariant::ThreeAtVertex, 1.0, res)?;
    let m2 = meissner_body(MeissnerVariant::ThreeAtFace, 1.0, res)?;
    let sum = minkowski_sum(&m1, &m2, 20_000)?;
    let robert = roberts_body(2.0, res)?;
    let tol = mesh_tolerance(2.0, res);
    let w = width_report(&sum, 5000, tol, Some(2.0))?;
    println!("sum: {} vertices, width [{:.6}, {:.6}]", sum.vertex_count(), w.min_width, w.max_width);
    println!("support distance to Robert's body {:.3e}", support_distance(&sum, &robert, 5000));

    let t = Tetrahedron::regular(2.0)?;
    let (a, b) = (t.vertex(0), t.vertex(1));
    let mid = (t.vertex(2) + t.vertex(3)) / 2.0;
    let plane = Plane::new(mid, (b - a).cross(&(mid - a)))?;
    let (sr, ss) = (plane_section(&robert, &plane, tol)?, plane_section(&sum, &plane, tol)?);
    println!("section curvature-profile distance {:.4}", curvature_profile_distance(&sr, &ss));
    for (name, s) in [("robert", &sr), ("sum", &ss)] {
        let radii: Vec<String> = s.arcs.iter().filter(|a| a.points > 3).map(|a| format!("{:.4}", a.radius)).collect();
        println!("{name} arc radii: {}", radii.join(" "));
    }
    Ok(())
}
