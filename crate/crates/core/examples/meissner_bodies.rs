//! The two Meissner bodies as degenerate peabodies.
//!
//! Each circle-line device pair leaves one edge sharp (a circular arc) and
//! rounds its opposite edge into a surface of revolution.

use peabody::assembly::{meissner_body, MeissnerVariant};
use peabody::geom::{mesh_tolerance, tetrahedral_group, Tetrahedron};
use peabody::verify::{symmetry_deviation, volume_area, width_report};

fn main() -> peabody::Result<()> {
    let (side, res) = (2.0, 48);
    let group = tetrahedral_group(&Tetrahedron::regular(side)?)?;
    for variant in [MeissnerVariant::ThreeAtVertex, MeissnerVariant::ThreeAtFace] {
        let mesh = meissner_body(variant, side, res)?;
        let report = width_report(&mesh, 5000, mesh_tolerance(side, res), Some(side))?;
        let (volume, _) = volume_area(&mesh);
        let rounded: Vec<String> = variant
            .rounded_edges()
            .iter()
            .map(|&(i, j)| format!("{}{}", peabody::geom::VERTEX_NAMES[i], peabody::geom::VERTEX_NAMES[j]))
            .collect();
        println!(
            "{:<16} rounded {:<12} width [{:.5}, {:.5}] volume {volume:.5} asymmetry {:.3e}",
            variant.name(),
            rounded.join(","),
            report.min_width,
            report.max_width,
            symmetry_deviation(&mesh, &group, 2000),
        );
    }
    Ok(())
}
