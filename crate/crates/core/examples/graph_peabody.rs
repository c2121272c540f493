//! Peabody over a self-dual graph embedding read from JSON.
//!
//! `cargo run --release --example graph_peabody [graph.json]`; defaults to
//! the bundled K4 embedding, which reproduces Robert's body.

use std::path::PathBuf;

use peabody::assembly::{graph_peabody, roberts_body, SelfDualGraphEmbedding};

fn main() -> peabody::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/k4_side2.json"));
    let g = SelfDualGraphEmbedding::from_json(&std::fs::read_to_string(&path)?)?;
    for k in 0..g.dual_pairs.len() {
        println!("{}", g.pair_label(k));
    }
    let mesh = graph_peabody(&g, 32)?;
    println!("{} triangles, width {}", mesh.triangle_count(), g.width);

    let robert = roberts_body(g.width, 32)?;
    if robert.vertices.len() == mesh.vertices.len() {
        let d = mesh.vertices.iter().zip(&robert.vertices).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        println!("max vertex distance to Robert's body: {d:.3e}");
    }

    let mut bent = g.clone();
    bent.vertices[1].z += 0.03;
    match graph_peabody(&bent, 32) {
        Ok(_) => println!("perturbed embedding unexpectedly accepted"),
        Err(e) => println!("perturbed embedding rejected: {e}"),
    }
    Ok(())
}
