//! Triangle meshes, file formats and reference primitives.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::assembly::Provenance;
use crate::error::{bad_input, invalid, Result};
use crate::geom::{Isometry, Vec3};
use crate::wedge::Side;

/// Which patch of the boundary a triangle belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaceTag {
    /// Spherical cap about a skeleton vertex.
    Cap(u32),
    /// Wedge surface replacing the edge between two skeleton vertices.
    Wedge(u32, u32),
    /// Convex-hull facet (Minkowski sums).
    Hull,
    /// Anything else (primitives, imported meshes).
    Plain,
}

impl FaceTag {
    /// Group name used in OBJ files.
    pub fn name(&self) -> String {
        match self {
            FaceTag::Cap(v) => format!("cap_{v}"),
            FaceTag::Wedge(a, b) => format!("wedge_{a}_{b}"),
            FaceTag::Hull => "hull".into(),
            FaceTag::Plain => "plain".into(),
        }
    }

    pub fn parse(name: &str) -> FaceTag {
        let parts: Vec<&str> = name.split('_').collect();
        match parts.as_slice() {
            ["cap", v] => v.parse().map(FaceTag::Cap).unwrap_or(FaceTag::Plain),
            ["wedge", a, b] => match (a.parse(), b.parse()) {
                (Ok(a), Ok(b)) => FaceTag::Wedge(a, b),
                _ => FaceTag::Plain,
            },
            ["hull"] => FaceTag::Hull,
            _ => FaceTag::Plain,
        }
    }
}

/// How a mesh vertex was constructed; used to find its binormal partner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VertexOrigin {
    /// A skeleton vertex.
    Vertex(u32),
    /// A point of the sphere of radius `width` about a skeleton vertex.
    Cap(u32),
    /// Image of `(u, v)` under the map of one side of a device pair.
    Wedge { pair: u32, side: Side, u: f64, v: f64 },
    /// A point of a sphere; the partner is the antipode.
    Sphere { center: Vec3, radius: f64 },
    Unknown,
}

/// A triangle mesh with per-face tags and per-vertex origins.
#[derive(Debug, Clone)]
pub struct PeabodyMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    pub face_tags: Vec<FaceTag>,
    pub origins: Vec<VertexOrigin>,
    pub provenance: Option<Arc<Provenance>>,
}

impl PeabodyMesh {
    /// Untagged mesh from raw arrays.
    pub fn from_raw(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Self {
        let n = triangles.len();
        let m = vertices.len();
        PeabodyMesh {
            vertices,
            triangles,
            face_tags: vec![FaceTag::Plain; n],
            origins: vec![VertexOrigin::Unknown; m],
            provenance: None,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Image under an isometry; provenance is dropped.
    pub fn transformed(&self, g: &Isometry) -> PeabodyMesh {
        let mut out = self.clone();
        out.vertices.iter_mut().for_each(|v| *v = g.apply(v));
        out.origins.iter_mut().for_each(|o| {
            if let VertexOrigin::Sphere { center, .. } = o {
                *center = g.apply(center);
            }
        });
        if g.determinant() < 0.0 {
            out.triangles.iter_mut().for_each(|t| t.swap(1, 2));
        }
        out.provenance = None;
        out
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, k: f64) -> PeabodyMesh {
        let mut out = self.clone();
        out.vertices.iter_mut().for_each(|v| *v *= k);
        out.origins.iter_mut().for_each(|o| {
            if let VertexOrigin::Sphere { center, radius } = o {
                *center *= k;
                *radius *= k;
            }
        });
        if k < 0.0 {
            out.triangles.iter_mut().for_each(|t| t.swap(1, 2));
        }
        out.provenance = None;
        out
    }

    /// Sum of the vertex positions divided by their count.
    pub fn vertex_centroid(&self) -> Vec3 {
        self.vertices.iter().sum::<Vec3>() / self.vertices.len().max(1) as f64
    }

    /// Checks that every edge is shared by exactly two oppositely oriented
    /// triangles and that no triangle repeats a vertex.
    pub fn check_watertight(&self) -> Result<()> {
        let mut directed: HashMap<(u32, u32), u32> = HashMap::with_capacity(self.triangles.len() * 3);
        for (k, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&i| i as usize >= self.vertices.len()) {
                return Err(bad_input(format!("triangle {k} references a missing vertex")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(bad_input(format!("triangle {k} repeats a vertex")));
            }
            for e in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *directed.entry(e).or_default() += 1;
            }
        }
        if self.triangles.is_empty() {
            return Err(bad_input("mesh has no triangles"));
        }
        for (&(a, b), &n) in &directed {
            if n != 1 {
                return Err(bad_input(format!("edge {a}-{b} is used {n} times in one direction")));
            }
            if directed.get(&(b, a)) != Some(&1) {
                return Err(bad_input(format!("edge {a}-{b} has no opposite half")));
            }
        }
        Ok(())
    }

    /// `V - E + F` over referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        let mut edges = std::collections::HashSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                used[t[k] as usize] = true;
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        v - edges.len() as i64 + self.triangles.len() as i64
    }

    /// Unit normal of triangle `k` (zero for degenerate triangles).
    pub fn triangle_normal(&self, k: usize) -> Vec3 {
        let [a, b, c] = self.triangles[k].map(|i| self.vertices[i as usize]);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len > 0.0 {
            n / len
        } else {
            Vec3::zeros()
        }
    }

    /// Largest height of a neighboring triangle's far vertex above a
    /// triangle's plane; zero or negative for a locally convex mesh.
    pub fn local_convexity_violation(&self) -> f64 {
        let mut by_edge: HashMap<(u32, u32), usize> = HashMap::with_capacity(self.triangles.len() * 3);
        for (k, t) in self.triangles.iter().enumerate() {
            for j in 0..3 {
                by_edge.insert((t[j], t[(j + 1) % 3]), k);
            }
        }
        let mut worst = f64::NEG_INFINITY;
        for (k, t) in self.triangles.iter().enumerate() {
            let n = self.triangle_normal(k);
            if n == Vec3::zeros() {
                continue;
            }
            let p = self.vertices[t[0] as usize];
            for j in 0..3 {
                if let Some(&other) = by_edge.get(&(t[(j + 1) % 3], t[j])) {
                    let o = self.triangles[other];
                    let far = o.iter().find(|&&i| i != t[j] && i != t[(j + 1) % 3]);
                    if let Some(&f) = far {
                        worst = worst.max(n.dot(&(self.vertices[f as usize] - p)));
                    }
                }
            }
        }
        worst
    }

    /// Writes ASCII OBJ with 17 significant digits and one group per tag run.
    pub fn write_obj<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut w = BufWriter::new(w);
        writeln!(w, "# peabody mesh: {} vertices, {} triangles", self.vertices.len(), self.triangles.len())?;
        for v in &self.vertices {
            writeln!(w, "v {:.16e} {:.16e} {:.16e}", v.x, v.y, v.z)?;
        }
        let mut current = None;
        for (t, tag) in self.triangles.iter().zip(&self.face_tags) {
            if current != Some(*tag) {
                writeln!(w, "g {}", tag.name())?;
                current = Some(*tag);
            }
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        w.flush()
    }

    /// Binary little-endian STL with float32 coordinates.
    pub fn write_stl<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut w = BufWriter::new(w);
        let mut header = [0u8; 80];
        let text = b"peabody binary STL";
        header[..text.len()].copy_from_slice(text);
        w.write_all(&header)?;
        w.write_all(&(self.triangles.len() as u32).to_le_bytes())?;
        for k in 0..self.triangles.len() {
            let n = self.triangle_normal(k);
            for c in n.iter() {
                w.write_all(&(*c as f32).to_le_bytes())?;
            }
            for &i in &self.triangles[k] {
                for c in self.vertices[i as usize].iter() {
                    w.write_all(&(*c as f32).to_le_bytes())?;
                }
            }
            w.write_all(&0u16.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn save(&self, path: &Path, format: MeshFormat) -> Result<()> {
        let file = std::fs::File::create(path)?;
        match format {
            MeshFormat::Obj => self.write_obj(file)?,
            MeshFormat::Stl => self.write_stl(file)?,
        }
        Ok(())
    }

    /// Reads an OBJ or binary STL file, chosen by extension.
    pub fn load(path: &Path) -> Result<PeabodyMesh> {
        let format = MeshFormat::from_path(path)?;
        let file = std::fs::File::open(path)?;
        match format {
            MeshFormat::Obj => read_obj(file),
            MeshFormat::Stl => read_stl(file),
        }
    }
}

/// Supported mesh file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Obj,
    Stl,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<MeshFormat> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("stl") => Ok(MeshFormat::Stl),
            _ => Err(bad_input(format!("unknown mesh extension: {}", path.display()))),
        }
    }
}

/// Parses the subset of OBJ written by [`PeabodyMesh::write_obj`].
pub fn read_obj<R: Read>(r: R) -> Result<PeabodyMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut tags = Vec::new();
    let mut tag = FaceTag::Plain;
    for (lineno, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let mut it = line.split_whitespace();
        let bad = |what: &str| bad_input(format!("OBJ line {}: {what}", lineno + 1));
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|s| s.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("bad vertex"))?;
                if c.len() != 3 {
                    return Err(bad("vertex needs three coordinates"));
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<u32> = it
                    .map(|s| s.split('/').next().unwrap_or("").parse::<u32>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("bad face index"))?;
                if idx.len() < 3 || idx.contains(&0) {
                    return Err(bad("face needs three 1-based indices"));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0] - 1, idx[k] - 1, idx[k + 1] - 1]);
                    tags.push(tag);
                }
            }
            Some("g") => tag = FaceTag::parse(it.next().unwrap_or("")),
            _ => {}
        }
    }
    if triangles.iter().flatten().any(|&i| i as usize >= vertices.len()) {
        return Err(bad_input("OBJ face references a missing vertex"));
    }
    let mut mesh = PeabodyMesh::from_raw(vertices, triangles);
    mesh.face_tags = tags;
    Ok(mesh)
}

/// Reads binary STL, welding bit-identical vertices.
pub fn read_stl<R: Read>(r: R) -> Result<PeabodyMesh> {
    let mut data = Vec::new();
    BufReader::new(r).read_to_end(&mut data)?;
    if data.len() < 84 {
        return Err(bad_input("STL file is too short"));
    }
    let n = u32::from_le_bytes(data[80..84].try_into().expect("four bytes")) as usize;
    if data.len() != 84 + 50 * n {
        return Err(bad_input("STL size does not match its triangle count"));
    }
    let mut index: HashMap<[u32; 3], u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(n);
    let f = |o: usize| f32::from_le_bytes(data[o..o + 4].try_into().expect("four bytes"));
    for k in 0..n {
        let base = 84 + 50 * k + 12;
        let mut tri = [0u32; 3];
        for (j, slot) in tri.iter_mut().enumerate() {
            let o = base + 12 * j;
            let c = [f(o), f(o + 4), f(o + 8)];
            let key = c.map(f32::to_bits);
            *slot = *index.entry(key).or_insert_with(|| {
                vertices.push(Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64));
                (vertices.len() - 1) as u32
            });
        }
        triangles.push(tri);
    }
    Ok(PeabodyMesh::from_raw(vertices, triangles))
}

/// Sphere triangulated from an octahedron with `res` segments per edge.
pub fn sphere(center: Vec3, radius: f64, res: usize) -> Result<PeabodyMesh> {
    if res < 1 || !(radius > 0.0) {
        return Err(invalid("sphere needs res >= 1 and positive radius"));
    }
    let n = res as i64;
    let mut index: HashMap<(i64, i64, i64), u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut origins = Vec::new();
    let mut id = |p: (i64, i64, i64)| -> u32 {
        *index.entry(p).or_insert_with(|| {
            let v = Vec3::new(p.0 as f64, p.1 as f64, p.2 as f64).normalize();
            vertices.push(center + v * radius);
            origins.push(VertexOrigin::Sphere { center, radius });
            (vertices.len() - 1) as u32
        })
    };
    let mut triangles = Vec::new();
    for sx in [1i64, -1] {
        for sy in [1i64, -1] {
            for sz in [1i64, -1] {
                let pt = |i: i64, j: i64| (sx * (n - i - j), sy * i, sz * j);
                for i in 0..n {
                    for j in 0..n - i {
                        let mut tris = vec![[pt(i, j), pt(i + 1, j), pt(i, j + 1)]];
                        if i + j + 1 < n {
                            tris.push([pt(i + 1, j), pt(i + 1, j + 1), pt(i, j + 1)]);
                        }
                        for t in tris {
                            let mut tri = t.map(&mut id);
                            if sx * sy * sz < 0 {
                                tri.swap(1, 2);
                            }
                            triangles.push(tri);
                        }
                    }
                }
            }
        }
    }
    let mut mesh = PeabodyMesh::from_raw(vertices, triangles);
    mesh.origins = origins;
    Ok(mesh)
}

/// Axis-aligned cube with one corner at the origin.
pub fn cube(side: f64) -> PeabodyMesh {
    let mut vertices = Vec::new();
    for i in 0..8 {
        vertices.push(Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64) * side);
    }
    let quads = [
        [0, 2, 3, 1],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 4, 6, 2],
        [1, 3, 7, 5],
    ];
    let triangles = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    PeabodyMesh::from_raw(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_is_closed_and_oriented() {
        let s = sphere(Vec3::new(1.0, 0.0, 0.0), 2.0, 8).unwrap();
        s.check_watertight().unwrap();
        assert_eq!(s.euler_characteristic(), 2);
        assert_eq!(s.vertex_count(), 4 * 64 + 2);
        for k in 0..s.triangle_count() {
            let c: Vec3 = s.triangles[k].iter().map(|&i| s.vertices[i as usize]).sum::<Vec3>() / 3.0;
            assert!(s.triangle_normal(k).dot(&(c - Vec3::new(1.0, 0.0, 0.0))) > 0.0);
        }
        assert!(s.local_convexity_violation() <= 1e-12);
    }

    #[test]
    fn cube_is_closed_and_oriented() {
        let c = cube(1.0);
        c.check_watertight().unwrap();
        assert_eq!(c.euler_characteristic(), 2);
        for k in 0..12 {
            let ctr: Vec3 = c.triangles[k].iter().map(|&i| c.vertices[i as usize]).sum::<Vec3>() / 3.0;
            assert!(c.triangle_normal(k).dot(&(ctr - Vec3::repeat(0.5))) > 0.0);
        }
    }

    #[test]
    fn obj_roundtrip_is_exact() {
        let mut s = sphere(Vec3::new(0.1, 0.2, 0.3), 1.0 / 3.0, 4).unwrap();
        s.face_tags = (0..s.triangle_count()).map(|k| if k < 10 { FaceTag::Cap(2) } else { FaceTag::Wedge(0, 3) }).collect();
        let mut buf = Vec::new();
        s.write_obj(&mut buf).unwrap();
        let back = read_obj(&buf[..]).unwrap();
        assert_eq!(back.vertices, s.vertices);
        assert_eq!(back.triangles, s.triangles);
        assert_eq!(back.face_tags, s.face_tags);
    }

    #[test]
    fn stl_roundtrip_welds_vertices() {
        let s = sphere(Vec3::zeros(), 1.0, 6).unwrap();
        let mut buf = Vec::new();
        s.write_stl(&mut buf).unwrap();
        assert_eq!(buf.len(), 84 + 50 * s.triangle_count());
        let back = read_stl(&buf[..]).unwrap();
        assert_eq!(back.vertex_count(), s.vertex_count());
        back.check_watertight().unwrap();
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(read_obj(&b"v 1 2\n"[..]).is_err());
        assert!(read_obj(&b"v 0 0 0\nf 1 2 3\n"[..]).is_err());
        assert!(read_stl(&b"short"[..]).is_err());
        let open = PeabodyMesh::from_raw(
            vec![Vec3::zeros(), Vec3::x(), Vec3::y()],
            vec![[0, 1, 2]],
        );
        assert!(open.check_watertight().is_err());
    }

    #[test]
    fn tag_names_roundtrip() {
        for t in [FaceTag::Cap(3), FaceTag::Wedge(1, 2), FaceTag::Hull, FaceTag::Plain] {
            assert_eq!(FaceTag::parse(&t.name()), t);
        }
    }
}
