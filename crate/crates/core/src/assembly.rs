//! Stitching four spherical caps and six wedge surfaces into a closed mesh.
//!
//! Every build goes through a [`SelfDualGraphEmbedding`]: the tetrahedral
//! bodies derive one from their configuration, graph peabodies read one from
//! JSON. Each dual edge pair carries a [`DevicePair`]; each edge gets the
//! wedge surface of its own device; each vertex `v` gets the piece of the
//! sphere of radius `width` about `v` bounded by the wedge curves lying on it.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{bad_input, impossible, invalid, Error, Result};
use crate::geom::{semi_regular_points, unit, EdgePair, Tetrahedron, Vec3, ABS_GEO_REL, VERTEX_NAMES};
use crate::mesh::{FaceTag, PeabodyMesh, VertexOrigin};
use crate::peapod::{fit_confocal_beams, fit_parabolic_beams, Beams, DevicePair, FrameKind};
use crate::quadrics::ConfocalQuadricPair;
use crate::wedge::{sample_wedge, Side, WedgeSurface};

/// Pea string family used on one pair of opposite edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilySpec {
    Parabolic,
    /// Ellipse on the near edge, hyperbola on the far edge.
    EllipticHyperbolic { eccentricity: f64 },
    /// Circle on one edge (left sharp) and a line on the `rounded` edge.
    CircleLine { rounded: (usize, usize) },
}

/// One configured pair of opposite edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSpec {
    pub pair: EdgePair,
    pub family: FamilySpec,
}

impl PairSpec {
    /// The pair with the circle-line rounded edge moved to the far slot.
    fn oriented(&self) -> Result<EdgePair> {
        let same = |a: (usize, usize), b: (usize, usize)| (a.0.min(a.1), a.0.max(a.1)) == (b.0.min(b.1), b.0.max(b.1));
        match self.family {
            FamilySpec::CircleLine { rounded } if same(rounded, self.pair.far) => Ok(self.pair),
            FamilySpec::CircleLine { rounded } if same(rounded, self.pair.near) => Ok(self.pair.swapped()),
            FamilySpec::CircleLine { rounded } => Err(invalid(format!(
                "rounded edge {}{} is not in pair {}",
                VERTEX_NAMES[rounded.0.min(3)],
                VERTEX_NAMES[rounded.1.min(3)],
                self.pair.label()
            ))),
            _ => Ok(self.pair),
        }
    }
}

/// Configuration of a peabody over a tetrahedron.
#[derive(Debug, Clone, PartialEq)]
pub struct PeabodyConfig {
    pub tetrahedron: Tetrahedron,
    pub pairs: [PairSpec; 3],
    pub resolution: usize,
}

impl PeabodyConfig {
    pub fn new(tetrahedron: Tetrahedron, pairs: [PairSpec; 3], resolution: usize) -> Result<Self> {
        let cfg = PeabodyConfig {
            tetrahedron,
            pairs,
            resolution,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(invalid(format!("resolution must be at least 2, got {}", self.resolution)));
        }
        let mut seen = [false; 6];
        for spec in &self.pairs {
            let p = EdgePair::new(spec.pair.near, spec.pair.far)?;
            for e in [p.near, p.far] {
                let k = edge_index(e);
                if seen[k] {
                    return Err(invalid(format!("edge pair {} configured twice", p.label())));
                }
                seen[k] = true;
            }
            spec.oriented()?;
            if let FamilySpec::EllipticHyperbolic { eccentricity } = spec.family {
                if !(eccentricity > 0.0 && eccentricity < 1.0) {
                    return Err(invalid(format!(
                        "elliptic-hyperbolic eccentricity must lie in (0, 1), got {eccentricity}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The embedding of `K4` this configuration builds on, with each dual
    /// pair listed near edge first.
    pub fn embedding(&self) -> Result<SelfDualGraphEmbedding> {
        let edges: Vec<(usize, usize)> = Tetrahedron::edges().to_vec();
        let mut dual = Vec::with_capacity(3);
        for spec in &self.pairs {
            let p = spec.oriented()?;
            dual.push((edge_index(p.near), edge_index(p.far)));
        }
        let partner = partner_table(edges.len(), &dual);
        let faces = (0..4)
            .map(|v| {
                (0..edges.len())
                    .filter(|&e| {
                        let f = edges[partner[e]];
                        f.0 == v || f.1 == v
                    })
                    .collect()
            })
            .collect();
        let g = SelfDualGraphEmbedding {
            names: VERTEX_NAMES.iter().map(|c| c.to_string()).collect(),
            vertices: self.tetrahedron.vertices.to_vec(),
            edges,
            dual_pairs: dual,
            faces,
            width: self.tetrahedron.side_target,
        };
        g.validate()?;
        Ok(g)
    }
}

/// Index of an edge `{i, j}` of `K4` in [`Tetrahedron::edges`] order.
fn edge_index(e: (usize, usize)) -> usize {
    let key = (e.0.min(e.1), e.0.max(e.1));
    Tetrahedron::edges().iter().position(|&x| x == key).expect("edge of K4")
}

fn partner_table(n_edges: usize, dual: &[(usize, usize)]) -> Vec<usize> {
    let mut partner = vec![usize::MAX; n_edges];
    for &(a, b) in dual {
        partner[a] = b;
        partner[b] = a;
    }
    partner
}

/// Metric embedding of a self-dual graph with a dual edge pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfDualGraphEmbedding {
    pub names: Vec<String>,
    pub vertices: Vec<Vec3>,
    pub edges: Vec<(usize, usize)>,
    /// `(near edge, far edge)` index pairs.
    pub dual_pairs: Vec<(usize, usize)>,
    /// Per vertex, the cyclic list of edges bounding its spherical cap.
    pub faces: Vec<Vec<usize>>,
    pub width: f64,
}

/// On-disk form of [`SelfDualGraphEmbedding`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub width: f64,
    pub vertices: BTreeMap<String, [f64; 3]>,
    pub edges: Vec<[String; 2]>,
    pub dual_pairs: Vec<[usize; 2]>,
    pub faces: BTreeMap<String, Vec<usize>>,
}

impl SelfDualGraphEmbedding {
    /// Parses the JSON graph format. Vertices are numbered in id order.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| bad_input(format!("graph JSON: {e}")))?;
        Self::from_file(&file)
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        let names: Vec<String> = file.vertices.keys().cloned().collect();
        let id: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let lookup = |n: &str| id.get(n).copied().ok_or_else(|| bad_input(format!("unknown vertex id {n:?}")));
        let edges = file
            .edges
            .iter()
            .map(|[a, b]| Ok((lookup(a)?, lookup(b)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut faces = vec![Vec::new(); names.len()];
        for (n, list) in &file.faces {
            faces[lookup(n)?] = list.clone();
        }
        let g = SelfDualGraphEmbedding {
            vertices: file.vertices.values().map(|p| Vec3::new(p[0], p[1], p[2])).collect(),
            names,
            edges,
            dual_pairs: file.dual_pairs.iter().map(|p| (p[0], p[1])).collect(),
            faces,
            width: file.width,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn to_file(&self) -> GraphFile {
        let n = |i: usize| self.names[i].clone();
        GraphFile {
            width: self.width,
            vertices: (0..self.names.len()).map(|i| (n(i), [self.vertices[i].x, self.vertices[i].y, self.vertices[i].z])).collect(),
            edges: self.edges.iter().map(|&(a, b)| [n(a), n(b)]).collect(),
            dual_pairs: self.dual_pairs.iter().map(|&(a, b)| [a, b]).collect(),
            faces: (0..self.names.len()).map(|i| (n(i), self.faces[i].clone())).collect(),
        }
    }

    /// `"a-b"` for edge `e`.
    pub fn edge_label(&self, e: usize) -> String {
        let (a, b) = self.edges[e];
        format!("{}-{}", self.names[a], self.names[b])
    }

    /// `"dual pair k (edges a-b / c-d)"`.
    pub fn pair_label(&self, k: usize) -> String {
        let (n, f) = self.dual_pairs[k];
        format!("dual pair {k} (edges {} / {})", self.edge_label(n), self.edge_label(f))
    }

    fn partners(&self) -> Vec<usize> {
        partner_table(self.edges.len(), &self.dual_pairs)
    }

    pub fn centroid(&self) -> Vec3 {
        self.vertices.iter().sum::<Vec3>() / self.vertices.len() as f64
    }

    /// Combinatorial checks: edges, perfect dual matching and cap loops.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        if nv < 4 || self.names.len() != nv || self.faces.len() != nv {
            return Err(bad_input("embedding needs at least four vertices, each with a name and a face"));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(bad_input(format!("width must be positive, got {}", self.width)));
        }
        if self.vertices.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(bad_input("vertex coordinates must be finite"));
        }
        let mut seen_edges = std::collections::HashSet::new();
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            if a >= nv || b >= nv || a == b {
                return Err(bad_input(format!("edge {k} is not a pair of distinct vertices")));
            }
            if !seen_edges.insert((a.min(b), a.max(b))) {
                return Err(bad_input(format!("edge {} is listed twice", self.edge_label(k))));
            }
        }
        let ne = self.edges.len();
        let mut matched = vec![false; ne];
        for (k, &(n, f)) in self.dual_pairs.iter().enumerate() {
            for e in [n, f] {
                if e >= ne {
                    return Err(bad_input(format!("dual pair {k} references missing edge {e}")));
                }
                if matched[e] {
                    return Err(bad_input(format!("edge {} is in two dual pairs", self.edge_label(e))));
                }
                matched[e] = true;
            }
            let (p, q) = (self.edges[n], self.edges[f]);
            if p.0 == q.0 || p.0 == q.1 || p.1 == q.0 || p.1 == q.1 {
                return Err(bad_input(format!("{} shares a vertex", self.pair_label(k))));
            }
        }
        if let Some(e) = matched.iter().position(|m| !m) {
            return Err(bad_input(format!("edge {} has no dual partner", self.edge_label(e))));
        }
        let partner = self.partners();
        for v in 0..nv {
            let mut expected: Vec<usize> = (0..ne)
                .filter(|&e| {
                    let f = self.edges[partner[e]];
                    f.0 == v || f.1 == v
                })
                .collect();
            let mut given = self.faces[v].clone();
            given.sort_unstable();
            expected.sort_unstable();
            if given != expected {
                return Err(bad_input(format!(
                    "face of vertex {} must list edges {:?}, got {:?}",
                    self.names[v], expected, self.faces[v]
                )));
            }
            self.cap_loop(v)?;
        }
        Ok(())
    }

    /// Metric checks for dual pair `k`: semi-regular position and all four
    /// cross distances equal to the width.
    pub fn check_pair(&self, k: usize) -> Result<()> {
        let (n, f) = self.dual_pairs[k];
        let (p, q) = (self.edges[n], self.edges[f]);
        let v = &self.vertices;
        let tol = ABS_GEO_REL * self.width * 10.0;
        let name = self.pair_label(k);
        for (i, j) in [(p.0, q.0), (p.0, q.1), (p.1, q.0), (p.1, q.1)] {
            let d = (v[i] - v[j]).norm();
            if (d - self.width).abs() > tol {
                return Err(impossible(format!(
                    "{name}: distance {}{} = {d} differs from width {}",
                    self.names[i], self.names[j], self.width
                )));
            }
        }
        if !semi_regular_points(v[p.0], v[p.1], v[q.0], v[q.1]) {
            return Err(impossible(format!("{name}: edges do not span a semi-regular tetrahedron")));
        }
        Ok(())
    }

    /// Beams of dual pair `k`, near edge first, in stored vertex order.
    pub fn beams(&self, k: usize) -> Beams {
        let (n, f) = self.dual_pairs[k];
        let e = |i: usize| (self.vertices[self.edges[i].0], self.vertices[self.edges[i].1]);
        Beams { near: e(n), far: e(f) }
    }

    /// The cap loop of vertex `v` in canonical cyclic order: starting at the
    /// smallest edge index, continuing to its smaller neighbour. Each entry
    /// is `(edge, reversed)` where `reversed` means the loop runs from the
    /// edge's second endpoint to its first.
    pub fn cap_loop(&self, v: usize) -> Result<Vec<(usize, bool)>> {
        let list = &self.faces[v];
        let k = list.len();
        let name = &self.names[v];
        if k < 3 {
            return Err(bad_input(format!("face of vertex {name} needs at least three edges")));
        }
        let start = (0..k).min_by_key(|&i| list[i]).expect("nonempty");
        let next = list[(start + 1) % k];
        let prev = list[(start + k - 1) % k];
        let order: Vec<usize> = if next <= prev {
            (0..k).map(|i| list[(start + i) % k]).collect()
        } else {
            (0..k).map(|i| list[(start + k - i) % k]).collect()
        };
        let shared = |a: usize, b: usize| -> Option<usize> {
            let (p, q) = (self.edges[a], self.edges[b]);
            let common: Vec<usize> = [p.0, p.1].into_iter().filter(|x| *x == q.0 || *x == q.1).collect();
            (common.len() == 1).then(|| common[0])
        };
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let (prev_e, e) = (order[(i + k - 1) % k], order[i]);
            let corner = shared(prev_e, e).ok_or_else(|| {
                bad_input(format!(
                    "face of vertex {name}: edges {} and {} are not consecutive",
                    self.edge_label(prev_e),
                    self.edge_label(e)
                ))
            })?;
            let (a, b) = self.edges[e];
            out.push((e, corner == b && corner != a));
        }
        for i in 0..k {
            let (e, rev) = out[i];
            let end = if rev { self.edges[e].0 } else { self.edges[e].1 };
            let (n, nrev) = out[(i + 1) % k];
            let begin = if nrev { self.edges[n].1 } else { self.edges[n].0 };
            if end != begin {
                return Err(bad_input(format!("face of vertex {name} does not close up")));
            }
        }
        Ok(out)
    }
}

/// Classical Meissner solids by which edges are rounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeissnerVariant {
    /// Rounded `ab`, `ac`, `ad`.
    #[value(name = "three_at_vertex")]
    ThreeAtVertex,
    /// Rounded `bc`, `cd`, `bd`.
    #[value(name = "three_at_face")]
    ThreeAtFace,
}

impl MeissnerVariant {
    pub fn rounded_edges(self) -> [(usize, usize); 3] {
        match self {
            MeissnerVariant::ThreeAtVertex => [(0, 1), (0, 2), (0, 3)],
            MeissnerVariant::ThreeAtFace => [(2, 3), (1, 3), (1, 2)],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeissnerVariant::ThreeAtVertex => "three_at_vertex",
            MeissnerVariant::ThreeAtFace => "three_at_face",
        }
    }
}

/// Construction record attached to assembled meshes.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub label: String,
    pub embedding: SelfDualGraphEmbedding,
    /// One entry per dual pair, aligned with `embedding.dual_pairs`.
    pub pairs: Vec<DevicePair>,
    pub families: Vec<FamilySpec>,
    pub resolution: usize,
}

/// Serializable summary of a [`Provenance`].
#[derive(Debug, Clone, Serialize)]
pub struct ProvenanceRecord {
    pub body: String,
    pub width: f64,
    pub resolution: usize,
    pub vertices: BTreeMap<String, [f64; 3]>,
    pub pairs: Vec<PairRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairRecord {
    pub near: String,
    pub far: String,
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eccentricity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounded: Option<String>,
    pub near_frame: FrameKind,
    pub far_frame: FrameKind,
    pub width: f64,
}

impl Provenance {
    pub fn record(&self) -> ProvenanceRecord {
        let g = &self.embedding;
        let pairs = g
            .dual_pairs
            .iter()
            .zip(&self.pairs)
            .zip(&self.families)
            .map(|((&(n, f), dp), fam)| {
                let (family, eccentricity, rounded) = match fam {
                    FamilySpec::Parabolic => ("parabolic", None, None),
                    FamilySpec::EllipticHyperbolic { eccentricity } => ("elliptic_hyperbolic", Some(*eccentricity), None),
                    FamilySpec::CircleLine { .. } => ("circle_line", None, Some(g.edge_label(f))),
                };
                PairRecord {
                    near: g.edge_label(n),
                    far: g.edge_label(f),
                    family: family.into(),
                    eccentricity,
                    rounded,
                    near_frame: dp.near.frame.kind,
                    far_frame: dp.far.frame.kind,
                    width: dp.width,
                }
            })
            .collect();
        ProvenanceRecord {
            body: self.label.clone(),
            width: g.width,
            resolution: self.resolution,
            vertices: g.to_file().vertices,
            pairs,
        }
    }
}

/// A sampled piece of the sphere of radius `radius` about `vertex`.
///
/// The region is bounded by a closed loop of curves, consecutive curves
/// sharing an end point. It is triangulated by one radial sector per curve
/// in the gnomonic chart centred on the mean boundary direction, so every
/// sample is an exact sphere point.
#[derive(Debug, Clone)]
pub struct SphericalCap {
    pub vertex: Vec3,
    pub radius: f64,
    pub boundary: Vec<Vec<Vec3>>,
    /// Curve `k` point `m < res` is at index `k * res + m`; interior samples follow.
    pub points: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl SphericalCap {
    pub fn sample(vertex: Vec3, radius: f64, boundary: Vec<Vec<Vec3>>) -> Result<SphericalCap> {
        let k = boundary.len();
        let res = boundary.first().map_or(0, |c| c.len().saturating_sub(1));
        if k < 3 || res < 2 || boundary.iter().any(|c| c.len() != res + 1) {
            return Err(invalid("cap boundary needs at least three curves of equal length"));
        }
        let dirs: Vec<Vec<Vec3>> = boundary
            .iter()
            .map(|c| c.iter().map(|p| (p - vertex) / radius).collect())
            .collect();
        let mut sum = Vec3::zeros();
        for c in &dirs {
            for d in &c[..res] {
                sum += d;
            }
        }
        let center = unit(sum).ok_or_else(|| Error::Internal("cap boundary surrounds its vertex".into()))?;
        let chart = |d: &Vec3| -> Result<Vec3> {
            let h = d.dot(&center);
            if h <= 0.05 {
                return Err(Error::Internal("cap boundary leaves the chart hemisphere".into()));
            }
            Ok(d / h)
        };
        let charts: Vec<Vec<Vec3>> = dirs
            .iter()
            .map(|c| c.iter().map(chart).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let on_sphere = |q: Vec3| vertex + q.normalize() * radius;
        let edge_at = |sector: usize, s: f64| -> Vec3 {
            let i = (s.floor() as usize).min(res - 1);
            let f = s - i as f64;
            charts[sector][i] * (1.0 - f) + charts[sector][i + 1] * f
        };
        let radial = |sector: usize, row: usize, m: usize| -> Vec3 {
            let s = m as f64 * res as f64 / row as f64;
            let t = row as f64 / res as f64;
            center + (edge_at(sector, s) - center) * t
        };

        let nb = k * res;
        let mut points: Vec<Vec3> = boundary.iter().flat_map(|c| c[..res].iter().copied()).collect();
        let center_id = points.len();
        points.push(vertex + center * radius);
        let spoke0 = points.len();
        for s in 0..k {
            for row in 1..res {
                points.push(on_sphere(radial(s, row, 0)));
            }
        }
        let inner0 = points.len();
        let per_sector = (res - 2) * (res - 1) / 2;
        for s in 0..k {
            for row in 2..res {
                for m in 1..row {
                    points.push(on_sphere(radial(s, row, m)));
                }
            }
        }
        debug_assert_eq!(points.len(), inner0 + k * per_sector);
        let spoke = |s: usize, row: usize| spoke0 + (s % k) * (res - 1) + row - 1;
        let id = |s: usize, row: usize, m: usize| -> usize {
            if row == 0 {
                center_id
            } else if row == res {
                (s * res + m) % nb
            } else if m == 0 {
                spoke(s, row)
            } else if m == row {
                spoke(s + 1, row)
            } else {
                inner0 + s * per_sector + (row - 2) * (row - 1) / 2 + m - 1
            }
        };
        let mut triangles = Vec::with_capacity(k * res * res);
        for s in 0..k {
            for row in 0..res {
                for m in 0..=row {
                    triangles.push([id(s, row, m), id(s, row + 1, m), id(s, row + 1, m + 1)]);
                }
                for m in 0..row {
                    triangles.push([id(s, row, m), id(s, row + 1, m + 1), id(s, row, m + 1)]);
                }
            }
        }
        Ok(SphericalCap {
            vertex,
            radius,
            boundary,
            points,
            triangles,
        })
    }

    pub fn boundary_len(&self) -> usize {
        self.boundary.len() * (self.boundary[0].len() - 1)
    }
}

/// Incremental mesh with outward orientation relative to an interior point.
struct Stitcher {
    vertices: Vec<Vec3>,
    origins: Vec<VertexOrigin>,
    triangles: Vec<[u32; 3]>,
    tags: Vec<FaceTag>,
    inside: Vec3,
}

impl Stitcher {
    fn vertex(&mut self, p: Vec3, origin: VertexOrigin) -> u32 {
        self.vertices.push(p);
        self.origins.push(origin);
        (self.vertices.len() - 1) as u32
    }

    fn triangle(&mut self, t: [u32; 3], tag: FaceTag) {
        let [a, b, c] = t.map(|i| self.vertices[i as usize]);
        let n = (b - a).cross(&(c - a));
        let t = if n.dot(&((a + b + c) / 3.0 - self.inside)) < 0.0 {
            [t[0], t[2], t[1]]
        } else {
            t
        };
        self.triangles.push(t);
        self.tags.push(tag);
    }
}

/// Relative height below which the two diagonals of a wedge quad tie.
const DIAGONAL_TIE: f64 = 1e-12;

fn fit_pair(beams: &Beams, family: &FamilySpec) -> Result<DevicePair> {
    match family {
        FamilySpec::Parabolic => fit_parabolic_beams(beams),
        FamilySpec::EllipticHyperbolic { eccentricity } => {
            fit_confocal_beams(beams, &ConfocalQuadricPair::with_eccentricity(*eccentricity)?)
        }
        FamilySpec::CircleLine { .. } => fit_confocal_beams(beams, &ConfocalQuadricPair::circle_line(1.0)?),
    }
}

fn with_pair_name(g: &SelfDualGraphEmbedding, k: usize, e: Error) -> Error {
    match e {
        Error::ConstructionImpossible(m) => impossible(format!("{}: {m}", g.pair_label(k))),
        other => other,
    }
}

/// Adds the cap of every vertex, bounded by the stored seam curves.
///
/// `curve_ids[e][s]` runs along edge `e` from its first to its second
/// endpoint on the sphere about endpoint `s` of the partner edge.
fn stitch_caps(st: &mut Stitcher, g: &SelfDualGraphEmbedding, curve_ids: &[[Vec<u32>; 2]], res: usize) -> Result<()> {
    let partner = g.partners();
    for v in 0..g.vertices.len() {
        let lp = g.cap_loop(v)?;
        let mut curves = Vec::with_capacity(lp.len());
        let mut ids = Vec::with_capacity(lp.len());
        for &(e, reversed) in &lp {
            let f = g.edges[partner[e]];
            let s = if f.0 == v { 0 } else { 1 };
            let mut c: Vec<u32> = curve_ids[e][s].clone();
            if reversed {
                c.reverse();
            }
            curves.push(c.iter().map(|&i| st.vertices[i as usize]).collect::<Vec<_>>());
            ids.push(c);
        }
        let cap = SphericalCap::sample(g.vertices[v], g.width, curves)?;
        let nb = cap.boundary_len();
        let mut map: Vec<u32> = (0..nb).map(|l| ids[l / res][l % res]).collect();
        for p in &cap.points[nb..] {
            map.push(st.vertex(*p, VertexOrigin::Cap(v as u32)));
        }
        for t in &cap.triangles {
            st.triangle(t.map(|i| map[i]), FaceTag::Cap(v as u32));
        }
    }
    Ok(())
}

/// Builds the mesh of an embedding with one family per dual pair.
pub fn assemble_embedding(
    g: &SelfDualGraphEmbedding,
    families: &[FamilySpec],
    res: usize,
    label: &str,
) -> Result<PeabodyMesh> {
    g.validate()?;
    if families.len() != g.dual_pairs.len() {
        return Err(invalid("one family per dual pair is required"));
    }
    if res < 2 {
        return Err(invalid(format!("resolution must be at least 2, got {res}")));
    }
    let mut pairs = Vec::with_capacity(families.len());
    for (k, fam) in families.iter().enumerate() {
        g.check_pair(k)?;
        let dp = fit_pair(&g.beams(k), fam).map_err(|e| with_pair_name(g, k, e))?;
        if (dp.width - g.width).abs() > ABS_GEO_REL * g.width * 10.0 {
            return Err(impossible(format!("{}: fitted width {} differs from {}", g.pair_label(k), dp.width, g.width)));
        }
        pairs.push(dp);
    }

    // Per edge: its pair, side, and wedge surface.
    let ne = g.edges.len();
    let mut owner: Vec<(usize, Side)> = vec![(0, Side::Near); ne];
    for (k, &(n, f)) in g.dual_pairs.iter().enumerate() {
        owner[n] = (k, Side::Near);
        owner[f] = (k, Side::Far);
    }
    let wedges: Vec<WedgeSurface> = (0..ne)
        .map(|e| sample_wedge(&pairs[owner[e].0], owner[e].1, res))
        .collect::<Result<_>>()?;
    let degenerate: Vec<bool> = (0..ne)
        .map(|e| {
            let dp = &pairs[owner[e].0];
            match owner[e].1 {
                Side::Near => dp.near.is_degenerate(),
                Side::Far => dp.far.is_degenerate(),
            }
        })
        .collect();
    let params = |e: usize, i: usize, j: usize| -> (f64, f64) {
        let w = &wedges[e];
        match w.side {
            Side::Near => (w.near_params[i], w.far_params[j]),
            Side::Far => (w.near_params[j], w.far_params[i]),
        }
    };

    let mut st = Stitcher {
        vertices: Vec::new(),
        origins: Vec::new(),
        triangles: Vec::new(),
        tags: Vec::new(),
        inside: g.centroid(),
    };
    for (v, p) in g.vertices.iter().enumerate() {
        st.vertex(*p, VertexOrigin::Vertex(v as u32));
    }

    // Boundary curves: ids[e][s][i] for partner endpoint s, own index i.
    let mut curve_ids: Vec<[Vec<u32>; 2]> = Vec::with_capacity(ne);
    for e in 0..ne {
        let (a, b) = g.edges[e];
        let (k, side) = owner[e];
        let mut sides: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
        for s in 0..2 {
            if s == 1 && degenerate[e] {
                sides[1] = sides[0].clone();
                continue;
            }
            let j = if s == 0 { 0 } else { res };
            let mut ids = vec![a as u32];
            for i in 1..res {
                let (u, w) = params(e, i, j);
                let origin = VertexOrigin::Wedge { pair: k as u32, side, u, v: w };
                ids.push(st.vertex(wedges[e].boundary[s][i], origin));
            }
            ids.push(b as u32);
            sides[s] = ids;
        }
        curve_ids.push(sides);
    }

    // Wedge interiors and triangles.
    for e in 0..ne {
        if degenerate[e] {
            continue;
        }
        let (a, b) = g.edges[e];
        let (k, side) = owner[e];
        let w = &wedges[e];
        let tag = FaceTag::Wedge(a.min(b) as u32, a.max(b) as u32);
        let mut inner = vec![vec![0u32; res + 1]; res + 1];
        for (i, row) in inner.iter_mut().enumerate().take(res).skip(1) {
            for (j, slot) in row.iter_mut().enumerate().take(res).skip(1) {
                let (u, v) = params(e, i, j);
                *slot = st.vertex(w.own_partner(i, j), VertexOrigin::Wedge { pair: k as u32, side, u, v });
            }
        }
        let id = |i: usize, j: usize| -> u32 {
            if i == 0 {
                a as u32
            } else if i == res {
                b as u32
            } else if j == 0 {
                curve_ids[e][0][i]
            } else if j == res {
                curve_ids[e][1][i]
            } else {
                inner[i][j]
            }
        };
        let normal = |i: usize, j: usize| match side {
            Side::Near => w.normals[i][j],
            Side::Far => w.normals[j][i],
        };
        for i in 0..res {
            for j in 0..res {
                if i == 0 {
                    st.triangle([id(0, 0), id(1, j), id(1, j + 1)], tag);
                } else if i + 1 == res {
                    st.triangle([id(i, j), id(res, 0), id(i, j + 1)], tag);
                } else {
                    let (p00, p10, p11, p01) = (
                        w.own_partner(i, j),
                        w.own_partner(i + 1, j),
                        w.own_partner(i + 1, j + 1),
                        w.own_partner(i, j + 1),
                    );
                    let n = normal(i, j) + normal(i + 1, j) + normal(i + 1, j + 1) + normal(i, j + 1);
                    // Near-planar quads take the first diagonal so the choice survives scaling.
                    let bulge = (p00 + p11 - p10 - p01).dot(&n) / n.norm();
                    if bulge >= -DIAGONAL_TIE * g.width {
                        st.triangle([id(i, j), id(i + 1, j), id(i + 1, j + 1)], tag);
                        st.triangle([id(i, j), id(i + 1, j + 1), id(i, j + 1)], tag);
                    } else {
                        st.triangle([id(i, j), id(i + 1, j), id(i, j + 1)], tag);
                        st.triangle([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)], tag);
                    }
                }
            }
        }
    }

    stitch_caps(&mut st, g, &curve_ids, res)?;

    let provenance = Provenance {
        label: label.to_string(),
        embedding: g.clone(),
        pairs,
        families: families.to_vec(),
        resolution: res,
    };
    let mesh = PeabodyMesh {
        vertices: st.vertices,
        triangles: st.triangles,
        face_tags: st.tags,
        origins: st.origins,
        provenance: Some(Arc::new(provenance)),
    };
    mesh.check_watertight()
        .map_err(|e| Error::Internal(format!("assembled mesh is not watertight: {e}")))?;
    Ok(mesh)
}

/// Builds the peabody of a tetrahedral configuration.
pub fn assemble(config: &PeabodyConfig) -> Result<PeabodyMesh> {
    assemble_labeled(config, "custom")
}

fn assemble_labeled(config: &PeabodyConfig, label: &str) -> Result<PeabodyMesh> {
    config.validate()?;
    let g = config.embedding()?;
    let families: Vec<FamilySpec> = config.pairs.iter().map(|p| p.family).collect();
    assemble_embedding(&g, &families, config.resolution, label)
}

/// The peabody with confocal parabolic devices on all three pairs.
pub fn roberts_body(side: f64, res: usize) -> Result<PeabodyMesh> {
    let t = Tetrahedron::regular(side)?;
    let pairs = EdgePair::standard().map(|pair| PairSpec {
        pair,
        family: FamilySpec::Parabolic,
    });
    assemble_labeled(&PeabodyConfig::new(t, pairs, res)?, "robert")
}

/// A Meissner body: circle-line devices on all pairs, rounding the edges
/// selected by `variant`.
pub fn meissner_body(variant: MeissnerVariant, side: f64, res: usize) -> Result<PeabodyMesh> {
    let t = Tetrahedron::regular(side)?;
    let std = EdgePair::standard();
    let rounded = variant.rounded_edges();
    let pairs = std.map(|pair| {
        let r = *rounded
            .iter()
            .find(|&&r| r == pair.near || r == pair.far)
            .expect("one rounded edge per pair");
        PairSpec {
            pair,
            family: FamilySpec::CircleLine { rounded: r },
        }
    });
    assemble_labeled(&PeabodyConfig::new(t, pairs, res)?, &format!("meissner {}", variant.name()))
}

/// The deformation family from the three-at-vertex Meissner body (`λ = 0`)
/// to Robert's body (`λ = 1`).
///
/// Intermediate bodies use elliptic-hyperbolic devices of eccentricity `λ`,
/// with the ellipse on the edge that is sharp at `λ = 0`.
pub fn family_body(lambda: f64, side: f64, res: usize) -> Result<PeabodyMesh> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(invalid(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    if lambda == 0.0 {
        return meissner_body(MeissnerVariant::ThreeAtVertex, side, res);
    }
    if lambda == 1.0 {
        return roberts_body(side, res);
    }
    let t = Tetrahedron::regular(side)?;
    let rounded = MeissnerVariant::ThreeAtVertex.rounded_edges();
    let pairs = EdgePair::standard().map(|pair| {
        let r = *rounded.iter().find(|&&r| r == pair.near || r == pair.far).expect("one per pair");
        let sharp = if r == pair.near { pair.far } else { pair.near };
        PairSpec {
            pair: EdgePair { near: sharp, far: r },
            family: FamilySpec::EllipticHyperbolic { eccentricity: lambda },
        }
    });
    assemble_labeled(&PeabodyConfig::new(t, pairs, res)?, &format!("family lambda={lambda}"))
}

/// The Reuleaux tetrahedron: the intersection of the four balls of radius
/// `side` about the vertices. Its edges are circular arcs about the
/// midpoints of the opposite edges. It is not of constant width.
pub fn reuleaux_tetrahedron(side: f64, res: usize) -> Result<PeabodyMesh> {
    if res < 2 {
        return Err(invalid(format!("resolution must be at least 2, got {res}")));
    }
    let t = Tetrahedron::regular(side)?;
    let pairs = EdgePair::standard().map(|pair| PairSpec {
        pair,
        family: FamilySpec::Parabolic,
    });
    let g = PeabodyConfig::new(t, pairs, res)?.embedding()?;
    let mut st = Stitcher {
        vertices: Vec::new(),
        origins: Vec::new(),
        triangles: Vec::new(),
        tags: Vec::new(),
        inside: g.centroid(),
    };
    for (v, p) in g.vertices.iter().enumerate() {
        st.vertex(*p, VertexOrigin::Vertex(v as u32));
    }
    let partner = g.partners();
    let mut curve_ids = Vec::with_capacity(g.edges.len());
    for (e, &(a, b)) in g.edges.iter().enumerate() {
        let f = g.edges[partner[e]];
        let m = (g.vertices[f.0] + g.vertices[f.1]) / 2.0;
        let (pa, pb) = (g.vertices[a] - m, g.vertices[b] - m);
        let r = pa.norm();
        let e1 = pa / r;
        let e2 = (pb - e1 * e1.dot(&pb)).normalize();
        let angle = pb.dot(&e2).atan2(pb.dot(&e1));
        let mut ids = vec![a as u32];
        for i in 1..res {
            let s = angle * i as f64 / res as f64;
            ids.push(st.vertex(m + (e1 * s.cos() + e2 * s.sin()) * r, VertexOrigin::Unknown));
        }
        ids.push(b as u32);
        curve_ids.push([ids.clone(), ids]);
    }
    stitch_caps(&mut st, &g, &curve_ids, res)?;
    let mesh = PeabodyMesh {
        vertices: st.vertices,
        triangles: st.triangles,
        face_tags: st.tags,
        origins: st.origins,
        provenance: None,
    };
    mesh.check_watertight()
        .map_err(|e| Error::Internal(format!("Reuleaux mesh is not watertight: {e}")))?;
    Ok(mesh)
}

/// The peabody of a self-dual graph embedding, with parabolic devices on
/// every dual pair.
pub fn graph_peabody(g: &SelfDualGraphEmbedding, res: usize) -> Result<PeabodyMesh> {
    g.validate()?;
    let families = vec![FamilySpec::Parabolic; g.dual_pairs.len()];
    assemble_embedding(g, &families, res, "graph")
}
