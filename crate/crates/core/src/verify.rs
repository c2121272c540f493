//! Width certificates, binormal and containment checks, symmetry, plane
//! sections, Minkowski sums and volumes.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{bad_input, invalid, Error, Result};
use crate::geom::{fibonacci_sphere, orthonormal_complement, unit, Isometry, Tetrahedron, Vec3};
use crate::mesh::{FaceTag, PeabodyMesh, VertexOrigin};
use crate::wedge::{phi, Side};

/// Seed of every randomized check, so reports are reproducible.
pub const SAMPLE_SEED: u64 = 0x5eed_ab0d;

/// Support queries `h(u) = max p·u` over mesh vertices.
///
/// Queries walk the vertex adjacency uphill from the best of a fixed set of
/// seeds; meshes without triangles are scanned exhaustively.
#[derive(Debug, Clone)]
pub struct SupportOracle {
    points: Vec<Vec3>,
    neighbors: Vec<Vec<u32>>,
    seeds: Vec<u32>,
}

impl SupportOracle {
    pub fn new(mesh: &PeabodyMesh) -> Self {
        let n = mesh.vertices.len();
        let mut neighbors = vec![Vec::new(); n];
        for t in &mesh.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                neighbors[a as usize].push(b);
                neighbors[b as usize].push(a);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        let mut seeds: Vec<u32> = fibonacci_sphere(64)
            .iter()
            .filter_map(|u| brute_support(&mesh.vertices, u).map(|(i, _)| i as u32))
            .collect();
        seeds.sort_unstable();
        seeds.dedup();
        SupportOracle {
            points: mesh.vertices.clone(),
            neighbors,
            seeds,
        }
    }

    /// Index and value of a maximizing vertex.
    pub fn support(&self, u: &Vec3) -> Option<(usize, f64)> {
        if self.neighbors.iter().all(Vec::is_empty) {
            return brute_support(&self.points, u);
        }
        let mut best = *self.seeds.iter().max_by(|&&a, &&b| {
            let (da, db) = (self.points[a as usize].dot(u), self.points[b as usize].dot(u));
            da.total_cmp(&db).then(b.cmp(&a))
        })? as usize;
        let mut value = self.points[best].dot(u);
        loop {
            let mut moved = false;
            for &j in &self.neighbors[best] {
                let d = self.points[j as usize].dot(u);
                if d > value {
                    value = d;
                    best = j as usize;
                    moved = true;
                }
            }
            if !moved {
                return Some((best, value));
            }
        }
    }
}

/// Exhaustive support query.
pub fn brute_support(points: &[Vec3], u: &Vec3) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        let d = p.dot(u);
        if best.is_none_or(|(_, b)| d > b) {
            best = Some((i, d));
        }
    }
    best
}

/// `h(u) + h(-u)` over the points.
pub fn width_along(points: &[Vec3], u: &Vec3) -> f64 {
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for p in points {
        let d = p.dot(u);
        hi = hi.max(d);
        lo = lo.min(d);
    }
    hi - lo
}

/// Extreme-width directions of a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremeDirections {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

/// Width certificate of a mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthReport {
    pub n_dirs: usize,
    pub min_width: f64,
    pub max_width: f64,
    pub mean_width: f64,
    pub diameter: f64,
    pub pass: bool,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_width: Option<f64>,
    pub extreme_directions: ExtremeDirections,
}

/// Pattern search for an extremum of `f` on the sphere near `u`.
fn refine_direction(u: Vec3, step: f64, sign: f64, f: &dyn Fn(&Vec3) -> f64) -> (Vec3, f64) {
    let mut best = u;
    let mut value = sign * f(&u);
    let mut step = step;
    let mut evals = 0;
    while step > 1e-9 && evals < 400 {
        let (e1, e2) = orthonormal_complement(&best);
        let mut improved = false;
        for d in [e1, -e1, e2, -e2] {
            let cand = (best + d * step).normalize();
            let v = sign * f(&cand);
            evals += 1;
            if v > value {
                value = v;
                best = cand;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, sign * value)
}

/// Samples `h(u) + h(-u)` on `n_dirs` Fibonacci directions, refines the
/// extremes locally, and computes the exact vertex diameter.
///
/// Passes when the spread is at most `tol` and, if `expected` is given,
/// the largest width is within `tol` of it.
pub fn width_report(mesh: &PeabodyMesh, n_dirs: usize, tol: f64, expected: Option<f64>) -> Result<WidthReport> {
    if n_dirs < 100 {
        return Err(invalid(format!("at least 100 directions are required, got {n_dirs}")));
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(invalid(format!("tolerance must be non-negative, got {tol}")));
    }
    if mesh.vertices.len() < 4 {
        return Err(bad_input("mesh has fewer than four vertices"));
    }
    let violation = mesh.local_convexity_violation();
    if violation > tol.max(1e-9 * mesh_scale(mesh)) {
        return Err(bad_input(format!("mesh is not convex: a vertex lies {violation:.3e} above a face plane")));
    }
    let pts = &mesh.vertices;
    let dirs = fibonacci_sphere(n_dirs);
    let widths: Vec<f64> = dirs.iter().map(|u| width_along(pts, u)).collect();
    let mean = widths.iter().sum::<f64>() / n_dirs as f64;
    let mut order: Vec<usize> = (0..n_dirs).collect();
    order.sort_by(|&a, &b| widths[a].total_cmp(&widths[b]).then(a.cmp(&b)));

    let step = 2.0 * (4.0 * std::f64::consts::PI / n_dirs as f64).sqrt();
    let f = |u: &Vec3| width_along(pts, u);
    const REFINED: usize = 8;
    let (mut min_dir, mut min_w) = (dirs[order[0]], widths[order[0]]);
    for &k in order.iter().take(REFINED) {
        let (u, w) = refine_direction(dirs[k], step, -1.0, &f);
        if w < min_w {
            min_w = w;
            min_dir = u;
        }
    }
    let (mut max_dir, mut max_w) = (dirs[order[n_dirs - 1]], widths[order[n_dirs - 1]]);
    for &k in order.iter().rev().take(REFINED) {
        let (u, w) = refine_direction(dirs[k], step, 1.0, &f);
        if w > max_w {
            max_w = w;
            max_dir = u;
        }
    }
    let diameter = vertex_diameter(pts).max(max_w);
    let mut pass = max_w - min_w <= tol;
    if let Some(e) = expected {
        pass &= (max_w - e).abs() <= tol;
    }
    Ok(WidthReport {
        n_dirs,
        min_width: min_w,
        max_width: max_w,
        mean_width: mean.clamp(min_w, max_w),
        diameter,
        pass,
        tolerance: tol,
        expected_width: expected,
        extreme_directions: ExtremeDirections {
            min: [min_dir.x, min_dir.y, min_dir.z],
            max: [max_dir.x, max_dir.y, max_dir.z],
        },
    })
}

fn mesh_scale(mesh: &PeabodyMesh) -> f64 {
    let c = mesh.vertex_centroid();
    mesh.vertices.iter().map(|p| (p - c).norm()).fold(0.0, f64::max)
}

/// Largest distance between two points, exact.
///
/// Points are grouped into cells by direction from the centroid; cell pairs
/// are visited in decreasing order of their bounding-sphere distance bound
/// and skipped once the bound falls below the best distance found.
pub fn vertex_diameter(points: &[Vec3]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let c = points.iter().sum::<Vec3>() / n as f64;
    let dirs = fibonacci_sphere(256.min(n));
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); dirs.len()];
    for (i, p) in points.iter().enumerate() {
        let d = p - c;
        let k = (0..dirs.len())
            .max_by(|&a, &b| dirs[a].dot(&d).total_cmp(&dirs[b].dot(&d)))
            .unwrap_or(0);
        cells[k].push(i);
    }
    cells.retain(|c| !c.is_empty());
    let spheres: Vec<(Vec3, f64)> = cells
        .iter()
        .map(|cell| {
            let m = cell.iter().map(|&i| points[i]).sum::<Vec3>() / cell.len() as f64;
            let r = cell.iter().map(|&i| (points[i] - m).norm()).fold(0.0, f64::max);
            (m, r)
        })
        .collect();
    let mut bounds = Vec::with_capacity(cells.len() * (cells.len() + 1) / 2);
    for a in 0..cells.len() {
        for b in a..cells.len() {
            let ub = (spheres[a].0 - spheres[b].0).norm() + spheres[a].1 + spheres[b].1;
            bounds.push((ub, a, b));
        }
    }
    bounds.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut best2 = 0.0f64;
    for (ub, a, b) in bounds {
        if ub * ub < best2 {
            break;
        }
        for &i in &cells[a] {
            for &j in &cells[b] {
                best2 = best2.max((points[i] - points[j]).norm_squared());
            }
        }
    }
    best2.sqrt()
}

/// Result of [`binormal_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinormalReport {
    pub samples: usize,
    /// Largest `| |xy| - width |` over sampled partner pairs.
    pub max_gap: f64,
    /// Largest deviation of the two normals from `±(x - y)/|x - y|`.
    pub max_misalignment: f64,
}

/// Samples boundary points with their construction partners and checks
/// that each pair is a binormal chord of length `width`.
///
/// Wedge samples are jittered within a parameter cell and re-evaluated
/// through the device maps; cap samples are random points of a cap
/// triangle pushed onto its sphere, partnered with the cap's vertex.
pub fn binormal_check(mesh: &PeabodyMesh, samples: usize) -> Result<BinormalReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let n = mesh.vertices.len();
    if n == 0 {
        return Err(bad_input("empty mesh"));
    }
    let prov = mesh.provenance.as_deref();
    let mut caps: HashMap<u32, Vec<usize>> = HashMap::new();
    for (k, tag) in mesh.face_tags.iter().enumerate() {
        if let FaceTag::Cap(v) = tag {
            caps.entry(*v).or_default().push(k);
        }
    }
    let (mut gap, mut mis) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let i = rng.gen_range(0..n);
        let p = mesh.vertices[i];
        match mesh.origins[i] {
            VertexOrigin::Wedge { pair, u, v, .. } => {
                let prov = prov.ok_or_else(|| bad_input("wedge vertices without provenance"))?;
                let dp = prov
                    .pairs
                    .get(pair as usize)
                    .ok_or_else(|| bad_input(format!("provenance has no device pair {pair}")))?;
                let res = prov.resolution.max(1) as f64;
                let jitter = |x: f64, half: f64, rng: &mut ChaCha8Rng| {
                    (x + (rng.gen::<f64>() - 0.5) * 2.0 * half / res).clamp(-half, half)
                };
                let u = jitter(u, dp.near.half, &mut rng);
                let v = jitter(v, dp.far.half, &mut rng);
                let (x, nx) = phi(dp, u, v, Side::Near)?;
                let (y, ny) = phi(dp, u, v, Side::Far)?;
                let chord = x - y;
                gap = gap.max((chord.norm() - dp.width).abs());
                let dir = unit(chord).ok_or_else(|| Error::Internal("partners coincide".into()))?;
                mis = mis.max((nx - dir).norm()).max((ny + dir).norm());
            }
            VertexOrigin::Cap(v) => {
                let prov = prov.ok_or_else(|| bad_input("cap vertices without provenance"))?;
                let center = prov.embedding.vertices[v as usize];
                let width = prov.embedding.width;
                let q = match caps.get(&v) {
                    Some(tris) => {
                        let t = mesh.triangles[tris[rng.gen_range(0..tris.len())]];
                        let (mut a, mut b) = (rng.gen::<f64>(), rng.gen::<f64>());
                        if a + b > 1.0 {
                            (a, b) = (1.0 - a, 1.0 - b);
                        }
                        let [p0, p1, p2] = t.map(|k| mesh.vertices[k as usize]);
                        p0 + (p1 - p0) * a + (p2 - p0) * b
                    }
                    None => p,
                };
                let x = center + (q - center).normalize() * width;
                gap = gap.max(((x - center).norm() - width).abs());
                let dir = (x - center).normalize();
                let outward = (x - center) / width;
                mis = mis.max((outward - dir).norm());
            }
            VertexOrigin::Sphere { center, radius } => {
                let partner = center * 2.0 - p;
                gap = gap.max(((p - partner).norm() - 2.0 * radius).abs());
                let (np, nq) = ((p - center) / radius, (partner - center) / radius);
                mis = mis.max((np + nq).norm());
            }
            VertexOrigin::Vertex(_) => {}
            VertexOrigin::Unknown => return Err(bad_input("mesh vertices carry no construction provenance")),
        }
    }
    Ok(BinormalReport {
        samples,
        max_gap: gap,
        max_misalignment: mis,
    })
}

/// Largest excess `|p - a| - width` over mesh vertices `p` and tetrahedron
/// vertices `a`, with `width` the tetrahedron's side.
pub fn reuleaux_containment(mesh: &PeabodyMesh, t: &Tetrahedron) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for p in &mesh.vertices {
        for a in &t.vertices {
            worst = worst.max((p - a).norm() - t.side_target);
        }
    }
    worst
}

/// Largest `|h_{gK}(u) - h_K(u)|` over group elements and `n_dirs` directions.
pub fn symmetry_deviation(mesh: &PeabodyMesh, group: &[Isometry], n_dirs: usize) -> f64 {
    let oracle = SupportOracle::new(mesh);
    let dirs = fibonacci_sphere(n_dirs);
    let base: Vec<f64> = dirs.iter().map(|u| oracle.support(u).map_or(0.0, |s| s.1)).collect();
    let mut worst = 0.0f64;
    for g in group {
        let lt = g.linear.transpose();
        for (u, h) in dirs.iter().zip(&base) {
            let hg = oracle.support(&(lt * u)).map_or(0.0, |s| s.1) + g.translation.dot(u);
            worst = worst.max((hg - h).abs());
        }
    }
    worst
}

/// Largest `|h_A(u) - h_B(u)|` over `n_dirs` directions: the Hausdorff
/// distance of two convex bodies, sampled.
pub fn support_distance(a: &PeabodyMesh, b: &PeabodyMesh, n_dirs: usize) -> f64 {
    let (oa, ob) = (SupportOracle::new(a), SupportOracle::new(b));
    fibonacci_sphere(n_dirs)
        .iter()
        .map(|u| {
            let ha = oa.support(u).map_or(0.0, |s| s.1);
            let hb = ob.support(u).map_or(0.0, |s| s.1);
            (ha - hb).abs()
        })
        .fold(0.0, f64::max)
}

/// A plane through `point` with unit `normal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub point: Vec3,
    pub normal: Vec3,
}

impl Plane {
    pub fn new(point: Vec3, normal: Vec3) -> Result<Self> {
        let normal = unit(normal).ok_or_else(|| invalid("plane normal must be nonzero"))?;
        Ok(Plane { point, normal })
    }

    /// In-plane orthonormal basis.
    pub fn basis(&self) -> (Vec3, Vec3) {
        orthonormal_complement(&self.normal)
    }

    pub fn to_2d(&self, p: &Vec3) -> [f64; 2] {
        let (e1, e2) = self.basis();
        let d = p - self.point;
        [d.dot(&e1), d.dot(&e2)]
    }

    pub fn to_3d(&self, q: [f64; 2]) -> Vec3 {
        let (e1, e2) = self.basis();
        self.point + e1 * q[0] + e2 * q[1]
    }
}

/// A circular arc fitted to a run of section points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FittedArc {
    pub center: [f64; 3],
    pub radius: f64,
    /// Start and end polar angles about the centre, in degrees.
    pub span_deg: (f64, f64),
    pub points: usize,
    pub rms: f64,
}

/// Closed intersection curve of a mesh with a plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarSection {
    pub plane: Plane,
    /// Counter-clockwise about the plane normal, without repeating the start.
    pub polyline: Vec<Vec3>,
    pub arcs: Vec<FittedArc>,
}

impl PlanarSection {
    pub fn points_2d(&self) -> Vec<[f64; 2]> {
        self.polyline.iter().map(|p| self.plane.to_2d(p)).collect()
    }

    /// Smallest and largest planar width over `n_dirs` in-plane directions.
    pub fn width_range(&self, n_dirs: usize) -> (f64, f64) {
        let pts = self.points_2d();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..n_dirs.max(1) {
            let t = std::f64::consts::PI * k as f64 / n_dirs.max(1) as f64;
            let (c, s) = (t.cos(), t.sin());
            let (mut a, mut b) = (f64::NEG_INFINITY, f64::INFINITY);
            for p in &pts {
                let d = p[0] * c + p[1] * s;
                a = a.max(d);
                b = b.min(d);
            }
            lo = lo.min(a - b);
            hi = hi.max(a - b);
        }
        (lo, hi)
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.polyline.len();
        (0..n).map(|i| (self.polyline[(i + 1) % n] - self.polyline[i]).norm()).sum()
    }

    /// Arc length of the curve whose outward normal angle is below each of
    /// `bins` equally spaced angles in `[0, 2π)`.
    ///
    /// Each edge's length is spread over the normal angles between its two
    /// end vertices, at most `spread_cap` radians to each side, which turns
    /// the polygon's step profile into a continuous one.
    pub fn normal_length_profile(&self, bins: usize, spread_cap: f64) -> Vec<f64> {
        use std::f64::consts::TAU;
        let pts = self.points_2d();
        let n = pts.len();
        let edge_angle = |i: usize| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            (b[1] - a[1]).atan2(b[0] - a[0]) - std::f64::consts::FRAC_PI_2
        };
        let wrap = |x: f64| x.rem_euclid(TAU);
        let turn = |i: usize| {
            let d = wrap(edge_angle(i) - edge_angle((i + n - 1) % n));
            if d > std::f64::consts::PI { d - TAU } else { d }
        };
        let mut profile = vec![0.0; bins];
        let step = TAU / bins as f64;
        for i in 0..n {
            let (p, q) = (pts[i], pts[(i + 1) % n]);
            let len = (q[0] - p[0]).hypot(q[1] - p[1]);
            let before = (turn(i).max(0.0) / 2.0).min(spread_cap);
            let after = (turn((i + 1) % n).max(0.0) / 2.0).min(spread_cap);
            let lo = wrap(edge_angle(i) - before);
            let span = before + after;
            for (k, slot) in profile.iter_mut().enumerate() {
                let t = k as f64 * step;
                let frac = if span > 0.0 {
                    let hi = lo + span;
                    let inside = (hi.min(t) - lo).max(0.0) + (hi.min(TAU + t) - lo.max(TAU)).max(0.0);
                    inside / span
                } else if lo < t {
                    1.0
                } else {
                    0.0
                };
                *slot += len * frac;
            }
        }
        profile
    }
}

impl PlanarSection {
    /// Radius of curvature against outward normal angle: the arc length
    /// whose normal lies within `half_window` bins of each of `bins`
    /// angles, divided by that angle range.
    pub fn curvature_profile(&self, bins: usize, half_window: usize, spread_cap: f64) -> Vec<f64> {
        let l = self.normal_length_profile(bins, spread_cap);
        let per = self.perimeter();
        let at = |k: isize| {
            let n = bins as isize;
            let wraps = k.div_euclid(n);
            l[k.rem_euclid(n) as usize] + wraps as f64 * per
        };
        let w = half_window as isize;
        let span = 2.0 * half_window as f64 * std::f64::consts::TAU / bins as f64;
        (0..bins as isize).map(|k| (at(k + w) - at(k - w)) / span).collect()
    }
}

/// Angular bins of [`curvature_profile_distance`] (half a degree).
pub const PROFILE_BINS: usize = 720;
/// Half window, in bins, over which the radius of curvature is averaged.
pub const PROFILE_HALF_WINDOW: usize = 3;
/// Largest angle, in radians, over which one polyline edge is spread.
pub const PROFILE_SPREAD_CAP: f64 = 0.02;

/// `∫ |ρ_a(θ) - ρ_b(θ)| dθ` between the radius-of-curvature profiles of two
/// sections of the same plane: zero for equal arc structures, and of the
/// order of `radius difference × angular extent` otherwise.
pub fn curvature_profile_distance(a: &PlanarSection, b: &PlanarSection) -> f64 {
    let pa = a.curvature_profile(PROFILE_BINS, PROFILE_HALF_WINDOW, PROFILE_SPREAD_CAP);
    let pb = b.curvature_profile(PROFILE_BINS, PROFILE_HALF_WINDOW, PROFILE_SPREAD_CAP);
    pa.iter().zip(&pb).map(|(x, y)| (x - y).abs()).sum::<f64>() * std::f64::consts::TAU / PROFILE_BINS as f64
}

/// Intersects a watertight mesh with a plane and fits circular arcs.
///
/// Vertices exactly on the plane count as above it, so every crossing lies
/// on an edge with one vertex strictly below. Arcs are grown greedily: a
/// point joins the current arc unless its distance from the least-squares
/// circle exceeds both `3σ` of the arc so far and `fit_tol`.
pub fn plane_section(mesh: &PeabodyMesh, plane: &Plane, fit_tol: f64) -> Result<PlanarSection> {
    let s: Vec<f64> = mesh.vertices.iter().map(|p| (p - plane.point).dot(&plane.normal)).collect();
    let above = |i: u32| s[i as usize] >= 0.0;
    let key = |a: u32, b: u32| (a.min(b), a.max(b));
    let mut links: HashMap<(u32, u32), Vec<(u32, u32)>> = HashMap::new();
    for t in &mesh.triangles {
        let crossing: Vec<(u32, u32)> = (0..3)
            .map(|k| (t[k], t[(k + 1) % 3]))
            .filter(|&(a, b)| above(a) != above(b))
            .map(|(a, b)| key(a, b))
            .collect();
        if let [k1, k2] = crossing[..] {
            links.entry(k1).or_default().push(k2);
            links.entry(k2).or_default().push(k1);
        }
    }
    if links.is_empty() {
        return Err(invalid("plane does not cut the mesh"));
    }
    let point_on = |(a, b): (u32, u32)| {
        let (sa, sb) = (s[a as usize], s[b as usize]);
        let (pa, pb) = (mesh.vertices[a as usize], mesh.vertices[b as usize]);
        pa + (pb - pa) * (sa / (sa - sb))
    };
    let mut keys: Vec<(u32, u32)> = links.keys().copied().collect();
    keys.sort_unstable();
    let mut visited: HashMap<(u32, u32), bool> = keys.iter().map(|&k| (k, false)).collect();
    let mut best: Vec<(u32, u32)> = Vec::new();
    for &start in &keys {
        if visited[&start] {
            continue;
        }
        let mut lp = vec![start];
        visited.insert(start, true);
        let mut prev = start;
        let mut cur = links[&start][0];
        while cur != start {
            if links[&cur].len() != 2 || visited[&cur] {
                return Err(bad_input("section is not a simple closed curve (mesh not watertight)"));
            }
            visited.insert(cur, true);
            lp.push(cur);
            let next = if links[&cur][0] == prev { links[&cur][1] } else { links[&cur][0] };
            prev = cur;
            cur = next;
        }
        if lp.len() > best.len() {
            best = lp;
        }
    }
    let mut poly: Vec<Vec3> = Vec::with_capacity(best.len());
    for k in best {
        let p = point_on(k);
        if poly.last().is_none_or(|q: &Vec3| (p - q).norm() > 1e-15) {
            poly.push(p);
        }
    }
    while poly.len() > 1 && (poly[0] - poly[poly.len() - 1]).norm() <= 1e-15 {
        poly.pop();
    }
    if poly.len() < 3 {
        return Err(invalid("plane only touches the mesh"));
    }
    let mut sec = PlanarSection {
        plane: *plane,
        polyline: poly,
        arcs: Vec::new(),
    };
    let q = sec.points_2d();
    let area: f64 = (0..q.len())
        .map(|i| {
            let (a, b) = (q[i], q[(i + 1) % q.len()]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    if area < 0.0 {
        sec.polyline.reverse();
    }
    let first = sec
        .points_2d()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1[0].total_cmp(&b.1[0]))
        .map_or(0, |x| x.0);
    sec.polyline.rotate_left(first);
    sec.arcs = fit_arcs(&sec, fit_tol);
    Ok(sec)
}

/// Algebraic least-squares circle through 2D points: centre and radius.
pub fn fit_circle(points: &[[f64; 2]]) -> Option<([f64; 2], f64)> {
    if points.len() < 3 {
        return None;
    }
    let mut m = nalgebra::Matrix3::<f64>::zeros();
    let mut rhs = nalgebra::Vector3::<f64>::zeros();
    for p in points {
        let row = nalgebra::Vector3::new(p[0], p[1], 1.0);
        let z = -(p[0] * p[0] + p[1] * p[1]);
        m += row * row.transpose();
        rhs += row * z;
    }
    let sol = m.lu().solve(&rhs)?;
    let (cx, cy) = (-sol[0] / 2.0, -sol[1] / 2.0);
    let r2 = cx * cx + cy * cy - sol[2];
    (r2 > 0.0 && r2.is_finite()).then(|| ([cx, cy], r2.sqrt()))
}

fn fit_arcs(sec: &PlanarSection, fit_tol: f64) -> Vec<FittedArc> {
    let pts = sec.points_2d();
    let n = pts.len();
    // Start at the sharpest corner so no arc straddles the seam.
    let turn = |i: usize| {
        let (a, b, c) = (pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]);
        let t1 = (b[1] - a[1]).atan2(b[0] - a[0]);
        let t2 = (c[1] - b[1]).atan2(c[0] - b[0]);
        (t2 - t1 + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI
    };
    let start = (0..n).max_by(|&a, &b| turn(a).abs().total_cmp(&turn(b).abs())).unwrap_or(0);
    let seq: Vec<[f64; 2]> = (0..=n).map(|k| pts[(start + k) % n]).collect();
    let residual = |c: [f64; 2], r: f64, p: [f64; 2]| (((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt() - r).abs();
    let rms_of = |c: [f64; 2], r: f64, run: &[[f64; 2]]| {
        (run.iter().map(|&p| residual(c, r, p).powi(2)).sum::<f64>() / run.len() as f64).sqrt()
    };
    let mut arcs = Vec::new();
    let mut s = 0;
    while s + 2 < seq.len() {
        let mut e = s + 2;
        let Some(mut fit) = fit_circle(&seq[s..=e]) else {
            s += 1;
            continue;
        };
        let mut sigma = rms_of(fit.0, fit.1, &seq[s..=e]);
        while e + 1 < seq.len() {
            let dev = residual(fit.0, fit.1, seq[e + 1]);
            if dev > (3.0 * sigma).max(fit_tol) {
                break;
            }
            match fit_circle(&seq[s..=e + 1]) {
                Some(f) => {
                    fit = f;
                    e += 1;
                    sigma = rms_of(fit.0, fit.1, &seq[s..=e]);
                }
                None => break,
            }
        }
        let angle = |p: [f64; 2]| (p[1] - fit.0[1]).atan2(p[0] - fit.0[0]).to_degrees();
        let c3 = sec.plane.to_3d(fit.0);
        arcs.push(FittedArc {
            center: [c3.x, c3.y, c3.z],
            radius: fit.1,
            span_deg: (angle(seq[s]), angle(seq[e])),
            points: e - s + 1,
            rms: sigma,
        });
        s = e;
    }
    arcs
}

/// Convex hull of `A + B` from support points: for each probe direction
/// the sum of the two maximizing vertices is a vertex of the sum.
///
/// Probes are `n_dirs` Fibonacci directions plus the vertex normals of
/// both meshes.
pub fn minkowski_sum(a: &PeabodyMesh, b: &PeabodyMesh, n_dirs: usize) -> Result<PeabodyMesh> {
    if a.vertices.is_empty() || b.vertices.is_empty() {
        return Err(bad_input("Minkowski sum of an empty mesh"));
    }
    let (oa, ob) = (SupportOracle::new(a), SupportOracle::new(b));
    let mut probes = fibonacci_sphere(n_dirs);
    probes.extend(vertex_normals(a));
    probes.extend(vertex_normals(b));
    let mut seen = std::collections::HashSet::new();
    let mut pts = Vec::new();
    for u in &probes {
        let (Some((i, _)), Some((j, _))) = (oa.support(u), ob.support(u)) else {
            continue;
        };
        if seen.insert((i, j)) {
            pts.push(a.vertices[i] + b.vertices[j]);
        }
    }
    convex_hull_mesh(&pts)
}

/// Angle-weighted vertex normals (zero vectors are skipped).
fn vertex_normals(mesh: &PeabodyMesh) -> Vec<Vec3> {
    let mut acc = vec![Vec3::zeros(); mesh.vertices.len()];
    for (k, t) in mesh.triangles.iter().enumerate() {
        let n = mesh.triangle_normal(k);
        for &i in t {
            acc[i as usize] += n;
        }
    }
    acc.into_iter().filter_map(unit).collect()
}

/// Watertight outward-oriented hull mesh of a point set.
pub fn convex_hull_mesh(points: &[Vec3]) -> Result<PeabodyMesh> {
    if points.len() < 4 {
        return Err(bad_input("convex hull needs at least four points"));
    }
    let input: Vec<parry3d_f64::math::Vector> = points
        .iter()
        .map(|p| parry3d_f64::math::Vector::new(p.x, p.y, p.z))
        .collect();
    let (verts, tris) = parry3d_f64::transformation::try_convex_hull(&input)
        .map_err(|e| bad_input(format!("convex hull failed: {e:?}")))?;
    let vertices: Vec<Vec3> = verts.iter().map(|v| Vec3::new(v.x, v.y, v.z)).collect();
    let inside = vertices.iter().sum::<Vec3>() / vertices.len() as f64;
    let triangles: Vec<[u32; 3]> = tris
        .into_iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| vertices[i as usize]);
            if (b - a).cross(&(c - a)).dot(&((a + b + c) / 3.0 - inside)) < 0.0 {
                [t[0], t[2], t[1]]
            } else {
                t
            }
        })
        .collect();
    let mut mesh = PeabodyMesh::from_raw(vertices, triangles);
    mesh.face_tags.iter_mut().for_each(|t| *t = FaceTag::Hull);
    mesh.check_watertight()?;
    Ok(mesh)
}

/// Enclosed volume (divergence theorem) and surface area.
pub fn volume_area(mesh: &PeabodyMesh) -> (f64, f64) {
    let (mut vol, mut area) = (0.0, 0.0);
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| mesh.vertices[i as usize]);
        vol += a.dot(&b.cross(&c)) / 6.0;
        area += (b - a).cross(&(c - a)).norm() / 2.0;
    }
    (vol, area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{cube, sphere};

    #[test]
    fn sphere_has_width_two() {
        let m = sphere(Vec3::zeros(), 1.0, 16).unwrap();
        let r = width_report(&m, 500, 0.02, Some(2.0)).unwrap();
        assert!(r.pass);
        assert!((r.diameter - 2.0).abs() < 1e-12);
    }

    #[test]
    fn diameter_matches_brute_force() {
        let m = sphere(Vec3::new(0.3, -0.2, 0.1), 1.3, 6).unwrap();
        let mut brute = 0.0f64;
        for p in &m.vertices {
            for q in &m.vertices {
                brute = brute.max((p - q).norm());
            }
        }
        assert_eq!(vertex_diameter(&m.vertices), brute);
    }

    #[test]
    fn support_oracle_agrees_with_scan_on_a_convex_mesh() {
        let m = sphere(Vec3::zeros(), 1.0, 12).unwrap();
        let o = SupportOracle::new(&m);
        for u in fibonacci_sphere(300) {
            let (_, h) = o.support(&u).unwrap();
            let (_, b) = brute_support(&m.vertices, &u).unwrap();
            assert_eq!(h, b);
        }
    }

    #[test]
    fn cube_volume_and_area() {
        let (v, a) = volume_area(&cube(1.0));
        assert!((v - 1.0).abs() < 1e-12 && (a - 6.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_volume_converges() {
        let m = sphere(Vec3::zeros(), 1.0, 128).unwrap();
        let (v, _) = volume_area(&m);
        let exact = 4.0 * std::f64::consts::PI / 3.0;
        assert!((v - exact).abs() / exact < 0.005);
    }

    #[test]
    fn sphere_binormal_gap_is_zero() {
        let m = sphere(Vec3::new(1.0, 2.0, 3.0), 1.5, 8).unwrap();
        let r = binormal_check(&m, 200).unwrap();
        assert!(r.max_gap < 1e-12 && r.max_misalignment < 1e-12);
    }

    #[test]
    fn sphere_section_through_center_is_one_unit_arc() {
        let m = sphere(Vec3::zeros(), 1.0, 64).unwrap();
        let s = plane_section(&m, &Plane::new(Vec3::zeros(), Vec3::new(0.2, 0.1, 1.0)).unwrap(), 2e-3).unwrap();
        let big: Vec<_> = s.arcs.iter().filter(|a| a.points > 10).collect();
        assert_eq!(big.len(), 1, "{:?}", s.arcs);
        assert!((big[0].radius - 1.0).abs() < 2e-3);
        let (lo, hi) = s.width_range(360);
        assert!(hi - lo < 2e-3 && (hi - 2.0).abs() < 2e-3);
    }

    #[test]
    fn minkowski_of_two_balls_is_a_ball() {
        let a = sphere(Vec3::zeros(), 1.0, 12).unwrap();
        let b = sphere(Vec3::new(1.0, 0.0, 0.0), 1.0, 12).unwrap();
        let s = minkowski_sum(&a, &b, 2000).unwrap();
        let r = width_report(&s, 500, 0.05, Some(4.0)).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn sum_with_a_point_is_a_translate() {
        let a = sphere(Vec3::zeros(), 1.0, 8).unwrap();
        let p = PeabodyMesh::from_raw(vec![Vec3::new(0.5, 0.0, 0.0)], Vec::new());
        let s = minkowski_sum(&a, &p, 500).unwrap();
        assert!(support_distance(&s, &a.transformed(&Isometry::translation(Vec3::new(0.5, 0.0, 0.0))), 500) < 1e-12);
    }

    #[test]
    fn circle_curvature_profile_is_its_radius() {
        let m = sphere(Vec3::zeros(), 1.0, 64).unwrap();
        let s = plane_section(&m, &Plane::new(Vec3::zeros(), Vec3::z()).unwrap(), 2e-3).unwrap();
        let rho = s.curvature_profile(PROFILE_BINS, PROFILE_HALF_WINDOW, PROFILE_SPREAD_CAP);
        let mean = rho.iter().sum::<f64>() / rho.len() as f64;
        assert!((mean - s.perimeter() / std::f64::consts::TAU).abs() < 1e-9);
        assert!(rho.iter().all(|r| (r - 1.0).abs() < 0.1));
        assert!(curvature_profile_distance(&s, &s) == 0.0);
    }

    #[test]
    fn profile_of_a_circle_is_linear() {
        let m = sphere(Vec3::zeros(), 1.0, 64).unwrap();
        let s = plane_section(&m, &Plane::new(Vec3::zeros(), Vec3::z()).unwrap(), 2e-3).unwrap();
        let prof = s.normal_length_profile(360, 0.1);
        let per = s.perimeter();
        for (k, l) in prof.iter().enumerate() {
            let expect = per * k as f64 / 360.0;
            assert!((l - expect).abs() < 0.02, "bin {k}: {l} vs {expect}");
        }
    }
}
