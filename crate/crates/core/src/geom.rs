//! Points, tetrahedra, isometries and tolerances.

use nalgebra::{Matrix3, Vector3};

use crate::error::{invalid, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Relative geometric tolerance; multiplied by the body scale.
pub const ABS_GEO_REL: f64 = 1e-9;

/// Constant `C` in the mesh tolerance `C * scale / N^2`.
///
/// Calibrated on Robert's body: at side 2 and resolution 64 this gives
/// the 2e-3 slack used by the width certificate.
pub const MESH_CONSTANT: f64 = 4.096;

/// Scale-relative tolerances for one build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Absolute tolerance for exact constructions.
    pub abs_geo: f64,
    /// Tolerance for quantities that converge with mesh resolution.
    pub mesh_rel: f64,
}

impl Tolerance {
    /// Tolerances for a body of the given scale sampled at resolution `res`.
    pub fn new(scale: f64, res: usize) -> Self {
        Tolerance {
            abs_geo: ABS_GEO_REL * scale,
            mesh_rel: mesh_tolerance(scale, res),
        }
    }
}

/// `MESH_CONSTANT * scale / res^2`.
pub fn mesh_tolerance(scale: f64, res: usize) -> f64 {
    MESH_CONSTANT * scale / (res * res) as f64
}

/// Unit vector, or `None` for a (near) zero input.
pub fn unit(v: Vec3) -> Option<Vec3> {
    let n = v.norm();
    (n > 0.0 && n.is_finite()).then(|| v / n)
}

/// Two unit vectors completing `n` to an orthonormal frame.
pub fn orthonormal_complement(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.6 {
        Vec3::x()
    } else if n.y.abs() < 0.6 {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let e1 = (helper - n * n.dot(&helper)).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

/// `n` quasi-uniform unit directions on the sphere (golden-angle spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = golden * i as f64;
            Vec3::new(r * t.cos(), r * t.sin(), z)
        })
        .collect()
}

pub const VERTEX_NAMES: [char; 4] = ['a', 'b', 'c', 'd'];

/// A tetrahedron `abcd`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tetrahedron {
    pub vertices: [Vec3; 4],
    /// Nominal edge length; also the scale for tolerances.
    pub side_target: f64,
}

impl Tetrahedron {
    /// Builds a tetrahedron, rejecting flat or non-finite input.
    pub fn new(vertices: [Vec3; 4], side_target: f64) -> Result<Self> {
        if !(side_target > 0.0 && side_target.is_finite()) {
            return Err(invalid(format!("side must be positive, got {side_target}")));
        }
        if vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(invalid("tetrahedron vertex is not finite"));
        }
        let t = Tetrahedron {
            vertices,
            side_target,
        };
        if t.volume().abs() <= ABS_GEO_REL * side_target.powi(3) {
            return Err(invalid("tetrahedron is degenerate (zero volume)"));
        }
        Ok(t)
    }

    /// Regular tetrahedron with the `ab`/`cd` midpoint axis on the z-axis.
    pub fn regular(side: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(invalid(format!("side must be positive, got {side}")));
        }
        let s = side / 2.0;
        let h = side / (2.0 * 2f64.sqrt());
        Tetrahedron::new(
            [
                Vec3::new(-s, 0.0, h),
                Vec3::new(s, 0.0, h),
                Vec3::new(0.0, -s, -h),
                Vec3::new(0.0, s, -h),
            ],
            side,
        )
    }

    pub fn vertex(&self, i: usize) -> Vec3 {
        self.vertices[i]
    }

    /// The six edges in lexicographic order: ab, ac, ad, bc, bd, cd.
    pub fn edges() -> [(usize, usize); 6] {
        [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    }

    pub fn edge_length(&self, e: (usize, usize)) -> f64 {
        (self.vertices[e.0] - self.vertices[e.1]).norm()
    }

    /// Signed volume.
    pub fn volume(&self) -> f64 {
        let [a, b, c, d] = self.vertices;
        (b - a).dot(&(c - a).cross(&(d - a))) / 6.0
    }

    pub fn centroid(&self) -> Vec3 {
        self.vertices.iter().sum::<Vec3>() / 4.0
    }

    /// Image under an isometry.
    pub fn transformed(&self, g: &Isometry) -> Tetrahedron {
        Tetrahedron {
            vertices: self.vertices.map(|v| g.apply(&v)),
            side_target: self.side_target,
        }
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, k: f64) -> Result<Tetrahedron> {
        Tetrahedron::new(self.vertices.map(|v| v * k), self.side_target * k)
    }

    pub fn tolerance(&self, res: usize) -> Tolerance {
        Tolerance::new(self.side_target, res)
    }
}

/// A pair of opposite edges, named by vertex index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgePair {
    pub near: (usize, usize),
    pub far: (usize, usize),
}

impl EdgePair {
    pub fn new(near: (usize, usize), far: (usize, usize)) -> Result<Self> {
        let ids = [near.0, near.1, far.0, far.1];
        for (i, a) in ids.iter().enumerate() {
            if *a > 3 {
                return Err(invalid(format!("vertex id {a} out of range")));
            }
            if ids[i + 1..].contains(a) {
                return Err(invalid("edge pair must use four distinct vertices"));
            }
        }
        Ok(EdgePair { near, far })
    }

    /// `(ab, cd)`, `(ac, bd)`, `(ad, bc)`.
    pub fn standard() -> [EdgePair; 3] {
        [
            EdgePair { near: (0, 1), far: (2, 3) },
            EdgePair { near: (0, 2), far: (1, 3) },
            EdgePair { near: (0, 3), far: (1, 2) },
        ]
    }

    pub fn swapped(&self) -> EdgePair {
        EdgePair {
            near: self.far,
            far: self.near,
        }
    }

    pub fn label(&self) -> String {
        let n = |e: (usize, usize)| format!("{}{}", VERTEX_NAMES[e.0], VERTEX_NAMES[e.1]);
        format!("({},{})", n(self.near), n(self.far))
    }
}

/// Cosines between the midpoint axis and each of the two edges.
fn axis_cosines(p: Vec3, q: Vec3, r: Vec3, s: Vec3) -> Option<(f64, f64)> {
    let axis = unit((r + s) / 2.0 - (p + q) / 2.0)?;
    let e1 = unit(q - p)?;
    let e2 = unit(s - r)?;
    Some((axis.dot(&e1), axis.dot(&e2)))
}

/// True iff the line through the two edge midpoints is orthogonal to both edges.
///
/// Angles are compared, so the test is invariant under similarity.
pub fn semi_regular_check(t: &Tetrahedron, p: &EdgePair) -> bool {
    let v = &t.vertices;
    semi_regular_points(v[p.near.0], v[p.near.1], v[p.far.0], v[p.far.1])
}

/// `semi_regular_check` on four loose points.
pub fn semi_regular_points(p: Vec3, q: Vec3, r: Vec3, s: Vec3) -> bool {
    match axis_cosines(p, q, r, s) {
        Some((c1, c2)) => c1.abs() <= ABS_GEO_REL && c2.abs() <= ABS_GEO_REL,
        None => false,
    }
}

/// An isometry `x -> linear * x + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    pub linear: Mat3,
    pub translation: Vec3,
}

impl Isometry {
    pub fn identity() -> Self {
        Isometry {
            linear: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    /// Checked constructor; `linear` must be orthogonal within 1e-12.
    pub fn new(linear: Mat3, translation: Vec3) -> Result<Self> {
        let err = (linear.transpose() * linear - Mat3::identity()).amax();
        if !(err <= 1e-12) {
            return Err(invalid(format!("matrix is not orthogonal (error {err:.3e})")));
        }
        Ok(Isometry {
            linear,
            translation,
        })
    }

    pub fn translation(t: Vec3) -> Self {
        Isometry {
            linear: Mat3::identity(),
            translation: t,
        }
    }

    /// Rotation by `angle` about the line through `point` along `axis`.
    pub fn rotation(point: Vec3, axis: Vec3, angle: f64) -> Self {
        let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
        let linear = *rot.matrix();
        Isometry {
            linear,
            translation: point - linear * point,
        }
    }

    /// Reflection in the plane through `point` with normal `normal`.
    pub fn reflection(point: Vec3, normal: Vec3) -> Self {
        let n = normal.normalize();
        let linear = Mat3::identity() - 2.0 * n * n.transpose();
        Isometry {
            linear,
            translation: point - linear * point,
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.linear * p + self.translation
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.linear * v
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry {
            linear: self.linear * other.linear,
            translation: self.linear * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Isometry {
        let lt = self.linear.transpose();
        Isometry {
            linear: lt,
            translation: -(lt * self.translation),
        }
    }

    pub fn determinant(&self) -> f64 {
        self.linear.determinant()
    }

    /// Largest entry-wise difference to another isometry.
    pub fn distance(&self, other: &Isometry) -> f64 {
        (self.linear - other.linear)
            .amax()
            .max((self.translation - other.translation).amax())
    }
}

/// The permutation `g` induces on the tetrahedron's vertices, if any.
pub fn vertex_permutation(g: &Isometry, t: &Tetrahedron, tol: f64) -> Option<[usize; 4]> {
    let mut perm = [0usize; 4];
    for (i, v) in t.vertices.iter().enumerate() {
        let img = g.apply(v);
        perm[i] = t.vertices.iter().position(|w| (w - img).norm() <= tol)?;
    }
    let mut seen = [false; 4];
    for &j in &perm {
        if std::mem::replace(&mut seen[j], true) {
            return None;
        }
    }
    Some(perm)
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    p.iter().for_each(|&i| seen[i] = true);
                    if seen.iter().all(|&s| s) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// The 24 isometries permuting the vertices of a regular tetrahedron.
///
/// Ordered by the induced permutation in lexicographic order, so the
/// identity comes first.
pub fn tetrahedral_group(t: &Tetrahedron) -> Result<Vec<Isometry>> {
    let tol = ABS_GEO_REL * t.side_target;
    let edges = Tetrahedron::edges();
    let l0 = t.edge_length(edges[0]);
    if edges.iter().any(|&e| (t.edge_length(e) - l0).abs() > tol) {
        return Err(invalid("tetrahedral group requires a regular tetrahedron"));
    }
    let v = &t.vertices;
    let basis = Mat3::from_columns(&[v[1] - v[0], v[2] - v[0], v[3] - v[0]]);
    let inv = basis
        .try_inverse()
        .ok_or_else(|| invalid("degenerate tetrahedron"))?;
    permutations4()
        .into_iter()
        .map(|p| {
            let img = Mat3::from_columns(&[v[p[1]] - v[p[0]], v[p[2]] - v[p[0]], v[p[3]] - v[p[0]]]);
            let linear = img * inv;
            Isometry::new(linear, v[p[0]] - linear * v[0])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_side_two_matches_closed_form() {
        let t = Tetrahedron::regular(2.0).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((t.vertex(0) - Vec3::new(-1.0, 0.0, h)).norm() < 1e-15);
        assert!((t.vertex(3) - Vec3::new(0.0, 1.0, -h)).norm() < 1e-15);
        for e in Tetrahedron::edges() {
            assert!((t.edge_length(e) - 2.0).abs() < 1e-12);
        }
        let m1 = (t.vertex(0) + t.vertex(1)) / 2.0;
        let m2 = (t.vertex(2) + t.vertex(3)) / 2.0;
        assert!(((m1 - m2).norm() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_sides() {
        assert!(Tetrahedron::regular(0.0).is_err());
        assert!(Tetrahedron::regular(-1.0).is_err());
        assert!(Tetrahedron::regular(f64::NAN).is_err());
        let flat = [Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::new(1.0, 1.0, 0.0)];
        assert!(Tetrahedron::new(flat, 1.0).is_err());
    }

    #[test]
    fn semi_regular_cases() {
        let t = Tetrahedron::regular(2.0).unwrap();
        for p in EdgePair::standard() {
            assert!(semi_regular_check(&t, &p));
        }
        let mut stretched = t.clone();
        for v in stretched.vertices.iter_mut() {
            v.z *= 1.5;
        }
        assert!(semi_regular_check(&stretched, &EdgePair::standard()[0]));
        let mut bumped = t.clone();
        bumped.vertices[0] += Vec3::new(0.1, 0.0, 0.0);
        assert!(!semi_regular_check(&bumped, &EdgePair::standard()[0]));
    }

    #[test]
    fn edge_pair_requires_distinct_ids() {
        assert!(EdgePair::new((0, 1), (1, 2)).is_err());
        assert!(EdgePair::new((0, 1), (2, 4)).is_err());
        assert_eq!(EdgePair::standard()[0].label(), "(ab,cd)");
    }

    #[test]
    fn group_has_order_24_and_is_closed() {
        let t = Tetrahedron::regular(2.0).unwrap();
        let g = tetrahedral_group(&t).unwrap();
        assert_eq!(g.len(), 24);
        assert!(g[0].distance(&Isometry::identity()) < 1e-12);
        let c = t.centroid();
        for x in &g {
            assert!((x.apply(&c) - c).norm() < 1e-12);
            assert!((x.determinant().abs() - 1.0).abs() < 1e-12);
            for y in &g {
                let xy = x.compose(y);
                assert!(g.iter().any(|z| z.distance(&xy) < 1e-10));
            }
        }
        let mut perms: Vec<_> = g
            .iter()
            .map(|x| vertex_permutation(x, &t, 1e-9).unwrap())
            .collect();
        perms.sort();
        perms.dedup();
        assert_eq!(perms.len(), 24);
        let rotations = g.iter().filter(|x| x.determinant() > 0.0).count();
        assert_eq!(rotations, 12);
    }

    #[test]
    fn group_rejects_irregular() {
        let mut t = Tetrahedron::regular(2.0).unwrap();
        t.vertices[0].z *= 1.2;
        assert!(tetrahedral_group(&t).is_err());
    }

    #[test]
    fn isometry_roundtrip() {
        let g = Isometry::rotation(Vec3::new(1.0, 2.0, 0.5), Vec3::new(0.3, -1.0, 2.0), 0.7)
            .compose(&Isometry::reflection(Vec3::zeros(), Vec3::new(1.0, 1.0, 0.0)));
        let p = Vec3::new(-0.2, 0.4, 3.0);
        assert!((g.inverse().apply(&g.apply(&p)) - p).norm() < 1e-14);
        assert!(Isometry::new(Mat3::identity() * 2.0, Vec3::zeros()).is_err());
    }

    #[test]
    fn fibonacci_directions_are_unit() {
        let d = fibonacci_sphere(1000);
        assert!(d.iter().all(|u| (u.norm() - 1.0).abs() < 1e-14));
        let mean: Vec3 = d.iter().sum::<Vec3>() / 1000.0;
        assert!(mean.norm() < 1e-3);
    }
}
