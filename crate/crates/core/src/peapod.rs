//! Pea-pod devices on a pair of opposite edges.
//!
//! A device pair lives in a frame attached to two opposite edges: the axis
//! runs through both edge midpoints, pointing from the far edge to the near
//! one. Each edge carries a pea string that bulges away from the other edge;
//! the near string is the first curve of a [`ConfocalQuadricPair`] and the
//! far string is its second curve. Each principal center is the bulb center
//! of the partner device, which makes the pair convex.

use crate::error::{impossible, invalid, Result};
use crate::geom::{semi_regular_points, unit, EdgePair, Isometry, Mat3, Tetrahedron, Vec3, ABS_GEO_REL};
use crate::quadrics::{ConfocalQuadricPair, Curve, QuadricKind, QuadricParam};

/// Classification of a device frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    Elliptic,
    Hyperbolic,
    Parabolic,
    DegenerateCircle,
    DegenerateLine,
}

/// Second circle of a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SecondaryCircle {
    Circle { center: Vec3, radius: f64 },
    /// The line through the beam (parabolic frames).
    BeamLine,
}

/// Planar frame of one device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeaPodFrame {
    pub plane_normal: Vec3,
    pub axis_point: Vec3,
    pub axis_dir: Vec3,
    pub beam: (Vec3, Vec3),
    /// Intersection of axis and beam.
    pub m: Vec3,
    pub principal_center: Vec3,
    pub principal_radius: f64,
    pub secondary: SecondaryCircle,
    pub kind: FrameKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RadiusLaw {
    /// `r - |c - x|`.
    Focal,
    /// Sharp edge: all balls are points.
    Zero,
    /// `width - √(ρ² + u²)` along a line.
    Line { width: f64, rho: f64 },
}

/// One pea-pod device: a frame and the closed arc `E(Σ)` of its string.
///
/// The arc is parametrized by `u ∈ [-half, half]`, running from the first
/// to the second beam endpoint, with the bulb at `u = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeaPodDevice {
    pub frame: PeaPodFrame,
    pub quadrics: ConfocalQuadricPair,
    pub curve: Curve,
    pub half: f64,
    offset: f64,
    sign: f64,
    law: RadiusLaw,
}

impl PeaPodDevice {
    /// Quadric parameter of the string point at `u`.
    pub fn quadric_param(&self, u: f64) -> QuadricParam {
        let t = self.offset + self.sign * u;
        match self.curve {
            Curve::First => QuadricParam::first(t),
            Curve::Second => QuadricParam::second(t),
        }
    }

    /// String point at `u`; the endpoints return the beam endpoints exactly.
    pub fn point(&self, u: f64) -> Vec3 {
        if u <= -self.half {
            return self.frame.beam.0;
        }
        if u >= self.half {
            return self.frame.beam.1;
        }
        self.quadrics
            .point(&self.quadric_param(u))
            .expect("string parameters stay inside the arc")
    }

    /// Ball radius at `u`, without the interval check.
    pub fn radius(&self, u: f64) -> f64 {
        if u.abs() >= self.half {
            return 0.0;
        }
        let r = match self.law {
            RadiusLaw::Focal => {
                self.frame.principal_radius - (self.frame.principal_center - self.point(u)).norm()
            }
            RadiusLaw::Zero => 0.0,
            RadiusLaw::Line { width, rho } => width - (rho * rho + u * u).sqrt(),
        };
        r.max(0.0)
    }

    /// Samples `n + 1` uniform string parameters from end to end.
    pub fn params(&self, n: usize) -> Vec<f64> {
        (0..=n)
            .map(|i| {
                if i == n {
                    self.half
                } else {
                    -self.half + 2.0 * self.half * i as f64 / n as f64
                }
            })
            .collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.law == RadiusLaw::Zero
    }
}

/// Ball radius `R(x)` at string parameter `u`.
pub fn ball_radius(d: &PeaPodDevice, u: f64) -> Result<f64> {
    let slack = 1e-12 * d.half.max(1.0);
    if !(u.abs() <= d.half + slack) {
        return Err(invalid(format!(
            "parameter {u} outside the string interval [-{h}, {h}]",
            h = d.half
        )));
    }
    Ok(d.radius(u.clamp(-d.half, d.half)))
}

/// Two confocal convex devices on opposite edges.
#[derive(Debug, Clone, PartialEq)]
pub struct DevicePair {
    pub near: PeaPodDevice,
    pub far: PeaPodDevice,
    /// `r1 + r2 - |c1 c2|`.
    pub width: f64,
}

impl DevicePair {
    /// The confocal pair carrying both strings.
    pub fn quadrics(&self) -> &ConfocalQuadricPair {
        &self.near.quadrics
    }
}

/// Beams of a device pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beams {
    pub near: (Vec3, Vec3),
    pub far: (Vec3, Vec3),
}

impl Beams {
    pub fn from_tetrahedron(t: &Tetrahedron, p: &EdgePair) -> Self {
        let v = &t.vertices;
        Beams {
            near: (v[p.near.0], v[p.near.1]),
            far: (v[p.far.0], v[p.far.1]),
        }
    }
}

/// Orthonormal frame attached to two opposite edges.
#[derive(Debug, Clone, Copy)]
struct PairFrame {
    origin: Vec3,
    axis: Vec3,
    e_near: Vec3,
    e_far: Vec3,
    dist: f64,
    p: f64,
    q: f64,
}

impl PairFrame {
    fn new(b: &Beams) -> Result<Self> {
        let (p0, p1) = b.near;
        let (q0, q1) = b.far;
        let scale = (p1 - p0).norm().max((q1 - q0).norm());
        let mn = (p0 + p1) / 2.0;
        let mf = (q0 + q1) / 2.0;
        let dist = (mn - mf).norm();
        if !(dist > ABS_GEO_REL * scale) {
            return Err(impossible("opposite edges meet"));
        }
        if !semi_regular_points(p0, p1, q0, q1) {
            return Err(impossible(
                "edges are not semi-regular: the midpoint line is not orthogonal to both",
            ));
        }
        let e_near = unit(p1 - p0).ok_or_else(|| impossible("near edge has zero length"))?;
        let e_far = unit(q1 - q0).ok_or_else(|| impossible("far edge has zero length"))?;
        if e_near.dot(&e_far).abs() > ABS_GEO_REL {
            return Err(impossible(
                "edges are not orthogonal; confocal strings need orthogonal planes",
            ));
        }
        Ok(PairFrame {
            origin: (mn + mf) / 2.0,
            axis: (mn - mf) / dist,
            e_near,
            e_far,
            dist,
            p: (p1 - p0).norm() / 2.0,
            q: (q1 - q0).norm() / 2.0,
        })
    }

    /// Point at axial coordinate `zeta` on the axis.
    fn on_axis(&self, zeta: f64) -> Vec3 {
        self.origin + self.axis * zeta
    }

    /// Canonical quadric frame whose origin sits at axial coordinate `zeta0`.
    /// Canonical z points from the near edge toward the far edge.
    fn placement(&self, zeta0: f64) -> Isometry {
        Isometry {
            linear: Mat3::from_columns(&[self.e_near, self.e_far, -self.axis]),
            translation: self.on_axis(zeta0),
        }
    }

    fn width_hint(&self) -> f64 {
        (self.dist * self.dist + self.p * self.p + self.q * self.q).sqrt()
    }
}

/// Real-scale solution of the fitting problem.
#[derive(Debug, Clone, Copy)]
enum Fitted {
    Parabolic { focal: f64 },
    Elliptic { major: f64, minor: f64, center: f64 },
    Circle { radius: f64 },
}

fn assemble_pair(b: &Beams, fr: &PairFrame, fit: Fitted) -> DevicePair {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let (pair, near_bulb, far_bulb, near_map, far_map, near_half, far_half, kinds) = match fit {
        Fitted::Parabolic { focal: a } => {
            let vertex = fr.dist / 2.0 + fr.p * fr.p / (4.0 * a);
            let zeta0 = vertex - a / 2.0;
            let pair = ConfocalQuadricPair::parabolic(a)
                .expect("positive focal length")
                .placed(fr.placement(zeta0));
            (
                pair,
                vertex,
                vertex - a,
                (0.0, 1.0),
                (0.0, -1.0),
                fr.p / (2.0 * a),
                fr.q / (2.0 * a),
                (FrameKind::Parabolic, FrameKind::Parabolic),
            )
        }
        Fitted::Elliptic { major, minor, center } => {
            let f = (major * major - minor * minor).sqrt();
            let pair = ConfocalQuadricPair::elliptic_hyperbolic(major, minor)
                .expect("valid ellipse")
                .placed(fr.placement(center));
            let near_half = (fr.p / minor).atan2((fr.dist / 2.0 - center) / major);
            let far_half = (fr.q / minor).atan();
            (
                pair,
                center + major,
                center + f,
                (-half_pi, 1.0),
                (0.0, 1.0),
                near_half,
                far_half,
                (FrameKind::Elliptic, FrameKind::Hyperbolic),
            )
        }
        Fitted::Circle { radius } => {
            let center = -fr.dist / 2.0;
            let pair = ConfocalQuadricPair::circle_line(radius)
                .expect("positive radius")
                .placed(fr.placement(center));
            (
                pair,
                center + radius,
                center,
                (-half_pi, 1.0),
                (0.0, 1.0),
                (fr.p).atan2(fr.dist),
                fr.q,
                (FrameKind::DegenerateCircle, FrameKind::DegenerateLine),
            )
        }
    };
    // Each principal center is the partner's bulb center.
    let c1 = fr.on_axis(far_bulb);
    let c2 = fr.on_axis(near_bulb);
    let r1 = (c1 - b.near.0).norm();
    let r2 = (c2 - b.far.0).norm();
    let width = r1 + r2 - (c1 - c2).norm();
    let secondary = |kind: FrameKind, principal: f64| match (fit, kind) {
        (Fitted::Parabolic { .. }, _) => SecondaryCircle::BeamLine,
        (Fitted::Elliptic { major, minor, center }, FrameKind::Elliptic) => {
            let f = (major * major - minor * minor).sqrt();
            SecondaryCircle::Circle {
                center: fr.on_axis(center - f),
                radius: 2.0 * major - principal,
            }
        }
        (Fitted::Elliptic { major, minor, center }, _) => {
            let f = (major * major - minor * minor).sqrt();
            SecondaryCircle::Circle {
                center: fr.on_axis(center - major),
                radius: principal + 2.0 * f,
            }
        }
        (Fitted::Circle { .. }, FrameKind::DegenerateCircle) => SecondaryCircle::Circle {
            center: c1,
            radius: principal,
        },
        (Fitted::Circle { radius }, _) => SecondaryCircle::Circle {
            center: fr.on_axis(-fr.dist / 2.0 - radius),
            radius: principal,
        },
    };
    let near_law = match kinds.0 {
        FrameKind::DegenerateCircle => RadiusLaw::Zero,
        _ => RadiusLaw::Focal,
    };
    let far_law = match (kinds.1, fit) {
        (FrameKind::DegenerateLine, Fitted::Circle { radius }) => RadiusLaw::Line { width, rho: radius },
        _ => RadiusLaw::Focal,
    };
    let near = PeaPodDevice {
        frame: PeaPodFrame {
            plane_normal: fr.e_far,
            axis_point: fr.origin,
            axis_dir: fr.axis,
            beam: b.near,
            m: fr.on_axis(fr.dist / 2.0),
            principal_center: c1,
            principal_radius: r1,
            secondary: secondary(kinds.0, r1),
            kind: kinds.0,
        },
        quadrics: pair,
        curve: Curve::First,
        half: near_half,
        offset: near_map.0,
        sign: near_map.1,
        law: near_law,
    };
    let far = PeaPodDevice {
        frame: PeaPodFrame {
            plane_normal: fr.e_near,
            axis_point: fr.origin,
            axis_dir: fr.axis,
            beam: b.far,
            m: fr.on_axis(-fr.dist / 2.0),
            principal_center: c2,
            principal_radius: r2,
            secondary: secondary(kinds.1, r2),
            kind: kinds.1,
        },
        quadrics: pair,
        curve: Curve::Second,
        half: far_half,
        offset: far_map.0,
        sign: far_map.1,
        law: far_law,
    };
    DevicePair { near, far, width }
}

/// The unique convex confocal parabolic device pair on two opposite edges.
pub fn fit_parabolic_devices(t: &Tetrahedron, p: &EdgePair) -> Result<DevicePair> {
    fit_parabolic_beams(&Beams::from_tetrahedron(t, p))
}

/// [`fit_parabolic_devices`] on loose beams.
pub fn fit_parabolic_beams(b: &Beams) -> Result<DevicePair> {
    let fr = PairFrame::new(b)?;
    // Both strings pass through their beam endpoints:
    // focal² - dist·focal - (p² + q²)/4 = 0, positive root.
    let focal = (fr.dist + fr.width_hint()) / 2.0;
    Ok(assemble_pair(b, &fr, Fitted::Parabolic { focal }))
}

/// Mismatch of the far chord for a unit-scale family with near chord at
/// height `t`: positive when the partner string overhangs the far beam.
fn chord_mismatch(e: f64, fr: &PairFrame, t: f64) -> Option<f64> {
    if e >= 1.0 {
        let sigma = 2.0 * (0.5 - t).max(0.0).sqrt() / fr.p;
        let zc = t - sigma * fr.dist;
        Some(4.0 * (zc + 0.5) - (sigma * fr.q).powi(2))
    } else if e <= 0.0 {
        let sigma = (1.0 - t * t).max(0.0).sqrt() / fr.p;
        Some(t - sigma * fr.dist)
    } else {
        let beta2 = 1.0 - e * e;
        let sigma = (beta2 * (1.0 - t * t)).max(0.0).sqrt() / fr.p;
        let zc = (t - sigma * fr.dist).max(0.0);
        Some(beta2 * (zc * zc / (e * e) - 1.0) - (sigma * fr.q).powi(2))
    }
}

/// Convex confocal device pair on two opposite edges whose strings are
/// similar to `family`.
///
/// The near chord is slid along a unit-scale copy of the family until the
/// similar far chord fits the partner string exactly; the crossing is
/// located by a scan from the bulb end followed by bisection.
pub fn fit_confocal_devices(
    t: &Tetrahedron,
    p: &EdgePair,
    family: &ConfocalQuadricPair,
) -> Result<DevicePair> {
    fit_confocal_beams(&Beams::from_tetrahedron(t, p), family)
}

/// [`fit_confocal_devices`] on loose beams.
pub fn fit_confocal_beams(b: &Beams, family: &ConfocalQuadricPair) -> Result<DevicePair> {
    let fr = PairFrame::new(b)?;
    let e = family.eccentricity();
    let (lo, hi) = if matches!(family.kind, QuadricKind::Parabolic { .. }) {
        (-0.5, 0.5)
    } else {
        (-1.0, 1.0)
    };
    const SCAN: usize = 4000;
    let g = |t: f64| chord_mismatch(e, &fr, t).unwrap_or(f64::NAN);
    let mut upper = hi;
    let mut g_upper = g(upper);
    let mut bracket = None;
    for i in 1..=SCAN {
        let tt = hi - (hi - lo) * i as f64 / SCAN as f64;
        let gt = g(tt);
        if g_upper > 0.0 && gt <= 0.0 {
            bracket = Some((tt, upper));
            break;
        }
        upper = tt;
        g_upper = gt;
    }
    let (mut a, mut c) = bracket.ok_or_else(|| {
        impossible(format!(
            "no chord position in [{lo}, {hi}] matches the far edge (eccentricity {e})"
        ))
    })?;
    for _ in 0..200 {
        let m = 0.5 * (a + c);
        if m <= a || m >= c {
            break;
        }
        if g(m) > 0.0 {
            c = m;
        } else {
            a = m;
        }
    }
    let ts = 0.5 * (a + c);
    let fit = if e >= 1.0 {
        let sigma = 2.0 * (0.5 - ts).sqrt() / fr.p;
        Fitted::Parabolic { focal: 1.0 / sigma }
    } else if e <= 0.0 {
        let sigma = (1.0 - ts * ts).sqrt() / fr.p;
        Fitted::Circle { radius: 1.0 / sigma }
    } else {
        let beta = (1.0 - e * e).sqrt();
        let sigma = beta * (1.0 - ts * ts).sqrt() / fr.p;
        Fitted::Elliptic {
            major: 1.0 / sigma,
            minor: beta / sigma,
            center: fr.dist / 2.0 - ts / sigma,
        }
    };
    Ok(assemble_pair(b, &fr, fit))
}

/// Mean of `|xy| + R(x) + R(y)` over a `grid × grid` sample of both arcs,
/// and the largest deviation from that mean.
pub fn peapod_constant(pair: &DevicePair, grid: usize) -> (f64, f64) {
    let grid = grid.max(1);
    let xs: Vec<(Vec3, f64)> = pair
        .near
        .params(grid)
        .into_iter()
        .map(|u| (pair.near.point(u), pair.near.radius(u)))
        .collect();
    let ys: Vec<(Vec3, f64)> = pair
        .far
        .params(grid)
        .into_iter()
        .map(|u| (pair.far.point(u), pair.far.radius(u)))
        .collect();
    let mut values = Vec::with_capacity(xs.len() * ys.len());
    for (x, rx) in &xs {
        for (y, ry) in &ys {
            values.push((x - y).norm() + rx + ry);
        }
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let dev = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    (mean, dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn robert() -> DevicePair {
        let t = Tetrahedron::regular(2.0).unwrap();
        fit_parabolic_devices(&t, &EdgePair::standard()[0]).unwrap()
    }

    fn circle_line() -> DevicePair {
        let t = Tetrahedron::regular(2.0).unwrap();
        let fam = ConfocalQuadricPair::circle_line(1.0).unwrap();
        fit_confocal_devices(&t, &EdgePair::standard()[0], &fam).unwrap()
    }

    fn elliptic() -> DevicePair {
        let t = Tetrahedron::regular(2.0).unwrap();
        let fam = ConfocalQuadricPair::elliptic_hyperbolic(2.0, 1.0).unwrap();
        fit_confocal_devices(&t, &EdgePair::standard()[0], &fam).unwrap()
    }

    /// Positive root of `2a² - 2√2 a - 1 = 0`: focal length for side 2.
    fn side_two_focal() -> f64 {
        let s2 = 2f64.sqrt();
        (2.0 * s2 + (8.0f64 + 8.0).sqrt()) / 4.0
    }

    #[test]
    fn robert_focal_length_matches_quadratic_root() {
        let pair = robert();
        let QuadricKind::Parabolic { a } = pair.quadrics().kind else {
            panic!("expected parabolic strings");
        };
        let oracle = side_two_focal();
        assert!((a - oracle).abs() < 1e-12, "{a} vs {oracle}");
        assert!((oracle - (1.0 + 2f64.sqrt() / 2.0)).abs() < 1e-15);
        assert!((pair.width - 2.0).abs() < 1e-12);
        let r = 1.5 + 2f64.sqrt() / 4.0;
        assert!((pair.near.frame.principal_radius - r).abs() < 1e-12);
        assert!((pair.far.frame.principal_radius - r).abs() < 1e-12);
    }

    #[test]
    fn robert_ball_radius_values() {
        let pair = robert();
        let bulb = ball_radius(&pair.near, 0.0).unwrap();
        assert!((bulb - (0.5 - 2f64.sqrt() / 4.0)).abs() < 1e-12);
        assert_eq!(ball_radius(&pair.near, pair.near.half).unwrap(), 0.0);
        assert_eq!(ball_radius(&pair.near, -pair.near.half).unwrap(), 0.0);
        assert!(ball_radius(&pair.near, 2.0 * pair.near.half).is_err());
        // On the near string the ball radius is the height above z = h.
        let h = 1.0 / 2f64.sqrt();
        for u in pair.near.params(17) {
            let x = pair.near.point(u);
            assert!((pair.near.radius(u) - (x.z - h)).abs() < 1e-12);
        }
    }

    #[test]
    fn robert_frame_geometry() {
        let pair = robert();
        let z = Vec3::z();
        assert!((pair.near.frame.axis_dir - z).norm() < 1e-15);
        // Principal centers are the partner bulbs.
        assert!((pair.near.frame.principal_center - pair.far.point(0.0)).norm() < 1e-12);
        assert!((pair.far.frame.principal_center - pair.near.point(0.0)).norm() < 1e-12);
        assert_eq!(pair.near.frame.kind, FrameKind::Parabolic);
        assert_eq!(pair.near.frame.secondary, SecondaryCircle::BeamLine);
        // Strings bulge away from the tetrahedron.
        assert!(pair.near.point(0.0).z > 1.0 / 2f64.sqrt());
        assert!(pair.far.point(0.0).z < -1.0 / 2f64.sqrt());
        // Ends are the beam endpoints, also through the quadric itself.
        let t = Tetrahedron::regular(2.0).unwrap();
        let end = pair.near.quadrics.point(&pair.near.quadric_param(-pair.near.half)).unwrap();
        assert!((end - t.vertex(0)).norm() < 1e-12);
        let end = pair.far.quadrics.point(&pair.far.quadric_param(pair.far.half)).unwrap();
        assert!((end - t.vertex(3)).norm() < 1e-12);
    }

    #[test]
    fn confocal_parabolic_matches_closed_form() {
        let t = Tetrahedron::regular(2.0).unwrap();
        let fam = ConfocalQuadricPair::parabolic(3.0).unwrap();
        let a = fit_confocal_devices(&t, &EdgePair::standard()[0], &fam).unwrap();
        let b = robert();
        for u in [-0.9, -0.3, 0.0, 0.5, 1.0] {
            let (un, uf) = (u * b.near.half, u * b.far.half);
            assert!((a.near.point(un) - b.near.point(un)).norm() < 1e-10);
            assert!((a.far.point(uf) - b.far.point(uf)).norm() < 1e-10);
        }
        assert!((a.width - b.width).abs() < 1e-10);
    }

    #[test]
    fn circle_line_pair_values() {
        let pair = circle_line();
        let QuadricKind::CircleLine { radius } = pair.quadrics().kind else {
            panic!("expected circle-line");
        };
        assert!((radius - 3f64.sqrt()).abs() < 1e-10);
        let t = Tetrahedron::regular(2.0).unwrap();
        let mid_cd = (t.vertex(2) + t.vertex(3)) / 2.0;
        for u in pair.near.params(20) {
            assert!(((pair.near.point(u) - mid_cd).norm() - 3f64.sqrt()).abs() < 1e-10);
            assert_eq!(pair.near.radius(u), 0.0);
        }
        for u in pair.far.params(20) {
            let y = pair.far.point(u);
            assert!(((y - t.vertex(2)).cross(&(t.vertex(3) - t.vertex(2)))).norm() < 1e-10);
        }
        assert!((pair.width - 2.0).abs() < 1e-10);
        assert_eq!(pair.near.frame.kind, FrameKind::DegenerateCircle);
        assert_eq!(pair.far.frame.kind, FrameKind::DegenerateLine);
    }

    #[test]
    fn degenerate_line_law_is_a_focal_law() {
        // width - √(ρ² + u²) equals r - |c - y| with c the top of the circle.
        let pair = circle_line();
        let c = pair.far.frame.principal_center;
        for u in pair.far.params(30) {
            let focal = pair.width - (c - pair.far.point(u)).norm();
            assert!((pair.far.radius(u) - focal.max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn elliptic_pair_has_expected_shape() {
        let pair = elliptic();
        let QuadricKind::EllipticHyperbolic { a, b } = pair.quadrics().kind else {
            panic!("expected elliptic-hyperbolic");
        };
        assert!((a / b - 2.0).abs() < 1e-12);
        assert!((pair.width - 2.0).abs() < 1e-9);
        assert_eq!(pair.near.frame.kind, FrameKind::Elliptic);
        assert_eq!(pair.far.frame.kind, FrameKind::Hyperbolic);
        let t = Tetrahedron::regular(2.0).unwrap();
        assert!((pair.near.point(pair.near.half - 1e-13) - t.vertex(1)).norm() < 1e-9);
        let end = pair.far.quadrics.point(&pair.far.quadric_param(pair.far.half)).unwrap();
        assert!((end - t.vertex(3)).norm() < 1e-9);
    }

    #[test]
    fn elliptic_fit_matches_quadratic_oracle() {
        // With k the height of the far chord above the ellipse center:
        // (β²/e²)k² - 2Dk - (D² + (p² + q²)/β²) = 0 and a² = k²/e² - q²/β².
        let (d, p, q) = (2f64.sqrt(), 1.0, 1.0);
        let t = Tetrahedron::regular(2.0).unwrap();
        for e in [0.2, 0.5, 0.8660254037844386, 0.95] {
            let beta2: f64 = 1.0 - e * e;
            let (qa, qb, qc) = (beta2 / (e * e), -2.0 * d, -(d * d + (p * p + q * q) / beta2));
            let k = (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
            let major = (k * k / (e * e) - q * q / beta2).sqrt();
            let fam = ConfocalQuadricPair::with_eccentricity(e).unwrap();
            let pair = fit_confocal_devices(&t, &EdgePair::standard()[0], &fam).unwrap();
            let QuadricKind::EllipticHyperbolic { a, b } = pair.quadrics().kind else {
                panic!("expected elliptic-hyperbolic")
            };
            assert!((a - major).abs() < 1e-10 * major, "e={e}: {a} vs {major}");
            assert!((b / a - beta2.sqrt()).abs() < 1e-12);
            let center = pair.quadrics().placement.translation.z;
            assert!((center - (-d / 2.0 - k)).abs() < 1e-10 * major);
            assert!((pair.width - 2.0).abs() < 1e-9, "e={e}: width {}", pair.width);
        }
    }

    #[test]
    fn constant_sum_on_all_families() {
        for pair in [robert(), circle_line(), elliptic()] {
            let (value, dev) = peapod_constant(&pair, 100);
            assert!((value - 2.0).abs() < 1e-9, "value {value}");
            assert!(dev < 1e-10, "deviation {dev}");
        }
    }

    #[test]
    fn constant_scales_with_similarity() {
        let t = Tetrahedron::regular(2.0).unwrap().scaled(1.7).unwrap();
        let pair = fit_parabolic_devices(&t, &EdgePair::standard()[1]).unwrap();
        let (value, dev) = peapod_constant(&pair, 40);
        assert!((value - 3.4).abs() < 1e-9);
        assert!(dev < 1e-9);
        let half = fit_parabolic_devices(&Tetrahedron::regular(1.0).unwrap(), &EdgePair::standard()[0]).unwrap();
        let full = robert();
        assert!((half.near.frame.principal_radius * 2.0 - full.near.frame.principal_radius).abs() < 1e-14);
    }

    #[test]
    fn cross_distances_equal_width() {
        let t = Tetrahedron::regular(2.0).unwrap();
        for p in EdgePair::standard() {
            let pair = fit_parabolic_devices(&t, &p).unwrap();
            for i in [p.near.0, p.near.1] {
                for j in [p.far.0, p.far.1] {
                    assert!(((t.vertex(i) - t.vertex(j)).norm() - pair.width).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn realization_diameter_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for pair in [robert(), circle_line(), elliptic()] {
            for _ in 0..2000 {
                let u = rng.gen_range(-pair.near.half..pair.near.half);
                let v = rng.gen_range(-pair.far.half..pair.far.half);
                let ball = |rng: &mut ChaCha8Rng, c: Vec3, r: f64| loop {
                    let w = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    if w.norm() <= 1.0 {
                        return c + w * r;
                    }
                };
                let w1 = ball(&mut rng, pair.near.point(u), pair.near.radius(u));
                let w2 = ball(&mut rng, pair.far.point(v), pair.far.radius(v));
                assert!((w1 - w2).norm() <= pair.width + 1e-9);
            }
        }
    }

    #[test]
    fn strings_project_onto_beams_and_avoid_the_tetrahedron() {
        let t = Tetrahedron::regular(2.0).unwrap();
        let c = t.centroid();
        let faces = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];
        let outside = |x: Vec3| {
            faces.iter().any(|f| {
                let [p, q, r] = f.map(|i| t.vertex(i));
                let mut n = (q - p).cross(&(r - p));
                if n.dot(&(c - p)) > 0.0 {
                    n = -n;
                }
                n.dot(&(x - p)) > 1e-12
            })
        };
        for pair in [robert(), circle_line(), elliptic()] {
            for d in [&pair.near, &pair.far] {
                let (b0, b1) = d.frame.beam;
                let dir = (b1 - b0).normalize();
                for u in d.params(50).into_iter().skip(1).take(49) {
                    let x = d.point(u);
                    let s = (x - b0).dot(&dir);
                    assert!(s > 0.0 && s < (b1 - b0).norm());
                    let off = (x - b0) - dir * s;
                    assert!(off.cross(&d.frame.axis_dir).norm() < 1e-12);
                    // The degenerate line string is the edge itself.
                    if d.frame.kind != FrameKind::DegenerateLine {
                        assert!(outside(x));
                    }
                }
            }
        }
    }

    #[test]
    fn bulb_maximizes_radius() {
        for pair in [robert(), elliptic()] {
            for d in [&pair.near, &pair.far] {
                let ps = d.params(200);
                let best = ps
                    .iter()
                    .copied()
                    .max_by(|a, b| d.radius(*a).total_cmp(&d.radius(*b)))
                    .unwrap();
                assert!(best.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_irregular_pairs() {
        let mut t = Tetrahedron::regular(2.0).unwrap();
        t.vertices[0] += Vec3::new(0.05, 0.02, 0.0);
        assert!(matches!(
            fit_parabolic_devices(&t, &EdgePair::standard()[0]),
            Err(crate::Error::ConstructionImpossible(_))
        ));
        let flat = Beams {
            near: (Vec3::new(-1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)),
            far: (Vec3::new(0.0, -1.0, 0.0), Vec3::new(0.0, 1.0, 0.0)),
        };
        assert!(fit_parabolic_beams(&flat).is_err());
    }
}
