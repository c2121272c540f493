//! Planar confocal quadric pairs in orthogonal planes.
//!
//! In the canonical frame the first curve lies in the xz-plane, the second
//! in the yz-plane, and all foci sit on the z-axis:
//!
//! | kind                | first curve                | second curve                    |
//! |---------------------|----------------------------|---------------------------------|
//! | elliptic-hyperbolic | `(b cos t, 0, a sin t)`    | `(0, b tan t, -f sec t)`        |
//! | parabolic           | `(2at, 0, at² - a/2)`      | `(0, -2at, -at² + a/2)`         |
//! | circle-line         | `(R cos t, 0, R sin t)`    | `(0, t, 0)`                     |
//!
//! with `f = √(a² − b²)`. The hyperbola has two components; `t` with
//! `cos t > 0` lands on the lower one.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::geom::{Isometry, Vec3};

/// Shape of a confocal pair in its canonical frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadricKind {
    /// Ellipse with semi-axes `a > b` and its confocal hyperbola.
    EllipticHyperbolic { a: f64, b: f64 },
    /// Two parabolas with focal length `a`, each focus at the other's vertex.
    Parabolic { a: f64 },
    /// Circle of the given radius and the line through its center.
    CircleLine { radius: f64 },
}

/// A confocal quadric pair placed in space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfocalQuadricPair {
    pub kind: QuadricKind,
    /// Maps the canonical frame to space.
    pub placement: Isometry,
}

/// Which curve of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Curve {
    First,
    Second,
}

/// Component of the hyperbola.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Upper,
    Lower,
}

/// A point on one curve of a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadricParam {
    pub branch: Curve,
    /// Hyperbola component; `None` on curves with a single component.
    pub component: Option<Component>,
    pub t: f64,
}

impl QuadricParam {
    pub fn first(t: f64) -> Self {
        QuadricParam {
            branch: Curve::First,
            component: None,
            t,
        }
    }

    /// Second-curve parameter in the canonical convention; the hyperbola
    /// component follows from the sign of `cos t`.
    pub fn second(t: f64) -> Self {
        let component = if t.cos() < 0.0 {
            Component::Upper
        } else {
            Component::Lower
        };
        QuadricParam {
            branch: Curve::Second,
            component: Some(component),
            t,
        }
    }

    /// Hyperbola point `(0, b tan s, ±f sec s)` with `s` in `(-π/2, π/2)`.
    pub fn hyperbola(component: Component, s: f64) -> Self {
        let t = match component {
            Component::Lower => s,
            Component::Upper => PI + s,
        };
        QuadricParam {
            branch: Curve::Second,
            component: Some(component),
            t,
        }
    }
}

/// Which form of the four-point identity applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourPointCase {
    /// `a2`, `a4` on the same component: `a1a2 + a3a4 = a2a3 + a1a4`.
    SameComponent,
    /// `a2`, `a4` on different components: `a1a2 + a1a4 = a2a3 + a3a4`.
    DifferentComponents,
}

/// Foci of both curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Foci {
    pub first: Vec<Vec3>,
    pub second: Vec<Vec3>,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {x}")))
    }
}

impl ConfocalQuadricPair {
    pub fn elliptic_hyperbolic(a: f64, b: f64) -> Result<Self> {
        positive("b", b)?;
        positive("a", a)?;
        if a <= b {
            return Err(invalid(format!("need a > b, got a={a}, b={b}")));
        }
        Ok(Self::canonical(QuadricKind::EllipticHyperbolic { a, b }))
    }

    pub fn parabolic(a: f64) -> Result<Self> {
        positive("a", a)?;
        Ok(Self::canonical(QuadricKind::Parabolic { a }))
    }

    pub fn circle_line(radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        Ok(Self::canonical(QuadricKind::CircleLine { radius }))
    }

    /// Elliptic-hyperbolic pair with unit major semi-axis and the given
    /// eccentricity; 0 and 1 give the circle-line and parabolic limits.
    pub fn with_eccentricity(e: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&e) {
            return Err(invalid(format!("eccentricity must lie in [0,1], got {e}")));
        }
        if e == 0.0 {
            Self::circle_line(1.0)
        } else if e == 1.0 {
            Self::parabolic(1.0)
        } else {
            Self::elliptic_hyperbolic(1.0, (1.0 - e * e).sqrt())
        }
    }

    fn canonical(kind: QuadricKind) -> Self {
        ConfocalQuadricPair {
            kind,
            placement: Isometry::identity(),
        }
    }

    pub fn placed(mut self, g: Isometry) -> Self {
        self.placement = g.compose(&self.placement);
        self
    }

    /// Focal distance over major semi-axis of the first curve.
    pub fn eccentricity(&self) -> f64 {
        match self.kind {
            QuadricKind::EllipticHyperbolic { a, b } => (a * a - b * b).sqrt() / a,
            QuadricKind::Parabolic { .. } => 1.0,
            QuadricKind::CircleLine { .. } => 0.0,
        }
    }

    fn focal(&self) -> f64 {
        match self.kind {
            QuadricKind::EllipticHyperbolic { a, b } => (a * a - b * b).sqrt(),
            _ => 0.0,
        }
    }

    /// Point in the canonical frame.
    pub fn canonical_point(&self, p: &QuadricParam) -> Result<Vec3> {
        let t = p.t;
        if !t.is_finite() {
            return Err(invalid("quadric parameter is not finite"));
        }
        let pt = match (self.kind, p.branch) {
            (QuadricKind::EllipticHyperbolic { a, b }, Curve::First) => {
                Vec3::new(b * t.cos(), 0.0, a * t.sin())
            }
            (QuadricKind::EllipticHyperbolic { b, .. }, Curve::Second) => {
                let c = t.cos();
                if c.abs() < 1e-12 {
                    return Err(invalid(format!("hyperbola parameter {t} is at a pole")));
                }
                let expected = if c < 0.0 {
                    Component::Upper
                } else {
                    Component::Lower
                };
                if p.component.is_some_and(|k| k != expected) {
                    return Err(invalid(format!(
                        "parameter {t} lies on the {expected:?} hyperbola component"
                    )));
                }
                Vec3::new(0.0, b * t.tan(), -self.focal() / c)
            }
            (QuadricKind::Parabolic { a }, Curve::First) => {
                Vec3::new(2.0 * a * t, 0.0, a * t * t - a / 2.0)
            }
            (QuadricKind::Parabolic { a }, Curve::Second) => {
                Vec3::new(0.0, -2.0 * a * t, -a * t * t + a / 2.0)
            }
            (QuadricKind::CircleLine { radius }, Curve::First) => {
                Vec3::new(radius * t.cos(), 0.0, radius * t.sin())
            }
            (QuadricKind::CircleLine { .. }, Curve::Second) => Vec3::new(0.0, t, 0.0),
        };
        Ok(pt)
    }

    /// Point on the named curve, mapped by the placement.
    pub fn point(&self, p: &QuadricParam) -> Result<Vec3> {
        Ok(self.placement.apply(&self.canonical_point(p)?))
    }

    /// Foci of both curves. Each curve passes through the other's foci.
    pub fn foci(&self) -> Foci {
        let z = |h: f64| self.placement.apply(&Vec3::new(0.0, 0.0, h));
        match self.kind {
            QuadricKind::EllipticHyperbolic { a, .. } => {
                let f = self.focal();
                Foci {
                    first: vec![z(f), z(-f)],
                    second: vec![z(a), z(-a)],
                }
            }
            QuadricKind::Parabolic { a } => Foci {
                first: vec![z(a / 2.0)],
                second: vec![z(-a / 2.0)],
            },
            QuadricKind::CircleLine { radius } => Foci {
                first: vec![z(0.0), z(0.0)],
                second: vec![z(radius), z(-radius)],
            },
        }
    }

    /// Signed residual of the four-point distance identity.
    ///
    /// `p1`, `p3` must lie on the first curve and `p2`, `p4` on the second.
    pub fn four_point_residual(
        &self,
        p: [QuadricParam; 4],
        case: FourPointCase,
    ) -> Result<f64> {
        if p[0].branch != Curve::First || p[2].branch != Curve::First {
            return Err(invalid("p1 and p3 must lie on the first curve"));
        }
        if p[1].branch != Curve::Second || p[3].branch != Curve::Second {
            return Err(invalid("p2 and p4 must lie on the second curve"));
        }
        if let QuadricKind::EllipticHyperbolic { .. } = self.kind {
            let comp = |q: &QuadricParam| q.component.or(QuadricParam::second(q.t).component);
            let same = comp(&p[1]) == comp(&p[3]);
            let wanted = if same {
                FourPointCase::SameComponent
            } else {
                FourPointCase::DifferentComponents
            };
            if wanted != case {
                return Err(invalid(format!(
                    "case {case:?} does not match the components of p2 and p4"
                )));
            }
        } else if let QuadricKind::Parabolic { .. } = self.kind {
            if case != FourPointCase::SameComponent {
                return Err(invalid("parabolas have a single component"));
            }
        }
        let q = [
            self.point(&p[0])?,
            self.point(&p[1])?,
            self.point(&p[2])?,
            self.point(&p[3])?,
        ];
        let d = |i: usize, j: usize| (q[i] - q[j]).norm();
        Ok(match case {
            FourPointCase::SameComponent => (d(0, 1) + d(2, 3)) - (d(1, 2) + d(0, 3)),
            FourPointCase::DifferentComponents => (d(0, 1) + d(0, 3)) - (d(1, 2) + d(2, 3)),
        })
    }
}
