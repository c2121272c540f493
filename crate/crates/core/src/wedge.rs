//! Wedge-pod surfaces: the envelope patches swept by a device pair.
//!
//! For string points `x` (near) and `y` (far) the near map sends `(x, y)` to
//! the point of the segment `yx`, extended past `x`, at distance `R(x)` from
//! `x`; the far map is the same with the roles swapped. Both images of one
//! `(x, y)` are exactly `width` apart.

use crate::error::{invalid, Result};
use crate::geom::{Tetrahedron, Vec3, ABS_GEO_REL};
use crate::peapod::DevicePair;

/// Which device the surface is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Near,
    Far,
}

/// Envelope point and its outward unit normal.
pub fn phi(pair: &DevicePair, x_param: f64, y_param: f64, side: Side) -> Result<(Vec3, Vec3)> {
    let x = pair.near.point(x_param);
    let y = pair.far.point(y_param);
    let d = x - y;
    let len = d.norm();
    if !(len > ABS_GEO_REL * pair.width) {
        return Err(invalid("string points coincide"));
    }
    let n = d / len;
    Ok(match side {
        Side::Near => (x + n * pair.near.radius(x_param), n),
        Side::Far => (y - n * pair.far.radius(y_param), -n),
    })
}

/// A sampled wedge-pod surface.
///
/// `grid[i][j]` is the image of near parameter `i` and far parameter `j`.
#[derive(Debug, Clone)]
pub struct WedgeSurface {
    pub side: Side,
    pub grid: Vec<Vec<Vec3>>,
    pub normals: Vec<Vec<Vec3>>,
    pub near_params: Vec<f64>,
    pub far_params: Vec<f64>,
    /// Curves where the partner parameter sits at either beam endpoint;
    /// they lie on the spheres of radius `width` about those endpoints.
    pub boundary: [Vec<Vec3>; 2],
    /// The edge this surface replaces.
    pub beam: (Vec3, Vec3),
    pub width: f64,
}

impl WedgeSurface {
    /// Envelope point with its own string index `i` and partner index `j`.
    pub fn own_partner(&self, i: usize, j: usize) -> Vec3 {
        match self.side {
            Side::Near => self.grid[i][j],
            Side::Far => self.grid[j][i],
        }
    }
}

/// Samples a wedge surface on a uniform `(res + 1)²` parameter grid.
pub fn sample_wedge(pair: &DevicePair, side: Side, res: usize) -> Result<WedgeSurface> {
    if res < 2 {
        return Err(invalid(format!("wedge resolution must be at least 2, got {res}")));
    }
    let near_params = pair.near.params(res);
    let far_params = pair.far.params(res);
    let mut grid = Vec::with_capacity(res + 1);
    let mut normals = Vec::with_capacity(res + 1);
    for &u in &near_params {
        let mut row = Vec::with_capacity(res + 1);
        let mut nrow = Vec::with_capacity(res + 1);
        for &v in &far_params {
            let (p, n) = phi(pair, u, v, side)?;
            row.push(p);
            nrow.push(n);
        }
        grid.push(row);
        normals.push(nrow);
    }
    let boundary = match side {
        Side::Near => [
            grid.iter().map(|r| r[0]).collect(),
            grid.iter().map(|r| r[res]).collect(),
        ],
        Side::Far => [grid[0].clone(), grid[res].clone()],
    };
    let beam = match side {
        Side::Near => pair.near.frame.beam,
        Side::Far => pair.far.frame.beam,
    };
    Ok(WedgeSurface {
        side,
        grid,
        normals,
        near_params,
        far_params,
        boundary,
        beam,
        width: pair.width,
    })
}

/// Which family of lines through the tetrahedron a line belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LineFamilyTag {
    AbCd,
    AcBd,
    AdBc,
    None,
}

impl LineFamilyTag {
    /// Tag of the family crossing the edge pair `{i, j}` / complement.
    pub fn for_edge(i: usize, j: usize) -> LineFamilyTag {
        let (i, j) = (i.min(j), i.max(j));
        match (i, j) {
            (0, 1) | (2, 3) => LineFamilyTag::AbCd,
            (0, 2) | (1, 3) => LineFamilyTag::AcBd,
            (0, 3) | (1, 2) => LineFamilyTag::AdBc,
            _ => LineFamilyTag::None,
        }
    }
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_cross(p: [f64; 2], q: [f64; 2], r: [f64; 2], s: [f64; 2], eps: f64) -> bool {
    let d1 = cross2(p, q, r);
    let d2 = cross2(p, q, s);
    let d3 = cross2(r, s, p);
    let d4 = cross2(r, s, q);
    ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
}

/// Classifies a line by projecting the tetrahedron along it.
///
/// The line is in the family of a pair of opposite edges when the four
/// projected vertices are in convex position with those edges projecting
/// to the crossing diagonals. Lines parallel to a face are unclassified.
/// Only the direction matters: the projection is the same for every point.
pub fn line_family_classify(t: &Tetrahedron, _point: Vec3, dir: Vec3) -> LineFamilyTag {
    let Some(u) = crate::geom::unit(dir) else {
        return LineFamilyTag::None;
    };
    let v = &t.vertices;
    let faces = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];
    for f in faces {
        let n = (v[f[1]] - v[f[0]]).cross(&(v[f[2]] - v[f[0]]));
        if n.normalize().dot(&u).abs() <= ABS_GEO_REL {
            return LineFamilyTag::None;
        }
    }
    let (e1, e2) = crate::geom::orthonormal_complement(&u);
    let proj: Vec<[f64; 2]> = v.iter().map(|p| [p.dot(&e1), p.dot(&e2)]).collect();
    let eps = ABS_GEO_REL * t.side_target * t.side_target;
    let pairs = [
        ((0, 1), (2, 3), LineFamilyTag::AbCd),
        ((0, 2), (1, 3), LineFamilyTag::AcBd),
        ((0, 3), (1, 2), LineFamilyTag::AdBc),
    ];
    let hits: Vec<LineFamilyTag> = pairs
        .iter()
        .filter(|((a, b), (c, d), _)| segments_cross(proj[*a], proj[*b], proj[*c], proj[*d], eps))
        .map(|p| p.2)
        .collect();
    match hits.as_slice() {
        [tag] => *tag,
        _ => LineFamilyTag::None,
    }
}
