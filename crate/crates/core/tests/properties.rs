//! Property tests over randomized inputs.

use std::f64::consts::PI;

use peabody::assembly::{family_body, meissner_body, roberts_body, MeissnerVariant};
use peabody::geom::{
    mesh_tolerance, semi_regular_check, tetrahedral_group, vertex_permutation, EdgePair, Isometry, Tetrahedron, Vec3,
    ABS_GEO_REL,
};
use peabody::mesh::{PeabodyMesh, VertexOrigin};
use peabody::peapod::{ball_radius, fit_confocal_devices, fit_parabolic_devices, DevicePair};
use peabody::quadrics::{Component, ConfocalQuadricPair, FourPointCase, QuadricParam};
use peabody::verify::{brute_support, minkowski_sum, width_along, width_report};
use peabody::wedge::{sample_wedge, Side};
use proptest::prelude::*;

fn motion() -> impl Strategy<Value = Isometry> {
    (
        prop::array::uniform3(-1.0f64..1.0),
        prop::array::uniform3(-5.0f64..5.0),
        0.0..2.0 * PI,
    )
        .prop_filter_map("axis must be non-zero", |(axis, shift, angle)| {
            let axis = Vec3::from(axis);
            (axis.norm() > 0.1).then(|| {
                Isometry::translation(Vec3::from(shift)).compose(&Isometry::rotation(Vec3::zeros(), axis, angle))
            })
        })
}

/// A device pair of a random supported family on a random-size tetrahedron.
fn device_pair() -> impl Strategy<Value = DevicePair> {
    (0.5f64..5.0, 0usize..3, 0usize..3, 0.05f64..0.95).prop_map(|(side, pair, family, e)| {
        let t = Tetrahedron::regular(side).unwrap();
        let p = EdgePair::standard()[pair];
        match family {
            0 => fit_parabolic_devices(&t, &p).unwrap(),
            1 => fit_confocal_devices(&t, &p, &ConfocalQuadricPair::with_eccentricity(e).unwrap()).unwrap(),
            _ => fit_confocal_devices(&t, &p, &ConfocalQuadricPair::circle_line(1.0).unwrap()).unwrap(),
        }
    })
}

fn cap_and_topology(mesh: &PeabodyMesh, width: f64, centers: &[Vec3; 4]) -> Result<(), TestCaseError> {
    mesh.check_watertight().map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(mesh.euler_characteristic(), 2);
    let mut caps = 0;
    for (p, o) in mesh.vertices.iter().zip(&mesh.origins) {
        if let VertexOrigin::Cap(v) = o {
            caps += 1;
            let d = (p - centers[*v as usize]).norm();
            prop_assert!((d - width).abs() < 1e-10 * width, "cap vertex off its sphere by {}", d - width);
        }
    }
    prop_assert!(caps > 0);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn regular_tetrahedron_edges(side in 0.5f64..10.0) {
        let t = Tetrahedron::regular(side).unwrap();
        for e in Tetrahedron::edges() {
            prop_assert!((t.edge_length(e) - side).abs() <= ABS_GEO_REL * side);
        }
    }

    #[test]
    fn semi_regularity_is_similarity_invariant(g in motion(), k in 0.1f64..10.0, dx in -0.3f64..0.3) {
        let mut t = Tetrahedron::regular(2.0).unwrap();
        if dx != 0.0 {
            t.vertices[0].x += dx;
        }
        for p in EdgePair::standard() {
            let moved = t.scaled(k).unwrap().transformed(&g);
            prop_assert_eq!(semi_regular_check(&t, &p), semi_regular_check(&moved, &p));
        }
    }

    #[test]
    fn four_point_identity(
        a in 0.1f64..5.0,
        ratio in 0.05f64..0.95,
        t in prop::array::uniform2(0.0f64..2.0 * PI),
        s in prop::array::uniform2(-1.4f64..1.4),
        upper in prop::array::uniform2(any::<bool>()),
        g in motion(),
    ) {
        let comp = |u: bool| if u { Component::Upper } else { Component::Lower };
        let eh = ConfocalQuadricPair::elliptic_hyperbolic(a, a * ratio).unwrap().placed(g);
        let p = [
            QuadricParam::first(t[0]),
            QuadricParam::hyperbola(comp(upper[0]), s[0]),
            QuadricParam::first(t[1]),
            QuadricParam::hyperbola(comp(upper[1]), s[1]),
        ];
        let case = if upper[0] == upper[1] { FourPointCase::SameComponent } else { FourPointCase::DifferentComponents };
        let r = eh.four_point_residual(p, case).unwrap();
        prop_assert!(r.abs() < 1e-10 * a, "residual {}", r);
        let par = ConfocalQuadricPair::parabolic(a).unwrap().placed(g);
        let p = [QuadricParam::first(t[0] - PI), QuadricParam::second(s[0] * 2.0), QuadricParam::first(t[1] - PI), QuadricParam::second(s[1] * 2.0)];
        let r = par.four_point_residual(p, FourPointCase::SameComponent).unwrap();
        prop_assert!(r.abs() < 1e-10 * a, "residual {}", r);
    }

    #[test]
    fn ellipse_hyperbola_distance(a in 0.1f64..5.0, ratio in 0.05f64..0.95, t in 0.0f64..2.0 * PI, s in -1.4f64..1.4) {
        let b = a * ratio;
        let f = (a * a - b * b).sqrt();
        let eh = ConfocalQuadricPair::elliptic_hyperbolic(a, b).unwrap();
        let p1 = eh.point(&QuadricParam::first(t)).unwrap();
        let p2 = eh.point(&QuadricParam::second(s)).unwrap();
        let oracle = (a / s.cos() + f * t.sin()).abs();
        prop_assert!(((p1 - p2).norm() - oracle).abs() < 1e-12 * oracle.max(a));
    }

    #[test]
    fn confocality(a in 0.1f64..5.0, ratio in 0.05f64..0.95, g in motion()) {
        let eh = ConfocalQuadricPair::elliptic_hyperbolic(a, a * ratio).unwrap().placed(g);
        let f = eh.foci();
        let on = |p: Vec3, q: QuadricParam| (eh.point(&q).unwrap() - p).norm() < ABS_GEO_REL * a;
        prop_assert!(on(f.second[0], QuadricParam::first(PI / 2.0)));
        prop_assert!(on(f.second[1], QuadricParam::first(-PI / 2.0)));
        prop_assert!(on(f.first[1], QuadricParam::second(0.0)));
        prop_assert!(on(f.first[0], QuadricParam::second(PI)));
        let par = ConfocalQuadricPair::parabolic(a).unwrap().placed(g);
        let f = par.foci();
        prop_assert!((par.point(&QuadricParam::second(0.0)).unwrap() - f.first[0]).norm() < ABS_GEO_REL * a);
        prop_assert!((par.point(&QuadricParam::first(0.0)).unwrap() - f.second[0]).norm() < ABS_GEO_REL * a);
    }

    #[test]
    fn placement_commutes(g in motion(), t in -2.0f64..2.0, a in 0.1f64..3.0) {
        let pair = ConfocalQuadricPair::elliptic_hyperbolic(a, a / 2.0).unwrap();
        for p in [QuadricParam::first(t), QuadricParam::second(t / 2.0)] {
            let moved = pair.placed(g).point(&p).unwrap();
            prop_assert!((moved - g.apply(&pair.point(&p).unwrap())).norm() < 1e-12 * (1.0 + a));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constant_sum_law(pair in device_pair(), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let u = (2.0 * x - 1.0) * pair.near.half;
        let v = (2.0 * y - 1.0) * pair.far.half;
        let s = (pair.near.point(u) - pair.far.point(v)).norm() + pair.near.radius(u) + pair.far.radius(v);
        prop_assert!((s - pair.width).abs() < 1e-9 * pair.width, "sum {} width {}", s, pair.width);
    }

    #[test]
    fn cross_distances_equal_width(pair in device_pair()) {
        let (a, b) = pair.near.frame.beam;
        let (c, d) = pair.far.frame.beam;
        for (p, q) in [(a, c), (a, d), (b, c), (b, d)] {
            prop_assert!(((p - q).norm() - pair.width).abs() < 1e-9 * pair.width);
        }
    }

    #[test]
    fn realization_diameter(pair in device_pair(), x in 0.0f64..1.0, y in 0.0f64..1.0, w in prop::array::uniform2(prop::array::uniform3(-1.0f64..1.0))) {
        let u = (2.0 * x - 1.0) * pair.near.half;
        let v = (2.0 * y - 1.0) * pair.far.half;
        let inside = |c: [f64; 3]| {
            let c = Vec3::from(c);
            if c.norm() > 1.0 { c / c.norm() } else { c }
        };
        let w1 = pair.near.point(u) + inside(w[0]) * ball_radius(&pair.near, u).unwrap();
        let w2 = pair.far.point(v) + inside(w[1]) * ball_radius(&pair.far, v).unwrap();
        prop_assert!((w1 - w2).norm() <= pair.width + 1e-9 * pair.width);
    }

    #[test]
    fn bulb_is_the_radius_maximizer(pair in device_pair()) {
        for d in [&pair.near, &pair.far] {
            if d.is_degenerate() {
                continue;
            }
            let params = d.params(100);
            let best = params.iter().copied().max_by(|a, b| d.radius(*a).total_cmp(&d.radius(*b))).unwrap();
            prop_assert!(best.abs() < 1e-12);
            prop_assert_eq!(d.radius(d.half), 0.0);
        }
    }

    #[test]
    fn wedge_binormals(pair in device_pair(), res in 4usize..24) {
        let near = sample_wedge(&pair, Side::Near, res).unwrap();
        let far = sample_wedge(&pair, Side::Far, res).unwrap();
        for i in 0..=res {
            for j in 0..=res {
                let d = near.grid[i][j] - far.grid[i][j];
                prop_assert!((d.norm() - pair.width).abs() < 1e-10 * pair.width);
                let dir = d / d.norm();
                prop_assert!((near.normals[i][j] - dir).norm() < 1e-10);
                prop_assert!((far.normals[i][j] + dir).norm() < 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn assembled_bodies_are_closed_and_caps_are_spherical(side in 0.5f64..4.0, lambda in 0.0f64..1.0, res in 8usize..20, kind in 0usize..3) {
        let mesh = match kind {
            0 => roberts_body(side, res).unwrap(),
            1 => meissner_body(if res % 2 == 0 { MeissnerVariant::ThreeAtVertex } else { MeissnerVariant::ThreeAtFace }, side, res).unwrap(),
            _ => family_body(lambda, side, res).unwrap(),
        };
        let t = Tetrahedron::regular(side).unwrap();
        cap_and_topology(&mesh, side, &t.vertices)?;
        prop_assert!(mesh.local_convexity_violation() <= mesh_tolerance(side, res));
    }

    #[test]
    fn bodies_scale_with_the_tetrahedron(side in 0.5f64..4.0, res in 8usize..20) {
        let unit = roberts_body(2.0, res).unwrap().scaled(side / 2.0);
        let direct = roberts_body(side, res).unwrap();
        prop_assert_eq!(&unit.triangles, &direct.triangles);
        for (p, q) in unit.vertices.iter().zip(&direct.vertices) {
            prop_assert!((p - q).norm() < 1e-12 * side);
        }
    }

    #[test]
    fn widths_are_invariant_under_rigid_motion(g in motion(), lambda in 0.0f64..1.0) {
        let mesh = family_body(lambda, 2.0, 16).unwrap();
        let moved = mesh.transformed(&g);
        for u in peabody::geom::fibonacci_sphere(300) {
            let gu = g.apply_vector(&u);
            prop_assert!((width_along(&mesh.vertices, &u) - width_along(&moved.vertices, &gu)).abs() < ABS_GEO_REL);
        }
        let tol = mesh_tolerance(2.0, 16);
        let a = width_report(&mesh, 400, tol, Some(2.0)).unwrap();
        let b = width_report(&moved, 400, tol, Some(2.0)).unwrap();
        prop_assert!((a.diameter - b.diameter).abs() < ABS_GEO_REL);
        let shifted = mesh.transformed(&Isometry::translation(g.translation));
        let c = width_report(&shifted, 400, tol, Some(2.0)).unwrap();
        for (x, y) in [(a.min_width, c.min_width), (a.max_width, c.max_width), (a.mean_width, c.mean_width), (a.diameter, c.diameter)] {
            prop_assert!((x - y).abs() < ABS_GEO_REL);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn minkowski_support_is_additive(g in motion()) {
        let a = meissner_body(MeissnerVariant::ThreeAtVertex, 1.0, 16).unwrap();
        let b = meissner_body(MeissnerVariant::ThreeAtFace, 1.0, 16).unwrap().transformed(&g);
        let sum = minkowski_sum(&a, &b, 4000).unwrap();
        let tol = mesh_tolerance(2.0, 16);
        for u in peabody::geom::fibonacci_sphere(1000) {
            let h = |m: &PeabodyMesh| brute_support(&m.vertices, &u).unwrap().1;
            prop_assert!((h(&sum) - h(&a) - h(&b)).abs() <= tol);
        }
    }
}

#[test]
fn group_is_closed_and_induces_s4() {
    let t = Tetrahedron::regular(2.0).unwrap();
    let group = tetrahedral_group(&t).unwrap();
    let mut perms: Vec<[usize; 4]> = group.iter().map(|g| vertex_permutation(g, &t, 1e-10).unwrap()).collect();
    perms.sort();
    perms.dedup();
    assert_eq!(perms.len(), 24);
    for g in &group {
        for h in &group {
            let gh = g.compose(h);
            assert!(group.iter().any(|k| k.distance(&gh) < 1e-10));
        }
    }
}

#[test]
fn width_spread_within_mesh_tolerance() {
    for res in [16, 24, 32, 48] {
        for mesh in [
            roberts_body(2.0, res).unwrap(),
            meissner_body(MeissnerVariant::ThreeAtFace, 2.0, res).unwrap(),
            family_body(0.7, 2.0, res).unwrap(),
        ] {
            let r = width_report(&mesh, 2000, mesh_tolerance(2.0, res), Some(2.0)).unwrap();
            assert!(r.pass, "res {res}: {r:?}");
            assert!(r.diameter <= 2.0 + ABS_GEO_REL);
        }
    }
}
