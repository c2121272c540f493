//! Confocal quadrics and the alternating four-point distance identity.

use std::f64::consts::PI;

use peabody::quadrics::{Component, ConfocalQuadricPair, FourPointCase, QuadricParam};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> peabody::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let eh = ConfocalQuadricPair::elliptic_hyperbolic(2.0, 1.0)?;
    let par = ConfocalQuadricPair::parabolic(1.0)?;
    let f = eh.foci();
    println!("ellipse foci {:?}", f.first.iter().map(|p| p.z).collect::<Vec<_>>());
    println!("hyperbola foci {:?}", f.second.iter().map(|p| p.z).collect::<Vec<_>>());

    let mut worst = [0.0f64; 3];
    for _ in 0..10_000 {
        let t = [rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)];
        let s = [rng.gen_range(-1.3..1.3), rng.gen_range(-1.3..1.3)];
        let same = [
            QuadricParam::first(t[0]),
            QuadricParam::hyperbola(Component::Upper, s[0]),
            QuadricParam::first(t[1]),
            QuadricParam::hyperbola(Component::Upper, s[1]),
        ];
        let mut split = same;
        split[3] = QuadricParam::hyperbola(Component::Lower, s[1]);
        let parabolic = [
            QuadricParam::first(s[0] * 2.0),
            QuadricParam::second(t[0] - PI),
            QuadricParam::first(s[1] * 2.0),
            QuadricParam::second(t[1] - PI),
        ];
        worst[0] = worst[0].max(par.four_point_residual(parabolic, FourPointCase::SameComponent)?.abs());
        worst[1] = worst[1].max(eh.four_point_residual(same, FourPointCase::SameComponent)?.abs());
        worst[2] = worst[2].max(eh.four_point_residual(split, FourPointCase::DifferentComponents)?.abs());
    }
    println!("max |a1a2 + a3a4 - a2a3 - a1a4| parabolic {:.2e}, same component {:.2e}", worst[0], worst[1]);
    println!("max |a1a2 + a1a4 - a2a3 - a3a4| different components {:.2e}", worst[2]);
    Ok(())
}
