#![allow(dead_code)]

pub mod oracles;

use pathqnn::{Barrier, MediumVector, Point, SlitGeometry};
use proptest::prelude::*;
use rand::Rng;

/// Sorted slit positions with at least `gap` between neighbours.
fn spread(mut xs: Vec<f64>, gap: f64) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(xs.len());
    for x in xs {
        if out.last().map_or(true, |&p| x - p >= gap) {
            out.push(x);
        }
    }
    out
}

fn build(gaps: &[f64], slits: Vec<Vec<f64>>, sx: f64, dx: f64, wavelength: f64) -> SlitGeometry {
    let mut z = 0.0;
    let mut barriers = Vec::new();
    for (i, s) in slits.into_iter().enumerate() {
        z += gaps[i];
        barriers.push(Barrier::new(z, spread(s, 1e-3)));
    }
    z += gaps[gaps.len() - 1];
    SlitGeometry::new(Point::new(0.0, sx), barriers, Point::new(z, dx), wavelength)
}

/// Random valid geometry with up to `max_barriers` barriers of up to
/// `max_slits` slits.
pub fn geometry(max_barriers: usize, max_slits: usize) -> impl Strategy<Value = SlitGeometry> {
    (1..=max_barriers)
        .prop_flat_map(move |b| {
            (
                prop::collection::vec(0.3f64..2.0, b + 1),
                prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 1..=max_slits), b),
                -1.0f64..1.0,
                -1.0f64..1.0,
                0.2f64..3.0,
            )
        })
        .prop_map(|(gaps, slits, sx, dx, lam)| build(&gaps, slits, sx, dx, lam))
}

/// Random geometry paired with a medium vector of matching length.
pub fn geometry_and_medium(max_barriers: usize, max_slits: usize) -> impl Strategy<Value = (SlitGeometry, MediumVector)> {
    geometry(max_barriers, max_slits).prop_flat_map(|g| {
        let regions = g.region_count();
        (Just(g), prop::collection::vec(0.5f64..3.0, regions))
            .prop_map(|(g, n)| (g, MediumVector::new(n).unwrap()))
    })
}

/// Same distribution as [`geometry`], drawn from a plain RNG.
pub fn random_geometry<R: Rng>(rng: &mut R, max_barriers: usize, min_slits: usize, max_slits: usize) -> SlitGeometry {
    let b = rng.gen_range(1..=max_barriers);
    let gaps: Vec<f64> = (0..=b).map(|_| rng.gen_range(0.3..2.0)).collect();
    let slits = (0..b)
        .map(|_| {
            let k = rng.gen_range(min_slits..=max_slits);
            (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect()
        })
        .collect();
    build(&gaps, slits, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.2..3.0))
}

pub fn random_medium<R: Rng>(rng: &mut R, regions: usize) -> MediumVector {
    MediumVector::new((0..regions).map(|_| rng.gen_range(0.5..3.0)).collect()).unwrap()
}

/// Symmetric double slit: slits at ±d on one barrier halfway to the detector.
pub fn double_slit(d: f64, length: f64, wavelength: f64) -> SlitGeometry {
    SlitGeometry::new(
        Point::new(0.0, 0.0),
        vec![Barrier::new(length / 2.0, vec![-d, d])],
        Point::new(length, 0.0),
        wavelength,
    )
}

/// Smallest positive detector offset where the two double-slit paths differ
/// by half a wavelength, by bisection on the path difference.
pub fn half_wave_detector(d: f64, length: f64, wavelength: f64) -> f64 {
    let z = length / 2.0;
    let diff = |x: f64| {
        let via = |s: f64| (z * z + s * s).sqrt() + (z * z + (x - s) * (x - s)).sqrt();
        via(-d) - via(d) - wavelength / 2.0
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while diff(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if diff(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
