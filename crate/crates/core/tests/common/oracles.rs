#![allow(dead_code)]

use pathqnn::actions::{schwarzschild_radial_action, PhysConstants, RadialMotion};
use pathqnn::training::{grad_slits, loss, Affine, Dataset, OutputMap, Readout, Sample};
use pathqnn::SlitGeometry;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-6;

pub struct Instance {
    pub g: SlitGeometry,
    pub data: Dataset,
    pub readout: Readout,
}

pub fn instance(rng: &mut ChaCha8Rng) -> Instance {
    let g = super::random_geometry(rng, 3, 2, 3);
    let samples = (0..rng.gen_range(2..6))
        .map(|_| Sample {
            input: super::random_medium(rng, g.region_count()),
            target: rng.gen_range(0.0..1.0),
        })
        .collect();
    let output_map = if rng.gen_bool(0.5) {
        OutputMap::Probability
    } else {
        OutputMap::RealPart
    };
    let calibration = rng.gen_bool(0.7).then(|| Affine {
        scale: rng.gen_range(0.05..0.5),
        offset: rng.gen_range(-0.5..0.5),
    });
    Instance {
        g,
        data: Dataset::new(samples).unwrap(),
        readout: Readout {
            output_map,
            calibration,
        },
    }
}

/// Central differences of the loss, same layout as `Gradient::flatten`.
pub fn finite_differences(inst: &Instance) -> Vec<f64> {
    let x0 = inst.g.slit_positions();
    let mut out = Vec::new();
    for i in 0..x0.len() {
        let at = |d: f64| {
            let mut x = x0.clone();
            x[i] += d;
            loss(&inst.g.with_slit_positions(&x).unwrap(), &inst.data, &inst.readout).unwrap()
        };
        out.push((at(H) - at(-H)) / (2.0 * H));
    }
    if let Some(c) = inst.readout.calibration {
        let with = |c: Affine| {
            let r = Readout {
                calibration: Some(c),
                ..inst.readout
            };
            loss(&inst.g, &inst.data, &r).unwrap()
        };
        let ds = (with(Affine { scale: c.scale + H, ..c }) - with(Affine { scale: c.scale - H, ..c })) / (2.0 * H);
        let db = (with(Affine { offset: c.offset + H, ..c }) - with(Affine { offset: c.offset - H, ..c })) / (2.0 * H);
        out.push(ds);
        out.push(db);
    }
    out
}

/// Worst relative error over components with magnitude above 1e-8.
pub fn worst_gradient_error(seed: u64, instances: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let inst = instance(&mut rng);
        let analytic = grad_slits(&inst.g, &inst.data, &inst.readout).unwrap().flatten();
        let fd = finite_differences(&inst);
        assert_eq!(analytic.len(), fd.len());
        for (a, f) in analytic.iter().zip(&fd) {
            if a.abs() > 1e-8 {
                worst = worst.max((a - f).abs() / a.abs());
            }
        }
    }
    worst
}

/// Potential giving `H = 1` for unit constants.
pub const UNIT_HUBBLE_POTENTIAL: f64 = 3.0 / (8.0 * std::f64::consts::PI);

pub fn reference_motion() -> RadialMotion {
    RadialMotion {
        mass: 1.0,
        central_mass: 1.0,
        energy: 1.05,
        r_start: 20.0,
        t_span: 5.0,
        direction: 1,
    }
}

/// Observed order `log2((w_N − w_2N)/(w_2N − w_4N))` of the weight factor.
pub fn schwarzschild_order(motion: &RadialMotion, n: usize) -> f64 {
    let consts = PhysConstants::default();
    let w = |k: usize| schwarzschild_radial_action(motion, &consts, k).unwrap().weight_factor;
    let (a, b, c) = (w(n), w(2 * n), w(4 * n));
    ((a - b) / (b - c)).log2()
}

