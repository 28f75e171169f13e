//! Gradient training of slit positions so that the detector readout
//! approximates a target function of the refraction-index inputs.
//!
//! Only transverse slit positions move; barrier planes stay fixed, so the path
//! topology (and the hidden-layer width) never changes. The readout is either
//! `|A|²` or `Re A`, optionally followed by a trainable affine map `s·y + b`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::{qnn_amplitude_with, Amplitude, PhasorSum};
use crate::error::{Error, Result};
use crate::geometry::{MediumVector, SlitGeometry};
use crate::summation::{CompensatedSum, Reduction};

/// Minimum separation of two slits on one barrier.
pub const SLIT_COLLISION: f64 = 1e-9;
/// Segments shorter than this make the gradient undefined.
pub const DEGENERATE_SEGMENT: f64 = 1e-12;
const MAX_STEP_HALVINGS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub input: MediumVector,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Sample>", into = "Vec<Sample>")]
pub struct Dataset(Vec<Sample>);

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        if let Some(first) = samples.first() {
            let dim = first.input.len();
            for s in &samples {
                if s.input.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: s.input.len(),
                    });
                }
                if !s.target.is_finite() {
                    return Err(Error::BadRange(format!("non-finite target {}", s.target)));
                }
            }
        }
        Ok(Self(samples))
    }

    pub fn samples(&self) -> &[Sample] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.0.first().map_or(0, |s| s.input.len())
    }

    /// Places each input at `offset` inside a vector of `regions` indices,
    /// filling the other regions with `fill`.
    pub fn embed(&self, regions: usize, offset: usize, fill: f64) -> Result<Self> {
        if offset + self.dim() > regions {
            return Err(Error::DimensionMismatch {
                expected: regions,
                got: offset + self.dim(),
            });
        }
        let samples = self
            .0
            .iter()
            .map(|s| {
                let mut v = vec![fill; regions];
                v[offset..offset + s.input.len()].copy_from_slice(s.input.as_slice());
                Ok(Sample {
                    input: MediumVector::new(v)?,
                    target: s.target,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples)
    }
}

impl TryFrom<Vec<Sample>> for Dataset {
    type Error = Error;
    fn try_from(v: Vec<Sample>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Dataset> for Vec<Sample> {
    fn from(d: Dataset) -> Self {
        d.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DatasetKind {
    Constant { value: f64 },
    /// Mean normalized coordinate: 0 at the low corner, 1 at the high corner.
    Linear,
    /// Mean over components of `(1 + cos(4π(x − lo)))/2`.
    Sine,
    /// `exp(−|u − ½|²/(2σ²))` in normalized coordinates, `σ = 0.15`.
    GaussianBump,
}

const BUMP_SIGMA: f64 = 0.15;

impl DatasetKind {
    pub fn target(&self, x: &[f64], lo: f64, hi: f64) -> f64 {
        let d = x.len() as f64;
        let u = |v: f64| (v - lo) / (hi - lo);
        match *self {
            DatasetKind::Constant { value } => value,
            DatasetKind::Linear => x.iter().map(|&v| u(v)).sum::<f64>() / d,
            DatasetKind::Sine => {
                x.iter()
                    .map(|&v| 0.5 * (1.0 + (4.0 * std::f64::consts::PI * (v - lo)).cos()))
                    .sum::<f64>()
                    / d
            }
            DatasetKind::GaussianBump => {
                let r2: f64 = x.iter().map(|&v| (u(v) - 0.5).powi(2)).sum();
                (-r2 / (2.0 * BUMP_SIGMA * BUMP_SIGMA)).exp()
            }
        }
    }
}

/// Regular `grid_size^dim` grid over `[lo, hi]^dim`, last component fastest.
pub fn make_dataset(kind: DatasetKind, dim: usize, grid_size: usize, range: (f64, f64)) -> Result<Dataset> {
    let (lo, hi) = range;
    if grid_size < 2 {
        return Err(Error::BadRange(format!("grid_size must be >= 2, got {grid_size}")));
    }
    if dim == 0 {
        return Err(Error::BadRange("dim must be >= 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::BadRange(format!(
            "need 0 < lo < hi for refraction indices, got [{lo}, {hi}]"
        )));
    }
    let total = grid_size
        .checked_pow(dim as u32)
        .filter(|&t| t <= 10_000_000)
        .ok_or_else(|| Error::BadRange(format!("{grid_size}^{dim} grid is too large")))?;
    let step = (hi - lo) / (grid_size - 1) as f64;
    let mut samples = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        let x: Vec<f64> = idx
            .iter()
            .map(|&i| if i == grid_size - 1 { hi } else { lo + i as f64 * step })
            .collect();
        let target = kind.target(&x, lo, hi);
        samples.push(Sample {
            input: MediumVector::new(x)?,
            target,
        });
        for slot in idx.iter_mut().rev() {
            *slot += 1;
            if *slot < grid_size {
                break;
            }
            *slot = 0;
        }
    }
    Dataset::new(samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputMap {
    #[default]
    Probability,
    RealPart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMode {
    None,
    #[default]
    Affine,
}

/// Affine readout `s·y_raw + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Affine {
    pub scale: f64,
    pub offset: f64,
}

impl Affine {
    pub const IDENTITY: Affine = Affine {
        scale: 1.0,
        offset: 0.0,
    };
}

/// Maps an amplitude to the scalar the model is trained on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    pub output_map: OutputMap,
    pub calibration: Option<Affine>,
}

impl Readout {
    pub fn raw(&self, a: Amplitude) -> f64 {
        match self.output_map {
            OutputMap::Probability => a.probability(),
            OutputMap::RealPart => a.re,
        }
    }

    pub fn apply(&self, a: Amplitude) -> f64 {
        let y = self.raw(a);
        match self.calibration {
            Some(c) => c.scale * y + c.offset,
            None => y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlitBounds {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SlitInit {
    /// Start from the slit positions of the given geometry.
    #[default]
    Given,
    /// Draw every slit uniformly inside its barrier's bounds from `seed`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub output_map: OutputMap,
    pub calibration: CalibrationMode,
    /// Starting affine map; least-squares fit at the start geometry if unset.
    pub initial_calibration: Option<Affine>,
    pub seed: u64,
    pub init: SlitInit,
    pub convergence_mse: f64,
    /// One interval per barrier, or a single interval shared by all.
    pub slit_bounds: Vec<SlitBounds>,
    #[serde(skip)]
    pub reduction: Reduction,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            max_epochs: 1000,
            output_map: OutputMap::Probability,
            calibration: CalibrationMode::Affine,
            initial_calibration: None,
            seed: 0,
            init: SlitInit::Given,
            convergence_mse: 0.0,
            slit_bounds: vec![SlitBounds {
                min: -1e3,
                max: 1e3,
            }],
            reduction: Reduction::Sequential,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, barriers: usize) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::BadTrainConfig(format!(
                "learning_rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        if self.max_epochs < 1 {
            return Err(Error::BadTrainConfig("max_epochs must be >= 1".into()));
        }
        if !(self.convergence_mse >= 0.0) {
            return Err(Error::BadTrainConfig("convergence_mse must be >= 0".into()));
        }
        if self.slit_bounds.len() != 1 && self.slit_bounds.len() != barriers {
            return Err(Error::BadTrainConfig(format!(
                "expected 1 or {barriers} slit bound intervals, got {}",
                self.slit_bounds.len()
            )));
        }
        if let Some(b) = self.slit_bounds.iter().find(|b| !(b.min < b.max)) {
            return Err(Error::BadTrainConfig(format!(
                "empty slit bound interval [{}, {}]",
                b.min, b.max
            )));
        }
        Ok(())
    }

    pub fn bounds_for(&self, barrier: usize) -> SlitBounds {
        if self.slit_bounds.len() == 1 {
            self.slit_bounds[0]
        } else {
            self.slit_bounds[barrier]
        }
    }

    fn readout(&self, calibration: Affine) -> Readout {
        Readout {
            output_map: self.output_map,
            calibration: match self.calibration {
                CalibrationMode::Affine => Some(calibration),
                CalibrationMode::None => None,
            },
        }
    }
}

/// Scalar model output for one input.
pub fn model_output(g: &SlitGeometry, n: &MediumVector, readout: &Readout) -> Result<f64> {
    Ok(readout.apply(qnn_amplitude_with(g, n, Reduction::Sequential)?))
}

/// Gradient of the loss with respect to every slit position (in
/// [`SlitGeometry::slit_positions`] order) and the calibration parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub slits: Vec<f64>,
    pub scale: Option<f64>,
    pub offset: Option<f64>,
}

impl Gradient {
    /// Flat vector: slits, then scale and offset if calibrated.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = self.slits.clone();
        v.extend(self.scale);
        v.extend(self.offset);
        v
    }
}

/// Per-path geometric data reused across samples.
struct PathTable {
    barriers: usize,
    regions: usize,
    k: f64,
    /// `paths × regions` segment lengths.
    lengths: Vec<f64>,
    /// `paths × barriers` global slit indices.
    slits: Vec<usize>,
    /// `paths × barriers × 2`: `∂l/∂x` of the incoming and outgoing segment.
    dl: Vec<[f64; 2]>,
}

impl PathTable {
    fn build(g: &SlitGeometry) -> Result<Self> {
        g.validate()?;
        let total = g.count_paths()? as usize;
        let barriers = g.barriers.len();
        let regions = g.region_count();
        let offsets: Vec<usize> = g
            .barriers
            .iter()
            .scan(0, |acc, b| {
                let o = *acc;
                *acc += b.slits.len();
                Some(o)
            })
            .collect();
        let mut lengths = Vec::with_capacity(total * regions);
        let mut slits = Vec::with_capacity(total * barriers);
        let mut dl = Vec::with_capacity(total * barriers);
        let mut choices = vec![0usize; barriers];
        let mut seg = vec![0.0; regions];
        for p in 0..total as u64 {
            g.slit_choices_at(p, &mut choices);
            g.segment_lengths_into(&choices, &mut seg);
            if let Some(&l) = seg.iter().find(|&&l| l < DEGENERATE_SEGMENT) {
                return Err(Error::DegenerateSegment(l));
            }
            lengths.extend_from_slice(&seg);
            let pts = g.path_points(&choices);
            for (i, &c) in choices.iter().enumerate() {
                slits.push(offsets[i] + c);
                let here = pts[i + 1];
                dl.push([
                    (here.x - pts[i].x) / seg[i],
                    (here.x - pts[i + 2].x) / seg[i + 1],
                ]);
            }
        }
        Ok(Self {
            barriers,
            regions,
            k: g.wavenumber(),
            lengths,
            slits,
            dl,
        })
    }

    fn path_count(&self) -> usize {
        self.lengths.len() / self.regions
    }

    fn phase(&self, p: usize, n: &[f64]) -> f64 {
        let l = &self.lengths[p * self.regions..(p + 1) * self.regions];
        crate::amplitude::weighted_phase(l, self.k, n)
    }

    fn amplitude(&self, n: &[f64]) -> Amplitude {
        let mut acc = PhasorSum::new();
        for p in 0..self.path_count() {
            acc.add_phase(self.phase(p, n));
        }
        acc.value()
    }

    /// Raw readout and its derivative with respect to every slit position.
    fn raw_with_grad(&self, n: &[f64], map: OutputMap, n_slits: usize) -> (f64, Vec<f64>) {
        let a = self.amplitude(n);
        let mut grad = vec![0.0; n_slits];
        for p in 0..self.path_count() {
            let (s, c) = self.phase(p, n).sin_cos();
            // ∂raw/∂φ_p
            let dphi = match map {
                OutputMap::Probability => 2.0 * (a.im * c - a.re * s),
                OutputMap::RealPart => -s,
            };
            for i in 0..self.barriers {
                let j = p * self.barriers + i;
                let [d_in, d_out] = self.dl[j];
                grad[self.slits[j]] += dphi * self.k * (n[i] * d_in + n[i + 1] * d_out);
            }
        }
        let raw = match map {
            OutputMap::Probability => a.probability(),
            OutputMap::RealPart => a.re,
        };
        (raw, grad)
    }
}

fn check_dataset(g: &SlitGeometry, data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.dim() != g.region_count() {
        return Err(Error::DimensionMismatch {
            expected: g.region_count(),
            got: data.dim(),
        });
    }
    Ok(())
}

fn map_samples<T: Send, F>(data: &Dataset, reduction: Reduction, f: F) -> Vec<T>
where
    F: Fn(&Sample) -> T + Sync + Send,
{
    match reduction {
        Reduction::Sequential => data.samples().iter().map(f).collect(),
        Reduction::Parallel { .. } => data.samples().par_iter().map(f).collect(),
    }
}

/// Mean squared error of the readout over the dataset.
pub fn loss(g: &SlitGeometry, data: &Dataset, readout: &Readout) -> Result<f64> {
    loss_with(g, data, readout, Reduction::Sequential)
}

pub fn loss_with(g: &SlitGeometry, data: &Dataset, readout: &Readout, reduction: Reduction) -> Result<f64> {
    check_dataset(g, data)?;
    let table = PathTable::build(g)?;
    Ok(loss_from_table(&table, data, readout, reduction))
}

fn loss_from_table(table: &PathTable, data: &Dataset, readout: &Readout, reduction: Reduction) -> f64 {
    let sq = map_samples(data, reduction, |s| {
        let r = readout.apply(table.amplitude(s.input.as_slice())) - s.target;
        r * r
    });
    sq.into_iter().collect::<CompensatedSum>().value() / data.len() as f64
}

/// Analytic gradient of [`loss`].
pub fn grad_slits(g: &SlitGeometry, data: &Dataset, readout: &Readout) -> Result<Gradient> {
    Ok(loss_and_grad(g, data, readout, Reduction::Sequential)?.1)
}

pub fn loss_and_grad(
    g: &SlitGeometry,
    data: &Dataset,
    readout: &Readout,
    reduction: Reduction,
) -> Result<(f64, Gradient)> {
    check_dataset(g, data)?;
    let table = PathTable::build(g)?;
    let n_slits = g.slit_count();
    let cal = readout.calibration;
    let scale = cal.map_or(1.0, |c| c.scale);
    let per_sample = map_samples(data, reduction, |s| {
        let (raw, grad) = table.raw_with_grad(s.input.as_slice(), readout.output_map, n_slits);
        let y = match cal {
            Some(c) => c.scale * raw + c.offset,
            None => raw,
        };
        (y - s.target, raw, grad)
    });

    let norm = 2.0 / data.len() as f64;
    let mut sq = CompensatedSum::new();
    let mut d_slits = vec![CompensatedSum::new(); n_slits];
    let mut d_scale = CompensatedSum::new();
    let mut d_offset = CompensatedSum::new();
    for (r, raw, grad) in &per_sample {
        sq.add(r * r);
        for (acc, g) in d_slits.iter_mut().zip(grad) {
            acc.add(r * scale * g);
        }
        d_scale.add(r * raw);
        d_offset.add(*r);
    }
    let mse = sq.value() / data.len() as f64;
    let gradient = Gradient {
        slits: d_slits.iter().map(|a| norm * a.value()).collect(),
        scale: cal.map(|_| norm * d_scale.value()),
        offset: cal.map(|_| norm * d_offset.value()),
    };
    Ok((mse, gradient))
}

/// Least-squares affine map from raw readout to targets.
pub fn fit_affine(g: &SlitGeometry, data: &Dataset, map: OutputMap) -> Result<Affine> {
    check_dataset(g, data)?;
    let table = PathTable::build(g)?;
    let raw_readout = Readout {
        output_map: map,
        calibration: None,
    };
    let raw: Vec<f64> = data
        .samples()
        .iter()
        .map(|s| raw_readout.apply(table.amplitude(s.input.as_slice())))
        .collect();
    let n = raw.len() as f64;
    let mx = raw.iter().sum::<f64>() / n;
    let my = data.samples().iter().map(|s| s.target).sum::<f64>() / n;
    let sxx: f64 = raw.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = raw
        .iter()
        .zip(data.samples())
        .map(|(x, s)| (x - mx) * (s.target - my))
        .sum();
    let scale = if sxx > 1e-300 { sxy / sxx } else { 1.0 };
    Ok(Affine {
        scale,
        offset: my - scale * mx,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxEpochs,
    NonFiniteLoss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Best geometry seen.
    pub geometry: SlitGeometry,
    /// Loss at the start of every epoch, epoch 0 being the initial state.
    pub mse_trace: Vec<f64>,
    pub calibration: Option<Affine>,
    pub output_map: OutputMap,
    pub final_mse: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl TrainReport {
    pub fn readout(&self) -> Readout {
        Readout {
            output_map: self.output_map,
            calibration: self.calibration,
        }
    }

    /// `epoch,mse` lines with a header.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("epoch,mse\n");
        for (e, m) in self.mse_trace.iter().enumerate() {
            out.push_str(&format!("{e},{m:.16e}\n"));
        }
        out
    }
}

/// Error carrying the partial report when the loss stops being finite.
#[derive(Debug, Clone)]
pub struct TrainFailure {
    pub error: Error,
    pub report: Option<Box<TrainReport>>,
}

impl From<Error> for TrainFailure {
    fn from(error: Error) -> Self {
        Self { error, report: None }
    }
}

impl std::fmt::Display for TrainFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for TrainFailure {}

fn slits_collide(g: &SlitGeometry) -> bool {
    g.barriers.iter().any(|b| {
        b.slits
            .iter()
            .enumerate()
            .any(|(i, x)| b.slits[..i].iter().any(|y| (x - y).abs() < SLIT_COLLISION))
    })
}

fn clamp_slits(g: &SlitGeometry, positions: &[f64], cfg: &TrainConfig) -> Vec<f64> {
    let mut out = Vec::with_capacity(positions.len());
    let mut it = positions.iter();
    for (i, b) in g.barriers.iter().enumerate() {
        let bounds = cfg.bounds_for(i);
        for _ in &b.slits {
            out.push(it.next().unwrap().clamp(bounds.min, bounds.max));
        }
    }
    out
}

fn initial_geometry(g0: &SlitGeometry, cfg: &TrainConfig) -> Result<SlitGeometry> {
    let positions = match cfg.init {
        SlitInit::Given => g0.slit_positions(),
        SlitInit::Uniform => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut v = Vec::with_capacity(g0.slit_count());
            for (i, b) in g0.barriers.iter().enumerate() {
                let bounds = cfg.bounds_for(i);
                for _ in &b.slits {
                    v.push(rng.gen_range(bounds.min..bounds.max));
                }
            }
            v
        }
    };
    let g = g0.with_slit_positions(&clamp_slits(g0, &positions, cfg))?;
    if slits_collide(&g) {
        return Err(Error::BadTrainConfig(
            "initial slits collide after clamping to bounds".into(),
        ));
    }
    g.validate()?;
    Ok(g)
}

/// Full-batch gradient descent on slit positions and calibration.
///
/// Keeps the best geometry seen; stops at `max_epochs` or once the loss is at
/// most `convergence_mse`. A step that would bring two slits on one barrier
/// closer than [`SLIT_COLLISION`] is retried with half the learning rate.
pub fn train(g0: &SlitGeometry, data: &Dataset, cfg: &TrainConfig) -> std::result::Result<TrainReport, TrainFailure> {
    g0.validate()?;
    cfg.validate(g0.barriers.len())?;
    check_dataset(g0, data)?;

    let mut geometry = initial_geometry(g0, cfg)?;
    let mut calibration = match (cfg.calibration, cfg.initial_calibration) {
        (CalibrationMode::None, _) => Affine::IDENTITY,
        (CalibrationMode::Affine, Some(c)) => c,
        (CalibrationMode::Affine, None) => fit_affine(&geometry, data, cfg.output_map)?,
    };

    // the scale is descended in units of the largest possible raw readout
    let paths = geometry.count_paths()? as f64;
    let raw_max = match cfg.output_map {
        OutputMap::Probability => paths * paths,
        OutputMap::RealPart => paths,
    };

    let mut trace = Vec::with_capacity(cfg.max_epochs + 1);
    let mut best = (f64::INFINITY, geometry.clone(), calibration, 0usize);
    let mut stop = StopReason::MaxEpochs;

    for epoch in 0..=cfg.max_epochs {
        let readout = cfg.readout(calibration);
        let (mse, grad) = loss_and_grad(&geometry, data, &readout, cfg.reduction)?;
        let grad_finite = grad.flatten().iter().all(|v| v.is_finite());
        if !mse.is_finite() || !grad_finite {
            let report = make_report(best, trace, cfg, epoch, StopReason::NonFiniteLoss);
            return Err(TrainFailure {
                error: Error::NonFiniteLoss(epoch),
                report: Some(Box::new(report)),
            });
        }
        trace.push(mse);
        if mse < best.0 {
            best = (mse, geometry.clone(), calibration, epoch);
        }
        if mse <= cfg.convergence_mse {
            stop = StopReason::Converged;
            break;
        }
        if epoch == cfg.max_epochs {
            break;
        }

        let positions = geometry.slit_positions();
        let mut lr = cfg.learning_rate;
        for _ in 0..MAX_STEP_HALVINGS {
            let stepped: Vec<f64> = positions
                .iter()
                .zip(&grad.slits)
                .map(|(x, d)| x - lr * d)
                .collect();
            let candidate = geometry.with_slit_positions(&clamp_slits(&geometry, &stepped, cfg))?;
            if slits_collide(&candidate) {
                lr *= 0.5;
                continue;
            }
            geometry = candidate;
            if let (Some(ds), Some(db)) = (grad.scale, grad.offset) {
                calibration.scale -= lr * ds / (raw_max * raw_max);
                calibration.offset -= lr * db;
            }
            break;
        }
    }

    let epochs = trace.len().saturating_sub(1);
    Ok(make_report(best, trace, cfg, epochs, stop))
}

fn make_report(
    best: (f64, SlitGeometry, Affine, usize),
    trace: Vec<f64>,
    cfg: &TrainConfig,
    epochs_run: usize,
    stop: StopReason,
) -> TrainReport {
    let (final_mse, geometry, calibration, best_epoch) = best;
    TrainReport {
        geometry,
        calibration: match cfg.calibration {
            CalibrationMode::Affine => Some(calibration),
            CalibrationMode::None => None,
        },
        output_map: cfg.output_map,
        final_mse,
        best_epoch,
        epochs_run,
        converged: stop == StopReason::Converged,
        stop_reason: stop,
        mse_trace: trace,
    }
}
