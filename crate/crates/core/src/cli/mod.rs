//! Command-line driver: `simulate`, `train`, `equivalence` and `actions`.
//!
//! Every subcommand reads one TOML file and writes its results into the
//! output directory. Exit status is 0 on success, 1 for configuration or I/O
//! problems and 2 when a numerical check fails.

pub mod config;
pub mod table;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::actions::{
    desitter_action, inflation_action, rock_action, schwarzschild_radial_action, ActionResult, RadialMotion,
};
use crate::amplitude::qnn_amplitude_with;
use crate::error::Error;
use crate::geometry::{MediumVector, SlitGeometry};
use crate::neural_map::ClassicalTwoLayerNet;
use crate::summation::Reduction;
use crate::training::{make_dataset, model_output, train, Dataset, DatasetKind, Readout, Sample, TrainReport};

pub use config::{
    ActionsConfig, DatasetSection, EquivalenceConfig, MediaSection, ModelSection, OutputFormat, OutputSection,
    SimulateConfig, TargetSection, TrainFileConfig,
};
pub use table::{Cell, Table};

/// Largest network/simulator disagreement `equivalence` accepts.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFiniteLoss(_)
            | Error::NonFiniteIntegrand(_)
            | Error::DegenerateSegment(_)
            | Error::TurningPointCrossed(_)
            | Error::EmptyPathSet => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pathqnn", version, about = "Path-sum quantum neural network simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detector amplitude for one index vector or a sweep.
    Simulate(CommonArgs),
    /// Gradient descent on slit positions.
    Train(CommonArgs),
    /// Compare the simulator with its two-layer network image.
    Equivalence(EquivalenceArgs),
    /// Classical action oracles over a parameter grid.
    Actions(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Reduce path sums over fixed chunks in parallel.
    #[arg(long)]
    pub parallel: bool,
    /// Overrides the seed in the config file.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct EquivalenceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Adds this amount to the first hidden weight (debugging aid).
    #[arg(long, hide = true)]
    pub debug_perturb_weight: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub parallel: bool,
    pub seed: Option<u64>,
    pub perturb_weight: Option<f64>,
}

impl RunOptions {
    fn reduction(&self) -> Reduction {
        if self.parallel {
            Reduction::parallel()
        } else {
            Reduction::Sequential
        }
    }
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("pathqnn: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let (common, perturb) = match &cli.command {
        Command::Simulate(a) | Command::Train(a) | Command::Actions(a) => (a, None),
        Command::Equivalence(a) => (&a.common, a.debug_perturb_weight),
    };
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let opts = RunOptions {
        out: common.out.clone(),
        parallel: common.parallel,
        seed: common.seed,
        perturb_weight: perturb,
    };
    std::fs::create_dir_all(&opts.out)?;
    match &cli.command {
        Command::Simulate(_) => {
            let cfg: SimulateConfig = parse_config(&text)?;
            let table = simulate(&cfg, &opts)?;
            table.write(&opts.out, stem(&cfg.output, "simulate"), cfg.output.format)?;
        }
        Command::Train(_) => {
            let cfg: TrainFileConfig = parse_config(&text)?;
            run_train(&cfg, &opts)?;
        }
        Command::Equivalence(_) => {
            let cfg: EquivalenceConfig = parse_config(&text)?;
            run_equivalence(&cfg, &opts)?;
        }
        Command::Actions(_) => {
            let cfg: ActionsConfig = parse_config(&text)?;
            let table = actions(&cfg)?;
            table.write(&opts.out, stem(&cfg.output, "actions"), cfg.output.format)?;
        }
    }
    Ok(())
}

pub fn parse_config<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

fn stem<'a>(out: &'a OutputSection, default: &'a str) -> &'a str {
    out.name.as_deref().unwrap_or(default)
}

fn linspace(start: f64, stop: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps < 2 || !start.is_finite() || !stop.is_finite() {
        return Err(CliError::Config(format!(
            "sweep needs finite bounds and at least 2 steps, got {start}..{stop} in {steps}"
        )));
    }
    let h = (stop - start) / (steps - 1) as f64;
    Ok((0..steps).map(|i| start + h * i as f64).collect())
}

/// Rows `sweep_value,re,im,probability`.
pub fn simulate(cfg: &SimulateConfig, opts: &RunOptions) -> Result<Table, CliError> {
    let g = &cfg.geometry;
    g.validate()?;
    let reduction = opts.reduction();
    let mut table = Table::new(&["sweep_value", "re", "im", "probability"]);
    let mut emit = |value: f64, g: &SlitGeometry, n: &MediumVector| -> Result<(), CliError> {
        let a = qnn_amplitude_with(g, n, reduction)?;
        if !a.is_finite() {
            return Err(CliError::Numerical(format!("non-finite amplitude at sweep value {value}")));
        }
        table.push(vec![value.into(), a.re.into(), a.im.into(), a.probability().into()]);
        Ok(())
    };
    match &cfg.media {
        MediaSection::Single { indices } => {
            emit(0.0, g, &MediumVector::new(indices.clone())?)?;
        }
        MediaSection::IndexSweep {
            indices,
            component,
            start,
            stop,
            steps,
        } => {
            if *component >= indices.len() {
                return Err(CliError::Config(format!(
                    "sweep component {component} out of range for {} indices",
                    indices.len()
                )));
            }
            for v in linspace(*start, *stop, *steps)? {
                let mut idx = indices.clone();
                idx[*component] = v;
                emit(v, g, &MediumVector::new(idx)?)?;
            }
        }
        MediaSection::DetectorSweep {
            indices,
            start,
            stop,
            steps,
        } => {
            let n = MediumVector::new(indices.clone())?;
            for x in linspace(*start, *stop, *steps)? {
                let mut moved = g.clone();
                moved.detector.x = x;
                emit(x, &moved, &n)?;
            }
        }
    }
    Ok(table)
}

/// Builds the training set described by `section` for geometry `g`.
pub fn build_dataset(g: &SlitGeometry, section: &DatasetSection, readout: &Readout) -> Result<Dataset, CliError> {
    let range = (section.range[0], section.range[1]);
    let kind = section.target.kind();
    let grid = make_dataset(kind.unwrap_or(DatasetKind::Constant { value: 0.0 }), section.dim, section.grid_size, range)?;
    let embedded = grid.embed(g.region_count(), section.offset, section.fill)?;
    if kind.is_some() {
        return Ok(embedded);
    }
    let samples = embedded
        .samples()
        .iter()
        .map(|s| {
            Ok(Sample {
                input: s.input.clone(),
                target: model_output(g, &s.input, readout)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(Dataset::new(samples)?)
}

/// Trains and writes `report.json`, the loss trace and `final_geometry.toml`.
pub fn run_train(cfg: &TrainFileConfig, opts: &RunOptions) -> Result<TrainReport, CliError> {
    cfg.geometry.validate()?;
    let mut tc = cfg.training.clone();
    if let Some(seed) = opts.seed {
        tc.seed = seed;
    }
    tc.reduction = opts.reduction();
    let raw = Readout {
        output_map: tc.output_map,
        calibration: None,
    };
    let data = build_dataset(&cfg.geometry, &cfg.dataset, &raw)?;
    let report = match train(&cfg.geometry, &data, &tc) {
        Ok(r) => r,
        Err(f) => {
            if let Some(partial) = &f.report {
                write_json(&opts.out.join("report.json"), partial)?;
            }
            return Err(f.error.into());
        }
    };
    write_json(&opts.out.join("report.json"), &report)?;
    let mut trace = Table::new(&["epoch", "mse"]);
    for (e, m) in report.mse_trace.iter().enumerate() {
        trace.push(vec![Cell::Int(e as i64), (*m).into()]);
    }
    trace.write(&opts.out, stem(&cfg.output, "mse_trace"), cfg.output.format)?;

    let reload = SimulateConfig {
        geometry: report.geometry.clone(),
        media: MediaSection::Single {
            indices: data.samples()[0].input.as_slice().to_vec(),
        },
        output: OutputSection::default(),
    };
    let text = toml::to_string(&reload).map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::write(opts.out.join("final_geometry.toml"), text)?;
    Ok(report)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

/// Per-trial absolute differences between simulator and network.
pub fn equivalence_table(cfg: &EquivalenceConfig, opts: &RunOptions) -> Result<(Table, ClassicalTwoLayerNet), CliError> {
    if cfg.trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    let [lo, hi] = cfg.index_range;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(CliError::Config(format!("index_range must satisfy 0 < lo < hi, got [{lo}, {hi}]")));
    }
    let g = &cfg.geometry;
    let mut net = ClassicalTwoLayerNet::from_geometry(g)?;
    if let Some(delta) = opts.perturb_weight {
        net.hidden_weights[0][0] += delta;
    }
    let reduction = opts.reduction();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.unwrap_or(cfg.seed));
    let mut table = Table::new(&["trial", "abs_diff_re", "abs_diff_im", "max_abs_diff"]);
    for t in 0..cfg.trials {
        let idx: Vec<f64> = (0..g.region_count()).map(|_| rng.gen_range(lo..hi)).collect();
        let n = MediumVector::new(idx)?;
        let sim = qnn_amplitude_with(g, &n, reduction)?;
        let out = net.forward(n.as_slice())?;
        let dre = (sim.re - out.re).abs();
        let dim = (sim.im - out.im).abs();
        let max = if dre.is_nan() || dim.is_nan() { f64::NAN } else { dre.max(dim) };
        table.push(vec![Cell::Int(t as i64), dre.into(), dim.into(), max.into()]);
    }
    Ok((table, net))
}

/// Writes the difference table and the network; fails unless every trial
/// agrees within [`EQUIVALENCE_TOLERANCE`].
pub fn run_equivalence(cfg: &EquivalenceConfig, opts: &RunOptions) -> Result<Table, CliError> {
    let (table, net) = equivalence_table(cfg, opts)?;
    table.write(&opts.out, stem(&cfg.output, "equivalence"), cfg.output.format)?;
    write_json(&opts.out.join("net.json"), &net)?;
    let bad = table
        .column("max_abs_diff")
        .unwrap()
        .iter()
        .filter(|d| !(**d < EQUIVALENCE_TOLERANCE))
        .count();
    if bad > 0 {
        return Err(CliError::Numerical(format!(
            "{bad} of {} trials differ by at least {EQUIVALENCE_TOLERANCE:e}",
            cfg.trials
        )));
    }
    Ok(table)
}

/// Cartesian product of the grids, first grid slowest.
fn grid<const N: usize>(axes: [(&str, &[f64]); N]) -> Result<Vec<[f64; N]>, CliError> {
    for (name, axis) in &axes {
        if axis.is_empty() {
            return Err(CliError::Config(format!("grid `{name}` is empty")));
        }
    }
    let mut out = vec![[0.0; N]];
    for (k, (_, axis)) in axes.iter().enumerate() {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p;
                    q[k] = v;
                    q
                })
            })
            .collect();
    }
    Ok(out)
}

const RESULT_COLUMNS: [&str; 5] = ["closed_form", "numeric", "input_factor", "weight_factor", "rel_error"];

fn header(params: &[&str], extra: &[&str]) -> Vec<String> {
    let mut h = vec!["model".to_string()];
    h.extend(params.iter().chain(&RESULT_COLUMNS).chain(extra).map(|s| s.to_string()));
    h
}

fn result_cells(r: &ActionResult) -> [Cell; 5] {
    [
        r.closed_form.into(),
        r.numeric.into(),
        r.input_factor.into(),
        r.weight_factor.into(),
        r.rel_error.into(),
    ]
}

fn row(model: &str, params: &[Cell], r: &ActionResult, extra: &[f64]) -> Vec<Cell> {
    let mut v = vec![Cell::from(model)];
    v.extend(params.iter().cloned());
    v.extend(result_cells(r));
    v.extend(extra.iter().map(|&x| Cell::Num(x)));
    v
}

/// One row per grid point; de Sitter emits a `hubble` and a `tanh` row.
pub fn actions(cfg: &ActionsConfig) -> Result<Table, CliError> {
    cfg.quadrature.validate()?;
    cfg.constants.validate()?;
    let c = &cfg.constants;
    let q = &cfg.quadrature;
    let nums = |p: &[f64]| p.iter().map(|&v| Cell::Num(v)).collect::<Vec<_>>();
    let table = match &cfg.model {
        ModelSection::Rock {
            mass,
            central_mass,
            r_surface,
            r,
        } => {
            let params = ["mass", "central_mass", "r_surface", "r"];
            let mut t = Table {
                header: header(&params, &[]),
                rows: Vec::new(),
            };
            for p in grid([("mass", mass), ("central_mass", central_mass), ("r_surface", r_surface), ("r", r)])? {
                let res = rock_action(p[0], p[1], p[2], p[3], c, q)?;
                t.push(row("rock", &nums(&p), &res, &[]));
            }
            t
        }
        ModelSection::Desitter { lambda, t_now } => {
            let mut t = Table {
                header: header(&["lambda", "t_now", "form"], &[]),
                rows: Vec::new(),
            };
            for p in grid([("lambda", lambda), ("t_now", t_now)])? {
                let res = desitter_action(p[0], p[1], q)?;
                for (form, r) in [("hubble", &res.hubble_form), ("tanh", &res.tanh_form)] {
                    let mut params = nums(&p);
                    params.push(form.into());
                    t.push(row("desitter", &params, r, &[]));
                }
            }
            t
        }
        ModelSection::Inflation { potential, t_end } => {
            let mut t = Table {
                header: header(&["potential", "t_end"], &["exact", "approx_gap", "hubble"]),
                rows: Vec::new(),
            };
            for p in grid([("potential", potential), ("t_end", t_end)])? {
                let res = inflation_action(p[0], p[1], c, q)?;
                t.push(row("inflation", &nums(&p), &res.result, &[res.exact, res.approx_gap, res.hubble]));
            }
            t
        }
        ModelSection::Schwarzschild {
            mass,
            central_mass,
            energy,
            r_start,
            t_span,
            direction,
            ode_steps,
        } => {
            let params = ["mass", "central_mass", "energy", "r_start", "t_span", "direction"];
            let mut t = Table {
                header: header(&params, &[]),
                rows: Vec::new(),
            };
            if direction.is_empty() {
                return Err(CliError::Config("grid `direction` is empty".into()));
            }
            let points = grid([
                ("mass", mass),
                ("central_mass", central_mass),
                ("energy", energy),
                ("r_start", r_start),
                ("t_span", t_span),
            ])?;
            for p in points {
                for &dir in direction {
                    let motion = RadialMotion {
                        mass: p[0],
                        central_mass: p[1],
                        energy: p[2],
                        r_start: p[3],
                        t_span: p[4],
                        direction: dir,
                    };
                    let res = schwarzschild_radial_action(&motion, c, *ode_steps)?;
                    let mut cells = nums(&p);
                    cells.push(Cell::Int(dir as i64));
                    t.push(row("schwarzschild", &cells, &res, &[]));
                }
            }
            t
        }
    };
    for r in &table.rows {
        if r.iter().any(|c| matches!(c, Cell::Num(v) if v.is_nan())) {
            return Err(CliError::Numerical("action oracle produced NaN".into()));
        }
    }
    Ok(table)
}
