//! TOML experiment schemas, one per subcommand. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::actions::{PhysConstants, QuadratureConfig};
use crate::geometry::SlitGeometry;
use crate::training::{DatasetKind, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub format: OutputFormat,
    /// File stem for the main result table; defaults to the subcommand name.
    pub name: Option<String>,
}

/// Refraction-index input for `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MediaSection {
    Single {
        indices: Vec<f64>,
    },
    /// Sweeps one index component over `steps` equally spaced values.
    IndexSweep {
        indices: Vec<f64>,
        component: usize,
        start: f64,
        stop: f64,
        steps: usize,
    },
    /// Sweeps the transverse detector coordinate.
    DetectorSweep {
        indices: Vec<f64>,
        start: f64,
        stop: f64,
        steps: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub geometry: SlitGeometry,
    pub media: MediaSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSection {
    Constant { value: f64 },
    Linear,
    Sine,
    GaussianBump,
    /// Targets are the start geometry's own outputs.
    SelfConsistent,
}

impl TargetSection {
    pub fn kind(&self) -> Option<DatasetKind> {
        match *self {
            TargetSection::Constant { value } => Some(DatasetKind::Constant { value }),
            TargetSection::Linear => Some(DatasetKind::Linear),
            TargetSection::Sine => Some(DatasetKind::Sine),
            TargetSection::GaussianBump => Some(DatasetKind::GaussianBump),
            TargetSection::SelfConsistent => None,
        }
    }
}

fn default_fill() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub target: TargetSection,
    /// Number of varying index components.
    pub dim: usize,
    pub grid_size: usize,
    pub range: [f64; 2],
    /// First region that receives a varying component.
    #[serde(default)]
    pub offset: usize,
    /// Index of every region that does not vary.
    #[serde(default = "default_fill")]
    pub fill: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFileConfig {
    pub geometry: SlitGeometry,
    pub dataset: DatasetSection,
    #[serde(default)]
    pub training: TrainConfig,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_index_range() -> [f64; 2] {
    [1.0, 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceConfig {
    pub geometry: SlitGeometry,
    pub trials: usize,
    /// Interval the random refraction indices are drawn from.
    #[serde(default = "default_index_range")]
    pub index_range: [f64; 2],
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_ode_steps() -> usize {
    4000
}

/// Parameter grids; every combination is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSection {
    Rock {
        mass: Vec<f64>,
        central_mass: Vec<f64>,
        r_surface: Vec<f64>,
        r: Vec<f64>,
    },
    Desitter {
        lambda: Vec<f64>,
        t_now: Vec<f64>,
    },
    Inflation {
        potential: Vec<f64>,
        t_end: Vec<f64>,
    },
    Schwarzschild {
        mass: Vec<f64>,
        central_mass: Vec<f64>,
        energy: Vec<f64>,
        r_start: Vec<f64>,
        t_span: Vec<f64>,
        direction: Vec<i32>,
        #[serde(default = "default_ode_steps")]
        ode_steps: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionsConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub constants: PhysConstants,
    #[serde(default)]
    pub output: OutputSection,
}
