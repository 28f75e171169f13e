//! Two-layer network `y = Σ_h W_h f(Σ_j w_{j→h} x_j − θ_h)` and the exact
//! image of a slit geometry in it.
//!
//! A geometry maps to one hidden neuron per path with weights
//! `w_{j→h} = (2π/λ)·l_{j,h}`, zero thresholds, unit output weights and the
//! complex exponential as activation. Feeding the refraction indices as input
//! then reproduces the path-sum amplitude term by term.

use serde::{Deserialize, Serialize};

use crate::amplitude::{weighted_phase, Amplitude, PhasorSum};
use crate::error::{Error, Result};
use crate::geometry::SlitGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// `f(a) = e^{ia}`
    ComplexExponential,
    /// Heaviside step with `H(0) = 1`.
    Threshold,
    Identity,
}

impl Activation {
    fn apply(self, a: f64) -> Amplitude {
        match self {
            Activation::ComplexExponential => Amplitude::from_phase(a),
            Activation::Threshold => Amplitude::new(heaviside(a), 0.0),
            Activation::Identity => Amplitude::new(a, 0.0),
        }
    }
}

#[inline]
fn heaviside(a: f64) -> f64 {
    if a >= 0.0 {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalTwoLayerNet {
    /// One row of input weights per hidden neuron.
    pub hidden_weights: Vec<Vec<f64>>,
    /// Subtracted from each hidden activation; zero for geometry images.
    pub hidden_thresholds: Vec<f64>,
    pub output_weights: Vec<Amplitude>,
    /// Used only by [`ClassicalTwoLayerNet::boolean_forward`].
    #[serde(default)]
    pub output_threshold: f64,
    pub activation: Activation,
}

impl ClassicalTwoLayerNet {
    pub fn new(
        hidden_weights: Vec<Vec<f64>>,
        hidden_thresholds: Vec<f64>,
        output_weights: Vec<Amplitude>,
        output_threshold: f64,
        activation: Activation,
    ) -> Result<Self> {
        let net = Self {
            hidden_weights,
            hidden_thresholds,
            output_weights,
            output_threshold,
            activation,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hidden_weights.len();
        if self.output_weights.len() != h {
            return Err(Error::NetworkShape(format!(
                "{h} hidden rows but {} output weights",
                self.output_weights.len()
            )));
        }
        if self.hidden_thresholds.len() != h {
            return Err(Error::NetworkShape(format!(
                "{h} hidden rows but {} thresholds",
                self.hidden_thresholds.len()
            )));
        }
        let inputs = self.input_count();
        if let Some(bad) = self.hidden_weights.iter().position(|r| r.len() != inputs) {
            return Err(Error::NetworkShape(format!(
                "row {bad} has {} weights, expected {inputs}",
                self.hidden_weights[bad].len()
            )));
        }
        Ok(())
    }

    pub fn hidden_count(&self) -> usize {
        self.hidden_weights.len()
    }

    pub fn input_count(&self) -> usize {
        self.hidden_weights.first().map_or(0, Vec::len)
    }

    /// The network image of a slit geometry: one hidden neuron per path.
    pub fn from_geometry(g: &SlitGeometry) -> Result<Self> {
        let k = g.wavenumber();
        let hidden_weights: Vec<Vec<f64>> = g
            .paths()?
            .map(|p| p.segment_lengths.iter().map(|l| k * l).collect())
            .collect();
        let h = hidden_weights.len();
        Ok(Self {
            hidden_weights,
            hidden_thresholds: vec![0.0; h],
            output_weights: vec![Amplitude::ONE; h],
            output_threshold: 0.0,
            activation: Activation::ComplexExponential,
        })
    }

    /// Complex network output for input `x`.
    pub fn forward(&self, x: &[f64]) -> Result<Amplitude> {
        if x.len() != self.input_count() {
            return Err(Error::DimensionMismatch {
                expected: self.input_count(),
                got: x.len(),
            });
        }
        let mut acc = PhasorSum::new();
        for ((row, theta), w) in self
            .hidden_weights
            .iter()
            .zip(&self.hidden_thresholds)
            .zip(&self.output_weights)
        {
            let activation = weighted_phase(row, 1.0, x) - theta;
            acc.add(*w * self.activation.apply(activation));
        }
        Ok(acc.value())
    }

    /// Thresholded output of a threshold network on a binary input.
    pub fn boolean_forward(&self, x: &[u8]) -> Result<bool> {
        if self.activation != Activation::Threshold {
            return Err(Error::WrongActivation);
        }
        if let Some(&bad) = x.iter().find(|&&b| b > 1) {
            return Err(Error::NonBinaryInput(bad as f64));
        }
        let xf: Vec<f64> = x.iter().map(|&b| b as f64).collect();
        let y = self.forward(&xf)?;
        Ok(heaviside(y.re - self.output_threshold) == 1.0)
    }

    /// Disjunctive-normal-form threshold network for a `d`-input Boolean
    /// function: one hidden neuron per minterm (all `2^d` of them), each firing
    /// only on its own input pattern, and an output neuron that fires when a
    /// true minterm fires.
    ///
    /// `truth_table[m]` is the value on the input whose bit `i` (MSB first)
    /// is `x_i`.
    pub fn boolean_minterms(d: usize, truth_table: &[bool]) -> Result<Self> {
        let rows = 1usize << d;
        if truth_table.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: truth_table.len(),
            });
        }
        let mut hidden_weights = Vec::with_capacity(rows);
        let mut hidden_thresholds = Vec::with_capacity(rows);
        let mut output_weights = Vec::with_capacity(rows);
        for (m, &value) in truth_table.iter().enumerate() {
            let bits = minterm_bits(m, d);
            hidden_weights.push(bits.iter().map(|&b| if b == 1 { 1.0 } else { -1.0 }).collect());
            hidden_thresholds.push(bits.iter().map(|&b| b as f64).sum());
            output_weights.push(if value { Amplitude::ONE } else { Amplitude::ZERO });
        }
        Self::new(
            hidden_weights,
            hidden_thresholds,
            output_weights,
            1.0,
            Activation::Threshold,
        )
    }
}

/// Bits of `m` as a `d`-long input vector, most significant first.
pub fn minterm_bits(m: usize, d: usize) -> Vec<u8> {
    (0..d).rev().map(|i| ((m >> i) & 1) as u8).collect()
}

pub fn from_geometry(g: &SlitGeometry) -> Result<ClassicalTwoLayerNet> {
    ClassicalTwoLayerNet::from_geometry(g)
}

pub fn forward(net: &ClassicalTwoLayerNet, x: &[f64]) -> Result<Amplitude> {
    net.forward(x)
}

pub fn boolean_forward(net: &ClassicalTwoLayerNet, x: &[u8]) -> Result<bool> {
    net.boolean_forward(x)
}
