//! Transition amplitudes as sums of unit phasors over a finite path set.

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{MediumVector, Path, SlitGeometry};
use crate::summation::{reduce_pairs, CompensatedSum, Reduction};

/// A complex amplitude with explicit components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Amplitude {
    pub re: f64,
    pub im: f64,
}

impl Amplitude {
    pub const ONE: Amplitude = Amplitude { re: 1.0, im: 0.0 };
    pub const ZERO: Amplitude = Amplitude { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    /// `e^{iφ}`.
    pub fn from_phase(phase: f64) -> Self {
        let (s, c) = phase.sin_cos();
        Self { re: c, im: s }
    }

    pub fn norm(&self) -> f64 {
        self.re.hypot(self.im)
    }

    /// Born-rule detection probability `|A|²`.
    pub fn probability(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl Add for Amplitude {
    type Output = Amplitude;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Mul for Amplitude {
    type Output = Amplitude;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}

impl Mul<f64> for Amplitude {
    type Output = Amplitude;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.re * rhs, self.im * rhs)
    }
}

/// `|A|²`.
pub fn probability(a: Amplitude) -> f64 {
    a.probability()
}

/// Dimensionless phase `S/ħ` of one history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionSample {
    pub action_over_hbar: f64,
}

impl ActionSample {
    pub fn new(action_over_hbar: f64) -> Self {
        Self { action_over_hbar }
    }
}

/// Running compensated sum of phasors.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhasorSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl PhasorSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add_phase(&mut self, phase: f64) {
        let (s, c) = phase.sin_cos();
        self.re.add(c);
        self.im.add(s);
    }

    #[inline]
    pub fn add(&mut self, a: Amplitude) {
        self.re.add(a.re);
        self.im.add(a.im);
    }

    pub fn value(&self) -> Amplitude {
        Amplitude::new(self.re.value(), self.im.value())
    }
}

/// Optical phase `(2π/λ) Σ_j l_j n_j` of one path.
///
/// Each segment length is scaled by `2π/λ` before it meets its index, the
/// same operation order a two-layer network with pre-scaled weights uses.
pub fn path_phase(path: &Path, n: &MediumVector, wavelength: f64) -> Result<f64> {
    if path.segment_lengths.len() != n.len() {
        return Err(Error::DimensionMismatch {
            expected: path.segment_lengths.len(),
            got: n.len(),
        });
    }
    let k = 2.0 * std::f64::consts::PI / wavelength;
    Ok(weighted_phase(&path.segment_lengths, k, n.as_slice()))
}

#[inline]
pub(crate) fn weighted_phase(lengths: &[f64], k: f64, n: &[f64]) -> f64 {
    lengths
        .iter()
        .zip(n)
        .fold(0.0, |acc, (l, x)| acc + (k * l) * x)
}

/// Sum of `e^{iφ}` in the given order.
pub fn amplitude_from_phases(phases: &[f64]) -> Result<Amplitude> {
    if phases.is_empty() {
        return Err(Error::EmptyPathSet);
    }
    let mut acc = PhasorSum::new();
    for &p in phases {
        acc.add_phase(p);
    }
    Ok(acc.value())
}

/// Sum over histories with phases `S/ħ`.
pub fn amplitude_from_actions(samples: &[ActionSample]) -> Result<Amplitude> {
    if samples.is_empty() {
        return Err(Error::EmptyPathSet);
    }
    let mut acc = PhasorSum::new();
    for s in samples {
        acc.add_phase(s.action_over_hbar);
    }
    Ok(acc.value())
}

/// Raw (unnormalized) detection amplitude of a slit geometry.
pub fn qnn_amplitude(g: &SlitGeometry, n: &MediumVector) -> Result<Amplitude> {
    qnn_amplitude_with(g, n, Reduction::Sequential)
}

pub fn qnn_amplitude_with(
    g: &SlitGeometry,
    n: &MediumVector,
    reduction: Reduction,
) -> Result<Amplitude> {
    g.validate()?;
    if n.len() != g.region_count() {
        return Err(Error::DimensionMismatch {
            expected: g.region_count(),
            got: n.len(),
        });
    }
    let total = g.count_paths()?;
    let k = g.wavenumber();
    let regions = g.region_count();
    let barriers = g.barriers.len();
    let (re, im) = reduce_pairs(total, reduction, |i| {
        let mut choices = vec![0usize; barriers];
        let mut lengths = vec![0.0; regions];
        g.slit_choices_at(i, &mut choices);
        g.segment_lengths_into(&choices, &mut lengths);
        let (s, c) = weighted_phase(&lengths, k, n.as_slice()).sin_cos();
        (c, s)
    });
    Ok(Amplitude::new(re, im))
}
