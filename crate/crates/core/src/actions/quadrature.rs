//! Composite Simpson quadrature with optional single-level Richardson
//! extrapolation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summation::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMethod {
    #[default]
    CompositeSimpson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub method: QuadratureMethod,
    /// Number of subintervals; even and at least 2.
    pub steps: usize,
    pub richardson: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            method: QuadratureMethod::CompositeSimpson,
            steps: 100_000,
            richardson: false,
        }
    }
}

impl QuadratureConfig {
    pub fn with_steps(steps: usize) -> Self {
        Self {
            steps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 || self.steps % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "quadrature steps must be even and >= 2, got {}",
                self.steps
            )));
        }
        if self.richardson && self.steps % 4 != 0 {
            return Err(Error::InvalidParameter(format!(
                "richardson extrapolation needs steps divisible by 4, got {}",
                self.steps
            )));
        }
        Ok(())
    }
}

/// Simpson weights applied to `n + 1` equally spaced samples `y[0..=n]`.
pub fn simpson_samples(y: &[f64], h: f64) -> f64 {
    let n = y.len() - 1;
    debug_assert!(n >= 2 && n % 2 == 0);
    let mut acc = CompensatedSum::new();
    acc.add(y[0]);
    acc.add(y[n]);
    for (i, &v) in y.iter().enumerate().take(n).skip(1) {
        acc.add(if i % 2 == 1 { 4.0 * v } else { 2.0 * v });
    }
    acc.value() * h / 3.0
}

fn simpson<F: Fn(f64) -> f64>(f: &F, t0: f64, t1: f64, steps: usize) -> Result<f64> {
    let h = (t1 - t0) / steps as f64;
    let mut acc = CompensatedSum::new();
    for i in 0..=steps {
        let t = if i == steps { t1 } else { t0 + i as f64 * h };
        let v = f(t);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand(t));
        }
        let w = if i == 0 || i == steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc.add(w * v);
    }
    Ok(acc.value() * h / 3.0)
}

/// `∫_{t0}^{t1} L(t) dt`.
pub fn integrate_lagrangian<F>(lagrangian: F, t0: f64, t1: f64, quad: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    quad.validate()?;
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(Error::InvalidParameter(format!(
            "integration bounds must satisfy t0 <= t1, got [{t0}, {t1}]"
        )));
    }
    if t1 == t0 {
        return Ok(0.0);
    }
    let fine = simpson(&lagrangian, t0, t1, quad.steps)?;
    if !quad.richardson {
        return Ok(fine);
    }
    let coarse = simpson(&lagrangian, t0, t1, quad.steps / 2)?;
    Ok(fine + (fine - coarse) / 15.0)
}
