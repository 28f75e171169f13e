//! Closed-form actions of simple gravitational and cosmological systems, each
//! paired with an independent numerical evaluation and split into an
//! input-like (material) factor times a weight-like (geometric) factor.
//!
//! Where the closed forms disagree with each other or with the numerics,
//! both variants are kept:
//!
//! * The de Sitter action has two closed forms, `H(T)·a²(T)` and
//!   `tanh(√Λ T)·a²(T)`. They differ by a factor `√Λ`; quadrature agrees with
//!   the first. [`desitter_action`] reports both.
//! * The potential-to-index relation [`effective_index`] uses the constant
//!   `2m/(π²ħ²)` with no wavenumber;
//!   [`effective_index_standard`] carries the usual `ħ²k²` denominator.
//! * The Schwarzschild index is the scalar factor of the isotropic line
//!   element.

pub mod ode;
pub mod quadrature;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::amplitude::ActionSample;
use crate::error::{Error, Result};
pub use quadrature::{integrate_lagrangian, QuadratureConfig, QuadratureMethod};

const REL_FLOOR: f64 = 1e-300;

/// Physical constants; geometric units by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysConstants {
    pub g: f64,
    pub c: f64,
    pub hbar: f64,
}

impl Default for PhysConstants {
    fn default() -> Self {
        Self {
            g: 1.0,
            c: 1.0,
            hbar: 1.0,
        }
    }
}

impl PhysConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("G", self.g), ("c", self.c), ("hbar", self.hbar)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionResult {
    pub closed_form: f64,
    pub numeric: f64,
    pub input_factor: f64,
    pub weight_factor: f64,
    pub rel_error: f64,
}

impl ActionResult {
    pub fn new(closed_form: f64, numeric: f64, input_factor: f64, weight_factor: f64) -> Self {
        Self {
            closed_form,
            numeric,
            input_factor,
            weight_factor,
            rel_error: relative_error(closed_form, numeric),
        }
    }

    /// Relative mismatch between `input_factor · weight_factor` and the closed form.
    pub fn decomposition_error(&self) -> f64 {
        relative_error(self.closed_form, self.input_factor * self.weight_factor)
    }
}

/// `|reference − value| / max(|reference|, ε)`.
pub fn relative_error(reference: f64, value: f64) -> f64 {
    (reference - value).abs() / reference.abs().max(REL_FLOOR)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// Effective refraction index for a particle in potential `V`, using the
/// relation `n² = 1 − 2mV/(π²ħ²)`.
pub fn effective_index(potential: f64, mass: f64, consts: &PhysConstants) -> Result<f64> {
    consts.validate()?;
    positive("mass", mass)?;
    let n2 = 1.0 - 2.0 * mass * potential / (PI * PI * consts.hbar * consts.hbar);
    if n2 > 0.0 {
        Ok(n2.sqrt())
    } else {
        Err(Error::EvanescentRegion(n2))
    }
}

/// Optic-mechanical index `n² = 1 − 2mV/(ħ²k²)` with `k = 2π/λ`.
pub fn effective_index_standard(
    potential: f64,
    mass: f64,
    wavenumber: f64,
    consts: &PhysConstants,
) -> Result<f64> {
    consts.validate()?;
    positive("mass", mass)?;
    positive("wavenumber", wavenumber)?;
    let hk = consts.hbar * wavenumber;
    let n2 = 1.0 - 2.0 * mass * potential / (hk * hk);
    if n2 > 0.0 {
        Ok(n2.sqrt())
    } else {
        Err(Error::EvanescentRegion(n2))
    }
}

/// Potential at which [`effective_index`] reaches zero.
pub fn critical_potential(mass: f64, consts: &PhysConstants) -> f64 {
    PI * PI * consts.hbar * consts.hbar / (2.0 * mass)
}

/// Isotropic Schwarzschild index `(1 + u)³ / (1 − u)` with `u = MG/(2c²r)`.
pub fn schwarzschild_index(r: f64, mass: f64, consts: &PhysConstants) -> Result<f64> {
    consts.validate()?;
    positive("mass", mass)?;
    let critical = mass * consts.g / (2.0 * consts.c * consts.c);
    if !(r > critical) {
        return Err(Error::InsideCriticalRadius { r, critical });
    }
    let u = critical / r;
    Ok((1.0 + u).powi(3) / (1.0 - u))
}

/// Action of a body launched at escape speed from radius `r_surface` and
/// followed out to radius `r`.
///
/// Input factor `m√(8GM)`, weight factor `√R − √R_E`. The numeric value
/// integrates `L = mv²/2 + GMm/r` along the trajectory in `r`, with
/// `dt = dr/v(r)` and `v = √(2GM/r)`.
pub fn rock_action(
    mass: f64,
    central_mass: f64,
    r_surface: f64,
    r: f64,
    consts: &PhysConstants,
    quad: &QuadratureConfig,
) -> Result<ActionResult> {
    consts.validate()?;
    positive("mass", mass)?;
    positive("central mass", central_mass)?;
    if !(r_surface > 0.0 && r_surface.is_finite() && r.is_finite() && r >= r_surface) {
        return Err(Error::BadRadii(format!(
            "need R >= R_E > 0, got R_E = {r_surface}, R = {r}"
        )));
    }
    let gm = consts.g * central_mass;
    let lagrangian_dt = |radius: f64| {
        let v = (2.0 * gm / radius).sqrt();
        (0.5 * mass * v * v + gm * mass / radius) / v
    };
    let numeric = integrate_lagrangian(lagrangian_dt, r_surface, r, quad)?;
    let input = mass * (8.0 * gm).sqrt();
    let weight = r.sqrt() - r_surface.sqrt();
    Ok(ActionResult::new(input * weight, numeric, input, weight))
}

/// Closed, positively curved de Sitter scale factor `cosh(λt)/λ`, `λ = √Λ`.
pub fn desitter_scale_factor(t: f64, lambda_cosmo: f64) -> f64 {
    let l = lambda_cosmo.sqrt();
    (l * t).cosh() / l
}

/// Both closed forms of the de Sitter action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeSitterAction {
    /// `H(T)·a²(T)`, input factor `H = √Λ tanh(√Λ T)`.
    pub hubble_form: ActionResult,
    /// `tanh(√Λ T)·a²(T)`, input factor `tanh(√Λ T)`.
    pub tanh_form: ActionResult,
}

/// Action `∫_0^T (−1 + 2Λa²) dt` of the de Sitter scale factor.
pub fn desitter_action(lambda_cosmo: f64, t_now: f64, quad: &QuadratureConfig) -> Result<DeSitterAction> {
    positive("cosmological constant", lambda_cosmo)?;
    positive("T_now", t_now)?;
    let l = lambda_cosmo.sqrt();
    let lagrangian = |t: f64| {
        let a = desitter_scale_factor(t, lambda_cosmo);
        -1.0 + 2.0 * lambda_cosmo * a * a
    };
    let numeric = integrate_lagrangian(lagrangian, 0.0, t_now, quad)?;
    let a = desitter_scale_factor(t_now, lambda_cosmo);
    let a2 = a * a;
    let tanh = (l * t_now).tanh();
    let hubble = l * tanh;
    Ok(DeSitterAction {
        hubble_form: ActionResult::new(hubble * a2, numeric, hubble, a2),
        tanh_form: ActionResult::new(tanh * a2, numeric, tanh, a2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflationAction {
    /// Closed form is the leading-order `−(V/3H) e^{3HT}`.
    pub result: ActionResult,
    /// Exact antiderivative `−(V/3H)(e^{3HT} − 1)`.
    pub exact: f64,
    pub hubble: f64,
    /// `|closed − numeric| / |numeric|`.
    pub approx_gap: f64,
}

/// Slow-roll inflation action `∫_0^T −V a³ dt` with `a = e^{Ht}`,
/// `H = √(8πGV/3)`.
pub fn inflation_action(
    potential: f64,
    t_end: f64,
    consts: &PhysConstants,
    quad: &QuadratureConfig,
) -> Result<InflationAction> {
    consts.validate()?;
    positive("potential", potential)?;
    positive("T", t_end)?;
    let hubble = (8.0 * PI * consts.g * potential / 3.0).sqrt();
    let numeric = integrate_lagrangian(|t| -potential * (3.0 * hubble * t).exp(), 0.0, t_end, quad)?;
    let prefactor = potential / (3.0 * hubble);
    let volume = (3.0 * hubble * t_end).exp();
    let exact = -prefactor * (3.0 * hubble * t_end).exp_m1();
    let closed = -prefactor * volume;
    let input = -(3.0 * potential / (8.0 * PI * consts.g)).sqrt() / 3.0;
    Ok(InflationAction {
        result: ActionResult::new(closed, numeric, input, volume),
        exact,
        hubble,
        approx_gap: relative_error(numeric, closed),
    })
}

/// Radial motion of a massive particle outside a Schwarzschild horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialMotion {
    pub mass: f64,
    pub central_mass: f64,
    /// Conserved energy `E`.
    pub energy: f64,
    pub r_start: f64,
    pub t_span: f64,
    /// `+1` outward, `−1` inward.
    pub direction: i32,
}

impl RadialMotion {
    pub fn schwarzschild_radius(&self, consts: &PhysConstants) -> f64 {
        2.0 * self.central_mass * consts.g / (consts.c * consts.c)
    }
}

/// `∫ f(r(t)) dt` along the trajectory, `f = 1 − R_S/r`, using `steps` RK4
/// steps and Simpson's rule on the step nodes.
fn radial_weight(motion: &RadialMotion, consts: &PhysConstants, steps: usize) -> Result<f64> {
    let rs = motion.schwarzschild_radius(consts);
    let beta2 = (motion.mass * consts.c * consts.c / motion.energy).powi(2);
    let dir = motion.direction as f64;
    let c = consts.c;
    let rhs = |r: f64| -> Result<f64> {
        if !(r > rs) {
            return Err(Error::BelowHorizon { r, horizon: rs });
        }
        let f = 1.0 - rs / r;
        let radicand = 1.0 - f * beta2;
        if radicand < 0.0 {
            return Err(Error::TurningPointCrossed(r));
        }
        Ok(dir * c * f * radicand.sqrt())
    };
    let h = motion.t_span / steps as f64;
    let traj = ode::rk4_trajectory(motion.r_start, h, steps, rhs)?;
    if let Some(&r) = traj.iter().find(|&&r| !(r > rs)) {
        return Err(Error::BelowHorizon { r, horizon: rs });
    }
    let f: Vec<f64> = traj.iter().map(|r| 1.0 - rs / r).collect();
    Ok(quadrature::simpson_samples(&f, h))
}

/// Action of radial Schwarzschild motion with input factor `−mc²(mc²/E)²`
/// and weight factor `∫ (1 − R_S/r(t)) dt`.
///
/// `r(t)` comes from `ṙ = ±c·f·√(1 − f(mc²/E)²)`, the energy integral
/// solved for the radial velocity. The closed form uses `ode_steps` steps; the
/// numeric value repeats the whole computation with half the step size, so
/// `rel_error` measures step-refinement self-consistency.
pub fn schwarzschild_radial_action(
    motion: &RadialMotion,
    consts: &PhysConstants,
    ode_steps: usize,
) -> Result<ActionResult> {
    consts.validate()?;
    if motion.direction != 1 && motion.direction != -1 {
        return Err(Error::InvalidDirection(motion.direction));
    }
    positive("mass", motion.mass)?;
    positive("central mass", motion.central_mass)?;
    positive("energy", motion.energy)?;
    positive("t_span", motion.t_span)?;
    if ode_steps < 2 || ode_steps % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "ode_steps must be even and >= 2, got {ode_steps}"
        )));
    }
    let rs = motion.schwarzschild_radius(consts);
    if !(motion.r_start > rs) || !motion.r_start.is_finite() {
        return Err(Error::BelowHorizon {
            r: motion.r_start,
            horizon: rs,
        });
    }
    let mc2 = motion.mass * consts.c * consts.c;
    let input = -mc2 * (mc2 / motion.energy).powi(2);
    let weight = radial_weight(motion, consts, ode_steps)?;
    let refined = radial_weight(motion, consts, 2 * ode_steps)?;
    Ok(ActionResult::new(input * weight, input * refined, input, weight))
}

/// Phase `S/ħ` contributed by an action.
pub fn action_to_phase(result: &ActionResult, consts: &PhysConstants) -> ActionSample {
    ActionSample::new(result.numeric / consts.hbar)
}
