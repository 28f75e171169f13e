//! Fixed-step classical Runge-Kutta for autonomous scalar equations.

/// Integrates `y' = rhs(y)` from `y0` over `steps` steps of size `h` and
/// returns all `steps + 1` states.
///
/// `rhs` may fail; the first error aborts the integration.
pub fn rk4_trajectory<F, E>(y0: f64, h: f64, steps: usize, rhs: F) -> Result<Vec<f64>, E>
where
    F: Fn(f64) -> Result<f64, E>,
{
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push(y);
    for _ in 0..steps {
        let k1 = rhs(y)?;
        let k2 = rhs(y + 0.5 * h * k1)?;
        let k3 = rhs(y + 0.5 * h * k2)?;
        let k4 = rhs(y + h * k3)?;
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(y);
    }
    Ok(out)
}
