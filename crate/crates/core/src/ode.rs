//! Classical fixed-step fourth-order Runge-Kutta.

use crate::error::{Error, Result};

/// Step sizes covering `[0, t_final]` with `dt`, the last one shortened so
/// the run lands exactly on `t_final`.
pub(crate) fn step_sizes(t_final: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {dt}"
        )));
    }
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "final time must be finite and non-negative, got {t_final}"
        )));
    }
    if t_final == 0.0 {
        return Ok(Vec::new());
    }
    // Absorb a final sliver that is only float noise.
    let n = ((t_final / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let mut steps = vec![dt; n - 1];
    steps.push(t_final - dt * (n - 1) as f64);
    Ok(steps)
}

/// Integrate `y' = f(t, y)` from `y0` to `t_final`.
///
/// `after_step(t, &mut y)` runs once per accepted step and may project the
/// state or abort the run.
pub(crate) fn rk4<F, C>(
    y0: Vec<f64>,
    t_final: f64,
    dt: f64,
    mut rhs: F,
    mut after_step: C,
) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
    C: FnMut(f64, &mut Vec<f64>) -> Result<()>,
{
    let n = y0.len();
    let mut y = y0;
    let mut t = 0.0;
    let mut stage = vec![0.0; n];
    for h in step_sizes(t_final, dt)? {
        let k1 = rhs(t, &y)?;
        for i in 0..n {
            stage[i] = y[i] + 0.5 * h * k1[i];
        }
        let k2 = rhs(t + 0.5 * h, &stage)?;
        for i in 0..n {
            stage[i] = y[i] + 0.5 * h * k2[i];
        }
        let k3 = rhs(t + 0.5 * h, &stage)?;
        for i in 0..n {
            stage[i] = y[i] + h * k3[i];
        }
        let k4 = rhs(t + h, &stage)?;
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;
        after_step(t, &mut y)?;
    }
    Ok(y)
}
