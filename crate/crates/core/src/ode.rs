//! Classic fourth-order Runge–Kutta for small fixed-size systems, with an
//! optional step-doubling controller.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {step})")]
    StepUnderflow { t: f64, step: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("invalid step control: {0}")]
    InvalidControl(String),
}

/// How steps are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    /// Constant step; the last step of each interval is shortened to land
    /// exactly on the interval end.
    Fixed { dt: f64 },
    /// Step doubling with local Richardson extrapolation. `tol` bounds the
    /// absolute difference between one full step and two half steps, the
    /// classic step-doubling error measure; the accepted value is the
    /// extrapolated one. Absolute control suits unbounded angles, whose
    /// relative error means nothing.
    Adaptive { tol: f64, initial_dt: f64, min_dt: f64 },
}

impl StepControl {
    pub fn adaptive(tol: f64, initial_dt: f64) -> Self {
        StepControl::Adaptive {
            tol,
            initial_dt,
            min_dt: initial_dt * 1e-12,
        }
    }

    fn validate(&self) -> Result<(), OdeError> {
        let ok = match *self {
            StepControl::Fixed { dt } => dt > 0.0 && dt.is_finite(),
            StepControl::Adaptive {
                tol,
                initial_dt,
                min_dt,
            } => tol > 0.0 && initial_dt > 0.0 && min_dt > 0.0 && initial_dt.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(OdeError::InvalidControl(format!("{self:?}")))
        }
    }
}

pub fn rk4_step<const N: usize, F>(rhs: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = rhs(t + h, &axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, x: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * x[i];
    }
    out
}

/// Stateful integrator that carries the adaptive step size across calls, so
/// a trajectory sampled at many output times does not restart its controller.
#[derive(Debug, Clone)]
pub struct Rk4<const N: usize> {
    control: StepControl,
    next_dt: f64,
    pub steps: usize,
    pub rejected: usize,
}

impl<const N: usize> Rk4<N> {
    pub fn new(control: StepControl) -> Result<Self, OdeError> {
        control.validate()?;
        let next_dt = match control {
            StepControl::Fixed { dt } => dt,
            StepControl::Adaptive { initial_dt, .. } => initial_dt,
        };
        Ok(Self {
            control,
            next_dt,
            steps: 0,
            rejected: 0,
        })
    }

    /// Advance `y` from `t0` to `t1` (either direction).
    pub fn advance<F>(&mut self, rhs: &F, t0: f64, y: [f64; N], t1: f64) -> Result<[f64; N], OdeError>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(y);
        }
        match self.control {
            StepControl::Fixed { dt } => {
                let n = (span.abs() / dt).ceil().max(1.0) as usize;
                let h = span / n as f64;
                let mut y = y;
                for i in 0..n {
                    y = rk4_step(rhs, t0 + i as f64 * h, &y, h);
                    self.steps += 1;
                }
                check_finite(&y, t1)?;
                Ok(y)
            }
            StepControl::Adaptive { tol, min_dt, .. } => {
                let dir = span.signum();
                let mut t = t0;
                let mut y = y;
                let mut h = self.next_dt;
                loop {
                    let remaining = (t1 - t) * dir;
                    if remaining <= 0.0 {
                        break;
                    }
                    let last = h >= remaining;
                    let step = if last { remaining } else { h };
                    let full = rk4_step(rhs, t, &y, dir * step);
                    let mid = rk4_step(rhs, t, &y, 0.5 * dir * step);
                    let fine = rk4_step(rhs, t + 0.5 * dir * step, &mid, 0.5 * dir * step);
                    let mut err: f64 = 0.0;
                    for i in 0..N {
                        err = err.max((fine[i] - full[i]).abs() / tol);
                    }
                    if !err.is_finite() {
                        return Err(OdeError::NonFinite { t });
                    }
                    if err <= 1.0 {
                        for i in 0..N {
                            y[i] = fine[i] + (fine[i] - full[i]) / 15.0;
                        }
                        t = if last { t1 } else { t + dir * step };
                        self.steps += 1;
                    } else {
                        self.rejected += 1;
                    }
                    let factor = if err == 0.0 {
                        4.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 4.0)
                    };
                    let proposed = step * factor;
                    if proposed < min_dt {
                        return Err(OdeError::StepUnderflow { t, step: proposed });
                    }
                    if last && err <= 1.0 {
                        // A shortened final step should not shrink the carried step.
                        h = h.max(proposed);
                        break;
                    }
                    h = proposed;
                }
                self.next_dt = h;
                check_finite(&y, t1)?;
                Ok(y)
            }
        }
    }
}

fn check_finite<const N: usize>(y: &[f64; N], t: f64) -> Result<(), OdeError> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(OdeError::NonFinite { t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_t: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    #[test]
    fn fixed_step_is_fourth_order() {
        let err = |n: usize| {
            let mut rk = Rk4::new(StepControl::Fixed { dt: 1.0 / n as f64 }).unwrap();
            let y = rk.advance(&oscillator, 0.0, [1.0, 0.0], 1.0).unwrap();
            (y[0] - 1f64.cos()).abs()
        };
        let ratio = err(20) / err(40);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn linear_motion_is_exact() {
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], 0.0];
        let mut rk = Rk4::new(StepControl::Fixed { dt: 0.37 }).unwrap();
        let y = rk.advance(&rhs, 0.0, [0.2, 1.3], 10.0).unwrap();
        assert!((y[0] - (0.2 + 13.0)).abs() < 1e-12);
    }

    #[test]
    fn adaptive_meets_tolerance_and_runs_backwards() {
        let mut rk = Rk4::new(StepControl::adaptive(1e-12, 0.1)).unwrap();
        let y = rk.advance(&oscillator, 0.0, [1.0, 0.0], 20.0).unwrap();
        assert!((y[0] - 20f64.cos()).abs() < 1e-9);
        let back = rk.advance(&oscillator, 20.0, y, 0.0).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-9 && back[1].abs() < 1e-9);
    }

    #[test]
    fn underflow_is_reported() {
        // Blows up at t = 1.
        let rhs = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let mut rk = Rk4::new(StepControl::Adaptive {
            tol: 1e-10,
            initial_dt: 0.01,
            min_dt: 1e-9,
        })
        .unwrap();
        let err = rk.advance(&rhs, 0.0, [1.0], 2.0).unwrap_err();
        assert!(matches!(err, OdeError::StepUnderflow { .. } | OdeError::NonFinite { .. }));
    }

    #[test]
    fn rejects_invalid_control() {
        assert!(Rk4::<2>::new(StepControl::Fixed { dt: 0.0 }).is_err());
        assert!(Rk4::<2>::new(StepControl::adaptive(-1.0, 0.1)).is_err());
    }
}
