//! Classical motion of a free particle on the knot.
//!
//! With `L = (M/2) f(φ) φ̇²` the Euler–Lagrange equation conserves
//! `𝒜 = √f φ̇`, which gives `φ̇ = (𝒜/a)(γ − cos αφ)`. Integrating that first
//! order equation from `φ(0) = 0`:
//!
//! ```text
//! φ(t) = (2/α) [ arctan( r tan Ωt ) + π round(Ωt/π) ]
//! r = √((γ−1)/(γ+1)),   Ω = 𝒜αβ / (2a)
//! ```
//!
//! The `round` term unwraps the arctangent across the poles of `tan`, so the
//! result is continuous and monotone in `t`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::geometry::{KnotWinding, TorusGeometry};
use crate::ode::{OdeError, Rk4, StepControl};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassicalError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integration failed after {} samples: {source}", partial.samples.len())]
    Integration {
        source: OdeError,
        partial: Box<Trajectory>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub t: f64,
    /// Total (unwrapped) angle.
    pub phi: f64,
    pub phi_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedData {
    /// `𝒜 = √f φ̇`.
    pub speed_constant: f64,
    pub energy: f64,
    /// Canonical momentum `p_φ = M f φ̇`.
    pub momentum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryMethod {
    ClosedForm,
    Rk4,
}

impl TrajectoryMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            TrajectoryMethod::ClosedForm => "closed-form",
            TrajectoryMethod::Rk4 => "rk4",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<ClassicalState>,
    pub method: TrajectoryMethod,
    pub control: Option<StepControl>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub control: StepControl,
    /// Number of output intervals; `samples + 1` states are recorded.
    pub samples: usize,
}

/// A particle of bare mass `m` moving on a torus knot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnotParticle {
    mass: f64,
    winding: KnotWinding,
    geometry: TorusGeometry,
}

impl KnotParticle {
    pub fn new(mass: f64, winding: KnotWinding, geometry: TorusGeometry) -> Result<Self, ClassicalError> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(ClassicalError::InvalidParameter(format!(
                "mass must be positive, got {mass}"
            )));
        }
        Ok(Self {
            mass,
            winding,
            geometry,
        })
    }

    pub fn winding(&self) -> &KnotWinding {
        &self.winding
    }

    pub fn geometry(&self) -> &TorusGeometry {
        &self.geometry
    }

    pub fn effective_mass(&self) -> f64 {
        self.geometry.effective_mass(self.mass, &self.winding)
    }

    pub fn conserved_quantities(&self, state: &ClassicalState) -> ConservedData {
        let f = self.geometry.profile(state.phi, &self.winding);
        let big_m = self.effective_mass();
        let speed_constant = f.sqrt() * state.phi_dot;
        let momentum = big_m * f * state.phi_dot;
        ConservedData {
            speed_constant,
            energy: 0.5 * big_m * speed_constant * speed_constant,
            momentum,
        }
    }

    /// Hamiltonian written as `p_φ² / (2 M f)`.
    pub fn hamiltonian(&self, phi: f64, momentum: f64) -> f64 {
        let f = self.geometry.profile(phi, &self.winding);
        momentum * momentum / (2.0 * self.effective_mass() * f)
    }

    /// Time for `φ` to sweep one period `2π/|α|` of the profile function.
    pub fn characteristic_period(&self, speed_constant: f64) -> f64 {
        let g = &self.geometry;
        2.0 * PI * g.scale() / (speed_constant.abs() * g.beta() * self.winding.alpha().abs())
    }

    /// Closed-form `φ(t)` with `φ(0) = 0`.
    pub fn closed_form_phi(&self, t: f64, speed_constant: f64) -> f64 {
        let g = &self.geometry;
        let alpha = self.winding.alpha();
        let r = ((g.gamma() - 1.0) / (g.gamma() + 1.0)).sqrt();
        let omega_t = speed_constant * alpha * g.beta() * t / (2.0 * g.scale());
        // atan2 stays continuous if roundoff pushes the reduced phase just past ±π/2.
        let turns = (omega_t / PI).round();
        let (sin, cos) = (omega_t - PI * turns).sin_cos();
        (2.0 / alpha) * ((r * sin).atan2(cos) + PI * turns)
    }

    /// `φ̇ = (𝒜/a)(γ − cos αφ)`.
    pub fn closed_form_phi_dot(&self, phi: f64, speed_constant: f64) -> f64 {
        let g = &self.geometry;
        speed_constant / g.scale() * (g.gamma() - (self.winding.alpha() * phi).cos())
    }

    pub fn closed_form_trajectory(&self, speed_constant: f64, t_max: f64, samples: usize) -> Result<Trajectory, ClassicalError> {
        check_horizon(t_max, samples)?;
        let samples = (0..=samples)
            .map(|i| {
                let t = t_max * i as f64 / samples as f64;
                let phi = self.closed_form_phi(t, speed_constant);
                ClassicalState {
                    t,
                    phi,
                    phi_dot: self.closed_form_phi_dot(phi, speed_constant),
                }
            })
            .collect();
        Ok(Trajectory {
            samples,
            method: TrajectoryMethod::ClosedForm,
            control: None,
        })
    }

    /// Fixed step of `T/4096`, falling back to `t_max/4096` at rest.
    pub fn default_control(&self, speed_constant: f64, t_max: f64) -> StepControl {
        let period = self.characteristic_period(speed_constant);
        let dt = if period.is_finite() { period } else { t_max } / 4096.0;
        StepControl::Fixed { dt }
    }

    /// Integrates `f φ̈ + ½ f' φ̇² = 0` as a first-order system.
    pub fn integrate(&self, initial: &ClassicalState, t_max: f64, cfg: &IntegratorConfig) -> Result<Trajectory, ClassicalError> {
        let alpha = self.winding.alpha();
        let gamma = self.geometry.gamma();
        let rhs = move |_t: f64, y: &[f64; 2]| {
            let (s, c) = (alpha * y[0]).sin_cos();
            [y[1], alpha * s * y[1] * y[1] / (gamma - c)]
        };
        run(&rhs, initial, t_max, cfg)
    }
}

fn check_horizon(t_max: f64, samples: usize) -> Result<(), ClassicalError> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(ClassicalError::InvalidParameter(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    if samples == 0 {
        return Err(ClassicalError::InvalidParameter(
            "at least one output sample is required".into(),
        ));
    }
    Ok(())
}

fn run<F>(rhs: &F, initial: &ClassicalState, t_max: f64, cfg: &IntegratorConfig) -> Result<Trajectory, ClassicalError>
where
    F: Fn(f64, &[f64; 2]) -> [f64; 2],
{
    check_horizon(t_max, cfg.samples)?;
    let mut rk = Rk4::new(cfg.control).map_err(|e| ClassicalError::InvalidParameter(e.to_string()))?;
    let mut traj = Trajectory {
        samples: vec![*initial],
        method: TrajectoryMethod::Rk4,
        control: Some(cfg.control),
    };
    let mut y = [initial.phi, initial.phi_dot];
    let mut t = initial.t;
    for i in 1..=cfg.samples {
        let t_next = initial.t + t_max * i as f64 / cfg.samples as f64;
        match rk.advance(rhs, t, y, t_next) {
            Ok(next) => y = next,
            Err(source) => {
                return Err(ClassicalError::Integration {
                    source,
                    partial: Box::new(traj),
                })
            }
        }
        t = t_next;
        traj.samples.push(ClassicalState {
            t,
            phi: y[0],
            phi_dot: y[1],
        });
    }
    Ok(traj)
}

/// Planar circles obtained by freezing one toroidal angle on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircleVariant {
    /// `θ = θ₀ = 0`: circle around the symmetry axis, `φ̈ = 0`.
    Axis,
    /// `φ = φ₀`: meridian circle around the tube, tracked by `θ`.
    Theta,
}

/// Integrate one of the circle configurations. For `Theta` the state's
/// `phi`/`phi_dot` fields carry `θ` and `θ̇`.
pub fn circle_reference(
    initial: &ClassicalState,
    variant: CircleVariant,
    t_max: f64,
    cfg: &IntegratorConfig,
    geometry: &TorusGeometry,
) -> Result<Trajectory, ClassicalError> {
    match variant {
        CircleVariant::Axis => run(&|_t, y: &[f64; 2]| [y[1], 0.0], initial, t_max, cfg),
        CircleVariant::Theta => {
            let gamma = geometry.gamma();
            // θ̈ (γ − cos θ) = sin θ θ̇²
            let rhs = move |_t: f64, y: &[f64; 2]| {
                let (s, c) = y[0].sin_cos();
                [y[1], s * y[1] * y[1] / (gamma - c)]
            };
            run(&rhs, initial, t_max, cfg)
        }
    }
}

/// Conserved rate of a circle configuration: `ω` for `Axis`,
/// `κ = θ̇ / (γ − cos θ)` for `Theta`.
pub fn circle_constant(state: &ClassicalState, variant: CircleVariant, geometry: &TorusGeometry) -> f64 {
    match variant {
        CircleVariant::Axis => state.phi_dot,
        CircleVariant::Theta => state.phi_dot / (geometry.gamma() - state.phi.cos()),
    }
}

/// Relative drift of `𝒜` and `H` of each sample against the first one.
/// Falls back to absolute drift when the reference value is zero.
pub fn conserved_drift(particle: &KnotParticle, traj: &Trajectory) -> Vec<(f64, f64)> {
    let Some(first) = traj.samples.first() else {
        return Vec::new();
    };
    let c0 = particle.conserved_quantities(first);
    let rel = |v: f64, v0: f64| if v0 == 0.0 { v - v0 } else { (v - v0) / v0.abs() };
    traj.samples
        .iter()
        .map(|s| {
            let c = particle.conserved_quantities(s);
            (
                rel(c.speed_constant, c0.speed_constant),
                rel(c.energy, c0.energy),
            )
        })
        .collect()
}
