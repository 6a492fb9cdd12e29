//! Thin-torus analytic references: first-order Mathieu functions of
//! fractional order, the rotor energy ladder, and the order-1/γ² Hill–
//! Whittaker energy formula.
//!
//! In the thin-torus limit the reduced equation becomes
//! `Σ'' + (λ − (4/3γ) cos 2z) Σ = 0`, i.e. Mathieu's equation with
//! `q = 2/(3γ)`.

use std::f64::consts::FRAC_PI_2;

use super::potential::ParticleScales;
use super::SpectralError;
use crate::geometry::{KnotWinding, TorusGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Cosine,
    Sine,
}

impl Parity {
    /// Phase `σ` of the combined form `sin(z − σ)`: `π/2` picks the cosine
    /// branch, `0` the sine branch.
    pub fn sigma(&self) -> f64 {
        match self {
            Parity::Cosine => FRAC_PI_2,
            Parity::Sine => 0.0,
        }
    }

    pub fn from_sigma(sigma: f64) -> Result<Self, SpectralError> {
        if (sigma - FRAC_PI_2).abs() < 1e-12 {
            Ok(Parity::Cosine)
        } else if sigma.abs() < 1e-12 {
            Ok(Parity::Sine)
        } else {
            Err(SpectralError::InvalidParameter(format!(
                "sigma must be 0 or pi/2, got {sigma}"
            )))
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Parity::Cosine => "cos",
            Parity::Sine => "sin",
        }
    }
}

/// `Σ = cos νz − (1/6γ)[cos (ν+2)z/(ν+1) − cos (ν−2)z/(ν−1)]` (or with sines).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MathieuSeries {
    pub nu: f64,
    pub gamma: f64,
    pub parity: Parity,
}

impl MathieuSeries {
    pub fn new(nu: f64, gamma: f64, parity: Parity) -> Result<Self, SpectralError> {
        if (nu.abs() - 1.0).abs() < 1e-12 {
            return Err(SpectralError::Resonant { nu });
        }
        if !(gamma > 1.0) {
            return Err(SpectralError::InvalidParameter(format!(
                "aspect ratio must exceed 1, got {gamma}"
            )));
        }
        if parity == Parity::Sine && nu == 0.0 {
            return Err(SpectralError::InvalidParameter(
                "the sine mode vanishes identically at nu = 0".into(),
            ));
        }
        Ok(Self { nu, gamma, parity })
    }

    fn amplitude(&self) -> f64 {
        1.0 / (6.0 * self.gamma)
    }

    fn harmonic(&self, m: f64, z: f64) -> f64 {
        match self.parity {
            Parity::Cosine => (m * z).cos(),
            Parity::Sine => (m * z).sin(),
        }
    }

    pub fn value(&self, z: f64) -> f64 {
        let nu = self.nu;
        self.harmonic(nu, z)
            - self.amplitude()
                * (self.harmonic(nu + 2.0, z) / (nu + 1.0) - self.harmonic(nu - 2.0, z) / (nu - 1.0))
    }

    pub fn second_derivative(&self, z: f64) -> f64 {
        let nu = self.nu;
        let (up, down) = (nu + 2.0, nu - 2.0);
        -nu * nu * self.harmonic(nu, z)
            + self.amplitude()
                * (up * up * self.harmonic(up, z) / (nu + 1.0)
                    - down * down * self.harmonic(down, z) / (nu - 1.0))
    }

    /// `Σ'' + (λ − (4/3γ) cos 2z) Σ` at `z`.
    pub fn residual(&self, z: f64, lambda: f64) -> f64 {
        self.second_derivative(z) + (lambda - 4.0 / (3.0 * self.gamma) * (2.0 * z).cos()) * self.value(z)
    }

    /// Second-order characteristic value `λ = ν² + 2/(9γ²(ν² − 1))`.
    pub fn characteristic_value(&self) -> f64 {
        let nu2 = self.nu * self.nu;
        nu2 + 2.0 / (9.0 * self.gamma * self.gamma * (nu2 - 1.0))
    }

    pub fn sigma(&self) -> f64 {
        self.parity.sigma()
    }

    /// Coefficient of the third harmonic in the `σ`-form at `|ν| = 1`.
    pub fn b3(&self) -> f64 {
        -1.0 / (12.0 * self.gamma)
    }

    /// `sin(z − σ) + b₃ sin(3z − σ)`, the first-order solution at the
    /// resonant exponent `|ν| = 1`.
    pub fn sigma_form(&self, z: f64) -> f64 {
        let s = self.sigma();
        (z - s).sin() + self.b3() * (3.0 * z - s).sin()
    }
}

/// Rotor ladder `E_n = n²ħ²α²/(2ma²q²)`.
pub fn thin_torus_energy(n: i64, w: &KnotWinding, scales: &ParticleScales, geom: &TorusGeometry) -> f64 {
    let nu = 2.0 * n as f64 / w.q() as f64;
    thin_torus_energy_at(nu, w, scales, geom)
}

/// Rotor ladder for a general exponent: `ν²ħ²α²/(8ma²)`.
pub fn thin_torus_energy_at(nu: f64, w: &KnotWinding, scales: &ParticleScales, geom: &TorusGeometry) -> f64 {
    let a = geom.scale();
    let alpha = w.alpha();
    nu * nu * scales.hbar * scales.hbar * alpha * alpha / (8.0 * scales.mass * a * a)
}

/// Hill–Whittaker energy formula evaluated as published, with `ν = 2n/q`:
///
/// ```text
/// E = ħ²α²γ²/(8Ma²) · {−4ν² + 1 − (4/3γ) cos 2σ − (2/3γ) sin 2σ − 7/(9γ²)}
/// ```
///
/// This is a reference transcription; it does not approach the rotor ladder
/// as `γ → ∞`, and is reported next to the Hill value rather than trusted.
pub fn whittaker_energy(
    n: i64,
    sigma: f64,
    w: &KnotWinding,
    scales: &ParticleScales,
    geom: &TorusGeometry,
) -> f64 {
    let nu = 2.0 * n as f64 / w.q() as f64;
    whittaker_energy_at(nu, sigma, w, scales, geom)
}

pub fn whittaker_energy_at(
    nu: f64,
    sigma: f64,
    w: &KnotWinding,
    scales: &ParticleScales,
    geom: &TorusGeometry,
) -> f64 {
    let gamma = geom.gamma();
    let a = geom.scale();
    let alpha = w.alpha();
    let big_m = geom.effective_mass(scales.mass, w);
    let prefactor = scales.hbar * scales.hbar * alpha * alpha * gamma * gamma / (8.0 * big_m * a * a);
    let bracket = -4.0 * nu * nu
        + (1.0
            - 4.0 / (3.0 * gamma) * (2.0 * sigma).cos()
            - 2.0 / (3.0 * gamma) * (2.0 * sigma).sin()
            - 7.0 / (9.0 * gamma * gamma));
    prefactor * bracket
}
