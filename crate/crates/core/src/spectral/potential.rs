//! The reduced Sturm–Liouville problem.
//!
//! Writing `ψ = χΣ` with `χ ∝ √f` removes the first-derivative term of the
//! Weyl-ordered Schrödinger equation and leaves `Σ'' + V(φ) Σ = 0` with
//!
//! ```text
//! V = [2MEa²/ħ² + α²/2 − (α²γ/3) cos αφ − (α²/6) cos 2αφ] / (γ − cos αφ)²
//! ```
//!
//! In `z = αφ/2` this is `Σ_zz + (h(z) + E g(z)) Σ = 0`, linear in `E`:
//!
//! ```text
//! h(z) = [2 − (4γ/3) cos 2z − (2/3) cos 4z] · w(2z)
//! g(z) = 8Ma²/(ħ²α²) · w(2z),        w(x) = 1/(γ − cos x)²
//! ```
//!
//! Both are stored as cosine series `c₀ + 2 Σ c_r cos 2rz`.

use std::f64::consts::PI;

use super::fourier::{cosine_series, decay_ratio, weight_fourier};
use super::SpectralError;
use crate::geometry::{KnotWinding, TorusGeometry};

/// Relative size below which dropped coefficients are considered negligible.
pub const TAIL_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleScales {
    pub mass: f64,
    pub hbar: f64,
}

impl Default for ParticleScales {
    fn default() -> Self {
        Self {
            mass: 1.0,
            hbar: 1.0,
        }
    }
}

impl ParticleScales {
    pub fn new(mass: f64, hbar: f64) -> Result<Self, SpectralError> {
        if !(mass > 0.0 && mass.is_finite() && hbar > 0.0 && hbar.is_finite()) {
            return Err(SpectralError::InvalidParameter(format!(
                "mass and hbar must be positive (m = {mass}, hbar = {hbar})"
            )));
        }
        Ok(Self { mass, hbar })
    }
}

/// Physical parameters a knot potential was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnotData {
    pub gamma: f64,
    pub alpha: f64,
    pub effective_mass: f64,
    pub scale: f64,
    pub hbar: f64,
    /// `|q|`, the number of π-periods of `z` in one knot circuit.
    pub periods: u64,
}

impl KnotData {
    /// `8Ma²/(ħ²α²)`, the prefactor of `g`.
    pub fn weight_prefactor(&self) -> f64 {
        8.0 * self.effective_mass * self.scale * self.scale
            / (self.hbar * self.hbar * self.alpha * self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPotential {
    h: Vec<f64>,
    g: Vec<f64>,
    knot: Option<KnotData>,
}

impl ReducedPotential {
    /// Potential of the knot with `order` retained harmonics. Fails when the
    /// first dropped harmonic is not negligible.
    pub fn for_knot(
        geometry: &TorusGeometry,
        winding: &KnotWinding,
        scales: &ParticleScales,
        order: usize,
    ) -> Result<Self, SpectralError> {
        let gamma = geometry.gamma();
        let w = weight_fourier(gamma, order + 2)?;
        let at = |k: isize| w[k.unsigned_abs()];
        let h: Vec<f64> = (0..=order as isize)
            .map(|k| {
                2.0 * at(k)
                    - (2.0 * gamma / 3.0) * (at(k - 1) + at(k + 1))
                    - (at(k - 2) + at(k + 2)) / 3.0
            })
            .collect();
        let knot = KnotData {
            gamma,
            alpha: winding.alpha(),
            effective_mass: geometry.effective_mass(scales.mass, winding),
            scale: geometry.scale(),
            hbar: scales.hbar,
            periods: winding.q().unsigned_abs(),
        };
        let prefactor = knot.weight_prefactor();
        let g: Vec<f64> = w[..=order].iter().map(|wk| prefactor * wk).collect();

        let h_max = h.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let tail = (h[order].abs() / h_max).max(g[order].abs() / g[0]);
        if tail > TAIL_TOLERANCE {
            return Err(SpectralError::TruncationTooShort { order, tail });
        }
        Ok(Self {
            h,
            g,
            knot: Some(knot),
        })
    }

    /// Like [`for_knot`](Self::for_knot) with the harmonic count raised as
    /// far as the aspect ratio requires.
    pub fn for_knot_auto(
        geometry: &TorusGeometry,
        winding: &KnotWinding,
        scales: &ParticleScales,
        min_order: usize,
    ) -> Result<Self, SpectralError> {
        let order = min_order.max(required_order(geometry.gamma()));
        Self::for_knot(geometry, winding, scales, order)
    }

    /// Generic Hill problem `Σ'' + (h + E g) Σ = 0` from cosine coefficients.
    pub fn from_coefficients(h: Vec<f64>, g: Vec<f64>) -> Result<Self, SpectralError> {
        if g.is_empty() || h.is_empty() {
            return Err(SpectralError::InvalidParameter(
                "coefficient lists must be non-empty".into(),
            ));
        }
        let pot = Self { h, g, knot: None };
        pot.check_positive_weight()?;
        Ok(pot)
    }

    fn check_positive_weight(&self) -> Result<(), SpectralError> {
        let n = 4096;
        for i in 0..n {
            let z = PI * i as f64 / n as f64;
            let value = self.g_series(z);
            if !(value > 0.0) {
                return Err(SpectralError::NonPositiveWeight { z, value });
            }
        }
        Ok(())
    }

    pub fn h_coeffs(&self) -> &[f64] {
        &self.h
    }

    pub fn g_coeffs(&self) -> &[f64] {
        &self.g
    }

    pub fn order(&self) -> usize {
        self.h.len().max(self.g.len()) - 1
    }

    pub fn knot(&self) -> Option<&KnotData> {
        self.knot.as_ref()
    }

    pub fn h_series(&self, z: f64) -> f64 {
        cosine_series(&self.h, 2.0 * z)
    }

    pub fn g_series(&self, z: f64) -> f64 {
        cosine_series(&self.g, 2.0 * z)
    }

    /// `(h(z), g(z))`, in closed form for knot potentials.
    pub fn evaluate(&self, z: f64) -> (f64, f64) {
        match &self.knot {
            Some(k) => {
                let (s2, c2) = (2.0 * z).sin_cos();
                let c4 = 1.0 - 2.0 * s2 * s2;
                let w = 1.0 / ((k.gamma - c2) * (k.gamma - c2));
                (
                    (2.0 - 4.0 * k.gamma / 3.0 * c2 - 2.0 / 3.0 * c4) * w,
                    k.weight_prefactor() * w,
                )
            }
            None => (self.h_series(z), self.g_series(z)),
        }
    }

    /// `V(φ) = (α²/4)(h + E g)` rebuilt from the stored series.
    pub fn reconstructed_v(&self, phi: f64, energy: f64) -> Option<f64> {
        let k = self.knot.as_ref()?;
        let z = k.alpha * phi / 2.0;
        Some(k.alpha * k.alpha / 4.0 * (self.h_series(z) + energy * self.g_series(z)))
    }

    /// `∫ |Σ|² g dz` over one π-period for `Σ = e^{iνz} Σ_k c_k e^{2ikz}`,
    /// i.e. `π cᴴ B c` with `B` the Toeplitz matrix of `g`.
    pub fn weighted_norm_sq(&self, coeffs: &[num_complex::Complex64]) -> f64 {
        let n = coeffs.len();
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let r = i.abs_diff(j);
                if let Some(&gr) = self.g.get(r) {
                    acc += coeffs[i].conj() * gr * coeffs[j];
                }
            }
        }
        PI * acc.re
    }
}

/// Smallest harmonic count whose first dropped coefficient of `w` is below
/// [`TAIL_TOLERANCE`] relative to `w₀`, with a floor of 16.
pub fn required_order(gamma: f64) -> usize {
    let beta = ((gamma - 1.0) * (gamma + 1.0)).sqrt();
    let rho = decay_ratio(gamma);
    let mut k = 16usize;
    // h carries an extra factor of about γ² against w at large index.
    let margin = 0.1 / (1.0 + gamma * gamma);
    while rho.powi(k as i32) * (k as f64 * beta + gamma) / gamma > TAIL_TOLERANCE * margin {
        k += 8;
        if k > 1 << 16 {
            break;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_v(geom: &TorusGeometry, w: &KnotWinding, scales: &ParticleScales, phi: f64, energy: f64) -> f64 {
        let alpha = w.alpha();
        let gamma = geom.gamma();
        let big_m = geom.effective_mass(scales.mass, w);
        let a = geom.scale();
        let c = (alpha * phi).cos();
        (2.0 * big_m * energy * a * a / (scales.hbar * scales.hbar) + alpha * alpha / 2.0
            - alpha * alpha * gamma * c / 3.0
            - alpha * alpha * (2.0 * alpha * phi).cos() / 6.0)
            / (gamma - c).powi(2)
    }

    /// V from f, f', f'' by central differences: (2f''f − f'²)/(12f²) + 2MEf/ħ².
    fn fd_v(geom: &TorusGeometry, w: &KnotWinding, scales: &ParticleScales, phi: f64, energy: f64) -> f64 {
        let h = 1e-4;
        let f = |x: f64| geom.profile(x, w);
        let f0 = f(phi);
        let f1 = (f(phi + h) - f(phi - h)) / (2.0 * h);
        let f2 = (f(phi + h) - 2.0 * f0 + f(phi - h)) / (h * h);
        let big_m = geom.effective_mass(scales.mass, w);
        (2.0 * f2 * f0 - f1 * f1) / (12.0 * f0 * f0) + 2.0 * big_m * energy * f0 / scales.hbar.powi(2)
    }

    #[test]
    fn reduced_form_matches_profile_derivatives() {
        let geom = TorusGeometry::new(2.0, 1.0).unwrap();
        let w = KnotWinding::new(2, 3).unwrap();
        let s = ParticleScales::default();
        for &(phi, e) in &[(0.3, 0.1), (1.9, 2.0), (-2.7, 0.0)] {
            let a = direct_v(&geom, &w, &s, phi, e);
            let b = fd_v(&geom, &w, &s, phi, e);
            assert!((a - b).abs() < 1e-6 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn reconstruction_and_parity() {
        let geom = TorusGeometry::new(2.0, 1.0).unwrap();
        let w = KnotWinding::new(2, 3).unwrap();
        let s = ParticleScales::new(1.3, 0.8).unwrap();
        let pot = ReducedPotential::for_knot(&geom, &w, &s, 64).unwrap();
        for i in 0..997 {
            let phi = -7.0 + 14.0 * i as f64 / 997.0;
            for &e in &[0.0, 0.37, 5.0] {
                let v = pot.reconstructed_v(phi, e).unwrap();
                let d = direct_v(&geom, &w, &s, phi, e);
                assert!((v - d).abs() < 1e-10 * d.abs().max(1.0), "{v} vs {d}");
                let mirrored = pot.reconstructed_v(-phi, e).unwrap();
                assert!((v - mirrored).abs() < 1e-12 * v.abs().max(1.0));
            }
        }
        for i in 0..100 {
            let z = 0.031 * i as f64;
            let (h, g) = pot.evaluate(z);
            assert!((h - pot.h_series(z)).abs() < 1e-12);
            assert!((g - pot.g_series(z)).abs() < 1e-12 * g);
        }
    }

    #[test]
    fn thin_torus_mathieu_coefficient() {
        let gamma = 1e4;
        let geom = TorusGeometry::from_scale_and_aspect(1.0, gamma).unwrap();
        let w = KnotWinding::new(2, 3).unwrap();
        let pot = ReducedPotential::for_knot_auto(&geom, &w, &ParticleScales::default(), 16).unwrap();
        let cos2z = 2.0 * pot.h_coeffs()[1];
        let expected = -4.0 / (3.0 * gamma);
        assert!(((cos2z - expected) / expected).abs() < 1e-3);
    }

    #[test]
    fn second_order_coefficients() {
        let gamma = 50.0;
        let geom = TorusGeometry::from_scale_and_aspect(1.0, gamma).unwrap();
        let w = KnotWinding::new(2, 3).unwrap();
        let pot = ReducedPotential::for_knot_auto(&geom, &w, &ParticleScales::default(), 16).unwrap();
        let h = pot.h_coeffs();
        let g3 = gamma.powi(-3);
        assert!((h[0] - 2.0 / (3.0 * gamma * gamma)).abs() < 5.0 * g3);
        assert!((h[1] + 2.0 / (3.0 * gamma)).abs() < 5.0 * g3);
        assert!((h[2] + 1.0 / (gamma * gamma)).abs() < 5.0 * g3);
    }

    #[test]
    fn weight_is_positive_and_decays() {
        let geom = TorusGeometry::new(1.5, 1.0).unwrap();
        let w = KnotWinding::new(3, 4).unwrap();
        let pot = ReducedPotential::for_knot_auto(&geom, &w, &ParticleScales::default(), 64).unwrap();
        pot.check_positive_weight().unwrap();
        let rho = decay_ratio(1.5);
        let (g, h) = (pot.g_coeffs(), pot.h_coeffs());
        let r = 40;
        assert!(((g[r + 1] / g[r]) / rho - 1.0).abs() < 0.1);
        assert!(((h[r + 1] / h[r]) / rho - 1.0).abs() < 0.1);
    }

    #[test]
    fn short_truncation_is_rejected() {
        let geom = TorusGeometry::new(1.1, 1.0).unwrap();
        let w = KnotWinding::new(2, 3).unwrap();
        let err = ReducedPotential::for_knot(&geom, &w, &ParticleScales::default(), 16).unwrap_err();
        assert!(matches!(err, SpectralError::TruncationTooShort { .. }));
        assert!(ReducedPotential::for_knot_auto(&geom, &w, &ParticleScales::default(), 16).is_ok());
    }

    #[test]
    fn custom_weight_must_be_positive() {
        assert!(ReducedPotential::from_coefficients(vec![0.0, -0.1], vec![1.0]).is_ok());
        assert!(matches!(
            ReducedPotential::from_coefficients(vec![0.0], vec![1.0, 0.6]),
            Err(SpectralError::NonPositiveWeight { .. })
        ));
    }

    #[test]
    fn required_order_grows_near_unit_aspect() {
        assert!(required_order(1.05) > required_order(2.0));
        for &gamma in &[1.05, 1.1, 1.5, 2.0, 10.0, 1e4, 1e6] {
            let geom = TorusGeometry::from_scale_and_aspect(1.0, gamma).unwrap();
            let w = KnotWinding::new(2, 3).unwrap();
            ReducedPotential::for_knot(&geom, &w, &ParticleScales::default(), required_order(gamma))
                .unwrap();
        }
    }
}
