//! Flux threading through the torus hole (toroidal coil) and through the
//! tube (solenoid), entering only as a twisted boundary condition
//! `ψ(φ + 2πp) = e^{iΦ} ψ(φ)` with `Φ = pΦ_S + qΦ_T`.
//!
//! Under `φ → φ + 2πp` the reduced variable moves by `z → z − qπ`, so a
//! Floquet mode `e^{iνz}·(π-periodic)` picks up `e^{−iπνq}`. Matching the
//! boundary phase gives `ν = (2n − Φ/π)/q`.

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::KnotWinding;
use crate::spectral::hill::{band_index, KnotSpectrum, Level, Method, SpectrumResult};
use crate::spectral::mathieu::thin_torus_energy_at;
use crate::spectral::modes::{ModeFunction, WaveSample, MIN_GRID};
use crate::spectral::SpectralError;

pub const BOUNDARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FluxError {
    #[error("mode violates its flux boundary condition (mismatch {mismatch:e})")]
    BoundaryCondition { mismatch: f64 },
    #[error("mode was solved for flux {mode} but {requested} was requested")]
    FluxMismatch { mode: f64, requested: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxConfig {
    phi_s: f64,
    phi_t: f64,
    total: f64,
}

impl FluxConfig {
    pub fn new(phi_s: f64, phi_t: f64, w: &KnotWinding) -> Self {
        Self {
            phi_s,
            phi_t,
            total: w.p() as f64 * phi_s + w.q() as f64 * phi_t,
        }
    }

    /// Flux specified directly by its total phase.
    pub fn from_total(total: f64) -> Self {
        Self {
            phi_s: 0.0,
            phi_t: 0.0,
            total,
        }
    }

    pub fn solenoidal(&self) -> f64 {
        self.phi_s
    }

    pub fn toroidal(&self) -> f64 {
        self.phi_t
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

pub fn total_flux(phi_s: f64, phi_t: f64, w: &KnotWinding) -> FluxConfig {
    FluxConfig::new(phi_s, phi_t, w)
}

pub fn shifted_floquet(n: i64, flux: &FluxConfig, w: &KnotWinding) -> f64 {
    shifted_exponent(n, flux.total, w)
}

pub fn shifted_exponent(n: i64, total: f64, w: &KnotWinding) -> f64 {
    (2.0 * n as f64 - total / std::f64::consts::PI) / w.q() as f64
}

/// `ψ̃ = exp(−iΦφ/(2πp)) ψ`, periodic over one knot circuit.
#[derive(Debug, Clone)]
pub struct SingleValuedMode {
    pub mode: ModeFunction,
    pub flux: f64,
}

impl SingleValuedMode {
    pub fn psi(&self, phi: f64) -> Complex64 {
        let p = self.mode.winding.p() as f64;
        let gauge = Complex64::from_polar(1.0, -self.flux * phi / (2.0 * std::f64::consts::PI * p));
        gauge * self.mode.psi(phi)
    }

    pub fn samples(&self, grid_size: usize) -> Result<Vec<WaveSample>, SpectralError> {
        if grid_size < MIN_GRID {
            return Err(SpectralError::InvalidParameter(format!(
                "grid needs at least {MIN_GRID} points, got {grid_size}"
            )));
        }
        let span = self.mode.winding.circuit_angle();
        Ok((0..grid_size)
            .map(|i| {
                let phi = span * i as f64 / grid_size as f64;
                WaveSample {
                    phi,
                    psi: self.psi(phi),
                }
            })
            .collect())
    }
}

pub fn gauge_transform_mode(mode: &ModeFunction, flux: &FluxConfig) -> Result<SingleValuedMode, FluxError> {
    if (mode.flux - flux.total).abs() > 1e-12 * flux.total.abs().max(1.0) {
        return Err(FluxError::FluxMismatch {
            mode: mode.flux,
            requested: flux.total,
        });
    }
    let mismatch = mode.boundary_mismatch(MIN_GRID);
    if !(mismatch < BOUNDARY_TOLERANCE) {
        return Err(FluxError::BoundaryCondition { mismatch });
    }
    Ok(SingleValuedMode {
        mode: mode.clone(),
        flux: flux.total,
    })
}

/// Hill and thin-torus levels for `n ∈ [−window, window]` at flux `flux`.
pub fn flux_spectrum(flux: &FluxConfig, window: i64, spectrum: &KnotSpectrum) -> Result<SpectrumResult, FluxError> {
    let w = spectrum.winding;
    let total = flux.total;
    let mut result = spectrum.levels(-window..=window, |n| shifted_exponent(n, total, &w), total)?;
    let thin: Vec<Level> = result
        .levels
        .iter()
        .map(|l| Level {
            n: l.n,
            nu: l.nu,
            energy: thin_torus_energy_at(l.nu, &w, &spectrum.scales, &spectrum.geometry),
            method: Method::Mathieu,
            residual: None,
        })
        .collect();
    result.levels.extend(thin);
    Ok(result)
}

/// Sorted union of the lowest `count` energies of every sector
/// `ν(n, Φ)`, `n = 0..|q|`. This set does not depend on how levels are
/// labelled.
pub fn spectral_set(total: f64, count: usize, spectrum: &KnotSpectrum) -> Result<Vec<f64>, SpectralError> {
    let w = spectrum.winding;
    let mut out = Vec::new();
    for n in 0..w.q().abs() {
        let (reduced, _) = band_index(shifted_exponent(n, total, &w));
        let sol = spectrum.solver.solve(reduced, &spectrum.potential)?;
        out.extend_from_slice(&sol.energies[..count]);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TorusGeometry;
    use crate::spectral::modes::hill_mode;
    use crate::spectral::potential::ParticleScales;
    use std::f64::consts::PI;

    fn spectrum(gamma: f64, p: i64, q: i64) -> KnotSpectrum {
        KnotSpectrum::new(
            TorusGeometry::from_scale_and_aspect(1.0, gamma).unwrap(),
            KnotWinding::new(p, q).unwrap(),
            ParticleScales::default(),
            64,
        )
        .unwrap()
    }

    #[test]
    fn total_flux_plug_ins() {
        let w = KnotWinding::new(2, 3).unwrap();
        assert_eq!(total_flux(0.0, 0.0, &w).total(), 0.0);
        assert!((total_flux(PI, 0.0, &w).total() - 2.0 * PI).abs() < 1e-15);
        assert!((total_flux(0.3, 0.5, &w).total() - 2.1).abs() < 1e-15);
    }

    #[test]
    fn exponent_shift_relabels_under_full_flux_quantum() {
        let w = KnotWinding::new(2, 3).unwrap();
        assert_eq!(shifted_exponent(2, 0.0, &w), 4.0 / 3.0);
        for n in -4..4 {
            let a = shifted_exponent(n, 2.0 * PI, &w);
            let b = shifted_exponent(n - 1, 0.0, &w);
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn fluxed_modes_satisfy_twisted_boundary_condition() {
        let ks = spectrum(2.0, 2, 3);
        for (n, total) in [(0, 0.7), (1, -1.3), (2, 2.9), (-1, 0.2)] {
            let nu = shifted_exponent(n, total, &ks.winding);
            let (_, mode) = hill_mode(&ks, nu, total).unwrap();
            assert!(mode.boundary_mismatch(512) < 1e-10);
            let flux = FluxConfig::from_total(total);
            let single = gauge_transform_mode(&mode, &flux).unwrap();
            let shift = 2.0 * PI * ks.winding.p() as f64;
            for i in 0..64 {
                let phi = 0.2 * i as f64;
                assert!((single.psi(phi + shift) - single.psi(phi)).norm() < 1e-10);
                assert!((single.psi(phi).norm() - mode.psi(phi).norm()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gauge_rejects_wrong_boundary_condition() {
        let ks = spectrum(2.0, 2, 3);
        let (_, mut mode) = hill_mode(&ks, shifted_exponent(1, 0.0, &ks.winding), 0.0).unwrap();
        mode.flux = 1.0;
        let err = gauge_transform_mode(&mode, &FluxConfig::from_total(1.0)).unwrap_err();
        assert!(matches!(err, FluxError::BoundaryCondition { .. }));
        assert!(matches!(
            gauge_transform_mode(&mode, &FluxConfig::from_total(0.5)),
            Err(FluxError::FluxMismatch { .. })
        ));
    }

    #[test]
    fn zero_flux_is_identity() {
        let ks = spectrum(2.0, 2, 3);
        let (_, mode) = hill_mode(&ks, shifted_exponent(2, 0.0, &ks.winding), 0.0).unwrap();
        let single = gauge_transform_mode(&mode, &FluxConfig::from_total(0.0)).unwrap();
        for i in 0..32 {
            let phi = 0.37 * i as f64;
            assert_eq!(single.psi(phi), mode.psi(phi));
        }
        let plain = ks.unfluxed_levels(4).unwrap();
        let fluxed = flux_spectrum(&FluxConfig::from_total(0.0), 3, &ks).unwrap();
        for l in &plain.levels {
            let m = fluxed.levels.iter().find(|x| x.n == l.n && x.method == Method::Hill).unwrap();
            assert_eq!(m.energy, l.energy);
        }
    }

    #[test]
    fn spectral_set_symmetries() {
        let ks = spectrum(2.5, 2, 3);
        for &total in &[0.0, 0.4, 1.7, PI] {
            let base = spectral_set(total, 6, &ks).unwrap();
            let shifted = spectral_set(total + 2.0 * PI, 6, &ks).unwrap();
            let mirrored = spectral_set(-total, 6, &ks).unwrap();
            for i in 0..base.len() {
                assert!((base[i] - shifted[i]).abs() < 1e-10);
                assert!((base[i] - mirrored[i]).abs() < 1e-10);
            }
        }
    }
}
