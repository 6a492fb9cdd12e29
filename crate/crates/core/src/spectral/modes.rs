//! Eigenfunctions on the knot: `ψ(φ) = N √f(φ) Σ(αφ/2)`.
//!
//! Hill modes carry `Σ` as Floquet coefficients scaled so that
//! `∫₀^{2π|p|} |Σ|² g dφ = 1`; with `N = √(8M)/(ħ|α|)` this also makes
//! `∫ |ψ|² dφ = 1` over one knot circuit. Mathieu modes use `N = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::hill::{band_index, FloquetSolution, KnotSpectrum};
use super::mathieu::{MathieuSeries, Parity};
use super::potential::ReducedPotential;
use super::SpectralError;
use crate::geometry::{KnotWinding, TorusGeometry};

pub const MIN_GRID: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSample {
    pub phi: f64,
    pub psi: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModeShape {
    /// `c_k` for `k = −K..=K` in `Σ = e^{iνz} Σ_k c_k e^{2ikz}`.
    Floquet { coeffs: Vec<Complex64> },
    Mathieu(MathieuSeries),
}

#[derive(Debug, Clone)]
pub struct ModeFunction {
    pub nu: f64,
    pub shape: ModeShape,
    /// Total flux phase `Φ` the mode was solved for.
    pub flux: f64,
    pub samples: Vec<WaveSample>,
    pub geometry: TorusGeometry,
    pub winding: KnotWinding,
    /// Prefactor `N` of `√f`.
    pub norm: f64,
}

impl ModeFunction {
    /// Column `band` of a Floquet solution of the knot potential `pot`.
    pub fn from_floquet(
        sol: &FloquetSolution,
        band: usize,
        pot: &ReducedPotential,
        geometry: TorusGeometry,
        winding: KnotWinding,
        flux: f64,
    ) -> Result<Self, SpectralError> {
        let knot = pot.knot().ok_or_else(|| {
            SpectralError::InvalidParameter("mode assembly needs a knot potential".into())
        })?;
        if band >= sol.energies.len() {
            return Err(SpectralError::InvalidParameter(format!(
                "band {band} is beyond the solved range"
            )));
        }
        let mut coeffs: Vec<Complex64> = sol
            .vectors
            .column(band)
            .iter()
            .map(|&c| Complex64::new(c, 0.0))
            .collect();
        let alpha = knot.alpha.abs();
        let weight = 2.0 * knot.periods as f64 / alpha * pot.weighted_norm_sq(&coeffs);
        let scale = weight.sqrt();
        for c in &mut coeffs {
            *c /= scale;
        }
        let norm = (8.0 * knot.effective_mass).sqrt() / (knot.hbar * alpha);
        Ok(Self {
            nu: sol.nu,
            shape: ModeShape::Floquet { coeffs },
            flux,
            samples: Vec::new(),
            geometry,
            winding,
            norm,
        })
    }

    pub fn sigma(&self) -> Option<f64> {
        match &self.shape {
            ModeShape::Floquet { .. } => None,
            ModeShape::Mathieu(m) => Some(m.sigma()),
        }
    }

    pub fn coefficients(&self) -> Option<&[Complex64]> {
        match &self.shape {
            ModeShape::Floquet { coeffs } => Some(coeffs),
            ModeShape::Mathieu(_) => None,
        }
    }

    /// `Σ(z)`.
    pub fn reduced(&self, z: f64) -> Complex64 {
        match &self.shape {
            ModeShape::Floquet { coeffs } => {
                let k_max = (coeffs.len() / 2) as i32;
                let step = Complex64::from_polar(1.0, 2.0 * z);
                let mut basis = Complex64::from_polar(1.0, self.nu * z - 2.0 * k_max as f64 * z);
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, c) in coeffs.iter().enumerate() {
                    if i % 32 == 0 {
                        // Refresh to keep the running product from drifting.
                        let m = self.nu + 2.0 * (i as i32 - k_max) as f64;
                        basis = Complex64::from_polar(1.0, m * z);
                    }
                    acc += c * basis;
                    basis *= step;
                }
                acc
            }
            ModeShape::Mathieu(m) => Complex64::new(m.value(z), 0.0),
        }
    }

    pub fn psi(&self, phi: f64) -> Complex64 {
        let root_f = self.geometry.profile(phi, &self.winding).sqrt();
        let z = self.winding.alpha() * phi / 2.0;
        self.reduced(z) * (self.norm * root_f)
    }

    /// Largest `|ψ(φ + 2πp) − e^{iΦ} ψ(φ)|` over `samples` points of one
    /// circuit.
    pub fn boundary_mismatch(&self, samples: usize) -> f64 {
        let shift = 2.0 * PI * self.winding.p() as f64;
        let phase = Complex64::from_polar(1.0, self.flux);
        uniform_grid(&self.winding, samples)
            .map(|phi| (self.psi(phi + shift) - phase * self.psi(phi)).norm())
            .fold(0.0, f64::max)
    }

    pub fn with_samples(mut self, grid_size: usize) -> Result<Self, SpectralError> {
        self.samples = assemble_psi(&self, grid_size)?;
        Ok(self)
    }

    /// `∫₀^{2π|p|} Σ̄_self Σ_other g dφ` for two Floquet modes of the same
    /// exponent and potential.
    pub fn weighted_overlap(&self, other: &ModeFunction, pot: &ReducedPotential) -> Result<Complex64, SpectralError> {
        let (a, b) = match (&self.shape, &other.shape) {
            (ModeShape::Floquet { coeffs: a }, ModeShape::Floquet { coeffs: b })
                if a.len() == b.len() && (self.nu - other.nu).abs() < 1e-14 =>
            {
                (a, b)
            }
            _ => {
                return Err(SpectralError::InvalidParameter(
                    "overlap needs Floquet modes of one exponent".into(),
                ))
            }
        };
        let g = pot.g_coeffs();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                if let Some(&gr) = g.get(i.abs_diff(j)) {
                    acc += ai.conj() * gr * bj;
                }
            }
        }
        let periods = self.winding.q().unsigned_abs() as f64;
        Ok(acc * (2.0 * PI * periods / self.winding.alpha().abs()))
    }
}

fn uniform_grid(winding: &KnotWinding, n: usize) -> impl Iterator<Item = f64> {
    let span = winding.circuit_angle();
    (0..n).map(move |i| span * i as f64 / n as f64)
}

/// Sample `ψ` on a uniform grid over `[0, 2π|p|)`.
pub fn assemble_psi(mode: &ModeFunction, grid_size: usize) -> Result<Vec<WaveSample>, SpectralError> {
    if grid_size < MIN_GRID {
        return Err(SpectralError::InvalidParameter(format!(
            "grid needs at least {MIN_GRID} points, got {grid_size}"
        )));
    }
    Ok(uniform_grid(&mode.winding, grid_size)
        .map(|phi| WaveSample {
            phi,
            psi: mode.psi(phi),
        })
        .collect())
}

/// First-order thin-torus mode for level `n`, `ν = 2n/q`, with `χ = √f`.
pub fn mathieu_mode(
    n: i64,
    parity: Parity,
    w: &KnotWinding,
    geom: &TorusGeometry,
) -> Result<ModeFunction, SpectralError> {
    let nu = 2.0 * n as f64 / w.q() as f64;
    let series = MathieuSeries::new(nu, geom.gamma(), parity)?;
    Ok(ModeFunction {
        nu,
        shape: ModeShape::Mathieu(series),
        flux: 0.0,
        samples: Vec::new(),
        geometry: *geom,
        winding: *w,
        norm: 1.0,
    })
}

/// Hill eigenmode of the level with exponent `nu` (band-labelled), for
/// total flux phase `flux`.
pub fn hill_mode(spectrum: &KnotSpectrum, nu: f64, flux: f64) -> Result<(f64, ModeFunction), SpectralError> {
    let (energy, band, sol) = spectrum.level_for_exponent(nu)?;
    debug_assert_eq!(band_index(nu).1, band);
    let mode = ModeFunction::from_floquet(
        &sol,
        band,
        &spectrum.potential,
        spectrum.geometry,
        spectrum.winding,
        flux,
    )?;
    Ok((energy, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::hill::floquet_exponent;
    use crate::spectral::potential::ParticleScales;

    fn spectrum(gamma: f64, p: i64, q: i64) -> KnotSpectrum {
        KnotSpectrum::new(
            TorusGeometry::from_scale_and_aspect(1.0, gamma).unwrap(),
            KnotWinding::new(p, q).unwrap(),
            ParticleScales::default(),
            64,
        )
        .unwrap()
    }

    fn circuit_norm(mode: &ModeFunction) -> f64 {
        let n = 8192;
        let samples = assemble_psi(mode, n).unwrap();
        let dphi = mode.winding.circuit_angle() / n as f64;
        samples.iter().map(|s| s.psi.norm_sqr()).sum::<f64>() * dphi
    }

    #[test]
    fn hill_modes_are_unit_normalised_and_periodic() {
        let ks = spectrum(1.8, 2, 3);
        for n in 0..5 {
            let (_, mode) = hill_mode(&ks, floquet_exponent(n, &ks.winding), 0.0).unwrap();
            assert!((circuit_norm(&mode) - 1.0).abs() < 1e-10);
            assert!(mode.boundary_mismatch(512) < 1e-10);
        }
    }

    #[test]
    fn modes_of_one_solve_are_weighted_orthogonal() {
        let ks = spectrum(1.5, 3, 4);
        let sol = ks.solver.solve(0.5, &ks.potential).unwrap();
        let modes: Vec<_> = (0..4)
            .map(|j| ModeFunction::from_floquet(&sol, j, &ks.potential, ks.geometry, ks.winding, 0.0).unwrap())
            .collect();
        for i in 0..4 {
            for j in 0..4 {
                let o = modes[i].weighted_overlap(&modes[j], &ks.potential).unwrap();
                if i == j {
                    assert!((o.re - 1.0).abs() < 1e-10);
                } else {
                    assert!(o.norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn circle_mode_has_constant_modulus() {
        // A small flux selects the travelling wave out of the near-degenerate
        // pair.
        let ks = spectrum(1e4, -1, 1);
        let flux = 1e-2;
        let nu = 2.0 - flux / PI;
        let (_, mode) = hill_mode(&ks, nu, flux).unwrap();
        let samples = assemble_psi(&mode, 512).unwrap();
        let mean = samples.iter().map(|s| s.psi.norm()).sum::<f64>() / samples.len() as f64;
        for s in &samples {
            assert!((s.psi.norm() / mean - 1.0).abs() < 1e-3);
        }
        assert!((mean - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn thin_torus_mathieu_mode_degenerates_to_cosine() {
        let geom = TorusGeometry::from_scale_and_aspect(1.0, 1e4).unwrap();
        let w = KnotWinding::new(2, 3).unwrap();
        let mode = mathieu_mode(2, Parity::Cosine, &w, &geom).unwrap();
        let scale = geom.scale() / geom.gamma();
        for s in assemble_psi(&mode, 300).unwrap() {
            let expected = (2.0 * w.alpha() * s.phi / 3.0).cos() * scale;
            assert!((s.psi.re - expected).abs() < 1e-3 * scale);
        }
        assert!(mathieu_mode(3, Parity::Cosine, &KnotWinding::new(1, 6).unwrap(), &geom).is_err());
        assert!(assemble_psi(&mode, 100).is_err());
    }
}
