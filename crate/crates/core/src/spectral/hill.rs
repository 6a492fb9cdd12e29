//! Truncated Floquet–Fourier solver.
//!
//! Substituting `Σ = e^{iνz} Σ_{k=−K}^{K} c_k e^{2ikz}` into
//! `Σ'' + (h + E g) Σ = 0` gives the symmetric-definite pencil
//!
//! ```text
//! A c = E B c
//! A_kl = (ν + 2k)² δ_kl − h_|k−l|,     B_kl = g_|k−l|
//! ```
//!
//! which is reduced with the Cholesky factor of `B` to an ordinary symmetric
//! eigenproblem.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use super::monodromy::monodromy_residual;
use super::potential::{ParticleScales, ReducedPotential};
use super::SpectralError;
use crate::geometry::{KnotWinding, TorusGeometry};

pub const DEFAULT_TRUNCATION: usize = 64;
pub const MAX_TRUNCATION: usize = 1024;
pub const CONVERGENCE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Hill,
    Mathieu,
    Whittaker,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Hill => "hill",
            Method::Mathieu => "mathieu",
            Method::Whittaker => "whittaker",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    /// Level label: band index for a single-exponent solve, knot quantum
    /// number for knot spectra.
    pub n: i64,
    pub nu: f64,
    pub energy: f64,
    pub method: Method,
    /// `|tr 𝕄 − 2 cos πν|` when checked.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub levels: Vec<Level>,
    /// Total flux phase `Φ` in radians.
    pub flux: f64,
    pub truncation: usize,
}

impl SpectrumResult {
    pub fn energies(&self, method: Method) -> Vec<f64> {
        self.levels
            .iter()
            .filter(|l| l.method == method)
            .map(|l| l.energy)
            .collect()
    }

    /// Sort by energy within each method, keeping methods in first-seen order.
    pub fn sort(&mut self) {
        let mut order: Vec<Method> = Vec::new();
        for l in &self.levels {
            if !order.contains(&l.method) {
                order.push(l.method);
            }
        }
        self.levels.sort_by(|a, b| {
            let ia = order.iter().position(|m| *m == a.method);
            let ib = order.iter().position(|m| *m == b.method);
            ia.cmp(&ib).then(a.energy.total_cmp(&b.energy))
        });
    }
}

/// All eigenpairs of one truncated Floquet problem, ascending in energy.
#[derive(Debug, Clone)]
pub struct FloquetSolution {
    pub nu: f64,
    pub truncation: usize,
    pub energies: Vec<f64>,
    /// Column `j` holds `c_k` for `k = −K..=K`, unit Euclidean norm.
    pub vectors: DMatrix<f64>,
}

impl FloquetSolution {
    pub fn coefficients(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j).iter().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HillSolver {
    pub truncation: usize,
}

impl Default for HillSolver {
    fn default() -> Self {
        Self {
            truncation: DEFAULT_TRUNCATION,
        }
    }
}

impl HillSolver {
    pub fn new(truncation: usize) -> Result<Self, SpectralError> {
        if truncation < 16 {
            return Err(SpectralError::InvalidParameter(format!(
                "truncation must be at least 16, got {truncation}"
            )));
        }
        Ok(Self { truncation })
    }

    pub fn solve(&self, nu: f64, pot: &ReducedPotential) -> Result<FloquetSolution, SpectralError> {
        let k_max = self.truncation as i64;
        let dim = 2 * self.truncation + 1;
        let (h, g) = (pot.h_coeffs(), pot.g_coeffs());
        let coeff = |c: &[f64], r: usize| c.get(r).copied().unwrap_or(0.0);
        let a = DMatrix::from_fn(dim, dim, |i, j| {
            let r = i.abs_diff(j);
            let diag = if i == j {
                let m = nu + 2.0 * (i as i64 - k_max) as f64;
                m * m
            } else {
                0.0
            };
            diag - coeff(h, r)
        });
        let b = DMatrix::from_fn(dim, dim, |i, j| coeff(g, i.abs_diff(j)));

        let chol = Cholesky::new(b).ok_or(SpectralError::NotPositiveDefinite)?;
        let l = chol.l();
        let left = l
            .solve_lower_triangular(&a)
            .ok_or(SpectralError::NotPositiveDefinite)?;
        let mut c = l
            .solve_lower_triangular(&left.transpose())
            .ok_or(SpectralError::NotPositiveDefinite)?;
        let ct = c.transpose();
        c = (c + ct) * 0.5;

        let eig = SymmetricEigen::new(c);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        let energies: Vec<f64> = order.iter().map(|&j| eig.eigenvalues[j]).collect();
        let y = DMatrix::from_fn(dim, dim, |i, j| eig.eigenvectors[(i, order[j])]);
        let mut vectors = l
            .transpose()
            .solve_upper_triangular(&y)
            .ok_or(SpectralError::NotPositiveDefinite)?;
        for mut col in vectors.column_iter_mut() {
            let norm = col.norm();
            // Fix the sign so the largest component is positive.
            let pivot = col.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            col /= norm * pivot.signum();
        }
        Ok(FloquetSolution {
            nu,
            truncation: self.truncation,
            energies,
            vectors,
        })
    }

    /// Double the truncation, starting from `self`, until the lowest `count`
    /// energies move by less than `tolerance`. Returns the converged solver
    /// and its solution.
    pub fn converged(
        &self,
        nu: f64,
        pot: &ReducedPotential,
        count: usize,
        tolerance: f64,
    ) -> Result<(HillSolver, FloquetSolution), SpectralError> {
        let mut solver = *self;
        let mut previous = solver.solve(nu, pot)?;
        while solver.truncation * 2 <= MAX_TRUNCATION {
            let next = HillSolver::new(solver.truncation * 2)?;
            let sol = next.solve(nu, pot)?;
            let change = previous
                .energies
                .iter()
                .zip(&sol.energies)
                .take(count)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if change < tolerance {
                return Ok((solver, previous));
            }
            solver = next;
            previous = sol;
        }
        Err(SpectralError::NoConvergence {
            cap: MAX_TRUNCATION,
            tolerance,
        })
    }
}

/// Lowest `count` energies for exponent `nu`, each checked by shooting.
pub fn hill_energies(
    nu: f64,
    pot: &ReducedPotential,
    truncation: usize,
    count: usize,
) -> Result<SpectrumResult, SpectralError> {
    if count > truncation {
        return Err(SpectralError::InvalidParameter(format!(
            "level count {count} exceeds truncation {truncation}"
        )));
    }
    let sol = HillSolver::new(truncation)?.solve(nu, pot)?;
    let levels = sol.energies[..count]
        .iter()
        .enumerate()
        .map(|(j, &energy)| {
            Ok(Level {
                n: j as i64,
                nu,
                energy,
                method: Method::Hill,
                residual: Some(monodromy_residual(energy, nu, pot)?),
            })
        })
        .collect::<Result<Vec<_>, SpectralError>>()?;
    Ok(SpectrumResult {
        levels,
        flux: 0.0,
        truncation,
    })
}

/// `ν = 2n/q`: the exponent making `ψ` close after one knot circuit.
pub fn floquet_exponent(n: i64, winding: &KnotWinding) -> f64 {
    2.0 * n as f64 / winding.q() as f64
}

/// Reduce an exponent into `[−1, 1]` modulo 2 and find the rank of its own
/// harmonic `|ν|` among `{|ν_r + 2k|}`.
///
/// Because energy increases monotonically with `|ν + 2k|` along the extended
/// zone, that rank is the band index of the level. At integer `|ν|` two
/// harmonics tie; the positive exponent takes the lower band.
pub fn band_index(nu: f64) -> (f64, usize) {
    let reduced = nu - 2.0 * (nu / 2.0).round();
    let target = nu.abs();
    let eps = 1e-9 * target.max(1.0);
    let reach = target.ceil() as i64 + 2;
    let mut below = 0usize;
    let mut ties = 0usize;
    for k in -reach..=reach {
        let m = (reduced + 2.0 * k as f64).abs();
        if m < target - eps {
            below += 1;
        } else if m <= target + eps {
            ties += 1;
        }
    }
    let j = if ties > 1 && nu < 0.0 { below + 1 } else { below };
    (reduced, j)
}

/// Hill-method spectrum of a specific knot.
#[derive(Debug, Clone)]
pub struct KnotSpectrum {
    pub geometry: TorusGeometry,
    pub winding: KnotWinding,
    pub scales: ParticleScales,
    pub potential: ReducedPotential,
    pub solver: HillSolver,
}

impl KnotSpectrum {
    pub fn new(
        geometry: TorusGeometry,
        winding: KnotWinding,
        scales: ParticleScales,
        truncation: usize,
    ) -> Result<Self, SpectralError> {
        let solver = HillSolver::new(truncation)?;
        let potential = ReducedPotential::for_knot_auto(&geometry, &winding, &scales, 16)?;
        Ok(Self {
            geometry,
            winding,
            scales,
            potential,
            solver,
        })
    }

    /// Solve the sector containing `nu` and pick the band of `nu` itself.
    /// Returns `(energy, band, solution at the reduced exponent)`.
    pub fn level_for_exponent(&self, nu: f64) -> Result<(f64, usize, FloquetSolution), SpectralError> {
        let (reduced, band) = band_index(nu);
        if band >= self.solver.truncation {
            return Err(SpectralError::InvalidParameter(format!(
                "band {band} is beyond truncation {}",
                self.solver.truncation
            )));
        }
        let sol = self.solver.solve(reduced, &self.potential)?;
        Ok((sol.energies[band], band, sol))
    }

    /// Band-labelled levels for the given quantum numbers and exponent map.
    pub fn levels<F>(&self, ns: impl IntoIterator<Item = i64>, exponent: F, flux: f64) -> Result<SpectrumResult, SpectralError>
    where
        F: Fn(i64) -> f64,
    {
        let mut cache: Vec<(u64, FloquetSolution)> = Vec::new();
        let mut levels = Vec::new();
        for n in ns {
            let nu = exponent(n);
            let (reduced, band) = band_index(nu);
            let key = reduced.to_bits();
            let idx = match cache.iter().position(|(k, _)| *k == key) {
                Some(i) => i,
                None => {
                    cache.push((key, self.solver.solve(reduced, &self.potential)?));
                    cache.len() - 1
                }
            };
            levels.push(Level {
                n,
                nu,
                energy: cache[idx].1.energies[band],
                method: Method::Hill,
                residual: None,
            });
        }
        Ok(SpectrumResult {
            levels,
            flux,
            truncation: self.solver.truncation,
        })
    }

    /// Unfluxed levels `n = 0..count` with `ν = 2n/q`.
    pub fn unfluxed_levels(&self, count: usize) -> Result<SpectrumResult, SpectralError> {
        let w = self.winding;
        self.levels(0..count as i64, |n| floquet_exponent(n, &w), 0.0)
    }
}
