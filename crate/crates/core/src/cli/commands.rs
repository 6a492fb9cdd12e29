//! One function per subcommand, each producing an [`OutputTable`].

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::config::{Command, MethodChoice, RunConfig};
use super::table::OutputTable;
use super::CliError;
use crate::classical::{conserved_drift, ClassicalState, IntegratorConfig, KnotParticle, Trajectory};
use crate::flux::{flux_spectrum, shifted_exponent, FluxConfig};
use crate::ode::StepControl;
use crate::spectral::hill::{band_index, CONVERGENCE_TOLERANCE};
use crate::spectral::mathieu::{thin_torus_energy_at, whittaker_energy_at};
use crate::spectral::modes::{assemble_psi, hill_mode, mathieu_mode};
use crate::spectral::{monodromy_residual, HillSolver, KnotSpectrum, Method, ParticleScales, SpectralError};

pub fn run_command(cfg: &RunConfig) -> Result<OutputTable, CliError> {
    let mut table = match cfg.command {
        Command::Geometry => geometry(cfg),
        Command::Classical => classical(cfg)?,
        Command::Spectrum => spectrum(cfg)?,
        Command::Modes => modes(cfg)?,
        Command::Sweep => sweep(cfg)?,
    };
    let mut meta = cfg.to_meta();
    meta.append(&mut table.meta);
    meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    table.meta = meta;
    Ok(table)
}

fn scales(cfg: &RunConfig) -> Result<ParticleScales, CliError> {
    ParticleScales::new(cfg.mass, cfg.hbar).map_err(module)
}

fn module(e: impl std::fmt::Display) -> CliError {
    CliError::Module(e.to_string())
}

fn total_flux(cfg: &RunConfig) -> f64 {
    FluxConfig::new(cfg.phi_s, cfg.phi_t, &cfg.winding()).total()
}

fn geometry(cfg: &RunConfig) -> OutputTable {
    let (geom, w) = (cfg.geometry(), cfg.winding());
    let mut table = OutputTable::new(&["phi", "x", "y", "z"]);
    for i in 0..cfg.samples {
        let phi = w.circuit_angle() * i as f64 / cfg.samples as f64;
        let pt = geom.knot_point(phi, &w);
        table.push(vec![phi, pt.x, pt.y, pt.z]);
    }
    table
}

fn classical(cfg: &RunConfig) -> Result<OutputTable, CliError> {
    let (geom, w) = (cfg.geometry(), cfg.winding());
    let particle = KnotParticle::new(cfg.mass, w, geom).map_err(module)?;
    let period = particle.characteristic_period(cfg.speed);
    let initial = ClassicalState {
        t: 0.0,
        phi: 0.0,
        phi_dot: cfg.speed / geom.profile(0.0, &w).sqrt(),
    };
    let closed = || particle.closed_form_trajectory(cfg.speed, cfg.t_max, cfg.samples).map_err(module);
    let integrated = || {
        let control = StepControl::adaptive(cfg.tol, period / 256.0);
        let icfg = IntegratorConfig {
            control,
            samples: cfg.samples,
        };
        particle.integrate(&initial, cfg.t_max, &icfg).map_err(module)
    };

    let base = ["t", "phi", "phi_dot", "x", "y", "z", "A_drift", "H_drift"];
    let rows = |traj: &Trajectory| -> Vec<Vec<f64>> {
        traj.samples
            .iter()
            .zip(conserved_drift(&particle, traj))
            .map(|(s, (da, dh))| {
                let pt = geom.knot_point(s.phi, &w);
                vec![s.t, s.phi, s.phi_dot, pt.x, pt.y, pt.z, da, dh]
            })
            .collect()
    };
    let mut table;
    match cfg.method {
        MethodChoice::Closed => {
            table = OutputTable::new(&base);
            let traj = closed()?;
            table.rows = rows(&traj);
            table.meta.insert("trajectory".into(), traj.method.tag().into());
        }
        MethodChoice::Rk4 => {
            table = OutputTable::new(&base);
            let traj = integrated()?;
            table.rows = rows(&traj);
            table.meta.insert("trajectory".into(), traj.method.tag().into());
        }
        _ => {
            let mut cols = base.to_vec();
            cols.extend(["phi_closed", "phi_diff"]);
            table = OutputTable::new(&cols);
            let traj = integrated()?;
            for (mut row, s) in rows(&traj).into_iter().zip(&traj.samples) {
                let exact = particle.closed_form_phi(s.t, cfg.speed);
                row.extend([exact, s.phi - exact]);
                table.push(row);
            }
            table.meta.insert("trajectory".into(), "rk4,closed-form".into());
        }
    }
    Ok(table)
}

/// Smallest truncation, doubling from the configured one, at which the
/// bands needed for `exponents` are converged.
fn converged_truncation(cfg: &RunConfig, spectrum: &KnotSpectrum, exponents: &[f64]) -> Result<usize, SpectralError> {
    let mut sectors: Vec<(f64, usize)> = Vec::new();
    for &nu in exponents {
        let (reduced, band) = band_index(nu);
        match sectors.iter_mut().find(|(r, _)| r.to_bits() == reduced.to_bits()) {
            Some(entry) => entry.1 = entry.1.max(band + 1),
            None => sectors.push((reduced, band + 1)),
        }
    }
    let start = HillSolver::new(cfg.truncation)?;
    let mut needed = cfg.truncation;
    for (reduced, count) in sectors {
        let (solver, _) = start.converged(reduced, &spectrum.potential, count, CONVERGENCE_TOLERANCE)?;
        needed = needed.max(solver.truncation);
    }
    Ok(needed)
}

fn knot_spectrum(cfg: &RunConfig, truncation: usize) -> Result<KnotSpectrum, CliError> {
    KnotSpectrum::new(cfg.geometry(), cfg.winding(), scales(cfg)?, truncation).map_err(module)
}

fn spectrum(cfg: &RunConfig) -> Result<OutputTable, CliError> {
    let (geom, w, sc) = (cfg.geometry(), cfg.winding(), scales(cfg)?);
    let total = total_flux(cfg);
    let exponents: Vec<f64> = (0..cfg.levels as i64).map(|n| shifted_exponent(n, total, &w)).collect();
    let probe = knot_spectrum(cfg, cfg.truncation)?;
    let used = converged_truncation(cfg, &probe, &exponents).map_err(module)?;
    let ks = if used == cfg.truncation { probe } else { knot_spectrum(cfg, used)? };
    let levels = ks
        .levels(0..cfg.levels as i64, |n| shifted_exponent(n, total, &w), total)
        .map_err(module)?;

    let sigma = cfg.parity.sigma();
    let mut table = OutputTable::new(&["n", "nu", "E_hill", "E_mathieu", "E_whittaker", "residual"]);
    for l in &levels.levels {
        let residual = monodromy_residual(l.energy, l.nu, &ks.potential).map_err(module)?;
        table.push(vec![
            l.n as f64,
            l.nu,
            l.energy,
            thin_torus_energy_at(l.nu, &w, &sc, &geom),
            whittaker_energy_at(l.nu, sigma, &w, &sc, &geom),
            residual,
        ]);
    }
    table.meta.insert(
        "methods".into(),
        [Method::Hill, Method::Mathieu, Method::Whittaker].map(|m| m.tag()).join(","),
    );
    table.meta.insert("truncation_used".into(), used.to_string());
    table.meta.insert("flux_total".into(), total.to_string());
    Ok(table)
}

fn modes(cfg: &RunConfig) -> Result<OutputTable, CliError> {
    let (geom, w) = (cfg.geometry(), cfg.winding());
    let total = total_flux(cfg);
    let mut table = OutputTable::new(&["phi", "re_psi", "im_psi", "abs2"]);
    let samples = match cfg.method {
        MethodChoice::Mathieu => {
            if total != 0.0 {
                return Err(CliError::Usage("mathieu modes are only available at zero flux".into()));
            }
            let mode = mathieu_mode(cfg.n, cfg.parity, &w, &geom).map_err(module)?;
            table.meta.insert("mode".into(), format!("mathieu-{}", cfg.parity.tag()));
            assemble_psi(&mode, cfg.samples).map_err(module)?
        }
        _ => {
            let nu = shifted_exponent(cfg.n, total, &w);
            let probe = knot_spectrum(cfg, cfg.truncation)?;
            let used = converged_truncation(cfg, &probe, &[nu]).map_err(module)?;
            let ks = if used == cfg.truncation { probe } else { knot_spectrum(cfg, used)? };
            let (energy, mode) = hill_mode(&ks, nu, total).map_err(module)?;
            table.meta.insert("mode".into(), "hill".into());
            table.meta.insert("energy".into(), energy.to_string());
            table.meta.insert("nu".into(), nu.to_string());
            table.meta.insert("truncation_used".into(), used.to_string());
            assemble_psi(&mode, cfg.samples).map_err(module)?
        }
    };
    for s in samples {
        table.push(vec![s.phi, s.psi.re, s.psi.im, s.psi.norm_sqr()]);
    }
    Ok(table)
}

fn sweep(cfg: &RunConfig) -> Result<OutputTable, CliError> {
    let w = cfg.winding();
    let window = cfg.levels as i64;
    let grid: Vec<f64> = (0..cfg.flux_steps)
        .map(|i| {
            if cfg.flux_steps == 1 {
                cfg.flux_min
            } else {
                cfg.flux_min + (cfg.flux_max - cfg.flux_min) * i as f64 / (cfg.flux_steps - 1) as f64
            }
        })
        .collect();
    // One truncation for the whole grid so rows are comparable.
    let exponents: Vec<f64> = grid
        .iter()
        .flat_map(|&phi| (-window..=window).map(move |n| shifted_exponent(n, phi, &w)))
        .collect();
    let probe = knot_spectrum(cfg, cfg.truncation)?;
    let bands: BTreeSet<usize> = exponents.iter().map(|&nu| band_index(nu).1).collect();
    if bands.last().is_some_and(|&b| b >= cfg.truncation) {
        return Err(CliError::Usage("level window exceeds the truncation".into()));
    }
    let used = converged_truncation(cfg, &probe, &exponents).map_err(module)?;
    let ks = if used == cfg.truncation { probe } else { knot_spectrum(cfg, used)? };

    let blocks = grid
        .par_iter()
        .map(|&phi| {
            let result = flux_spectrum(&FluxConfig::from_total(phi), window, &ks).map_err(module)?;
            Ok(result
                .levels
                .iter()
                .filter(|l| l.method == Method::Hill)
                .map(|l| vec![phi, l.n as f64, l.energy])
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut table = OutputTable::new(&["Phi", "n", "E"]);
    table.rows = blocks.into_iter().flatten().collect();
    table.meta.insert("truncation_used".into(), used.to_string());
    Ok(table)
}
