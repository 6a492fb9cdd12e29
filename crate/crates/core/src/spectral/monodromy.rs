//! Shooting check for Hill eigenvalues.
//!
//! The one-period transfer matrix of `Σ'' + (h + E g) Σ = 0` over `[0, π]`
//! has trace `2 cos πν` exactly when `E` belongs to the spectrum for exponent
//! `ν`. It is built here by direct integration with the closed-form
//! coefficients, independently of the Fourier matrices.

use std::f64::consts::PI;

use super::potential::ReducedPotential;
use super::SpectralError;
use crate::ode::rk4_step;

const MAX_STEPS: usize = 1 << 22;
const STEP_TOLERANCE: f64 = 1e-12;

/// `[[y₁(π), y₂(π)], [y₁'(π), y₂'(π)]]` for the canonical fundamental pair.
pub fn monodromy_matrix(energy: f64, pot: &ReducedPotential) -> Result<[[f64; 2]; 2], SpectralError> {
    let mut steps = initial_steps(energy, pot);
    let mut coarse = integrate(energy, pot, steps);
    loop {
        steps *= 2;
        let fine = integrate(energy, pot, steps);
        let scale = fine.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        let change = fine
            .iter()
            .flatten()
            .zip(coarse.iter().flatten())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if !change.is_finite() {
            return Err(SpectralError::InvalidParameter(format!(
                "non-finite transfer matrix at E = {energy}"
            )));
        }
        if change / 15.0 < STEP_TOLERANCE * scale {
            let mut out = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] = fine[i][j] + (fine[i][j] - coarse[i][j]) / 15.0;
                }
            }
            return Ok(out);
        }
        if steps >= MAX_STEPS {
            return Err(SpectralError::NoConvergence {
                cap: MAX_STEPS,
                tolerance: STEP_TOLERANCE,
            });
        }
        coarse = fine;
    }
}

/// `tr 𝕄(E) − 2 cos πν`; changes sign across each simple eigenvalue.
pub fn discriminant(energy: f64, nu: f64, pot: &ReducedPotential) -> Result<f64, SpectralError> {
    let m = monodromy_matrix(energy, pot)?;
    Ok(m[0][0] + m[1][1] - 2.0 * (PI * nu).cos())
}

pub fn monodromy_residual(energy: f64, nu: f64, pot: &ReducedPotential) -> Result<f64, SpectralError> {
    Ok(discriminant(energy, nu, pot)?.abs())
}

/// Polish an eigenvalue estimate by root finding on the discriminant inside
/// `[estimate − half_width, estimate + half_width]`.
pub fn refine_eigenvalue(
    estimate: f64,
    half_width: f64,
    nu: f64,
    pot: &ReducedPotential,
) -> Result<f64, SpectralError> {
    let (mut a, mut b) = (estimate - half_width, estimate + half_width);
    let (mut fa, mut fb) = (discriminant(a, nu, pot)?, discriminant(b, nu, pot)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(SpectralError::RootNotBracketed { energy: estimate });
    }
    // Illinois-modified regula falsi, falling back to bisection when the
    // secant point leaves the middle of the bracket.
    let mut side = 0i8;
    for _ in 0..200 {
        let width = b - a;
        if width.abs() <= 4.0 * f64::EPSILON * estimate.abs().max(1.0) {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a + 0.01 * width && c < b - 0.01 * width) {
            c = 0.5 * (a + b);
        }
        let fc = discriminant(c, nu, pot)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

fn initial_steps(energy: f64, pot: &ReducedPotential) -> usize {
    let samples = 256;
    let peak = (0..samples)
        .map(|i| {
            let (h, g) = pot.evaluate(PI * i as f64 / samples as f64);
            (h + energy * g).abs()
        })
        .fold(0.0f64, f64::max);
    let wanted = (20.0 * peak.sqrt() * PI).ceil() as usize;
    wanted.max(256).next_power_of_two()
}

fn integrate(energy: f64, pot: &ReducedPotential, steps: usize) -> [[f64; 2]; 2] {
    let rhs = |z: f64, y: &[f64; 4]| {
        let (h, g) = pot.evaluate(z);
        let k = h + energy * g;
        [y[1], -k * y[0], y[3], -k * y[2]]
    };
    let dz = PI / steps as f64;
    let mut y = [1.0, 0.0, 0.0, 1.0];
    for i in 0..steps {
        y = rk4_step(&rhs, i as f64 * dz, &y, dz);
    }
    [[y[0], y[2]], [y[1], y[3]]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{KnotWinding, TorusGeometry};
    use crate::spectral::potential::ParticleScales;

    #[test]
    fn free_rotor_trace() {
        let pot = ReducedPotential::from_coefficients(vec![0.0], vec![1.0]).unwrap();
        for &e in &[0.3f64, 2.0, 7.5] {
            let m = monodromy_matrix(e, &pot).unwrap();
            let trace = m[0][0] + m[1][1];
            assert!((trace - 2.0 * (PI * e.sqrt()).cos()).abs() < 1e-11);
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            assert!((det - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn knot_transfer_matrix_is_unimodular() {
        let geom = TorusGeometry::from_scale_and_aspect(1.0, 1.2).unwrap();
        let w = KnotWinding::new(2, 3).unwrap();
        let pot = ReducedPotential::for_knot_auto(&geom, &w, &ParticleScales::default(), 16).unwrap();
        let m = monodromy_matrix(3.0, &pot).unwrap();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!((det - 1.0).abs() < 1e-10, "{det}");
    }

    #[test]
    fn refine_recovers_mathieu_value() {
        // a₀(q = 1) for Σ'' + (a − 2 cos 2z) Σ = 0.
        let pot = ReducedPotential::from_coefficients(vec![0.0, -1.0], vec![1.0]).unwrap();
        let e = refine_eigenvalue(-0.45, 0.05, 0.0, &pot).unwrap();
        assert!((e + 0.455_138_604_1).abs() < 1e-9, "{e}");
        assert!(matches!(
            refine_eigenvalue(5.0, 0.1, 0.0, &pot),
            Err(SpectralError::RootNotBracketed { .. })
        ));
    }
}
