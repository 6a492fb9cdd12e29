//! Cosine coefficients of `w(x) = 1/(γ − cos x)²`.
//!
//! From `1/(γ − cos x) = (1/β)(1 + 2 Σ ρᵏ cos kx)` with `β = √(γ²−1)` and
//! `ρ = γ − β`, differentiating in `γ` gives
//!
//! ```text
//! w(x) = w₀ + 2 Σ_{k≥1} w_k cos kx,     w_k = ρᵏ (kβ + γ) / β³
//! ```

use super::SpectralError;

/// `ρ = γ − √(γ²−1)`, the geometric decay rate of the coefficients.
pub fn decay_ratio(gamma: f64) -> f64 {
    let beta = ((gamma - 1.0) * (gamma + 1.0)).sqrt();
    // 1/(γ + β) avoids cancellation for large γ.
    1.0 / (gamma + beta)
}

/// `w_k` for `k = 0..=order`.
pub fn weight_fourier(gamma: f64, order: usize) -> Result<Vec<f64>, SpectralError> {
    if !(gamma > 1.0 && gamma.is_finite()) {
        return Err(SpectralError::InvalidParameter(format!(
            "aspect ratio must exceed 1, got {gamma}"
        )));
    }
    let beta = ((gamma - 1.0) * (gamma + 1.0)).sqrt();
    let rho = decay_ratio(gamma);
    let beta3 = beta * beta * beta;
    let mut power = 1.0;
    Ok((0..=order)
        .map(|k| {
            let w = power * (k as f64 * beta + gamma) / beta3;
            power *= rho;
            w
        })
        .collect())
}

/// Evaluate `c₀ + 2 Σ c_k cos(k x)`.
pub fn cosine_series(coeffs: &[f64], x: f64) -> f64 {
    let Some((&c0, rest)) = coeffs.split_first() else {
        return 0.0;
    };
    // Clenshaw recurrence for Σ_{k≥1} c_k cos kx.
    let two_cos = 2.0 * x.cos();
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in rest.iter().rev() {
        let b0 = c + two_cos * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    // Σ_{k≥1} c_k cos kx = b1 cos x − b2
    c0 + 2.0 * (b1 * x.cos() - b2)
}
