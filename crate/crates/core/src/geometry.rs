//! Toroidal coordinates and the (p, q) torus knot.
//!
//! A torus of major radius `R` and minor radius `d` is the surface `η = η₀` of
//! the toroidal coordinate system with focal scale `a² = R² − d²` and
//! `cosh η₀ = R/d`. The knot is the curve `p θ + q φ = 0` on that surface, i.e.
//! `θ = α φ` with `α = −q/p`.
//!
//! ```text
//! x = a sinh η cos φ / (cosh η − cos θ)
//! y = a sinh η sin φ / (cosh η − cos θ)
//! z = a sin θ        / (cosh η − cos θ)
//! ```

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate torus: R = {major} must exceed d = {minor}")]
    DegenerateTorus { major: f64, minor: f64 },
    #[error("torus radii must be positive and finite (R = {major}, d = {minor})")]
    NonPositiveRadius { major: f64, minor: f64 },
    #[error("winding numbers must be non-zero, got ({p}, {q})")]
    ZeroWinding { p: i64, q: i64 },
    #[error("p and q must be coprime, got ({p}, {q})")]
    NotCoprime { p: i64, q: i64 },
    #[error("singular point of toroidal coordinates (eta = 0, theta = 0)")]
    SingularPoint,
}

/// The putative torus carrying the knot.
///
/// Built from `(R, d)` only; `a`, `η₀`, `β = sinh η₀` and `γ = cosh η₀` are
/// derived so they can never disagree with each other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGeometry {
    major: f64,
    minor: f64,
    scale: f64,
    eta0: f64,
    beta: f64,
    gamma: f64,
}

impl TorusGeometry {
    pub fn new(major: f64, minor: f64) -> Result<Self, GeometryError> {
        if !(major.is_finite() && minor.is_finite()) || major <= 0.0 || minor <= 0.0 {
            return Err(GeometryError::NonPositiveRadius { major, minor });
        }
        if major <= minor {
            return Err(GeometryError::DegenerateTorus { major, minor });
        }
        // (R − d)(R + d) keeps a accurate for thick tori.
        let scale = ((major - minor) * (major + minor)).sqrt();
        let gamma = major / minor;
        let beta = scale / minor;
        Ok(Self {
            major,
            minor,
            scale,
            eta0: beta.asinh(),
            beta,
            gamma,
        })
    }

    /// Torus with focal scale `a` and aspect ratio `γ = R/d`.
    pub fn from_scale_and_aspect(scale: f64, gamma: f64) -> Result<Self, GeometryError> {
        if !(gamma > 1.0) || !(scale > 0.0) {
            return Err(GeometryError::DegenerateTorus {
                major: gamma,
                minor: 1.0,
            });
        }
        let beta = ((gamma - 1.0) * (gamma + 1.0)).sqrt();
        Self::new(scale * gamma / beta, scale / beta)
    }

    pub fn major_radius(&self) -> f64 {
        self.major
    }

    pub fn minor_radius(&self) -> f64 {
        self.minor
    }

    /// Focal scale `a`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    /// `sinh η₀`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `cosh η₀`, which equals the aspect ratio `R/d`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn to_cartesian(&self, pt: &ToroidalPoint) -> Result<CartesianPoint, GeometryError> {
        let denom = denominator(pt)?;
        let radial = self.scale * pt.eta.sinh() / denom;
        Ok(CartesianPoint {
            x: radial * pt.phi.cos(),
            y: radial * pt.phi.sin(),
            z: self.scale * pt.theta.sin() / denom,
        })
    }

    /// Scale factors `h₁ = h₂ = a/(cosh η − cos θ)`, `h₃ = h₁ sinh η`, and the
    /// volume density `a³ sinh η / (cosh η − cos θ)³`.
    pub fn metric(&self, pt: &ToroidalPoint) -> Result<MetricFactors, GeometryError> {
        let denom = denominator(pt)?;
        let h1 = self.scale / denom;
        let sinh = pt.eta.sinh();
        Ok(MetricFactors {
            h1,
            h2: h1,
            h3: h1 * sinh,
            volume_density: self.scale.powi(3) * sinh / denom.powi(3),
        })
    }

    /// Point of the knot at total azimuthal angle `phi`.
    pub fn knot_point(&self, phi: f64, winding: &KnotWinding) -> CartesianPoint {
        let pt = ToroidalPoint {
            eta: self.eta0,
            theta: wrap_angle(winding.alpha() * phi),
            phi: phi.rem_euclid(2.0 * PI),
        };
        // η₀ > 0, so the denominator cannot vanish.
        self.to_cartesian(&pt)
            .expect("points on the torus surface are regular")
    }

    /// Profile function `f(φ) = a² / (γ − cos αφ)²`.
    pub fn profile(&self, phi: f64, winding: &KnotWinding) -> f64 {
        let s = self.gamma - (winding.alpha() * phi).cos();
        self.scale * self.scale / (s * s)
    }

    /// First derivative `f'(φ)`.
    pub fn profile_derivative(&self, phi: f64, winding: &KnotWinding) -> f64 {
        let alpha = winding.alpha();
        let s = self.gamma - (alpha * phi).cos();
        -2.0 * self.scale * self.scale * alpha * (alpha * phi).sin() / (s * s * s)
    }

    /// Effective mass `M = m (α² + β²)`.
    pub fn effective_mass(&self, mass: f64, winding: &KnotWinding) -> f64 {
        let alpha = winding.alpha();
        mass * (alpha * alpha + self.beta * self.beta)
    }
}

fn denominator(pt: &ToroidalPoint) -> Result<f64, GeometryError> {
    let denom = pt.eta.cosh() - pt.theta.cos();
    if denom <= 0.0 {
        Err(GeometryError::SingularPoint)
    } else {
        Ok(denom)
    }
}

/// Reduce an angle into `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Coprime winding numbers of a torus knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KnotWinding {
    p: i64,
    q: i64,
}

impl KnotWinding {
    pub fn new(p: i64, q: i64) -> Result<Self, GeometryError> {
        if p == 0 || q == 0 {
            return Err(GeometryError::ZeroWinding { p, q });
        }
        if gcd(p.unsigned_abs(), q.unsigned_abs()) != 1 {
            return Err(GeometryError::NotCoprime { p, q });
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// `α = −q/p`.
    pub fn alpha(&self) -> f64 {
        -(self.q as f64) / (self.p as f64)
    }

    /// Azimuthal angle swept by one full circuit of the knot, `2π|p|`.
    pub fn circuit_angle(&self) -> f64 {
        2.0 * PI * self.p.unsigned_abs() as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToroidalPoint {
    pub eta: f64,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CartesianPoint {
    pub fn distance(&self, other: &CartesianPoint) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2))
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricFactors {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub volume_density: f64,
}
