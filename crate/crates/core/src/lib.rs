//! Classical motion and quantum spectra of a particle confined to a
//! `(p, q)` torus knot, with flux threading the torus.
//!
//! - [`geometry`]: toroidal coordinates, knot curves, the speed profile `f(φ)`.
//! - [`classical`]: closed-form and integrated trajectories.
//! - [`spectral`]: the reduced Hill problem, its Floquet-matrix solution and
//!   the thin-torus analytic references.
//! - [`flux`]: twisted boundary conditions from enclosed flux.
//! - [`cli`]: configuration, commands and tabular export for the `knotqm`
//!   binary.

pub mod classical;
pub mod cli;
pub mod flux;
pub mod geometry;
pub mod ode;
pub mod spectral;
