//! Gradient-flow machinery for the 1D nonlocal transport model
//!
//! ```text
//! u_t + (H(u) u)_x = ν u_xx        on the circle S¹ = R / 2πZ,
//! ```
//!
//! where `H` is the periodic Hilbert transform.  The equation is the
//! Wasserstein gradient flow of the free energy
//!
//! ```text
//! F_ν[μ] = ν ∫ μ log μ dx + c ∬ W(x−y) dμ(x) dμ(y),
//! W(x)   = −(1/π) log|sin(x/2)|,
//! ```
//!
//! and this crate provides everything needed to run and interrogate the
//! minimizing-movement (JKO) time discretization of that flow:
//!
//! * [`measure`] — periodic probability measures in the equal-mass-cell
//!   (quantile) representation, plus atomic and grid-density views.
//! * [`circot`] — the periodic 2-Wasserstein distance, optimal plans,
//!   constant-speed and generalized geodesics, and independent
//!   assignment-problem oracles.
//! * [`energy`] — entropy, the singular interaction functional, the full
//!   free energy, the periodic Hilbert transform and the weak-form residual
//!   of the PDE.
//! * [`jko`] — the implicit Euler (JKO) scheme, its inner optimizer, the
//!   flow driver, and diagnostics for energy decay, contraction, the
//!   a-priori error bound and the inviscid limit.
//! * [`spectral`] — an independent Eulerian pseudospectral solver for the
//!   viscous equation, used for cross-validation and to exhibit the
//!   concentration scenario the measure framework continues past.
//!
//! The crate is `no_std`-compatible (with `alloc`); all floating point
//! transcendentals route through `num-traits`/`libm` when the `std` feature
//! is disabled.  Everything here is pure computation over immutable values —
//! file formats, configuration and the CLI live in the companion
//! `circleflow` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod circot;
pub mod energy;
mod fft;
pub mod jko;
pub mod measure;
pub mod spectral;

pub use circot::{dper2, dper2_oracle, dper2_quantile, generalized_geodesic, geodesic, TransportPlan};
pub use energy::{entropy, free_energy, interaction, kernel_w, EnergyReport, InteractionCoeff};
pub use jko::{evolve, jko_step, minimizer, FlowTrajectory, InnerConfig, SolverConfig};
pub use measure::{point_dist, wrap, AtomMeasure, CellMeasure, GridDensity, InitialData};
pub use spectral::{spectral_evolve, SpectralOutcome, SpectralRun};

/// Full circle, in radians.
pub const TAU: f64 = 2.0 * core::f64::consts::PI;

pub(crate) mod sum {
    /// Pairwise (tree) reduction.  Deterministic regardless of chunking and
    /// more accurate than naive left-to-right accumulation on long sums.
    pub fn pairwise(xs: &[f64]) -> f64 {
        if xs.len() <= 32 {
            let mut acc = 0.0;
            for &x in xs {
                acc += x;
            }
            acc
        } else {
            let mid = xs.len() / 2;
            pairwise(&xs[..mid]) + pairwise(&xs[mid..])
        }
    }
}
