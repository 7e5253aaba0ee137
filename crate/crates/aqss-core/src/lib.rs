//! Analysis of approximate threshold quantum secret sharing schemes under
//! adversarial attack channels.
//!
//! A `(t, n)` threshold scheme encodes a `q`-dimensional secret into `n`
//! qudit shares. An adversary applies a CPTP attack to all shares; any
//! authorized set `A` (`|A| >= t`) then tries to recover the secret. This
//! crate computes, per authorized set and aggregated:
//!
//! - secrecy leakage `eps = 1 - min_A max_sigma F_dia(Nhat_A, V_sigma)`,
//! - fidelity reconstructability, both by a direct recovery-channel seesaw
//!   and by the complementary-channel dual route,
//! - adversarial strength: the entanglement-assisted capacity `C` and its
//!   Renyi-1/2 variant `Ctilde` of the complementary channels,
//! - two-sided diamond-distance bounds from the fidelity quantities,
//!
//! and cross-checks that all routes agree (the three-way equivalence these
//! quantities satisfy), reporting residuals.
//!
//! The crate is `no_std` + `alloc`: every operation is a pure function on
//! immutable values, and all randomness flows from explicit seeds.
//!
//! # Layout
//!
//! - [`numkernel`]: dense complex matrices, Hermitian eigendecomposition,
//!   PSD functions, norms, partial traces, density-matrix projection.
//! - [`channels`]: Kraus / Choi / Stinespring channel representations and
//!   the complementary-channel construction.
//! - [`qss`]: threshold schemes, attack models, effective channels per
//!   authorized set.
//! - [`divergences`]: sandwiched Renyi divergence, the q-function, mutual
//!   informations, and channel capacities.
//! - [`saddle`]: the convex-concave solvers (extragradient saddle, projected
//!   ascent/descent, CPTP projection, recovery seesaw).
//! - [`analysis`]: top-level secrecy / reconstructability / strength reports
//!   and the equivalence certification.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod channels;
pub mod divergences;
mod error;
pub mod numkernel;
pub mod qss;
pub mod rng;
pub mod saddle;

pub use error::{Error, Result};
pub use numkernel::{CMat, DensityMatrix, HermitianOperator, PureState, C64};
