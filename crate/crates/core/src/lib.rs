//! reconlab: a desk-scale simulation laboratory for reconstruction-security
//! games.
//!
//! The crate wires together four ingredient families and measures, by seeded
//! Monte Carlo estimation cross-checked against exact enumeration oracles,
//! whether concrete mechanisms satisfy or violate a family of
//! extraction-safety definitions:
//!
//! * priors over data distributions ([`prior`]): the Tardos fingerprinting
//!   prior, the uniform hypercube, random finite supports, and a spiked
//!   variant with a heavy atom;
//! * release mechanisms ([`mechanisms`]): exact column averages, Laplace-noised
//!   averages, XOR parity compression, and the information-free bot release;
//! * attacks and side information ([`attackers`]): rounding, prefix
//!   subtraction, two-candidate inner-product tests, parity-fit membership
//!   inference, and superset lookup;
//! * success predicates ([`relations`]) and the surprisal gate
//!   ([`surprisal`]) that discounts reconstructions already encoded in the
//!   attacker's side information.
//!
//! The [`estimator`] module runs the games with Wilson-interval verdicts, the
//! [`oracle`] module recomputes tiny instances exactly, and [`scenario`] /
//! [`config`] / [`report`] form the experiment runner behind the `reconlab`
//! binary.

pub mod attackers;
pub mod bits;
pub mod config;
pub mod error;
pub mod estimator;
pub mod mechanisms;
pub mod oracle;
pub mod prior;
pub mod relations;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod surprisal;

pub use bits::{BitMatrix, BitVector, RealVector};
pub use error::{Error, Result};
