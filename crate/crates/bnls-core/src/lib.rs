//! Fourier-side machinery for the cubic fourth-order nonlinear Schrödinger
//! equation on the circle with rough random data: spectral fields and exact
//! dealiased products, reproducible complex-Gaussian ensembles, truncated
//! flows with deterministic and random gauge transforms, and the space-time
//! functionals (restriction norms, energy increments, iterated Duhamel terms,
//! multilinear Gaussian sums) used to probe them.
//!
//! Everything in this crate is pure computation over owned buffers; IO, the
//! CLI, and the Monte Carlo studies live in the companion `bnls` crate.
//!
//! Conventions: the circle carries the normalized measure `(2π)⁻¹ dx`, so
//! `{e^{inx}}` is orthonormal and Parseval has no `2π` factors. A field is a
//! trigonometric polynomial `u(x) = Σ_{|n|≤N} c_n e^{inx}`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bump;
pub mod conv;
pub mod duhamel;
pub mod fft;
pub mod field;
pub mod flow;
pub mod moments;
pub mod nonlin;
pub mod phase;
pub mod phases;
pub mod random;
pub mod restriction;
pub mod spacetime;
pub mod window;

pub use field::{NormFlavor, NormSpec, Projector, SpectralField};
pub use flow::{FlowError, FlowSpec, FlowVariant, TrajectoryRecord};
pub use phase::PhaseTuple;
pub use random::{GaussianEnsemble, MollifierKind, MollifierSpec};
pub use spacetime::SpaceTimeField;

/// Complex sample type used throughout.
pub type C64 = num_complex::Complex<f64>;
