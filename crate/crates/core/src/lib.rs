//! Simulation and verification toolkit for distributed linear cross-entropy
//! heavy-output generation (DXHOG).
//!
//! Alice holds a Haar-random `n`-qubit state, Bob a random Clifford
//! measurement; they must output bitstrings with high linear cross-entropy
//! score. This crate provides:
//!
//! * a dense statevector simulator over the `U3`/`ZZ`/Clifford gate set
//!   ([`state`], [`gate`], [`circuit`], [`haar`]);
//! * uniform random stabilizer sampling in X–H–S–CZ–H measurement form
//!   ([`stabilizer`], [`gf2`]);
//! * exact evaluation of the classical communication lower and upper bounds
//!   ([`bounds`], [`special`]);
//! * brickwork variational state preparation under a gate-counting noise
//!   model ([`variational`]);
//! * end-to-end trials, XEB statistics, certification and the classical
//!   codebook baseline ([`protocol`]).

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod circuit;
pub mod config;
pub mod error;
pub mod gate;
pub mod gf2;
pub mod haar;
pub mod protocol;
pub mod rng;
pub mod special;
pub mod stabilizer;
pub mod state;
pub mod stats;
pub mod variational;

pub use circuit::{apply_circuit, Circuit};
pub use error::{Error, Result};
pub use gate::{apply_gate, Gate};
pub use rng::RandomStream;
pub use state::{inner_product, StateVector};
