//! Call admission control laboratory for a pooled multi-class wireless cell.
//!
//! The crate is split along the lines of the experiment:
//!
//! - [`traffic`]: traffic classes, system configuration and the exponential samplers.
//! - [`markov`]: the reduced blocking recurrence, Erlang-B and an exact CTMC oracle.
//! - [`policies`]: the admission abstraction plus the threshold and fuzzy baselines.
//! - [`rrbfn`]: the recurrent radial-basis-function network and the controller built on it.
//! - [`simengine`]: a seeded discrete-event loss-system simulator.

pub mod error;
pub mod markov;
pub mod policies;
pub mod rrbfn;
pub mod simengine;
pub mod traffic;

pub use error::{CacError, Result};
