//! Kuramoto oscillator networks as reservoir computers.
//!
//! The crate drives a network of phase oscillators with a multivariate input
//! signal, trains a linear readout by ridge regression on trigonometric
//! features of the phases, and then closes the loop so the network runs
//! autonomously and emulates the target system. The analysis side provides
//! order-parameter return maps, Lyapunov spectra via the variational
//! equations, rotation numbers and parameter sweeps.
//!
//! All mean-field sums use a fixed ascending-index summation order so that
//! runs are bit-reproducible for a given configuration and seed.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod esn;
pub mod graph;
pub mod integrate;
pub mod linalg;
pub mod meanfield;
pub mod pipeline;
pub mod readout;
pub mod rng;
pub mod tasks;

pub use dynamics::{
    ComplexOrder, InputAssignment, InteractionSpec, NaturalFrequencies, PhaseVector,
    ReservoirConfig,
};
pub use error::{Error, Result};
pub use pipeline::{RunOutcome, TrainedReservoir};
pub use readout::{ReadoutSpec, ReadoutWeights};
pub use tasks::SignalSeries;
