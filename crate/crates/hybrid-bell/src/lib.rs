//! Simulator and analysis toolkit for a hybrid path-polarization Bell test.
//!
//! Photon A's path degree of freedom is entangled with photon B's
//! polarization. The crate models the full optical table (PBS, in-line
//! polarization controllers, phase scanner, fiber beam splitter, waveplate
//! and polarizers), generates Poisson-distributed detection counts, and runs
//! the CHSH analysis pipeline: fringe fits, calibration, correlation
//! coefficients, the S parameter with Poissonian error bars, and a
//! local-hidden-variable baseline for the classical bound.
//!
//! Module map:
//! - [`qcore`]: dense complex linear algebra for few-qubit states
//! - [`optics`]: operator constructors for every optical element
//! - [`apparatus`]: the assembled experiment, exact outcome probabilities
//! - [`trials`]: Poisson count sampling, scan timeline, CSV persistence
//! - [`analysis`]: fits, calibration, correlation coefficients, CHSH S
//! - [`lhv`]: local-hidden-variable strategies and sampling
//! - [`config`]: run configuration shared with the CLI

pub mod analysis;
pub mod apparatus;
pub mod config;
pub mod lhv;
pub mod optics;
pub mod qcore;
pub mod trials;
