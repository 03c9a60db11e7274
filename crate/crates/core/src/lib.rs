//! Few-qubit open-system dynamics under local noise.
//!
//! `entflow` simulates registers of a handful of qubits coupled qubit-by-qubit
//! to single-qubit environments through dephasing and amplitude-damping
//! channels, and tracks how correlations move between system and
//! environment while the noise acts.
//!
//! The crate is organised bottom-up:
//!
//! - [`qmath`]: dense complex matrices, partial traces and transposes, Hermitian
//!   spectra.
//! - [`states`]: pure and mixed states, the named two-qubit families and
//!   local-unitary encodings.
//! - [`channels`]: Kraus channels, their single-qubit dilations and joint
//!   system–environment evolution.
//! - [`measures`]: entropies, total correlations, concurrence, negativity,
//!   singlet fraction.
//! - [`dynamics`]: sweeps over the noise strength `p`, the correlation-flow
//!   ledger, ordering checks and crossing search.
//! - [`encoder`]: search for the local unitaries that make a state most robust.
//! - [`circuits`]: gate-level simulation of the damping circuits plus simulated
//!   tomography with readout errors and mitigation.
//! - [`report`]: CSV trajectory tables and the figure data sets.
//!
//! Data-parallel loops (p sweeps, multi-start grids, tomography settings) run on
//! rayon when the `parallel` feature is enabled and fall back to plain
//! iterators otherwise. Results never depend on the execution strategy.
//!
//! ```
//! use entflow::{channels, measures, states};
//!
//! let bell = states::make_phi_gamma(0.0).density_matrix();
//! let noisy = channels::apply_product_channel(
//!     &bell,
//!     &[channels::amplitude_damping(0.4)?, channels::amplitude_damping(0.4)?],
//! )?;
//! let c = measures::concurrence(&noisy)?;
//! assert!((c - 0.36).abs() < 1e-12);
//! # Ok::<(), entflow::Error>(())
//! ```

pub mod channels;
pub mod circuits;
pub mod dynamics;
pub mod encoder;
mod error;
pub mod measures;
pub mod optim;
pub mod par;
pub mod qmath;
pub mod report;
pub mod states;

pub use error::{Error, Result};
pub use par::Exec;
