//! Simulation of resonantly driven multi-qubit gates on the Polychronakos
//! spin chain.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense Hermitian eigensystems and unitary exponentials.
//! - [`pauli`] and [`model`]: Pauli strings, the chain geometry and the
//!   operators `H_P`, `L_0`, `L_1`, `Q_0`.
//! - [`eigengate`]: unitaries that rotate one operator's eigenbasis onto
//!   another's, by quench or by adiabatic ramp.
//! - [`driving`]: two-level Rabi algebra and the time-ordered propagator of
//!   a cosine drive on a static background.
//! - [`protocol`]: the resonant iSWAP gate between the two extremal states,
//!   with halfway inversion or a phase undo, and its gate error.
//! - [`analysis`]: matrix-element tables, error sweeps, phase diagnostics
//!   and gate-time budgets.
//!
//! ```
//! use polychron::ChainGeometry;
//!
//! let chain = ChainGeometry::calogero(2)?;
//! assert!((chain.positions()[1] - 0.5f64.sqrt()).abs() < 1e-12);
//! # Ok::<(), polychron::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod driving;
pub mod eigengate;
pub mod error;
pub mod linalg;
pub mod model;
pub mod pauli;
pub mod protocol;

pub use error::{Error, Result};
pub use linalg::{CMatrix, EigenSystem, C64};
pub use model::ChainGeometry;
pub use pauli::{Axis, BasisLabel, PauliString};
