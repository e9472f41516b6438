//! Pulsed photoassociation of ultracold atom pairs into weakly bound
//! molecules, and the field-free alignment of the molecules formed.
//!
//! Units at the interfaces: MHz (as E/h), ns, bohr, W/cm², debye and amu.
//! Internally the radial problem runs in atomic units.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angmom;
pub mod basis;
pub mod channel;
pub mod config;
pub mod ensemble;
pub mod experiment;
pub mod output;
pub mod propagate;
pub mod pulse;
pub mod radial;
pub mod signal;
pub mod sweep;
pub mod system;
pub mod units;
