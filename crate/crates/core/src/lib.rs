//! Physical-layer toolkit for carrying region-local content in a hybrid
//! satellite/terrestrial single frequency network with hierarchical
//! modulation.
//!
//! The satellite and every terrestrial repeater broadcast the same global
//! programme as the quadrant (high-priority) stream of a non-uniform 16-QAM
//! constellation; a terrestrial transmitter that also carries local content
//! adds it as the within-quadrant (low-priority) stream, scaled by the
//! hierarchy parameter alpha. The crate provides:
//!
//! - [`constellation`]: the alpha-parametrized constellation, bit mapping and
//!   hard demapping,
//! - [`pilots`]: OFDM frame layout, the modified continual/scattered pilots
//!   that embed the local-content scale, and user-data-rate arithmetic,
//! - [`channel`]: static complex path gains, hybrid combining and seeded AWGN,
//! - [`receiver`]: joint estimation of the global/local channel gains from
//!   pilot pairs, local-content detection, and two-stage demodulation,
//! - [`link`]: effective Es/N0 analysis, required-C/N tables, BER-curve
//!   synthesis from a QPSK reference, and the equal-coverage alpha solver,
//! - [`sim`]: scenario-driven, seed-reproducible Monte Carlo experiments,
//! - [`cli`]: the `hmsfn` command-line front end.
//!
//! All internal math works on linear power ratios; decibels appear only at
//! I/O boundaries.

pub mod channel;
pub mod cli;
pub mod constellation;
pub mod link;
pub mod pilots;
pub mod receiver;
pub mod sim;
pub mod units;

pub use num_complex::Complex64;

pub use constellation::{Alpha, AlphaError, ConstellationPoint, HardDecision, SymbolBits};
pub use units::{db_to_linear, linear_to_db};
