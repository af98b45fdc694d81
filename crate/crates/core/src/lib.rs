//! Event-by-event simulation engines for quantum-phenomenon statistics.
//!
//! The crate generates detection events one at a time — no wave equation is
//! solved anywhere. Each simulated experiment is a pipeline of simple message
//! processors: a source emits one messenger at a time, the messenger carries a
//! phase vector or a spinor, components transform or route it, and a detector
//! turns it into a click (or not). Interference fringes, EPRB/CHSH
//! correlations and neutron spin–path correlations emerge from the event
//! statistics alone.
//!
//! Modules:
//!
//! * [`stream`] — deterministic `(seed, stream_id)`-addressed random streams.
//! * [`types`] — angles, phase vectors, spinor messages.
//! * [`dlm`] — the learning-machine components: adaptive threshold detector
//!   and event-based beam splitter.
//! * [`twobeam`] — two-source interference on a semicircular detector screen.
//! * [`eprb`] — paired-photon experiment with polarizer settings and time tags.
//! * [`analysis`] — coincidence counting, correlations, CHSH, window sweeps,
//!   fringe fitting.
//! * [`eprb_oracle`] — deterministic quadrature of the probabilistic model
//!   behind the EPRB engine, used as an independent cross-check.
//! * [`neutron`] — single-neutron interferometer with spin analysis.

pub mod analysis;
pub mod dlm;
pub mod eprb;
pub mod eprb_oracle;
mod error;
pub mod neutron;
pub mod stream;
pub mod twobeam;
pub mod types;

pub use error::{Error, Result};
pub use stream::RngStream;
pub use types::{Angle, SpinorMessage, UnitVec2};
