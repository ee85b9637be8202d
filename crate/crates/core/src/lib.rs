//! Exact max-plus algebra with spectral analysis, and a synchronization
//! analyzer for two circular transport routes that meet at one station.
//!
//! * [`scalar`] and [`matrix`]: the semiring `R ∪ {-inf}` with ⊕ = max and
//!   ⊗ = +, over exact rationals.
//! * [`spectral`]: precedence graphs, irreducibility, maximum cycle mean
//!   (Karp, plus the trace formula as an independent check), cyclicity and
//!   transient.
//! * [`network`]: system matrices for the unsynchronized, fully synchronized
//!   and partially synchronized timetables, and the fast shuttle loop.
//! * [`waiting`]: waiting-time tables, critical remainders, regimes and the
//!   rule recommendation.
//! * [`simulator`]: iterates `X(k+1) = A ⊗ X(k)` to produce departure times.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod matrix;
pub mod network;
pub mod scalar;
pub mod simulator;
pub mod spectral;
pub mod waiting;

pub use error::{Error, Result};
pub use matrix::MaxPlusMatrix;
pub use network::{ModelKind, NetworkConfig, SyncModel};
pub use scalar::{MaxPlusScalar, Rational};
pub use simulator::EventTrajectory;
pub use spectral::{SpectralSummary, Transient};
pub use waiting::{CriticalParams, DemandProfile, Journey, Regime, Rule, WaitingTables};
