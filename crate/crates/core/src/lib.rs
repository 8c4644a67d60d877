//! Unified quantum resource measures on finite-dimensional bipartite states.
//!
//! The crate evaluates basis-dependent discord (the resource that vanishes
//! exactly on incoherent-quantum states for a fixed local basis on `A`) and
//! derives coherence, discord and entanglement from it:
//!
//! - coherence of `rho_A` is the basis-dependent discord of `rho_A (x) rho_B`;
//! - discord minimizes basis-dependent discord over local unitaries on `A`;
//! - entanglement is the convex roof of that discord over pure-state
//!   decompositions.
//!
//! It also computes the Devetak-Winter key rate, whose `S(Z_A|E)` term equals
//! the relative-entropy basis-dependent discord.
//!
//! All entropies are in bits. Bipartite states use the flat index
//! `j_A * d_B + j_B`.

pub mod acceptance;
pub mod channel;
pub mod error;
pub mod factory;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod optimizer;
pub mod qkd;
pub mod state;
pub mod suites;

pub use channel::{IncoherentUnitary, KrausChannel, SqiChannel};
pub use error::{Error, Result};
pub use factory::{FreeStateClass, RandomSpec, Sampler};
pub use linalg::{eig_hermitian, ComplexMatrix, SpectralDecomposition, C64};
pub use measures::{MeasureKind, MeasureResult};
pub use optimizer::{BoundType, OptimizationOutcome, OptimizerConfig, PureDecomposition};
pub use qkd::{KeyRateReport, QkdSetup};
pub use state::{BipartiteState, DensityMatrix, PureStateVector, Subsystem};
