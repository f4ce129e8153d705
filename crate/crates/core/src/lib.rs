//! Procedurally generated invention problems in five domains, played
//! through a black-box scoring protocol.
//!
//! Scorers are generic over [`Scalar`]; the aliases below fix the common
//! choices.

pub mod agents;
pub mod dessert;
pub mod error;
pub mod generate;
pub mod harness;
pub mod image;
pub mod language;
pub mod lcs;
pub mod narrative;
pub mod painting;
pub mod photobash;
pub mod protocol;
pub mod rng;
pub mod scalar;
pub mod suite;

use num_rational::Ratio;

/// Floating-point score as reported to agents.
pub type Score = f64;
/// Single-precision score.
pub type Score32 = f32;
/// Exact score for oracle comparisons.
pub type ExactScore = Ratio<i64>;

pub use agents::{Agent, GaConfig, RunRecord};
pub use error::{GenerationError, ProtocolError, SuiteError};
pub use generate::GenParams;
pub use harness::{normalize, Results};
pub use image::CanvasSize;
pub use protocol::{open_session, Domain, DomainKind, Problem, RefId, Session, DEFAULT_BUDGET};
pub use scalar::Scalar;
pub use suite::{AnyProblem, Manifest, Suite};
