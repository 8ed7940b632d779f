//! Optimal probability of guessing `X` from encoded side information `φ(Y)`,
//! the mutual information `I(X; φ(Y))`, and upper bounds on the former in
//! terms of an information spectrum and of the latter.
//!
//! Modules:
//! * [`dist`]: joint tables, marginals, conditionals, information measures.
//! * [`encoders`]: encoders, estimators, exact evaluation and MAP rules.
//! * [`search`]: exact and heuristic optimization over encoders.
//! * [`bounds`]: the bounds and every intermediate quantity, evaluated.
//! * [`harness`]: instance files, random instances, sweeps and reports.

pub mod bounds;
pub mod dist;
pub mod encoders;
pub mod error;
pub mod harness;
pub mod search;

pub use bounds::{BoundReport, SetMasses};
pub use dist::{make_joint, CondDist, InfoValue, JointDist};
pub use encoders::{EvalResult, Encoder, Estimator};
pub use error::{Error, Result};
pub use search::{CaseOptima, SearchResult};
