//! Finite-sample upper confidence bounds for the largest prevalence among
//! unobserved categories (`M_max`) under the Bernoulli incidence model.
//!
//! The bounded-alphabet bounds live in [`bounded`], the summable-class bound in
//! [`unbounded`]. [`selector`] picks between them, [`stopping`] turns either
//! into a sequential sampling rule, and [`oracles`] holds exact constructions
//! used to check tightness.

pub mod bounded;
pub mod error;
pub mod estimators;
pub mod lambert;
pub mod model;
pub mod oracles;
pub mod rng;
pub mod sampler;
pub mod selector;
pub mod stopping;
pub mod unbounded;

pub use error::{Error, Result};
pub use model::{
    sample_stats, BoundEstimate, BoundMethod, Diagnostic, IncidenceMatrix, IncidenceSample, PrevalenceKind,
    PrevalenceModel, SampleStats,
};
pub use rng::SeededStream;
