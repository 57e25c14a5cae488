//! Continuous-time Markov chain models of reaction networks, exact path
//! simulation, and parametric sensitivity estimation.
//!
//! A network's state `X(t) ∈ Z^d` changes by `ζ_k` when channel `k` fires,
//! which it does at rate `λ_k(X(t))`. Paths are built from unit-rate Poisson
//! processes in internal time,
//!
//! ```text
//! X(t) = X(0) + Σ_k Y_k( ∫_0^t λ_k(X(s)) ds ) ζ_k,
//! ```
//!
//! and the sensitivity `d/dθ E f(X(T))` is estimated by finite differences
//! over coupled path pairs ([`estimators::estimate_fd`]) or by the
//! likelihood-ratio method ([`estimators::estimate_girsanov`]).
//!
//! Modules:
//! * [`model`]: networks, propensity expressions and the model-file parser;
//! * [`streams`]: seeded unit-rate Poisson processes;
//! * [`sim`]: single-path simulators and the coupled-pair generators;
//! * [`estimators`]: sensitivity estimators and variance traces;
//! * [`oracle`]: moment equations, uniformization and closed forms;
//! * [`presets`]: the bundled benchmark models.

pub mod estimators;
pub mod model;
pub mod oracle;
pub mod presets;
pub mod sim;
pub mod streams;
