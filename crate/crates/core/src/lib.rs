//! Agreement analysis for user-elicitation studies.
//!
//! * [`metrics`]: Jaccard / cosine similarity on packed binary description
//!   vectors, the hard agreement rate (AR) over equivalence groupings, the
//!   soft agreement rate (SAR) over description vectors, the one-hot
//!   embedding under which SAR reduces to AR, and the eta interpretation.
//! * [`nullsim`]: seeded, thread-count-independent Monte-Carlo estimation
//!   of the SAR distribution for random Bernoulli descriptions.
//! * [`study`]: taxonomy / dataset / report file formats and the report
//!   generator.

pub mod metrics;
pub mod nullsim;
pub mod study;
