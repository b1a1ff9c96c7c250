//! Research-assessment analytics built on a lognormal citation model.
//!
//! The crate turns percentile indicators of ranking datasets into the
//! probability that a random publication of an institution reaches the
//! most-cited sliver of world output, and combines that probability
//! with publication counts, highly-cited-researcher lists, and country
//! populations into rankings, period comparisons, and per-capita
//! reports.
//!
//! Module map:
//!
//! * [`citation_model`] — standard-normal machinery, probit-space
//!   fitting, tail extrapolation.
//! * [`world_ranking`] — brute-force percentile counting over explicit
//!   citation lists; the ground-truth oracle for percentile statistics.
//! * [`simulate`] — seeded Monte Carlo validation of the model and the
//!   fitting pipeline.
//! * [`datasets`] — CSV ingestion and validation of institution,
//!   researcher, and population records.
//! * [`analysis`] — assessments, pooling, exclusions, period
//!   comparisons, researcher counts, per-capita ratios, rankings.
//! * [`report`] — display rounding, table renderers, machine-readable
//!   JSON, and distribution-curve emission.

pub mod analysis;
pub mod citation_model;
pub mod datasets;
pub mod report;
pub mod simulate;
pub mod world_ranking;

pub use citation_model::{AssessmentLevel, CitationModel, PercentileObservation};
