//! Classifies IP addresses by hosting type in two stages: hosting vs.
//! non-hosting, then (for hosting IPs) shared vs. dedicated.
//!
//! Inputs are file-based corpora of passive-DNS resolutions, historical
//! IP-WHOIS snapshots and an IP-to-ASN database. From these the crate
//! extracts per-IP feature vectors, trains random-forest models, labels
//! ground truth from domain ownership signals, and aggregates verdicts
//! over sets of IPs hosting malicious domains.
//!
//! The numeric core (`forest`, `stats`) is generic over the scalar type
//! via [`Scalar`]; the `*64` aliases below fix `f64` for ordinary use.

pub mod analysis;
pub mod datamodel;
pub mod features;
pub mod forest;
pub mod ingest;
pub mod labeler;
pub mod pipeline;
pub mod scalar;
pub mod seed;
pub mod stats;
pub mod synth;

pub use scalar::Scalar;

/// Concrete `f64` instantiations of the scalar-generic core.
pub type Dataset64 = forest::Dataset<f64>;
pub type ForestModel64 = forest::ForestModel<f64>;
pub type EvalReport64 = forest::EvalReport<f64>;
pub type IpVerdict64 = pipeline::IpVerdict<f64>;
pub type Thresholds64 = pipeline::Thresholds<f64>;
