//! Per-IP feature extraction.
//!
//! `hosting` computes the 16-feature vector behind the hosting/non-hosting
//! classifier; `dedicated` computes the 9-feature vector behind the
//! dedicated/shared classifier. Extraction is pure over immutable stores,
//! so callers may fan out across IPs freely.

pub mod csv;
pub mod dedicated;
pub mod hosting;

pub use csv::{read_features_csv, ParsedFeatureCsv};
pub use dedicated::{
    daily_churn_series, churn_stats, duration_stats, extract_dedicated_features, DedicatedFeatures,
    ChurnError, DEFAULT_WINDOW_DAYS,
};
pub use hosting::{
    extract_hosting_features, prefix_stats, resolution_counts, whois_history_features,
    HostingFeatures, PrefixStats, WhoisFeatures, EMPTY_HISTORY_YEARS,
};
