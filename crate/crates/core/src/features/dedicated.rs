//! The 9 features of the dedicated/shared classifier.
//!
//! g1-g5 reuse the stage-1 semantics (name counts, owner and WHOIS record
//! counts). g6-g9 measure churn of the daily hosted-apex set over a 60-day
//! window and per-apex hosting durations in years.

use thiserror::Error;

use crate::datamodel::{IpV4, SECONDS_PER_DAY, SECONDS_PER_YEAR};
use crate::ingest::{PdnsStore, WhoisStore};
use crate::scalar::Scalar;
use crate::stats;

use super::hosting::{resolution_counts, whois_history_features};

pub const DEFAULT_WINDOW_DAYS: u32 = 60;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChurnError {
    #[error("churn window must cover at least 2 days, got {0}")]
    WindowTooSmall(u32),
}

/// Daily churn over the `window_days` UTC days ending at `reference`.
///
/// For consecutive days t-1, t the churn is the size of the symmetric
/// difference of the hosted apex sets, yielding `window_days - 1` values.
pub fn daily_churn_series(
    store: &PdnsStore,
    ip: IpV4,
    reference: i64,
    window_days: u32,
) -> Result<Vec<u64>, ChurnError> {
    if window_days < 2 {
        return Err(ChurnError::WindowTooSmall(window_days));
    }
    let last_day = reference.div_euclid(SECONDS_PER_DAY);
    let first_day = last_day - i64::from(window_days) + 1;
    let sets = store.daily_apex_sets(ip, first_day..=last_day);
    Ok(sets
        .windows(2)
        .map(|pair| pair[0].symmetric_difference(&pair[1]).count() as u64)
        .collect())
}

/// g6/g7: mean and population standard deviation of a churn series.
pub fn churn_stats<R: Scalar>(series: &[u64]) -> Result<(R, R), ChurnError> {
    if series.is_empty() {
        return Err(ChurnError::WindowTooSmall(1));
    }
    let values: Vec<R> = series.iter().map(|v| R::from_u64(*v).expect("churn fits scalar")).collect();
    Ok((stats::mean(&values), stats::pop_std(&values)))
}

/// g8/g9: mean and population standard deviation, in years, of per-apex
/// hosting durations on `ip`. Duration of an apex is the span from its
/// earliest first-seen to its latest last-seen across records on this IP.
pub fn duration_stats(store: &PdnsStore, ip: IpV4) -> (f64, f64) {
    use std::collections::BTreeMap;
    let mut spans: BTreeMap<&str, (i64, i64)> = BTreeMap::new();
    for rec in store.records(ip) {
        let apex = match rec.name.tld2() {
            Some(a) => a,
            None => continue,
        };
        spans
            .entry(apex)
            .and_modify(|(first, last)| {
                *first = (*first).min(rec.time_first);
                *last = (*last).max(rec.time_last);
            })
            .or_insert((rec.time_first, rec.time_last));
    }
    if spans.is_empty() {
        return (0.0, 0.0);
    }
    let durations: Vec<f64> = spans
        .values()
        .map(|(first, last)| (last - first) as f64 / SECONDS_PER_YEAR)
        .collect();
    (stats::mean(&durations), stats::pop_std(&durations))
}

/// The assembled 9-feature vector of the stage-2 classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DedicatedFeatures {
    pub g1_num_tld2: u64,
    pub g2_num_tld3: u64,
    pub g3_num_domains: u64,
    pub g4_num_owners: u64,
    pub g5_num_whois: u64,
    pub g6_avg_daily_churn: f64,
    pub g7_std_daily_churn: f64,
    pub g8_avg_duration: f64,
    pub g9_std_duration: f64,
}

pub const DEDICATED_SCHEMA: [&str; 9] = [
    "g1_num_tld2",
    "g2_num_tld3",
    "g3_num_domains",
    "g4_num_owners",
    "g5_num_whois",
    "g6_avg_daily_churn",
    "g7_std_daily_churn",
    "g8_avg_duration",
    "g9_std_duration",
];

impl DedicatedFeatures {
    pub fn to_row<R: Scalar>(&self) -> Vec<R> {
        let c = |v: u64| R::from_u64(v).expect("count fits scalar");
        let f = |v: f64| R::from_f64_(v);
        vec![
            c(self.g1_num_tld2),
            c(self.g2_num_tld3),
            c(self.g3_num_domains),
            c(self.g4_num_owners),
            c(self.g5_num_whois),
            f(self.g6_avg_daily_churn),
            f(self.g7_std_daily_churn),
            f(self.g8_avg_duration),
            f(self.g9_std_duration),
        ]
    }
}

/// Assemble the full stage-2 vector for one hosting IP.
pub fn extract_dedicated_features(
    pdns: &PdnsStore,
    whois: &WhoisStore,
    ip: IpV4,
    reference: i64,
    window_days: u32,
) -> Result<DedicatedFeatures, ChurnError> {
    let (g1, g2, g3) = resolution_counts(pdns, ip);
    let w = whois_history_features(whois, ip, reference);
    let churn = daily_churn_series(pdns, ip, reference, window_days)?;
    let (g6, g7) = churn_stats::<f64>(&churn)?;
    let (g8, g9) = duration_stats(pdns, ip);
    Ok(DedicatedFeatures {
        g1_num_tld2: g1,
        g2_num_tld3: g2,
        g3_num_domains: g3,
        g4_num_owners: w.num_owners,
        g5_num_whois: w.num_whois,
        g6_avg_daily_churn: g6,
        g7_std_daily_churn: g7,
        g8_avg_duration: g8,
        g9_std_duration: g9,
    })
}
