//! The 16 features of the hosting/non-hosting classifier.
//!
//! Features 1-8 come from passive DNS (per-IP name counts and /24-prefix
//! statistics); features 9-16 from the 10-year WHOIS history window ending
//! at the caller-supplied reference time.

use crate::datamodel::{IpV4, NetType, SECONDS_PER_YEAR};
use crate::ingest::{PdnsStore, WhoisStore};
use crate::scalar::Scalar;

/// Years-since-update reported for an IP with no WHOIS history at all,
/// chosen to look as stale as the horizon allows.
pub const EMPTY_HISTORY_YEARS: f64 = 10.0;

/// f1-f3: distinct TLD+2 / TLD+3 / fully-qualified names resolved to `ip`.
pub fn resolution_counts(store: &PdnsStore, ip: IpV4) -> (u64, u64, u64) {
    let c = store.resolution_counts(ip);
    (c.tld2, c.tld3, c.fqdn)
}

/// f4-f8, over all 256 addresses of the query IP's /24.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefixStats {
    /// Percentage of prefix addresses with at least one record (0-100).
    pub pct_dns: f64,
    /// Mean per-address distinct-TLD+3 count (zeros included).
    pub mean_tld3: f64,
    pub max_tld3: u64,
    /// Mean per-address distinct-TLD+2 count (zeros included).
    pub mean_tld2: f64,
    pub max_tld2: u64,
}

pub fn prefix_stats(store: &PdnsStore, ip: IpV4) -> PrefixStats {
    let mut populated = 0u64;
    let mut sum_tld3 = 0u64;
    let mut max_tld3 = 0u64;
    let mut sum_tld2 = 0u64;
    let mut max_tld2 = 0u64;
    if let Some(members) = store.prefix_members(ip.prefix24()) {
        for member in members {
            let c = store.resolution_counts(*member);
            populated += 1;
            sum_tld3 += c.tld3;
            max_tld3 = max_tld3.max(c.tld3);
            sum_tld2 += c.tld2;
            max_tld2 = max_tld2.max(c.tld2);
        }
    }
    PrefixStats {
        pct_dns: 100.0 * populated as f64 / 256.0,
        mean_tld3: sum_tld3 as f64 / 256.0,
        max_tld3,
        mean_tld2: sum_tld2 as f64 / 256.0,
        max_tld2,
    }
}

/// f9-f16, over the WHOIS snapshots of `ip` within the store's horizon
/// window ending at `reference`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhoisFeatures {
    pub num_owners: u64,
    pub num_inetnums: u64,
    pub max_inetnum_size: u64,
    pub min_inetnum_size: u64,
    /// Size of the most recently observed snapshot's range.
    pub inetnum_size: u64,
    pub net_type: NetType,
    /// Years from the newest `updated` timestamp to `reference`, >= 0.
    pub years_since_update: f64,
    pub num_whois: u64,
}

pub fn whois_history_features(store: &WhoisStore, ip: IpV4, reference: i64) -> WhoisFeatures {
    let history = store.history(ip, reference);
    if history.is_empty() {
        return WhoisFeatures {
            num_owners: 0,
            num_inetnums: 0,
            max_inetnum_size: 0,
            min_inetnum_size: 0,
            inetnum_size: 0,
            net_type: NetType::Unknown,
            years_since_update: EMPTY_HISTORY_YEARS,
            num_whois: 0,
        };
    }
    let mut owners = std::collections::BTreeSet::new();
    let mut ranges = std::collections::BTreeSet::new();
    let mut max_size = 0u64;
    let mut min_size = u64::MAX;
    let mut newest_update = i64::MIN;
    for snap in &history {
        owners.insert(snap.owner.as_str());
        ranges.insert((snap.range_start, snap.range_end));
        let size = snap.size();
        max_size = max_size.max(size);
        min_size = min_size.min(size);
        newest_update = newest_update.max(snap.updated);
    }
    // history is sorted ascending by observation time
    let latest = history.last().expect("non-empty history");
    WhoisFeatures {
        num_owners: owners.len() as u64,
        num_inetnums: ranges.len() as u64,
        max_inetnum_size: max_size,
        min_inetnum_size: min_size,
        inetnum_size: latest.size(),
        net_type: latest.net_type,
        years_since_update: ((reference - newest_update).max(0)) as f64 / SECONDS_PER_YEAR,
        num_whois: history.len() as u64,
    }
}

/// The assembled 16-feature vector of the stage-1 classifier.
///
/// `f14_net_type` stays categorical here; one-hot expansion into five
/// numeric columns happens at the model boundary ([`HostingFeatures::to_row`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HostingFeatures {
    pub f1_num_tld2: u64,
    pub f2_num_tld3: u64,
    pub f3_num_domains: u64,
    pub f4_pct_dns_in_24: f64,
    pub f5_mean_tld3_in_24: f64,
    pub f6_max_tld3_in_24: u64,
    pub f7_mean_tld2_in_24: f64,
    pub f8_max_tld2_in_24: u64,
    pub f9_num_owners: u64,
    pub f10_num_inetnums: u64,
    pub f11_max_inetnum_size: u64,
    pub f12_min_inetnum_size: u64,
    pub f13_inetnum_size: u64,
    pub f14_net_type: NetType,
    pub f15_years_since_update: f64,
    pub f16_num_whois: u64,
}

/// Column names of the one-hot-expanded stage-1 feature matrix.
pub const HOSTING_SCHEMA: [&str; 20] = [
    "f1_num_tld2",
    "f2_num_tld3",
    "f3_num_domains",
    "f4_pct_dns_in_24",
    "f5_mean_tld3_in_24",
    "f6_max_tld3_in_24",
    "f7_mean_tld2_in_24",
    "f8_max_tld2_in_24",
    "f9_num_owners",
    "f10_num_inetnums",
    "f11_max_inetnum_size",
    "f12_min_inetnum_size",
    "f13_inetnum_size",
    "f14_direct_allocation",
    "f14_direct_assignment",
    "f14_reallocated",
    "f14_reassigned",
    "f14_unknown",
    "f15_years_since_update",
    "f16_num_whois",
];

impl HostingFeatures {
    /// One-hot-expanded numeric row matching [`HOSTING_SCHEMA`].
    pub fn to_row<R: Scalar>(&self) -> Vec<R> {
        let c = |v: u64| R::from_u64(v).expect("count fits scalar");
        let f = |v: f64| R::from_f64_(v);
        let mut row = vec![
            c(self.f1_num_tld2),
            c(self.f2_num_tld3),
            c(self.f3_num_domains),
            f(self.f4_pct_dns_in_24),
            f(self.f5_mean_tld3_in_24),
            c(self.f6_max_tld3_in_24),
            f(self.f7_mean_tld2_in_24),
            c(self.f8_max_tld2_in_24),
            c(self.f9_num_owners),
            c(self.f10_num_inetnums),
            c(self.f11_max_inetnum_size),
            c(self.f12_min_inetnum_size),
            c(self.f13_inetnum_size),
        ];
        for t in NetType::ALL {
            row.push(if self.f14_net_type == t { R::one() } else { R::zero() });
        }
        row.push(f(self.f15_years_since_update));
        row.push(c(self.f16_num_whois));
        row
    }
}

/// Assemble the full stage-1 vector for one IP.
pub fn extract_hosting_features(
    pdns: &PdnsStore,
    whois: &WhoisStore,
    ip: IpV4,
    reference: i64,
) -> HostingFeatures {
    let (f1, f2, f3) = resolution_counts(pdns, ip);
    let p = prefix_stats(pdns, ip);
    let w = whois_history_features(whois, ip, reference);
    HostingFeatures {
        f1_num_tld2: f1,
        f2_num_tld3: f2,
        f3_num_domains: f3,
        f4_pct_dns_in_24: p.pct_dns,
        f5_mean_tld3_in_24: p.mean_tld3,
        f6_max_tld3_in_24: p.max_tld3,
        f7_mean_tld2_in_24: p.mean_tld2,
        f8_max_tld2_in_24: p.max_tld2,
        f9_num_owners: w.num_owners,
        f10_num_inetnums: w.num_inetnums,
        f11_max_inetnum_size: w.max_inetnum_size,
        f12_min_inetnum_size: w.min_inetnum_size,
        f13_inetnum_size: w.inetnum_size,
        f14_net_type: w.net_type,
        f15_years_since_update: w.years_since_update,
        f16_num_whois: w.num_whois,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{parse_domain, PdnsRecord, SuffixList, WhoisSnapshot};
    use crate::ingest::WhoisStore;

    fn rec(name: &str, ip: &str) -> PdnsRecord {
        let suffixes = SuffixList::new(["com"]);
        PdnsRecord::new(
            parse_domain(name, &suffixes).unwrap(),
            ip.parse().unwrap(),
            1_600_000_000,
            1_600_086_400,
            1,
        )
        .unwrap()
    }

    fn store(records: Vec<PdnsRecord>) -> PdnsStore {
        PdnsStore::from_records(records).0
    }

    #[test]
    fn resolution_counts_distinct_names() {
        let ip: IpV4 = "1.2.3.4".parse().unwrap();
        let s = store(vec![rec("a.com", "1.2.3.4"), rec("b.com", "1.2.3.4"), rec("www.a.com", "1.2.3.4")]);
        assert_eq!(resolution_counts(&s, ip), (2, 1, 3));
        assert_eq!(resolution_counts(&s, "9.9.9.9".parse().unwrap()), (0, 0, 0));
    }

    #[test]
    fn prefix_stats_single_populated_address() {
        let ip: IpV4 = "1.2.3.4".parse().unwrap();
        let s = store(vec![rec("a.com", "1.2.3.4")]);
        let p = prefix_stats(&s, ip);
        assert!((p.pct_dns - 100.0 / 256.0).abs() < 1e-12);
        assert_eq!(p.mean_tld3, 0.0);
        assert_eq!(p.max_tld3, 0);
        assert!((p.mean_tld2 - 1.0 / 256.0).abs() < 1e-12);
        assert_eq!(p.max_tld2, 1);
    }

    #[test]
    fn prefix_stats_empty_prefix() {
        let s = store(vec![]);
        let p = prefix_stats(&s, "1.2.3.4".parse().unwrap());
        assert_eq!(p, PrefixStats { pct_dns: 0.0, mean_tld3: 0.0, max_tld3: 0, mean_tld2: 0.0, max_tld2: 0 });
    }

    #[test]
    fn prefix_stats_match_per_address_recount() {
        // brute force over all 256 addresses of the /24
        let mut records = Vec::new();
        for i in 0..40u32 {
            let ip = format!("10.1.1.{}", (i * 7) % 256);
            records.push(rec(&format!("d{}.com", i % 9), &ip));
            records.push(rec(&format!("s{i}.d{}.com", i % 9), &ip));
        }
        let s = store(records.clone());
        let probe: IpV4 = "10.1.1.0".parse().unwrap();
        let got = prefix_stats(&s, probe);

        let mut populated = 0u64;
        let (mut sum2, mut max2, mut sum3, mut max3) = (0u64, 0u64, 0u64, 0u64);
        for last in 0..=255u32 {
            let addr: IpV4 = format!("10.1.1.{last}").parse().unwrap();
            let here: Vec<_> = records.iter().filter(|r| r.ip == addr).collect();
            if here.is_empty() {
                continue;
            }
            populated += 1;
            let t2: std::collections::BTreeSet<_> = here.iter().filter_map(|r| r.name.tld2()).collect();
            let t3: std::collections::BTreeSet<_> = here.iter().filter_map(|r| r.name.tld3()).collect();
            sum2 += t2.len() as u64;
            max2 = max2.max(t2.len() as u64);
            sum3 += t3.len() as u64;
            max3 = max3.max(t3.len() as u64);
        }
        assert!((got.pct_dns - 100.0 * populated as f64 / 256.0).abs() < 1e-12);
        assert!((got.mean_tld2 - sum2 as f64 / 256.0).abs() < 1e-12);
        assert!((got.mean_tld3 - sum3 as f64 / 256.0).abs() < 1e-12);
        assert_eq!(got.max_tld2, max2);
        assert_eq!(got.max_tld3, max3);
    }

    const Y: f64 = SECONDS_PER_YEAR;

    fn snap(start: &str, end: &str, owner: &str, observed: i64, updated: i64) -> WhoisSnapshot {
        WhoisSnapshot::new(
            start.parse().unwrap(),
            end.parse().unwrap(),
            owner,
            NetType::Reallocated,
            updated,
            observed,
        )
        .unwrap()
    }

    #[test]
    fn whois_features_two_snapshot_history() {
        let reference = (21.0 * Y) as i64;
        let s2015 = snap("10.0.0.0", "10.0.0.255", "ownerA", (15.0 * Y) as i64, (15.0 * Y) as i64);
        let s2019 = snap("10.0.0.0", "10.0.3.255", "ownerB", (19.0 * Y) as i64, (19.0 * Y) as i64);
        let store = WhoisStore::from_snapshots(vec![s2019, s2015], 10);
        let w = whois_history_features(&store, "10.0.0.7".parse().unwrap(), reference);
        assert_eq!(w.num_owners, 2);
        assert_eq!(w.num_inetnums, 2);
        assert_eq!(w.max_inetnum_size, 1024);
        assert_eq!(w.min_inetnum_size, 256);
        assert_eq!(w.inetnum_size, 1024);
        assert_eq!(w.num_whois, 2);
        assert!((w.years_since_update - 2.0).abs() < 1e-9);
        assert_eq!(w.net_type, NetType::Reallocated);
    }

    #[test]
    fn whois_features_empty_history_defaults() {
        let store = WhoisStore::from_snapshots(vec![], 10);
        let w = whois_history_features(&store, "10.0.0.7".parse().unwrap(), 0);
        assert_eq!(w.num_owners, 0);
        assert_eq!(w.num_inetnums, 0);
        assert_eq!(w.num_whois, 0);
        assert_eq!((w.max_inetnum_size, w.min_inetnum_size, w.inetnum_size), (0, 0, 0));
        assert_eq!(w.net_type, NetType::Unknown);
        assert_eq!(w.years_since_update, EMPTY_HISTORY_YEARS);
    }

    #[test]
    fn zero_data_vector_satisfies_invariants() {
        let pdns = store(vec![]);
        let whois = WhoisStore::from_snapshots(vec![], 10);
        let f = extract_hosting_features(&pdns, &whois, "8.8.8.8".parse().unwrap(), 1_600_000_000);
        assert_eq!((f.f1_num_tld2, f.f2_num_tld3, f.f3_num_domains), (0, 0, 0));
        assert_eq!(f.f4_pct_dns_in_24, 0.0);
        assert!(f.f3_num_domains >= f.f1_num_tld2.max(f.f2_num_tld3));
        assert!(f.f15_years_since_update >= 0.0);
        let row: Vec<f64> = f.to_row();
        assert_eq!(row.len(), HOSTING_SCHEMA.len());
        // exactly one net-type column is hot
        assert_eq!(row[13..18].iter().sum::<f64>(), 1.0);
        assert_eq!(row[17], 1.0); // unknown
    }

    #[test]
    fn future_update_clamps_to_zero_years() {
        let store = WhoisStore::from_snapshots(vec![snap("10.0.0.0", "10.0.0.3", "o", 100, 500)], 10);
        let w = whois_history_features(&store, "10.0.0.1".parse().unwrap(), 200);
        assert_eq!(w.years_since_update, 0.0);
    }

    #[test]
    fn adding_records_never_decreases_counts() {
        let ip: IpV4 = "1.2.3.4".parse().unwrap();
        let mut records = vec![rec("a.com", "1.2.3.4")];
        let before = resolution_counts(&store(records.clone()), ip);
        records.push(rec("x.b.com", "1.2.3.4"));
        records.push(rec("c.com", "1.2.3.40")); // elsewhere in the /24
        let s = store(records);
        let after = resolution_counts(&s, ip);
        assert!(after.0 >= before.0 && after.1 >= before.1 && after.2 >= before.2);
        let p = prefix_stats(&s, ip);
        assert!(p.pct_dns >= 100.0 / 256.0);
    }
}
