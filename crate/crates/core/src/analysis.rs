//! Measurement aggregates over classified IPs hosting malicious domains:
//! hosting-type splits, per-IP domain distributions with empirical CDFs,
//! and per-provider rankings.
//!
//! The malicious unit throughout is the apex (TLD+2); URL- or
//! subdomain-level feed entries collapse to their apex at filter time.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::{parse_domain, IpV4, SuffixList};
use crate::ingest::{for_each_json_line, AsnDb, IngestError, LoadStats, PdnsStore};
use crate::pipeline::{IpVerdict, Stage1Decision, Stage2Decision};
use crate::scalar::Scalar;
use crate::stats;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no verdict for {0} IPs hosting malicious domains, first missing: {1}")]
    MissingVerdicts(usize, IpV4),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Deduplicated malicious apexes plus the feed threshold they came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaliciousDomainSet {
    pub apexes: BTreeSet<String>,
    pub min_positives: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct VtLine {
    domain: String,
    positives: u32,
}

pub fn vt_line(domain: &str, positives: u32) -> String {
    serde_json::to_string(&VtLine { domain: domain.to_string(), positives }).expect("serializes")
}

/// Keep apexes of feed domains detected by at least `min_positives`
/// scanners. Domains without an apex (bare suffixes) count as malformed.
pub fn filter_vt_feed_reader<R: Read>(
    reader: R,
    path: &str,
    min_positives: u32,
    suffixes: &SuffixList,
    strict: bool,
) -> Result<(MaliciousDomainSet, LoadStats), IngestError> {
    let mut stats = LoadStats::default();
    let mut apexes = BTreeSet::new();
    stats.lines = for_each_json_line::<VtLine, _, _, _>(
        reader,
        path,
        strict,
        |_, line| {
            if line.positives < min_positives {
                return Ok(());
            }
            let name = parse_domain(&line.domain, suffixes).map_err(|e| e.to_string())?;
            let apex = name
                .tld2()
                .ok_or_else(|| format!("{} has no registered domain", name.as_str()))?;
            apexes.insert(apex.to_string());
            Ok(())
        },
        |_, _| stats.malformed += 1,
    )?;
    stats.loaded = apexes.len() as u64;
    Ok((MaliciousDomainSet { apexes, min_positives }, stats))
}

pub fn filter_vt_feed(
    path: &Path,
    min_positives: u32,
    suffixes: &SuffixList,
    strict: bool,
) -> Result<(MaliciousDomainSet, LoadStats), IngestError> {
    let file = std::fs::File::open(path)
        .map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
    filter_vt_feed_reader(file, &path.display().to_string(), min_positives, suffixes, strict)
}

/// Malicious apexes per hosting IP; apexes never seen in passive DNS land
/// in `unresolved`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResolvedMalicious {
    pub by_ip: BTreeMap<IpV4, BTreeSet<String>>,
    pub unresolved: BTreeSet<String>,
}

pub fn resolve_malicious(pdns: &PdnsStore, mal: &MaliciousDomainSet) -> ResolvedMalicious {
    let mut resolved = ResolvedMalicious::default();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for ip in pdns.ips() {
        for rec in pdns.records(ip) {
            if let Some(apex) = rec.name.tld2() {
                if mal.apexes.contains(apex) {
                    resolved.by_ip.entry(ip).or_default().insert(apex.to_string());
                    seen.insert(apex);
                }
            }
        }
    }
    for apex in &mal.apexes {
        if !seen.contains(apex.as_str()) {
            resolved.unresolved.insert(apex.clone());
        }
    }
    resolved
}

/// Decided-IP splits at both stages, plain and weighted by each IP's
/// malicious-apex count.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct HostingSplitReport {
    pub n_ips: u64,
    pub n_hosting: u64,
    pub n_nonhosting: u64,
    pub n_abstain_stage1: u64,
    pub n_shared: u64,
    pub n_dedicated: u64,
    pub n_abstain_stage2: u64,
    pub pct_hosting: Option<f64>,
    pub pct_nonhosting: Option<f64>,
    pub pct_shared: Option<f64>,
    pub pct_dedicated: Option<f64>,
    /// Same splits with each IP weighted by its malicious apex count.
    pub pct_hosting_weighted: Option<f64>,
    pub pct_shared_weighted: Option<f64>,
    /// True when no IP was decided at stage 1.
    pub no_decided_ips: bool,
}

fn verdict_index<R: Scalar>(verdicts: &[IpVerdict<R>]) -> BTreeMap<IpV4, &IpVerdict<R>> {
    verdicts.iter().map(|v| (v.ip, v)).collect()
}

pub fn hosting_split_report<R: Scalar>(
    verdicts: &[IpVerdict<R>],
    ip_to_mal: &BTreeMap<IpV4, BTreeSet<String>>,
) -> Result<HostingSplitReport, AnalysisError> {
    let index = verdict_index(verdicts);
    let missing: Vec<IpV4> = ip_to_mal.keys().filter(|ip| !index.contains_key(ip)).copied().collect();
    if let Some(first) = missing.first() {
        return Err(AnalysisError::MissingVerdicts(missing.len(), *first));
    }
    let mut r = HostingSplitReport { n_ips: ip_to_mal.len() as u64, ..Default::default() };
    let mut w_hosting = 0u64;
    let mut w_nonhosting = 0u64;
    let mut w_shared = 0u64;
    let mut w_dedicated = 0u64;
    for (ip, apexes) in ip_to_mal {
        let v = index[ip];
        let weight = apexes.len() as u64;
        match v.stage1 {
            Stage1Decision::Hosting => {
                r.n_hosting += 1;
                w_hosting += weight;
            }
            Stage1Decision::NonHosting => {
                r.n_nonhosting += 1;
                w_nonhosting += weight;
            }
            Stage1Decision::Abstain => r.n_abstain_stage1 += 1,
        }
        match v.stage2 {
            Some(Stage2Decision::Shared) => {
                r.n_shared += 1;
                w_shared += weight;
            }
            Some(Stage2Decision::Dedicated) => {
                r.n_dedicated += 1;
                w_dedicated += weight;
            }
            Some(Stage2Decision::Abstain) => r.n_abstain_stage2 += 1,
            None => {}
        }
    }
    let pct = |num: u64, den: u64| if den == 0 { None } else { Some(100.0 * num as f64 / den as f64) };
    r.pct_hosting = pct(r.n_hosting, r.n_hosting + r.n_nonhosting);
    r.pct_nonhosting = pct(r.n_nonhosting, r.n_hosting + r.n_nonhosting);
    r.pct_shared = pct(r.n_shared, r.n_shared + r.n_dedicated);
    r.pct_dedicated = pct(r.n_dedicated, r.n_shared + r.n_dedicated);
    r.pct_hosting_weighted = pct(w_hosting, w_hosting + w_nonhosting);
    r.pct_shared_weighted = pct(w_shared, w_shared + w_dedicated);
    r.no_decided_ips = r.n_hosting + r.n_nonhosting == 0;
    Ok(r)
}

/// One row per shared-labeled IP: total hosted apexes vs. malicious apexes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PerIpRow {
    pub ip: IpV4,
    pub n_total_domains: u64,
    pub n_malicious: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PerIpDistribution {
    pub rows: Vec<PerIpRow>,
    /// Empirical CDF (value, F) of total apexes per shared IP.
    pub cdf_total: Vec<(f64, f64)>,
    /// Empirical CDF of malicious apexes per shared IP.
    pub cdf_malicious: Vec<(f64, f64)>,
}

pub fn per_ip_distribution<R: Scalar>(
    pdns: &PdnsStore,
    verdicts: &[IpVerdict<R>],
    ip_to_mal: &BTreeMap<IpV4, BTreeSet<String>>,
) -> PerIpDistribution {
    let mut rows = Vec::new();
    for v in verdicts {
        if v.stage2 != Some(Stage2Decision::Shared) {
            continue;
        }
        let total = pdns.resolution_counts(v.ip).tld2;
        let malicious = ip_to_mal.get(&v.ip).map_or(0, |s| s.len() as u64);
        rows.push(PerIpRow { ip: v.ip, n_total_domains: total, n_malicious: malicious });
    }
    let totals: Vec<f64> = rows.iter().map(|r| r.n_total_domains as f64).collect();
    let mals: Vec<f64> = rows.iter().map(|r| r.n_malicious as f64).collect();
    PerIpDistribution {
        cdf_total: stats::empirical_cdf(&totals),
        cdf_malicious: stats::empirical_cdf(&mals),
        rows,
    }
}

pub const UNKNOWN_ORG: &str = "UNKNOWN";

/// Per-provider aggregate. `n_domains_total` counts distinct apexes hosted
/// anywhere on the provider's IPs; the malicious counts deduplicate
/// apex-org pairs while the `_pairs` fields keep apex-IP multiplicity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ProviderAggregate {
    pub org: String,
    pub n_domains_total: u64,
    pub n_malicious_shared: u64,
    pub n_malicious_dedicated: u64,
    pub n_malicious_shared_pairs: u64,
    pub n_malicious_dedicated_pairs: u64,
}

/// Partition of malicious (apex, IP) pairs by pipeline outcome; the five
/// categories sum to `total_pairs`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PairAccounting {
    pub total_pairs: u64,
    pub shared_pairs: u64,
    pub dedicated_pairs: u64,
    pub nonhosting_pairs: u64,
    pub abstained_stage1_pairs: u64,
    pub abstained_stage2_pairs: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProviderReport {
    pub aggregates: Vec<ProviderAggregate>,
    pub top_all: Vec<(String, u64)>,
    pub top_malicious_shared: Vec<(String, u64)>,
    pub top_malicious_dedicated: Vec<(String, u64)>,
    pub accounting: PairAccounting,
}

/// Group IPs by ASN organization and rank providers three ways: total
/// distinct domains, malicious domains on shared IPs, malicious domains on
/// dedicated IPs. IPs without an ASN match group under `UNKNOWN`.
pub fn provider_ranking<R: Scalar>(
    asn: &AsnDb,
    pdns: &PdnsStore,
    verdicts: &[IpVerdict<R>],
    ip_to_mal: &BTreeMap<IpV4, BTreeSet<String>>,
    k: usize,
) -> Result<ProviderReport, AnalysisError> {
    let index = verdict_index(verdicts);
    let missing: Vec<IpV4> = ip_to_mal.keys().filter(|ip| !index.contains_key(ip)).copied().collect();
    if let Some(first) = missing.first() {
        return Err(AnalysisError::MissingVerdicts(missing.len(), *first));
    }
    let org_of = |ip: IpV4| -> String {
        asn.lookup(ip).map_or_else(|| UNKNOWN_ORG.to_string(), |r| r.org.clone())
    };

    // total distinct apexes per org, over every IP in the PDNS store
    let mut all_domains: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    for ip in pdns.ips() {
        let org = org_of(ip);
        let set = all_domains.entry(org).or_default();
        for rec in pdns.records(ip) {
            if let Some(apex) = rec.name.tld2() {
                set.insert(apex);
            }
        }
    }

    let mut shared_apexes: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    let mut dedicated_apexes: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    let mut shared_pairs: BTreeMap<String, u64> = BTreeMap::new();
    let mut dedicated_pairs: BTreeMap<String, u64> = BTreeMap::new();
    let mut accounting = PairAccounting::default();
    for (ip, apexes) in ip_to_mal {
        let v = index[ip];
        let pairs = apexes.len() as u64;
        accounting.total_pairs += pairs;
        match v.stage1 {
            Stage1Decision::NonHosting => {
                accounting.nonhosting_pairs += pairs;
                continue;
            }
            Stage1Decision::Abstain => {
                accounting.abstained_stage1_pairs += pairs;
                continue;
            }
            Stage1Decision::Hosting => {}
        }
        let org = org_of(*ip);
        match v.stage2 {
            Some(Stage2Decision::Shared) => {
                accounting.shared_pairs += pairs;
                *shared_pairs.entry(org.clone()).or_default() += pairs;
                let set = shared_apexes.entry(org).or_default();
                for apex in apexes {
                    set.insert(apex.as_str());
                }
            }
            Some(Stage2Decision::Dedicated) => {
                accounting.dedicated_pairs += pairs;
                *dedicated_pairs.entry(org.clone()).or_default() += pairs;
                let set = dedicated_apexes.entry(org).or_default();
                for apex in apexes {
                    set.insert(apex.as_str());
                }
            }
            Some(Stage2Decision::Abstain) | None => accounting.abstained_stage2_pairs += pairs,
        }
    }

    let mut orgs: BTreeSet<&String> = all_domains.keys().collect();
    orgs.extend(shared_apexes.keys());
    orgs.extend(dedicated_apexes.keys());
    let aggregates: Vec<ProviderAggregate> = orgs
        .into_iter()
        .map(|org| ProviderAggregate {
            org: org.clone(),
            n_domains_total: all_domains.get(org).map_or(0, |s| s.len() as u64),
            n_malicious_shared: shared_apexes.get(org).map_or(0, |s| s.len() as u64),
            n_malicious_dedicated: dedicated_apexes.get(org).map_or(0, |s| s.len() as u64),
            n_malicious_shared_pairs: shared_pairs.get(org).copied().unwrap_or(0),
            n_malicious_dedicated_pairs: dedicated_pairs.get(org).copied().unwrap_or(0),
        })
        .collect();

    let top = |key: fn(&ProviderAggregate) -> u64| -> Vec<(String, u64)> {
        let mut ranked: Vec<(String, u64)> = aggregates
            .iter()
            .filter(|a| key(a) > 0)
            .map(|a| (a.org.clone(), key(a)))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(k);
        ranked
    };

    Ok(ProviderReport {
        top_all: top(|a| a.n_domains_total),
        top_malicious_shared: top(|a| a.n_malicious_shared),
        top_malicious_dedicated: top(|a| a.n_malicious_dedicated),
        aggregates,
        accounting,
    })
}
