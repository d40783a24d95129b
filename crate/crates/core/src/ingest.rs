//! Parse and index the input corpora: passive DNS, WHOIS history and the
//! IP-to-ASN database.
//!
//! All three inputs are UTF-8 line-delimited JSON, one object per line.
//! Malformed lines are skipped and counted unless `strict` is set, in which
//! case the first bad line aborts the load with its line number. Loaded
//! stores are immutable and safe to share across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::{
    parse_domain, AsnRecord, Cidr, IpV4, NetType, PdnsRecord, Prefix24, SuffixList, WhoisSnapshot,
    SECONDS_PER_YEAR,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed line: {reason}")]
    Malformed { path: String, line: u64, reason: String },
    #[error("conflicting ASN for prefix {cidr}: {first} vs {second}")]
    AsnConflict { cidr: Cidr, first: u32, second: u32 },
}

/// Per-load bookkeeping: how many lines were consumed, merged or skipped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LoadStats {
    pub lines: u64,
    pub loaded: u64,
    pub merged: u64,
    pub skipped_non_a: u64,
    pub malformed: u64,
}

/// Iterate JSON lines of `reader`, decoding each into `T`.
///
/// `on_item` receives the 1-based line number and the decoded value. In
/// non-strict mode undecodable lines invoke `on_bad` and are skipped.
pub fn for_each_json_line<T, R, F, G>(
    reader: R,
    path: &str,
    strict: bool,
    mut on_item: F,
    mut on_bad: G,
) -> Result<u64, IngestError>
where
    T: DeserializeOwned,
    R: Read,
    F: FnMut(u64, T) -> Result<(), String>,
    G: FnMut(u64, &str),
{
    let mut lines = 0u64;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line.map_err(|source| IngestError::Io { path: path.to_string(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        lines += 1;
        let outcome = serde_json::from_str::<T>(&line)
            .map_err(|e| e.to_string())
            .and_then(|item| on_item(line_no, item));
        if let Err(reason) = outcome {
            if strict {
                return Err(IngestError::Malformed { path: path.to_string(), line: line_no, reason });
            }
            on_bad(line_no, &reason);
        }
    }
    Ok(lines)
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io { path: path.display().to_string(), source })
}

// ---------------------------------------------------------------------------
// Passive DNS

#[derive(Debug, Serialize, Deserialize)]
struct PdnsLine {
    name: String,
    rrtype: String,
    ip: String,
    time_first: i64,
    time_last: i64,
    count: u64,
}

/// Wire encoding of a record, suitable for writing corpora.
pub fn pdns_line(record: &PdnsRecord) -> String {
    serde_json::to_string(&PdnsLine {
        name: record.name.as_str().to_string(),
        rrtype: "A".to_string(),
        ip: record.ip.to_string(),
        time_first: record.time_first,
        time_last: record.time_last,
        count: record.count,
    })
    .expect("record serializes")
}

/// Distinct-name counts for one IP, precomputed at load time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ResolutionCounts {
    /// Distinct registered domains (TLD+2).
    pub tld2: u64,
    /// Distinct TLD+3 names.
    pub tld3: u64,
    /// Distinct fully-qualified names.
    pub fqdn: u64,
}

/// In-memory passive-DNS index.
///
/// Records identical in (name, ip) are merged at construction: earliest
/// first-seen, latest last-seen, summed observation count. A record counts
/// its domain as hosted on every UTC day of its interval, inclusive.
#[derive(Debug, Default)]
pub struct PdnsStore {
    by_ip: BTreeMap<IpV4, Vec<PdnsRecord>>,
    by_prefix: BTreeMap<Prefix24, BTreeSet<IpV4>>,
    counts: BTreeMap<IpV4, ResolutionCounts>,
}

impl PdnsStore {
    pub fn from_records<I: IntoIterator<Item = PdnsRecord>>(records: I) -> (Self, u64) {
        let mut merged_map: BTreeMap<(IpV4, String), PdnsRecord> = BTreeMap::new();
        let mut merged = 0u64;
        for rec in records {
            let key = (rec.ip, rec.name.as_str().to_string());
            match merged_map.get_mut(&key) {
                Some(existing) => {
                    existing.time_first = existing.time_first.min(rec.time_first);
                    existing.time_last = existing.time_last.max(rec.time_last);
                    existing.count += rec.count;
                    merged += 1;
                }
                None => {
                    merged_map.insert(key, rec);
                }
            }
        }
        let mut store = PdnsStore::default();
        for (_, rec) in merged_map {
            store
                .by_prefix
                .entry(rec.ip.prefix24())
                .or_default()
                .insert(rec.ip);
            store.by_ip.entry(rec.ip).or_default().push(rec);
        }
        for (ip, recs) in &store.by_ip {
            let mut tld2 = BTreeSet::new();
            let mut tld3 = BTreeSet::new();
            let mut fqdn = BTreeSet::new();
            for r in recs {
                if let Some(a) = r.name.tld2() {
                    tld2.insert(a);
                }
                if let Some(t) = r.name.tld3() {
                    tld3.insert(t);
                }
                fqdn.insert(r.name.as_str());
            }
            store.counts.insert(
                *ip,
                ResolutionCounts {
                    tld2: tld2.len() as u64,
                    tld3: tld3.len() as u64,
                    fqdn: fqdn.len() as u64,
                },
            );
        }
        (store, merged)
    }

    pub fn records(&self, ip: IpV4) -> &[PdnsRecord] {
        self.by_ip.get(&ip).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn ips(&self) -> impl Iterator<Item = IpV4> + '_ {
        self.by_ip.keys().copied()
    }

    pub fn len_ips(&self) -> usize {
        self.by_ip.len()
    }

    /// Addresses of `prefix` holding at least one record.
    pub fn prefix_members(&self, prefix: Prefix24) -> Option<&BTreeSet<IpV4>> {
        self.by_prefix.get(&prefix)
    }

    pub fn resolution_counts(&self, ip: IpV4) -> ResolutionCounts {
        self.counts.get(&ip).copied().unwrap_or_default()
    }

    /// Distinct apexes (TLD+2) hosted on `ip` over the whole store horizon.
    pub fn apexes(&self, ip: IpV4) -> BTreeSet<&str> {
        self.records(ip).iter().filter_map(|r| r.name.tld2()).collect()
    }

    /// Apexes active on each UTC day of `days` (ascending day index).
    pub fn daily_apex_sets(&self, ip: IpV4, days: std::ops::RangeInclusive<i64>) -> Vec<BTreeSet<&str>> {
        let first = *days.start();
        let last = *days.end();
        let n = (last - first + 1).max(0) as usize;
        let mut sets: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); n];
        for rec in self.records(ip) {
            let apex = match rec.name.tld2() {
                Some(a) => a,
                None => continue,
            };
            let lo = rec.first_day().max(first);
            let hi = rec.last_day().min(last);
            for day in lo..=hi {
                sets[(day - first) as usize].insert(apex);
            }
        }
        sets
    }
}

/// Load a passive-DNS corpus. Only `A` records are consumed; other rrtypes
/// are counted under `skipped_non_a`.
pub fn load_pdns(
    path: &Path,
    suffixes: &SuffixList,
    strict: bool,
) -> Result<(PdnsStore, LoadStats), IngestError> {
    load_pdns_reader(open(path)?, &path.display().to_string(), suffixes, strict)
}

pub fn load_pdns_reader<R: Read>(
    reader: R,
    path: &str,
    suffixes: &SuffixList,
    strict: bool,
) -> Result<(PdnsStore, LoadStats), IngestError> {
    let mut stats = LoadStats::default();
    let mut records = Vec::new();
    stats.lines = for_each_json_line::<PdnsLine, _, _, _>(
        reader,
        path,
        strict,
        |_, line| {
            if !line.rrtype.eq_ignore_ascii_case("A") {
                stats.skipped_non_a += 1;
                return Ok(());
            }
            let name = parse_domain(&line.name, suffixes).map_err(|e| e.to_string())?;
            let ip: IpV4 = line.ip.parse().map_err(|e: crate::datamodel::IpParseError| e.to_string())?;
            let rec = PdnsRecord::new(name, ip, line.time_first, line.time_last, line.count)
                .map_err(|e| e.to_string())?;
            records.push(rec);
            Ok(())
        },
        |_, _| stats.malformed += 1,
    )?;
    stats.loaded = records.len() as u64;
    let (store, merged) = PdnsStore::from_records(records);
    stats.merged = merged;
    Ok((store, stats))
}

// ---------------------------------------------------------------------------
// WHOIS history

#[derive(Debug, Serialize, Deserialize)]
struct WhoisLine {
    range_start: String,
    range_end: String,
    owner: String,
    net_type: String,
    updated: i64,
    observed: i64,
}

pub fn whois_line(s: &WhoisSnapshot) -> String {
    serde_json::to_string(&WhoisLine {
        range_start: s.range_start.to_string(),
        range_end: s.range_end.to_string(),
        owner: s.owner.clone(),
        net_type: s.net_type.as_str().to_string(),
        updated: s.updated,
        observed: s.observed,
    })
    .expect("snapshot serializes")
}

/// Historical IP-WHOIS snapshots, queryable by contained IP.
///
/// Queries return snapshots observed within `horizon_years` before the
/// reference time, ascending by observation time.
#[derive(Debug)]
pub struct WhoisStore {
    snapshots: Vec<WhoisSnapshot>,
    horizon_years: u32,
}

pub const DEFAULT_HORIZON_YEARS: u32 = 10;

impl WhoisStore {
    pub fn from_snapshots(mut snapshots: Vec<WhoisSnapshot>, horizon_years: u32) -> Self {
        snapshots.sort_by(|a, b| {
            a.observed
                .cmp(&b.observed)
                .then_with(|| a.range_start.cmp(&b.range_start))
                .then_with(|| a.range_end.cmp(&b.range_end))
                .then_with(|| a.owner.cmp(&b.owner))
        });
        WhoisStore { snapshots, horizon_years }
    }

    pub fn horizon_years(&self) -> u32 {
        self.horizon_years
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Snapshots containing `ip`, observed in the horizon window ending at
    /// `reference` (inclusive), ascending by observation time.
    pub fn history(&self, ip: IpV4, reference: i64) -> Vec<&WhoisSnapshot> {
        let horizon = (f64::from(self.horizon_years) * SECONDS_PER_YEAR) as i64;
        let cutoff = reference - horizon;
        self.snapshots
            .iter()
            .filter(|s| s.contains(ip) && s.observed >= cutoff && s.observed <= reference)
            .collect()
    }
}

pub fn load_whois(path: &Path, strict: bool) -> Result<(WhoisStore, LoadStats), IngestError> {
    load_whois_reader(open(path)?, &path.display().to_string(), strict)
}

pub fn load_whois_reader<R: Read>(
    reader: R,
    path: &str,
    strict: bool,
) -> Result<(WhoisStore, LoadStats), IngestError> {
    let mut stats = LoadStats::default();
    let mut snapshots = Vec::new();
    stats.lines = for_each_json_line::<WhoisLine, _, _, _>(
        reader,
        path,
        strict,
        |_, line| {
            let start: IpV4 = line.range_start.parse().map_err(|e: crate::datamodel::IpParseError| e.to_string())?;
            let end: IpV4 = line.range_end.parse().map_err(|e: crate::datamodel::IpParseError| e.to_string())?;
            let snap = WhoisSnapshot::new(
                start,
                end,
                &line.owner,
                NetType::parse(&line.net_type),
                line.updated,
                line.observed,
            )
            .map_err(|e| e.to_string())?;
            snapshots.push(snap);
            Ok(())
        },
        |_, _| stats.malformed += 1,
    )?;
    stats.loaded = snapshots.len() as u64;
    Ok((WhoisStore::from_snapshots(snapshots, DEFAULT_HORIZON_YEARS), stats))
}

// ---------------------------------------------------------------------------
// IP -> ASN

#[derive(Debug, Serialize, Deserialize)]
struct AsnLine {
    cidr: String,
    asn: u32,
    org: String,
}

pub fn asn_line(r: &AsnRecord) -> String {
    serde_json::to_string(&AsnLine { cidr: r.cidr.to_string(), asn: r.asn, org: r.org.clone() })
        .expect("asn record serializes")
}

/// Longest-prefix-match IP-to-ASN table.
#[derive(Debug, Default)]
pub struct AsnDb {
    // prefix length -> masked base -> record
    by_len: BTreeMap<u8, BTreeMap<u32, AsnRecord>>,
}

impl AsnDb {
    pub fn from_records(records: Vec<AsnRecord>) -> Result<Self, IngestError> {
        let mut db = AsnDb::default();
        for rec in records {
            let slot = db.by_len.entry(rec.cidr.len()).or_default();
            match slot.get(&rec.cidr.base().as_u32()) {
                Some(existing) if existing.asn != rec.asn => {
                    return Err(IngestError::AsnConflict {
                        cidr: rec.cidr,
                        first: existing.asn,
                        second: rec.asn,
                    });
                }
                Some(_) => {} // identical prefix and ASN: keep the first
                None => {
                    slot.insert(rec.cidr.base().as_u32(), rec);
                }
            }
        }
        Ok(db)
    }

    /// Longest-prefix match; `None` when no prefix covers the address.
    pub fn lookup(&self, ip: IpV4) -> Option<&AsnRecord> {
        for (len, slot) in self.by_len.iter().rev() {
            let mask = if *len == 0 { 0 } else { u32::MAX << (32 - u32::from(*len)) };
            if let Some(rec) = slot.get(&(ip.as_u32() & mask)) {
                return Some(rec);
            }
        }
        None
    }

    pub fn records(&self) -> impl Iterator<Item = &AsnRecord> {
        self.by_len.values().flat_map(|m| m.values())
    }
}

pub fn load_asn(path: &Path, strict: bool) -> Result<(AsnDb, LoadStats), IngestError> {
    load_asn_reader(open(path)?, &path.display().to_string(), strict)
}

pub fn load_asn_reader<R: Read>(
    reader: R,
    path: &str,
    strict: bool,
) -> Result<(AsnDb, LoadStats), IngestError> {
    let mut stats = LoadStats::default();
    let mut records = Vec::new();
    stats.lines = for_each_json_line::<AsnLine, _, _, _>(
        reader,
        path,
        strict,
        |_, line| {
            let cidr: Cidr = line.cidr.parse().map_err(|e: crate::datamodel::IpParseError| e.to_string())?;
            records.push(AsnRecord { cidr, asn: line.asn, org: line.org });
            Ok(())
        },
        |_, _| stats.malformed += 1,
    )?;
    stats.loaded = records.len() as u64;
    Ok((AsnDb::from_records(records)?, stats))
}
