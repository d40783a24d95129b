//! Independent brute-force recomputation of every feature, straight from
//! raw corpus lines. Shares no code with the library paths it checks:
//! names are handled as plain strings, prefixes by formatting all 256
//! addresses, and statistics use naive two-pass formulas.

use std::collections::{BTreeMap, BTreeSet};

const DAY: i64 = 86_400;
const YEAR: f64 = 365.25 * 86_400.0;

pub struct RawCorpus {
    pub suffixes: Vec<String>,
    /// ip -> name -> (first, last, count), duplicates merged.
    by_ip: BTreeMap<String, BTreeMap<String, (i64, i64, u64)>>,
    whois: Vec<WhoisRow>,
}

struct WhoisRow {
    start: u32,
    end: u32,
    owner_norm: String,
    net_type: String,
    updated: i64,
    observed: i64,
}

fn ip_to_u32(s: &str) -> Option<u32> {
    let mut out: u32 = 0;
    let mut parts = 0;
    for part in s.split('.') {
        let v: u32 = part.parse().ok()?;
        if v > 255 {
            return None;
        }
        out = (out << 8) | v;
        parts += 1;
    }
    (parts == 4).then_some(out)
}

fn normalize_owner(s: &str) -> String {
    let mapped: String = s
        .chars()
        .map(|c| if c.is_alphanumeric() { c.to_lowercase().next().unwrap() } else { ' ' })
        .collect();
    mapped.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl RawCorpus {
    pub fn load(pdns_lines: &str, whois_lines: &str, suffixes: &[&str]) -> RawCorpus {
        let mut by_ip: BTreeMap<String, BTreeMap<String, (i64, i64, u64)>> = BTreeMap::new();
        for line in pdns_lines.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let v: serde_json::Value = match serde_json::from_str(line) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let rrtype = v["rrtype"].as_str().unwrap_or("");
            if !rrtype.eq_ignore_ascii_case("A") {
                continue;
            }
            let name = match v["name"].as_str() {
                Some(n) => n.trim_end_matches('.').to_lowercase(),
                None => continue,
            };
            if name.is_empty() || ip_to_u32(v["ip"].as_str().unwrap_or("")).is_none() {
                continue;
            }
            let ip = v["ip"].as_str().unwrap().to_string();
            let first = v["time_first"].as_i64().unwrap_or(0);
            let last = v["time_last"].as_i64().unwrap_or(0);
            let count = v["count"].as_u64().unwrap_or(0);
            if first > last || count == 0 {
                continue;
            }
            let entry = by_ip.entry(ip).or_default().entry(name).or_insert((first, last, 0));
            entry.0 = entry.0.min(first);
            entry.1 = entry.1.max(last);
            entry.2 += count;
        }
        let mut whois = Vec::new();
        for line in whois_lines.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let v: serde_json::Value = match serde_json::from_str(line) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let (Some(start), Some(end)) = (
                v["range_start"].as_str().and_then(ip_to_u32),
                v["range_end"].as_str().and_then(ip_to_u32),
            ) else {
                continue;
            };
            if start > end {
                continue;
            }
            whois.push(WhoisRow {
                start,
                end,
                owner_norm: normalize_owner(v["owner"].as_str().unwrap_or("")),
                net_type: v["net_type"].as_str().unwrap_or("").to_string(),
                updated: v["updated"].as_i64().unwrap_or(0),
                observed: v["observed"].as_i64().unwrap_or(0),
            });
        }
        RawCorpus {
            suffixes: suffixes.iter().map(|s| s.to_string()).collect(),
            by_ip,
            whois,
        }
    }

    fn suffix_len(&self, labels: &[&str]) -> usize {
        for take in (1..=labels.len()).rev() {
            let candidate = labels[labels.len() - take..].join(".");
            if self.suffixes.iter().any(|s| *s == candidate) {
                return take;
            }
        }
        1
    }

    fn tail(&self, name: &str, extra: usize) -> Option<String> {
        let labels: Vec<&str> = name.split('.').collect();
        let sl = self.suffix_len(&labels);
        if labels.len() >= sl + extra {
            Some(labels[labels.len() - (sl + extra)..].join("."))
        } else {
            None
        }
    }

    fn tld2(&self, name: &str) -> Option<String> {
        self.tail(name, 1)
    }

    fn tld3(&self, name: &str) -> Option<String> {
        self.tail(name, 2)
    }

    fn names_of(&self, ip: &str) -> Vec<(&str, i64, i64)> {
        self.by_ip
            .get(ip)
            .map(|names| {
                names
                    .iter()
                    .map(|(name, (first, last, _))| (name.as_str(), *first, *last))
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn resolution_counts(&self, ip: &str) -> (u64, u64, u64) {
        let mut t2 = BTreeSet::new();
        let mut t3 = BTreeSet::new();
        let mut fq = BTreeSet::new();
        for (name, _, _) in self.names_of(ip) {
            if let Some(a) = self.tld2(name) {
                t2.insert(a);
            }
            if let Some(t) = self.tld3(name) {
                t3.insert(t);
            }
            fq.insert(name.to_string());
        }
        (t2.len() as u64, t3.len() as u64, fq.len() as u64)
    }

    pub fn prefix_stats(&self, ip: &str) -> (f64, f64, u64, f64, u64) {
        let base = ip_to_u32(ip).expect("probe ip parses") & 0xFFFF_FF00;
        let mut populated = 0u64;
        let (mut sum3, mut max3, mut sum2, mut max2) = (0u64, 0u64, 0u64, 0u64);
        for last in 0..=255u32 {
            let addr = base | last;
            let addr_str = format!(
                "{}.{}.{}.{}",
                (addr >> 24) & 255,
                (addr >> 16) & 255,
                (addr >> 8) & 255,
                addr & 255
            );
            let names = self.names_of(&addr_str);
            if names.is_empty() {
                continue;
            }
            populated += 1;
            let (t2, t3, _) = self.resolution_counts(&addr_str);
            sum2 += t2;
            max2 = max2.max(t2);
            sum3 += t3;
            max3 = max3.max(t3);
        }
        (
            100.0 * populated as f64 / 256.0,
            sum3 as f64 / 256.0,
            max3,
            sum2 as f64 / 256.0,
            max2,
        )
    }

    fn window(&self, ip: &str, reference: i64) -> Vec<&WhoisRow> {
        let probe = ip_to_u32(ip).expect("probe ip parses");
        let cutoff = reference - (10.0 * YEAR) as i64;
        let mut rows: Vec<&WhoisRow> = self
            .whois
            .iter()
            .filter(|r| {
                r.start <= probe && probe <= r.end && r.observed >= cutoff && r.observed <= reference
            })
            .collect();
        // latest = max by (observed, start, end, owner), last among full ties
        rows.sort_by(|a, b| {
            a.observed
                .cmp(&b.observed)
                .then(a.start.cmp(&b.start))
                .then(a.end.cmp(&b.end))
                .then(a.owner_norm.cmp(&b.owner_norm))
        });
        rows
    }

    /// (f9, f10, f11, f12, f13, f14 one-hot index, f15, f16)
    pub fn whois_features(&self, ip: &str, reference: i64) -> (u64, u64, u64, u64, u64, usize, f64, u64) {
        let rows = self.window(ip, reference);
        if rows.is_empty() {
            return (0, 0, 0, 0, 0, 4, 10.0, 0);
        }
        let owners: BTreeSet<&str> = rows.iter().map(|r| r.owner_norm.as_str()).collect();
        let ranges: BTreeSet<(u32, u32)> = rows.iter().map(|r| (r.start, r.end)).collect();
        let sizes: Vec<u64> = rows.iter().map(|r| u64::from(r.end - r.start) + 1).collect();
        let newest = rows.last().expect("non-empty");
        let newest_update = rows.iter().map(|r| r.updated).max().expect("non-empty");
        let net_idx = match newest.net_type.trim().to_lowercase().as_str() {
            "direct allocation" => 0,
            "direct assignment" => 1,
            "reallocated" => 2,
            "reassigned" => 3,
            _ => 4,
        };
        (
            owners.len() as u64,
            ranges.len() as u64,
            *sizes.iter().max().expect("non-empty"),
            *sizes.iter().min().expect("non-empty"),
            u64::from(newest.end - newest.start) + 1,
            net_idx,
            ((reference - newest_update).max(0)) as f64 / YEAR,
            rows.len() as u64,
        )
    }

    pub fn churn_series(&self, ip: &str, reference: i64, window_days: i64) -> Vec<u64> {
        let last_day = reference.div_euclid(DAY);
        let first_day = last_day - window_days + 1;
        let names = self.names_of(ip);
        let day_set = |day: i64| -> BTreeSet<String> {
            names
                .iter()
                .filter(|(_, first, last)| first.div_euclid(DAY) <= day && day <= last.div_euclid(DAY))
                .filter_map(|(name, _, _)| self.tld2(name))
                .collect()
        };
        let mut out = Vec::new();
        let mut prev = day_set(first_day);
        for day in first_day + 1..=last_day {
            let cur = day_set(day);
            out.push(prev.symmetric_difference(&cur).count() as u64);
            prev = cur;
        }
        out
    }

    pub fn duration_stats(&self, ip: &str) -> (f64, f64) {
        let mut spans: BTreeMap<String, (i64, i64)> = BTreeMap::new();
        for (name, first, last) in self.names_of(ip) {
            let Some(apex) = self.tld2(name) else { continue };
            let entry = spans.entry(apex).or_insert((first, last));
            entry.0 = entry.0.min(first);
            entry.1 = entry.1.max(last);
        }
        if spans.is_empty() {
            return (0.0, 0.0);
        }
        let durations: Vec<f64> = spans.values().map(|(f, l)| (l - f) as f64 / YEAR).collect();
        (two_pass_mean(&durations), two_pass_std(&durations))
    }

    pub fn all_ips(&self) -> BTreeSet<String> {
        self.by_ip.keys().cloned().collect()
    }
}

pub fn two_pass_mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn two_pass_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = two_pass_mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300) || a == b
}

/// 1e-9-relative comparison for statistics computed by cancellation
/// (standard deviations): the achievable agreement is relative to the
/// magnitude of the inputs, not of the near-zero result itself.
pub fn close_at_scale(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(scale.abs()).max(1e-300)
}
