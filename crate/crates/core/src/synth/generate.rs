//! Corpus generation.
//!
//! Each IP's passive-DNS timeline is built so that the extracted features
//! land on the class profile by construction: stable "core" apexes span
//! the whole churn window with log-normal lifetimes, while planted per-day
//! arrival/departure events produce exactly the configured daily churn.
//! WHOIS histories assign one inetnum per owner era and pin the newest
//! update timestamp to the years-since-update draw.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, LogNormal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::{IpV4, NetType, SECONDS_PER_DAY, SECONDS_PER_YEAR};
use crate::ingest::{for_each_json_line, IngestError};

use super::profile::{default_profiles, ClassProfile, SynthClass};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Malicious-domain planting parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaliciousConfig {
    /// Fraction of hosting-class IPs that host malicious apexes.
    pub hosting_ip_frac: f64,
    /// Mean malicious apexes per selected IP (>= 1).
    pub apexes_per_ip_mean: f64,
    /// Probability that a malicious apex is co-hosted on a second,
    /// shared-truth IP.
    pub multihome_prob: f64,
}

impl Default for MaliciousConfig {
    fn default() -> Self {
        MaliciousConfig { hosting_ip_frac: 0.6, apexes_per_ip_mean: 2.0, multihome_prob: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorConfig {
    pub n_nonhosting: usize,
    /// Marginal-profile hosting IPs (stage-1 ground truth flavor).
    pub n_hosting: usize,
    pub n_dedicated: usize,
    pub n_shared: usize,
    /// Stage-2 truth split for marginal hosting IPs.
    pub shared_frac_of_hosting: f64,
    pub seed: u64,
    /// Feature-extraction reference time (epoch seconds).
    pub reference: i64,
    pub window_days: u32,
    pub horizon_years: u32,
    /// Fraction of domain-WHOIS rows emitted privacy protected.
    pub privacy_protected_frac: f64,
    /// Up to this many unrelated background tenants per used /24 block;
    /// they blur prefix statistics but carry no truth rows.
    pub background_max_per_block: u32,
    /// Mean apex count of one background tenant.
    pub background_tld2_mean: f64,
    pub malicious: Option<MaliciousConfig>,
    pub profiles: BTreeMap<SynthClass, ClassProfile>,
}

impl GeneratorConfig {
    pub fn new(seed: u64, reference: i64) -> Self {
        GeneratorConfig {
            n_nonhosting: 0,
            n_hosting: 0,
            n_dedicated: 0,
            n_shared: 0,
            shared_frac_of_hosting: 0.5,
            seed,
            reference,
            window_days: 60,
            horizon_years: 10,
            privacy_protected_frac: 0.0,
            background_max_per_block: 10,
            background_tld2_mean: 150.0,
            malicious: None,
            profiles: default_profiles(),
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let total = self.n_nonhosting + self.n_hosting + self.n_dedicated + self.n_shared;
        if total == 0 {
            return Err(SynthError::Config("no IPs requested".to_string()));
        }
        if self.window_days < 2 {
            return Err(SynthError::Config(format!("window_days must be >= 2, got {}", self.window_days)));
        }
        if self.horizon_years == 0 {
            return Err(SynthError::Config("horizon_years must be >= 1".to_string()));
        }
        let min_reference = (15.0 * SECONDS_PER_YEAR) as i64;
        if self.reference < min_reference {
            return Err(SynthError::Config(format!(
                "reference {} is too early; histories need at least {min_reference}",
                self.reference
            )));
        }
        if !(0.0..=1.0).contains(&self.shared_frac_of_hosting) {
            return Err(SynthError::Config("shared_frac_of_hosting must be in [0,1]".to_string()));
        }
        if !(0.0..=1.0).contains(&self.privacy_protected_frac) {
            return Err(SynthError::Config("privacy_protected_frac must be in [0,1]".to_string()));
        }
        if self.background_tld2_mean < 0.0 {
            return Err(SynthError::Config("background_tld2_mean must be >= 0".to_string()));
        }
        if let Some(m) = &self.malicious {
            if !(0.0..=1.0).contains(&m.hosting_ip_frac) || !(0.0..=1.0).contains(&m.multihome_prob) {
                return Err(SynthError::Config("malicious fractions must be in [0,1]".to_string()));
            }
            if m.apexes_per_ip_mean < 1.0 {
                return Err(SynthError::Config("apexes_per_ip_mean must be >= 1".to_string()));
            }
        }
        for class in SynthClass::ALL {
            let profile = self
                .profiles
                .get(&class)
                .ok_or_else(|| SynthError::Config(format!("missing profile for class {class}")))?;
            profile.validate().map_err(|e| SynthError::Config(format!("{class}: {e}")))?;
        }
        Ok(())
    }
}

/// Paths and tallies of one generated corpus.
#[derive(Debug, Clone, Serialize)]
pub struct SynthCorpus {
    pub dir: PathBuf,
    pub pdns: PathBuf,
    pub whois: PathBuf,
    pub asn: PathBuf,
    pub truth: PathBuf,
    pub domain_whois: PathBuf,
    pub vt: Option<PathBuf>,
    pub n_ips: usize,
    pub n_pdns_records: u64,
    pub n_whois_snapshots: u64,
    pub n_malicious_apexes: u64,
}

/// One truth-file line: the planted classes and ownership of one IP.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthLine {
    pub ip: String,
    pub stage1_truth: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage2_truth: Option<String>,
    pub owners: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub malicious: Option<Vec<String>>,
}

pub fn load_truth(path: &Path) -> Result<Vec<TruthLine>, IngestError> {
    let file = File::open(path)
        .map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
    let mut out = Vec::new();
    for_each_json_line::<TruthLine, _, _, _>(
        file,
        &path.display().to_string(),
        true,
        |_, line| {
            out.push(line);
            Ok(())
        },
        |_, _| {},
    )?;
    Ok(out)
}

pub fn truth_by_ip(lines: &[TruthLine]) -> BTreeMap<IpV4, &TruthLine> {
    lines.iter().filter_map(|l| l.ip.parse().ok().map(|ip: IpV4| (ip, l))).collect()
}

// ---------------------------------------------------------------------------
// sampling helpers

fn nb_count(rng: &mut ChaCha8Rng, mean: f64, dispersion: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let gamma = Gamma::new(dispersion, mean / dispersion).expect("valid gamma");
    let lambda: f64 = gamma.sample(rng);
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).map(|p| p.sample(rng) as u64).unwrap_or(0)
}

fn count_mean_var(rng: &mut ChaCha8Rng, mean: f64, var: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if var <= mean * 1.000_001 {
        return Poisson::new(mean).map(|p| p.sample(rng) as u64).unwrap_or(0);
    }
    let r = mean * mean / (var - mean);
    nb_count(rng, mean, r)
}

fn lognormal_mean_std(rng: &mut ChaCha8Rng, mean: f64, std: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    if std <= 0.0 {
        return mean;
    }
    let sigma2 = (1.0 + (std / mean).powi(2)).ln();
    let mu = mean.ln() - sigma2 / 2.0;
    LogNormal::new(mu, sigma2.sqrt()).expect("valid lognormal").sample(rng)
}

fn lognormal_mean_sigma(rng: &mut ChaCha8Rng, mean: f64, sigma: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let mu = mean.ln() - sigma * sigma / 2.0;
    LogNormal::new(mu, sigma).expect("valid lognormal").sample(rng)
}

fn pick_weighted(rng: &mut ChaCha8Rng, weights: &[f64; 5]) -> usize {
    let mut u: f64 = rng.gen::<f64>();
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// P(X >= 1) for the negative-binomial count draw; used to keep deep-name
/// conditioning unbiased.
fn prob_positive(mean: f64, dispersion: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    1.0 - (1.0 + mean / dispersion).powf(-dispersion)
}

// ---------------------------------------------------------------------------
// wire structs (field order fixed for byte-stable output)

#[derive(Serialize)]
struct PdnsOut<'a> {
    name: &'a str,
    rrtype: &'a str,
    ip: String,
    time_first: i64,
    time_last: i64,
    count: u64,
}

#[derive(Serialize)]
struct WhoisOut<'a> {
    range_start: String,
    range_end: String,
    owner: &'a str,
    net_type: &'a str,
    updated: i64,
    observed: i64,
}

#[derive(Serialize)]
struct AsnOut<'a> {
    cidr: String,
    asn: u32,
    org: &'a str,
}

#[derive(Serialize)]
struct DomainWhoisOut<'a> {
    domain: &'a str,
    registrant: Option<&'a str>,
    privacy_protected: bool,
}

#[derive(Serialize)]
struct VtOut<'a> {
    domain: &'a str,
    positives: u32,
}

struct LineWriter {
    path: PathBuf,
    writer: BufWriter<File>,
    lines: u64,
}

impl LineWriter {
    fn create(path: PathBuf) -> Result<Self, SynthError> {
        let file = File::create(&path)
            .map_err(|source| SynthError::Io { path: path.display().to_string(), source })?;
        Ok(LineWriter { path, writer: BufWriter::new(file), lines: 0 })
    }

    fn write_json<T: Serialize>(&mut self, value: &T) -> Result<(), SynthError> {
        let line = serde_json::to_string(value).expect("wire struct serializes");
        self.writer
            .write_all(line.as_bytes())
            .and_then(|_| self.writer.write_all(b"\n"))
            .map_err(|source| SynthError::Io { path: self.path.display().to_string(), source })?;
        self.lines += 1;
        Ok(())
    }

    fn finish(mut self) -> Result<(PathBuf, u64), SynthError> {
        self.writer
            .flush()
            .map_err(|source| SynthError::Io { path: self.path.display().to_string(), source })?;
        Ok((self.path, self.lines))
    }
}

// ---------------------------------------------------------------------------
// per-class IP allocation

struct Region {
    cursor: u32,
    block_left: u32,
    quota: (u32, u32),
}

impl Region {
    fn new(base: u32, quota: (u32, u32)) -> Self {
        Region { cursor: base, block_left: 0, quota }
    }

    /// Next address in the region plus the gap to the previous one. The
    /// gap bounds this IP's inetnum sizes so that no generated range ever
    /// contains another generated IP.
    fn next_ip(&mut self, rng: &mut ChaCha8Rng) -> (IpV4, u32) {
        let prev = self.cursor;
        loop {
            if self.block_left == 0 {
                // jump to the next /24 and draw its occupancy
                self.cursor = (self.cursor & 0xFFFF_FF00).wrapping_add(256);
                self.block_left = rng.gen_range(self.quota.0..=self.quota.1);
            }
            let step = 1 + rng.gen_range(0..(256 / self.quota.1.max(1)).max(1));
            let candidate = self.cursor.wrapping_add(step);
            if candidate & 0xFFFF_FF00 != self.cursor & 0xFFFF_FF00 {
                self.block_left = 0;
                continue;
            }
            self.cursor = candidate;
            self.block_left -= 1;
            return (IpV4::from_u32(candidate), candidate - prev);
        }
    }
}

// ---------------------------------------------------------------------------
// generation proper

#[derive(Debug, Clone, Copy)]
struct ChurnSpan {
    first_day: i64,
    last_day: i64,
    open_ended: bool,
}

/// Plan per-day arrival/departure events so the realized daily churn of
/// the window equals the drawn event counts exactly.
fn plan_churn(
    rng: &mut ChaCha8Rng,
    profile: &ClassProfile,
    first_day: i64,
    last_day: i64,
) -> Vec<ChurnSpan> {
    let mut spans: Vec<ChurnSpan> = Vec::new();
    let mut pool: Vec<usize> = Vec::new(); // open-ended spans, arrival before today
    let var = profile.churn_std * profile.churn_std;
    for day in first_day + 1..=last_day {
        let events = count_mean_var(rng, profile.churn_mean, var);
        let mut todays_arrivals: Vec<usize> = Vec::new();
        for _ in 0..events {
            let depart = rng.gen_bool(0.5);
            if depart {
                if let Some(pick) = (!pool.is_empty()).then(|| rng.gen_range(0..pool.len())) {
                    let idx = pool.swap_remove(pick);
                    spans[idx].last_day = day - 1;
                    spans[idx].open_ended = false;
                } else {
                    // seed a pre-window apex that leaves today
                    let pad = 1 + rng.gen_range(0..30);
                    spans.push(ChurnSpan { first_day: first_day - pad, last_day: day - 1, open_ended: false });
                }
            } else {
                spans.push(ChurnSpan { first_day: day, last_day, open_ended: true });
                todays_arrivals.push(spans.len() - 1);
            }
        }
        pool.extend(todays_arrivals);
    }
    spans
}

struct MultihomeJob {
    apex: String,
    target: IpV4,
    registrant: String,
}

pub fn generate(config: &GeneratorConfig, dir: &Path) -> Result<SynthCorpus, SynthError> {
    config.validate()?;
    std::fs::create_dir_all(dir)
        .map_err(|source| SynthError::Io { path: dir.display().to_string(), source })?;

    let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::derive(config.seed, "synth"));
    let mut pdns = LineWriter::create(dir.join("pdns.jsonl"))?;
    let mut whois = LineWriter::create(dir.join("whois.jsonl"))?;
    let mut asn = LineWriter::create(dir.join("asn.jsonl"))?;
    let mut truth = LineWriter::create(dir.join("truth.jsonl"))?;
    let mut domain_whois = LineWriter::create(dir.join("domain_whois.jsonl"))?;
    let mut vt = if config.malicious.is_some() {
        Some(LineWriter::create(dir.join("vt.jsonl"))?)
    } else {
        None
    };

    let reference = config.reference;
    let last_day = reference.div_euclid(SECONDS_PER_DAY);
    let first_day = last_day - i64::from(config.window_days) + 1;
    let min_core_years = (f64::from(config.window_days) + 2.0) * 86_400.0 / SECONDS_PER_YEAR;
    let horizon_secs = (f64::from(config.horizon_years) * SECONDS_PER_YEAR) as i64;

    let mut regions: BTreeMap<SynthClass, Region> = BTreeMap::new();
    regions.insert(SynthClass::NonHosting, Region::new(0xC612_0000, (1, 3))); // 198.18.0.0
    regions.insert(SynthClass::Hosting, Region::new(0x6440_0000, (1, 6))); // 100.64.0.0
    regions.insert(SynthClass::Dedicated, Region::new(0x6600_0000, (4, 16))); // 102.0.0.0
    regions.insert(SynthClass::Shared, Region::new(0x6800_0000, (8, 32))); // 104.0.0.0

    let plan: Vec<(SynthClass, usize)> = vec![
        (SynthClass::NonHosting, config.n_nonhosting),
        (SynthClass::Hosting, config.n_hosting),
        (SynthClass::Dedicated, config.n_dedicated),
        (SynthClass::Shared, config.n_shared),
    ];

    let mut apex_seq: u64 = 0;
    let mut ip_seq: u64 = 0;
    let mut truth_lines: Vec<TruthLine> = Vec::new();
    let mut shared_truth_ips: Vec<IpV4> = Vec::new();
    let mut multihome_jobs: Vec<MultihomeJob> = Vec::new();
    let mut n_malicious_apexes: u64 = 0;
    let mut used_blocks: BTreeMap<u32, Vec<u8>> = BTreeMap::new();

    for (class, count) in plan {
        let profile = config.profiles[&class].clone();
        let disp = profile.count_dispersion;
        let deep_mean_adj = {
            let p = prob_positive(profile.tld3_mean, disp);
            if p > 0.0 {
                profile.extra_fqdn_mean() / p
            } else {
                0.0
            }
        };
        for _ in 0..count {
            let (ip, gap) = regions.get_mut(&class).expect("region exists").next_ip(&mut rng);
            ip_seq += 1;
            used_blocks.entry(ip.as_u32() & 0xFFFF_FF00).or_default().push(ip.octets()[3]);

            // passive-DNS timeline -------------------------------------
            let churn_spans = if matches!(class, SynthClass::NonHosting) && profile.churn_mean == 0.0
            {
                Vec::new()
            } else {
                plan_churn(&mut rng, &profile, first_day, last_day)
            };
            let mut n2 = nb_count(&mut rng, profile.tld2_mean, disp);
            if !matches!(class, SynthClass::NonHosting) {
                n2 = n2.max(2); // hosting classes stay labelable
            }
            let n_core = n2.saturating_sub(churn_spans.len() as u64) as usize;
            let n3 = if n_core > 0 { nb_count(&mut rng, profile.tld3_mean, disp) } else { 0 };
            let n_deep = if n3 > 0 { nb_count(&mut rng, deep_mean_adj, disp) } else { 0 };

            let mut record = |name: &str, time_first: i64, time_last: i64, count: u64| {
                pdns.write_json(&PdnsOut {
                    name,
                    rrtype: "A",
                    ip: ip.to_string(),
                    time_first,
                    time_last,
                    count,
                })
            };

            let mut apexes: Vec<String> = Vec::with_capacity(n_core + churn_spans.len());
            let mut core_apexes: Vec<(String, i64)> = Vec::with_capacity(n_core);
            for _ in 0..n_core {
                let apex = format!("d{apex_seq}.com");
                apex_seq += 1;
                let duration =
                    lognormal_mean_std(&mut rng, profile.duration_mean_years, profile.duration_std_years)
                        .max(min_core_years);
                let time_first = reference - (duration * SECONDS_PER_YEAR) as i64;
                let obs = 1 + rng.gen_range(0..9);
                record(&apex, time_first, reference, obs)?;
                core_apexes.push((apex.clone(), time_first));
                apexes.push(apex);
            }
            for span in &churn_spans {
                let apex = format!("d{apex_seq}.com");
                apex_seq += 1;
                let time_first = span.first_day * SECONDS_PER_DAY + rng.gen_range(0..3_600);
                let time_last = if span.open_ended {
                    reference
                } else {
                    span.last_day * SECONDS_PER_DAY + SECONDS_PER_DAY - 1 - rng.gen_range(0..3_600)
                };
                record(&apex, time_first, time_last.max(time_first), 1)?;
                apexes.push(apex);
            }
            // sub-names inherit the parent apex's interval so per-apex
            // durations stay exactly the drawn lifetimes
            let mut first_tld3: Option<(String, i64)> = None;
            for k in 0..n3 {
                let (apex, apex_first) = &core_apexes[(k % n_core as u64) as usize];
                let name = format!("s{k}.{apex}");
                record(&name, *apex_first, reference, 1)?;
                if first_tld3.is_none() {
                    first_tld3 = Some((name, *apex_first));
                }
            }
            if let Some((base, base_first)) = &first_tld3 {
                for k in 0..n_deep {
                    let name = format!("w{k}.{base}");
                    record(&name, *base_first, reference, 1)?;
                }
            }

            // WHOIS history ---------------------------------------------
            let n_owners =
                1 + nb_count(&mut rng, (profile.owners_mean - 1.0).max(0.0), profile.whois_dispersion);
            // snapshot counts are deliberately over-dispersed so the record
            // count carries no cleaner signal than the owner count it bounds
            let n_snapshots =
                (1 + nb_count(&mut rng, (profile.whois_mean - 1.0).max(0.0), 0.35)).max(n_owners);
            let owners: Vec<String> =
                (0..n_owners).map(|k| format!("netop {ip_seq} {k}")).collect();
            // range sizes are capped by the gap to the previous generated
            // IP, keeping containment queries free of cross-IP bleed
            let ranges: Vec<(IpV4, IpV4)> = (0..n_owners)
                .map(|_| {
                    let sampled =
                        lognormal_mean_sigma(&mut rng, profile.inetnum_size_mean, 0.7).max(1.0);
                    let size = (sampled as u64).clamp(1, u64::from(gap)) as u32;
                    let start = ip.as_u32() - (size - 1);
                    (IpV4::from_u32(start), ip)
                })
                .collect();
            let years_since =
                lognormal_mean_sigma(&mut rng, profile.years_since_update_mean, profile.years_sigma);
            let newest_updated = reference - (years_since * SECONDS_PER_YEAR) as i64;
            let usable = horizon_secs * 9 / 10;
            for j in 0..n_snapshots {
                let owner_idx = (j.min(n_owners - 1)) as usize;
                let observed = reference - usable + (usable * (j as i64 + 1)) / (n_snapshots as i64 + 1);
                let updated = if j == n_snapshots - 1 {
                    newest_updated
                } else {
                    (observed - rng.gen_range(0..(SECONDS_PER_YEAR as i64))).min(newest_updated)
                };
                let net_type = NetType::ALL[pick_weighted(&mut rng, &profile.net_type_weights)];
                whois.write_json(&WhoisOut {
                    range_start: ranges[owner_idx].0.to_string(),
                    range_end: ranges[owner_idx].1.to_string(),
                    owner: &owners[owner_idx],
                    net_type: net_type.as_str(),
                    updated,
                    observed,
                })?;
            }

            // registrant planting ----------------------------------------
            let stage2_truth = match class {
                SynthClass::NonHosting => None,
                SynthClass::Dedicated => Some(SynthClass::Dedicated),
                SynthClass::Shared => Some(SynthClass::Shared),
                SynthClass::Hosting => Some(if rng.gen_bool(config.shared_frac_of_hosting) {
                    SynthClass::Shared
                } else {
                    SynthClass::Dedicated
                }),
            };
            let registrant_pool: Vec<String> = match stage2_truth {
                Some(SynthClass::Shared) => {
                    let extra = nb_count(&mut rng, 1.0, disp);
                    (0..2 + extra).map(|k| format!("owner {ip_seq} {k}")).collect()
                }
                _ => vec![format!("owner {ip_seq} 0")],
            };
            let mut apex_registrants: Vec<(&String, &String)> = Vec::with_capacity(apexes.len());
            for (i, apex) in apexes.iter().enumerate() {
                apex_registrants.push((apex, &registrant_pool[i % registrant_pool.len()]));
            }
            for (apex, registrant) in &apex_registrants {
                let private = rng.gen_bool(config.privacy_protected_frac);
                domain_whois.write_json(&DomainWhoisOut {
                    domain: apex,
                    registrant: Some(registrant),
                    privacy_protected: private,
                })?;
            }

            // malicious planting: mostly hosting IPs, but any IP with an
            // apex can carry malicious domains
            let mut malicious_apexes: Vec<String> = Vec::new();
            if let Some(mal) = &config.malicious {
                if rng.gen_bool(mal.hosting_ip_frac) && !apexes.is_empty() {
                    let want = (1 + nb_count(&mut rng, mal.apexes_per_ip_mean - 1.0, disp)) as usize;
                    let take = want.min(core_apexes.len().max(1)).min(apexes.len());
                    for i in 0..take {
                        let apex = apexes[i].clone();
                        let registrant = apex_registrants[i].1.clone();
                        let vt_writer = vt.as_mut().expect("vt file when malicious configured");
                        vt_writer.write_json(&VtOut {
                            domain: &apex,
                            positives: 5 + rng.gen_range(0..25),
                        })?;
                        if rng.gen_bool(0.4) {
                            let sub = format!("bad{}.{}", rng.gen_range(0..9), apex);
                            vt_writer.write_json(&VtOut {
                                domain: &sub,
                                positives: 5 + rng.gen_range(0..25),
                            })?;
                        }
                        if rng.gen_bool(mal.multihome_prob) && !shared_truth_ips.is_empty() {
                            let target =
                                shared_truth_ips[rng.gen_range(0..shared_truth_ips.len())];
                            multihome_jobs.push(MultihomeJob {
                                apex: apex.clone(),
                                target,
                                registrant,
                            });
                        }
                        malicious_apexes.push(apex);
                    }
                    n_malicious_apexes += malicious_apexes.len() as u64;
                }
            }

            if stage2_truth == Some(SynthClass::Shared) {
                shared_truth_ips.push(ip);
            }
            let mut owners_used: Vec<String> =
                apex_registrants.iter().map(|(_, r)| (*r).clone()).collect();
            owners_used.sort();
            owners_used.dedup();
            truth_lines.push(TruthLine {
                ip: ip.to_string(),
                stage1_truth: if matches!(class, SynthClass::NonHosting) {
                    "non-hosting".to_string()
                } else {
                    "hosting".to_string()
                },
                stage2_truth: stage2_truth.map(|c| c.as_str().to_string()),
                owners: owners_used,
                malicious: if malicious_apexes.is_empty() { None } else { Some(malicious_apexes) },
            });
        }
    }

    // co-host selected malicious apexes on earlier shared-truth IPs
    let mut extra_mal: BTreeMap<IpV4, Vec<String>> = BTreeMap::new();
    for job in &multihome_jobs {
        let first = reference - (SECONDS_PER_YEAR * 1.2) as i64;
        pdns.write_json(&PdnsOut {
            name: &job.apex,
            rrtype: "A",
            ip: job.target.to_string(),
            time_first: first,
            time_last: reference,
            count: 1,
        })?;
        extra_mal.entry(job.target).or_default().push(job.apex.clone());
    }
    for line in &mut truth_lines {
        let ip: IpV4 = line.ip.parse().expect("generated IP parses");
        if let Some(extras) = extra_mal.get(&ip) {
            let mal = line.malicious.get_or_insert_with(Vec::new);
            mal.extend(extras.iter().cloned());
            mal.sort();
            mal.dedup();
            for job in multihome_jobs.iter().filter(|j| j.target == ip) {
                if !line.owners.contains(&job.registrant) {
                    line.owners.push(job.registrant.clone());
                }
            }
            line.owners.sort();
        }
    }
    // unrelated background tenants in every used /24: not part of the
    // study population, but they keep prefix statistics from separating
    // the classes on neighborhood density alone
    if config.background_max_per_block > 0 && config.background_tld2_mean > 0.0 {
        for (base, taken) in &used_blocks {
            let n_bg = rng.gen_range(0..=config.background_max_per_block);
            let mut cursor: u16 = 1;
            for _ in 0..n_bg {
                cursor += 1 + rng.gen_range(0..8) as u16;
                // walk upward until a free last octet is found
                while cursor < 255 && taken.contains(&(cursor as u8)) {
                    cursor += 1;
                }
                if cursor >= 255 {
                    break;
                }
                let bg_ip = IpV4::from_u32(base | u32::from(cursor));
                let n_apex = nb_count(&mut rng, config.background_tld2_mean, 0.3);
                let n_tld3 = nb_count(&mut rng, config.background_tld2_mean * 0.1, 0.3);
                let first = reference - (SECONDS_PER_YEAR * 1.1) as i64;
                let mut first_apex: Option<String> = None;
                for _ in 0..n_apex {
                    let apex = format!("d{apex_seq}.com");
                    apex_seq += 1;
                    pdns.write_json(&PdnsOut {
                        name: &apex,
                        rrtype: "A",
                        ip: bg_ip.to_string(),
                        time_first: first,
                        time_last: reference,
                        count: 1,
                    })?;
                    first_apex.get_or_insert(apex);
                }
                if let Some(apex) = &first_apex {
                    for k in 0..n_tld3 {
                        pdns.write_json(&PdnsOut {
                            name: &format!("t{k}.{apex}"),
                            rrtype: "A",
                            ip: bg_ip.to_string(),
                            time_first: first,
                            time_last: reference,
                            count: 1,
                        })?;
                    }
                }
            }
        }
    }

    // a few confirmed-malicious apexes that resolve nowhere, plus
    // sub-threshold noise the filter must drop
    if let Some(vt_writer) = vt.as_mut() {
        for k in 0..3 {
            vt_writer.write_json(&VtOut { domain: &format!("ghost{k}.com"), positives: 6 })?;
            vt_writer.write_json(&VtOut { domain: &format!("noise{k}.com"), positives: 1 + k })?;
        }
    }

    for line in &truth_lines {
        truth.write_json(line)?;
    }

    // one ASN entry per /20 actually used, org pools per class flavor
    let mut used_20: BTreeMap<u32, SynthClass> = BTreeMap::new();
    for line in &truth_lines {
        let ip: IpV4 = line.ip.parse().expect("generated IP parses");
        let class = match ip.as_u32() >> 24 {
            0x64 => SynthClass::Hosting,
            0x66 => SynthClass::Dedicated,
            0x68 => SynthClass::Shared,
            _ => SynthClass::NonHosting,
        };
        used_20.insert(ip.as_u32() & 0xFFFF_F000, class);
    }
    let hosting_orgs =
        ["hostco alpha", "hostco beta", "hostco gamma", "hostco delta", "hostco epsilon"];
    let isp_orgs = ["ispnet one", "ispnet two", "ispnet three"];
    for (idx, (base, class)) in used_20.iter().enumerate() {
        let org = if matches!(class, SynthClass::NonHosting) {
            isp_orgs[(base >> 12) as usize % isp_orgs.len()]
        } else {
            hosting_orgs[(base >> 12) as usize % hosting_orgs.len()]
        };
        asn.write_json(&AsnOut {
            cidr: format!("{}/20", IpV4::from_u32(*base)),
            asn: 64_500 + idx as u32,
            org,
        })?;
    }

    let (pdns_path, n_pdns_records) = pdns.finish()?;
    let (whois_path, n_whois_snapshots) = whois.finish()?;
    let (asn_path, _) = asn.finish()?;
    let (truth_path, n_ips) = truth.finish()?;
    let (domain_whois_path, _) = domain_whois.finish()?;
    let vt_path = match vt {
        Some(w) => Some(w.finish()?.0),
        None => None,
    };

    Ok(SynthCorpus {
        dir: dir.to_path_buf(),
        pdns: pdns_path,
        whois: whois_path,
        asn: asn_path,
        truth: truth_path,
        domain_whois: domain_whois_path,
        vt: vt_path,
        n_ips: n_ips as usize,
        n_pdns_records,
        n_whois_snapshots,
        n_malicious_apexes,
    })
}
