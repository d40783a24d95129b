//! Ground-truth labeling of hosting IPs as dedicated or shared.
//!
//! Rules are applied in strict order per IP:
//!   1. a single hosted apex is dedicated by definition;
//!   2. if every hosted apex has a usable (non-redacted) registrant, equal
//!      registrants mean dedicated and any difference means shared;
//!   3. if every hosted apex redirects, transitively, to one common sink
//!      apex, the IP is dedicated;
//!   4. an externally supplied manual annotation decides;
//! otherwise the IP is undecidable.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::{ClassLabel, IpV4};
use crate::ingest::{for_each_json_line, IngestError, LoadStats, PdnsStore};

/// Registrant info for one apex, from domain WHOIS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainWhois {
    pub domain: String,
    pub registrant: Option<String>,
    pub privacy_protected: bool,
}

impl DomainWhois {
    /// Registrant normalized for comparison (case and surrounding
    /// whitespace insensitive); `None` when redacted or privacy protected.
    pub fn usable_registrant(&self) -> Option<String> {
        if self.privacy_protected {
            return None;
        }
        let r = self.registrant.as_ref()?.trim().to_lowercase();
        if r.is_empty() {
            None
        } else {
            Some(r)
        }
    }
}

/// One redirect between apexes. Self-loops are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedirectEdge {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelRule {
    SingleDomain,
    RegistrantMatch,
    RegistrantMismatch,
    RedirectConvergence,
    ManualAnnotation,
    Undecidable,
}

impl LabelRule {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelRule::SingleDomain => "single_domain",
            LabelRule::RegistrantMatch => "registrant_match",
            LabelRule::RegistrantMismatch => "registrant_mismatch",
            LabelRule::RedirectConvergence => "redirect_convergence",
            LabelRule::ManualAnnotation => "manual_annotation",
            LabelRule::Undecidable => "undecidable",
        }
    }
}

impl fmt::Display for LabelRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Labeling outcome for one IP. `label` is absent exactly when the rule is
/// `Undecidable`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelDecision {
    pub ip: IpV4,
    pub label: Option<ClassLabel>,
    pub rule: LabelRule,
    pub note: Option<String>,
}

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("{0} is not a hosting candidate: no hosted apexes")]
    NotHosting(IpV4),
    #[error("manual annotation for {0} must be dedicated or shared, got {1}")]
    BadManualLabel(IpV4, ClassLabel),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

const REDIRECT_HOP_LIMIT: usize = 10;

/// Apexes reachable from `start` (inclusive) within the hop limit.
fn reachable<'a>(
    start: &'a str,
    adjacency: &BTreeMap<&'a str, BTreeSet<&'a str>>,
) -> BTreeSet<&'a str> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut queue: VecDeque<(&str, usize)> = VecDeque::new();
    seen.insert(start);
    queue.push_back((start, 0));
    while let Some((node, depth)) = queue.pop_front() {
        if depth == REDIRECT_HOP_LIMIT {
            continue;
        }
        if let Some(nexts) = adjacency.get(node) {
            for next in nexts {
                if seen.insert(next) {
                    queue.push_back((next, depth + 1));
                }
            }
        }
    }
    seen
}

/// Rule 3: do all `apexes` funnel into exactly one terminal apex?
///
/// A terminal (sink) apex has no outgoing redirect. Cycles have no sink and
/// therefore fail closed; so do graphs where the apexes share several
/// sinks or none.
fn redirect_convergence(apexes: &BTreeSet<&str>, redirects: &[RedirectEdge]) -> bool {
    if redirects.is_empty() {
        return false;
    }
    let mut adjacency: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for edge in redirects {
        if edge.from != edge.to {
            adjacency.entry(edge.from.as_str()).or_default().insert(edge.to.as_str());
        }
    }
    let mut common: Option<BTreeSet<&str>> = None;
    for apex in apexes {
        let sinks: BTreeSet<&str> = reachable(apex, &adjacency)
            .into_iter()
            .filter(|n| !adjacency.contains_key(n))
            .collect();
        common = Some(match common {
            None => sinks,
            Some(prev) => prev.intersection(&sinks).copied().collect(),
        });
        if common.as_ref().is_some_and(BTreeSet::is_empty) {
            return false;
        }
    }
    common.is_some_and(|c| c.len() == 1)
}

/// Apply the rule cascade to one IP.
pub fn label_ip(
    pdns: &PdnsStore,
    ip: IpV4,
    whois: &BTreeMap<String, DomainWhois>,
    redirects: &[RedirectEdge],
    manual: Option<ClassLabel>,
) -> Result<LabelDecision, LabelError> {
    if let Some(m) = manual {
        if !matches!(m, ClassLabel::Dedicated | ClassLabel::Shared) {
            return Err(LabelError::BadManualLabel(ip, m));
        }
    }
    let apexes = pdns.apexes(ip);
    if apexes.is_empty() {
        return Err(LabelError::NotHosting(ip));
    }
    let decide = |label, rule| LabelDecision { ip, label: Some(label), rule, note: None };

    if apexes.len() == 1 {
        return Ok(decide(ClassLabel::Dedicated, LabelRule::SingleDomain));
    }

    let registrants: Vec<Option<String>> = apexes
        .iter()
        .map(|apex| whois.get(*apex).and_then(DomainWhois::usable_registrant))
        .collect();
    if registrants.iter().all(Option::is_some) {
        let first = registrants[0].as_ref().expect("all present");
        let all_equal = registrants.iter().all(|r| r.as_ref() == Some(first));
        return Ok(if all_equal {
            decide(ClassLabel::Dedicated, LabelRule::RegistrantMatch)
        } else {
            decide(ClassLabel::Shared, LabelRule::RegistrantMismatch)
        });
    }

    if redirect_convergence(&apexes, redirects) {
        return Ok(decide(ClassLabel::Dedicated, LabelRule::RedirectConvergence));
    }

    if let Some(m) = manual {
        return Ok(decide(m, LabelRule::ManualAnnotation));
    }

    Ok(LabelDecision { ip, label: None, rule: LabelRule::Undecidable, note: None })
}

/// Per-rule decision counts; they sum to the number of labeled IPs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LabelSummary {
    pub single_domain: u64,
    pub registrant_match: u64,
    pub registrant_mismatch: u64,
    pub redirect_convergence: u64,
    pub manual_annotation: u64,
    pub undecidable: u64,
}

impl LabelSummary {
    fn bump(&mut self, rule: LabelRule) {
        match rule {
            LabelRule::SingleDomain => self.single_domain += 1,
            LabelRule::RegistrantMatch => self.registrant_match += 1,
            LabelRule::RegistrantMismatch => self.registrant_mismatch += 1,
            LabelRule::RedirectConvergence => self.redirect_convergence += 1,
            LabelRule::ManualAnnotation => self.manual_annotation += 1,
            LabelRule::Undecidable => self.undecidable += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.single_domain
            + self.registrant_match
            + self.registrant_mismatch
            + self.redirect_convergence
            + self.manual_annotation
            + self.undecidable
    }
}

/// Label a batch of IPs. Per-IP failures (no hosted apexes) become
/// undecidable decisions carrying a diagnostic note instead of aborting.
pub fn label_corpus(
    pdns: &PdnsStore,
    ips: &[IpV4],
    whois: &BTreeMap<String, DomainWhois>,
    redirects: &[RedirectEdge],
    manual: &BTreeMap<IpV4, ClassLabel>,
) -> (Vec<LabelDecision>, LabelSummary) {
    let mut decisions = Vec::with_capacity(ips.len());
    let mut summary = LabelSummary::default();
    for &ip in ips {
        let decision = match label_ip(pdns, ip, whois, redirects, manual.get(&ip).copied()) {
            Ok(d) => d,
            Err(e) => LabelDecision {
                ip,
                label: None,
                rule: LabelRule::Undecidable,
                note: Some(e.to_string()),
            },
        };
        summary.bump(decision.rule);
        decisions.push(decision);
    }
    (decisions, summary)
}

/// `ip,label,rule` with `NA` for undecided labels.
pub fn labels_csv(decisions: &[LabelDecision]) -> String {
    let mut out = String::from("ip,label,rule\n");
    for d in decisions {
        out.push_str(&d.ip.to_string());
        out.push(',');
        out.push_str(d.label.map_or("NA", ClassLabel::as_str));
        out.push(',');
        out.push_str(d.rule.as_str());
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// input files

#[derive(Debug, Serialize, Deserialize)]
struct DomainWhoisLine {
    domain: String,
    registrant: Option<String>,
    privacy_protected: bool,
}

pub fn domain_whois_line(w: &DomainWhois) -> String {
    serde_json::to_string(&DomainWhoisLine {
        domain: w.domain.clone(),
        registrant: w.registrant.clone(),
        privacy_protected: w.privacy_protected,
    })
    .expect("serializes")
}

pub fn load_domain_whois_reader<R: Read>(
    reader: R,
    path: &str,
    strict: bool,
) -> Result<(BTreeMap<String, DomainWhois>, LoadStats), IngestError> {
    let mut stats = LoadStats::default();
    let mut map = BTreeMap::new();
    stats.lines = for_each_json_line::<DomainWhoisLine, _, _, _>(
        reader,
        path,
        strict,
        |_, line| {
            let apex = line.domain.trim().trim_end_matches('.').to_lowercase();
            if apex.is_empty() {
                return Err("empty domain".to_string());
            }
            map.insert(
                apex.clone(),
                DomainWhois {
                    domain: apex,
                    registrant: line.registrant,
                    privacy_protected: line.privacy_protected,
                },
            );
            Ok(())
        },
        |_, _| stats.malformed += 1,
    )?;
    stats.loaded = map.len() as u64;
    Ok((map, stats))
}

pub fn load_domain_whois(
    path: &Path,
    strict: bool,
) -> Result<(BTreeMap<String, DomainWhois>, LoadStats), IngestError> {
    let file = std::fs::File::open(path)
        .map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
    load_domain_whois_reader(file, &path.display().to_string(), strict)
}

#[derive(Debug, Serialize, Deserialize)]
struct RedirectLine {
    from: String,
    to: String,
}

pub fn redirect_line(e: &RedirectEdge) -> String {
    serde_json::to_string(&RedirectLine { from: e.from.clone(), to: e.to.clone() })
        .expect("serializes")
}

pub fn load_redirects_reader<R: Read>(
    reader: R,
    path: &str,
    strict: bool,
) -> Result<(Vec<RedirectEdge>, LoadStats), IngestError> {
    let mut stats = LoadStats::default();
    let mut edges = Vec::new();
    stats.lines = for_each_json_line::<RedirectLine, _, _, _>(
        reader,
        path,
        strict,
        |_, line| {
            let from = line.from.trim().trim_end_matches('.').to_lowercase();
            let to = line.to.trim().trim_end_matches('.').to_lowercase();
            if from.is_empty() || to.is_empty() {
                return Err("empty apex in redirect".to_string());
            }
            if from != to {
                edges.push(RedirectEdge { from, to });
            }
            Ok(())
        },
        |_, _| stats.malformed += 1,
    )?;
    stats.loaded = edges.len() as u64;
    Ok((edges, stats))
}

pub fn load_redirects(path: &Path, strict: bool) -> Result<(Vec<RedirectEdge>, LoadStats), IngestError> {
    let file = std::fs::File::open(path)
        .map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
    load_redirects_reader(file, &path.display().to_string(), strict)
}

#[derive(Debug, Serialize, Deserialize)]
struct ManualLine {
    ip: String,
    label: String,
}

pub fn load_manual_reader<R: Read>(
    reader: R,
    path: &str,
    strict: bool,
) -> Result<(BTreeMap<IpV4, ClassLabel>, LoadStats), IngestError> {
    let mut stats = LoadStats::default();
    let mut map = BTreeMap::new();
    stats.lines = for_each_json_line::<ManualLine, _, _, _>(
        reader,
        path,
        strict,
        |_, line| {
            let ip: IpV4 = line.ip.parse().map_err(|e: crate::datamodel::IpParseError| e.to_string())?;
            let label: ClassLabel = line.label.parse()?;
            if !matches!(label, ClassLabel::Dedicated | ClassLabel::Shared) {
                return Err(format!("manual label must be dedicated or shared, got {label}"));
            }
            map.insert(ip, label);
            Ok(())
        },
        |_, _| stats.malformed += 1,
    )?;
    stats.loaded = map.len() as u64;
    Ok((map, stats))
}

pub fn load_manual(path: &Path, strict: bool) -> Result<(BTreeMap<IpV4, ClassLabel>, LoadStats), IngestError> {
    let file = std::fs::File::open(path)
        .map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
    load_manual_reader(file, &path.display().to_string(), strict)
}
