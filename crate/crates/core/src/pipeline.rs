//! The two-stage classification pipeline with a confidence gate.
//!
//! Stage 1 scores an IP as hosting vs. non-hosting; only IPs confidently
//! classified hosting proceed to the shared/dedicated stage. An IP whose
//! winning probability falls below the stage's threshold is an explicit
//! abstention rather than a silent drop, and batch percentages are
//! reported over decided IPs only.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::datamodel::{IpV4, Stage};
use crate::features::{self, DEFAULT_WINDOW_DAYS};
use crate::forest::{ForestModel, ModelError};
use crate::ingest::{PdnsStore, WhoisStore};
use crate::scalar::Scalar;

pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Per-stage confidence thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds<R> {
    pub stage1: R,
    pub stage2: R,
}

impl<R: Scalar> Thresholds<R> {
    pub fn uniform(t: R) -> Self {
        Thresholds { stage1: t, stage2: t }
    }
}

impl<R: Scalar> Default for Thresholds<R> {
    fn default() -> Self {
        Thresholds::uniform(R::from_f64_(DEFAULT_CONFIDENCE))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage1Decision {
    Hosting,
    NonHosting,
    Abstain,
}

impl Stage1Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage1Decision::Hosting => "hosting",
            Stage1Decision::NonHosting => "non-hosting",
            Stage1Decision::Abstain => "abstain",
        }
    }
}

impl fmt::Display for Stage1Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage1Decision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hosting" => Ok(Stage1Decision::Hosting),
            "non-hosting" => Ok(Stage1Decision::NonHosting),
            "abstain" => Ok(Stage1Decision::Abstain),
            other => Err(format!("unknown stage-1 decision {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage2Decision {
    Dedicated,
    Shared,
    Abstain,
}

impl Stage2Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage2Decision::Dedicated => "dedicated",
            Stage2Decision::Shared => "shared",
            Stage2Decision::Abstain => "abstain",
        }
    }
}

impl fmt::Display for Stage2Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage2Decision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dedicated" => Ok(Stage2Decision::Dedicated),
            "shared" => Ok(Stage2Decision::Shared),
            "abstain" => Ok(Stage2Decision::Abstain),
            other => Err(format!("unknown stage-2 decision {other:?}")),
        }
    }
}

/// Pipeline output for one IP. `p_shared`/`stage2` are populated exactly
/// when stage 1 decided hosting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpVerdict<R> {
    pub ip: IpV4,
    pub p_hosting: R,
    pub stage1: Stage1Decision,
    pub p_shared: Option<R>,
    pub stage2: Option<Stage2Decision>,
    pub pdns_present: bool,
    pub whois_present: bool,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{which} model is a {got} model, expected {expected}")]
    StageMismatch { which: &'static str, expected: Stage, got: Stage },
    #[error("{which} model schema differs from the extracted feature schema")]
    SchemaMismatch { which: &'static str },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Churn(#[from] features::ChurnError),
    #[error("verdict line {0}: {1}")]
    VerdictCsv(u64, String),
}

fn check_models<R: Scalar>(
    m1: &ForestModel<R>,
    m2: &ForestModel<R>,
) -> Result<(), PipelineError> {
    if m1.stage != Stage::Hosting {
        return Err(PipelineError::StageMismatch {
            which: "stage-1",
            expected: Stage::Hosting,
            got: m1.stage,
        });
    }
    if m2.stage != Stage::Dedicated {
        return Err(PipelineError::StageMismatch {
            which: "stage-2",
            expected: Stage::Dedicated,
            got: m2.stage,
        });
    }
    if m1.schema != features::csv::schema(Stage::Hosting) {
        return Err(PipelineError::SchemaMismatch { which: "stage-1" });
    }
    if m2.schema != features::csv::schema(Stage::Dedicated) {
        return Err(PipelineError::SchemaMismatch { which: "stage-2" });
    }
    Ok(())
}

fn gate<R: Scalar>(p_positive: R, threshold: R) -> Option<bool> {
    if p_positive >= threshold {
        Some(true)
    } else if R::one() - p_positive >= threshold {
        Some(false)
    } else {
        None
    }
}

fn classify_checked<R: Scalar>(
    pdns: &PdnsStore,
    whois: &WhoisStore,
    m1: &ForestModel<R>,
    m2: &ForestModel<R>,
    ip: IpV4,
    reference: i64,
    thresholds: Thresholds<R>,
) -> IpVerdict<R> {
    let hosting = features::extract_hosting_features(pdns, whois, ip, reference);
    let row: Vec<R> = hosting.to_row();
    let p_hosting = m1.predict_proba(&row).expect("schema pre-checked")[0];
    let pdns_present = !pdns.records(ip).is_empty();
    let whois_present = !whois.history(ip, reference).is_empty();

    let mut verdict = IpVerdict {
        ip,
        p_hosting,
        stage1: Stage1Decision::Abstain,
        p_shared: None,
        stage2: None,
        pdns_present,
        whois_present,
    };
    match gate(p_hosting, thresholds.stage1) {
        Some(true) => verdict.stage1 = Stage1Decision::Hosting,
        Some(false) => {
            verdict.stage1 = Stage1Decision::NonHosting;
            return verdict;
        }
        None => return verdict,
    }

    let dedicated =
        features::extract_dedicated_features(pdns, whois, ip, reference, DEFAULT_WINDOW_DAYS)
            .expect("default window is valid");
    let row: Vec<R> = dedicated.to_row();
    // shared is index 1 of the stage-2 class order
    let p_shared = m2.predict_proba(&row).expect("schema pre-checked")[1];
    verdict.p_shared = Some(p_shared);
    verdict.stage2 = Some(match gate(p_shared, thresholds.stage2) {
        Some(true) => Stage2Decision::Shared,
        Some(false) => Stage2Decision::Dedicated,
        None => Stage2Decision::Abstain,
    });
    verdict
}

/// Classify one IP through both stages.
pub fn classify_ip<R: Scalar>(
    pdns: &PdnsStore,
    whois: &WhoisStore,
    m1: &ForestModel<R>,
    m2: &ForestModel<R>,
    ip: IpV4,
    reference: i64,
    thresholds: Thresholds<R>,
) -> Result<IpVerdict<R>, PipelineError> {
    check_models(m1, m2)?;
    Ok(classify_checked(pdns, whois, m1, m2, ip, reference, thresholds))
}

/// Batch counts; percentages are over decided IPs at each stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BatchSummary {
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
}

pub fn summarize<R: Scalar>(verdicts: &[IpVerdict<R>]) -> BatchSummary {
    let mut s = BatchSummary { n_ips: verdicts.len() as u64, ..BatchSummary::default() };
    for v in verdicts {
        match v.stage1 {
            Stage1Decision::Hosting => s.n_hosting += 1,
            Stage1Decision::NonHosting => s.n_nonhosting += 1,
            Stage1Decision::Abstain => s.n_abstain_stage1 += 1,
        }
        match v.stage2 {
            Some(Stage2Decision::Shared) => s.n_shared += 1,
            Some(Stage2Decision::Dedicated) => s.n_dedicated += 1,
            Some(Stage2Decision::Abstain) => s.n_abstain_stage2 += 1,
            None => {}
        }
    }
    let pct = |num: u64, den: u64| {
        if den == 0 {
            None
        } else {
            Some(100.0 * num as f64 / den as f64)
        }
    };
    let decided1 = s.n_hosting + s.n_nonhosting;
    let decided2 = s.n_shared + s.n_dedicated;
    s.pct_hosting = pct(s.n_hosting, decided1);
    s.pct_nonhosting = pct(s.n_nonhosting, decided1);
    s.pct_shared = pct(s.n_shared, decided2);
    s.pct_dedicated = pct(s.n_dedicated, decided2);
    s
}

/// Classify a batch of IPs. Verdicts come back in input order and each
/// verdict is independent of the rest of the batch.
pub fn classify_batch<R: Scalar>(
    pdns: &PdnsStore,
    whois: &WhoisStore,
    m1: &ForestModel<R>,
    m2: &ForestModel<R>,
    ips: &[IpV4],
    reference: i64,
    thresholds: Thresholds<R>,
) -> Result<(Vec<IpVerdict<R>>, BatchSummary), PipelineError> {
    check_models(m1, m2)?;
    let verdicts: Vec<IpVerdict<R>> = ips
        .par_iter()
        .map(|&ip| classify_checked(pdns, whois, m1, m2, ip, reference, thresholds))
        .collect();
    let summary = summarize(&verdicts);
    Ok((verdicts, summary))
}

/// `ip,p_hosting,stage1,p_shared,stage2` with `NA` for absent fields.
pub fn verdicts_csv<R: Scalar>(verdicts: &[IpVerdict<R>]) -> String {
    let mut out = String::from("ip,p_hosting,stage1,p_shared,stage2\n");
    for v in verdicts {
        out.push_str(&v.ip.to_string());
        out.push(',');
        out.push_str(&v.p_hosting.to_string());
        out.push(',');
        out.push_str(v.stage1.as_str());
        out.push(',');
        match v.p_shared {
            Some(p) => out.push_str(&p.to_string()),
            None => out.push_str("NA"),
        }
        out.push(',');
        match v.stage2 {
            Some(d) => out.push_str(d.as_str()),
            None => out.push_str("NA"),
        }
        out.push('\n');
    }
    out
}

/// Parse a verdicts CSV back. Feature-availability flags are not part of
/// the wire format and come back as `false`.
pub fn read_verdicts_csv<R: Scalar>(text: &str) -> Result<Vec<IpVerdict<R>>, PipelineError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, head)) if head == "ip,p_hosting,stage1,p_shared,stage2" => {}
        other => {
            return Err(PipelineError::VerdictCsv(
                1,
                format!("bad header: {:?}", other.map(|(_, h)| h)),
            ))
        }
    }
    let mut verdicts = Vec::new();
    for (idx, line) in lines {
        let line_no = idx as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(PipelineError::VerdictCsv(line_no, format!("expected 5 fields, got {}", fields.len())));
        }
        let err = |msg: String| PipelineError::VerdictCsv(line_no, msg);
        let ip: IpV4 = fields[0].parse().map_err(|e: crate::datamodel::IpParseError| err(e.to_string()))?;
        let p_hosting: f64 = fields[1].parse().map_err(|_| err(format!("bad probability {:?}", fields[1])))?;
        let stage1: Stage1Decision = fields[2].parse().map_err(err)?;
        let p_shared = match fields[3] {
            "NA" => None,
            raw => Some(R::from_f64_(raw.parse::<f64>().map_err(|_| err(format!("bad probability {raw:?}")))?)),
        };
        let stage2 = match fields[4] {
            "NA" => None,
            raw => Some(raw.parse::<Stage2Decision>().map_err(err)?),
        };
        if stage2.is_some() != matches!(stage1, Stage1Decision::Hosting) {
            return Err(err("stage-2 fields must be present exactly for hosting verdicts".into()));
        }
        verdicts.push(IpVerdict {
            ip,
            p_hosting: R::from_f64_(p_hosting),
            stage1,
            p_shared,
            stage2,
            pdns_present: false,
            whois_present: false,
        });
    }
    Ok(verdicts)
}
