//! Feature-matrix CSV conventions.
//!
//! First column is the IP, then the stage's canonical feature columns, then
//! an optional `label` column. Rows are written in the order supplied;
//! callers wanting byte-stable files sort IPs ascending first.

use thiserror::Error;

use crate::datamodel::{ClassLabel, IpV4, Stage};
use crate::scalar::Scalar;

use super::dedicated::{DedicatedFeatures, DEDICATED_SCHEMA};
use super::hosting::{HostingFeatures, HOSTING_SCHEMA};

#[derive(Debug, Error)]
pub enum FeatureCsvError {
    #[error("line {0}: {1}")]
    Line(u64, String),
    #[error("header mismatch for stage {stage}: expected {expected:?}, got {got:?}")]
    Header { stage: Stage, expected: String, got: String },
    #[error("empty feature file")]
    Empty,
}

pub fn schema(stage: Stage) -> Vec<String> {
    match stage {
        Stage::Hosting => HOSTING_SCHEMA.iter().map(|s| s.to_string()).collect(),
        Stage::Dedicated => DEDICATED_SCHEMA.iter().map(|s| s.to_string()).collect(),
    }
}

fn header(stage: Stage, with_label: bool) -> String {
    let mut h = String::from("ip");
    for col in schema(stage) {
        h.push(',');
        h.push_str(&col);
    }
    if with_label {
        h.push_str(",label");
    }
    h
}

fn push_row<R: Scalar>(out: &mut String, ip: IpV4, row: &[R], label: Option<ClassLabel>) {
    out.push_str(&ip.to_string());
    for v in row {
        out.push(',');
        out.push_str(&v.to_string());
    }
    if let Some(l) = label {
        out.push(',');
        out.push_str(l.as_str());
    }
    out.push('\n');
}

pub fn write_hosting_csv(rows: &[(IpV4, HostingFeatures, Option<ClassLabel>)]) -> String {
    let with_label = rows.iter().any(|(_, _, l)| l.is_some());
    let mut out = header(Stage::Hosting, with_label);
    out.push('\n');
    for (ip, f, label) in rows {
        push_row::<f64>(&mut out, *ip, &f.to_row(), if with_label { *label } else { None });
    }
    out
}

pub fn write_dedicated_csv(rows: &[(IpV4, DedicatedFeatures, Option<ClassLabel>)]) -> String {
    let with_label = rows.iter().any(|(_, _, l)| l.is_some());
    let mut out = header(Stage::Dedicated, with_label);
    out.push('\n');
    for (ip, f, label) in rows {
        push_row::<f64>(&mut out, *ip, &f.to_row(), if with_label { *label } else { None });
    }
    out
}

/// A parsed feature matrix; `labels` is present iff the file carried a
/// label column.
#[derive(Debug, Clone)]
pub struct ParsedFeatureCsv<R> {
    pub stage: Stage,
    pub schema: Vec<String>,
    pub ids: Vec<String>,
    pub ips: Vec<IpV4>,
    pub rows: Vec<Vec<R>>,
    pub labels: Option<Vec<ClassLabel>>,
}

pub fn read_features_csv<R: Scalar>(
    text: &str,
    stage: Stage,
) -> Result<ParsedFeatureCsv<R>, FeatureCsvError> {
    let mut lines = text.lines().enumerate();
    let (_, head) = lines.next().ok_or(FeatureCsvError::Empty)?;
    let with_label = if head == header(stage, false) {
        false
    } else if head == header(stage, true) {
        true
    } else {
        return Err(FeatureCsvError::Header {
            stage,
            expected: header(stage, true),
            got: head.to_string(),
        });
    };
    let cols = schema(stage);
    let mut parsed = ParsedFeatureCsv {
        stage,
        schema: cols.clone(),
        ids: Vec::new(),
        ips: Vec::new(),
        rows: Vec::new(),
        labels: if with_label { Some(Vec::new()) } else { None },
    };
    for (idx, line) in lines {
        let line_no = idx as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = 1 + cols.len() + usize::from(with_label);
        if fields.len() != expected {
            return Err(FeatureCsvError::Line(
                line_no,
                format!("expected {expected} fields, got {}", fields.len()),
            ));
        }
        let ip: IpV4 = fields[0]
            .parse()
            .map_err(|e: crate::datamodel::IpParseError| FeatureCsvError::Line(line_no, e.to_string()))?;
        let mut row = Vec::with_capacity(cols.len());
        for raw in &fields[1..1 + cols.len()] {
            let v: f64 = raw
                .parse()
                .map_err(|_| FeatureCsvError::Line(line_no, format!("bad number {raw:?}")))?;
            row.push(R::from_f64_(v));
        }
        if let Some(labels) = parsed.labels.as_mut() {
            let label: ClassLabel = fields[expected - 1]
                .parse()
                .map_err(|e| FeatureCsvError::Line(line_no, e))?;
            if label.stage() != stage {
                return Err(FeatureCsvError::Line(
                    line_no,
                    format!("label {label} does not belong to stage {stage}"),
                ));
            }
            labels.push(label);
        }
        parsed.ids.push(ip.to_string());
        parsed.ips.push(ip);
        parsed.rows.push(row);
    }
    Ok(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::NetType;

    fn sample() -> HostingFeatures {
        HostingFeatures {
            f1_num_tld2: 2,
            f2_num_tld3: 1,
            f3_num_domains: 3,
            f4_pct_dns_in_24: 0.390625,
            f5_mean_tld3_in_24: 0.0,
            f6_max_tld3_in_24: 0,
            f7_mean_tld2_in_24: 0.00390625,
            f8_max_tld2_in_24: 1,
            f9_num_owners: 2,
            f10_num_inetnums: 2,
            f11_max_inetnum_size: 1024,
            f12_min_inetnum_size: 256,
            f13_inetnum_size: 1024,
            f14_net_type: NetType::DirectAllocation,
            f15_years_since_update: 2.0,
            f16_num_whois: 2,
        }
    }

    #[test]
    fn roundtrip_with_labels() {
        let ip: IpV4 = "1.2.3.4".parse().unwrap();
        let text = write_hosting_csv(&[(ip, sample(), Some(ClassLabel::Hosting))]);
        let parsed: ParsedFeatureCsv<f64> = read_features_csv(&text, Stage::Hosting).unwrap();
        assert_eq!(parsed.ips, vec![ip]);
        assert_eq!(parsed.rows[0], sample().to_row::<f64>());
        assert_eq!(parsed.labels.unwrap(), vec![ClassLabel::Hosting]);
    }

    #[test]
    fn header_mismatch_detected() {
        let err = read_features_csv::<f64>("ip,bogus\n", Stage::Hosting).unwrap_err();
        assert!(matches!(err, FeatureCsvError::Header { .. }));
    }

    #[test]
    fn wrong_stage_label_rejected() {
        let ip: IpV4 = "1.2.3.4".parse().unwrap();
        let text = write_hosting_csv(&[(ip, sample(), Some(ClassLabel::Hosting))])
            .replace(",hosting", ",shared");
        assert!(read_features_csv::<f64>(&text, Stage::Hosting).is_err());
    }
}
