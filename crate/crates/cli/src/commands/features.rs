use std::collections::BTreeMap;

use rayon::prelude::*;

use hostclass::datamodel::{ClassLabel, IpV4, Stage};
use hostclass::features::{self, DEFAULT_WINDOW_DAYS};
use hostclass::synth::{load_truth, truth_by_ip};

use crate::args::{require, FeaturesArgs, GlobalArgs};
use crate::manifest::{write_output, ManifestBuilder};
use crate::{CliError, CliResult, Coded};

/// Label source for the optional last CSV column.
enum Labels {
    None,
    ByIp(BTreeMap<IpV4, ClassLabel>),
}

impl Labels {
    fn get(&self, ip: IpV4) -> Option<ClassLabel> {
        match self {
            Labels::None => None,
            Labels::ByIp(map) => map.get(&ip).copied(),
        }
    }
}

pub fn run(args: FeaturesArgs, global: &GlobalArgs) -> CliResult {
    let stage = super::parse_stage(args.stage.as_deref())?;
    let out = require(args.out.clone(), "out")?;
    let pdns_path = require(args.pdns.clone(), "pdns")?;
    let whois_path = require(args.whois.clone(), "whois")?;
    let reference = require(args.reference, "reference")?;
    let window_days = args.window_days.unwrap_or(DEFAULT_WINDOW_DAYS);
    if window_days < 2 {
        return Err(CliError::new("CONFIG", "window-days must be >= 2"));
    }
    if args.truth.is_some() && args.labels.is_some() {
        return Err(CliError::new("CONFIG", "--truth and --labels are mutually exclusive"));
    }

    let suffixes = super::load_suffixes(args.suffixes.as_ref())?;
    let pdns = super::load_pdns(&pdns_path, &suffixes, global.strict())?;
    let whois = super::load_whois(&whois_path, global.strict())?;

    // decide the row set and labels
    let mut candidates = super::resolve_ips(args.ips.as_ref(), &pdns)?;
    let labels = if let Some(truth_path) = &args.truth {
        let truth = load_truth(truth_path).code("INGEST")?;
        let by_ip = truth_by_ip(&truth);
        let mut map = BTreeMap::new();
        for (ip, line) in &by_ip {
            let label = match stage {
                Stage::Hosting => Some(line.stage1_truth.parse::<ClassLabel>().code("PARSE")?),
                Stage::Dedicated => match &line.stage2_truth {
                    Some(raw) => Some(raw.parse::<ClassLabel>().code("PARSE")?),
                    None => None,
                },
            };
            if let Some(label) = label {
                map.insert(*ip, label);
            }
        }
        // the truth file defines the row set unless --ips narrowed it
        if args.ips.is_none() {
            candidates = map.keys().copied().collect();
        } else {
            candidates.retain(|ip| map.contains_key(ip));
        }
        Labels::ByIp(map)
    } else if let Some(labels_path) = &args.labels {
        if stage != Stage::Dedicated {
            return Err(CliError::new("CONFIG", "--labels carries stage-2 labels; use --stage dedicated"));
        }
        let text = std::fs::read_to_string(labels_path).code("IO")?;
        let mut map = BTreeMap::new();
        for (idx, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(CliError::new("PARSE", format!("{}:{}: expected 3 fields", labels_path.display(), idx + 1)));
            }
            if fields[1] == "NA" {
                continue; // undecided IPs carry no label
            }
            let ip: IpV4 = fields[0].parse().code("PARSE")?;
            let label: ClassLabel = fields[1].parse().code("PARSE")?;
            map.insert(ip, label);
        }
        if args.ips.is_none() {
            candidates = map.keys().copied().collect();
        } else {
            candidates.retain(|ip| map.contains_key(ip));
        }
        Labels::ByIp(map)
    } else {
        Labels::None
    };

    let csv = match stage {
        Stage::Hosting => {
            let rows: Vec<_> = candidates
                .par_iter()
                .map(|&ip| {
                    let f = features::extract_hosting_features(&pdns, &whois, ip, reference);
                    (ip, f, labels.get(ip))
                })
                .collect();
            features::csv::write_hosting_csv(&rows)
        }
        Stage::Dedicated => {
            let rows: Vec<_> = candidates
                .par_iter()
                .map(|&ip| {
                    let f = features::extract_dedicated_features(&pdns, &whois, ip, reference, window_days)
                        .expect("window_days validated");
                    (ip, f, labels.get(ip))
                })
                .collect();
            features::csv::write_dedicated_csv(&rows)
        }
    };

    let csv_path = write_output(&out, "features.csv", &csv)?;
    let mut manifest = ManifestBuilder::new("features", &Resolved::from(&args, stage, reference, window_days))?;
    manifest.input(&pdns_path)?;
    manifest.input(&whois_path)?;
    manifest.input_opt(args.suffixes.as_ref())?;
    manifest.input_opt(args.ips.as_ref())?;
    manifest.input_opt(args.truth.as_ref())?;
    manifest.input_opt(args.labels.as_ref())?;
    manifest.output(&csv_path)?;
    manifest.write(&out)?;

    println!("features: {} rows ({} stage) -> {}", candidates.len(), stage, csv_path.display());
    Ok(())
}

#[derive(serde::Serialize)]
struct Resolved {
    stage: String,
    reference: i64,
    window_days: u32,
    pdns: String,
    whois: String,
    suffixes: Option<String>,
    ips: Option<String>,
    truth: Option<String>,
    labels: Option<String>,
}

impl Resolved {
    fn from(args: &FeaturesArgs, stage: Stage, reference: i64, window_days: u32) -> Self {
        let p = |o: &Option<std::path::PathBuf>| o.as_ref().map(|x| x.display().to_string());
        Resolved {
            stage: stage.to_string(),
            reference,
            window_days,
            pdns: args.pdns.as_ref().map(|x| x.display().to_string()).unwrap_or_default(),
            whois: args.whois.as_ref().map(|x| x.display().to_string()).unwrap_or_default(),
            suffixes: p(&args.suffixes),
            ips: p(&args.ips),
            truth: p(&args.truth),
            labels: p(&args.labels),
        }
    }
}
