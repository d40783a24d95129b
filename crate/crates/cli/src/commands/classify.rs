use hostclass::forest::load_model;
use hostclass::pipeline::{classify_batch, verdicts_csv, PipelineError, Thresholds};

use crate::args::{require, ClassifyArgs, GlobalArgs};
use crate::manifest::{write_output, ManifestBuilder};
use crate::{CliError, CliResult};

fn pipeline_code(err: &PipelineError) -> &'static str {
    match err {
        PipelineError::StageMismatch { .. } => "STAGE_MISMATCH",
        PipelineError::SchemaMismatch { .. } => "SCHEMA_MISMATCH",
        PipelineError::Model(hostclass::forest::ModelError::Version { .. }) => "MODEL_VERSION",
        PipelineError::Model(_) => "MODEL",
        PipelineError::Churn(_) => "CONFIG",
        PipelineError::VerdictCsv(..) => "PARSE",
    }
}

pub fn run(args: ClassifyArgs, global: &GlobalArgs) -> CliResult {
    let out = require(args.out.clone(), "out")?;
    let pdns_path = require(args.pdns.clone(), "pdns")?;
    let whois_path = require(args.whois.clone(), "whois")?;
    let m1_path = require(args.model1.clone(), "model1")?;
    let m2_path = require(args.model2.clone(), "model2")?;
    let reference = require(args.reference, "reference")?;
    let t1 = args.threshold.unwrap_or(hostclass::pipeline::DEFAULT_CONFIDENCE);
    let thresholds = Thresholds { stage1: t1, stage2: args.threshold2.unwrap_or(t1) };

    let suffixes = super::load_suffixes(args.suffixes.as_ref())?;
    let pdns = super::load_pdns(&pdns_path, &suffixes, global.strict())?;
    let whois = super::load_whois(&whois_path, global.strict())?;
    let m1 = load_model::<f64>(&m1_path).map_err(model_code)?;
    let m2 = load_model::<f64>(&m2_path).map_err(model_code)?;
    let ips = super::resolve_ips(args.ips.as_ref(), &pdns)?;

    let (verdicts, summary) = classify_batch(&pdns, &whois, &m1, &m2, &ips, reference, thresholds)
        .map_err(|e| CliError::new(pipeline_code(&e), e))?;

    let verdicts_path = write_output(&out, "verdicts.csv", &verdicts_csv(&verdicts))?;
    let summary_path =
        write_output(&out, "classify_summary.json", &super::to_json_pretty(&summary)?)?;

    #[derive(serde::Serialize)]
    struct Resolved {
        reference: i64,
        threshold_stage1: f64,
        threshold_stage2: f64,
        pdns: String,
        whois: String,
        model1: String,
        model2: String,
        ips: Option<String>,
        suffixes: Option<String>,
    }
    let p = |o: &Option<std::path::PathBuf>| o.as_ref().map(|x| x.display().to_string());
    let mut manifest = ManifestBuilder::new(
        "classify",
        &Resolved {
            reference,
            threshold_stage1: thresholds.stage1,
            threshold_stage2: thresholds.stage2,
            pdns: pdns_path.display().to_string(),
            whois: whois_path.display().to_string(),
            model1: m1_path.display().to_string(),
            model2: m2_path.display().to_string(),
            ips: p(&args.ips),
            suffixes: p(&args.suffixes),
        },
    )?;
    manifest.input(&pdns_path)?;
    manifest.input(&whois_path)?;
    manifest.input(&m1_path)?;
    manifest.input(&m2_path)?;
    manifest.input_opt(args.ips.as_ref())?;
    manifest.input_opt(args.suffixes.as_ref())?;
    manifest.output(&verdicts_path)?;
    manifest.output(&summary_path)?;
    manifest.write(&out)?;

    println!(
        "classify: {} IPs -> hosting {} / non-hosting {} / abstain {}; shared {} / dedicated {} / abstain {} -> {}",
        summary.n_ips,
        summary.n_hosting,
        summary.n_nonhosting,
        summary.n_abstain_stage1,
        summary.n_shared,
        summary.n_dedicated,
        summary.n_abstain_stage2,
        verdicts_path.display()
    );
    Ok(())
}

fn model_code(err: hostclass::forest::ModelError) -> CliError {
    let code = match &err {
        hostclass::forest::ModelError::Version { .. } => "MODEL_VERSION",
        hostclass::forest::ModelError::Corrupt(_) => "MODEL_CORRUPT",
        hostclass::forest::ModelError::Schema(_) => "SCHEMA_MISMATCH",
        hostclass::forest::ModelError::Io { .. } => "IO",
    };
    CliError::new(code, err)
}
