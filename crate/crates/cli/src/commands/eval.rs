use hostclass::features::read_features_csv;
use hostclass::forest::{kfold_eval, Dataset, EvalReport};
use hostclass::seed;

use crate::args::{require, EvalArgs, GlobalArgs};
use crate::manifest::{write_output, ManifestBuilder};
use crate::{CliResult, Coded};

fn metrics_line(report: &EvalReport<f64>) -> String {
    let fmt = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.4}"));
    format!(
        "{},{},{},{:.6},{},{},{},{}",
        fmt(report.precision),
        fmt(report.recall),
        fmt(report.fpr),
        report.auc,
        report.confusion[0][0],
        report.confusion[0][1],
        report.confusion[1][0],
        report.confusion[1][1],
    )
}

pub fn run(args: EvalArgs, global: &GlobalArgs) -> CliResult {
    let stage = super::parse_stage(args.stage.as_deref())?;
    let out = require(args.out.clone(), "out")?;
    let features_path = require(args.features.clone(), "features")?;
    let k = args.kfold.unwrap_or(5);
    let base_seed = seed::derive(global.seed(), "eval");
    let params = args.forest.to_params(base_seed)?;

    let text = std::fs::read_to_string(&features_path).code("IO")?;
    let parsed = read_features_csv::<f64>(&text, stage).code("PARSE")?;
    let data = Dataset::from_feature_csv(parsed).code("TRAIN")?;
    let (pooled, folds) = kfold_eval(&data, k, &params, base_seed).code("TRAIN")?;

    // ROC of the pooled held-out scores
    let mut roc_csv = String::from("fpr,tpr,threshold\n");
    for point in &pooled.roc {
        roc_csv.push_str(&format!("{},{},{}\n", point.fpr, point.tpr, point.threshold));
    }
    let roc_path = write_output(&out, "roc.csv", &roc_csv)?;

    #[derive(serde::Serialize)]
    struct Report {
        stage: String,
        k: usize,
        n_rows: usize,
        params: hostclass::forest::ForestParams,
        pooled: EvalReport<f64>,
        folds: Vec<EvalReport<f64>>,
    }
    let report = Report {
        stage: stage.to_string(),
        k,
        n_rows: data.n_rows(),
        params: params.clone(),
        pooled: pooled.clone(),
        folds,
    };

    let report_path = if args.csv.unwrap_or(false) {
        let mut csv =
            String::from("scope,precision,recall,fpr,auc,tp,fn,fp,tn\n");
        csv.push_str(&format!("pooled,{}\n", metrics_line(&report.pooled)));
        for (i, fold) in report.folds.iter().enumerate() {
            csv.push_str(&format!("fold{i},{}\n", metrics_line(fold)));
        }
        write_output(&out, "eval_report.csv", &csv)?
    } else {
        write_output(&out, "eval_report.json", &super::to_json_pretty(&report)?)?
    };

    let mut manifest = ManifestBuilder::new("eval", &report)?;
    manifest.input(&features_path)?;
    manifest.output(&report_path)?;
    manifest.output(&roc_path)?;
    manifest.write(&out)?;

    let fmt = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.2}"));
    println!(
        "eval: {}-fold on {} rows: precision {} recall {} fpr {} auc {:.4} -> {}",
        k,
        data.n_rows(),
        fmt(pooled.precision),
        fmt(pooled.recall),
        fmt(pooled.fpr),
        pooled.auc,
        report_path.display()
    );
    Ok(())
}
