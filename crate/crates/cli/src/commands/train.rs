use hostclass::features::read_features_csv;
use hostclass::forest::{save_model, train_forest, Dataset};
use hostclass::seed;

use crate::args::{require, GlobalArgs, TrainArgs};
use crate::manifest::{write_output, ManifestBuilder};
use crate::{CliResult, Coded};

pub fn run(args: TrainArgs, global: &GlobalArgs) -> CliResult {
    let stage = super::parse_stage(args.stage.as_deref())?;
    let out = require(args.out.clone(), "out")?;
    let features_path = require(args.features.clone(), "features")?;
    let params = args.forest.to_params(seed::derive(global.seed(), "train"))?;

    let text = std::fs::read_to_string(&features_path).code("IO")?;
    let parsed = read_features_csv::<f64>(&text, stage).code("PARSE")?;
    let data = Dataset::from_feature_csv(parsed).code("TRAIN")?;
    let model = train_forest(&data, &params).code("TRAIN")?;

    std::fs::create_dir_all(&out).code("IO")?;
    let model_path = out.join("model.json");
    save_model(&model, &model_path).code("IO")?;

    #[derive(serde::Serialize)]
    struct ImportanceRow {
        feature: String,
        importance: f64,
    }
    #[derive(serde::Serialize)]
    struct TrainReport {
        stage: String,
        n_rows: usize,
        class_counts: [u64; 2],
        params: hostclass::forest::ForestParams,
        oob_error: Option<f64>,
        oob_coverage: Option<f64>,
        importances: Vec<ImportanceRow>,
    }
    let mut importances: Vec<ImportanceRow> = model
        .schema
        .iter()
        .zip(&model.importances)
        .map(|(f, v)| ImportanceRow { feature: f.clone(), importance: *v })
        .collect();
    importances.sort_by(|a, b| b.importance.partial_cmp(&a.importance).unwrap().then(a.feature.cmp(&b.feature)));
    let report = TrainReport {
        stage: stage.to_string(),
        n_rows: data.n_rows(),
        class_counts: data.class_counts(),
        params: params.clone(),
        oob_error: model.oob_error,
        oob_coverage: model.oob_coverage,
        importances,
    };
    let report_path = write_output(&out, "train_report.json", &super::to_json_pretty(&report)?)?;

    let mut manifest = ManifestBuilder::new("train", &report)?;
    manifest.input(&features_path)?;
    manifest.output(&model_path)?;
    manifest.output(&report_path)?;
    manifest.write(&out)?;

    println!(
        "train: {} rows, oob error {} -> {}",
        data.n_rows(),
        model.oob_error.map_or("n/a".to_string(), |e| format!("{e:.4}")),
        model_path.display()
    );
    Ok(())
}
