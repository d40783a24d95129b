use hostclass::analysis::{
    filter_vt_feed, hosting_split_report, per_ip_distribution, provider_ranking,
    resolve_malicious,
};
use hostclass::ingest::load_asn;
use hostclass::pipeline::read_verdicts_csv;

use crate::args::{require, AnalyzeArgs, GlobalArgs};
use crate::manifest::{write_output, ManifestBuilder};
use crate::{CliResult, Coded};

fn pairs_csv(pairs: &[(String, u64)], header: &str) -> String {
    let mut out = format!("{header}\n");
    for (org, count) in pairs {
        out.push_str(&format!("{org},{count}\n"));
    }
    out
}

fn cdf_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("value,cumulative_fraction\n");
    for (v, f) in points {
        out.push_str(&format!("{v},{f}\n"));
    }
    out
}

pub fn run(args: AnalyzeArgs, global: &GlobalArgs) -> CliResult {
    let out = require(args.out.clone(), "out")?;
    let pdns_path = require(args.pdns.clone(), "pdns")?;
    let asn_path = require(args.asn.clone(), "asn")?;
    let verdicts_path = require(args.verdicts.clone(), "verdicts")?;
    let vt_path = require(args.vt.clone(), "vt")?;
    let min_positives = args.min_positives.unwrap_or(5);
    let k = args.k.unwrap_or(5);

    let suffixes = super::load_suffixes(args.suffixes.as_ref())?;
    let pdns = super::load_pdns(&pdns_path, &suffixes, global.strict())?;
    let (asn, _) = load_asn(&asn_path, global.strict()).code("INGEST")?;
    let verdicts_text = std::fs::read_to_string(&verdicts_path).code("IO")?;
    let verdicts = read_verdicts_csv::<f64>(&verdicts_text).code("PARSE")?;
    let (mal, vt_stats) =
        filter_vt_feed(&vt_path, min_positives, &suffixes, global.strict()).code("INGEST")?;

    let resolved = resolve_malicious(&pdns, &mal);
    let split = hosting_split_report(&verdicts, &resolved.by_ip).code("ANALYSIS")?;
    let dist = per_ip_distribution(&pdns, &verdicts, &resolved.by_ip);
    let providers = provider_ranking(&asn, &pdns, &verdicts, &resolved.by_ip, k).code("ANALYSIS")?;

    let mut per_ip_csv = String::from("ip,n_total_domains,n_malicious,stage2\n");
    for row in &dist.rows {
        per_ip_csv.push_str(&format!(
            "{},{},{},shared\n",
            row.ip, row.n_total_domains, row.n_malicious
        ));
    }

    #[derive(serde::Serialize)]
    struct Summary<'a> {
        min_positives: u32,
        n_malicious_apexes: usize,
        n_malicious_hosting_ips: usize,
        n_unresolved_apexes: usize,
        vt_lines: u64,
        split: &'a hostclass::analysis::HostingSplitReport,
        accounting: &'a hostclass::analysis::PairAccounting,
        ranking_depth: usize,
    }
    let summary = Summary {
        min_positives,
        n_malicious_apexes: mal.apexes.len(),
        n_malicious_hosting_ips: resolved.by_ip.len(),
        n_unresolved_apexes: resolved.unresolved.len(),
        vt_lines: vt_stats.lines,
        split: &split,
        accounting: &providers.accounting,
        ranking_depth: k,
    };

    let summary_path =
        write_output(&out, "analysis_summary.json", &super::to_json_pretty(&summary)?)?;
    let per_ip_path = write_output(&out, "per_ip.csv", &per_ip_csv)?;
    let cdf_total_path = write_output(&out, "cdf_total_domains.csv", &cdf_csv(&dist.cdf_total))?;
    let cdf_mal_path =
        write_output(&out, "cdf_malicious_domains.csv", &cdf_csv(&dist.cdf_malicious))?;
    let top_all_path = write_output(
        &out,
        "providers_all.csv",
        &pairs_csv(&providers.top_all, "org,n_domains_total"),
    )?;
    let top_shared_path = write_output(
        &out,
        "providers_malicious_shared.csv",
        &pairs_csv(&providers.top_malicious_shared, "org,n_malicious_shared"),
    )?;
    let top_dedicated_path = write_output(
        &out,
        "providers_malicious_dedicated.csv",
        &pairs_csv(&providers.top_malicious_dedicated, "org,n_malicious_dedicated"),
    )?;

    let mut manifest = ManifestBuilder::new("analyze", &summary)?;
    manifest.input(&pdns_path)?;
    manifest.input(&asn_path)?;
    manifest.input(&verdicts_path)?;
    manifest.input(&vt_path)?;
    manifest.input_opt(args.suffixes.as_ref())?;
    for path in [
        &summary_path,
        &per_ip_path,
        &cdf_total_path,
        &cdf_mal_path,
        &top_all_path,
        &top_shared_path,
        &top_dedicated_path,
    ] {
        manifest.output(path)?;
    }
    manifest.write(&out)?;

    println!(
        "analyze: {} malicious apexes on {} IPs ({} unresolved); hosting {}%, shared {}% -> {}",
        summary.n_malicious_apexes,
        summary.n_malicious_hosting_ips,
        summary.n_unresolved_apexes,
        split.pct_hosting.map_or("NA".to_string(), |v| format!("{v:.1}")),
        split.pct_shared.map_or("NA".to_string(), |v| format!("{v:.1}")),
        out.display()
    );
    Ok(())
}
