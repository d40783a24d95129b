use std::collections::BTreeMap;

use hostclass::labeler;

use crate::args::{require, GlobalArgs, LabelArgs};
use crate::manifest::{write_output, ManifestBuilder};
use crate::{CliResult, Coded};

pub fn run(args: LabelArgs, global: &GlobalArgs) -> CliResult {
    let out = require(args.out.clone(), "out")?;
    let pdns_path = require(args.pdns.clone(), "pdns")?;
    let whois_path = require(args.domain_whois.clone(), "domain-whois")?;

    let suffixes = super::load_suffixes(args.suffixes.as_ref())?;
    let pdns = super::load_pdns(&pdns_path, &suffixes, global.strict())?;
    let (domain_whois, _) = labeler::load_domain_whois(&whois_path, global.strict()).code("INGEST")?;
    let redirects = match &args.redirects {
        Some(p) => labeler::load_redirects(p, global.strict()).code("INGEST")?.0,
        None => Vec::new(),
    };
    let manual = match &args.manual {
        Some(p) => labeler::load_manual(p, global.strict()).code("INGEST")?.0,
        None => BTreeMap::new(),
    };
    let ips = super::resolve_ips(args.ips.as_ref(), &pdns)?;

    let (decisions, summary) = labeler::label_corpus(&pdns, &ips, &domain_whois, &redirects, &manual);
    let csv_path = write_output(&out, "labels.csv", &labeler::labels_csv(&decisions))?;
    let summary_path = write_output(&out, "label_summary.json", &super::to_json_pretty(&summary)?)?;

    #[derive(serde::Serialize)]
    struct Resolved {
        pdns: String,
        domain_whois: String,
        redirects: Option<String>,
        manual: Option<String>,
        ips: Option<String>,
        suffixes: Option<String>,
    }
    let p = |o: &Option<std::path::PathBuf>| o.as_ref().map(|x| x.display().to_string());
    let mut manifest = ManifestBuilder::new(
        "label",
        &Resolved {
            pdns: pdns_path.display().to_string(),
            domain_whois: whois_path.display().to_string(),
            redirects: p(&args.redirects),
            manual: p(&args.manual),
            ips: p(&args.ips),
            suffixes: p(&args.suffixes),
        },
    )?;
    manifest.input(&pdns_path)?;
    manifest.input(&whois_path)?;
    manifest.input_opt(args.redirects.as_ref())?;
    manifest.input_opt(args.manual.as_ref())?;
    manifest.input_opt(args.ips.as_ref())?;
    manifest.input_opt(args.suffixes.as_ref())?;
    manifest.output(&csv_path)?;
    manifest.output(&summary_path)?;
    manifest.write(&out)?;

    println!(
        "label: {} IPs ({} decided, {} undecidable) -> {}",
        summary.total(),
        summary.total() - summary.undecidable,
        summary.undecidable,
        csv_path.display()
    );
    Ok(())
}
