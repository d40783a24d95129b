use hostclass::seed;
use hostclass::synth::{generate, GeneratorConfig, MaliciousConfig, SynthClass};

use crate::args::{require, GlobalArgs, SynthArgs};
use crate::manifest::ManifestBuilder;
use crate::{CliError, CliResult, Coded};

pub fn run(args: SynthArgs, global: &GlobalArgs) -> CliResult {
    let out = require(args.out.clone(), "out")?;
    let reference = require(args.reference, "reference")?;

    let mut config = GeneratorConfig::new(seed::derive(global.seed(), "synth"), reference);
    let n = args.n.unwrap_or(0);
    config.n_hosting = args.n_hosting.unwrap_or(n);
    config.n_nonhosting = args.n_nonhosting.unwrap_or(n);
    config.n_dedicated = args.n_dedicated.unwrap_or(0);
    config.n_shared = args.n_shared.unwrap_or(0);
    config.shared_frac_of_hosting = args.shared_frac.unwrap_or(0.5);
    config.window_days = args.window_days.unwrap_or(60);
    config.horizon_years = args.horizon_years.unwrap_or(10);
    config.privacy_protected_frac = args.privacy_frac.unwrap_or(0.0);
    if let Some(frac) = args.malicious_frac {
        config.malicious = Some(MaliciousConfig {
            hosting_ip_frac: frac,
            apexes_per_ip_mean: args.malicious_apexes_mean.unwrap_or(2.0),
            multihome_prob: args.multihome_prob.unwrap_or(0.2),
        });
    }
    if let Some(profiles_path) = &args.profiles {
        let text = std::fs::read_to_string(profiles_path).code("IO")?;
        let overrides: std::collections::BTreeMap<SynthClass, hostclass::synth::ClassProfile> =
            serde_json::from_str(&text).code("CONFIG")?;
        for (class, profile) in overrides {
            config.profiles.insert(class, profile);
        }
    }

    let corpus = generate(&config, &out).map_err(|e| match &e {
        hostclass::synth::SynthError::Config(_) => CliError::new("CONFIG", e),
        hostclass::synth::SynthError::Io { .. } => CliError::new("IO", e),
    })?;

    let mut manifest = ManifestBuilder::new("synth", &config)?;
    manifest.input_opt(args.profiles.as_ref())?;
    manifest.output(&corpus.pdns)?;
    manifest.output(&corpus.whois)?;
    manifest.output(&corpus.asn)?;
    manifest.output(&corpus.truth)?;
    manifest.output(&corpus.domain_whois)?;
    if let Some(vt) = &corpus.vt {
        manifest.output(vt)?;
    }
    manifest.write(&out)?;

    println!(
        "synth: {} IPs, {} PDNS records, {} WHOIS snapshots, {} malicious apexes -> {}",
        corpus.n_ips,
        corpus.n_pdns_records,
        corpus.n_whois_snapshots,
        corpus.n_malicious_apexes,
        out.display()
    );
    Ok(())
}
