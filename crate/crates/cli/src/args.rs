//! Flag surface and config-file merging.
//!
//! `--config` points at a TOML file whose tables mirror the subcommand
//! flags (`[global]`, `[synth]`, `[train]`, ...); explicit flags override
//! file values, which override built-in defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::{CliError, Coded};

/// Merge two layers of optional settings: `self` (flags) wins over `low`.
macro_rules! merge_opts {
    ($self:ident, $low:ident; $($field:ident),* $(,)?) => {{
        let mut merged = $self;
        $( merged.$field = merged.$field.or($low.$field); )*
        merged
    }};
}

#[derive(Parser)]
#[command(name = "hostclass", version, about = "Two-stage hosting-type classification of IP addresses")]
pub struct Cli {
    /// TOML config file mirroring all flags; flags override file values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalArgs {
    /// Base seed; subcommands derive their own sub-seeds from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Make malformed input lines fatal instead of skip-and-count.
    #[arg(long, global = true)]
    pub strict: Option<bool>,
}

impl GlobalArgs {
    pub fn merged(self, low: GlobalArgs) -> GlobalArgs {
        merge_opts!(self, low; seed, jobs, strict)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn strict(&self) -> bool {
        self.strict.unwrap_or(false)
    }
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus with planted ground truth.
    Synth(SynthArgs),
    /// Extract per-IP feature vectors to CSV.
    Features(FeaturesArgs),
    /// Label hosting IPs dedicated/shared from ownership signals.
    Label(LabelArgs),
    /// Train a random-forest model from a labeled feature CSV.
    Train(TrainArgs),
    /// Cross-validate a model configuration on a labeled feature CSV.
    Eval(EvalArgs),
    /// Run the two-stage pipeline over a batch of IPs.
    Classify(ClassifyArgs),
    /// Aggregate the malicious-hosting study reports.
    Analyze(AnalyzeArgs),
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct SynthArgs {
    /// Output directory for the corpus files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Shorthand: this many hosting and this many non-hosting IPs.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub n_hosting: Option<usize>,
    #[arg(long)]
    pub n_nonhosting: Option<usize>,
    #[arg(long)]
    pub n_dedicated: Option<usize>,
    #[arg(long)]
    pub n_shared: Option<usize>,
    /// Stage-2 truth split for marginal hosting IPs.
    #[arg(long)]
    pub shared_frac: Option<f64>,
    /// Feature-extraction reference time (epoch seconds).
    #[arg(long)]
    pub reference: Option<i64>,
    #[arg(long)]
    pub window_days: Option<u32>,
    #[arg(long)]
    pub horizon_years: Option<u32>,
    /// Fraction of domain-WHOIS rows emitted privacy protected.
    #[arg(long)]
    pub privacy_frac: Option<f64>,
    /// Fraction of hosting IPs that host malicious apexes; enables the
    /// VirusTotal-style feed output.
    #[arg(long)]
    pub malicious_frac: Option<f64>,
    #[arg(long)]
    pub malicious_apexes_mean: Option<f64>,
    #[arg(long)]
    pub multihome_prob: Option<f64>,
    /// JSON file of class profiles overriding the built-in defaults.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
}

impl SynthArgs {
    pub fn merged(self, low: SynthArgs) -> SynthArgs {
        merge_opts!(self, low; out, n, n_hosting, n_nonhosting, n_dedicated, n_shared,
            shared_frac, reference, window_days, horizon_years, privacy_frac,
            malicious_frac, malicious_apexes_mean, multihome_prob, profiles)
    }
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesArgs {
    /// hosting | dedicated
    #[arg(long)]
    pub stage: Option<String>,
    #[arg(long)]
    pub pdns: Option<PathBuf>,
    #[arg(long)]
    pub whois: Option<PathBuf>,
    /// Public-suffix list file (one suffix per line).
    #[arg(long)]
    pub suffixes: Option<PathBuf>,
    #[arg(long)]
    pub reference: Option<i64>,
    #[arg(long)]
    pub window_days: Option<u32>,
    /// File of IPs (one per line); default: every IP in the PDNS store.
    #[arg(long)]
    pub ips: Option<PathBuf>,
    /// Truth file supplying the label column (and the row set).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Labeler CSV supplying stage-2 labels for decided IPs.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl FeaturesArgs {
    pub fn merged(self, low: FeaturesArgs) -> FeaturesArgs {
        merge_opts!(self, low; stage, pdns, whois, suffixes, reference, window_days,
            ips, truth, labels, out)
    }
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct LabelArgs {
    #[arg(long)]
    pub pdns: Option<PathBuf>,
    #[arg(long)]
    pub suffixes: Option<PathBuf>,
    #[arg(long)]
    pub domain_whois: Option<PathBuf>,
    #[arg(long)]
    pub redirects: Option<PathBuf>,
    #[arg(long)]
    pub manual: Option<PathBuf>,
    /// File of IPs to label; default: every IP in the PDNS store.
    #[arg(long)]
    pub ips: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl LabelArgs {
    pub fn merged(self, low: LabelArgs) -> LabelArgs {
        merge_opts!(self, low; pdns, suffixes, domain_whois, redirects, manual, ips, out)
    }
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct ForestArgs {
    #[arg(long)]
    pub n_trees: Option<usize>,
    /// Features tried per split: a number, or "all" (default: sqrt).
    #[arg(long)]
    pub mtry: Option<String>,
    #[arg(long)]
    pub max_depth: Option<u32>,
    #[arg(long)]
    pub min_leaf: Option<usize>,
}

impl ForestArgs {
    fn merged(self, low: ForestArgs) -> ForestArgs {
        merge_opts!(self, low; n_trees, mtry, max_depth, min_leaf)
    }

    pub fn to_params(&self, seed: u64) -> Result<hostclass::forest::ForestParams, CliError> {
        let mtry = match self.mtry.as_deref() {
            None => None,
            Some("all") => Some(usize::MAX),
            Some(raw) => Some(
                raw.parse::<usize>()
                    .map_err(|_| CliError::new("CONFIG", format!("bad --mtry value {raw:?}")))?,
            ),
        };
        Ok(hostclass::forest::ForestParams {
            n_trees: self.n_trees.unwrap_or(100),
            mtry,
            max_depth: self.max_depth,
            min_leaf: self.min_leaf.unwrap_or(1),
            seed,
        })
    }
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct TrainArgs {
    #[arg(long)]
    pub stage: Option<String>,
    /// Labeled feature CSV (from `features --truth/--labels`).
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub forest: ForestArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl TrainArgs {
    pub fn merged(self, low: TrainArgs) -> TrainArgs {
        let mut merged = self;
        merged.stage = merged.stage.or(low.stage);
        merged.features = merged.features.or(low.features);
        merged.out = merged.out.or(low.out);
        merged.forest = merged.forest.merged(low.forest);
        merged
    }
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct EvalArgs {
    #[arg(long)]
    pub stage: Option<String>,
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub kfold: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub forest: ForestArgs,
    /// Write the report as CSV instead of JSON.
    #[arg(long)]
    pub csv: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl EvalArgs {
    pub fn merged(self, low: EvalArgs) -> EvalArgs {
        let mut merged = self;
        merged.stage = merged.stage.or(low.stage);
        merged.features = merged.features.or(low.features);
        merged.kfold = merged.kfold.or(low.kfold);
        merged.csv = merged.csv.or(low.csv);
        merged.out = merged.out.or(low.out);
        merged.forest = merged.forest.merged(low.forest);
        merged
    }
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub pdns: Option<PathBuf>,
    #[arg(long)]
    pub whois: Option<PathBuf>,
    #[arg(long)]
    pub suffixes: Option<PathBuf>,
    /// Stage-1 (hosting) model file.
    #[arg(long)]
    pub model1: Option<PathBuf>,
    /// Stage-2 (dedicated/shared) model file.
    #[arg(long)]
    pub model2: Option<PathBuf>,
    #[arg(long)]
    pub ips: Option<PathBuf>,
    #[arg(long)]
    pub reference: Option<i64>,
    /// Confidence threshold for both stages.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Stage-2 override of the confidence threshold.
    #[arg(long)]
    pub threshold2: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ClassifyArgs {
    pub fn merged(self, low: ClassifyArgs) -> ClassifyArgs {
        merge_opts!(self, low; pdns, whois, suffixes, model1, model2, ips, reference,
            threshold, threshold2, out)
    }
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub pdns: Option<PathBuf>,
    #[arg(long)]
    pub suffixes: Option<PathBuf>,
    #[arg(long)]
    pub asn: Option<PathBuf>,
    /// Verdicts CSV from `classify`.
    #[arg(long)]
    pub verdicts: Option<PathBuf>,
    /// Malicious-domain feed (`domain`, `positives` per line).
    #[arg(long)]
    pub vt: Option<PathBuf>,
    #[arg(long)]
    pub min_positives: Option<u32>,
    /// Ranking depth for the provider tables.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl AnalyzeArgs {
    pub fn merged(self, low: AnalyzeArgs) -> AnalyzeArgs {
        merge_opts!(self, low; pdns, suffixes, asn, verdicts, vt, min_positives, k, out)
    }
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub global: Option<GlobalArgs>,
    pub synth: Option<SynthArgs>,
    pub features: Option<FeaturesArgs>,
    pub label: Option<LabelArgs>,
    pub train: Option<TrainArgs>,
    pub eval: Option<EvalArgs>,
    pub classify: Option<ClassifyArgs>,
    pub analyze: Option<AnalyzeArgs>,
}

pub fn load_config(path: Option<&std::path::Path>) -> Result<ConfigFile, CliError> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path).code("IO")?;
    toml::from_str(&text).code("CONFIG")
}

/// Required-flag helper with the flag name in the error.
pub fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::new("CONFIG", format!("missing required flag --{flag}")))
}
