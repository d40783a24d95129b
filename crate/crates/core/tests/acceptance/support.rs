//! Shared fixtures: generated corpora, loaded stores and trained models
//! reused by the criteria that do not measure their own generation time.

use std::path::Path;
use std::sync::OnceLock;

use hostclass::datamodel::{ClassLabel, IpV4, Stage, SuffixList};
use hostclass::features;
use hostclass::forest::{train_forest, Dataset, ForestParams};
use hostclass::ingest::{self, PdnsStore, WhoisStore};
use hostclass::synth::{self, GeneratorConfig, SynthCorpus, TruthLine};
use hostclass::{Dataset64, ForestModel64};

pub const REFERENCE: i64 = 1_609_459_200; // 2021-01-01

pub struct Bundle {
    pub corpus: SynthCorpus,
    pub pdns: PdnsStore,
    pub whois: WhoisStore,
    pub truth: Vec<TruthLine>,
}

pub fn load_bundle(corpus: SynthCorpus) -> Bundle {
    let suffixes = SuffixList::default();
    let (pdns, stats) = ingest::load_pdns(&corpus.pdns, &suffixes, true).expect("pdns loads");
    assert_eq!(stats.malformed, 0);
    let (whois, _) = ingest::load_whois(&corpus.whois, true).expect("whois loads");
    let truth = synth::load_truth(&corpus.truth).expect("truth loads");
    Bundle { corpus, pdns, whois, truth }
}

pub fn truth_ips(bundle: &Bundle) -> Vec<(IpV4, &TruthLine)> {
    bundle
        .truth
        .iter()
        .map(|line| (line.ip.parse::<IpV4>().expect("truth ip parses"), line))
        .collect()
}

/// Labeled stage-1 feature matrix over the truth rows.
pub fn hosting_dataset(bundle: &Bundle, reference: i64) -> Dataset64 {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    for (ip, line) in truth_ips(bundle) {
        let f = features::extract_hosting_features(&bundle.pdns, &bundle.whois, ip, reference);
        rows.push(f.to_row::<f64>());
        labels.push(line.stage1_truth.parse::<ClassLabel>().expect("stage-1 truth"));
        ids.push(line.ip.clone());
    }
    Dataset::new(Stage::Hosting, features::csv::schema(Stage::Hosting), rows, labels, ids)
        .expect("valid dataset")
}

/// Labeled stage-2 feature matrix over the hosting truth rows.
pub fn dedicated_dataset(bundle: &Bundle, reference: i64) -> Dataset64 {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    for (ip, line) in truth_ips(bundle) {
        let Some(stage2) = &line.stage2_truth else { continue };
        let f = features::extract_dedicated_features(&bundle.pdns, &bundle.whois, ip, reference, 60)
            .expect("window valid");
        rows.push(f.to_row::<f64>());
        labels.push(stage2.parse::<ClassLabel>().expect("stage-2 truth"));
        ids.push(line.ip.clone());
    }
    Dataset::new(Stage::Dedicated, features::csv::schema(Stage::Dedicated), rows, labels, ids)
        .expect("valid dataset")
}

pub struct Fixture {
    pub _dir: tempfile::TempDir,
    pub hgt: Bundle,
    pub dgt: Bundle,
    pub m1: ForestModel64,
    pub m2: ForestModel64,
}

static FIXTURE: OnceLock<Fixture> = OnceLock::new();

pub fn fixture() -> &'static Fixture {
    FIXTURE.get_or_init(|| {
        let dir = tempfile::tempdir().expect("tempdir");
        let mut hgt_config = GeneratorConfig::new(4242, REFERENCE);
        hgt_config.n_hosting = 1000;
        hgt_config.n_nonhosting = 1000;
        let hgt = load_bundle(
            synth::generate(&hgt_config, &dir.path().join("hgt")).expect("hgt generates"),
        );
        let mut dgt_config = GeneratorConfig::new(4343, REFERENCE);
        dgt_config.n_dedicated = 400;
        dgt_config.n_shared = 400;
        let dgt = load_bundle(
            synth::generate(&dgt_config, &dir.path().join("dgt")).expect("dgt generates"),
        );
        let m1 = train_forest(
            &hosting_dataset(&hgt, REFERENCE),
            &ForestParams { seed: 11, ..ForestParams::default() },
        )
        .expect("stage-1 model trains");
        let m2 = train_forest(
            &dedicated_dataset(&dgt, REFERENCE),
            &ForestParams { seed: 12, ..ForestParams::default() },
        )
        .expect("stage-2 model trains");
        Fixture { _dir: dir, hgt, dgt, m1, m2 }
    })
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).expect("file readable")
}
