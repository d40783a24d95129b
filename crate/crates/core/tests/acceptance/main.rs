//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).

mod oracle;
mod support;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hostclass::analysis;
use hostclass::datamodel::{ClassLabel, IpV4, NetType, Stage, SuffixList};
use hostclass::features;
use hostclass::forest::{
    gini, kfold_eval, load_model, model_to_string, save_model, train_forest, train_tree, Dataset,
    ForestParams, TreeNode,
};
use hostclass::ingest::{load_pdns_reader, load_whois_reader};
use hostclass::labeler;
use hostclass::pipeline::{classify_batch, Stage1Decision, Stage2Decision, Thresholds};
use hostclass::synth::{self, GeneratorConfig, MaliciousConfig};

use oracle::{close, close_at_scale, two_pass_mean, two_pass_std, RawCorpus};
use support::{dedicated_dataset, fixture, hosting_dataset, load_bundle, read, truth_ips, REFERENCE};

// ---------------------------------------------------------------------------
// criterion 1: feature extraction equals an independent brute-force oracle

struct QuirkyCorpus {
    pdns: String,
    whois: String,
    suffixes: Vec<&'static str>,
    reference: i64,
}

fn quirky_corpus(idx: u64) -> QuirkyCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0000 + idx);
    let suffix_sets: [&[&'static str]; 3] =
        [&["com"], &["com", "net", "co.uk"], &["co.uk", "uk", "com", "org"]];
    let suffixes = suffix_sets[idx as usize % 3].to_vec();
    let reference = REFERENCE + (idx as i64) * 86_400 + rng.gen_range(0..86_400);

    let bases: Vec<u32> = (0..rng.gen_range(3..6))
        .map(|_| (rng.gen_range(1u32..220) << 24) | (rng.gen_range(0u32..200) << 16) | (rng.gen_range(0u32..250) << 8))
        .collect();
    let ip_str = |v: u32| format!("{}.{}.{}.{}", v >> 24 & 255, v >> 16 & 255, v >> 8 & 255, v & 255);
    let tlds = ["com", "net", "org", "co.uk", "uk", "info"];
    let subs = ["www", "mail", "x", "_svc", "*", "shop", "a-b"];

    let mut pdns = String::new();
    let n_records = rng.gen_range(300..900);
    for _ in 0..n_records {
        let base = bases[rng.gen_range(0..bases.len())];
        let ip = ip_str(base | rng.gen_range(0..256));
        let tld = tlds[rng.gen_range(0..tlds.len())];
        let name = match rng.gen_range(0..10) {
            0 => tld.to_string(), // bare suffix
            1..=4 => format!("dom{}.{}", rng.gen_range(0..60), tld),
            5..=7 => format!("{}.dom{}.{}", subs[rng.gen_range(0..subs.len())], rng.gen_range(0..60), tld),
            _ => format!(
                "{}.{}.dom{}.{}",
                subs[rng.gen_range(0..subs.len())],
                subs[rng.gen_range(0..subs.len())],
                rng.gen_range(0..60),
                tld
            ),
        };
        let name = match rng.gen_range(0..6) {
            0 => format!("{}.", name.to_uppercase()),
            1 => name.to_uppercase(),
            _ => name,
        };
        let rrtype = match rng.gen_range(0..10) {
            0 => "AAAA",
            1 => "NS",
            _ => "A",
        };
        let first = reference - rng.gen_range(0..(5 * 31_557_600));
        let last = first + rng.gen_range(0..(2 * 31_557_600));
        let count = 1 + rng.gen_range(0..9);
        let line = format!(
            r#"{{"name":{},"rrtype":"{rrtype}","ip":"{ip}","time_first":{first},"time_last":{last},"count":{count}}}"#,
            serde_json::to_string(&name).unwrap()
        );
        pdns.push_str(&line);
        pdns.push('\n');
        if rng.gen_bool(0.15) {
            // duplicate key with a different window: exercises merging
            let line = format!(
                r#"{{"name":{},"rrtype":"{rrtype}","ip":"{ip}","time_first":{},"time_last":{},"count":3}}"#,
                serde_json::to_string(&name).unwrap(),
                first - 10_000,
                last + 5_000,
            );
            pdns.push_str(&line);
            pdns.push('\n');
        }
    }

    let owners = ["ACME, Inc.", "acme inc", "Globex LLC", "GLOBEX-LLC", "Net Op 5", "Hoster  X"];
    let net_types =
        ["Direct Allocation", "REASSIGNED", "ALLOCATED PA", "Reallocated", "direct assignment", ""];
    let mut whois = String::new();
    for _ in 0..rng.gen_range(30..300) {
        let base = bases[rng.gen_range(0..bases.len())];
        let start = base | rng.gen_range(0..200);
        let end = start + rng.gen_range(0..4000);
        let observed = reference - rng.gen_range(0..(12 * 31_557_600));
        let updated = if rng.gen_bool(0.05) {
            reference + rng.gen_range(0..10_000) // future update: clamps to 0 years
        } else {
            observed - rng.gen_range(0..(3 * 31_557_600))
        };
        let line = format!(
            r#"{{"range_start":"{}","range_end":"{}","owner":{},"net_type":"{}","updated":{updated},"observed":{observed}}}"#,
            ip_str(start),
            ip_str(end),
            serde_json::to_string(owners[rng.gen_range(0..owners.len())]).unwrap(),
            net_types[rng.gen_range(0..net_types.len())],
        );
        whois.push_str(&line);
        whois.push('\n');
    }
    QuirkyCorpus { pdns, whois, suffixes, reference }
}

fn synth_corpus(idx: u64, dir: &std::path::Path) -> QuirkyCorpus {
    let mut config = GeneratorConfig::new(900 + idx, REFERENCE);
    config.n_nonhosting = 5 + (idx as usize % 7);
    config.n_hosting = 4 + (idx as usize % 5);
    config.n_dedicated = idx as usize % 4;
    config.n_shared = (idx as usize + 1) % 4;
    if config.n_dedicated + config.n_shared + config.n_hosting == 0 {
        config.n_hosting = 3;
    }
    if idx % 2 == 0 {
        config.malicious = Some(MaliciousConfig::default());
    }
    config.privacy_protected_frac = 0.3;
    let corpus = synth::generate(&config, &dir.join(format!("c{idx}"))).expect("generates");
    QuirkyCorpus {
        pdns: read(&corpus.pdns),
        whois: read(&corpus.whois),
        suffixes: vec![],
        reference: REFERENCE,
    }
}

fn check_corpus_against_oracle(c: &QuirkyCorpus) -> usize {
    let suffixes = SuffixList::new(c.suffixes.iter().copied());
    let (pdns, _) = load_pdns_reader(c.pdns.as_bytes(), "pdns", &suffixes, false).expect("loads");
    let (whois, _) = load_whois_reader(c.whois.as_bytes(), "whois", false).expect("loads");
    let raw = RawCorpus::load(&c.pdns, &c.whois, &c.suffixes);

    let mut probes: BTreeSet<String> = raw.all_ips();
    probes.insert("203.0.113.7".to_string());
    probes.insert("8.8.8.8".to_string());

    let mut checked = 0usize;
    for probe in &probes {
        let ip: IpV4 = probe.parse().expect("probe parses");

        let f = features::extract_hosting_features(&pdns, &whois, ip, c.reference);
        let (e1, e2, e3) = raw.resolution_counts(probe);
        assert_eq!((f.f1_num_tld2, f.f2_num_tld3, f.f3_num_domains), (e1, e2, e3), "f1-f3 {probe}");
        let (e4, e5, e6, e7, e8) = raw.prefix_stats(probe);
        assert!(close(f.f4_pct_dns_in_24, e4), "f4 {probe}: {} vs {e4}", f.f4_pct_dns_in_24);
        assert!(close(f.f5_mean_tld3_in_24, e5), "f5 {probe}");
        assert_eq!(f.f6_max_tld3_in_24, e6, "f6 {probe}");
        assert!(close(f.f7_mean_tld2_in_24, e7), "f7 {probe}");
        assert_eq!(f.f8_max_tld2_in_24, e8, "f8 {probe}");
        let (e9, e10, e11, e12, e13, e14, e15, e16) = raw.whois_features(probe, c.reference);
        assert_eq!(f.f9_num_owners, e9, "f9 {probe}");
        assert_eq!(f.f10_num_inetnums, e10, "f10 {probe}");
        assert_eq!(f.f11_max_inetnum_size, e11, "f11 {probe}");
        assert_eq!(f.f12_min_inetnum_size, e12, "f12 {probe}");
        assert_eq!(f.f13_inetnum_size, e13, "f13 {probe}");
        assert_eq!(f.f14_net_type, NetType::ALL[e14], "f14 {probe}");
        assert!(close(f.f15_years_since_update, e15), "f15 {probe}");
        assert_eq!(f.f16_num_whois, e16, "f16 {probe}");

        let g = features::extract_dedicated_features(&pdns, &whois, ip, c.reference, 60)
            .expect("window valid");
        assert_eq!((g.g1_num_tld2, g.g2_num_tld3, g.g3_num_domains), (e1, e2, e3), "g1-g3 {probe}");
        assert_eq!((g.g4_num_owners, g.g5_num_whois), (e9, e16), "g4-g5 {probe}");
        let churn = raw.churn_series(probe, c.reference, 60);
        assert_eq!(churn.len(), 59, "churn length {probe}");
        let churn_f: Vec<f64> = churn.iter().map(|v| *v as f64).collect();
        assert!(close(g.g6_avg_daily_churn, two_pass_mean(&churn_f)), "g6 {probe}");
        assert!(
            close_at_scale(g.g7_std_daily_churn, two_pass_std(&churn_f), g.g6_avg_daily_churn),
            "g7 {probe}"
        );
        let (e_g8, e_g9) = raw.duration_stats(probe);
        assert!(close(g.g8_avg_duration, e_g8), "g8 {probe}: {} vs {e_g8}", g.g8_avg_duration);
        assert!(
            close_at_scale(g.g9_std_duration, e_g9, g.g8_avg_duration),
            "g9 {probe}: {:e} vs {e_g9:e}",
            g.g9_std_duration
        );
        checked += 1;
    }
    checked
}

#[test]
fn acceptance_1_feature_oracle_equivalence() {
    let started = Instant::now();
    let dir = tempfile::tempdir().expect("tempdir");
    let mut probes = 0usize;
    for idx in 0..35u64 {
        probes += check_corpus_against_oracle(&quirky_corpus(idx));
    }
    for idx in 0..15u64 {
        probes += check_corpus_against_oracle(&synth_corpus(idx, dir.path()));
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget 60s");
    println!(
        "ACCEPTANCE 1 feature-oracle equivalence (50 corpora, {probes} probed IPs, {:.1}s): PASS",
        elapsed.as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// criterion 2: synthetic stage-1 ground truth reproduction

#[test]
fn acceptance_2_hosting_classifier_reproduction() {
    let started = Instant::now();
    let dir = tempfile::tempdir().expect("tempdir");
    let mut config = GeneratorConfig::new(20_210, REFERENCE);
    config.n_hosting = 1000;
    config.n_nonhosting = 1000;
    let bundle = load_bundle(synth::generate(&config, dir.path()).expect("generates"));
    let data = hosting_dataset(&bundle, REFERENCE);
    assert_eq!(data.n_rows(), 2000);
    let (pooled, _) = kfold_eval(&data, 5, &ForestParams::default(), 20_211).expect("kfold");
    let precision = pooled.precision.expect("defined");
    let recall = pooled.recall.expect("defined");
    let fpr = pooled.fpr.expect("defined");
    assert!(precision >= 95.0, "precision {precision}");
    assert!(recall >= 95.0, "recall {recall}");
    assert!(fpr <= 5.0, "fpr {fpr}");
    assert!(pooled.auc >= 0.98, "auc {}", pooled.auc);
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}, budget 120s");
    println!(
        "ACCEPTANCE 2 stage-1 reproduction (precision {precision:.2} recall {recall:.2} fpr {fpr:.2} auc {:.4}, {:.1}s): PASS",
        pooled.auc,
        elapsed.as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// criterion 3: synthetic stage-2 ground truth reproduction

#[test]
fn acceptance_3_dedicated_classifier_reproduction() {
    let started = Instant::now();
    let dir = tempfile::tempdir().expect("tempdir");
    let mut config = GeneratorConfig::new(30_310, REFERENCE);
    config.n_dedicated = 400;
    config.n_shared = 400;
    let bundle = load_bundle(synth::generate(&config, dir.path()).expect("generates"));
    let data = dedicated_dataset(&bundle, REFERENCE);
    assert_eq!(data.n_rows(), 800);
    let (pooled, _) = kfold_eval(&data, 5, &ForestParams::default(), 30_311).expect("kfold");
    let precision = pooled.precision.expect("defined");
    let recall = pooled.recall.expect("defined");
    let fpr = pooled.fpr.expect("defined");
    assert!(precision >= 90.0, "precision {precision}");
    assert!(recall >= 90.0, "recall {recall}");
    assert!(fpr <= 10.0, "fpr {fpr}");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}, budget 120s");
    println!(
        "ACCEPTANCE 3 stage-2 reproduction (precision {precision:.2} recall {recall:.2} fpr {fpr:.2}, {:.1}s): PASS",
        elapsed.as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// criterion 4: feature-importance sanity

#[test]
fn acceptance_4_feature_importance_sanity() {
    let fx = fixture();
    let sum: f64 = fx.m1.importances.iter().sum();
    assert!((sum - 1.0).abs() <= 1e-9, "importances sum {sum}");
    let mut ranked: Vec<(&String, f64)> =
        fx.m1.schema.iter().zip(fx.m1.importances.iter().copied()).collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
    let top3: BTreeSet<&str> = ranked.iter().take(3).map(|(name, _)| name.as_str()).collect();
    let anchors: BTreeSet<&str> =
        ["f15_years_since_update", "f9_num_owners", "f3_num_domains"].into_iter().collect();
    let overlap = top3.intersection(&anchors).count();
    assert!(overlap >= 2, "top-3 {top3:?} overlaps anchors in {overlap}");
    println!("ACCEPTANCE 4 importance sanity (top-3 {top3:?}, overlap {overlap}): PASS");
}

// ---------------------------------------------------------------------------
// criterion 5: labeler exactness on planted ownership

#[test]
fn acceptance_5_labeler_exactness() {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut config = GeneratorConfig::new(50_505, REFERENCE);
    config.n_dedicated = 150;
    config.n_shared = 150;

    // open registrants: planted truth reproduced for every IP
    let open_corpus = synth::generate(&config, &dir.path().join("open")).expect("generates");
    let bundle = load_bundle(open_corpus);
    let (domain_whois, _) =
        labeler::load_domain_whois(&bundle.corpus.domain_whois, true).expect("loads");
    let hosting: Vec<(IpV4, &synth::TruthLine)> = truth_ips(&bundle)
        .into_iter()
        .filter(|(_, line)| line.stage1_truth == "hosting")
        .collect();
    let ips: Vec<IpV4> = hosting.iter().map(|(ip, _)| *ip).collect();
    let (decisions, summary) =
        labeler::label_corpus(&bundle.pdns, &ips, &domain_whois, &[], &BTreeMap::new());
    assert_eq!(summary.undecidable, 0);
    for (decision, (_, line)) in decisions.iter().zip(&hosting) {
        let expected: ClassLabel =
            line.stage2_truth.as_deref().expect("hosting truth").parse().expect("parses");
        assert_eq!(decision.label, Some(expected), "{}", decision.ip);
    }

    // fully redacted registrants, no redirects, no manual: all undecidable
    config.privacy_protected_frac = 1.0;
    config.seed = 50_506;
    let closed_corpus = synth::generate(&config, &dir.path().join("closed")).expect("generates");
    let bundle = load_bundle(closed_corpus);
    let (domain_whois, _) =
        labeler::load_domain_whois(&bundle.corpus.domain_whois, true).expect("loads");
    let ips: Vec<IpV4> = truth_ips(&bundle)
        .into_iter()
        .filter(|(_, line)| line.stage1_truth == "hosting")
        .map(|(ip, _)| ip)
        .collect();
    let (decisions, summary) =
        labeler::label_corpus(&bundle.pdns, &ips, &domain_whois, &[], &BTreeMap::new());
    assert_eq!(summary.undecidable, decisions.len() as u64);
    println!(
        "ACCEPTANCE 5 labeler exactness ({} decided open, {} undecidable closed): PASS",
        ips.len(),
        summary.undecidable
    );
}

// ---------------------------------------------------------------------------
// criterion 6: confidence-gate threshold sweep

#[test]
fn acceptance_6_threshold_sweep_monotone() {
    let fx = fixture();
    let dir = tempfile::tempdir().expect("tempdir");
    let mut config = GeneratorConfig::new(60_606, REFERENCE);
    config.n_nonhosting = 40;
    config.n_dedicated = 15;
    config.n_shared = 45;
    let bundle = load_bundle(synth::generate(&config, dir.path()).expect("generates"));
    let ips: Vec<IpV4> = truth_ips(&bundle).into_iter().map(|(ip, _)| ip).collect();

    let mut last_abstain = 0u64;
    let mut decided: BTreeMap<(IpV4, u8), String> = BTreeMap::new();
    let mut step = 0;
    loop {
        let threshold = 0.5 + 0.01 * f64::from(step);
        if threshold > 0.99 {
            break;
        }
        let (verdicts, summary) = classify_batch(
            &bundle.pdns,
            &bundle.whois,
            &fx.m1,
            &fx.m2,
            &ips,
            REFERENCE,
            Thresholds::uniform(threshold),
        )
        .expect("batch classifies");
        let abstain = summary.n_abstain_stage1 + summary.n_abstain_stage2;
        assert!(
            abstain >= last_abstain,
            "abstentions fell from {last_abstain} to {abstain} at {threshold}"
        );
        last_abstain = abstain;
        for v in &verdicts {
            if !matches!(v.stage1, Stage1Decision::Abstain) {
                let prev = decided.entry((v.ip, 1)).or_insert_with(|| v.stage1.to_string());
                assert_eq!(*prev, v.stage1.to_string(), "stage-1 flip at {threshold} for {}", v.ip);
            }
            if let Some(d) = v.stage2 {
                if !matches!(d, Stage2Decision::Abstain) {
                    let prev = decided.entry((v.ip, 2)).or_insert_with(|| d.to_string());
                    assert_eq!(*prev, d.to_string(), "stage-2 flip at {threshold} for {}", v.ip);
                }
            }
        }
        step += 1;
    }
    println!("ACCEPTANCE 6 threshold sweep 0.50..0.99 (final abstentions {last_abstain}): PASS");
}

// ---------------------------------------------------------------------------
// criterion 7: forest unit properties

#[test]
fn acceptance_7_forest_unit_properties() {
    // gini
    assert_eq!(gini::<f64>(&[5, 5]).unwrap(), 0.5);

    // single-row tree is a leaf
    let single = Dataset::new(
        Stage::Hosting,
        vec!["x".into()],
        vec![vec![1.5]],
        vec![ClassLabel::Hosting],
        vec!["a".into()],
    )
    .unwrap();
    let tree = train_tree(&single, &ForestParams::default(), &mut ChaCha8Rng::seed_from_u64(1));
    assert!(matches!(tree, TreeNode::Leaf { counts: [1, 0] }));

    // training data with signal in column 0
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..400 {
        let positive = i % 2 == 0;
        let x = if positive { 10.0 + rng.gen::<f64>() } else { rng.gen::<f64>() };
        rows.push(vec![x, rng.gen::<f64>()]);
        labels.push(if positive { ClassLabel::Hosting } else { ClassLabel::NonHosting });
    }
    let ids = (0..rows.len()).map(|i| i.to_string()).collect();
    let data =
        Dataset::new(Stage::Hosting, vec!["x".into(), "noise".into()], rows, labels, ids).unwrap();
    let params = ForestParams { n_trees: 50, seed: 3, ..ForestParams::default() };

    // save/load prediction identity on 1000 random rows
    let model = train_forest(&data, &params).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&model, &path).unwrap();
    let loaded = load_model::<f64>(&path).unwrap();
    for _ in 0..1000 {
        let row = vec![rng.gen::<f64>() * 12.0, rng.gen::<f64>()];
        assert_eq!(model.predict_proba(&row).unwrap(), loaded.predict_proba(&row).unwrap());
        assert_eq!(model.predict(&row).unwrap(), loaded.predict(&row).unwrap());
    }

    // determinism: identical digests for identical (data, params, seed)
    let again = train_forest(&data, &params).unwrap();
    assert_eq!(model_to_string(&model), model_to_string(&again));

    // AUC 1.0 on separable data
    let (separable, _) = kfold_eval(&data, 5, &params, 99).unwrap();
    assert_eq!(separable.auc, 1.0);

    // chance-level AUC on shuffled labels
    use rand::seq::SliceRandom;
    let mut shuffled_labels = data.labels().to_vec();
    shuffled_labels.shuffle(&mut ChaCha8Rng::seed_from_u64(21));
    let shuffled = Dataset::new(
        Stage::Hosting,
        data.schema().to_vec(),
        data.rows().to_vec(),
        shuffled_labels,
        data.ids().to_vec(),
    )
    .unwrap();
    let (chance, _) = kfold_eval(&shuffled, 5, &params, 99).unwrap();
    assert!(chance.auc > 0.4 && chance.auc < 0.6, "shuffled auc {}", chance.auc);

    println!(
        "ACCEPTANCE 7 forest unit properties (separable auc {}, shuffled auc {:.3}): PASS",
        separable.auc, chance.auc
    );
}

// ---------------------------------------------------------------------------
// criterion 8: end-to-end malicious-hosting study analog

/// Cheap stable string hash for the distinct-apex oracle.
fn hash64(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

#[test]
fn acceptance_8_end_to_end_study_analog() {
    let fx = fixture();
    let started = Instant::now();
    let dir = tempfile::tempdir().expect("tempdir");
    let mut config = GeneratorConfig::new(80_808, REFERENCE);
    config.n_nonhosting = 110;
    config.n_dedicated = 28;
    config.n_shared = 922;
    config.malicious = Some(MaliciousConfig {
        hosting_ip_frac: 0.7,
        apexes_per_ip_mean: 2.0,
        multihome_prob: 0.2,
    });
    let bundle = load_bundle(synth::generate(&config, dir.path()).expect("generates"));

    let ips: Vec<IpV4> = truth_ips(&bundle).into_iter().map(|(ip, _)| ip).collect();
    let (verdicts, _) = classify_batch(
        &bundle.pdns,
        &bundle.whois,
        &fx.m1,
        &fx.m2,
        &ips,
        REFERENCE,
        Thresholds::default(),
    )
    .expect("batch classifies");

    let suffixes = SuffixList::default();
    let (mal, _) = analysis::filter_vt_feed(
        bundle.corpus.vt.as_ref().expect("vt emitted"),
        5,
        &suffixes,
        true,
    )
    .expect("vt filters");
    let resolved = analysis::resolve_malicious(&bundle.pdns, &mal);
    let split = analysis::hosting_split_report(&verdicts, &resolved.by_ip).expect("split");

    // planted truth over the same malicious-hosting IP set
    let truth_index: BTreeMap<IpV4, &synth::TruthLine> = truth_ips(&bundle).into_iter().collect();
    let mut planted_hosting = 0u64;
    let mut planted_nonhosting = 0u64;
    let mut planted_shared = 0u64;
    let mut planted_dedicated = 0u64;
    for ip in resolved.by_ip.keys() {
        let line = truth_index[ip];
        if line.stage1_truth == "hosting" {
            planted_hosting += 1;
            match line.stage2_truth.as_deref() {
                Some("shared") => planted_shared += 1,
                Some("dedicated") => planted_dedicated += 1,
                other => panic!("hosting truth without stage-2: {other:?}"),
            }
        } else {
            planted_nonhosting += 1;
        }
    }
    let planted_pct_hosting =
        100.0 * planted_hosting as f64 / (planted_hosting + planted_nonhosting) as f64;
    let planted_pct_shared =
        100.0 * planted_shared as f64 / (planted_shared + planted_dedicated) as f64;
    let got_hosting = split.pct_hosting.expect("decided IPs exist");
    let got_shared = split.pct_shared.expect("decided hosting IPs exist");
    assert!(
        (got_hosting - planted_pct_hosting).abs() <= 3.0,
        "hosting split {got_hosting:.2} vs planted {planted_pct_hosting:.2}"
    );
    assert!(
        (got_shared - planted_pct_shared).abs() <= 3.0,
        "shared split {got_shared:.2} vs planted {planted_pct_shared:.2}"
    );

    // per-shared-IP distribution equals a brute-force recount of raw lines
    let dist = analysis::per_ip_distribution(&bundle.pdns, &verdicts, &resolved.by_ip);
    let mut apex_hashes: BTreeMap<IpV4, HashSet<u64>> = BTreeMap::new();
    let shared_ips: BTreeSet<IpV4> = verdicts
        .iter()
        .filter(|v| v.stage2 == Some(Stage2Decision::Shared))
        .map(|v| v.ip)
        .collect();
    for line in read(&bundle.corpus.pdns).lines() {
        #[derive(serde::Deserialize)]
        struct Row {
            name: String,
            ip: String,
        }
        let row: Row = serde_json::from_str(line).expect("generated line parses");
        let ip: IpV4 = row.ip.parse().expect("generated ip parses");
        if !shared_ips.contains(&ip) {
            continue;
        }
        // default suffix handling: apex = last two labels
        let labels: Vec<&str> = row.name.split('.').collect();
        if labels.len() < 2 {
            continue;
        }
        let apex = labels[labels.len() - 2..].join(".");
        apex_hashes.entry(ip).or_default().insert(hash64(&apex));
    }
    assert_eq!(dist.rows.len(), shared_ips.len());
    let mut expected_totals = Vec::new();
    let mut expected_mals = Vec::new();
    for row in &dist.rows {
        let expect_total = apex_hashes.get(&row.ip).map_or(0, |s| s.len() as u64);
        assert_eq!(row.n_total_domains, expect_total, "total apexes for {}", row.ip);
        let expect_mal = resolved.by_ip.get(&row.ip).map_or(0, |s| s.len() as u64);
        assert_eq!(row.n_malicious, expect_mal, "malicious apexes for {}", row.ip);
        expected_totals.push(expect_total as f64);
        expected_mals.push(expect_mal as f64);
    }
    let expect_cdf = |values: &[f64]| -> Vec<(f64, f64)> {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, v) in sorted.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == *v => last.1 = f,
                _ => out.push((*v, f)),
            }
        }
        out
    };
    assert_eq!(dist.cdf_total, expect_cdf(&expected_totals));
    assert_eq!(dist.cdf_malicious, expect_cdf(&expected_mals));

    // pair accounting partitions the malicious apex-IP pairs
    let asn = hostclass::ingest::load_asn(&bundle.corpus.asn, true).expect("asn loads").0;
    let providers =
        analysis::provider_ranking(&asn, &bundle.pdns, &verdicts, &resolved.by_ip, 5).expect("ranks");
    let a = &providers.accounting;
    assert_eq!(
        a.shared_pairs
            + a.dedicated_pairs
            + a.nonhosting_pairs
            + a.abstained_stage1_pairs
            + a.abstained_stage2_pairs,
        a.total_pairs
    );
    assert!(!providers.top_all.is_empty());

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 180.0, "took {elapsed:?}, budget 180s");
    println!(
        "ACCEPTANCE 8 end-to-end study analog (hosting {got_hosting:.1}% vs planted {planted_pct_hosting:.1}%, shared {got_shared:.1}% vs planted {planted_pct_shared:.1}%, {:.1}s): PASS",
        elapsed.as_secs_f64()
    );
}
