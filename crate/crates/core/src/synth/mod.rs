//! Synthetic corpus generation with planted per-IP ground truth.
//!
//! Generates passive-DNS, WHOIS-history and ASN files in the exact ingest
//! formats, plus a truth file recording each IP's planted class and
//! registrant ownership, so the whole pipeline can be exercised end to end
//! at desk scale. Class-conditional distribution parameters live in
//! [`ClassProfile`]s; the defaults reproduce the population means the
//! classifiers were designed around.

mod generate;
mod profile;

pub use generate::{
    generate, load_truth, truth_by_ip, GeneratorConfig, MaliciousConfig, SynthCorpus, SynthError,
    TruthLine,
};
pub use profile::{default_profiles, ClassProfile, SynthClass};
