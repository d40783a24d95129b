//! Subcommand implementations.

pub mod analyze;
pub mod classify;
pub mod eval;
pub mod features;
pub mod label;
pub mod synth;
pub mod train;

use std::path::{Path, PathBuf};

use hostclass::datamodel::{IpV4, Stage, SuffixList};
use hostclass::ingest::{self, PdnsStore, WhoisStore};

use crate::{CliError, Coded};

pub fn parse_stage(raw: Option<&str>) -> Result<Stage, CliError> {
    crate::args::require(raw, "stage")?
        .parse::<Stage>()
        .map_err(|e| CliError::new("CONFIG", e))
}

pub fn load_suffixes(path: Option<&PathBuf>) -> Result<SuffixList, CliError> {
    match path {
        None => Ok(SuffixList::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).code("IO")?;
            Ok(SuffixList::from_lines(&text))
        }
    }
}

pub fn load_pdns(path: &Path, suffixes: &SuffixList, strict: bool) -> Result<PdnsStore, CliError> {
    let (store, stats) = ingest::load_pdns(path, suffixes, strict).code("INGEST")?;
    if stats.malformed > 0 {
        eprintln!("note: skipped {} malformed lines in {}", stats.malformed, path.display());
    }
    if stats.skipped_non_a > 0 {
        eprintln!("note: skipped {} non-A records in {}", stats.skipped_non_a, path.display());
    }
    Ok(store)
}

pub fn load_whois(path: &Path, strict: bool) -> Result<WhoisStore, CliError> {
    let (store, stats) = ingest::load_whois(path, strict).code("INGEST")?;
    if stats.malformed > 0 {
        eprintln!("note: skipped {} malformed lines in {}", stats.malformed, path.display());
    }
    Ok(store)
}

/// IPs from a file (one per line, `#` comments) or every IP in the store;
/// always ascending and deduplicated.
pub fn resolve_ips(path: Option<&PathBuf>, store: &PdnsStore) -> Result<Vec<IpV4>, CliError> {
    let mut ips: Vec<IpV4> = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).code("IO")?;
            let mut out = Vec::new();
            for (idx, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let ip: IpV4 = line.parse().map_err(|e| {
                    CliError::new("PARSE", format!("{}:{}: {e}", p.display(), idx + 1))
                })?;
                out.push(ip);
            }
            out
        }
        None => store.ips().collect(),
    };
    ips.sort_unstable();
    ips.dedup();
    Ok(ips)
}

pub fn to_json_pretty<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value).code("IO")?;
    text.push('\n');
    Ok(text)
}
