//! DNS names and registered-domain (apex) extraction.
//!
//! "TLD+2" follows public-suffix semantics: the apex is the public suffix
//! plus one label, and "TLD+3" is the apex plus one more label. The suffix
//! list is user supplied; with an empty list the last label is treated as
//! the suffix.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomainParseError {
    #[error("empty domain name")]
    Empty,
    #[error("empty label in {0:?}")]
    EmptyLabel(String),
    #[error("label too long: {0:?}")]
    LabelTooLong(String),
    #[error("illegal character in label {0:?}")]
    IllegalChar(String),
    #[error("too many labels in {0:?}")]
    TooManyLabels(String),
}

/// Set of public-suffix entries, each a dot-separated sequence of labels.
#[derive(Debug, Clone, Default)]
pub struct SuffixList {
    entries: BTreeSet<String>,
    max_labels: usize,
}

impl SuffixList {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        let mut max_labels = 0;
        for e in entries {
            let e = e.as_ref().trim().trim_matches('.').to_ascii_lowercase();
            if e.is_empty() {
                continue;
            }
            max_labels = max_labels.max(e.split('.').count());
            set.insert(e);
        }
        SuffixList { entries: set, max_labels }
    }

    /// One suffix per line; blank lines and lines starting with `//` or `#`
    /// are ignored (the common public-suffix-list layout).
    pub fn from_lines(text: &str) -> Self {
        SuffixList::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with("//") && !l.starts_with('#')),
        )
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Length in labels of the longest entry matching the tail of `labels`
    /// (root-last order), if any.
    fn match_len(&self, labels: &[&str]) -> Option<usize> {
        let upper = self.max_labels.min(labels.len());
        for take in (1..=upper).rev() {
            let candidate = labels[labels.len() - take..].join(".");
            if self.entries.contains(&candidate) {
                return Some(take);
            }
        }
        None
    }
}

/// A parsed, case-normalized DNS name.
///
/// Labels are stored root-last (`www`, `example`, `com`). The trailing
/// `suffix_len` labels form the public suffix; the apex (TLD+2) exists when
/// at least one label precedes the suffix, and the TLD+3 when two do.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DomainName {
    text: String,
    label_count: u8,
    suffix_len: u8,
}

impl DomainName {
    pub fn label_count(&self) -> usize {
        usize::from(self.label_count)
    }

    pub fn suffix_len(&self) -> usize {
        usize::from(self.suffix_len)
    }

    /// Labels in root-last order.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.text.split('.')
    }

    /// Full name, lowercase, no trailing dot.
    pub fn as_str(&self) -> &str {
        &self.text
    }

    fn tail(&self, labels: usize) -> Option<&str> {
        if labels > self.label_count() {
            return None;
        }
        let skip = self.label_count() - labels;
        let mut start = 0usize;
        let mut seen = 0usize;
        for (i, b) in self.text.bytes().enumerate() {
            if seen == skip {
                break;
            }
            if b == b'.' {
                seen += 1;
                start = i + 1;
            }
        }
        Some(&self.text[start..])
    }

    /// Registered domain: public suffix plus one label.
    pub fn tld2(&self) -> Option<&str> {
        if self.label_count() >= self.suffix_len() + 1 {
            self.tail(self.suffix_len() + 1)
        } else {
            None
        }
    }

    /// One label below the registered domain.
    pub fn tld3(&self) -> Option<&str> {
        if self.label_count() >= self.suffix_len() + 2 {
            self.tail(self.suffix_len() + 2)
        } else {
            None
        }
    }
}

impl fmt::Display for DomainName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn label_ok(label: &str) -> Result<(), DomainParseError> {
    if label.is_empty() {
        return Err(DomainParseError::EmptyLabel(label.to_string()));
    }
    if label.len() > 63 {
        return Err(DomainParseError::LabelTooLong(label.to_string()));
    }
    // Permissive LDH: PDNS corpora carry underscores (_dmarc) and wildcards.
    if !label
        .bytes()
        .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_' || b == b'*')
    {
        return Err(DomainParseError::IllegalChar(label.to_string()));
    }
    Ok(())
}

/// Parse `text` into a [`DomainName`], trimming one optional trailing dot.
///
/// `suffix_len` is the label length of the longest matching suffix-list
/// entry, or 1 when nothing matches.
pub fn parse_domain(text: &str, suffixes: &SuffixList) -> Result<DomainName, DomainParseError> {
    let trimmed = text.strip_suffix('.').unwrap_or(text);
    if trimmed.is_empty() {
        return Err(DomainParseError::Empty);
    }
    let lower = trimmed.to_ascii_lowercase();
    let labels: Vec<&str> = lower.split('.').collect();
    if labels.len() > 127 {
        return Err(DomainParseError::TooManyLabels(lower.clone()));
    }
    for label in &labels {
        label_ok(label)?;
    }
    let suffix_len = suffixes.match_len(&labels).unwrap_or(1);
    Ok(DomainName {
        label_count: labels.len() as u8,
        suffix_len: suffix_len as u8,
        text: lower,
    })
}
