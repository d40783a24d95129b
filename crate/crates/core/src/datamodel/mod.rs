//! Core domain types: IPv4 addresses and prefixes, DNS names with
//! public-suffix awareness, and the record shapes of the three corpora.
//!
//! All values are immutable after construction and freely shareable
//! across threads.

mod domain;
mod ip;
mod label;
mod record;

pub use domain::{parse_domain, DomainName, DomainParseError, SuffixList};
pub use ip::{Cidr, IpParseError, IpV4, Prefix24};
pub use label::{ClassLabel, Stage};
pub use record::{
    normalize_org, AsnRecord, NetType, PdnsRecord, RecordError, WhoisSnapshot, SECONDS_PER_DAY,
    SECONDS_PER_YEAR,
};
