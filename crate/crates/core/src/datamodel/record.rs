//! Record shapes of the three corpora plus organization-name normalization.

use thiserror::Error;

use super::domain::DomainName;
use super::ip::{Cidr, IpV4};

pub const SECONDS_PER_DAY: i64 = 86_400;
/// 365.25-day years, used for every duration-in-years conversion.
pub const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecordError {
    #[error("time_first {0} after time_last {1}")]
    TimeOrder(i64, i64),
    #[error("observation count must be >= 1")]
    ZeroCount,
    #[error("range start {0} above range end {1}")]
    RangeOrder(IpV4, IpV4),
}

/// One passive-DNS resolution observation: `name` resolved to `ip` between
/// `time_first` and `time_last` (epoch seconds, inclusive).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdnsRecord {
    pub name: DomainName,
    pub ip: IpV4,
    pub time_first: i64,
    pub time_last: i64,
    pub count: u64,
}

impl PdnsRecord {
    pub fn new(
        name: DomainName,
        ip: IpV4,
        time_first: i64,
        time_last: i64,
        count: u64,
    ) -> Result<Self, RecordError> {
        if time_first > time_last {
            return Err(RecordError::TimeOrder(time_first, time_last));
        }
        if count == 0 {
            return Err(RecordError::ZeroCount);
        }
        Ok(PdnsRecord { name, ip, time_first, time_last, count })
    }

    /// UTC day index of the first active day.
    pub fn first_day(&self) -> i64 {
        self.time_first.div_euclid(SECONDS_PER_DAY)
    }

    /// UTC day index of the last active day (inclusive).
    pub fn last_day(&self) -> i64 {
        self.time_last.div_euclid(SECONDS_PER_DAY)
    }
}

/// WHOIS inetnum assignment category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NetType {
    DirectAllocation,
    DirectAssignment,
    Reallocated,
    Reassigned,
    Unknown,
}

impl NetType {
    /// Case-insensitive mapping; unrecognized vocabulary becomes `Unknown`.
    pub fn parse(s: &str) -> NetType {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct allocation" => NetType::DirectAllocation,
            "direct assignment" => NetType::DirectAssignment,
            "reallocated" => NetType::Reallocated,
            "reassigned" => NetType::Reassigned,
            _ => NetType::Unknown,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NetType::DirectAllocation => "Direct Allocation",
            NetType::DirectAssignment => "Direct Assignment",
            NetType::Reallocated => "Reallocated",
            NetType::Reassigned => "Reassigned",
            NetType::Unknown => "Unknown",
        }
    }

    pub const ALL: [NetType; 5] = [
        NetType::DirectAllocation,
        NetType::DirectAssignment,
        NetType::Reallocated,
        NetType::Reassigned,
        NetType::Unknown,
    ];

    /// Position in the one-hot expansion.
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|t| *t == self).unwrap()
    }
}

/// Lowercase, strip punctuation, collapse whitespace. WHOIS owner strings
/// are inconsistently formatted; distinct-owner counts compare these.
pub fn normalize_org(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending_space = false;
    for ch in s.chars() {
        if ch.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(ch.to_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

/// One historical IP-WHOIS snapshot of an inetnum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhoisSnapshot {
    pub range_start: IpV4,
    pub range_end: IpV4,
    /// Already normalized via [`normalize_org`].
    pub owner: String,
    pub net_type: NetType,
    /// When the record was last updated at the registry.
    pub updated: i64,
    /// When this snapshot was captured.
    pub observed: i64,
}

impl WhoisSnapshot {
    pub fn new(
        range_start: IpV4,
        range_end: IpV4,
        owner: &str,
        net_type: NetType,
        updated: i64,
        observed: i64,
    ) -> Result<Self, RecordError> {
        if range_start > range_end {
            return Err(RecordError::RangeOrder(range_start, range_end));
        }
        Ok(WhoisSnapshot {
            range_start,
            range_end,
            owner: normalize_org(owner),
            net_type,
            updated,
            observed,
        })
    }

    /// Number of addresses in the inetnum (end - start + 1).
    pub fn size(&self) -> u64 {
        u64::from(self.range_end.as_u32()) - u64::from(self.range_start.as_u32()) + 1
    }

    pub fn contains(&self, ip: IpV4) -> bool {
        self.range_start <= ip && ip <= self.range_end
    }
}

/// One IP-to-ASN mapping entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsnRecord {
    pub cidr: Cidr,
    pub asn: u32,
    pub org: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(start: &str, end: &str) -> WhoisSnapshot {
        WhoisSnapshot::new(
            start.parse().unwrap(),
            end.parse().unwrap(),
            "Owner",
            NetType::Unknown,
            0,
            0,
        )
        .unwrap()
    }

    #[test]
    fn inetnum_size() {
        assert_eq!(snap("10.0.0.0", "10.0.0.255").size(), 256);
        assert_eq!(snap("10.0.0.5", "10.0.0.5").size(), 1);
        assert_eq!(snap("10.0.0.0", "10.0.255.255").size(), 65_536);
        // full IPv4 space does not overflow
        assert_eq!(snap("0.0.0.0", "255.255.255.255").size(), 1u64 << 32);
    }

    #[test]
    fn range_order_enforced() {
        let r = WhoisSnapshot::new(
            "10.0.0.2".parse().unwrap(),
            "10.0.0.1".parse().unwrap(),
            "o",
            NetType::Unknown,
            0,
            0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn net_type_vocabulary() {
        assert_eq!(NetType::parse("Direct Allocation"), NetType::DirectAllocation);
        assert_eq!(NetType::parse("direct assignment"), NetType::DirectAssignment);
        assert_eq!(NetType::parse("REALLOCATED"), NetType::Reallocated);
        assert_eq!(NetType::parse("Reassigned"), NetType::Reassigned);
        assert_eq!(NetType::parse("ALLOCATED PA"), NetType::Unknown);
    }

    #[test]
    fn org_normalization() {
        assert_eq!(normalize_org("  ACME,   Inc. "), "acme inc");
        assert_eq!(normalize_org("One-Two LLC"), "one two llc");
        assert_eq!(normalize_org("WIX.COM LTD"), "wix com ltd");
        assert_eq!(normalize_org("..."), "");
    }

    #[test]
    fn pdns_invariants() {
        use crate::datamodel::{parse_domain, SuffixList};
        let name = parse_domain("a.example.com", &SuffixList::default()).unwrap();
        let ip = "1.2.3.4".parse().unwrap();
        assert!(PdnsRecord::new(name.clone(), ip, 10, 5, 1).is_err());
        assert!(PdnsRecord::new(name.clone(), ip, 5, 10, 0).is_err());
        let r = PdnsRecord::new(name, ip, 0, 86_400, 2).unwrap();
        assert_eq!((r.first_day(), r.last_day()), (0, 1));
    }
}
