//! IPv4 addresses, /24 prefixes and CIDR blocks.
//!
//! Only IPv4 is supported; anything that looks like IPv6 is rejected at
//! parse time with a dedicated error.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IpParseError {
    #[error("IPv6 addresses are not supported: {0}")]
    Ipv6(String),
    #[error("invalid IPv4 address: {0}")]
    Invalid(String),
    #[error("invalid CIDR: {0}")]
    InvalidCidr(String),
}

/// An IPv4 address, ordered numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IpV4(u32);

impl IpV4 {
    pub fn new(a: u8, b: u8, c: u8, d: u8) -> Self {
        IpV4(u32::from_be_bytes([a, b, c, d]))
    }

    pub fn from_u32(v: u32) -> Self {
        IpV4(v)
    }

    pub fn as_u32(self) -> u32 {
        self.0
    }

    pub fn octets(self) -> [u8; 4] {
        self.0.to_be_bytes()
    }

    pub fn prefix24(self) -> Prefix24 {
        Prefix24(self.0 & 0xFFFF_FF00)
    }
}

impl fmt::Display for IpV4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.octets();
        write!(f, "{a}.{b}.{c}.{d}")
    }
}

impl serde::Serialize for IpV4 {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl FromStr for IpV4 {
    type Err = IpParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.contains(':') {
            return Err(IpParseError::Ipv6(s.to_string()));
        }
        let mut octets = [0u8; 4];
        let mut parts = 0usize;
        for part in s.split('.') {
            if parts == 4 {
                return Err(IpParseError::Invalid(s.to_string()));
            }
            if part.is_empty() || part.len() > 3 || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(IpParseError::Invalid(s.to_string()));
            }
            let v: u16 = part.parse().map_err(|_| IpParseError::Invalid(s.to_string()))?;
            if v > 255 {
                return Err(IpParseError::Invalid(s.to_string()));
            }
            octets[parts] = v as u8;
            parts += 1;
        }
        if parts != 4 {
            return Err(IpParseError::Invalid(s.to_string()));
        }
        Ok(IpV4(u32::from_be_bytes(octets)))
    }
}

/// A /24 prefix: the 256 addresses sharing the first three octets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prefix24(u32);

impl Prefix24 {
    /// Base address of the prefix (last octet zero).
    pub fn base(self) -> IpV4 {
        IpV4(self.0)
    }

    pub fn contains(self, ip: IpV4) -> bool {
        ip.0 & 0xFFFF_FF00 == self.0
    }

    /// All 256 member addresses, ascending.
    pub fn addresses(self) -> impl Iterator<Item = IpV4> {
        let base = self.0;
        (0..=255u32).map(move |i| IpV4(base | i))
    }
}

impl fmt::Display for Prefix24 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/24", self.base())
    }
}

/// A CIDR block `a.b.c.d/n`, n in 0..=32.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cidr {
    base: u32,
    len: u8,
}

impl Cidr {
    pub fn new(base: IpV4, len: u8) -> Result<Self, IpParseError> {
        if len > 32 {
            return Err(IpParseError::InvalidCidr(format!("{base}/{len}")));
        }
        Ok(Cidr { base: base.as_u32() & Self::mask(len), len })
    }

    fn mask(len: u8) -> u32 {
        if len == 0 {
            0
        } else {
            u32::MAX << (32 - u32::from(len))
        }
    }

    pub fn base(self) -> IpV4 {
        IpV4(self.base)
    }

    pub fn len(self) -> u8 {
        self.len
    }

    pub fn contains(self, ip: IpV4) -> bool {
        ip.as_u32() & Self::mask(self.len) == self.base
    }
}

impl fmt::Display for Cidr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.base(), self.len)
    }
}

impl FromStr for Cidr {
    type Err = IpParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (addr, len) = s
            .split_once('/')
            .ok_or_else(|| IpParseError::InvalidCidr(s.to_string()))?;
        let base: IpV4 = addr.parse()?;
        let len: u8 = len
            .parse()
            .map_err(|_| IpParseError::InvalidCidr(s.to_string()))?;
        Cidr::new(base, len)
    }
}
