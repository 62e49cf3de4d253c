//! Addresses and prefixes over a configurable bit width.
//!
//! The canonical width is 32 (IPv4); widths down to 4 keep exhaustive
//! enumeration tractable in tests. An address is a `width`-bit value, a
//! prefix is a base value whose bits below `width - len` are all zero.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

pub const MIN_WIDTH: u8 = 4;
pub const MAX_WIDTH: u8 = 32;

/// Number of addresses in a `width`-bit space.
pub fn space_size(width: u8) -> u64 {
    1u64 << width
}

pub(crate) fn check_width(width: u8) -> Result<()> {
    if !(MIN_WIDTH..=MAX_WIDTH).contains(&width) {
        return Err(Error::InvalidWidth(width));
    }
    Ok(())
}

/// A single source address in a `width`-bit space.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Address {
    value: u32,
    width: u8,
}

impl Address {
    pub fn new(value: u32, width: u8) -> Result<Self> {
        check_width(width)?;
        if u64::from(value) >= space_size(width) {
            return Err(Error::AddressOutOfRange { value: u64::from(value), width });
        }
        Ok(Address { value, width })
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    /// The /width prefix holding exactly this address.
    pub fn host_prefix(&self) -> Prefix {
        Prefix { base: self.value, len: self.width, width: self.width }
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.width == 32 {
            let [a, b, c, d] = self.value.to_be_bytes();
            write!(f, "{a}.{b}.{c}.{d}")
        } else {
            write!(f, "{}", self.value)
        }
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self, self.width)
    }
}

/// A source prefix `base/len` in a `width`-bit space; the unit of filtering.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Prefix {
    base: u32,
    len: u8,
    width: u8,
}

#[allow(clippy::len_without_is_empty)]
impl Prefix {
    pub fn new(base: u32, len: u8, width: u8) -> Result<Self> {
        check_width(width)?;
        if len > width {
            return Err(Error::PrefixLenOutOfRange { len, width });
        }
        if u64::from(base) >= space_size(width) {
            return Err(Error::AddressOutOfRange { value: u64::from(base), width });
        }
        if base & low_mask(width - len) != 0 {
            return Err(Error::PrefixBaseNotAligned { base, len, width });
        }
        Ok(Prefix { base, len, width })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn len(&self) -> u8 {
        self.len
    }

    pub fn is_host(&self) -> bool {
        self.len == self.width
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    /// Lowest address value covered.
    pub fn low(&self) -> u32 {
        self.base
    }

    /// Highest address value covered.
    pub fn high(&self) -> u32 {
        self.base | low_mask(self.width - self.len)
    }

    /// Number of addresses covered: 2^(width - len).
    pub fn span(&self) -> u64 {
        1u64 << (self.width - self.len)
    }

    /// Whether `addr` lies within this prefix. Errors on width mismatch.
    pub fn contains(&self, addr: Address) -> Result<bool> {
        if addr.width != self.width {
            return Err(Error::WidthMismatch { expected: self.width, got: addr.width });
        }
        Ok(self.contains_value(addr.value))
    }

    /// `contains` for a raw value already known to share this width.
    pub fn contains_value(&self, value: u32) -> bool {
        value >= self.low() && value <= self.high()
    }

    /// Whether this prefix covers all of `other` (same width assumed).
    pub fn covers(&self, other: &Prefix) -> bool {
        self.len <= other.len && self.contains_value(other.base)
    }

    /// Two prefixes overlap iff one covers the other.
    pub fn overlaps(&self, other: &Prefix) -> bool {
        self.covers(other) || other.covers(self)
    }

    /// Child prefix of length len+1; `right` selects the upper half.
    pub fn child(&self, right: bool) -> Prefix {
        debug_assert!(self.len < self.width);
        let bit = 1u32 << (self.width - self.len - 1);
        Prefix {
            base: if right { self.base | bit } else { self.base },
            len: self.len + 1,
            width: self.width,
        }
    }

    /// Parse the canonical text form: `a.b.c.d/len` at width 32, or
    /// `base/len@width` at any other width.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse { line: 0, col: 0, msg: msg.to_string() };
        let (body, width) = match s.split_once('@') {
            Some((body, w)) => {
                let width: u8 = w.parse().map_err(|_| bad("invalid width"))?;
                (body, width)
            }
            None => (s, 32u8),
        };
        let (base_s, len_s) = body.split_once('/').ok_or_else(|| bad("missing '/len'"))?;
        let len: u8 = len_s.parse().map_err(|_| bad("invalid prefix length"))?;
        let base = parse_address_value(base_s, width)?;
        Prefix::new(base, len, width)
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.width == 32 {
            let [a, b, c, d] = self.base.to_be_bytes();
            write!(f, "{a}.{b}.{c}.{d}/{}", self.len)
        } else {
            write!(f, "{}/{}@{}", self.base, self.len, self.width)
        }
    }
}

impl fmt::Debug for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Prefix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Prefix::parse(s)
    }
}

/// Longest common prefix of two addresses; `lcp(a, a)` has length `width`.
pub fn lcp(a: Address, b: Address) -> Result<Prefix> {
    if a.width != b.width {
        return Err(Error::WidthMismatch { expected: a.width, got: b.width });
    }
    Ok(lcp_values(a.value, b.value, a.width))
}

/// `lcp` over raw values sharing `width`.
pub(crate) fn lcp_values(a: u32, b: u32, width: u8) -> Prefix {
    let diff = a ^ b;
    let len = if diff == 0 {
        width
    } else {
        (diff.leading_zeros() as u8).saturating_sub(32 - width)
    };
    let base = a & !low_mask(width - len);
    Prefix { base, len, width }
}

/// Parse an address value: dotted quad at width 32 (plain integers also
/// accepted), plain integer otherwise.
pub fn parse_address_text(s: &str, width: u8) -> Result<u32> {
    parse_address_value(s, width)
}

pub(crate) fn parse_address_value(s: &str, width: u8) -> Result<u32> {
    check_width(width)?;
    let bad = |msg: String| Error::Parse { line: 0, col: 0, msg };
    let value: u64 = if width == 32 && s.contains('.') {
        let mut bytes = [0u8; 4];
        let mut parts = s.split('.');
        for byte in &mut bytes {
            let part = parts
                .next()
                .ok_or_else(|| bad(format!("expected four octets in {s:?}")))?;
            *byte = part
                .parse()
                .map_err(|_| bad(format!("invalid octet {part:?} in {s:?}")))?;
        }
        if parts.next().is_some() {
            return Err(bad(format!("too many octets in {s:?}")));
        }
        u64::from(u32::from_be_bytes(bytes))
    } else {
        s.parse().map_err(|_| bad(format!("invalid address {s:?}")))?
    };
    if value >= space_size(width) {
        return Err(Error::AddressOutOfRange { value, width });
    }
    Ok(value as u32)
}

/// Bitmask with the low `bits` bits set.
fn low_mask(bits: u8) -> u32 {
    if bits >= 32 {
        u32::MAX
    } else {
        (1u32 << bits) - 1
    }
}
