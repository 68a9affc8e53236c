use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An ordered sequence of bits, packed most-significant-bit first.
///
/// The final byte is zero padded; `len` records the true number of bits.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bytes: Vec<u8>,
    len: u64,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitString {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    /// Rebuilds a bit string from its packed bytes. Padding bits must be zero.
    pub fn from_packed(bytes: Vec<u8>, len: u64) -> Result<Self> {
        if bytes.len() as u64 != len.div_ceil(8) {
            return Err(Error::corrupt(format!(
                "{} packed bytes cannot hold exactly {len} bits",
                bytes.len()
            )));
        }
        let tail = (len % 8) as u32;
        if tail != 0 {
            let last = *bytes.last().expect("non-empty when len % 8 != 0");
            if last & (0xFF >> tail) != 0 {
                return Err(Error::corrupt("non-zero padding bits"));
            }
        }
        Ok(BitString { bytes, len })
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_packed(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_packed(self) -> Vec<u8> {
        self.bytes
    }

    /// Number of bytes the packed form occupies.
    pub fn byte_len(&self) -> usize {
        self.bytes.len()
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let offset = (self.len % 8) as u32;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> offset;
        }
        self.len += 1;
    }

    /// Pushes `count` copies of `bit`.
    pub fn push_repeated(&mut self, bit: bool, count: u64) {
        for _ in 0..count {
            self.push(bit);
        }
    }

    /// Returns bit `index`, or `None` past the end.
    #[inline]
    pub fn get(&self, index: u64) -> Option<bool> {
        if index >= self.len {
            return None;
        }
        let byte = self.bytes[(index / 8) as usize];
        Some(byte & (0x80 >> (index % 8)) != 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i).unwrap())
    }

    pub fn extend_from(&mut self, other: &BitString) {
        for bit in other.iter() {
            self.push(bit);
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.bytes.iter().map(|b| u64::from(b.count_ones())).sum()
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut bits = BitString::new();
        for bit in iter {
            bits.push(bit);
        }
        bits
    }
}

impl FromStr for BitString {
    type Err = Error;

    /// Parses strings such as `"0101010"` (an optional leading `b` is accepted).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.strip_prefix('b').unwrap_or(s);
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::invalid(format!("not a bit: {other:?}"))),
            })
            .collect()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            write!(f, "BitString(\"{self}\")")
        } else {
            write!(f, "BitString({} bits)", self.len)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_and_read_back() {
        let bits: BitString = "b0101010".parse().unwrap();
        assert_eq!(bits.len(), 7);
        assert_eq!(bits.as_packed(), &[0b0101_0100]);
        assert_eq!(bits.to_string(), "0101010");
    }

    #[test]
    fn packed_round_trip_checks_padding() {
        let bits: BitString = "110000001".parse().unwrap();
        let again = BitString::from_packed(bits.as_packed().to_vec(), bits.len()).unwrap();
        assert_eq!(again, bits);
        assert!(BitString::from_packed(vec![0xFF], 3).is_err());
        assert!(BitString::from_packed(vec![0, 0], 3).is_err());
    }
}
