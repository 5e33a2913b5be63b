//! Fixed-length bit strings.
//!
//! Bits are packed most-significant-bit first: bit `i` lives in byte `i / 8`
//! at position `7 - i % 8`. Unused trailing bits of the last byte are always
//! zero, so two `Bits` values compare equal exactly when their bit sequences
//! do.

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Bits {
    bytes: Vec<u8>,
    len: usize,
}

fn byte_len(bits: usize) -> usize {
    bits.div_ceil(8)
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits {
            bytes: vec![0; byte_len(len)],
            len,
        }
    }

    /// Takes the first `len` bits of `bytes`; missing bytes read as zero.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        let mut out = vec![0u8; byte_len(len)];
        let take = out.len().min(bytes.len());
        out[..take].copy_from_slice(&bytes[..take]);
        let mut bits = Bits { bytes: out, len };
        bits.clear_tail();
        bits
    }

    /// Whole-byte bit string.
    pub fn from_vec(bytes: Vec<u8>) -> Self {
        let len = bytes.len() * 8;
        Bits { bytes, len }
    }

    /// The low `len` bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut bits = Bits::zeros(len);
        for i in 0..len {
            let bit = (value >> (len - 1 - i)) & 1 == 1;
            bits.set(i, bit);
        }
        bits
    }

    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut bytes = vec![0u8; byte_len(len)];
        rng.fill_bytes(&mut bytes);
        let mut bits = Bits { bytes, len };
        bits.clear_tail();
        bits
    }

    pub fn from_hex(hex_str: &str, len: usize) -> Result<Self> {
        let bytes = hex::decode(hex_str).map_err(|e| Error::malformed("hex", e.to_string()))?;
        if bytes.len() != byte_len(len) {
            return Err(Error::malformed(
                "hex",
                format!("expected {} bytes for {len} bits, got {}", byte_len(len), bytes.len()),
            ));
        }
        let bits = Bits::from_bytes(&bytes, len);
        if bits.bytes != bytes {
            return Err(Error::malformed("hex", "nonzero padding bits"));
        }
        Ok(bits)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.bytes[i / 8] >> (7 - i % 8) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u8 << (7 - i % 8);
        if value {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let v = self.bit(i);
        self.set(i, !v);
    }

    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 supports at most 64 bits");
        (0..self.len).fold(0u64, |acc, i| (acc << 1) | self.bit(i) as u64)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }

    /// Bits `[start, start + len)`; positions past the end read as zero.
    pub fn slice(&self, start: usize, len: usize) -> Bits {
        let mut out = Bits::zeros(len);
        if start.is_multiple_of(8) {
            let from = (start / 8).min(self.bytes.len());
            let to = (from + byte_len(len)).min(self.bytes.len());
            out.bytes[..to - from].copy_from_slice(&self.bytes[from..to]);
            out.clear_tail();
            // bytes copied beyond self.len are already zero
            return out;
        }
        for i in 0..len {
            let src = start + i;
            if src < self.len && self.bit(src) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn push_bits(&mut self, other: &Bits) {
        if self.len.is_multiple_of(8) {
            self.bytes.extend_from_slice(&other.bytes);
            self.len += other.len;
            return;
        }
        let start = self.len;
        self.len += other.len;
        self.bytes.resize(byte_len(self.len), 0);
        for i in 0..other.len {
            if other.bit(i) {
                self.set(start + i, true);
            }
        }
    }

    pub fn concat<'a, I: IntoIterator<Item = &'a Bits>>(parts: I) -> Bits {
        let mut out = Bits::default();
        for p in parts {
            out.push_bits(p);
        }
        out
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        let bytes = self.bytes.iter().zip(&other.bytes).map(|(a, b)| a ^ b).collect();
        Bits { bytes, len: self.len }
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 8;
        if rem != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= 0xffu8 << (8 - rem);
            }
        }
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({}:{})", self.len, self.to_hex())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn u64_round_trip_and_order() {
        let b = Bits::from_u64(0b101, 3);
        assert!(b.bit(0) && !b.bit(1) && b.bit(2));
        assert_eq!(b.as_bytes(), &[0b1010_0000]);
        assert_eq!(b.to_u64(), 5);
    }

    #[test]
    fn from_bytes_masks_tail() {
        let b = Bits::from_bytes(&[0xff, 0xff], 12);
        assert_eq!(b.as_bytes(), &[0xff, 0xf0]);
        assert_eq!(Bits::from_bytes(&[0xab], 16).as_bytes(), &[0xab, 0x00]);
    }

    #[test]
    fn hex_rejects_dirty_padding() {
        assert!(Bits::from_hex("ff", 4).is_err());
        assert_eq!(Bits::from_hex("f0", 4).unwrap(), Bits::from_u64(0xf, 4));
    }

    proptest! {
        #[test]
        fn concat_then_slice_recovers_parts(a in any::<u64>(), la in 0usize..=64, b in any::<u64>(), lb in 0usize..=64) {
            let x = Bits::from_u64(if la == 64 { a } else { a & ((1u64 << la) - 1) }, la);
            let y = Bits::from_u64(if lb == 64 { b } else { b & ((1u64 << lb) - 1) }, lb);
            let joined = Bits::concat([&x, &y]);
            prop_assert_eq!(joined.len(), la + lb);
            prop_assert_eq!(joined.slice(0, la), x);
            prop_assert_eq!(joined.slice(la, lb), y);
        }
    }
}
