//! Fixed-length bit strings used for files, intermediate values, outputs and
//! shuffle payloads.

use std::fmt;

use bitvec::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Bits(BitVec<u8, Msb0>);

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits(bitvec![u8, Msb0; 0; len])
    }

    /// Takes the first `len` bits of `bytes` (MSB first).
    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        assert!(len <= bytes.len() * 8, "not enough bytes for {len} bits");
        Bits(BitVec::from_bitslice(&bytes.view_bits::<Msb0>()[..len]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Raw bytes, trailing bits of the last byte zeroed.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len().div_ceil(8)];
        for (i, bit) in self.0.iter().by_vals().enumerate() {
            if bit {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn slice(&self, start: usize, len: usize) -> Bits {
        Bits(BitVec::from_bitslice(&self.0[start..start + len]))
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Bits>) -> Bits {
        let mut out = BitVec::new();
        for p in parts {
            out.extend_from_bitslice(&p.0);
        }
        Bits(out)
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        assert_eq!(self.len(), other.len(), "xor of unequal lengths");
        *self.0.as_mut_bitslice() ^= other.0.as_bitslice();
    }

    pub fn flip(&mut self, bit: usize) {
        let v = self.0[bit];
        self.0.set(bit, !v);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.0[bit]
    }

    pub fn to_hex(&self) -> String {
        self.to_bytes().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(hex: &str, len: usize) -> Option<Bits> {
        if !hex.len().is_multiple_of(2) || hex.len() / 2 * 8 < len {
            return None;
        }
        let bytes = (0..hex.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&hex[i..i + 2], 16).ok())
            .collect::<Option<Vec<u8>>>()?;
        Some(Bits::from_bytes(&bytes, len))
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({}:{})", self.len(), self.to_hex())
    }
}

#[derive(Serialize, Deserialize)]
struct BitsRepr {
    bits: usize,
    hex: String,
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BitsRepr {
            bits: self.len(),
            hex: self.to_hex(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = BitsRepr::deserialize(d)?;
        Bits::from_hex(&r.hex, r.bits).ok_or_else(|| serde::de::Error::custom("bad hex bit string"))
    }
}
