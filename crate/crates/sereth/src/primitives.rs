//! Byte-exact primitives shared by the rest of the crate: Keccak-256 hashing,
//! mark chaining, and the fixed 96-byte FPV wire layout.

use sha3::{Digest, Keccak256};
use thiserror::Error;

/// A 32-byte word. Values and flags are stored and hashed as raw bytes; a
/// numeric interpretation (big-endian unsigned) is layered on top where the
/// experiments need a price.
pub type Word = [u8; 32];

/// Flag word marking the first HMS transaction of a block interval.
pub const HEAD_FLAG: Word = word_from_u64(1);
/// Flag word marking a transaction chained onto the current pending tail.
pub const SUCCESS_FLAG: Word = word_from_u64(2);
/// Flag word for transactions that are neither head candidates nor chained.
pub const REJECTED: Word = word_from_u64(0);

/// Builds a big-endian 32-byte word from a u64.
pub const fn word_from_u64(v: u64) -> Word {
    let mut w = [0u8; 32];
    let b = v.to_be_bytes();
    let mut i = 0;
    while i < 8 {
        w[24 + i] = b[i];
        i += 1;
    }
    w
}

/// Reads the low 8 bytes of a big-endian word as a u64.
pub fn word_to_u64(w: &Word) -> u64 {
    let mut b = [0u8; 8];
    b.copy_from_slice(&w[24..32]);
    u64::from_be_bytes(b)
}

/// A Keccak-256 digest. Equality is byte-wise; ordering is lexicographic,
/// which is what the deterministic tie-breaking rules compare.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hash256(pub [u8; 32]);

impl Hash256 {
    pub const ZERO: Hash256 = Hash256([0u8; 32]);

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl std::fmt::Debug for Hash256 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Hash256({})", self.to_hex())
    }
}

impl From<[u8; 32]> for Hash256 {
    fn from(bytes: [u8; 32]) -> Self {
        Hash256(bytes)
    }
}

/// Keccak-256 of `data` (the pre-NIST-padding variant used by Ethereum).
pub fn keccak256(data: &[u8]) -> Hash256 {
    let mut hasher = Keccak256::new();
    hasher.update(data);
    Hash256(hasher.finalize().into())
}

/// The contract's mark at deployment: keccak256 of the 32-byte zero word.
pub fn genesis_mark() -> Hash256 {
    keccak256(&[0u8; 32])
}

/// mark = keccak256(previous_mark ‖ value), concatenated in that order.
pub fn compute_mark(previous_mark: &Hash256, value: &Word) -> Hash256 {
    let mut buf = [0u8; 64];
    buf[..32].copy_from_slice(&previous_mark.0);
    buf[32..].copy_from_slice(value);
    keccak256(&buf)
}

/// The (flag, previous_mark, value) argument triple carried in a
/// transaction's input field. Serializes to exactly 96 bytes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Fpv {
    pub flag: Word,
    pub previous_mark: Hash256,
    pub value: Word,
}

/// Length in bytes of an encoded FPV.
pub const FPV_LEN: usize = 96;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("malformed FPV payload: expected {FPV_LEN} bytes, got {0}")]
    BadLength(usize),
}

impl Fpv {
    pub fn new(flag: Word, previous_mark: Hash256, value: Word) -> Self {
        Fpv {
            flag,
            previous_mark,
            value,
        }
    }

    /// Slots are [0..32) = flag, [32..64) = previous_mark, [64..96) = value.
    pub fn encode(&self) -> [u8; FPV_LEN] {
        let mut out = [0u8; FPV_LEN];
        out[..32].copy_from_slice(&self.flag);
        out[32..64].copy_from_slice(&self.previous_mark.0);
        out[64..].copy_from_slice(&self.value);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Fpv, CodecError> {
        if bytes.len() != FPV_LEN {
            return Err(CodecError::BadLength(bytes.len()));
        }
        let mut flag = [0u8; 32];
        let mut mark = [0u8; 32];
        let mut value = [0u8; 32];
        flag.copy_from_slice(&bytes[..32]);
        mark.copy_from_slice(&bytes[32..64]);
        value.copy_from_slice(&bytes[64..]);
        Ok(Fpv {
            flag,
            previous_mark: Hash256(mark),
            value,
        })
    }

    /// The mark this FPV produces when executed: keccak256(previous_mark ‖ value).
    pub fn mark(&self) -> Hash256 {
        compute_mark(&self.previous_mark, &self.value)
    }
}

/// The (address, mark, value) triple describing a committed or pending
/// contract state for one storage variable.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Amv {
    pub address: Word,
    pub mark: Hash256,
    pub value: Word,
}
