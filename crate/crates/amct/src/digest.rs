//! 64-bit FNV-1a digests used everywhere a stable, portable fingerprint is
//! needed: mock-backend fallback substitution, run manifests, and input
//! file identity.
//!
//! The exact construction is fixed so that fixtures reproduce bit-exactly
//! across implementations:
//!
//! - FNV-1a, 64-bit: offset basis `0xcbf29ce484222325`, prime
//!   `0x100000001b3`, bytes folded in order with XOR-then-multiply.
//! - Request digests fold the seed as 8 big-endian bytes, then every
//!   message content as raw UTF-8, in message order, with no separators.
//! - Digests render as exactly 16 lowercase hex characters.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Incremental FNV-1a 64-bit hasher.
#[derive(Debug, Clone)]
pub struct Fnv64 {
    state: u64,
}

impl Fnv64 {
    pub fn new() -> Self {
        Self { state: FNV_OFFSET }
    }

    pub fn update(&mut self, bytes: &[u8]) -> &mut Self {
        for &b in bytes {
            self.state ^= u64::from(b);
            self.state = self.state.wrapping_mul(FNV_PRIME);
        }
        self
    }

    pub fn finish(&self) -> u64 {
        self.state
    }
}

impl Default for Fnv64 {
    fn default() -> Self {
        Self::new()
    }
}

/// Digest a single byte slice.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = Fnv64::new();
    h.update(bytes);
    h.finish()
}

/// Render a digest as fixed-width (16 character) lowercase hex.
pub fn hex16(digest: u64) -> String {
    format!("{digest:016x}")
}

/// Digest of a request: seed as 8 big-endian bytes followed by each
/// message content's UTF-8 bytes, in order, with no separators.
pub fn request_digest(seed: u64, contents: impl IntoIterator<Item = impl AsRef<str>>) -> u64 {
    let mut h = Fnv64::new();
    h.update(&seed.to_be_bytes());
    for c in contents {
        h.update(c.as_ref().as_bytes());
    }
    h.finish()
}
