use alloc::string::String;
use core::fmt::Write;

use sha2::{Digest, Sha256};

/// First `n_bytes` of the SHA-256 digest of `parts`, lowercase hex.
///
/// Parts are separated by a unit separator byte so that `["ab", "c"]` and
/// `["a", "bc"]` hash differently.
pub(crate) fn short_digest<'a, I>(parts: I, n_bytes: usize) -> String
where
    I: IntoIterator<Item = &'a [u8]>,
{
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
        hasher.update([0x1f]);
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(n_bytes * 2);
    for byte in digest.iter().take(n_bytes) {
        let _ = write!(out, "{byte:02x}");
    }
    out
}
