//! String helpers: normalization keys, char-offset slicing, content hashes.

use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;

/// NFC followed by lowercase folding. Used for every join across resources.
pub fn normalize_key(s: &str) -> String {
    s.trim().nfc().collect::<String>().to_lowercase()
}

/// Slice `s` by character (not byte) offsets.
pub fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut indices = s.char_indices().map(|(i, _)| i).chain(std::iter::once(s.len()));
    let b_start = indices.nth(start)?;
    let b_end = if end == start {
        b_start
    } else {
        indices.nth(end - start - 1)?
    };
    Some(&s[b_start..b_end])
}

/// Wrap the character span `start..end` of `s` in `**`.
pub fn mark_span(s: &str, start: usize, end: usize) -> Option<String> {
    let before = char_slice(s, 0, start)?;
    let span = char_slice(s, start, end)?;
    let after = &s[before.len() + span.len()..];
    Some(format!("{before}**{span}**{after}"))
}

pub fn sha256_hex(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            hasher.update([0u8]);
        }
        hasher.update(p.as_bytes());
    }
    hex::encode(hasher.finalize())
}

/// First eight bytes of a SHA-256 digest, as a seed.
pub fn seed_from(s: &str) -> u64 {
    let digest = Sha256::digest(s.as_bytes());
    u64::from_be_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}
