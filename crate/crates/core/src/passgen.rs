//! Uniform random password generation over a 94-character set (the printable
//! ASCII characters minus space), plus the entropy arithmetic for that
//! distribution.
//!
//! Characters are drawn i.i.d. uniform via rejection sampling, so there is no
//! modulo bias regardless of charset size. The space character is excluded
//! from the default set because many sites reject it.

use rand::rngs::OsRng;
use rand::{TryCryptoRng, TryRngCore};
use thiserror::Error;

/// Default password length.
pub const DEFAULT_PASSWORD_LENGTH: usize = 12;

#[derive(Debug, Error)]
pub enum PassgenError {
    #[error("entropy source unavailable: {0}")]
    EntropySourceUnavailable(String),
    #[error("charset is empty")]
    EmptyCharset,
    #[error("charset contains duplicate character {0:?}")]
    DuplicateChar(char),
    #[error("password length must be at least 1")]
    ZeroLength,
}

/// An ordered set of candidate characters, without duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharsetSpec {
    chars: Vec<char>,
}

impl CharsetSpec {
    /// The default 94-character set: printable ASCII (0x21..=0x7E), i.e. the
    /// 95 printable characters minus space.
    pub fn printable_ascii_no_space() -> CharsetSpec {
        CharsetSpec { chars: (0x21u8..=0x7E).map(char::from).collect() }
    }

    pub fn new(chars: Vec<char>) -> Result<CharsetSpec, PassgenError> {
        if chars.is_empty() {
            return Err(PassgenError::EmptyCharset);
        }
        let mut seen = std::collections::HashSet::new();
        for &c in &chars {
            if !seen.insert(c) {
                return Err(PassgenError::DuplicateChar(c));
            }
        }
        Ok(CharsetSpec { chars })
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        self.chars.contains(&c)
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }
}

impl Default for CharsetSpec {
    fn default() -> Self {
        CharsetSpec::printable_ascii_no_space()
    }
}

/// A generated password.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedPassword {
    pub value: String,
}

impl GeneratedPassword {
    pub fn len(&self) -> usize {
        self.value.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }
}

/// Generates a password of `length` characters drawn i.i.d. uniform from
/// `charset`, using rejection sampling over a cryptographically secure RNG.
pub fn generate_password<R: TryRngCore + TryCryptoRng>(
    charset: &CharsetSpec,
    length: usize,
    rng: &mut R,
) -> Result<GeneratedPassword, PassgenError> {
    if charset.is_empty() {
        return Err(PassgenError::EmptyCharset);
    }
    if length == 0 {
        return Err(PassgenError::ZeroLength);
    }
    let n = charset.len() as u32;
    // Largest multiple of n that fits in u32; draws at or above it would
    // skew the modulo and are rejected.
    let zone = u32::MAX - (u32::MAX % n);
    let mut out = String::with_capacity(length);
    for _ in 0..length {
        let idx = loop {
            let draw = rng
                .try_next_u32()
                .map_err(|e| PassgenError::EntropySourceUnavailable(e.to_string()))?;
            if draw < zone {
                break draw % n;
            }
        };
        out.push(charset.chars[idx as usize]);
    }
    Ok(GeneratedPassword { value: out })
}

/// Generates a password with the default charset, length and OS entropy
/// source.
pub fn generate_default() -> Result<GeneratedPassword, PassgenError> {
    generate_password(&CharsetSpec::default(), DEFAULT_PASSWORD_LENGTH, &mut OsRng)
}

/// Shannon entropy per character of the uniform distribution over the
/// charset, in bits: `log2(|charset|)`.
pub fn entropy_per_char(charset: &CharsetSpec) -> f64 {
    (charset.len() as f64).log2()
}

/// Bits needed to encode a password in binary form: whole bits per character
/// times length.
pub fn encoding_bits(charset: &CharsetSpec, length: usize) -> u64 {
    entropy_per_char(charset).ceil() as u64 * length as u64
}

/// Guessing entropy of the whole password in bits:
/// `length * log2(|charset|)`.
pub fn guessing_entropy_bits(charset: &CharsetSpec, length: usize) -> f64 {
    length as f64 * entropy_per_char(charset)
}
