//! Polynomial rolling hash over fixed-width byte windows.
//!
//! A window `w` of `n` bytes hashes to `sum(w[i] * a^(n-1-i)) mod M` with
//! `M = 2^61 - 1`. The Mersenne modulus keeps reduction to shifts and adds,
//! and the polynomial form admits an O(1) slide from one window to the next,
//! which is what makes counting n-grams of any width a constant cost per byte.
//!
//! Bucket mapping (`value mod B`) is deliberately left to callers so this
//! module stays independent of any particular table size.

use crate::error::{Error, Result};

/// Hash modulus, the Mersenne prime 2^61 - 1.
pub const MODULUS: u64 = (1 << 61) - 1;

/// Default polynomial multiplier: a fixed odd constant below the modulus so
/// results are reproducible across platforms and releases.
pub const DEFAULT_MULTIPLIER: u64 = 0x1B87_3593_CC9E_2D51;

/// Immutable parameters for hashing windows of one fixed length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashParams {
    multiplier: u64,
    window_len: usize,
    /// multiplier^(window_len - 1) mod MODULUS, the weight of the byte that
    /// leaves the window on each slide.
    lead_power: u64,
}

impl HashParams {
    /// Parameters for `window_len`-byte windows with the default multiplier.
    pub fn new(window_len: usize) -> Result<Self> {
        Self::with_multiplier(window_len, DEFAULT_MULTIPLIER)
    }

    /// Parameters with an explicit multiplier. The multiplier must be odd and
    /// in `(1, MODULUS)`.
    pub fn with_multiplier(window_len: usize, multiplier: u64) -> Result<Self> {
        if window_len == 0 {
            return Err(Error::Config("window length must be at least 1".into()));
        }
        if multiplier <= 1 || multiplier >= MODULUS {
            return Err(Error::Config(format!(
                "hash multiplier must be in (1, 2^61-1), got {multiplier}"
            )));
        }
        if multiplier.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "hash multiplier must be odd, got {multiplier}"
            )));
        }
        Ok(HashParams {
            multiplier,
            window_len,
            lead_power: pow_mod(multiplier, window_len as u64 - 1),
        })
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn multiplier(&self) -> u64 {
        self.multiplier
    }

    pub fn modulus(&self) -> u64 {
        MODULUS
    }

    pub fn lead_power(&self) -> u64 {
        self.lead_power
    }
}

/// Hash of one byte window; the value is always in `[0, MODULUS)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WindowHash(u64);

impl WindowHash {
    pub fn value(self) -> u64 {
        self.0
    }
}

#[inline]
fn add_mod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MODULUS {
        s - MODULUS
    } else {
        s
    }
}

#[inline]
fn sub_mod(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + MODULUS - b
    }
}

/// Multiply mod 2^61-1 using the Mersenne identity 2^61 = 1 (mod M).
#[inline]
fn mul_mod(a: u64, b: u64) -> u64 {
    let p = a as u128 * b as u128;
    let lo = (p & MODULUS as u128) as u64;
    let hi = (p >> 61) as u64;
    let mut s = lo + hi;
    s = (s & MODULUS) + (s >> 61);
    if s >= MODULUS {
        s - MODULUS
    } else {
        s
    }
}

fn pow_mod(base: u64, mut exp: u64) -> u64 {
    let mut acc = 1u64;
    let mut base = base % MODULUS;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        exp >>= 1;
    }
    acc
}

/// Hashes a full window from scratch. The input must be exactly
/// `params.window_len()` bytes.
pub fn hash_window(bytes: &[u8], params: &HashParams) -> Result<WindowHash> {
    if bytes.len() != params.window_len {
        return Err(Error::WindowLength {
            expected: params.window_len,
            actual: bytes.len(),
        });
    }
    let mut h = 0u64;
    for &b in bytes {
        h = add_mod(mul_mod(h, params.multiplier), b as u64);
    }
    Ok(WindowHash(h))
}

/// Slides the window one byte: drops `outgoing` (the first byte of the hashed
/// window) and appends `incoming`. Equal to rehashing the new window.
#[inline]
pub fn roll(prev: WindowHash, outgoing: u8, incoming: u8, params: &HashParams) -> WindowHash {
    let without_lead = sub_mod(prev.0, mul_mod(outgoing as u64, params.lead_power));
    WindowHash(add_mod(
        mul_mod(without_lead, params.multiplier),
        incoming as u64,
    ))
}

/// Iterator over the hashes of every window of a document, in offset order.
/// Documents shorter than the window length yield nothing.
pub fn window_hashes<'a>(
    doc: &'a [u8],
    params: &'a HashParams,
) -> impl Iterator<Item = WindowHash> + 'a {
    let n = params.window_len;
    let mut current: Option<WindowHash> = None;
    (0..doc.len().saturating_sub(n.saturating_sub(1))).map(move |offset| {
        let h = match current {
            None => hash_window(&doc[..n], params).expect("first window has exact length"),
            Some(prev) => roll(prev, doc[offset - 1], doc[offset + n - 1], params),
        };
        current = Some(h);
        h
    })
}
