//! Zipf-distribution math backing the collision-budget analysis: rank
//! probabilities, expected hash-collision counts for a whitelist of the k
//! most frequent items, the closed-form limit bound `6L / (B * pi^2)`, and
//! the companion Space-Saving capacity rule.

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Above this many terms, generalized harmonic numbers switch from direct
/// summation to a zeta/Euler-Maclaurin evaluation.
const DIRECT_SUM_LIMIT: u64 = 10_000_000;

/// Rank-space size of a Zipf model: a concrete alphabet, or the zeta-
/// distribution limit used as the pessimistic infinite-alphabet case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alphabet {
    Finite(u64),
    Infinite,
}

/// Zipf distribution over ranks `1..=|A|` with pmf
/// `f(x) = x^-(p+1) / H_{|A|}^{(p+1)}`.
#[derive(Debug, Clone, Copy)]
pub struct ZipfModel {
    exponent: f64,
    alphabet: Alphabet,
    /// The normalizer `H_{|A|}^{(p+1)}` (or `zeta(p+1)` when infinite).
    norm: f64,
}

impl ZipfModel {
    pub fn new(exponent: f64, alphabet: Alphabet) -> Result<Self> {
        if !exponent.is_finite() || exponent < 0.0 {
            return Err(Error::Config(format!(
                "zipf exponent must be a finite value >= 0, got {exponent}"
            )));
        }
        let norm = match alphabet {
            Alphabet::Finite(0) => {
                return Err(Error::Config("alphabet size must be at least 1".into()))
            }
            Alphabet::Finite(size) => harmonic(size, exponent + 1.0),
            Alphabet::Infinite => {
                if exponent == 0.0 {
                    return Err(Error::Config(
                        "an infinite alphabet requires exponent > 0 (the normalizer diverges)"
                            .into(),
                    ));
                }
                zeta(exponent + 1.0)
            }
        };
        Ok(ZipfModel {
            exponent,
            alphabet,
            norm,
        })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Probability of rank `x`, for `1 <= x <= |A|`.
    pub fn pmf(&self, rank: u64) -> Result<f64> {
        self.check_rank(rank)?;
        Ok((rank as f64).powf(-(self.exponent + 1.0)) / self.norm)
    }

    /// Cumulative probability of ranks `1..=x`; `cdf(0)` is 0.
    pub fn cdf(&self, rank: u64) -> Result<f64> {
        if rank == 0 {
            return Ok(0.0);
        }
        self.check_rank(rank)?;
        Ok(harmonic(rank, self.exponent + 1.0) / self.norm)
    }

    fn check_rank(&self, rank: u64) -> Result<()> {
        let in_range = match self.alphabet {
            Alphabet::Finite(size) => rank >= 1 && rank <= size,
            Alphabet::Infinite => rank >= 1,
        };
        if in_range {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "rank {rank} outside [1, {:?}]",
                self.alphabet
            )))
        }
    }
}

/// Generalized harmonic number `H_z^{(order)} = sum_{i=1..z} i^-order`.
///
/// Direct (compensated) summation up to 10^7 terms; beyond that, evaluated as
/// `zeta(order) - tail(z+1)` via Euler-Maclaurin, which requires `order > 1`.
pub fn harmonic(z: u64, order: f64) -> f64 {
    if z == 0 {
        return 0.0;
    }
    if z <= DIRECT_SUM_LIMIT {
        // Smallest terms first.
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut i = z;
        while i >= 1 {
            let term = (i as f64).powf(-order) - comp;
            let next = sum + term;
            comp = (next - sum) - term;
            sum = next;
            i -= 1;
        }
        return sum;
    }
    if order == 1.0 {
        let zf = z as f64;
        return zf.ln() + EULER_GAMMA + 1.0 / (2.0 * zf) - 1.0 / (12.0 * zf * zf)
            + 1.0 / (120.0 * zf.powi(4));
    }
    debug_assert!(order > 1.0, "large-z harmonic requires order >= 1");
    zeta(order) - tail_sum((z + 1) as f64, order)
}

/// Riemann zeta for real `order > 1`.
pub fn zeta(order: f64) -> f64 {
    assert!(order > 1.0, "zeta(order) requires order > 1, got {order}");
    let cutoff = 2000u64;
    let mut sum = 0.0f64;
    let mut i = cutoff;
    while i >= 1 {
        sum += (i as f64).powf(-order);
        i -= 1;
    }
    sum + tail_sum((cutoff + 1) as f64, order)
}

/// Euler-Maclaurin tail `sum_{i>=m} i^-q` for `q > 1`.
fn tail_sum(m: f64, q: f64) -> f64 {
    m.powf(1.0 - q) / (q - 1.0) + m.powf(-q) / 2.0 + q * m.powf(-q - 1.0) / 12.0
        - q * (q + 1.0) * (q + 2.0) * m.powf(-q - 3.0) / 720.0
}

/// Trigamma function `psi'(x)` for `x > 0`. Appears only inside the limit
/// bound's derivation, where `psi'(k+1)` is replaced by the pessimistic upper
/// bound `1/k`; kept as a helper so that replacement stays checkable
/// (`1/k > psi'(k+1)` for all `k >= 1`, ratio approaching 1 as k grows).
#[allow(dead_code)]
pub(crate) fn trigamma(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut x = x;
    let mut acc = 0.0f64;
    // Shift into the asymptotic regime.
    while x < 20.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv
        * (1.0
            + inv / 2.0
            + inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0))))
}

/// Expected number of colliding non-frequent item observations when the `k`
/// most frequent items of a Zipf-distributed stream of `stream_len` items are
/// tracked through a uniform hash table of `bucket_count` buckets:
/// `k * L * (1 - H_k / H_|A|) / B`.
pub fn expected_collisions(
    k: u64,
    stream_len: u64,
    bucket_count: u64,
    model: &ZipfModel,
) -> Result<f64> {
    if bucket_count == 0 {
        return Err(Error::Config("bucket count must be positive".into()));
    }
    if let Alphabet::Finite(size) = model.alphabet {
        if k > size {
            return Err(Error::InvalidInput(format!(
                "k = {k} exceeds alphabet size {size}"
            )));
        }
    }
    let order = model.exponent + 1.0;
    let tail_mass = (model.norm - harmonic(k, order)) / model.norm;
    Ok(k as f64 * stream_len as f64 * tail_mass.max(0.0) / bucket_count as f64)
}

/// Closed-form limit of the expected-collision count for exponent 1 and an
/// infinite alphabet: `6L / (B * pi^2)`. Upper-bounds `expected_collisions`
/// for every exponent >= 1.
pub fn bound_limit(stream_len: u64, bucket_count: u64) -> f64 {
    assert!(bucket_count > 0, "bucket count must be positive");
    6.0 * stream_len as f64 / (bucket_count as f64 * std::f64::consts::PI.powi(2))
}

/// Default Space-Saving capacity for a given k: `max(k + 300000, 3k)`. The
/// constant absorbs the worst-case collision budget of a petabyte-scale run;
/// the `3k` arm hedges against streams that stray from a power law.
pub fn default_ss_capacity(k: u64) -> u64 {
    (k + 300_000).max(3 * k)
}
