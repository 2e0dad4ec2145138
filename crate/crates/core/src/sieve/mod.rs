//! Segmented sieving.
//!
//! Three products come out of this module:
//!
//! * [`PrimeTable`]: every prime up to a limit (at most 2^40), built from an
//!   odd-only segmented sieve of Eratosthenes.
//! * [`FactorStats`]: ω(n) and P+(n) for every `n` in an interval. Each base
//!   prime `p <= sqrt(hi)` is walked across the segment; the product of the
//!   sieved prime powers is accumulated per integer, and a cofactor left over
//!   after that is necessarily a single prime above `sqrt(hi)`.
//! * [`PrimeWindow`]: primality flags over an arbitrary interval, used by the
//!   sifted families to test `p = s*m - a` or `6m ± 1`.
//!
//! Segments are independent. With `parallel` set they are farmed out to the
//! rayon pool and reassembled in order, so every output is identical to the
//! sequential one.

mod cache;
pub(crate) mod factor;
mod table;

pub use factor::{
    omega_single, trial_factorize, FactorStats, Factorizer, SmallestFactorTable, TrialDivision,
};
pub use table::{PrimeTable, Primes, TableSummary};

use rayon::prelude::*;
use std::path::PathBuf;
use thiserror::Error;

/// Largest supported sieve limit.
pub const MAX_LIMIT: u64 = 1 << 40;
pub const MIN_SEGMENT_SIZE: usize = 1 << 10;
pub const DEFAULT_SEGMENT_SIZE: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SieveError {
    #[error("limit {0} outside the supported range [2, 2^40]")]
    LimitOutOfRange(u64),
    #[error("segment size {0} is below the minimum of {MIN_SEGMENT_SIZE}")]
    SegmentTooSmall(usize),
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: u64, hi: u64 },
    #[error("base prime table reaches {have}, primes up to {need} are required")]
    BaseTooSmall { need: u64, have: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveConfig {
    /// Integers per segment.
    pub segment_size: usize,
    /// Directory for the binary prime-table cache.
    pub cache_dir: Option<PathBuf>,
    pub parallel: bool,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            segment_size: DEFAULT_SEGMENT_SIZE,
            cache_dir: None,
            parallel: false,
        }
    }
}

impl SieveConfig {
    pub fn validate(&self) -> Result<(), SieveError> {
        if self.segment_size < MIN_SEGMENT_SIZE {
            return Err(SieveError::SegmentTooSmall(self.segment_size));
        }
        Ok(())
    }

    /// Splits `[lo, hi]` into consecutive segments.
    pub(crate) fn segments(&self, lo: u64, hi: u64) -> Vec<(u64, u64)> {
        let step = self.segment_size as u64;
        let mut out = Vec::new();
        let mut start = lo;
        loop {
            let end = start.saturating_add(step - 1).min(hi);
            out.push((start, end));
            if end == hi {
                break;
            }
            start = end + 1;
        }
        out
    }

    /// Maps `f` over the segments of `[lo, hi]`, returning results in order.
    pub(crate) fn map_segments<T, F>(&self, lo: u64, hi: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64, u64) -> T + Sync,
    {
        let segs = self.segments(lo, hi);
        if self.parallel {
            segs.into_par_iter().map(|(a, b)| f(a, b)).collect()
        } else {
            segs.into_iter().map(|(a, b)| f(a, b)).collect()
        }
    }
}

/// Primes up to `limit` by a plain, unsegmented sieve. Meant for small limits.
pub fn simple_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Sieves the odd integers of `[lo, hi]`. Entry `i` stands for
/// `first_odd + 2i` and is `true` when that number is prime.
/// `base` must contain every odd prime `<= sqrt(hi)` (2 is skipped if present).
fn sieve_odd_window(lo: u64, hi: u64, base: &[u64]) -> (u64, Vec<bool>) {
    let first_odd = lo | 1;
    if first_odd > hi {
        return (first_odd, Vec::new());
    }
    let len = ((hi - first_odd) / 2 + 1) as usize;
    let mut prime = vec![true; len];
    if first_odd == 1 {
        prime[0] = false;
    }
    let root = hi.isqrt();
    for &p in base.iter().skip_while(|&&p| p == 2) {
        if p > root {
            break;
        }
        let mut start = (p * p).max(first_odd.div_ceil(p) * p);
        if start % 2 == 0 {
            start += p;
        }
        if start > hi {
            continue;
        }
        let step = p as usize;
        let mut i = ((start - first_odd) / 2) as usize;
        while i < len {
            prime[i] = false;
            i += step;
        }
    }
    (first_odd, prime)
}

/// Computes all primes `<= limit`. The result does not depend on the segment
/// size or on `parallel`. With a `cache_dir`, a previously written table for
/// the same limit is reused, and a freshly sieved one is written back.
pub fn sieve_primes(limit: u64, cfg: &SieveConfig) -> Result<PrimeTable, SieveError> {
    if !(2..=MAX_LIMIT).contains(&limit) {
        return Err(SieveError::LimitOutOfRange(limit));
    }
    cfg.validate()?;
    if let Some(dir) = &cfg.cache_dir {
        if let Some(table) = cache::load(dir, limit) {
            return Ok(table);
        }
    }
    let table = sieve_uncached(limit, cfg);
    if let Some(dir) = &cfg.cache_dir {
        if let Err(e) = cache::store(dir, &table) {
            log::warn!("could not write prime cache in {}: {e}", dir.display());
        }
    }
    Ok(table)
}

fn sieve_uncached(limit: u64, cfg: &SieveConfig) -> PrimeTable {
    let base = simple_primes(limit.isqrt());
    let mut builder = PrimeTable::builder(limit);
    builder.push(2);
    let segs = cfg.segments(3, limit);
    // Bound the memory held by finished-but-unmerged segments.
    let batch = if cfg.parallel {
        rayon::current_num_threads() * 4
    } else {
        1
    };
    let collect = |(lo, hi): (u64, u64)| -> Vec<u64> {
        let (first, flags) = sieve_odd_window(lo, hi, &base);
        flags
            .iter()
            .enumerate()
            .filter(|(_, &is_p)| is_p)
            .map(|(i, _)| first + 2 * i as u64)
            .collect()
    };
    for chunk in segs.chunks(batch) {
        let parts: Vec<Vec<u64>> = if cfg.parallel {
            chunk.par_iter().copied().map(collect).collect()
        } else {
            chunk.iter().copied().map(collect).collect()
        };
        for p in parts.into_iter().flatten() {
            builder.push(p);
        }
    }
    builder.finish()
}

/// Primality flags over `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct PrimeWindow {
    lo: u64,
    hi: u64,
    first_odd: u64,
    odd_prime: Vec<bool>,
}

impl PrimeWindow {
    /// `base` must hold every prime `<= sqrt(hi)`, in increasing order.
    pub(crate) fn from_base(lo: u64, hi: u64, base: &[u64]) -> Self {
        let (first_odd, odd_prime) = sieve_odd_window(lo, hi, base);
        PrimeWindow {
            lo,
            hi,
            first_odd,
            odd_prime,
        }
    }

    pub fn new(lo: u64, hi: u64, base: &PrimeTable) -> Result<Self, SieveError> {
        if lo > hi {
            return Err(SieveError::InvalidInterval { lo, hi });
        }
        let need = hi.isqrt();
        if base.limit() < need {
            return Err(SieveError::BaseTooSmall {
                need,
                have: base.limit(),
            });
        }
        Ok(Self::from_base(lo, hi, &base.primes_up_to(need)))
    }

    /// Panics if `n` lies outside the window.
    pub fn is_prime(&self, n: u64) -> bool {
        assert!(
            (self.lo..=self.hi).contains(&n),
            "{n} outside prime window [{}, {}]",
            self.lo,
            self.hi
        );
        if n.is_multiple_of(2) {
            return n == 2;
        }
        self.odd_prime[((n - self.first_odd) / 2) as usize]
    }

    /// Like [`Self::is_prime`] but takes a signed value; nonpositive is composite.
    pub fn is_prime_signed(&self, n: i128) -> bool {
        n >= 2 && self.is_prime(n as u64)
    }
}

/// ω and P+ over `[lo, hi]`. `base` must reach `floor(sqrt(hi))`.
pub fn factor_stats(
    lo: u64,
    hi: u64,
    base: &PrimeTable,
    cfg: &SieveConfig,
) -> Result<FactorStats, SieveError> {
    factor_stats_filtered(lo, hi, base, cfg, None)
}

/// As [`factor_stats`], additionally recording for each `n` whether every
/// prime factor of `n` satisfies `keep`.
pub fn factor_stats_filtered(
    lo: u64,
    hi: u64,
    base: &PrimeTable,
    cfg: &SieveConfig,
    keep: Option<&(dyn Fn(u64) -> bool + Sync)>,
) -> Result<FactorStats, SieveError> {
    let parts = map_factor_segments(lo, hi, base, cfg, keep, |s| s.clone())?;
    Ok(FactorStats::concat(parts))
}

/// Streams `[lo, hi]` through the factor sieve one segment at a time and
/// returns `f` of each segment, in interval order.
pub fn map_factor_segments<T, F>(
    lo: u64,
    hi: u64,
    base: &PrimeTable,
    cfg: &SieveConfig,
    keep: Option<&(dyn Fn(u64) -> bool + Sync)>,
    f: F,
) -> Result<Vec<T>, SieveError>
where
    T: Send,
    F: Fn(&FactorStats) -> T + Sync,
{
    cfg.validate()?;
    if lo == 0 || lo > hi {
        return Err(SieveError::InvalidInterval { lo, hi });
    }
    let need = hi.isqrt();
    if base.limit() < need {
        return Err(SieveError::BaseTooSmall {
            need,
            have: base.limit(),
        });
    }
    let primes = base.primes_up_to(need);
    Ok(cfg.map_segments(lo, hi, |a, b| {
        f(&factor::factor_segment(a, b, &primes, keep))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(segment_size: usize, parallel: bool) -> SieveConfig {
        SieveConfig {
            segment_size,
            cache_dir: None,
            parallel,
        }
    }

    #[test]
    fn tiny_limits() {
        let c = SieveConfig::default();
        assert_eq!(sieve_primes(10, &c).unwrap().iter().collect::<Vec<_>>(), [2, 3, 5, 7]);
        assert_eq!(sieve_primes(2, &c).unwrap().iter().collect::<Vec<_>>(), [2]);
        assert_eq!(sieve_primes(3, &c).unwrap().iter().collect::<Vec<_>>(), [2, 3]);
    }

    #[test]
    fn limit_out_of_range() {
        let c = SieveConfig::default();
        assert_eq!(sieve_primes(1, &c), Err(SieveError::LimitOutOfRange(1)));
        assert_eq!(
            sieve_primes(MAX_LIMIT + 1, &c),
            Err(SieveError::LimitOutOfRange(MAX_LIMIT + 1))
        );
    }

    #[test]
    fn segment_size_floor() {
        assert_eq!(
            sieve_primes(100, &cfg(512, false)),
            Err(SieveError::SegmentTooSmall(512))
        );
    }

    #[test]
    fn segment_and_thread_independence() {
        let reference = sieve_primes(300_000, &cfg(1 << 10, false)).unwrap();
        for (size, par) in [(1 << 11, true), (1 << 16, false), (1 << 20, true), (3000, true)] {
            assert_eq!(sieve_primes(300_000, &cfg(size, par)).unwrap(), reference);
        }
        assert_eq!(reference.len(), simple_primes(300_000).len());
    }

    #[test]
    fn million_against_trial_division() {
        let t = sieve_primes(1_000_000, &SieveConfig::default()).unwrap();
        let oracle = (2..=1_000_000u64).filter(|&n| omega_single(n) == 1 && trial_factorize(n)[0].1 == 1).count();
        assert_eq!(oracle, 78_498);
        assert_eq!(t.len(), oracle);
    }

    #[test]
    fn window_primality() {
        let base = sieve_primes(100, &SieveConfig::default()).unwrap();
        let w = PrimeWindow::new(0, 10_000, &base).unwrap();
        for n in 0..=10_000u64 {
            let expect = n >= 2 && trial_factorize(n) == vec![(n, 1)];
            assert_eq!(w.is_prime(n), expect, "n={n}");
        }
        assert!(!w.is_prime_signed(-3));
        assert!(matches!(
            PrimeWindow::new(0, 20_000, &base),
            Err(SieveError::BaseTooSmall { need: 141, .. })
        ));
    }

    #[test]
    fn factor_stats_rejects_small_base() {
        let base = sieve_primes(10, &SieveConfig::default()).unwrap();
        assert_eq!(
            factor_stats(1, 200, &base, &SieveConfig::default()),
            Err(SieveError::BaseTooSmall { need: 14, have: 10 })
        );
        assert_eq!(
            factor_stats(0, 10, &base, &SieveConfig::default()),
            Err(SieveError::InvalidInterval { lo: 0, hi: 10 })
        );
    }
}
