//! Brute-force evaluation of the weighted sum
//! `Σ_{ω(r)=ℓ, r P+(r) <= x} g(r) / ln^λ(x/r)`, its split into bands
//! `x/Q_{j-1} <= r < x/Q_j` with `Q_j = x^(1/2^j)`, the Rankin-exponent
//! majorant per band, and the count of `m <= x` with `P+(m)^2 | m`.

use crate::numeric::{ln_factorial, CompensatedSum};
use crate::sieve::{self, PrimeTable, SieveConfig, SieveError};
use crate::weights::{big_g, Weight, WeightError};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub const MAX_ELL: u32 = 40;
pub const MAX_X: u64 = 10_000_000;
pub const SQUAREFULL_MAX_X: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LemmaError {
    #[error("enumeration needs 2 <= x <= {MAX_X} and ell <= {MAX_ELL}, got x={x}, ell={ell}")]
    Range { x: u64, ell: u32 },
    #[error("band index must be at least 1")]
    ZeroBand,
    #[error("count needs 1 <= x <= {SQUAREFULL_MAX_X}, got {0}")]
    CountRange(u64),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Sieve(#[from] SieveError),
}

/// One `r` of the summation set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RPattern {
    pub r: u64,
    pub omega_r: u32,
    pub pplus_r: u64,
    pub weight_value: f64,
}

fn check_range(x: u64, ell: u32) -> Result<(), LemmaError> {
    if !(2..=MAX_X).contains(&x) || ell > MAX_ELL {
        return Err(LemmaError::Range { x, ell });
    }
    Ok(())
}

struct Enumerator<'a> {
    x: u64,
    primes: &'a [u64],
    g: &'a Weight,
}

impl Enumerator<'_> {
    /// Extends `r` (already holding `omega` primes, all below `primes[from]`)
    /// by `remaining` more primes from index `from` on.
    fn extend(
        &self,
        from: usize,
        remaining: u32,
        r: u64,
        omega: u32,
        gval: f64,
        visit: &mut dyn FnMut(&RPattern),
    ) -> Result<(), WeightError> {
        for i in from..self.primes.len() {
            if !self.step(i, remaining, r, omega, gval, visit)? {
                break;
            }
        }
        Ok(())
    }

    /// Tries `primes[i]` as the next prime. Returns false once no larger
    /// prime can fit either.
    fn step(
        &self,
        i: usize,
        remaining: u32,
        r: u64,
        omega: u32,
        gval: f64,
        visit: &mut dyn FnMut(&RPattern),
    ) -> Result<bool, WeightError> {
        let x = self.x;
        let p = self.primes[i];
        // Any completion multiplies r by at least p^remaining, and the final
        // largest prime (>= p) multiplies once more.
        let fits = |base: u64| {
            (0..=remaining)
                .try_fold(base, |acc, _| acc.checked_mul(p))
                .is_some_and(|v| v <= x)
        };
        if !fits(r) {
            return Ok(false);
        }
        let mut pv = r;
        let mut v = 0;
        loop {
            pv *= p;
            v += 1;
            if !fits(pv / p) {
                break;
            }
            let gv = gval * self.g.eval_prime_power(p, v)?;
            if remaining == 1 {
                visit(&RPattern {
                    r: pv,
                    omega_r: omega + 1,
                    pplus_r: p,
                    weight_value: gv,
                });
            } else {
                self.extend(i + 1, remaining - 1, pv, omega + 1, gv, visit)?;
            }
            if pv.checked_mul(p).is_none() {
                break;
            }
        }
        Ok(true)
    }
}

fn base_primes(x: u64) -> Vec<u64> {
    sieve::simple_primes(x.isqrt())
}

/// Visits each `r` with `ω(r) = ell` and `r P+(r) <= x` exactly once, in
/// depth-first order (increasing smallest prime).
pub fn visit_r(
    x: u64,
    ell: u32,
    g: &Weight,
    mut visit: impl FnMut(&RPattern),
) -> Result<(), LemmaError> {
    check_range(x, ell)?;
    if ell == 0 {
        visit(&RPattern {
            r: 1,
            omega_r: 0,
            pplus_r: 0,
            weight_value: 1.0,
        });
        return Ok(());
    }
    let primes = base_primes(x);
    let e = Enumerator { x, primes: &primes, g };
    e.extend(0, ell, 1, 0, 1.0, &mut visit)?;
    Ok(())
}

pub fn enumerate_r(x: u64, ell: u32, g: &Weight) -> Result<Vec<RPattern>, LemmaError> {
    let mut out = Vec::new();
    visit_r(x, ell, g, |rp| out.push(*rp))?;
    Ok(out)
}

/// `Q_j = x^(1/2^j)`.
pub fn q_j(x: u64, j: u32) -> f64 {
    (x as f64).powf(0.5f64.powi(j as i32))
}

/// Exact test of `r < x / Q_j`, i.e. `r^(2^j) < x^(2^j - 1)`.
fn below_band_top(x: u64, r: u64, j: u32) -> bool {
    let t = ((x as f64) / (r as f64)).ln() / (x as f64).ln();
    let edge = 0.5f64.powi(j as i32);
    if (t - edge).abs() > 1e-9 {
        return t > edge;
    }
    let e = 1u32 << j;
    BigUint::from(r).pow(e) < BigUint::from(x).pow(e - 1)
}

/// The band `j >= 1` with `x/Q_{j-1} <= r < x/Q_j`; a tie `r = x/Q_j`
/// falls into band `j + 1`.
pub fn band_of(x: u64, r: u64) -> u32 {
    debug_assert!(r >= 1 && r < x);
    let mut j = 1;
    while !below_band_top(x, r, j) {
        j += 1;
    }
    j
}

/// Highest band that can be nonempty: `Q_{j-1} >= 2`.
pub fn max_band(x: u64) -> u32 {
    let mut j = 1;
    while q_j(x, j) >= 2.0 {
        j += 1;
    }
    j
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandReport {
    pub j: u32,
    #[serde(rename = "Qj")]
    pub qj: f64,
    pub band_sum: f64,
    pub band_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaSum {
    pub x: u64,
    pub ell: u32,
    pub lambda: f64,
    pub sum: f64,
    /// Number of summands.
    pub count: u64,
    /// The `r = 1` term (only for `ell = 0`), which belongs to no band.
    pub unbanded: f64,
    pub bands: Vec<BandReport>,
}

fn summand(x: u64, rp: &RPattern, lambda: f64) -> f64 {
    rp.weight_value / ((x as f64) / (rp.r as f64)).ln().powf(lambda)
}

/// Computes the sum exactly by enumeration, split over bands.
pub fn lemma_sum(x: u64, ell: u32, g: &Weight, lambda: f64) -> Result<LemmaSum, LemmaError> {
    check_range(x, ell)?;
    let nbands = max_band(x) as usize;
    if ell == 0 {
        let v = 1.0 / (x as f64).ln().powf(lambda);
        return Ok(LemmaSum {
            x,
            ell,
            lambda,
            sum: v,
            count: 1,
            unbanded: v,
            bands: empty_bands(x, nbands),
        });
    }
    let primes = base_primes(x);
    let e = Enumerator { x, primes: &primes, g };
    // One accumulator per smallest prime, merged in prime order.
    let parts: Vec<(Vec<CompensatedSum>, Vec<u64>)> = (0..primes.len())
        .into_par_iter()
        .map(|i| -> Result<_, WeightError> {
            let mut sums = vec![CompensatedSum::new(); nbands];
            let mut counts = vec![0u64; nbands];
            let mut visit = |rp: &RPattern| {
                debug_assert!(rp.r >= 2 && rp.r <= x / 2);
                let j = band_of(x, rp.r) as usize;
                sums[j - 1].add(summand(x, rp, lambda));
                counts[j - 1] += 1;
            };
            e.step(i, ell, 1, 0, 1.0, &mut visit)?;
            Ok((sums, counts))
        })
        .collect::<Result<_, _>>()?;
    let mut bands = empty_bands(x, nbands);
    let mut band_acc = vec![CompensatedSum::new(); nbands];
    for (sums, counts) in parts {
        for j in 0..nbands {
            band_acc[j].merge(sums[j]);
            bands[j].band_count += counts[j];
        }
    }
    let mut total = CompensatedSum::new();
    for (band, acc) in bands.iter_mut().zip(&band_acc) {
        band.band_sum = acc.value();
        total.merge(*acc);
    }
    Ok(LemmaSum {
        x,
        ell,
        lambda,
        sum: total.value(),
        count: bands.iter().map(|b| b.band_count).sum(),
        unbanded: 0.0,
        bands,
    })
}

fn empty_bands(x: u64, nbands: usize) -> Vec<BandReport> {
    (1..=nbands as u32)
        .map(|j| BandReport {
            j,
            qj: q_j(x, j),
            band_sum: 0.0,
            band_count: 0,
        })
        .collect()
}

/// `(G + C)^ell / (ell! ln^λ x)`.
pub fn lemma_bound(x: u64, ell: u32, gx: f64, lambda: f64, c: f64) -> f64 {
    let lnx_pow = (x as f64).ln().powf(lambda);
    if ell == 0 {
        return 1.0 / lnx_pow;
    }
    (f64::from(ell) * (gx + c).ln() - ln_factorial(u64::from(ell))).exp() / lnx_pow
}

/// One row of the `lemma` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaRow {
    pub ell: u32,
    pub sum: f64,
    pub bound: f64,
    pub ratio: f64,
    pub bands: Vec<BandReport>,
}

/// Sum over bound for one `ell`, with G(x) taken from `primes`.
pub fn lemma_bound_check(
    x: u64,
    ell: u32,
    g: &Weight,
    lambda: f64,
    c: f64,
    primes: &PrimeTable,
) -> Result<f64, LemmaError> {
    let gx = big_g(g, x, primes)?;
    let s = lemma_sum(x, ell, g, lambda)?;
    Ok(s.sum / lemma_bound(x, ell, gx, lambda, c))
}

/// Rows for `ell = 0..=max_ell` at a fixed constant `c`.
pub fn lemma_table(
    x: u64,
    max_ell: u32,
    g: &Weight,
    lambda: f64,
    c: f64,
    primes: &PrimeTable,
) -> Result<Vec<LemmaRow>, LemmaError> {
    let gx = big_g(g, x, primes)?;
    (0..=max_ell)
        .map(|ell| {
            let s = lemma_sum(x, ell, g, lambda)?;
            let bound = lemma_bound(x, ell, gx, lambda, c);
            Ok(LemmaRow {
                ell,
                sum: s.sum,
                bound,
                ratio: s.sum / bound,
                bands: s.bands,
            })
        })
        .collect()
}

/// Smallest `C` on the grid `0, 0.01, ..., 10` with ratio <= 1 for every
/// `ell <= max_ell`, or `None` if even `C = 10` is not enough.
pub fn fit_lemma_constant(
    x: u64,
    max_ell: u32,
    g: &Weight,
    lambda: f64,
    primes: &PrimeTable,
) -> Result<Option<f64>, LemmaError> {
    let gx = big_g(g, x, primes)?;
    let sums = (0..=max_ell)
        .map(|ell| lemma_sum(x, ell, g, lambda).map(|s| s.sum))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((0..=1000).map(|i| f64::from(i) / 100.0).find(|&c| {
        sums.iter()
            .enumerate()
            .all(|(ell, &s)| s / lemma_bound(x, ell as u32, gx, lambda, c) <= 1.0)
    }))
}

/// Per-band Rankin majorant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankinReport {
    pub x: u64,
    pub j: u32,
    pub ell: u32,
    #[serde(rename = "Qj")]
    pub qj: f64,
    pub q_prev: f64,
    /// `1 / (20 ln Q_j)`
    pub alpha: f64,
    /// `Σ_{p <= Q_{j-1}} g(p)^(1-α)`
    pub prime_sum: f64,
    /// `Σ_{p <= Q_{j-1}} Σ_{v >= 2} g(p^v)^(1-α)`
    pub higher_powers: f64,
    /// `(prime_sum + higher_powers)^ell / ell!`
    pub majorant: f64,
    /// `Σ_{r in band} g(r)`
    pub band_sum: f64,
    /// `Σ_{r in band} g(r)^(1-α)`
    pub band_sum_rankin: f64,
    pub band_count: u64,
    /// `band_sum / majorant`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum RankinOutcome {
    /// `Q_{j-1} < 2`: the band holds no `r`.
    EmptyBand { j: u32, q_prev: f64 },
    Report(RankinReport),
}

/// Compares the true band sum with the smooth-number majorant obtained by
/// raising each summand to the power `1 - α`.
pub fn rankin_diagnostic(x: u64, j: u32, ell: u32, g: &Weight) -> Result<RankinOutcome, LemmaError> {
    check_range(x, ell)?;
    if j == 0 {
        return Err(LemmaError::ZeroBand);
    }
    let q_prev = q_j(x, j - 1);
    if q_prev < 2.0 {
        return Ok(RankinOutcome::EmptyBand { j, q_prev });
    }
    let qj = q_j(x, j);
    let alpha = 1.0 / (20.0 * qj.ln());
    let exponent = 1.0 - alpha;

    let mut prime_sum = CompensatedSum::new();
    let mut higher = CompensatedSum::new();
    for p in sieve::simple_primes(q_prev.floor() as u64) {
        prime_sum.add(g.eval_prime_power(p, 1)?.powf(exponent));
        for v in 2..=64 {
            let term = g.eval_prime_power(p, v)?.powf(exponent);
            higher.add(term);
            if term < 1e-300 || (p as f64).powi(v as i32) > 1e18 {
                break;
            }
        }
    }
    let base = prime_sum.value() + higher.value();
    let majorant = if ell == 0 {
        1.0
    } else {
        (f64::from(ell) * base.ln() - ln_factorial(u64::from(ell))).exp()
    };

    let mut band_sum = CompensatedSum::new();
    let mut band_rankin = CompensatedSum::new();
    let mut band_count = 0;
    visit_r(x, ell, g, |rp| {
        if rp.r >= 2 && band_of(x, rp.r) == j {
            band_sum.add(rp.weight_value);
            band_rankin.add(rp.weight_value.powf(exponent));
            band_count += 1;
        }
    })?;
    Ok(RankinOutcome::Report(RankinReport {
        x,
        j,
        ell,
        qj,
        q_prev,
        alpha,
        prime_sum: prime_sum.value(),
        higher_powers: higher.value(),
        majorant,
        band_sum: band_sum.value(),
        band_sum_rankin: band_rankin.value(),
        band_count,
        ratio: band_sum.value() / majorant,
    }))
}

/// `#{2 <= m <= x : P+(m)^2 | m}`. `m = 1` is not counted: P+(1) = 0 and
/// 0 divides nothing but 0.
pub fn squarefull_top_count(x: u64, base: &PrimeTable, cfg: &SieveConfig) -> Result<u64, LemmaError> {
    if !(1..=SQUAREFULL_MAX_X).contains(&x) {
        return Err(LemmaError::CountRange(x));
    }
    let parts = sieve::map_factor_segments(1, x, base, cfg, None, |stats| {
        (stats.lo..=stats.hi)
            .filter(|&m| {
                let p = stats.pplus(m);
                p >= 2 && m % (p * p) == 0
            })
            .count() as u64
    })?;
    Ok(parts.into_iter().sum())
}
