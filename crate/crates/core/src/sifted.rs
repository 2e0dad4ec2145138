//! Sifted families `S` with a forced divisor `s`, and histograms of
//! `#{n <= x, n ∈ S : ω(n/s) = k}`.
//!
//! Every family is scanned through the cofactor `m = n/s`, which runs over
//! `[1, x/s]` in sieve segments. ω(m) and, where needed, Q(E)-membership of
//! `m` come from the factor sieve; primality conditions (`p = n - a`,
//! `n ± 1`) come from a prime window covering the matching range.

use crate::sieve::{
    factor::factor_segment, FactorStats, Factorizer, PrimeTable, PrimeWindow, SieveConfig,
    SieveError,
};
use crate::weights::{ParseSpecError, PrimeSet, Weight};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SiftedError {
    #[error("x = {x} is below s^2 = {}; the envelope is not claimed there", s * s)]
    HypothesisViolation { x: u64, s: u64 },
    #[error("shift a must be nonzero")]
    ZeroShift,
    #[error(transparent)]
    Sieve(#[from] SieveError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// Every positive integer.
    AllIntegers,
    /// `n = p + a` with `p` prime and `s | n`.
    ShiftedPrimes { a: i64 },
    /// Integers whose prime factors all lie in `set`.
    QE { set: PrimeSet },
    /// Shifted primes with `n/s ∈ Q(E)`.
    ShiftedPrimesQE { a: i64, set: PrimeSet },
    /// `n > 4` with `n - 1` and `n + 1` both prime.
    TwinMiddles,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SiftedFamily {
    pub name: String,
    /// Divides every member.
    pub s: u64,
    pub kind: FamilyKind,
}

/// `s = 2` for odd shifts, `s = 1` for even ones.
fn shift_divisor(a: i64) -> u64 {
    if a % 2 == 0 {
        1
    } else {
        2
    }
}

impl SiftedFamily {
    pub fn all_integers() -> Self {
        SiftedFamily {
            name: "all".into(),
            s: 1,
            kind: FamilyKind::AllIntegers,
        }
    }

    pub fn shifted_primes(a: i64) -> Result<Self, SiftedError> {
        if a == 0 {
            return Err(SiftedError::ZeroShift);
        }
        Ok(SiftedFamily {
            name: format!("shifted:a={a}"),
            s: shift_divisor(a),
            kind: FamilyKind::ShiftedPrimes { a },
        })
    }

    pub fn qe(set: PrimeSet) -> Self {
        SiftedFamily {
            name: format!("qe:{set}"),
            s: 1,
            kind: FamilyKind::QE { set },
        }
    }

    pub fn shifted_primes_qe(a: i64, set: PrimeSet) -> Result<Self, SiftedError> {
        if a == 0 {
            return Err(SiftedError::ZeroShift);
        }
        Ok(SiftedFamily {
            name: format!("shifted-qe:a={a},{set}"),
            s: shift_divisor(a),
            kind: FamilyKind::ShiftedPrimesQE { a, set },
        })
    }

    pub fn twin_middles() -> Self {
        SiftedFamily {
            name: "twin".into(),
            s: 6,
            kind: FamilyKind::TwinMiddles,
        }
    }

    /// The five families with restricted sets taken as `set`, and shift `a`.
    pub fn catalog(a: i64, set: &PrimeSet) -> Vec<SiftedFamily> {
        vec![
            Self::all_integers(),
            Self::shifted_primes(a).expect("nonzero shift"),
            Self::qe(set.clone()),
            Self::shifted_primes_qe(a, set.clone()).expect("nonzero shift"),
            Self::twin_middles(),
        ]
    }

    pub fn shift(&self) -> Option<i64> {
        match self.kind {
            FamilyKind::ShiftedPrimes { a } | FamilyKind::ShiftedPrimesQE { a, .. } => Some(a),
            _ => None,
        }
    }

    pub fn prime_set(&self) -> Option<&PrimeSet> {
        match &self.kind {
            FamilyKind::QE { set } | FamilyKind::ShiftedPrimesQE { set, .. } => Some(set),
            _ => None,
        }
    }

    /// The weight under which the family meets the sieve condition.
    pub fn natural_weight(&self) -> Weight {
        match &self.kind {
            FamilyKind::AllIntegers => Weight::unit_over_r(),
            FamilyKind::ShiftedPrimes { .. } => Weight::one_over_phi_on(PrimeSet::all()),
            FamilyKind::QE { set } => Weight::indicator_over_r_on(set.clone()),
            FamilyKind::ShiftedPrimesQE { set, .. } => Weight::one_over_phi_on(set.clone()),
            FamilyKind::TwinMiddles => Weight::twin(),
        }
    }

    /// Power of `log` saved by the sieve: 1 for plain and Q(E) sets, 2 for
    /// shifted primes, 3 for twin middles.
    pub fn natural_lambda(&self) -> f64 {
        match self.kind {
            FamilyKind::AllIntegers | FamilyKind::QE { .. } => 1.0,
            FamilyKind::ShiftedPrimes { .. } | FamilyKind::ShiftedPrimesQE { .. } => 2.0,
            FamilyKind::TwinMiddles => 3.0,
        }
    }

    /// Range `[lo, hi]` of the auxiliary primality test for cofactors in `[mlo, mhi]`.
    fn aux_range(&self, mlo: u64, mhi: u64) -> Option<(u64, u64)> {
        let s = i128::from(self.s);
        let (lo, hi) = match self.kind {
            FamilyKind::ShiftedPrimes { a } | FamilyKind::ShiftedPrimesQE { a, .. } => (
                s * i128::from(mlo) - i128::from(a),
                s * i128::from(mhi) - i128::from(a),
            ),
            FamilyKind::TwinMiddles => (s * i128::from(mlo) - 1, s * i128::from(mhi) + 1),
            _ => return None,
        };
        Some((lo.max(0) as u64, hi.max(0) as u64))
    }

    /// Largest base prime needed to enumerate the family up to `x`.
    pub fn base_limit(&self, x: u64) -> u64 {
        let mmax = x / self.s;
        let aux = self.aux_range(1, mmax.max(1)).map_or(0, |(_, hi)| hi);
        mmax.isqrt().max(aux.isqrt()).max(2)
    }

    /// Largest integer whose primality or factorization [`Self::member_test`]
    /// may consult for members `<= x`.
    pub fn oracle_limit(&self, x: u64) -> u64 {
        let aux = self.aux_range(1, (x / self.s).max(1)).map_or(0, |(_, hi)| hi);
        x.max(aux)
    }

    /// Membership of `n`, decided from factorizations supplied by `f`, which
    /// must cover [`Self::oracle_limit`].
    pub fn member_test<F: Factorizer + ?Sized>(&self, n: u64, f: &F) -> bool {
        if n == 0 || !n.is_multiple_of(self.s) {
            return false;
        }
        let m = n / self.s;
        let prime_at = |v: i128| v >= 2 && f.is_prime(v as u64);
        let smooth = |set: &PrimeSet, m: u64| f.factorize(m).iter().all(|&(p, _)| set.contains(p));
        match &self.kind {
            FamilyKind::AllIntegers => true,
            FamilyKind::ShiftedPrimes { a } => prime_at(i128::from(n) - i128::from(*a)),
            FamilyKind::QE { set } => smooth(set, n),
            FamilyKind::ShiftedPrimesQE { a, set } => {
                prime_at(i128::from(n) - i128::from(*a)) && smooth(set, m)
            }
            FamilyKind::TwinMiddles => {
                n > 4 && prime_at(i128::from(n) - 1) && prime_at(i128::from(n) + 1)
            }
        }
    }

    fn filter(&self) -> Option<impl Fn(u64) -> bool + Sync + '_> {
        self.prime_set().map(|set| move |p: u64| set.contains(p))
    }

    /// Visits the members `s*m` for `m` in the segment, passing `(n, ω(m))`.
    fn scan_segment(&self, stats: &FactorStats, base: &[u64], mut visit: impl FnMut(u64, u8)) {
        let window = self.aux_range(stats.lo, stats.hi).map(|(lo, hi)| {
            let hi = hi.max(lo);
            PrimeWindow::from_base(lo, hi, base)
        });
        let s = i128::from(self.s);
        for m in stats.lo..=stats.hi {
            let n = self.s * m;
            let ok = match (&self.kind, &window) {
                (FamilyKind::AllIntegers, _) => true,
                (FamilyKind::QE { .. }, _) => stats.in_set(m),
                (FamilyKind::ShiftedPrimes { a }, Some(w)) => {
                    w.is_prime_signed(s * i128::from(m) - i128::from(*a))
                }
                (FamilyKind::ShiftedPrimesQE { a, .. }, Some(w)) => {
                    stats.in_set(m) && w.is_prime_signed(s * i128::from(m) - i128::from(*a))
                }
                (FamilyKind::TwinMiddles, Some(w)) => {
                    n > 4 && w.is_prime(n - 1) && w.is_prime(n + 1)
                }
                _ => unreachable!("primality window missing"),
            };
            if ok {
                debug_assert_eq!(n % self.s, 0);
                visit(n, stats.omega(m));
            }
        }
    }

    fn prepare(&self, x: u64, base: &PrimeTable, cfg: &SieveConfig) -> Result<Vec<u64>, SiftedError> {
        cfg.validate()?;
        let need = self.base_limit(x);
        if base.limit() < need {
            return Err(SieveError::BaseTooSmall {
                need,
                have: base.limit(),
            }
            .into());
        }
        Ok(base.primes_up_to(need))
    }

    /// Streams members `n <= x` in increasing order as `(n, ω(n/s))`.
    pub fn for_each_member(
        &self,
        x: u64,
        base: &PrimeTable,
        cfg: &SieveConfig,
        mut visit: impl FnMut(u64, u8),
    ) -> Result<(), SiftedError> {
        let primes = self.prepare(x, base, cfg)?;
        let mmax = x / self.s;
        if mmax == 0 {
            return Ok(());
        }
        let filter = self.filter();
        let keep = filter.as_ref().map(|f| f as &(dyn Fn(u64) -> bool + Sync));
        for (lo, hi) in cfg.segments(1, mmax) {
            let stats = factor_segment(lo, hi, &primes, keep);
            self.scan_segment(&stats, &primes, &mut visit);
        }
        Ok(())
    }

    /// Members `<= x`, materialized.
    pub fn members(&self, x: u64, base: &PrimeTable, cfg: &SieveConfig) -> Result<Vec<u64>, SiftedError> {
        let mut out = Vec::new();
        self.for_each_member(x, base, cfg, |n, _| out.push(n))?;
        Ok(out)
    }
}

impl fmt::Display for SiftedFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl FromStr for SiftedFamily {
    type Err = ParseSpecError;

    /// `all`, `shifted:a=<int>`, `qe:<set>`, `shifted-qe:a=<int>,<set>`, `twin`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = |reason: &str| ParseSpecError::new("family", s, reason);
        let shift = |t: &str| -> Result<i64, ParseSpecError> {
            let v = t
                .strip_prefix("a=")
                .ok_or_else(|| err("expected a=<int>"))?
                .trim()
                .parse::<i64>()
                .map_err(|_| err("shift is not an integer"))?;
            if v == 0 {
                return Err(err("shift must be nonzero"));
            }
            Ok(v)
        };
        match s {
            "all" => return Ok(Self::all_integers()),
            "twin" => return Ok(Self::twin_middles()),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("shifted-qe:") {
            let (a, set) = rest.split_once(',').ok_or_else(|| err("expected a=<int>,<set>"))?;
            Ok(Self::shifted_primes_qe(shift(a)?, set.parse()?).expect("nonzero"))
        } else if let Some(rest) = s.strip_prefix("shifted:") {
            Ok(Self::shifted_primes(shift(rest)?).expect("nonzero"))
        } else if let Some(rest) = s.strip_prefix("qe:") {
            Ok(Self::qe(rest.parse()?))
        } else {
            Err(err("unknown family"))
        }
    }
}

/// `counts[k] = #{n <= x, n ∈ S : ω(n/s) = k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountHistogram {
    pub family: String,
    pub x: u64,
    pub s: u64,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl CountHistogram {
    fn empty(family: &SiftedFamily, x: u64) -> Self {
        CountHistogram {
            family: family.name.clone(),
            x,
            s: family.s,
            counts: Vec::new(),
            total: 0,
        }
    }

    fn record(&mut self, k: u8) {
        let k = usize::from(k);
        if self.counts.len() <= k {
            self.counts.resize(k + 1, 0);
        }
        self.counts[k] += 1;
        self.total += 1;
    }

    fn merge(&mut self, other: &CountHistogram) {
        if self.counts.len() < other.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (dst, src) in self.counts.iter_mut().zip(&other.counts) {
            *dst += src;
        }
        self.total += other.total;
    }

    /// N_k, zero past the last populated bin.
    pub fn count(&self, k: usize) -> u64 {
        self.counts.get(k).copied().unwrap_or(0)
    }

    /// `(k, N_k)` for `k >= 1` with `N_k > 0`.
    pub fn positive_bins(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k, c))
    }
}

/// Exact histogram of ω(n/s) over members `n <= x`. Requires `x >= s^2`.
pub fn count_histogram(
    family: &SiftedFamily,
    x: u64,
    base: &PrimeTable,
    cfg: &SieveConfig,
) -> Result<CountHistogram, SiftedError> {
    if x < family.s * family.s {
        return Err(SiftedError::HypothesisViolation { x, s: family.s });
    }
    let primes = family.prepare(x, base, cfg)?;
    let filter = family.filter();
    let keep = filter.as_ref().map(|f| f as &(dyn Fn(u64) -> bool + Sync));
    let parts = cfg.map_segments(1, x / family.s, |lo, hi| {
        let stats = factor_segment(lo, hi, &primes, keep);
        let mut h = CountHistogram::empty(family, x);
        family.scan_segment(&stats, &primes, |_, k| h.record(k));
        h
    });
    let mut hist = CountHistogram::empty(family, x);
    for part in &parts {
        hist.merge(part);
    }
    Ok(hist)
}
