/// ω(n) and P+(n) for every `n` in `[lo, hi]`.
///
/// `omega[i] = ω(lo + i)` and `pplus[i] = P+(lo + i)`, with ω(1) = P+(1) = 0.
/// When the stats were produced with a prime filter, `in_set[i]` tells
/// whether every prime factor of `lo + i` passed it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorStats {
    pub lo: u64,
    pub hi: u64,
    pub omega: Vec<u8>,
    pub pplus: Vec<u64>,
    pub in_set: Option<Vec<bool>>,
}

impl FactorStats {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn omega(&self, n: u64) -> u8 {
        self.omega[self.index(n)]
    }

    pub fn pplus(&self, n: u64) -> u64 {
        self.pplus[self.index(n)]
    }

    /// True when all prime factors of `n` passed the filter (or no filter was given).
    pub fn in_set(&self, n: u64) -> bool {
        match &self.in_set {
            Some(v) => v[self.index(n)],
            None => true,
        }
    }

    fn index(&self, n: u64) -> usize {
        assert!(
            (self.lo..=self.hi).contains(&n),
            "{n} outside [{}, {}]",
            self.lo,
            self.hi
        );
        (n - self.lo) as usize
    }

    pub(crate) fn concat(parts: Vec<FactorStats>) -> FactorStats {
        let lo = parts.first().map_or(1, |p| p.lo);
        let hi = parts.last().map_or(0, |p| p.hi);
        let filtered = parts.first().is_some_and(|p| p.in_set.is_some());
        let total = parts.iter().map(|p| p.len()).sum();
        let mut out = FactorStats {
            lo,
            hi,
            omega: Vec::with_capacity(total),
            pplus: Vec::with_capacity(total),
            in_set: filtered.then(|| Vec::with_capacity(total)),
        };
        for p in parts {
            debug_assert!(out.omega.is_empty() || p.lo == out.lo + out.omega.len() as u64);
            out.omega.extend_from_slice(&p.omega);
            out.pplus.extend_from_slice(&p.pplus);
            if let (Some(dst), Some(src)) = (out.in_set.as_mut(), p.in_set.as_ref()) {
                dst.extend_from_slice(src);
            }
        }
        out
    }
}

/// Factor sieve over one segment. `base` holds every prime `<= sqrt(hi)`.
pub(crate) fn factor_segment(
    lo: u64,
    hi: u64,
    base: &[u64],
    keep: Option<&(dyn Fn(u64) -> bool + Sync)>,
) -> FactorStats {
    let len = (hi - lo + 1) as usize;
    let mut omega = vec![0u8; len];
    let mut pplus = vec![0u64; len];
    // Product of the sieved prime powers dividing lo + i.
    let mut sieved = vec![1u64; len];
    let mut in_set = keep.map(|_| vec![true; len]);
    let root = hi.isqrt();

    for &p in base {
        if p > root {
            break;
        }
        let step = p as usize;
        let allowed = keep.is_none_or(|f| f(p));
        let mut i = (lo.div_ceil(p) * p - lo) as usize;
        while i < len {
            omega[i] += 1;
            pplus[i] = p;
            sieved[i] *= p;
            i += step;
        }
        if !allowed {
            let flags = in_set.as_mut().expect("filter present");
            let mut i = (lo.div_ceil(p) * p - lo) as usize;
            while i < len {
                flags[i] = false;
                i += step;
            }
        }
        let mut pk = p;
        while let Some(next) = pk.checked_mul(p).filter(|&q| q <= hi) {
            pk = next;
            let mut i = (lo.div_ceil(pk) * pk - lo) as usize;
            let step = pk as usize;
            while i < len {
                sieved[i] *= p;
                i += step;
            }
        }
    }

    for (i, &prod) in sieved.iter().enumerate() {
        let n = lo + i as u64;
        if prod != n {
            // The cofactor has no prime factor <= sqrt(hi), so it is one prime.
            let q = n / prod;
            omega[i] += 1;
            pplus[i] = q;
            if let (Some(flags), Some(f)) = (in_set.as_mut(), keep) {
                if !f(q) {
                    flags[i] = false;
                }
            }
        }
    }

    FactorStats {
        lo,
        hi,
        omega,
        pplus,
        in_set,
    }
}

/// Prime factorization `[(p, v), ...]` with `p` increasing, by trial division.
/// `trial_factorize(1)` is empty.
pub fn trial_factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "factorization of 0 is undefined");
    let mut out = Vec::new();
    let mut push = |n: &mut u64, p: u64| {
        let mut v = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            v += 1;
        }
        if v > 0 {
            out.push((p, v));
        }
    };
    push(&mut n, 2);
    let mut d = 3;
    while d * d <= n {
        push(&mut n, d);
        d += 2;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// ω(n) by trial division. Kept independent of the sieve so it can check it.
pub fn omega_single(n: u64) -> u32 {
    trial_factorize(n).len() as u32
}

/// Source of factorizations for weight evaluation and membership tests.
pub trait Factorizer {
    fn factorize(&self, n: u64) -> Vec<(u64, u32)>;

    fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.factorize(n) == [(n, 1)]
    }
}

/// Trial division; fine for occasional evaluations.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrialDivision;

impl Factorizer for TrialDivision {
    fn factorize(&self, n: u64) -> Vec<(u64, u32)> {
        trial_factorize(n)
    }
}

/// Smallest-prime-factor table up to a limit (linear sieve). Four bytes per
/// integer, meant for the brute-force checks at `x <= ~10^7`.
#[derive(Debug, Clone)]
pub struct SmallestFactorTable {
    spf: Vec<u32>,
}

impl SmallestFactorTable {
    pub fn new(limit: u64) -> Self {
        assert!(limit < u64::from(u32::MAX), "table limit too large");
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                if p > si || i * p as usize > n {
                    break;
                }
                spf[i * p as usize] = p;
            }
        }
        if n >= 1 {
            spf[1] = 1;
        }
        SmallestFactorTable { spf }
    }

    pub fn limit(&self) -> u64 {
        self.spf.len() as u64 - 1
    }

    pub fn smallest_factor(&self, n: u64) -> u64 {
        u64::from(self.spf[n as usize])
    }
}

impl Factorizer for SmallestFactorTable {
    fn factorize(&self, mut n: u64) -> Vec<(u64, u32)> {
        assert!(n >= 1 && n <= self.limit(), "{n} outside factor table");
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.smallest_factor(n);
            n /= p;
            match out.last_mut() {
                Some((q, v)) if *q == p => *v += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.smallest_factor(n) == n
    }
}
