//! Multiplicative weights `g` with `g(p^v) <= A / p^v`, prime sets, and the
//! prime sums G(x) = Σ_{p<=x} g(p) and E(x) = Σ_{p<=x, p in E} 1/p.

use crate::numeric::CompensatedSum;
use crate::sieve::{Factorizer, PrimeTable};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Relative slack on the class cap, absorbing rounding in `A / p^v`.
const CAP_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("weight {weight} leaves its class at p={p}, v={v}: {value} > {cap}")]
    ClassViolation {
        weight: String,
        p: u64,
        v: u32,
        value: f64,
        cap: f64,
    },
    #[error("prime table reaches {have}, the sum needs primes up to {need}")]
    TableTooSmall { need: u64, have: u64 },
    #[error("sum requires x >= 2, got {0}")]
    DomainTooSmall(u64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse {what} from {input:?}: {reason}")]
pub struct ParseSpecError {
    pub what: &'static str,
    pub input: String,
    pub reason: String,
}

impl ParseSpecError {
    pub(crate) fn new(what: &'static str, input: &str, reason: impl Into<String>) -> Self {
        ParseSpecError {
            what,
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrimeSetKind {
    All,
    Explicit { primes: BTreeSet<u64> },
    Complement { primes: BTreeSet<u64> },
    /// `p` belongs iff `p mod modulus` is listed. Primes dividing the modulus
    /// are therefore only members when their own residue is listed.
    Residues { modulus: u64, residues: BTreeSet<u64> },
}

/// A set of primes, written in specs as `all`, `{}`, `{2,3}`, `!{2,3}`
/// or `mod4=1` / `mod8=1|7`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeSet {
    pub name: String,
    pub kind: PrimeSetKind,
}

impl PrimeSet {
    fn named(kind: PrimeSetKind) -> Self {
        let name = match &kind {
            PrimeSetKind::All => "all".to_string(),
            PrimeSetKind::Explicit { primes } => format!("{{{}}}", join(primes, ",")),
            PrimeSetKind::Complement { primes } => format!("!{{{}}}", join(primes, ",")),
            PrimeSetKind::Residues { modulus, residues } => {
                format!("mod{modulus}={}", join(residues, "|"))
            }
        };
        PrimeSet { name, kind }
    }

    pub fn all() -> Self {
        Self::named(PrimeSetKind::All)
    }

    pub fn empty() -> Self {
        Self::explicit([])
    }

    pub fn explicit<I: IntoIterator<Item = u64>>(primes: I) -> Self {
        Self::named(PrimeSetKind::Explicit {
            primes: primes.into_iter().collect(),
        })
    }

    pub fn complement<I: IntoIterator<Item = u64>>(primes: I) -> Self {
        Self::named(PrimeSetKind::Complement {
            primes: primes.into_iter().collect(),
        })
    }

    pub fn residues<I: IntoIterator<Item = u64>>(modulus: u64, residues: I) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        Self::named(PrimeSetKind::Residues {
            modulus,
            residues: residues.into_iter().map(|r| r % modulus).collect(),
        })
    }

    /// Membership of the prime `p`.
    pub fn contains(&self, p: u64) -> bool {
        match &self.kind {
            PrimeSetKind::All => true,
            PrimeSetKind::Explicit { primes } => primes.contains(&p),
            PrimeSetKind::Complement { primes } => !primes.contains(&p),
            PrimeSetKind::Residues { modulus, residues } => residues.contains(&(p % modulus)),
        }
    }

    pub fn is_all(&self) -> bool {
        matches!(self.kind, PrimeSetKind::All)
    }
}

fn join(values: &BTreeSet<u64>, sep: &str) -> String {
    values
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}

impl fmt::Display for PrimeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl FromStr for PrimeSet {
    type Err = ParseSpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = |reason: &str| ParseSpecError::new("prime set", s, reason);
        let list = |body: &str| -> Result<Vec<u64>, ParseSpecError> {
            let inner = body
                .strip_prefix('{')
                .and_then(|b| b.strip_suffix('}'))
                .ok_or_else(|| err("expected {p,q,...}"))?;
            if inner.trim().is_empty() {
                return Ok(Vec::new());
            }
            inner
                .split(',')
                .map(|t| t.trim().parse::<u64>().map_err(|_| err("bad prime in list")))
                .collect()
        };
        if s == "all" {
            Ok(PrimeSet::all())
        } else if let Some(rest) = s.strip_prefix('!') {
            Ok(PrimeSet::complement(list(rest)?))
        } else if s.starts_with('{') {
            Ok(PrimeSet::explicit(list(s)?))
        } else if let Some(rest) = s.strip_prefix("mod") {
            let (m, rs) = rest.split_once('=').ok_or_else(|| err("expected mod<m>=<r>|<r>"))?;
            let modulus: u64 = m.parse().map_err(|_| err("bad modulus"))?;
            if modulus == 0 {
                return Err(err("modulus must be positive"));
            }
            let residues = rs
                .split('|')
                .map(|t| t.trim().parse::<u64>().map_err(|_| err("bad residue")))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(PrimeSet::residues(modulus, residues))
        } else {
            Err(err("unknown prime set syntax"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    /// g(r) = 1/r.
    UnitOverR,
    /// g(r) = 1/φ(r) when r ∈ Q(E), else 0.
    OneOverPhiOnQE { set: PrimeSet },
    /// g(p^v) = 1/p^v for p ∈ E, else 0.
    IndicatorOverROnQE { set: PrimeSet },
    /// g(r) = (1/r) Π_{p | r, p > 3} (1 - 1/p)/(1 - 3/p).
    Twin,
}

/// A nonnegative multiplicative function with declared class bound `A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weight {
    pub name: String,
    pub class_bound: f64,
    pub kind: WeightKind,
}

impl Weight {
    pub fn unit_over_r() -> Self {
        Weight {
            name: "unit".into(),
            class_bound: 1.0,
            kind: WeightKind::UnitOverR,
        }
    }

    pub fn one_over_phi_on(set: PrimeSet) -> Self {
        Weight {
            name: format!("phi-qe:{set}"),
            class_bound: 2.0,
            kind: WeightKind::OneOverPhiOnQE { set },
        }
    }

    pub fn indicator_over_r_on(set: PrimeSet) -> Self {
        Weight {
            name: format!("ind-qe:{set}"),
            class_bound: 1.0,
            kind: WeightKind::IndicatorOverROnQE { set },
        }
    }

    pub fn twin() -> Self {
        Weight {
            name: "twin".into(),
            class_bound: 2.0,
            kind: WeightKind::Twin,
        }
    }

    /// g(p^v) without the class check.
    pub fn raw_prime_power(&self, p: u64, v: u32) -> f64 {
        debug_assert!(v >= 1);
        let pv = (p as f64).powi(v as i32);
        match &self.kind {
            WeightKind::UnitOverR => 1.0 / pv,
            WeightKind::OneOverPhiOnQE { set } => {
                if set.contains(p) {
                    // φ(p^v) = p^(v-1) (p - 1)
                    1.0 / ((p as f64).powi(v as i32 - 1) * (p - 1) as f64)
                } else {
                    0.0
                }
            }
            WeightKind::IndicatorOverROnQE { set } => {
                if set.contains(p) {
                    1.0 / pv
                } else {
                    0.0
                }
            }
            WeightKind::Twin => {
                if p <= 3 {
                    1.0 / pv
                } else {
                    (p - 1) as f64 / ((p - 3) as f64 * pv)
                }
            }
        }
    }

    /// g(p^v), asserting `g(p^v) <= A / p^v`.
    pub fn eval_prime_power(&self, p: u64, v: u32) -> Result<f64, WeightError> {
        let value = self.raw_prime_power(p, v);
        let cap = self.class_bound / (p as f64).powi(v as i32);
        if !(value >= 0.0) || value > cap * (1.0 + CAP_SLACK) {
            return Err(WeightError::ClassViolation {
                weight: self.name.clone(),
                p,
                v,
                value,
                cap,
            });
        }
        Ok(value)
    }

    /// g(r) from the factorization of `r`; `g(1) = 1`.
    pub fn eval_factored(&self, factors: &[(u64, u32)]) -> Result<f64, WeightError> {
        let mut g = 1.0;
        for &(p, v) in factors {
            g *= self.eval_prime_power(p, v)?;
        }
        Ok(g)
    }

    pub fn eval<F: Factorizer + ?Sized>(&self, r: u64, factorizer: &F) -> Result<f64, WeightError> {
        assert!(r >= 1, "weights are defined on positive integers");
        self.eval_factored(&factorizer.factorize(r))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl FromStr for Weight {
    type Err = ParseSpecError;

    /// `unit`, `twin`, `phi` (= `phi-qe:all`), `phi-qe:<set>`, `ind-qe:<set>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "unit" => return Ok(Weight::unit_over_r()),
            "twin" => return Ok(Weight::twin()),
            "phi" => return Ok(Weight::one_over_phi_on(PrimeSet::all())),
            _ => {}
        }
        if let Some(set) = s.strip_prefix("phi-qe:") {
            Ok(Weight::one_over_phi_on(set.parse()?))
        } else if let Some(set) = s.strip_prefix("ind-qe:") {
            Ok(Weight::indicator_over_r_on(set.parse()?))
        } else {
            Err(ParseSpecError::new("weight", s, "unknown weight name"))
        }
    }
}

/// The weights used by the corollaries, restricted sets taken as all primes.
pub fn builtin_weights() -> Vec<Weight> {
    vec![
        Weight::unit_over_r(),
        Weight::one_over_phi_on(PrimeSet::all()),
        Weight::indicator_over_r_on(PrimeSet::all()),
        Weight::twin(),
    ]
}

fn check_table(x: u64, primes: &PrimeTable) -> Result<(), WeightError> {
    if x < 2 {
        return Err(WeightError::DomainTooSmall(x));
    }
    if primes.limit() < x {
        return Err(WeightError::TableTooSmall {
            need: x,
            have: primes.limit(),
        });
    }
    Ok(())
}

/// G(x) = Σ_{p <= x} g(p), compensated.
pub fn big_g(g: &Weight, x: u64, primes: &PrimeTable) -> Result<f64, WeightError> {
    check_table(x, primes)?;
    let mut sum = CompensatedSum::new();
    for p in primes.iter().take_while(|&p| p <= x) {
        sum.add(g.eval_prime_power(p, 1)?);
    }
    Ok(sum.value())
}

/// E(x) = Σ_{p <= x, p ∈ E} 1/p, compensated.
pub fn big_e(set: &PrimeSet, x: u64, primes: &PrimeTable) -> Result<f64, WeightError> {
    check_table(x, primes)?;
    Ok(primes
        .iter()
        .take_while(|&p| p <= x)
        .filter(|&p| set.contains(p))
        .map(|p| 1.0 / p as f64)
        .collect::<CompensatedSum>()
        .value())
}
