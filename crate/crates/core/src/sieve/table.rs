use serde::Serialize;

/// Number of primes between absolute checkpoints.
const STRIDE: usize = 64;

/// All primes up to an inclusive limit, stored as 16-bit gaps with an
/// absolute checkpoint every [`STRIDE`] entries.
///
/// Prime gaps below 2^40 are far below 2^16, so the gap encoding never
/// truncates. At 10^9 the table is about 100 MB instead of 400 MB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    len: usize,
    gaps: Vec<u16>,
    checkpoints: Vec<u64>,
}

impl PrimeTable {
    pub(crate) fn builder(limit: u64) -> TableBuilder {
        TableBuilder {
            table: PrimeTable {
                limit,
                len: 0,
                gaps: Vec::new(),
                checkpoints: Vec::new(),
            },
            last: 0,
        }
    }

    /// Builds a table from an increasing sequence of primes, all `<= limit`.
    pub fn from_sorted<I: IntoIterator<Item = u64>>(limit: u64, primes: I) -> Self {
        let mut b = Self::builder(limit);
        for p in primes {
            b.push(p);
        }
        b.finish()
    }

    /// Inclusive upper bound the table was sieved to.
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, index: usize) -> Option<u64> {
        if index >= self.len {
            return None;
        }
        let block = index / STRIDE;
        let mut p = self.checkpoints[block];
        for &g in &self.gaps[block * STRIDE + 1..=index] {
            p += u64::from(g);
        }
        Some(p)
    }

    pub fn largest(&self) -> Option<u64> {
        self.len.checked_sub(1).and_then(|i| self.get(i))
    }

    pub fn iter(&self) -> Primes<'_> {
        Primes {
            table: self,
            index: 0,
            current: 0,
        }
    }

    /// Primes `<= bound`, materialized.
    pub fn primes_up_to(&self, bound: u64) -> Vec<u64> {
        self.iter().take_while(|&p| p <= bound).collect()
    }

    /// π(x): number of table entries `<= x`. Exact only for `x <= limit`.
    pub fn count_le(&self, x: u64) -> usize {
        let blocks = self.checkpoints.partition_point(|&cp| cp <= x);
        if blocks == 0 {
            return 0;
        }
        let mut index = (blocks - 1) * STRIDE;
        let mut p = self.checkpoints[blocks - 1];
        let mut count = index + 1;
        index += 1;
        while index < self.len {
            p += u64::from(self.gaps[index]);
            if p > x {
                break;
            }
            count += 1;
            index += 1;
        }
        count
    }

    /// Membership test; `n` above the limit is reported as not contained.
    pub fn contains(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && self.count_le(n) > self.count_le(n - 1)
    }
}

pub(crate) struct TableBuilder {
    table: PrimeTable,
    last: u64,
}

impl TableBuilder {
    pub(crate) fn push(&mut self, p: u64) {
        debug_assert!(p > self.last && p <= self.table.limit);
        let gap = u16::try_from(p - self.last).expect("prime gap exceeds 16 bits");
        if self.table.len.is_multiple_of(STRIDE) {
            self.table.checkpoints.push(p);
        }
        self.table.gaps.push(gap);
        self.table.len += 1;
        self.last = p;
    }

    pub(crate) fn finish(mut self) -> PrimeTable {
        self.table.gaps.shrink_to_fit();
        self.table.checkpoints.shrink_to_fit();
        self.table
    }
}

/// Iterator over a [`PrimeTable`] in increasing order.
pub struct Primes<'a> {
    table: &'a PrimeTable,
    index: usize,
    current: u64,
}

impl Iterator for Primes<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.index >= self.table.len {
            return None;
        }
        self.current += u64::from(self.table.gaps[self.index]);
        self.index += 1;
        Some(self.current)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = self.table.len - self.index;
        (rest, Some(rest))
    }
}

impl ExactSizeIterator for Primes<'_> {}

/// Summary used by the CLI `sieve` command.
#[derive(Debug, Clone, Serialize)]
pub struct TableSummary {
    pub limit: u64,
    pub prime_count: usize,
    pub largest_prime: Option<u64>,
}

impl From<&PrimeTable> for TableSummary {
    fn from(t: &PrimeTable) -> Self {
        TableSummary {
            limit: t.limit(),
            prime_count: t.len(),
            largest_prime: t.largest(),
        }
    }
}
