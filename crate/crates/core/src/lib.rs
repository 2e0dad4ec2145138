//! Counting integers by their number of distinct prime factors, over sifted
//! sets such as shifted primes, integers with restricted prime factors and
//! twin-prime middles, and comparing the counts with Hardy–Ramanujan-type
//! envelopes.

pub mod sieve;
pub mod numeric;
pub mod weights;
pub mod sifted;
pub mod envelopes;
pub mod lemma;
