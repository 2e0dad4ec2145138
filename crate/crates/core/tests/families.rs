use hr_sieve::envelopes::{evaluate, fit_constants, FitKind};
use hr_sieve::lemma::squarefull_top_count;
use hr_sieve::sieve::{omega_single, sieve_primes, simple_primes, PrimeTable, SieveConfig, SmallestFactorTable};
use hr_sieve::sifted::{count_histogram, CountHistogram, SiftedFamily};
use hr_sieve::weights::PrimeSet;

fn cfg() -> SieveConfig {
    SieveConfig {
        parallel: true,
        ..SieveConfig::default()
    }
}

fn table(limit: u64) -> PrimeTable {
    sieve_primes(limit.max(2), &cfg()).unwrap()
}

fn histogram(f: &SiftedFamily, x: u64) -> CountHistogram {
    count_histogram(f, x, &table(f.base_limit(x)), &cfg()).unwrap()
}

#[test]
fn shifted_minus_one_recount_at_one_million() {
    let x = 1_000_000;
    let mut oracle = vec![0u64; 10];
    for p in simple_primes(x + 1).into_iter().skip(1) {
        oracle[omega_single((p - 1) / 2) as usize] += 1;
    }
    while oracle.last() == Some(&0) {
        oracle.pop();
    }
    let h = histogram(&SiftedFamily::shifted_primes(-1).unwrap(), x);
    assert_eq!(h.s, 2);
    assert_eq!(h.counts, oracle);
    assert_eq!(h.total, 78_497);
}

#[test]
fn full_prime_set_collapses_to_base_family() {
    for x in [10_000u64, 123_457] {
        for a in [-1i64, 1, 2] {
            let plain = histogram(&SiftedFamily::shifted_primes(a).unwrap(), x);
            let full = histogram(&SiftedFamily::shifted_primes_qe(a, PrimeSet::all()).unwrap(), x);
            assert_eq!(plain.counts, full.counts, "a={a}, x={x}");
        }
        let all = histogram(&SiftedFamily::all_integers(), x);
        let qe = histogram(&SiftedFamily::qe(PrimeSet::all()), x);
        assert_eq!(all.counts, qe.counts);
        assert_eq!(all.total, x);
    }
}

#[test]
fn empty_prime_set_keeps_only_one() {
    let h = histogram(&SiftedFamily::qe(PrimeSet::empty()), 1000);
    assert_eq!(h.counts, vec![1]);
}

#[test]
fn qe_counts_match_factorization() {
    let set: PrimeSet = "mod4=1".parse().unwrap();
    let x = 50_000;
    let spf = SmallestFactorTable::new(x);
    let fam = SiftedFamily::qe(set);
    let members = (1..=x).filter(|&n| fam.member_test(n, &spf)).count() as u64;
    assert_eq!(histogram(&fam, x).total, members);
}

#[test]
fn squarefull_top_density_decreases() {
    let base = table(1000);
    let densities: Vec<f64> = [1_000u64, 10_000, 100_000, 1_000_000]
        .iter()
        .map(|&x| squarefull_top_count(x, &base, &cfg()).unwrap() as f64 / x as f64)
        .collect();
    assert!(densities.windows(2).all(|w| w[1] < w[0]), "{densities:?}");
}

#[test]
fn hr_fit_transfers_one_decade() {
    let fam = SiftedFamily::all_integers();
    let fit = fit_constants(&histogram(&fam, 1_000_000), &FitKind::HardyRamanujan, 0.0).unwrap();
    assert!((fit.max_ratio - 1.0).abs() < 1e-12);
    let later = evaluate(&fit.params, &histogram(&fam, 10_000_000), 0.0).unwrap();
    assert!(later.max_ratio <= 1.2, "{}", later.max_ratio);
}
