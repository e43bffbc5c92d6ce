mod common;

use common::{oracle_structure, Roots};
use ectorsion::ec::discriminant_residue;
use ectorsion::family::{
    census_pairing_exact, classify_prime, main_term_sum, merge_aggregates, moment_sum, prime_aggregates,
    prime_order_census, sweep_primes, total_main_term, unit_sum_exact, PrimeAggregate,
};
use ectorsion::invariants::builtin_with_bound;
use ectorsion::numtheory::{is_prime, sieve_primes};
use ectorsion::Rational;

const RATIONAL_BUILTINS: [&str; 8] = [
    "cyclicity", "tau", "power_neg:1", "power_neg:2", "omega_pow:1", "bigomega_pow:2",
    "two_pow_k_omega:1", "tau_k_pow:3,1",
];

#[test]
fn classwise_sums_equal_direct_sweep() {
    let fns: Vec<_> = RATIONAL_BUILTINS.iter().map(|s| builtin_with_bound(s, 1000).unwrap()).collect();
    for &p in &sieve_primes(97)[2..] {
        let roots = Roots::new(p);
        let classes = classify_prime(p).unwrap();
        let mut direct = vec![Rational::from_integer(0); fns.len()];
        for s in 1..p {
            for t in 1..p {
                if discriminant_residue(s, t, p) == 0 {
                    continue;
                }
                let (_, i, _) = oracle_structure(&roots, s, t);
                for (acc, af) in direct.iter_mut().zip(&fns) {
                    *acc += af.f_exact(i).unwrap();
                }
            }
        }
        for (af, want) in fns.iter().zip(direct) {
            assert_eq!(unit_sum_exact(&classes, af), Some(want), "p={p} {}", af.name());
        }
    }
}

#[test]
fn census_pairing_for_every_rational_builtin() {
    for spec in RATIONAL_BUILTINS {
        let af = builtin_with_bound(spec, 1000).unwrap();
        for &p in &sieve_primes(199)[2..] {
            let classes = classify_prime(p).unwrap();
            let agg = PrimeAggregate::from_classes(p, &classes, &af);
            assert_eq!(unit_sum_exact(&classes, &af), census_pairing_exact(&agg, &af), "{spec} p={p}");
        }
    }
}

#[test]
fn sharded_sweeps_merge_bitwise() {
    let af = builtin_with_bound("tau", 1000).unwrap();
    let primes = sweep_primes(700.0);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let whole = single.install(|| prime_aggregates(&primes, &af)).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    for cuts in [vec![10usize], vec![3, 50, 90], vec![1, 2, 3, 4, 5]] {
        let mut shards = Vec::new();
        let mut lo = 0;
        for &c in cuts.iter().chain(std::iter::once(&primes.len())) {
            shards.push(pool.install(|| prime_aggregates(&primes[lo..c], &af)).unwrap());
            lo = c;
        }
        shards.reverse();
        let merged = merge_aggregates(shards);
        assert_eq!(merged, whole);
        assert_eq!(total_main_term(&merged, 700.0).to_bits(), total_main_term(&whole, 700.0).to_bits());
    }
}

#[test]
fn aggregates_respect_census_keys() {
    let af = builtin_with_bound("cyclicity", 100).unwrap();
    for a in prime_aggregates(&sweep_primes(300.0), &af).unwrap() {
        for &d in a.census.keys() {
            assert_eq!((a.p - 1) % d, 0);
            assert!((d * d) as f64 <= (a.p as f64).sqrt() * 2.0 + a.p as f64 + 1.0 + 1e-9);
        }
        assert_eq!(a.census[&1], (a.p - 1) * (a.p - 2));
    }
}

#[test]
fn sums_at_five_match_oracle() {
    let roots = Roots::new(5);
    let mut orders = Vec::new();
    for s in 1..5 {
        for t in 1..5 {
            if discriminant_residue(s, t, 5) != 0 {
                orders.push(oracle_structure(&roots, s, t));
            }
        }
    }
    assert_eq!(orders.len(), 12);
    assert!(orders.iter().all(|&(_, i, _)| i == 1));
    let e_sum: u64 = orders.iter().map(|&(_, _, e)| e).sum();
    assert!((moment_sum(5.0, 1).unwrap() - e_sum as f64 / 20.0).abs() < 1e-15);
    let primes = orders.iter().filter(|&&(n, _, _)| is_prime(n)).count();
    assert!((prime_order_census(5.0).unwrap() - primes as f64 / 20.0).abs() < 1e-15);
    let cyc = builtin_with_bound("cyclicity", 100).unwrap();
    assert!((main_term_sum(5.0, &cyc).unwrap().0 - 0.6).abs() < 1e-15);
}

#[test]
fn prime_order_census_is_nondecreasing() {
    let mut prev = 0.0;
    for x in [5.0, 20.0, 60.0, 150.0, 400.0] {
        let c = prime_order_census(x).unwrap();
        assert!(c >= prev);
        prev = c;
    }
}
