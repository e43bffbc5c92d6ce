//! Family sweeps over primes: the Howe census, the main term, moment and prime-order sums,
//! Monte-Carlo box averages and the variance experiment.
//!
//! Per-prime work is pure and runs on the current rayon pool; results are always merged in
//! ascending `p`, so totals do not depend on the thread count.

mod checkpoint;
mod orbits;
mod sample;

pub use checkpoint::{
    read_checkpoint, resume_sweep, write_checkpoint, append_checkpoint, CheckpointMeta,
    SCHEMA_VERSION,
};
pub use orbits::{classify_prime, orbit_representatives, ClassInvariants, OrbitRep};
pub use sample::{
    sample_box_average, variance_experiment, BoxSpec, SampleReport, VarianceRow,
};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::constants::{c0_series, ConstantError, Kahan, DEFAULT_TRUNCATION};
use crate::ec::CurveError;
use crate::invariants::ArithmeticFunction;
use crate::numtheory::{divisors, is_prime, isqrt, log_integral, mult_fn, primes_in_range, MultFn};
use crate::Rational;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Constant(#[from] ConstantError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("checkpoint {path}, line {line}: {reason}")]
    CorruptCheckpoint { path: String, line: u64, reason: String },
    #[error("checkpoint {path} does not match this run: {reason}")]
    CheckpointMismatch { path: String, reason: String },
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Which pairs `(s, t)` a census counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CensusDomain {
    /// All nonsingular pairs in `F_p × F_p`.
    All,
    /// Nonsingular pairs with `s, t ∈ F_p^×`.
    Units,
}

/// The indices `d` the census tracks at `p`: `d | p-1` and `d <= √p + 1`.
pub fn census_indices(p: u64) -> Vec<u64> {
    let cap = isqrt(p) + 1;
    divisors(p - 1).expect("p >= 5").into_iter().filter(|&d| d <= cap).collect()
}

/// Number of pairs in `domain` whose curve has full rational `d`-torsion, from precomputed classes.
pub fn howe_count_classes(classes: &[ClassInvariants], d: u64, domain: CensusDomain) -> u64 {
    let Some(first) = classes.first() else { return 0 };
    let p = first.rep.orbit_size * first.rep.aut + 1;
    if d == 0 || (p - 1) % d != 0 || d > isqrt(p) + 1 {
        return 0;
    }
    classes
        .iter()
        .filter(|c| domain == CensusDomain::All || c.rep.is_unit_pair())
        .filter(|c| c.i % d == 0)
        .map(|c| c.rep.orbit_size)
        .sum()
}

/// `S_d(p)` (domain `All`) or `S̃_d(p)` (domain `Units`).
pub fn howe_count(p: u64, d: u64, domain: CensusDomain) -> Result<u64, FamilyError> {
    check_prime(p)?;
    if d == 0 || (p - 1) % d != 0 || d > isqrt(p) + 1 {
        return Ok(0);
    }
    Ok(howe_count_classes(&classify_prime(p)?, d, domain))
}

/// Predicted census size `p(p-1) / (d ψ(d) φ(d))`.
pub fn howe_prediction(p: u64, d: u64) -> f64 {
    let psi = mult_fn(MultFn::Psi, d).expect("d >= 1") as f64;
    let phi = mult_fn(MultFn::Phi, d).expect("d >= 1") as f64;
    (p * (p - 1)) as f64 / (d as f64 * psi * phi)
}

fn check_prime(p: u64) -> Result<(), FamilyError> {
    if p < 5 || !is_prime(p) {
        return Err(FamilyError::Invalid(format!("{p} is not a prime >= 5")));
    }
    Ok(())
}

/// Everything a main-term sweep keeps about one prime.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrimeAggregate {
    pub p: u64,
    /// `(1/(p(p-1))) Σ_{s,t ∈ F_p^×} f(i)`.
    pub main_term_contrib: f64,
    /// `d ↦ S̃_d(p)` over [`census_indices`].
    pub census: BTreeMap<u64, u64>,
    /// `max_d |S_d(p) - p(p-1)/(dψ(d)φ(d))| / p^(3/2)`.
    pub howe_max_dev: f64,
}

impl PrimeAggregate {
    pub fn from_classes(p: u64, classes: &[ClassInvariants], af: &ArithmeticFunction) -> Self {
        let weight = (p * (p - 1)) as f64;
        let mut sum = Kahan::default();
        for c in classes.iter().filter(|c| c.rep.is_unit_pair()) {
            sum.add(c.rep.orbit_size as f64 * af.f(c.i));
        }
        let mut census = BTreeMap::new();
        let mut dev = 0.0f64;
        for d in census_indices(p) {
            census.insert(d, howe_count_classes(classes, d, CensusDomain::Units));
            let all = howe_count_classes(classes, d, CensusDomain::All) as f64;
            dev = dev.max((all - howe_prediction(p, d)).abs() / (p as f64).powf(1.5));
        }
        PrimeAggregate { p, main_term_contrib: sum.value() / weight, census, howe_max_dev: dev }
    }
}

/// `Σ_{s,t ∈ F_p^×} f(i)` in exact arithmetic, straight from the classes.
pub fn unit_sum_exact(classes: &[ClassInvariants], af: &ArithmeticFunction) -> Option<Rational> {
    let mut acc = Rational::from_integer(0);
    for c in classes.iter().filter(|c| c.rep.is_unit_pair()) {
        acc += af.f_exact(c.i)? * Rational::from_integer(c.rep.orbit_size as i128);
    }
    Some(acc)
}

/// `Σ_d g(d) S̃_d(p)` in exact arithmetic, from an aggregate's census.
pub fn census_pairing_exact(agg: &PrimeAggregate, af: &ArithmeticFunction) -> Option<Rational> {
    let mut acc = Rational::from_integer(0);
    for (&d, &count) in &agg.census {
        acc += af.g_exact(d)? * Rational::from_integer(count as i128);
    }
    Some(acc)
}

/// Primes `5 <= p <= x`.
pub fn sweep_primes(x: f64) -> Vec<u64> {
    if !(x >= 5.0) {
        return Vec::new();
    }
    primes_in_range(5, x.floor() as u64)
}

/// Applies `reduce` to each prime's classes in parallel; output is in input order.
pub fn sweep<T, F>(primes: &[u64], reduce: F) -> Result<Vec<T>, FamilyError>
where
    T: Send,
    F: Fn(u64, &[ClassInvariants]) -> T + Sync,
{
    primes
        .par_iter()
        .map(|&p| {
            check_prime(p)?;
            Ok(reduce(p, &classify_prime(p)?))
        })
        .collect()
}

/// Aggregates for the given primes, in input order.
pub fn prime_aggregates(primes: &[u64], af: &ArithmeticFunction) -> Result<Vec<PrimeAggregate>, FamilyError> {
    sweep(primes, |p, classes| PrimeAggregate::from_classes(p, classes, af))
}

/// Sorts by prime and drops duplicates; the fixed order makes merged totals reproducible.
pub fn merge_aggregates(shards: impl IntoIterator<Item = Vec<PrimeAggregate>>) -> Vec<PrimeAggregate> {
    let mut all: Vec<PrimeAggregate> = shards.into_iter().flatten().collect();
    all.sort_by_key(|a| a.p);
    all.dedup_by_key(|a| a.p);
    all
}

/// Compensated sum of contributions in ascending `p`, restricted to `p <= x`.
pub fn total_main_term(aggregates: &[PrimeAggregate], x: f64) -> f64 {
    let mut sorted: Vec<&PrimeAggregate> = aggregates.iter().filter(|a| a.p as f64 <= x).collect();
    sorted.sort_by_key(|a| a.p);
    sorted.iter().map(|a| a.main_term_contrib).collect::<Kahan>().value()
}

/// `M(x)` and the per-prime aggregates behind it.
pub fn main_term_sum(x: f64, af: &ArithmeticFunction) -> Result<(f64, Vec<PrimeAggregate>), FamilyError> {
    let aggs = prime_aggregates(&sweep_primes(x), af)?;
    Ok((total_main_term(&aggs, x), aggs))
}

/// `Σ_{5≤p≤x} (1/p²) Σ_{(s,t) ∈ F_p², nonsingular} f(i)`: the limit of the box average as
/// the box grows with `x` fixed. Unlike `M(x)` it keeps the `st = 0` classes.
pub fn full_residue_average(x: f64, af: &ArithmeticFunction) -> Result<f64, FamilyError> {
    let parts = sweep(&sweep_primes(x), |p, classes| {
        let sum: Kahan = classes.iter().map(|c| c.rep.orbit_size as f64 * af.f(c.i)).collect();
        sum.value() / (p * p) as f64
    })?;
    Ok(parts.into_iter().collect::<Kahan>().value())
}

/// One row of a main-term comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub x: f64,
    pub main_term: f64,
    pub c0_li: f64,
    pub rel_err: f64,
}

fn check_grid(grid: &[f64]) -> Result<(), FamilyError> {
    if grid.iter().any(|x| !(*x >= 2.0) || !x.is_finite()) {
        return Err(FamilyError::Invalid("grid points must be finite and >= 2".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FamilyError::Invalid("grid must be strictly ascending".into()));
    }
    Ok(())
}

/// Rows `(x, M(x), c₀ li(x), |M - c₀ li| / (c₀ li))` from the aggregates of one sweep.
pub fn compare_rows(grid: &[f64], aggregates: &[PrimeAggregate], c0: f64) -> Result<Vec<CompareRow>, FamilyError> {
    check_grid(grid)?;
    let mut sorted: Vec<&PrimeAggregate> = aggregates.iter().collect();
    sorted.sort_by_key(|a| a.p);
    let mut rows = Vec::with_capacity(grid.len());
    let mut acc = Kahan::default();
    let mut next = 0;
    for &x in grid {
        while next < sorted.len() && sorted[next].p as f64 <= x {
            acc.add(sorted[next].main_term_contrib);
            next += 1;
        }
        let c0_li = c0 * log_integral(x).expect("grid checked");
        let main_term = acc.value();
        rows.push(CompareRow { x, main_term, c0_li, rel_err: (main_term - c0_li).abs() / c0_li.abs() });
    }
    Ok(rows)
}

/// [`compare_rows`] after a single sweep to the top of the grid, with `c₀(f)` at the default truncation.
pub fn compare_main_term(grid: &[f64], af: &ArithmeticFunction) -> Result<Vec<CompareRow>, FamilyError> {
    check_grid(grid)?;
    let Some(&top) = grid.last() else { return Ok(Vec::new()) };
    let c0 = c0_series(af, DEFAULT_TRUNCATION)?.value;
    let aggs = prime_aggregates(&sweep_primes(top), af)?;
    compare_rows(grid, &aggs, c0)
}

/// Largest `k` accepted by [`moment_sum`].
pub const MOMENT_MAX: u32 = 4;

/// Per-prime `(1/(p(p-1))) Σ_{s,t ∈ F_p^×} e^k`.
pub fn moment_contributions(primes: &[u64], k: u32) -> Result<Vec<f64>, FamilyError> {
    if k > MOMENT_MAX {
        return Err(FamilyError::Invalid(format!("moment order {k} exceeds {MOMENT_MAX}")));
    }
    sweep(primes, |p, classes| {
        let mut acc = Kahan::default();
        for c in classes.iter().filter(|c| c.rep.is_unit_pair()) {
            acc.add(c.rep.orbit_size as f64 * (c.e() as f64).powi(k as i32));
        }
        acc.value() / (p * (p - 1)) as f64
    })
}

/// `Σ_{5≤p≤x} (1/(p(p-1))) Σ_{s,t ∈ F_p^×} e^k`.
pub fn moment_sum(x: f64, k: u32) -> Result<f64, FamilyError> {
    Ok(moment_contributions(&sweep_primes(x), k)?.into_iter().collect::<Kahan>().value())
}

/// Per-prime `(1/(p(p-1))) #{s,t ∈ F_p^× : N prime}`.
pub fn prime_order_contributions(primes: &[u64]) -> Result<Vec<f64>, FamilyError> {
    sweep(primes, |p, classes| {
        let hits: u64 = classes
            .iter()
            .filter(|c| c.rep.is_unit_pair() && is_prime(c.n))
            .map(|c| c.rep.orbit_size)
            .sum();
        hits as f64 / (p * (p - 1)) as f64
    })
}

/// `Σ_{5≤p≤x} (1/(p(p-1))) #{s,t ∈ F_p^× : N prime}`.
pub fn prime_order_census(x: f64) -> Result<f64, FamilyError> {
    Ok(prime_order_contributions(&sweep_primes(x))?.into_iter().collect::<Kahan>().value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::builtin_with_bound;

    #[test]
    fn howe_examples() {
        assert_eq!(howe_count(5, 1, CensusDomain::All).unwrap(), 20);
        assert_eq!(howe_count(7, 2, CensusDomain::All).unwrap(), 5);
        assert_eq!(howe_count(5, 2, CensusDomain::Units).unwrap(), 0);
        assert_eq!(howe_count(7, 4, CensusDomain::All).unwrap(), 0);
        assert!(howe_count(9, 1, CensusDomain::All).is_err());
    }

    #[test]
    fn main_term_examples() {
        let cyc = builtin_with_bound("cyclicity", 100).unwrap();
        let (m, aggs) = main_term_sum(5.0, &cyc).unwrap();
        assert!((m - 0.6).abs() < 1e-15);
        assert_eq!(aggs.len(), 1);
        assert_eq!(main_term_sum(4.0, &cyc).unwrap().0, 0.0);
        let tau = builtin_with_bound("tau", 100).unwrap();
        let classes = classify_prime(5).unwrap();
        let agg = PrimeAggregate::from_classes(5, &classes, &tau);
        assert_eq!(agg.census, BTreeMap::from([(1, 12), (2, 0)]));
        assert_eq!(unit_sum_exact(&classes, &tau), Some(Rational::from_integer(12)));
        assert_eq!(census_pairing_exact(&agg, &tau), Some(Rational::from_integer(12)));
    }

    #[test]
    fn small_sums() {
        assert_eq!(moment_sum(4.0, 1).unwrap(), 0.0);
        assert_eq!(prime_order_census(4.0).unwrap(), 0.0);
        assert!(moment_sum(10.0, 5).is_err());
        let one = builtin_with_bound("tau_k_pow:1,1", 100).unwrap();
        let m0 = moment_sum(100.0, 0).unwrap();
        assert_eq!(m0, main_term_sum(100.0, &one).unwrap().0);
        let a = prime_order_census(50.0).unwrap();
        let b = prime_order_census(100.0).unwrap();
        assert!(b >= a && a > 0.0);
    }

    #[test]
    fn compare_rows_shape() {
        let cyc = builtin_with_bound("cyclicity", 100).unwrap();
        assert!(compare_main_term(&[], &cyc).unwrap().is_empty());
        let rows = compare_main_term(&[5.0, 50.0], &cyc).unwrap();
        assert!((rows[0].main_term - 0.6).abs() < 1e-15);
        assert!(compare_main_term(&[50.0, 5.0], &cyc).is_err());
    }
}
