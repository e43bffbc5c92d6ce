//! Elementary number-theoretic kernels: primes, factorization, multiplicative functions,
//! divisors, smooth-number counts and the logarithmic integral.

mod arith;
mod li;
pub mod modular;
mod primes;
mod smooth;

pub use arith::{divisors, divisors_of, eval_factored, mult_fn, mult_fn_by_name, MultFn, SpfTable};
pub(crate) use arith::binomial;
pub use li::{log_integral, LI_ABS_TOL};
pub use primes::{factorize, is_prime, isqrt, primes_in_range, sieve_primes, Factorization, FACTOR_LIMIT};
pub use smooth::{smooth_count, SmoothCountQuery};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumTheoryError {
    #[error("zero has no factorization")]
    Zero,
    #[error("{0} exceeds the 2^62 factorization limit")]
    TooLarge(u64),
    #[error("unknown arithmetic function `{0}`")]
    UnknownFunction(String),
    #[error("invalid factorization: {0}")]
    InvalidFactorization(String),
    #[error("log_integral requires x >= 2, got {0}")]
    LiDomain(f64),
}

/// Primitive root modulo an odd prime `p`.
pub fn primitive_root(p: u64) -> u64 {
    let fac = factorize(p - 1).expect("p - 1 >= 1");
    (2..p)
        .find(|&g| fac.primes().all(|q| modular::pow_mod(g, (p - 1) / q, p) != 1))
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(5), 2);
        assert_eq!(primitive_root(7), 3);
        assert_eq!(primitive_root(41), 6);
        for &p in &sieve_primes(500)[2..] {
            let g = primitive_root(p);
            let mut x = 1;
            let mut seen = std::collections::HashSet::new();
            for _ in 0..p - 1 {
                x = modular::mul_mod(x, g, p);
                seen.insert(x);
            }
            assert_eq!(seen.len() as u64, p - 1);
        }
    }
}
