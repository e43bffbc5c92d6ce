//! Counting integers free of large prime factors.

use super::primes::sieve_primes;

/// A query for Ψ(X, Y): integers in `[2, X]` whose largest prime factor is at most `Y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothCountQuery {
    pub x: u64,
    pub y: f64,
}

impl SmoothCountQuery {
    pub fn new(x: u64, y: f64) -> Self {
        SmoothCountQuery { x, y }
    }
}

/// Ψ(X, Y) with 1 excluded (its largest prime factor is taken to be infinite).
pub fn smooth_count(q: SmoothCountQuery) -> u64 {
    if q.x < 2 || !(q.y >= 2.0) {
        return 0;
    }
    let ymax = if q.y >= q.x as f64 { q.x } else { q.y.floor() as u64 };
    let primes = sieve_primes(ymax);
    count_with_one(q.x, &primes, primes.len()) - 1
}

/// Integers in `[1, x]` whose prime factors all lie in `primes[..k]`.
fn count_with_one(x: u64, primes: &[u64], k: usize) -> u64 {
    if x == 0 {
        return 0;
    }
    if k == 0 {
        return 1;
    }
    if primes[k - 1] >= x {
        return x;
    }
    let mut total = 1;
    for (j, &p) in primes[..k].iter().enumerate() {
        if p > x {
            break;
        }
        // n = p * m with every prime factor of m at most p
        total += count_with_one(x / p, primes, j + 1);
    }
    total
}
