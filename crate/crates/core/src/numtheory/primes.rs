//! Prime sieving, primality and integer factorization.

use num_integer::Integer;

use super::modular::{add_mod, mul_mod, pow_mod};
use super::NumTheoryError;

/// Largest integer accepted by [`factorize`].
pub const FACTOR_LIMIT: u64 = 1 << 62;

const TRIAL_LIMIT: u64 = 1 << 16;

/// Witnesses making the strong probable-prime test exact for all 64-bit inputs.
const SPRP_BASES: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];

/// All primes in `[2, limit]`, ascending.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// Primes in `[lo, hi]`, ascending, by a segmented sieve.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || lo > hi {
        return Vec::new();
    }
    let lo = lo.max(2);
    let base = sieve_primes(isqrt(hi));
    let len = (hi - lo + 1) as usize;
    let mut composite = vec![false; len];
    for &q in &base {
        let start = (q * q).max(lo.div_ceil(q) * q);
        let mut m = start;
        while m <= hi {
            composite[(m - lo) as usize] = true;
            m += q;
        }
    }
    composite
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(k, _)| lo + k as u64)
        .collect()
}

/// Integer square root, `floor(sqrt(n))`.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

fn is_sprp(n: u64, base: u64) -> bool {
    let a = base % n;
    if a == 0 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let mut x = pow_mod(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Deterministic primality test for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    SPRP_BASES.iter().all(|&b| is_sprp(n, b))
}

/// Prime factorization: `(prime, exponent)` pairs in strictly increasing prime order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Factorization {
    pairs: Vec<(u64, u32)>,
}

impl Factorization {
    /// Builds a factorization from pairs, validating ordering and primality.
    pub fn from_pairs(mut pairs: Vec<(u64, u32)>) -> Result<Self, NumTheoryError> {
        pairs.sort_unstable();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(NumTheoryError::InvalidFactorization(format!(
                    "repeated prime {}",
                    w[0].0
                )));
            }
        }
        for &(q, k) in &pairs {
            if k == 0 || !is_prime(q) {
                return Err(NumTheoryError::InvalidFactorization(format!("bad pair ({q}, {k})")));
            }
        }
        Ok(Factorization { pairs })
    }

    pub(crate) fn from_sorted_unchecked(pairs: Vec<(u64, u32)>) -> Self {
        Factorization { pairs }
    }

    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.pairs
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.pairs.iter().map(|&(q, _)| q)
    }

    /// Reconstructs the factored integer. Panics on overflow, which valid inputs never reach.
    pub fn value(&self) -> u64 {
        self.pairs
            .iter()
            .fold(1u64, |acc, &(q, k)| acc * q.pow(k))
    }

    pub fn is_one(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Factors `n` with `1 <= n < 2^62`.
pub fn factorize(n: u64) -> Result<Factorization, NumTheoryError> {
    if n == 0 {
        return Err(NumTheoryError::Zero);
    }
    if n >= FACTOR_LIMIT {
        return Err(NumTheoryError::TooLarge(n));
    }
    let mut pairs = Vec::new();
    let mut m = n;
    let mut push = |q: u64, m: &mut u64| {
        let mut k = 0;
        while *m % q == 0 {
            *m /= q;
            k += 1;
        }
        if k > 0 {
            pairs.push((q, k));
        }
    };
    push(2, &mut m);
    let mut q = 3u64;
    while q < TRIAL_LIMIT && q * q <= m {
        push(q, &mut m);
        q += 2;
    }
    if m > 1 {
        let mut rest = Vec::new();
        split_large(m, &mut rest);
        rest.sort_unstable();
        for r in rest {
            match pairs.last_mut() {
                Some((q, k)) if *q == r => *k += 1,
                _ => pairs.push((r, 1)),
            }
        }
    }
    Ok(Factorization { pairs })
}

/// Splits a cofactor with no prime factors below the trial limit into primes.
fn split_large(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let mut c = 1;
    let d = loop {
        if let Some(d) = pollard_brent(n, c) {
            break d;
        }
        c += 1;
    };
    split_large(d, out);
    split_large(n / d, out);
}

/// Brent's variant of Pollard rho; returns a nontrivial factor or `None` on cycle failure.
fn pollard_brent(n: u64, c: u64) -> Option<u64> {
    let f = |x: u64| add_mod(mul_mod(x, x, n), c, n);
    let mut y = 2u64;
    let mut r = 1u64;
    let mut q = 1u64;
    let m = 128u64;
    let mut g = 1u64;
    let mut x = y;
    let mut ys = y;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += m;
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}
