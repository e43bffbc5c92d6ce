//! Classical multiplicative functions and divisor enumeration.

use std::fmt;
use std::str::FromStr;

use super::primes::{factorize, Factorization};
use super::NumTheoryError;

/// Named arithmetic functions evaluable by [`mult_fn`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultFn {
    Phi,
    Psi,
    Mu,
    Tau,
    Omega,
    BigOmega,
    TauK(u32),
}

impl FromStr for MultFn {
    type Err = NumTheoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Ok(match lower.as_str() {
            "phi" => MultFn::Phi,
            "psi" => MultFn::Psi,
            "mu" => MultFn::Mu,
            "tau" => MultFn::Tau,
            "omega" => MultFn::Omega,
            "big_omega" => MultFn::BigOmega,
            other => {
                let k = other
                    .strip_prefix("tau_k(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| other.strip_prefix("tau_k:"))
                    .and_then(|k| k.parse::<u32>().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| NumTheoryError::UnknownFunction(s.to_string()))?;
                MultFn::TauK(k)
            }
        })
    }
}

impl fmt::Display for MultFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultFn::Phi => f.write_str("phi"),
            MultFn::Psi => f.write_str("psi"),
            MultFn::Mu => f.write_str("mu"),
            MultFn::Tau => f.write_str("tau"),
            MultFn::Omega => f.write_str("omega"),
            MultFn::BigOmega => f.write_str("big_omega"),
            MultFn::TauK(k) => write!(f, "tau_k({k})"),
        }
    }
}

/// Evaluates `func` at `n >= 1`.
pub fn mult_fn(func: MultFn, n: u64) -> Result<i64, NumTheoryError> {
    let fac = factorize(n)?;
    Ok(eval_factored(func, &fac))
}

/// Evaluates a named function by string name, e.g. `"psi"` or `"tau_k(3)"`.
pub fn mult_fn_by_name(name: &str, n: u64) -> Result<i64, NumTheoryError> {
    mult_fn(name.parse()?, n)
}

pub fn eval_factored(func: MultFn, fac: &Factorization) -> i64 {
    let pairs = fac.pairs();
    match func {
        MultFn::Phi => pairs
            .iter()
            .map(|&(q, k)| ((q - 1) * q.pow(k - 1)) as i64)
            .product(),
        // Dedekind psi: n * prod_{q | n} (1 + 1/q)
        MultFn::Psi => pairs
            .iter()
            .map(|&(q, k)| ((q + 1) * q.pow(k - 1)) as i64)
            .product(),
        MultFn::Mu => {
            if pairs.iter().any(|&(_, k)| k > 1) {
                0
            } else if pairs.len() % 2 == 0 {
                1
            } else {
                -1
            }
        }
        MultFn::Tau => pairs.iter().map(|&(_, k)| k as i64 + 1).product(),
        MultFn::Omega => pairs.len() as i64,
        MultFn::BigOmega => pairs.iter().map(|&(_, k)| k as i64).sum(),
        MultFn::TauK(j) => pairs
            .iter()
            .map(|&(_, k)| binomial(k as u64 + j as u64 - 1, j as u64 - 1) as i64)
            .product(),
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Divisors of `n >= 1`, ascending.
pub fn divisors(n: u64) -> Result<Vec<u64>, NumTheoryError> {
    Ok(divisors_of(&factorize(n)?))
}

pub fn divisors_of(fac: &Factorization) -> Vec<u64> {
    let mut out = vec![1u64];
    for &(q, k) in fac.pairs() {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..k {
            pk *= q;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Smallest-prime-factor table on `[0, limit]` for bulk factorization of small integers.
#[derive(Clone, Debug)]
pub struct SpfTable {
    spf: Vec<u32>,
}

impl SpfTable {
    pub fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        SpfTable { spf }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    /// Factorization of `1 <= n <= limit`.
    pub fn factor(&self, mut n: usize) -> Factorization {
        assert!(n >= 1 && n <= self.limit());
        let mut pairs: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let q = self.spf[n] as usize;
            let mut k = 0;
            while n % q == 0 {
                n /= q;
                k += 1;
            }
            pairs.push((q as u64, k));
        }
        Factorization::from_sorted_unchecked(pairs)
    }

    /// Möbius function on `[0, limit]` (index 0 unused, set to 0).
    pub fn mobius(&self) -> Vec<i8> {
        let n = self.limit();
        let mut mu = vec![0i8; n + 1];
        if n >= 1 {
            mu[1] = 1;
        }
        for i in 2..=n {
            let q = self.spf[i] as usize;
            let m = i / q;
            mu[i] = if m % q == 0 { 0 } else { -mu[m] };
        }
        mu
    }
}
