//! Limiting constants with rigorous truncation bounds: `c₀(f)` as a series or an Euler
//! product, the moment constants `C_k` and the Koblitz product.

use serde::Serialize;
use thiserror::Error;

use crate::invariants::{ArithmeticFunction, Builtin, Growth, DIVISOR_SUM_CONST};
use crate::numtheory::{sieve_primes, Factorization, SpfTable};

/// Default series truncation `D` and product cutoff `P`.
pub const DEFAULT_TRUNCATION: u64 = 100_000;

/// Exponent slack in `d ψ(d) φ(d)² >= κ² d^(4-ε)`.
pub const EPSILON: f64 = 0.125;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstantError {
    #[error("growth exponent beta = {0} is not below 2; the series need not converge")]
    Divergent(f64),
    #[error("`{0}` is not multiplicative; use the series")]
    NotMultiplicative(String),
    #[error("truncation must be at least {min}, got {got}")]
    Truncation { min: u64, got: u64 },
    #[error("moment order must be between 1 and 6, got {0}")]
    MomentOrder(u32),
    #[error("tail bound is not below 1 (T = {0}); raise the cutoff")]
    TailTooLarge(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Series,
    EulerProduct,
}

/// A constant with a bound on the error made by truncating its series or product.
///
/// `tail_bound` covers truncation only; floating-point rounding (relative size near
/// `1e-15` under compensated summation) is not included.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantValue {
    pub value: f64,
    pub tail_bound: f64,
    pub truncation: u64,
    pub method: Method,
}

impl ConstantValue {
    pub fn contains(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.tail_bound
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for Kahan {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = Kahan::default();
        iter.into_iter().for_each(|x| k.add(x));
        k
    }
}

/// `κ = Π_p min(1, p^(ε/2) (1 - 1/p))`, so that `φ(d) >= κ d^(1-ε/2)`.
fn kappa() -> f64 {
    let delta = EPSILON / 2.0;
    let mut k = 1.0;
    for p in sieve_primes(1000) {
        let factor = (p as f64).powf(delta) * (1.0 - 1.0 / p as f64);
        // the factor increases with p, so the first one above 1 ends the product
        if factor >= 1.0 {
            break;
        }
        k *= factor;
    }
    k
}

/// `d ψ(d) φ(d)²` in floating point.
fn weight(fac: &Factorization) -> f64 {
    fac.pairs()
        .iter()
        .map(|&(q, e)| {
            let q = q as f64;
            // p^j · p^(j-1)(p+1) · p^(2j-2)(p-1)²
            q.powi(4 * e as i32 - 3) * (q + 1.0) * (q - 1.0) * (q - 1.0)
        })
        .product()
}

/// Rigorous bound on `Σ_{d>D} |g(d)| / (d ψ(d) φ(d)²)` from the growth triple, valid once
/// `(σ - 1) ln D > γ` where `σ = 4 - ε - β`. Returns `None` below that point.
fn series_tail(growth: Growth, d: u64) -> Option<f64> {
    let s = 4.0 - EPSILON;
    let sigma = s - growth.beta;
    let ln_d = (d as f64).ln();
    let margin = (sigma - 1.0) - growth.gamma / ln_d;
    if d < 2 || margin <= 0.0 {
        return None;
    }
    let k = kappa();
    Some(s * growth.constant / (k * k) * (d as f64).powf(1.0 - sigma) * ln_d.powf(growth.gamma) / margin)
}

/// Smallest `D0 >= d` where [`series_tail`] applies, with the margin at least half its limit.
fn admissible_start(growth: Growth, d: u64) -> u64 {
    let sigma = 3.0 - EPSILON - growth.beta;
    let need = (2.0 * growth.gamma / sigma).exp().ceil() as u64;
    d.max(need).max(2)
}

/// Truncation bound for a series with `|term(d)| <= |g(d)|/(dψφ²)`: explicit terms up to
/// the admissible start, then the closed form.
fn tail_from(growth: Growth, d: u64, start: u64, abs_term: impl Fn(u64) -> f64) -> f64 {
    let d0 = admissible_start(growth, d.max(start));
    let explicit: Kahan = (d + 1..=d0).map(&abs_term).collect();
    explicit.value() + series_tail(growth, d0).expect("admissible by construction")
}

fn check_growth(af: &ArithmeticFunction) -> Result<(), ConstantError> {
    let beta = af.growth().beta;
    if beta >= 2.0 || !beta.is_finite() {
        return Err(ConstantError::Divergent(beta));
    }
    Ok(())
}

/// `Σ_{d≤D} g(d) / (d ψ(d) φ(d)²)`.
pub fn c0_series(af: &ArithmeticFunction, d: u64) -> Result<ConstantValue, ConstantError> {
    check_growth(af)?;
    if d < 1 {
        return Err(ConstantError::Truncation { min: 1, got: d });
    }
    let support = af.g_support();
    let top = support.map_or(d, |s| s.min(d));
    let spf = SpfTable::new(top.max(admissible_start(af.growth(), d)) as usize);
    let term = |n: u64| af.g(n) / weight(&spf.factor(n as usize));
    let value: Kahan = (1..=top).map(term).collect();
    let tail_bound = match support {
        Some(s) if s <= d => 0.0,
        _ => tail_from(af.growth(), d, d, |n| term(n).abs()),
    };
    Ok(ConstantValue { value: value.value(), tail_bound, truncation: d, method: Method::Series })
}

/// `Π_{p≤P} (1 + Σ_{j≥1} g(p^j) / (p^j ψ(p^j) φ(p^j)²))` for multiplicative `g`.
pub fn c0_euler(af: &ArithmeticFunction, p_max: u64) -> Result<ConstantValue, ConstantError> {
    check_growth(af)?;
    if !af.is_multiplicative() {
        return Err(ConstantError::NotMultiplicative(af.name().to_string()));
    }
    if p_max < 2 {
        return Err(ConstantError::Truncation { min: 2, got: p_max });
    }
    let mut log_value = Kahan::default();
    let mut sign = 1.0;
    for q in sieve_primes(p_max) {
        let mut inner = Kahan::default();
        inner.add(1.0);
        let qf = q as f64;
        let mut j = 1u32;
        // q^j < 2^62 keeps prime-power evaluation in range
        while (j as f64) * qf.log2() < 62.0 {
            let w = qf.powi(4 * j as i32 - 3) * (qf + 1.0) * (qf - 1.0) * (qf - 1.0);
            let term = af.g_prime_power(q, j) / w;
            inner.add(term);
            if w.is_infinite() || (j >= 2 && term.abs() < 1e-20 * inner.value().abs()) {
                break;
            }
            j += 1;
        }
        let factor = inner.value();
        if factor == 0.0 {
            return Ok(ConstantValue { value: 0.0, tail_bound: 0.0, truncation: p_max, method: Method::EulerProduct });
        }
        if factor < 0.0 {
            sign = -sign;
        }
        log_value.add(factor.abs().ln());
    }
    let value = sign * log_value.value().exp();
    let tail_bound = match af.g_support() {
        Some(s) if s <= p_max => 0.0,
        _ => {
            // every omitted prime power exceeds P, so Σ|a_p| <= T
            // small cutoffs start the closed form later; explicit terms only over-count
            let t = tail_from(af.growth(), p_max, 10_000, |n| {
                af.g(n).abs() / weight(&crate::numtheory::factorize(n).expect("n >= 1"))
            });
            if t >= 1.0 {
                return Err(ConstantError::TailTooLarge(t));
            }
            value.abs() * (t / (1.0 - t)).exp_m1()
        }
    };
    Ok(ConstantValue { value, tail_bound, truncation: p_max, method: Method::EulerProduct })
}

/// The cyclicity constant `c₀` with `g = μ`.
pub fn cyclicity_constant(d: u64) -> Result<ConstantValue, ConstantError> {
    c0_series(&ArithmeticFunction::from_builtin(Builtin::Cyclicity, d as usize), d)
}

/// `C_k = Σ_d (Σ_{δ|d} μ(δ) δ^k) / (d^(k+1) ψ(d) φ(d)²)`.
pub fn moment_constant(k: u32, d: u64) -> Result<ConstantValue, ConstantError> {
    if !(1..=6).contains(&k) {
        return Err(ConstantError::MomentOrder(k));
    }
    if d < 1 {
        return Err(ConstantError::Truncation { min: 1, got: d });
    }
    // |Σ_{δ|d} μ(δ)δ^k| <= τ(d) d^k, so terms are at most τ(d)/(dψφ²)
    let growth = Growth::new(0.0, 1.0, DIVISOR_SUM_CONST);
    let spf = SpfTable::new(admissible_start(growth, d) as usize);
    let term = |n: u64| {
        let fac = spf.factor(n as usize);
        let ratio: f64 = fac
            .pairs()
            .iter()
            .map(|&(q, e)| {
                let q = q as f64;
                (1.0 - q.powi(k as i32)) / q.powi((e * k) as i32)
            })
            .product();
        ratio / weight(&fac)
    };
    let value: Kahan = (1..=d).map(term).collect();
    let tail_bound = tail_from(growth, d, d, |n| term(n).abs());
    Ok(ConstantValue { value: value.value(), tail_bound, truncation: d, method: Method::Series })
}

/// Factor `1 - (ℓ²-ℓ-1)/((ℓ-1)³(ℓ+1))` of the Koblitz product.
pub fn koblitz_factor(l: u64) -> f64 {
    let l = l as f64;
    1.0 - (l * l - l - 1.0) / ((l - 1.0).powi(3) * (l + 1.0))
}

/// `Π_{ℓ≤P} (1 - (ℓ²-ℓ-1)/((ℓ-1)³(ℓ+1)))`.
///
/// Each omitted factor is `1 - x_ℓ` with `x_ℓ < 1/(ℓ-1)²`, so `x/(1-x) < 1/(ℓ(ℓ-2))`. The
/// sum of that over primes beyond `P` is bounded by partial summation against
/// `π(t) < t/ln t · (1 + 3/(2 ln t))`.
pub fn koblitz_constant(p_max: u64) -> Result<ConstantValue, ConstantError> {
    if p_max < 2 {
        return Err(ConstantError::Truncation { min: 2, got: p_max });
    }
    let primes = sieve_primes(p_max);
    let log: Kahan = primes.iter().map(|&l| koblitz_factor(l).ln()).collect();
    let value = log.value().exp();
    // the bound needs h(t) = 1/(t(t-2)) finite on [P, ∞)
    let p = (p_max as f64).max(3.0);
    let count = primes.len() as f64;
    let ln_p = p.ln();
    let k = (1.0 + 1.5 / ln_p) / ln_p;
    let h = 1.0 / (p * (p - 2.0));
    let s = k * (p * h + 0.5 * (p / (p - 2.0)).ln()) - count.min(p) * h;
    let s = if p_max < 3 {
        // ℓ = 3 is omitted but 1/(ℓ(ℓ-2)) blows up the smooth bound; add it explicitly
        let x = 1.0 - koblitz_factor(3);
        x / (1.0 - x) + s
    } else {
        s
    };
    let tail_bound = value * -(-s.max(0.0)).exp_m1();
    Ok(ConstantValue { value, tail_bound, truncation: p_max, method: Method::EulerProduct })
}
