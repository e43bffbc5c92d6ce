//! Arithmetic-function pairs `f(n) = Σ_{d|n} g(d)`: Möbius inversion, the built-in
//! families, and validation of the declared growth bound on `Σ_{d≤x} |g(d)|`.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::numtheory::{binomial, divisors_of, factorize, Factorization, SpfTable};
use crate::Rational;

/// Table length used by [`builtin`].
pub const DEFAULT_BOUND: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionError {
    #[error("unknown function `{0}`")]
    Unknown(String),
    #[error("parameter out of range for `{name}`: {reason}")]
    OutOfRange { name: String, reason: String },
    #[error(
        "declared growth bound for `{name}` violated at x = {witness}: \
         need constant {needed:.6} > declared {declared:.6}"
    )]
    GrowthViolated { name: String, witness: u64, needed: f64, declared: f64 },
    #[error("growth validation needs X >= 2, got {0}")]
    SmallScan(u64),
}

/// `Σ_{d≤x} |g(d)| ≤ constant · x^(1+beta) · (ln x)^gamma` for all `x >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Growth {
    pub beta: f64,
    pub gamma: f64,
    pub constant: f64,
}

impl Growth {
    pub fn new(beta: f64, gamma: f64, constant: f64) -> Self {
        Growth { beta, gamma, constant }
    }

    /// The envelope `x^(1+beta) (ln x)^gamma`, without the constant.
    pub fn envelope(&self, x: f64) -> f64 {
        x.powf(1.0 + self.beta) * x.ln().powf(self.gamma)
    }
}

/// Values of `f` or `g` on `[0, bound]`; index 0 is unused and holds zero.
#[derive(Clone, Debug, PartialEq)]
pub enum Table {
    Exact(Vec<Rational>),
    Real(Vec<f64>),
}

impl Table {
    fn get(&self, n: usize) -> f64 {
        match self {
            Table::Exact(v) => to_f64(&v[n]),
            Table::Real(v) => v[n],
        }
    }

    fn get_exact(&self, n: usize) -> Option<Rational> {
        match self {
            Table::Exact(v) => Some(v[n]),
            Table::Real(_) => None,
        }
    }
}

pub(crate) fn to_f64(q: &Rational) -> f64 {
    // split off the integer part so large denominators keep their precision
    let whole = q.trunc();
    let frac = q - whole;
    whole.numer().to_f64().unwrap_or(f64::NAN)
        + frac.numer().to_f64().unwrap_or(f64::NAN) / frac.denom().to_f64().unwrap_or(f64::NAN)
}

/// The built-in function families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Builtin {
    /// Indicator of `{1}`; `g = μ`.
    Cyclicity,
    /// Number of divisors; `g ≡ 1`.
    Tau,
    /// `n^(-k)`.
    PowerNeg(u32),
    /// `n^β` with `0 <= β < 1`.
    Power(f64),
    /// `σ_β(n) = Σ_{m|n} m^β` with `0 <= β < 1`.
    Sigma(f64),
    /// `(ln n)^α` with `α > 0`.
    LogPow(f64),
    /// `ω(n)^k`.
    OmegaPow(u32),
    /// `Ω(n)^k`.
    BigOmegaPow(u32),
    /// `2^(k ω(n))`.
    TwoPowKOmega(u32),
    /// `τ_k(n)^r`.
    TauKPow(u32, u32),
}

const POWER_NEG_MAX: u32 = 6;

fn out_of_range(name: &str, reason: impl Into<String>) -> FunctionError {
    FunctionError::OutOfRange { name: name.to_string(), reason: reason.into() }
}

impl Builtin {
    fn validate(self) -> Result<Self, FunctionError> {
        let name = self.to_string();
        match self {
            Builtin::PowerNeg(k) if k == 0 || k > POWER_NEG_MAX => {
                Err(out_of_range(&name, format!("k must lie in 1..={POWER_NEG_MAX}")))
            }
            Builtin::Power(b) | Builtin::Sigma(b) if !(0.0..1.0).contains(&b) => {
                Err(out_of_range(&name, "beta must satisfy 0 <= beta < 1"))
            }
            Builtin::LogPow(a) if !(a > 0.0 && a.is_finite()) => {
                Err(out_of_range(&name, "alpha must be positive"))
            }
            Builtin::TwoPowKOmega(k) if k > 4 => Err(out_of_range(&name, "k must be at most 4")),
            Builtin::OmegaPow(k) | Builtin::BigOmegaPow(k) if k > 8 => {
                Err(out_of_range(&name, "k must be at most 8"))
            }
            Builtin::TauKPow(k, r) if k == 0 || divisor_power(k, r) > 5 => {
                Err(out_of_range(&name, "need k >= 1 and 1 + r(k-1) <= 5"))
            }
            other => Ok(other),
        }
    }

    /// Whether `f` (hence `g`) takes rational values, stored exactly.
    pub fn is_exact(&self) -> bool {
        !matches!(self, Builtin::Power(_) | Builtin::Sigma(_) | Builtin::LogPow(_))
    }

    pub fn is_multiplicative(&self) -> bool {
        match self {
            Builtin::LogPow(_) => false,
            Builtin::OmegaPow(k) | Builtin::BigOmegaPow(k) => *k == 0,
            _ => true,
        }
    }

    /// Declared growth triple for `Σ|g|`.
    ///
    /// Uses `Σ_{n≤x} τ(n) ≤ x(ln x + 1) ≤ DIVISOR_SUM_CONST · x ln x` for `x >= 2`, and
    /// the bound `Σ_{n≤x} τ(n)^m ≤ x (ln x + 1)^(2^m - 1)` for the divisor-power families.
    pub fn growth(&self) -> Growth {
        match *self {
            Builtin::Cyclicity | Builtin::Tau => Growth::new(0.0, 0.0, 1.0),
            Builtin::PowerNeg(_) => Growth::new(0.0, 1.0, DIVISOR_SUM_CONST),
            Builtin::Power(b) | Builtin::Sigma(b) => Growth::new(b, 0.0, 1.0),
            Builtin::LogPow(a) => Growth::new(0.0, a + 1.0, DIVISOR_SUM_CONST),
            Builtin::OmegaPow(k) | Builtin::BigOmegaPow(k) => Growth::new(
                0.0,
                k as f64 + 1.0,
                DIVISOR_SUM_CONST * std::f64::consts::LOG2_E.powi(k as i32),
            ),
            Builtin::TwoPowKOmega(0) => Growth::new(0.0, 0.0, 1.0),
            Builtin::TwoPowKOmega(k) => divisor_power_growth(k),
            Builtin::TauKPow(k, r) => divisor_power_growth(divisor_power(k, r)),
        }
    }

    fn f_exact(&self, fac: &Factorization) -> Option<Rational> {
        let pairs = fac.pairs();
        let int = |v: u64| Some(Rational::from_integer(v as i128));
        match *self {
            Builtin::Cyclicity => int(fac.is_one() as u64),
            Builtin::Tau => int(pairs.iter().map(|&(_, k)| k as u64 + 1).product()),
            Builtin::PowerNeg(k) => {
                let n = fac.value() as i128;
                Some(Rational::new(1, n.checked_pow(k)?))
            }
            Builtin::OmegaPow(k) => int((pairs.len() as u64).pow(k)),
            Builtin::BigOmegaPow(k) => {
                int(pairs.iter().map(|&(_, e)| e as u64).sum::<u64>().pow(k))
            }
            Builtin::TwoPowKOmega(k) => int(1u64 << (k as usize * pairs.len())),
            Builtin::TauKPow(j, r) => int(
                pairs
                    .iter()
                    .map(|&(_, e)| binomial(e as u64 + j as u64 - 1, j as u64 - 1))
                    .product::<u64>()
                    .pow(r),
            ),
            Builtin::Power(_) | Builtin::Sigma(_) | Builtin::LogPow(_) => None,
        }
    }

    fn f_real(&self, fac: &Factorization) -> f64 {
        match *self {
            Builtin::Power(b) => (fac.value() as f64).powf(b),
            Builtin::Sigma(b) => fac
                .pairs()
                .iter()
                .map(|&(q, k)| (0..=k).map(|j| (q as f64).powf(b * j as f64)).sum::<f64>())
                .product(),
            Builtin::LogPow(a) => (fac.value() as f64).ln().powf(a),
            Builtin::PowerNeg(k) => (fac.value() as f64).powi(-(k as i32)),
            _ => to_f64(&self.f_exact(fac).expect("rational-valued builtin")),
        }
    }

    /// Closed-form `g` where one is known.
    fn g_closed_exact(&self, fac: &Factorization) -> Option<Rational> {
        let pairs = fac.pairs();
        let squarefree = pairs.iter().all(|&(_, k)| k == 1);
        match *self {
            Builtin::Cyclicity => Some(Rational::from_integer(if !squarefree {
                0
            } else if pairs.len() % 2 == 0 {
                1
            } else {
                -1
            })),
            Builtin::Tau => Some(Rational::one()),
            Builtin::PowerNeg(k) => {
                // n^-k Π_{q|n} (1 - q^k)
                let num: i128 = pairs.iter().map(|&(q, _)| 1 - (q as i128).pow(k)).product();
                let den = (fac.value() as i128).checked_pow(k)?;
                Some(Rational::new(num, den))
            }
            Builtin::TwoPowKOmega(k) => Some(Rational::from_integer(if squarefree {
                ((1i128 << k) - 1).pow(pairs.len() as u32)
            } else {
                0
            })),
            _ => None,
        }
    }

    fn g_closed_real(&self, fac: &Factorization) -> Option<f64> {
        match *self {
            // Jordan-type totient: n^β Π_{q|n} (1 - q^-β)
            Builtin::Power(b) => Some(
                (fac.value() as f64).powf(b)
                    * fac.primes().map(|q| 1.0 - (q as f64).powf(-b)).product::<f64>(),
            ),
            Builtin::Sigma(b) => Some((fac.value() as f64).powf(b)),
            _ => None,
        }
    }
}

/// `1 + ln 2 / ln 2`-style constant: `(ln x + 1) / ln x <= 1 + 1/ln 2` for `x >= 2`.
pub const DIVISOR_SUM_CONST: f64 = 2.4427;

fn divisor_power(k: u32, r: u32) -> u32 {
    1 + r * (k - 1)
}

fn divisor_power_growth(m: u32) -> Growth {
    let gamma = ((1u64 << m) - 1) as f64;
    Growth::new(0.0, gamma, DIVISOR_SUM_CONST.powf(gamma))
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Cyclicity => f.write_str("cyclicity"),
            Builtin::Tau => f.write_str("tau"),
            Builtin::PowerNeg(k) => write!(f, "power_neg:{k}"),
            Builtin::Power(b) => write!(f, "power:{b}"),
            Builtin::Sigma(b) => write!(f, "sigma:{b}"),
            Builtin::LogPow(a) => write!(f, "log_pow:{a}"),
            Builtin::OmegaPow(k) => write!(f, "omega_pow:{k}"),
            Builtin::BigOmegaPow(k) => write!(f, "bigomega_pow:{k}"),
            Builtin::TwoPowKOmega(k) => write!(f, "two_pow_k_omega:{k}"),
            Builtin::TauKPow(k, r) => write!(f, "tau_k_pow:{k},{r}"),
        }
    }
}

impl FromStr for Builtin {
    type Err = FunctionError;

    /// Parses `name[:params]`, e.g. `cyclicity`, `power_neg:2`, `tau_k_pow:3,2`.
    /// Parenthesised parameters (`power_neg(2)`) are accepted too.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let unknown = || FunctionError::Unknown(s.to_string());
        let (name, params) = match s.find([':', '(']) {
            Some(pos) => {
                let rest = s[pos + 1..].trim_end_matches(')');
                (&s[..pos], rest.split(',').map(str::trim).collect::<Vec<_>>())
            }
            None => (s, Vec::new()),
        };
        let int = |i: usize| -> Result<u32, FunctionError> {
            params.get(i).and_then(|v| v.parse().ok()).ok_or_else(unknown)
        };
        let real = |i: usize| -> Result<f64, FunctionError> {
            params.get(i).and_then(|v| v.parse().ok()).ok_or_else(unknown)
        };
        let arity = |n: usize| if params.len() == n { Ok(()) } else { Err(unknown()) };
        let b = match name.to_ascii_lowercase().as_str() {
            "cyclicity" => arity(0).map(|_| Builtin::Cyclicity)?,
            "tau" => arity(0).map(|_| Builtin::Tau)?,
            "power_neg" => arity(1).and(int(0).map(Builtin::PowerNeg))?,
            "power" => arity(1).and(real(0).map(Builtin::Power))?,
            "sigma" => arity(1).and(real(0).map(Builtin::Sigma))?,
            "log_pow" => arity(1).and(real(0).map(Builtin::LogPow))?,
            "omega_pow" => arity(1).and(int(0).map(Builtin::OmegaPow))?,
            "bigomega_pow" => arity(1).and(int(0).map(Builtin::BigOmegaPow))?,
            "two_pow_k_omega" => arity(1).and(int(0).map(Builtin::TwoPowKOmega))?,
            "tau_k_pow" => {
                arity(2)?;
                Builtin::TauKPow(int(0)?, int(1)?)
            }
            _ => return Err(unknown()),
        };
        b.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Source {
    Builtin(Builtin),
    /// `g` given explicitly on a finite support.
    FiniteG(Vec<(u64, Rational)>),
}

/// A pair `(f, g)` with `f = 1 * g`, tabulated on `[1, bound]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArithmeticFunction {
    name: String,
    source: Source,
    bound: usize,
    f: Table,
    g: Table,
    multiplicative: bool,
    growth: Growth,
    g_support: Option<u64>,
}

/// Möbius inversion: `g(n) = Σ_{d|n} μ(n/d) f(d)` for `n <= bound`, with index 0 zero.
pub fn moebius_invert<T, F>(f: F, bound: usize) -> Vec<T>
where
    T: Clone + Zero + std::ops::Sub<Output = T>,
    F: Fn(u64) -> T,
{
    let mu = SpfTable::new(bound).mobius();
    let fv: Vec<T> = std::iter::once(T::zero())
        .chain((1..=bound as u64).map(&f))
        .collect();
    let mut g = vec![T::zero(); bound + 1];
    for d in 1..=bound {
        let mut j = 1;
        let mut m = d;
        while m <= bound {
            match mu[j] {
                1 => g[m] = g[m].clone() + fv[d].clone(),
                -1 => g[m] = g[m].clone() - fv[d].clone(),
                _ => {}
            }
            j += 1;
            m += d;
        }
    }
    g
}

/// Builds a built-in from its `name[:params]` string with tables to [`DEFAULT_BOUND`].
pub fn builtin(spec: &str) -> Result<ArithmeticFunction, FunctionError> {
    builtin_with_bound(spec, DEFAULT_BOUND)
}

pub fn builtin_with_bound(spec: &str, bound: usize) -> Result<ArithmeticFunction, FunctionError> {
    Ok(ArithmeticFunction::from_builtin(spec.parse()?, bound))
}

impl ArithmeticFunction {
    pub fn from_builtin(kind: Builtin, bound: usize) -> Self {
        let bound = bound.max(1);
        let spf = SpfTable::new(bound);
        let facs: Vec<Factorization> =
            std::iter::once(Factorization::default()).chain((1..=bound).map(|n| spf.factor(n))).collect();
        let (f, g) = if kind.is_exact() {
            let f: Vec<Rational> = std::iter::once(Rational::zero())
                .chain(facs[1..].iter().map(|fac| kind.f_exact(fac).expect("table fits i128")))
                .collect();
            let g = if kind.g_closed_exact(&facs[1]).is_some() {
                std::iter::once(Rational::zero())
                    .chain(facs[1..].iter().map(|fac| kind.g_closed_exact(fac).expect("fits")))
                    .collect()
            } else {
                moebius_invert(|n| f[n as usize], bound)
            };
            (Table::Exact(f), Table::Exact(g))
        } else {
            let f: Vec<f64> = std::iter::once(0.0)
                .chain(facs[1..].iter().map(|fac| kind.f_real(fac)))
                .collect();
            let g = if kind.g_closed_real(&facs[1]).is_some() {
                std::iter::once(0.0)
                    .chain(facs[1..].iter().map(|fac| kind.g_closed_real(fac).expect("closed")))
                    .collect()
            } else {
                moebius_invert(|n| f[n as usize], bound)
            };
            (Table::Real(f), Table::Real(g))
        };
        let g_support = match kind {
            Builtin::OmegaPow(0) | Builtin::BigOmegaPow(0) | Builtin::TwoPowKOmega(0) => Some(1),
            Builtin::TauKPow(1, _) | Builtin::TauKPow(_, 0) => Some(1),
            _ => None,
        };
        ArithmeticFunction {
            name: kind.to_string(),
            source: Source::Builtin(kind),
            bound,
            f,
            g,
            multiplicative: kind.is_multiplicative(),
            growth: kind.growth(),
            g_support,
        }
    }

    /// A function given by finitely many nonzero values of `g`; `f` follows by summation.
    pub fn from_finite_g(name: &str, values: &[(u64, Rational)], bound: usize) -> Self {
        let bound = bound.max(1);
        let mut gv = vec![Rational::zero(); bound + 1];
        let mut support: Vec<(u64, Rational)> =
            values.iter().filter(|(d, v)| *d >= 1 && !v.is_zero()).copied().collect();
        support.sort_by_key(|(d, _)| *d);
        for &(d, v) in &support {
            if (d as usize) <= bound {
                gv[d as usize] = v;
            }
        }
        let mut fv = vec![Rational::zero(); bound + 1];
        for &(d, v) in &support {
            let mut m = d as usize;
            while m <= bound {
                fv[m] += v;
                m += d as usize;
            }
        }
        let total: f64 = support.iter().map(|(_, v)| to_f64(&v.abs())).sum();
        let multiplicative = support.iter().all(|&(d, v)| {
            support.iter().all(|&(e, w)| {
                if num_integer::gcd(d, e) != 1 {
                    return true;
                }
                let prod = support.iter().find(|(m, _)| *m == d * e).map(|&(_, x)| x);
                prod.unwrap_or_else(Rational::zero) == v * w
            })
        }) && support.first().is_some_and(|&(d, v)| d == 1 && v.is_one());
        ArithmeticFunction {
            name: name.to_string(),
            g_support: Some(support.last().map_or(0, |&(d, _)| d)),
            source: Source::FiniteG(support),
            bound,
            f: Table::Exact(fv),
            g: Table::Exact(gv),
            multiplicative,
            growth: Growth::new(0.0, 0.0, (total / 2.0).max(1.0)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn builtin_kind(&self) -> Option<Builtin> {
        match self.source {
            Source::Builtin(b) => Some(b),
            Source::FiniteG(_) => None,
        }
    }

    pub fn is_multiplicative(&self) -> bool {
        self.multiplicative
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.f, Table::Exact(_))
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    /// Replaces the declared growth triple, e.g. to test validation diagnostics.
    pub fn with_growth(mut self, growth: Growth) -> Self {
        self.growth = growth;
        self
    }

    /// If set, `g(d) = 0` for every `d` beyond this value.
    pub fn g_support(&self) -> Option<u64> {
        self.g_support
    }

    pub fn f_table(&self) -> &Table {
        &self.f
    }

    pub fn g_table(&self) -> &Table {
        &self.g
    }

    /// Exact `f(n)` when `f` is rational-valued.
    pub fn f_exact(&self, n: u64) -> Option<Rational> {
        assert!(n >= 1);
        if (n as usize) <= self.bound {
            return self.f.get_exact(n as usize);
        }
        match &self.source {
            Source::Builtin(b) => b.f_exact(&factorize(n).ok()?),
            Source::FiniteG(s) => Some(s.iter().filter(|(d, _)| n % d == 0).map(|&(_, v)| v).sum()),
        }
    }

    pub fn f(&self, n: u64) -> f64 {
        assert!(n >= 1);
        if (n as usize) <= self.bound {
            return self.f.get(n as usize);
        }
        match &self.source {
            Source::Builtin(b) => b.f_real(&factorize(n).expect("n >= 1")),
            Source::FiniteG(_) => to_f64(&self.f_exact(n).expect("finite g is exact")),
        }
    }

    pub fn g_exact(&self, n: u64) -> Option<Rational> {
        assert!(n >= 1);
        if (n as usize) <= self.bound {
            return self.g.get_exact(n as usize);
        }
        if let Source::FiniteG(s) = &self.source {
            return Some(s.iter().find(|(d, _)| *d == n).map_or_else(Rational::zero, |&(_, v)| v));
        }
        let fac = factorize(n).ok()?;
        let mut acc = Rational::zero();
        for d in divisors_of(&fac) {
            let mu = mobius(n / d);
            if mu != 0 {
                acc += self.f_exact(d)? * Rational::from_integer(mu as i128);
            }
        }
        Some(acc)
    }

    pub fn g(&self, n: u64) -> f64 {
        assert!(n >= 1);
        if (n as usize) <= self.bound {
            return self.g.get(n as usize);
        }
        if self.is_exact() {
            return to_f64(&self.g_exact(n).expect("exact function"));
        }
        let fac = factorize(n).expect("n >= 1");
        divisors_of(&fac)
            .into_iter()
            .map(|d| mobius(n / d) as f64 * self.f(d))
            .sum()
    }

    /// `g(q^j)` in floating point for a prime `q`, valid for any `q^j < 2^62`.
    pub fn g_prime_power(&self, q: u64, j: u32) -> f64 {
        let n = q.pow(j);
        if (n as usize) <= self.bound || j == 0 {
            return self.g(n);
        }
        match &self.source {
            Source::Builtin(b) => {
                let f = |e: u32| {
                    b.f_real(&Factorization::from_pairs(if e == 0 { vec![] } else { vec![(q, e)] })
                        .expect("prime power"))
                };
                f(j) - f(j - 1)
            }
            Source::FiniteG(_) => self.g(n),
        }
    }
}

fn mobius(n: u64) -> i8 {
    let fac = factorize(n).expect("n >= 1");
    if fac.pairs().iter().any(|&(_, k)| k > 1) {
        0
    } else if fac.pairs().len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Smallest constant `c*` with `Σ_{d≤x} |g(d)| ≤ c* x^(1+β) (ln x)^γ` on `2 <= x <= scan`.
///
/// Partial sums are constant on `[n, n+1)` while the envelope increases, so checking
/// integer `x` is exact. Fails with the first witness if `c*` exceeds the declared constant.
pub fn validate_growth(af: &ArithmeticFunction, scan: u64) -> Result<f64, FunctionError> {
    if scan < 2 {
        return Err(FunctionError::SmallScan(scan));
    }
    let growth = af.growth();
    let mut partial = af.g(1).abs();
    let mut needed = 0.0f64;
    let mut witness = None;
    for x in 2..=scan {
        partial += af.g(x).abs();
        let ratio = partial / growth.envelope(x as f64);
        if ratio > needed {
            needed = ratio;
        }
        if witness.is_none() && ratio > growth.constant * (1.0 + 1e-12) {
            witness = Some(x);
        }
    }
    match witness {
        Some(w) => Err(FunctionError::GrowthViolated {
            name: af.name().to_string(),
            witness: w,
            needed,
            declared: growth.constant,
        }),
        None => Ok(needed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::{divisors, mult_fn, MultFn};

    fn q(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn invert_examples() {
        let tau = moebius_invert(|n| Rational::from_integer(mult_fn(MultFn::Tau, n).unwrap() as i128), 500);
        assert!(tau[1..].iter().all(|v| v.is_one()));
        let ind = moebius_invert(|n| Rational::from_integer((n == 1) as i128), 500);
        for n in 1..=500u64 {
            assert_eq!(ind[n as usize], Rational::from_integer(mult_fn(MultFn::Mu, n).unwrap() as i128));
        }
        let id = moebius_invert(|n| n as i64, 500);
        for n in 1..=500u64 {
            assert_eq!(id[n as usize], mult_fn(MultFn::Phi, n).unwrap());
        }
    }

    #[test]
    fn builtin_examples() {
        let cyc = builtin_with_bound("cyclicity", 1000).unwrap();
        assert_eq!(cyc.f(1), 1.0);
        assert!((2..=1000).all(|n| cyc.f(n) == 0.0));
        assert_eq!(cyc.g_exact(30), Some(q(-1, 1)));
        let tau = builtin_with_bound("tau", 1000).unwrap();
        assert_eq!(tau.f_exact(6), Some(q(4, 1)));
        assert_eq!(tau.g_exact(6), Some(q(1, 1)));
        let pn = builtin_with_bound("power_neg:1", 1000).unwrap();
        assert_eq!(pn.g_exact(2), Some(q(-1, 2)));
        assert_eq!(pn.g_exact(2).unwrap(), pn.f_exact(2).unwrap() - pn.f_exact(1).unwrap());
    }

    #[test]
    fn parse_and_reject() {
        assert_eq!("power_neg(2)".parse::<Builtin>().unwrap(), Builtin::PowerNeg(2));
        assert_eq!("tau_k_pow:3,2".parse::<Builtin>().unwrap(), Builtin::TauKPow(3, 2));
        assert!(matches!("power:1".parse::<Builtin>(), Err(FunctionError::OutOfRange { .. })));
        assert!(matches!("sigma:1.5".parse::<Builtin>(), Err(FunctionError::OutOfRange { .. })));
        assert!(matches!("log_pow:0".parse::<Builtin>(), Err(FunctionError::OutOfRange { .. })));
        assert!(matches!("power_neg:0".parse::<Builtin>(), Err(FunctionError::OutOfRange { .. })));
        assert!(matches!("zeta".parse::<Builtin>(), Err(FunctionError::Unknown(_))));
        assert!(matches!("tau:3".parse::<Builtin>(), Err(FunctionError::Unknown(_))));
        for s in ["cyclicity", "tau", "power_neg:3", "power:0.5", "sigma:0.25", "log_pow:1.5",
                  "omega_pow:2", "bigomega_pow:1", "two_pow_k_omega:2", "tau_k_pow:3,1"] {
            let b: Builtin = s.parse().unwrap();
            assert_eq!(b.to_string().parse::<Builtin>().unwrap(), b);
        }
    }

    const ALL: [&str; 12] = [
        "cyclicity", "tau", "power_neg:1", "power_neg:2", "power:0.5", "sigma:0.3",
        "log_pow:1.5", "omega_pow:2", "bigomega_pow:2", "two_pow_k_omega:1",
        "tau_k_pow:3,1", "tau_k_pow:2,2",
    ];

    #[test]
    fn pairing_identity_for_every_builtin() {
        for spec in ALL {
            let af = builtin_with_bound(spec, 10_000).unwrap();
            for n in 1..=10_000u64 {
                let divs = divisors(n).unwrap();
                if af.is_exact() {
                    let sum: Rational = divs.iter().map(|&d| af.g_exact(d).unwrap()).sum();
                    assert_eq!(sum, af.f_exact(n).unwrap(), "{spec} n={n}");
                } else {
                    let sum: f64 = divs.iter().map(|&d| af.g(d)).sum();
                    let f = af.f(n);
                    assert!((sum - f).abs() <= 1e-12 * f.abs().max(1.0), "{spec} n={n}: {sum} vs {f}");
                }
            }
        }
    }

    #[test]
    fn evaluation_beyond_table_matches_table() {
        for spec in ALL {
            let small = builtin_with_bound(spec, 300).unwrap();
            let big = builtin_with_bound(spec, 2000).unwrap();
            for n in [301u64, 360, 512, 997, 1024, 1800, 1999] {
                assert!((small.f(n) - big.f(n)).abs() <= 1e-9 * big.f(n).abs().max(1.0), "{spec} f({n})");
                assert!((small.g(n) - big.g(n)).abs() <= 1e-9 * big.g(n).abs().max(1.0), "{spec} g({n})");
            }
        }
    }

    #[test]
    fn multiplicative_flags_hold() {
        let pairs = [(4u64, 9u64), (8, 15), (7, 11), (25, 12), (16, 27), (5, 49)];
        for spec in ALL {
            let af = builtin_with_bound(spec, 2000).unwrap();
            if !af.is_multiplicative() {
                continue;
            }
            for (m, n) in pairs {
                let lhs = af.g(m * n);
                let rhs = af.g(m) * af.g(n);
                assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0), "{spec} ({m},{n})");
            }
        }
        assert!(!builtin("omega_pow:1").unwrap().is_multiplicative());
    }

    #[test]
    fn prime_power_values_beyond_table() {
        for spec in ["power_neg:3", "power:0.5", "sigma:0.5", "tau_k_pow:3,1"] {
            let small = builtin_with_bound(spec, 10).unwrap();
            let big = builtin_with_bound(spec, 5000).unwrap();
            for (q, j) in [(2u64, 5u32), (2, 12), (3, 7), (7, 4), (61, 2)] {
                let want = big.g(q.pow(j));
                assert!((small.g_prime_power(q, j) - want).abs() <= 1e-12 * want.abs().max(1e-300), "{spec}");
            }
        }
        let pn = builtin_with_bound("power_neg:4", 10).unwrap();
        let v = pn.g_prime_power(2, 40);
        assert!(v < 0.0 && v.is_finite());
    }

    #[test]
    fn growth_examples() {
        let mu = builtin_with_bound("cyclicity", 10_000).unwrap();
        assert!(validate_growth(&mu, 10_000).unwrap() <= 1.0);
        let one = builtin_with_bound("tau", 10_000).unwrap();
        assert!(validate_growth(&one, 10_000).unwrap() <= 1.0);
        assert_eq!(validate_growth(&one, 1), Err(FunctionError::SmallScan(1)));
        let bad = one.with_growth(Growth::new(0.0, 0.0, 0.5));
        match validate_growth(&bad, 100) {
            Err(FunctionError::GrowthViolated { witness, .. }) => assert_eq!(witness, 2),
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn declared_growth_holds_for_every_builtin() {
        for spec in ALL.iter().copied().chain(["omega_pow:0", "two_pow_k_omega:3", "tau_k_pow:4,1"]) {
            let af = builtin_with_bound(spec, 100_000).unwrap();
            let needed = validate_growth(&af, 100_000).unwrap_or_else(|e| panic!("{e}"));
            assert!(needed > 0.0, "{spec}");
        }
    }

    #[test]
    fn finite_g_functions() {
        let unit = ArithmeticFunction::from_finite_g("unit", &[(1, Rational::one())], 100);
        assert!(unit.is_multiplicative());
        assert_eq!(unit.g_support(), Some(1));
        assert!((1..=100).all(|n| unit.f(n) == 1.0));
        let zero = ArithmeticFunction::from_finite_g("zero", &[], 100);
        assert_eq!(zero.g_support(), Some(0));
        assert_eq!(zero.f(77), 0.0);
        let two = ArithmeticFunction::from_finite_g("two", &[(2, q(3, 1))], 10);
        assert_eq!(two.f_exact(14), Some(q(3, 1)));
        assert_eq!(two.f_exact(15), Some(q(0, 1)));
        assert!(!two.is_multiplicative());
    }
}
