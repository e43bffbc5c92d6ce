//! Monte-Carlo averages over the box family `|a| <= A, |b| <= B`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{sweep_primes, FamilyError};
use crate::constants::{c0_series, Kahan, DEFAULT_TRUNCATION};
use crate::ec::{
    count_points_with, default_rng, discriminant_residue, make_curve, structure_with_order,
    PrimeField, QrTable,
};
use crate::invariants::ArithmeticFunction;
use crate::numtheory::log_integral;

/// The family of curves `y² = x³ + ax + b` with `|a| <= A`, `|b| <= B`, `(a, b) ≠ (0, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoxSpec {
    pub a: u64,
    pub b: u64,
}

impl BoxSpec {
    pub fn new(a: u64, b: u64) -> Result<Self, FamilyError> {
        if a == 0 || b == 0 {
            return Err(FamilyError::Invalid(format!("box needs A, B >= 1, got A={a}, B={b}")));
        }
        if a > i64::MAX as u64 / 4 || b > i64::MAX as u64 / 4 {
            return Err(FamilyError::Invalid("box side too large".into()));
        }
        Ok(BoxSpec { a, b })
    }

    /// `(2A+1)(2B+1) - 1 = 4AB + 2A + 2B`.
    pub fn family_size(&self) -> u128 {
        (2 * self.a as u128 + 1) * (2 * self.b as u128 + 1) - 1
    }

    /// Sample `j` of the stream keyed by `seed`.
    pub fn draw(&self, seed: u64, j: u64) -> (i64, i64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j);
        loop {
            let a = rng.gen_range(-(self.a as i64)..=self.a as i64);
            let b = rng.gen_range(-(self.b as i64)..=self.b as i64);
            if (a, b) != (0, 0) {
                return (a, b);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleReport {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

/// Residue tables for every prime in a sweep, shared by all samples.
struct PrimeTables(Vec<(PrimeField, QrTable)>);

impl PrimeTables {
    fn new(x: f64) -> Self {
        PrimeTables(
            sweep_primes(x)
                .into_par_iter()
                .map(|p| (PrimeField::new(p).expect("sweep primes are >= 5"), QrTable::new(p)))
                .collect(),
        )
    }

    /// `Σ_{p≤x, p ∤ 4a³+27b²} f(i_E(p))`.
    fn curve_sum(&self, a: i64, b: i64, af: &ArithmeticFunction) -> Result<f64, FamilyError> {
        let mut acc = Kahan::default();
        for (field, table) in &self.0 {
            let (s, t) = (field.reduce(a), field.reduce(b));
            if discriminant_residue(s, t, field.p()) == 0 {
                continue;
            }
            let curve = make_curve(*field, s, t)?;
            let n = count_points_with(&curve, table);
            let i = structure_with_order(&curve, n, &mut default_rng(&curve))?.i;
            acc.add(af.f(i));
        }
        Ok(acc.value())
    }

    fn samples(&self, bx: &BoxSpec, n: u64, seed: u64, af: &ArithmeticFunction) -> Result<Vec<f64>, FamilyError> {
        (0..n)
            .into_par_iter()
            .map(|j| {
                let (a, b) = bx.draw(seed, j);
                self.curve_sum(a, b, af)
            })
            .collect()
    }
}

/// Monte-Carlo estimate of `(1/|C|) Σ_{E∈C} Σ_{p≤x} f(i_E(p))` from `n` keyed draws.
pub fn sample_box_average(
    bx: &BoxSpec,
    x: f64,
    n: u64,
    seed: u64,
    af: &ArithmeticFunction,
) -> Result<SampleReport, FamilyError> {
    if n == 0 {
        return Err(FamilyError::Invalid("need at least one sample".into()));
    }
    let values = PrimeTables::new(x).samples(bx, n, seed, af)?;
    let mean = values.iter().copied().collect::<Kahan>().value() / n as f64;
    let std_error = if n > 1 {
        let ss = values.iter().map(|v| (v - mean) * (v - mean)).collect::<Kahan>().value();
        (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    Ok(SampleReport { estimate: mean, std_error, n_samples: n, seed })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceRow {
    pub x: f64,
    pub sample_variance: f64,
    pub normalized_ratio: f64,
}

/// Mean of `(T_E - c₀(f) li(x))²` over `m` drawn curves, and that mean times `(ln x)²/x²`.
pub fn variance_experiment(
    bx: &BoxSpec,
    x: f64,
    m: u64,
    af: &ArithmeticFunction,
    seed: u64,
) -> Result<VarianceRow, FamilyError> {
    if m < 2 {
        return Err(FamilyError::Invalid(format!("variance needs m >= 2 curves, got {m}")));
    }
    if !(x >= 2.0) || !x.is_finite() {
        return Err(FamilyError::Invalid(format!("x must be finite and >= 2, got {x}")));
    }
    let centre = c0_series(af, DEFAULT_TRUNCATION)?.value * log_integral(x).expect("x >= 2");
    let values = PrimeTables::new(x).samples(bx, m, seed, af)?;
    let sq: Kahan = values.iter().map(|t| (t - centre) * (t - centre)).collect();
    let sample_variance = sq.value() / m as f64;
    let ln = x.ln();
    Ok(VarianceRow { x, sample_variance, normalized_ratio: sample_variance * ln * ln / (x * x) })
}
