//! Point orders and the group structure `E(F_p) ≅ Z/i × Z/e`.
//!
//! The invariant `i` always divides both `e` and `p - 1`, and `i^2 | N`. Only primes `l`
//! with `l | gcd(N, p - 1)` and `l^2 | N` can divide `i`; when there are none the group is
//! cyclic and no points are needed. Otherwise the `l`-parts are resolved one of two ways:
//!
//! * `p <= DETERMINISTIC_LIMIT`: points are scanned in ascending `x` and projected into the
//!   Sylow `l`-subgroup until their span is the whole Sylow subgroup, which fixes its
//!   exponent exactly.
//! * larger `p`: random points are sampled and `e` is the running lcm of their orders,
//!   accepted once `N / e` divides `gcd(e, p - 1)` and `e` has survived
//!   [`STABLE_SAMPLES`] consecutive samples unchanged.

use std::collections::HashSet;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::numtheory::modular::sqrt_mod;
use crate::numtheory::{factorize, isqrt, Factorization};

use super::count::{count_points, count_points_with, QrTable};
use super::curve::{Curve, Point};
use super::CurveError;

/// Primes up to this bound use the deterministic Sylow-scan path.
pub const DETERMINISTIC_LIMIT: u64 = 10_000;

/// Consecutive unchanged samples required before a sampled exponent is accepted.
pub const STABLE_SAMPLES: u32 = 40;

/// Sampling budget before giving up with [`CurveError::Uncertified`].
pub const SAMPLE_BUDGET: u32 = 20_000;

/// `E(F_p) ≅ Z/i × Z/e` together with `N = #E(F_p)` and the trace `p + 1 - N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GroupStructure {
    pub n: u64,
    pub i: u64,
    pub e: u64,
    pub trace: i64,
}

impl GroupStructure {
    fn new(p: u64, n: u64, i: u64) -> Self {
        GroupStructure { n, i, e: n / i, trace: p as i64 + 1 - n as i64 }
    }

    pub fn is_cyclic(&self) -> bool {
        self.i == 1
    }
}

/// Exact order of `pt`, given the factorization of a multiple of it.
pub fn point_order(c: &Curve, pt: &Point, multiple: &Factorization) -> Result<u64, CurveError> {
    if !c.contains(pt) {
        return Err(CurveError::NotOnCurve(*pt));
    }
    let m = multiple.value();
    if !c.mul(m, pt).is_infinity() {
        return Err(CurveError::InconsistentMultiple(m));
    }
    Ok(order_dividing(c, pt, m, multiple))
}

fn order_dividing(c: &Curve, pt: &Point, m: u64, fac: &Factorization) -> u64 {
    let mut order = m;
    for &(q, k) in fac.pairs() {
        for _ in 0..k {
            if c.mul(order / q, pt).is_infinity() {
                order /= q;
            } else {
                break;
            }
        }
    }
    order
}

/// Primes that may divide `i`: `l | gcd(N, p - 1)` with `l^2 | N`.
fn torsion_candidates(p: u64, n_fac: &Factorization) -> Vec<(u64, u32)> {
    n_fac
        .pairs()
        .iter()
        .copied()
        .filter(|&(q, k)| k >= 2 && (p - 1) % q == 0)
        .collect()
}

/// Group structure from a known order `n`, using `rng` only on the sampling path.
pub fn structure_with_order<R: Rng + ?Sized>(
    c: &Curve,
    n: u64,
    rng: &mut R,
) -> Result<GroupStructure, CurveError> {
    let p = c.p();
    let n_fac = factorize(n).expect("group order is positive and small");
    let candidates = torsion_candidates(p, &n_fac);
    if candidates.is_empty() {
        return Ok(GroupStructure::new(p, n, 1));
    }
    if p <= DETERMINISTIC_LIMIT {
        let i = candidates
            .iter()
            .map(|&(q, k)| q.pow(sylow_index_exponent(c, n, q, k)))
            .product();
        Ok(GroupStructure::new(p, n, i))
    } else {
        sampled_structure(c, n, &n_fac, rng)
    }
}

/// Deterministic `v_l(i)`: span the Sylow `l`-subgroup with projections of scanned points.
fn sylow_index_exponent(c: &Curve, n: u64, q: u64, k: u32) -> u32 {
    let p = c.p();
    let full = q.pow(k) as usize;
    let cofactor = n / q.pow(k);
    let mut span: Vec<Point> = vec![Point::Infinity];
    let mut members: HashSet<Point> = span.iter().copied().collect();
    let mut max_exp = 0u32;
    for x in 0..p {
        if span.len() == full {
            break;
        }
        let Some(y) = sqrt_mod(c.rhs(x), p) else {
            continue;
        };
        let g = c.mul(cofactor, &Point::affine(x, y));
        if members.contains(&g) {
            continue;
        }
        let mut exp = 0;
        let mut t = g;
        while !t.is_infinity() {
            t = c.mul(q, &t);
            exp += 1;
        }
        max_exp = max_exp.max(exp);
        // smallest m > 0 with m*g in the current span
        let mut steps = vec![g];
        while !members.contains(steps.last().unwrap()) {
            let next = c.add(steps.last().unwrap(), &g);
            steps.push(next);
        }
        steps.pop();
        let base = span.clone();
        for s in &steps {
            for h in &base {
                let v = c.add(h, s);
                if members.insert(v) {
                    span.push(v);
                }
            }
        }
    }
    debug_assert_eq!(span.len(), full, "Sylow subgroup not spanned");
    k - max_exp
}

fn random_point<R: Rng + ?Sized>(c: &Curve, rng: &mut R) -> Point {
    let p = c.p();
    loop {
        let x = rng.gen_range(0..p);
        if let Some(y) = sqrt_mod(c.rhs(x), p) {
            let y = if rng.gen::<bool>() && y != 0 { p - y } else { y };
            return Point::affine(x, y);
        }
    }
}

fn sampled_structure<R: Rng + ?Sized>(
    c: &Curve,
    n: u64,
    n_fac: &Factorization,
    rng: &mut R,
) -> Result<GroupStructure, CurveError> {
    let p = c.p();
    let mut e = 1u64;
    let mut stable = 0u32;
    for _ in 0..SAMPLE_BUDGET {
        let pt = random_point(c, rng);
        let order = order_dividing(c, &pt, n, n_fac);
        let next = e.lcm(&order);
        if next == e {
            stable += 1;
        } else {
            e = next;
            stable = 0;
        }
        let i = n / e;
        if stable >= STABLE_SAMPLES && e.gcd(&(p - 1)) % i == 0 {
            return Ok(GroupStructure::new(p, n, i));
        }
    }
    Err(CurveError::Uncertified { p, a: c.a(), b: c.b() })
}

/// A reproducible stream for sampling on curve `c`, keyed by the curve's coefficients.
pub fn default_rng(c: &Curve) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(c.p() ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(c.a().wrapping_mul(0x1000_0000_01b3) ^ c.b());
    rng
}

/// Certified `(N, i, e)` for `c`.
pub fn group_structure(c: &Curve) -> Result<GroupStructure, CurveError> {
    let n = count_points(c)?;
    structure_with_order(c, n, &mut default_rng(c))
}

/// [`group_structure`] drawing sample points from a caller-supplied stream.
pub fn group_structure_with_rng<R: Rng + ?Sized>(
    c: &Curve,
    rng: &mut R,
) -> Result<GroupStructure, CurveError> {
    let n = count_points(c)?;
    structure_with_order(c, n, rng)
}

/// [`group_structure`] with a shared residue table for the curve's prime.
pub fn group_structure_with_table(c: &Curve, table: &QrTable) -> Result<GroupStructure, CurveError> {
    let n = count_points_with(c, table);
    structure_with_order(c, n, &mut default_rng(c))
}

/// Whether `E[d] ⊆ E(F_p)`, i.e. `d | i`.
pub fn has_full_torsion(c: &Curve, d: u64) -> Result<bool, CurveError> {
    if d == 1 {
        return Ok(true);
    }
    let p = c.p();
    if d == 0 || (p - 1) % d != 0 || d > isqrt(p) + 1 {
        return Ok(false);
    }
    Ok(group_structure(c)?.i % d == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::{make_curve, PrimeField};

    fn curve(p: u64, a: u64, b: u64) -> Curve {
        make_curve(PrimeField::new(p).unwrap(), a, b).unwrap()
    }

    #[test]
    fn structure_examples() {
        let s = group_structure(&curve(5, 1, 1)).unwrap();
        assert_eq!((s.n, s.i, s.e), (9, 1, 9));
        let s = group_structure(&curve(5, 4, 0)).unwrap();
        assert_eq!((s.n, s.i, s.e), (8, 2, 4));
        let s = group_structure(&curve(7, 0, 2)).unwrap();
        assert_eq!((s.n, s.i, s.e, s.trace), (9, 3, 3, -1));
    }

    #[test]
    fn order_examples() {
        let fac9 = factorize(9).unwrap();
        let c = curve(5, 1, 1);
        assert_eq!(point_order(&c, &Point::Infinity, &fac9).unwrap(), 1);
        assert_eq!(point_order(&c, &Point::affine(0, 1), &fac9).unwrap(), 9);
        let c = curve(7, 0, 2);
        assert_eq!(point_order(&c, &Point::affine(0, 3), &fac9).unwrap(), 3);
        assert_eq!(c.double(&Point::affine(0, 3)), Point::affine(0, 4));
        let c = curve(5, 1, 1);
        assert_eq!(
            point_order(&c, &Point::affine(0, 1), &factorize(6).unwrap()),
            Err(CurveError::InconsistentMultiple(6))
        );
    }

    #[test]
    fn full_torsion_examples() {
        assert!(has_full_torsion(&curve(5, 1, 1), 1).unwrap());
        assert!(has_full_torsion(&curve(7, 0, 2), 3).unwrap());
        assert!(!has_full_torsion(&curve(5, 1, 1), 3).unwrap());
        assert!(has_full_torsion(&curve(5, 4, 0), 2).unwrap());
    }

    #[test]
    fn sampling_path_agrees_with_sylow_scan() {
        // both paths on primes just above and below the switch, forcing the sampler directly
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        for &p in &[9973u64, 9967, 9949] {
            let t = QrTable::new(p);
            for a in 1..40 {
                for b in 1..40 {
                    let Ok(c) = make_curve(PrimeField::new(p).unwrap(), a, b) else { continue };
                    let n = count_points_with(&c, &t);
                    let det = structure_with_order(&c, n, &mut rng).unwrap();
                    let fac = factorize(n).unwrap();
                    let sampled = sampled_structure(&c, n, &fac, &mut rng).unwrap();
                    assert_eq!(det, sampled, "p={p} a={a} b={b}");
                    checked += (det.i > 1) as u32;
                }
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn large_prime_structure_invariants() {
        let p = 1_000_003u64;
        let t = QrTable::new(p);
        for (a, b) in [(1, 1), (0, 7), (5, 0), (123, 456), (p - 3, 5)] {
            let c = curve(p, a, b);
            let s = group_structure_with_table(&c, &t).unwrap();
            assert_eq!(s.i * s.e, s.n);
            assert_eq!(s.e % s.i, 0);
            assert_eq!((p - 1) % s.i, 0);
            assert!((s.trace as f64).abs() <= 2.0 * (p as f64).sqrt());
        }
    }
}
