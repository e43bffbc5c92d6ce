//! Isomorphism classes of short Weierstrass curves over `F_p` and their invariants.

use num_integer::gcd;
use serde::Serialize;

use crate::ec::{
    cubic_table, default_rng, discriminant_residue, make_curve, structure_with_order, CurveError,
    PrimeField, QrTable,
};
use crate::numtheory::{modular::mul_mod, primitive_root};

/// One isomorphism class `{(s u^4, t u^6)}` of nonsingular curves over `F_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct OrbitRep {
    pub s: u64,
    pub t: u64,
    pub orbit_size: u64,
    pub aut: u64,
}

impl OrbitRep {
    /// Both coefficients are units, i.e. the class enters the main term.
    pub fn is_unit_pair(&self) -> bool {
        self.s != 0 && self.t != 0
    }
}

/// One representative per class. The `st ≠ 0` classes come first, ordered by `s` then `t`,
/// followed by the `s = 0` and then the `t = 0` classes.
pub fn orbit_representatives(p: u64) -> Vec<OrbitRep> {
    assert!(p >= 5, "orbit representatives need p >= 5");
    let g = primitive_root(p);
    let powers = |count: u64| {
        let mut v = Vec::with_capacity(count as usize);
        let mut x = 1;
        for _ in 0..count {
            v.push(x);
            x = mul_mod(x, g, p);
        }
        v
    };
    let c4 = gcd(4, p - 1);
    let c6 = gcd(6, p - 1);
    let mut reps = Vec::with_capacity(2 * p as usize);
    // u with u^4 = 1 fixes s and moves t by u^6 = u^2, which is -1 exactly when p ≡ 1 (mod 4)
    let fold = p % 4 == 1;
    for s in powers(c4) {
        for t in 1..p {
            if fold && t > p - t {
                continue;
            }
            if discriminant_residue(s, t, p) == 0 {
                continue;
            }
            reps.push(OrbitRep { s, t, orbit_size: (p - 1) / 2, aut: 2 });
        }
    }
    for t in powers(c6) {
        reps.push(OrbitRep { s: 0, t, orbit_size: (p - 1) / c6, aut: c6 });
    }
    for s in powers(c4) {
        reps.push(OrbitRep { s, t: 0, orbit_size: (p - 1) / c4, aut: c4 });
    }
    reps
}

/// A class together with the order and index of its group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClassInvariants {
    pub rep: OrbitRep,
    pub n: u64,
    pub i: u64,
}

impl ClassInvariants {
    pub fn e(&self) -> u64 {
        self.n / self.i
    }
}

/// `(N, i)` for every class at `p`, in [`orbit_representatives`] order.
pub fn classify_prime(p: u64) -> Result<Vec<ClassInvariants>, CurveError> {
    let field = PrimeField::new(p)?;
    let table = QrTable::new(p);
    let mut out = Vec::with_capacity(2 * p as usize);
    let mut cached: Option<(u64, Vec<u64>)> = None;
    for rep in orbit_representatives(p) {
        if cached.as_ref().is_none_or(|(s, _)| *s != rep.s) {
            cached = Some((rep.s, cubic_table(rep.s, p)));
        }
        let h = &cached.as_ref().expect("filled above").1;
        let n = (p as i64 + 1 + table.shifted_sum(h, rep.t)) as u64;
        let curve = make_curve(field, rep.s, rep.t)?;
        let st = structure_with_order(&curve, n, &mut default_rng(&curve))?;
        out.push(ClassInvariants { rep, n, i: st.i });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::{modular::pow_mod, sieve_primes};
    use std::collections::HashMap;

    fn canonical(s: u64, t: u64, p: u64) -> (u64, u64) {
        (1..p)
            .map(|u| (mul_mod(s, pow_mod(u, 4, p), p), mul_mod(t, pow_mod(u, 6, p), p)))
            .min()
            .expect("p > 1")
    }

    #[test]
    fn small_prime_examples() {
        let reps = orbit_representatives(5);
        assert_eq!(reps.len(), 12);
        assert_eq!(reps.iter().map(|r| r.orbit_size).sum::<u64>(), 20);
        assert_eq!(reps.iter().filter(|r| r.s == 0).count(), 2);
        assert_eq!(reps.iter().filter(|r| r.t == 0).count(), 4);
        assert!(reps.iter().filter(|r| r.t == 0).all(|r| r.aut == 4));
        assert_eq!(orbit_representatives(7).iter().map(|r| r.orbit_size).sum::<u64>(), 42);
    }

    #[test]
    fn reps_match_canonical_orbit_dedup() {
        for &p in &sieve_primes(97)[2..] {
            let mut sizes: HashMap<(u64, u64), u64> = HashMap::new();
            for s in 0..p {
                for t in 0..p {
                    if discriminant_residue(s, t, p) != 0 {
                        *sizes.entry(canonical(s, t, p)).or_default() += 1;
                    }
                }
            }
            let reps = orbit_representatives(p);
            assert_eq!(reps.len(), sizes.len(), "p={p}");
            for r in &reps {
                assert_eq!(r.orbit_size * r.aut, p - 1);
                assert_eq!(sizes.get(&canonical(r.s, r.t, p)), Some(&r.orbit_size), "p={p} {r:?}");
                if r.aut == 6 {
                    assert!(r.s == 0 && p % 6 == 1);
                }
                if r.aut == 4 {
                    assert!(r.t == 0 && p % 4 == 1);
                }
            }
        }
    }

    #[test]
    fn classes_agree_with_direct_structure() {
        for p in [5u64, 7, 11, 13, 37] {
            let field = PrimeField::new(p).unwrap();
            for c in classify_prime(p).unwrap() {
                let st = crate::ec::group_structure(&make_curve(field, c.rep.s, c.rep.t).unwrap()).unwrap();
                assert_eq!((c.n, c.i), (st.n, st.i));
            }
        }
    }
}
