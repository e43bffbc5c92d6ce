//! Point counting by the quadratic-character sum, and explicit enumeration.

use crate::numtheory::modular::{add_mod, sqrt_mod};

use super::curve::{Curve, Point};
use super::CurveError;

/// Largest characteristic accepted by [`count_points`].
pub const COUNT_LIMIT: u64 = 1 << 31;

/// Largest characteristic accepted by [`enumerate_points`].
pub const ENUMERATE_LIMIT: u64 = 10_000;

/// Table of nonzero squares modulo `p`, one bit per residue. Built once per prime and
/// shared read-only by every curve over that prime.
#[derive(Clone, Debug)]
pub struct QrTable {
    p: u64,
    bits: Vec<u64>,
}

impl QrTable {
    pub fn new(p: u64) -> Self {
        let mut bits = vec![0u64; (p as usize).div_ceil(64)];
        let mut sq = 0u64;
        // (y + 1)^2 = y^2 + 2y + 1
        for y in 0..(p - 1) / 2 {
            sq = add_mod(sq, add_mod(2 * y % p, 1, p), p);
            bits[(sq >> 6) as usize] |= 1 << (sq & 63);
        }
        QrTable { p, bits }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn is_nonzero_square(&self, v: u64) -> bool {
        (self.bits[(v >> 6) as usize] >> (v & 63)) & 1 == 1
    }

    /// The quadratic character of `v` (already reduced).
    #[inline]
    pub fn chi(&self, v: u64) -> i64 {
        if v == 0 {
            0
        } else if self.is_nonzero_square(v) {
            1
        } else {
            -1
        }
    }

    /// `sum_x chi(h(x) + b)` for a precomputed table `h` of length `p`.
    #[inline]
    pub fn shifted_sum(&self, h: &[u64], b: u64) -> i64 {
        let p = self.p;
        let mut acc = 0i64;
        for &v in h {
            let mut w = v + b;
            if w >= p {
                w -= p;
            }
            acc += self.chi(w);
        }
        acc
    }
}

/// `x^3 + a x mod p` for every `x in [0, p)`, by finite differences.
pub fn cubic_table(a: u64, p: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(p as usize);
    // h(x) = x^3 + a x; h(x+1) - h(x) = 3x^2 + 3x + 1 + a; second difference 6x + 6
    let mut h = 0u64;
    let mut d1 = add_mod(1, a, p);
    let mut d2 = 6 % p;
    for _ in 0..p {
        out.push(h);
        h = add_mod(h, d1, p);
        d1 = add_mod(d1, d2, p);
        d2 = add_mod(d2, 6 % p, p);
    }
    out
}

/// `#E(F_p)` using a prebuilt residue table for the curve's prime.
pub fn count_points_with(c: &Curve, table: &QrTable) -> u64 {
    debug_assert_eq!(table.p(), c.p());
    let p = c.p();
    let mut acc = 0i64;
    let mut h = c.b();
    let mut d1 = add_mod(1, c.a(), p);
    let mut d2 = 6 % p;
    for _ in 0..p {
        acc += table.chi(h);
        h = add_mod(h, d1, p);
        d1 = add_mod(d1, d2, p);
        d2 = add_mod(d2, 6 % p, p);
    }
    (p as i64 + 1 + acc) as u64
}

/// `#E(F_p)`, point at infinity included. Linear in `p`; rejects `p >= 2^31`.
pub fn count_points(c: &Curve) -> Result<u64, CurveError> {
    if c.p() >= COUNT_LIMIT {
        return Err(CurveError::TooLarge { p: c.p(), limit: COUNT_LIMIT });
    }
    Ok(count_points_with(c, &QrTable::new(c.p())))
}

/// Every point of `c`, infinity first, then affine points by ascending `(x, y)`.
pub fn enumerate_points(c: &Curve) -> Result<Vec<Point>, CurveError> {
    let p = c.p();
    if p > ENUMERATE_LIMIT {
        return Err(CurveError::TooLarge { p, limit: ENUMERATE_LIMIT });
    }
    let mut pts = vec![Point::Infinity];
    for x in 0..p {
        if let Some(y) = sqrt_mod(c.rhs(x), p) {
            if y == 0 {
                pts.push(Point::affine(x, 0));
            } else {
                let (lo, hi) = if y < p - y { (y, p - y) } else { (p - y, y) };
                pts.push(Point::affine(x, lo));
                pts.push(Point::affine(x, hi));
            }
        }
    }
    Ok(pts)
}
