//! Prime fields, short Weierstrass curves and the chord–tangent group law.

use std::fmt;

use serde::Serialize;

use crate::numtheory::is_prime;
use crate::numtheory::modular::{add_mod, inv_mod_prime, mul_mod, sub_mod};

use super::{BadReduction, CurveError};

/// Largest admissible field characteristic (exclusive).
pub const FIELD_LIMIT: u64 = 1 << 61;

/// The field F_p for a prime `5 <= p < 2^61`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, CurveError> {
        if p < 5 || p >= FIELD_LIMIT || !is_prime(p) {
            return Err(CurveError::BadField(p));
        }
        Ok(PrimeField { p })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Reduces a signed integer into `[0, p)`.
    pub fn reduce(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }
}

/// `y^2 = x^3 + a x + b` over a prime field, nonsingular and with `(a, b) != (0, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Curve {
    field: PrimeField,
    a: u64,
    b: u64,
}

/// `4a^3 + 27b^2 mod p`.
pub fn discriminant_residue(a: u64, b: u64, p: u64) -> u64 {
    let a3 = mul_mod(mul_mod(a, a, p), a, p);
    let b2 = mul_mod(b, b, p);
    add_mod(mul_mod(4 % p, a3, p), mul_mod(27 % p, b2, p), p)
}

/// Validates `(a, b)` over `field`; both residues must already be reduced.
pub fn make_curve(field: PrimeField, a: u64, b: u64) -> Result<Curve, CurveError> {
    let p = field.p();
    if a >= p || b >= p {
        return Err(CurveError::Unreduced { a, b, p });
    }
    if a == 0 && b == 0 {
        return Err(CurveError::BadReduction(BadReduction::Excluded));
    }
    if discriminant_residue(a, b, p) == 0 {
        return Err(CurveError::BadReduction(BadReduction::Singular));
    }
    Ok(Curve { field, a, b })
}

/// A point on a curve: the identity, or an affine pair of residues.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Infinity,
    Affine { x: u64, y: u64 },
}

impl Point {
    pub fn affine(x: u64, y: u64) -> Self {
        Point::Affine { x, y }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Infinity => f.write_str("O"),
            Point::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

impl Curve {
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.field.p
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    /// `x^3 + a x + b` at `x`.
    #[inline]
    pub fn rhs(&self, x: u64) -> u64 {
        let p = self.p();
        let x2 = mul_mod(x, x, p);
        add_mod(mul_mod(add_mod(x2, self.a, p), x, p), self.b, p)
    }

    pub fn contains(&self, pt: &Point) -> bool {
        match *pt {
            Point::Infinity => true,
            Point::Affine { x, y } => {
                x < self.p() && y < self.p() && mul_mod(y, y, self.p()) == self.rhs(x)
            }
        }
    }

    fn check(&self, pt: &Point) -> Result<(), CurveError> {
        if self.contains(pt) {
            Ok(())
        } else {
            Err(CurveError::NotOnCurve(*pt))
        }
    }

    pub fn neg(&self, pt: &Point) -> Point {
        match *pt {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => Point::Affine { x, y: sub_mod(0, y, self.p()) },
        }
    }

    /// Group law without membership checks; callers guarantee both inputs lie on the curve.
    pub fn add(&self, lhs: &Point, rhs: &Point) -> Point {
        let p = self.p();
        let (x1, y1, x2, y2) = match (*lhs, *rhs) {
            (Point::Infinity, q) => return q,
            (q, Point::Infinity) => return q,
            (Point::Affine { x: x1, y: y1 }, Point::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let slope = if x1 == x2 {
            if add_mod(y1, y2, p) == 0 {
                return Point::Infinity;
            }
            // tangent: (3x^2 + a) / 2y
            let num = add_mod(mul_mod(3, mul_mod(x1, x1, p), p), self.a, p);
            mul_mod(num, inv_mod_prime(add_mod(y1, y1, p), p), p)
        } else {
            mul_mod(sub_mod(y2, y1, p), inv_mod_prime(sub_mod(x2, x1, p), p), p)
        };
        let x3 = sub_mod(sub_mod(mul_mod(slope, slope, p), x1, p), x2, p);
        let y3 = sub_mod(mul_mod(slope, sub_mod(x1, x3, p), p), y1, p);
        Point::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, pt: &Point) -> Point {
        self.add(pt, pt)
    }

    /// `k * pt` by left-to-right double-and-add, without membership checks.
    pub fn mul(&self, k: u64, pt: &Point) -> Point {
        let mut acc = Point::Infinity;
        if k == 0 {
            return acc;
        }
        for bit in (0..64 - k.leading_zeros()).rev() {
            acc = self.double(&acc);
            if (k >> bit) & 1 == 1 {
                acc = self.add(&acc, pt);
            }
        }
        acc
    }

    /// The quadratic twist `(a v^2, b v^3)` by `v`.
    pub fn twist(&self, v: u64) -> Result<Curve, CurveError> {
        let p = self.p();
        let v2 = mul_mod(v, v, p);
        make_curve(self.field, mul_mod(self.a, v2, p), mul_mod(self.b, mul_mod(v2, v, p), p))
    }
}

/// Checked addition: both points must lie on `c`.
pub fn point_add(c: &Curve, lhs: &Point, rhs: &Point) -> Result<Point, CurveError> {
    c.check(lhs)?;
    c.check(rhs)?;
    Ok(c.add(lhs, rhs))
}

/// Checked scalar multiplication.
pub fn scalar_mul(c: &Curve, k: u64, pt: &Point) -> Result<Point, CurveError> {
    c.check(pt)?;
    Ok(c.mul(k, pt))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn field_validation() {
        assert!(PrimeField::new(5).is_ok());
        for bad in [0, 1, 2, 3, 4, 9, 1 << 61] {
            assert_eq!(PrimeField::new(bad), Err(CurveError::BadField(bad)));
        }
        assert_eq!(f(7).reduce(-1), 6);
    }

    #[test]
    fn make_curve_cases() {
        assert!(make_curve(f(5), 1, 1).is_ok());
        assert_eq!(
            make_curve(f(5), 0, 0),
            Err(CurveError::BadReduction(BadReduction::Excluded))
        );
        assert_eq!(
            make_curve(f(5), 2, 2),
            Err(CurveError::BadReduction(BadReduction::Singular))
        );
        assert!(matches!(make_curve(f(5), 5, 1), Err(CurveError::Unreduced { .. })));
    }

    #[test]
    fn group_law_examples() {
        let c = make_curve(f(5), 1, 1).unwrap();
        let p = Point::affine(0, 1);
        assert_eq!(point_add(&c, &p, &Point::Infinity).unwrap(), p);
        assert_eq!(point_add(&c, &p, &c.neg(&p)).unwrap(), Point::Infinity);
        let two_p = point_add(&c, &p, &p).unwrap();
        assert_eq!(two_p, Point::affine(4, 2));
        assert!(c.contains(&two_p));
        assert_eq!(scalar_mul(&c, 2, &p).unwrap(), two_p);
        assert_eq!(scalar_mul(&c, 1, &p).unwrap(), p);
        assert_eq!(scalar_mul(&c, 0, &p).unwrap(), Point::Infinity);
        assert_eq!(scalar_mul(&c, 9, &p).unwrap(), Point::Infinity);
        assert!(scalar_mul(&c, 3, &p).unwrap() != Point::Infinity);
        assert_eq!(
            point_add(&c, &Point::affine(0, 2), &p),
            Err(CurveError::NotOnCurve(Point::affine(0, 2)))
        );
    }

    #[test]
    fn two_torsion_doubles_to_infinity() {
        // y^2 = x^3 - x over F_5
        let c = make_curve(f(5), 4, 0).unwrap();
        for x in [0, 1, 4] {
            assert_eq!(c.double(&Point::affine(x, 0)), Point::Infinity);
        }
    }
}
