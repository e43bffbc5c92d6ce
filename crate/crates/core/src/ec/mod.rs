//! Finite-field and elliptic-curve arithmetic over prime fields.

mod count;
mod curve;
mod structure;

pub use count::{
    count_points, count_points_with, cubic_table, enumerate_points, QrTable, COUNT_LIMIT,
    ENUMERATE_LIMIT,
};
pub use curve::{
    discriminant_residue, make_curve, point_add, scalar_mul, Curve, Point, PrimeField, FIELD_LIMIT,
};
pub use structure::{
    default_rng, group_structure, group_structure_with_rng, group_structure_with_table,
    has_full_torsion, point_order, structure_with_order, GroupStructure, DETERMINISTIC_LIMIT,
    SAMPLE_BUDGET, STABLE_SAMPLES,
};

use thiserror::Error;

/// Why a coefficient pair does not define an admissible curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BadReduction {
    /// `4a^3 + 27b^2 ≡ 0`.
    Singular,
    /// `(a, b) = (0, 0)`.
    Excluded,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("{0} is not a prime in [5, 2^61)")]
    BadField(u64),
    #[error("coefficients ({a}, {b}) are not reduced modulo {p}")]
    Unreduced { a: u64, b: u64, p: u64 },
    #[error("bad reduction: {0:?}")]
    BadReduction(BadReduction),
    #[error("point {0} is not on the curve")]
    NotOnCurve(Point),
    #[error("claimed multiple {0} does not annihilate the point")]
    InconsistentMultiple(u64),
    #[error("p = {p} exceeds the limit {limit} for this operation")]
    TooLarge { p: u64, limit: u64 },
    #[error("group structure of y^2 = x^3 + {a}x + {b} over F_{p} could not be certified")]
    Uncertified { p: u64, a: u64, b: u64 },
}
