//! Group-structure invariants of elliptic curves over prime fields, the torsion census
//! behind their family averages, the limiting density constants, and desk-scale sweeps
//! that compare the two.

pub mod ec;
pub mod family;
pub mod invariants;
pub mod cli;
pub mod constants;
pub mod numtheory;

/// Exact rationals used wherever census identities must hold without rounding.
pub type Rational = num_rational::Ratio<i128>;
