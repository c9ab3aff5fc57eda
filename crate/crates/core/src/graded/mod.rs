//! Graded-commutative polynomial algebras with nilpotent truncation.
//!
//! A [`GeneratorTable`] declares three kinds of generators:
//!
//! - *base* generators: even, never truncated (chart coordinates, even fiber
//!   generators);
//! - *formal* generators: even, truncated jointly at total degree `k`
//!   (the `dx` / `xi` jet generators);
//! - *odd* generators: Grassmann generators, nilpotent by the Koszul rule.
//!
//! A [`SuperPoly`] is a finite sum of monomials over such a table with exact
//! rational coefficients. Monomials are kept in a canonical order (see
//! [`Monomial`]), which doubles as the printing order.

mod monomial;
mod poly;
mod subst;
mod table;

pub use monomial::{MultiIndex, Monomial, OddSet};
pub use poly::SuperPoly;
pub use subst::{series_invert, substitute, AlgebraMap};
pub use table::{Generator, GeneratorTable, TableBuilder};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact coefficient field.
pub type Scalar = BigRational;

/// Parity of a homogeneous element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bits(bits: u32) -> Self {
        if bits % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn of_degree(degree: i32) -> Self {
        if degree.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }
}

pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Scalar {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub(crate) fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i))
}
