//! Value types the recursion can run over: symbolic Laurent polynomials or
//! exact rationals.

use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::laurent::{LaurentError, LaurentPoly};

pub trait Scalar: Clone + PartialEq + Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(c: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Result<Self, LaurentError>;
    fn mul(&self, other: &Self) -> Result<Self, LaurentError>;
    /// Exact division; for polynomials a non-Laurent quotient is an error.
    fn div_exact(&self, other: &Self) -> Result<Self, LaurentError>;
    fn neg(&self) -> Self;
    /// Number of stored terms, used for resource caps.
    fn size(&self) -> usize {
        1
    }
}

impl Scalar for LaurentPoly {
    fn zero() -> Self {
        LaurentPoly::zero()
    }
    fn one() -> Self {
        LaurentPoly::one()
    }
    fn from_i64(c: i64) -> Self {
        LaurentPoly::constant(c)
    }
    fn is_zero(&self) -> bool {
        LaurentPoly::is_zero(self)
    }
    fn add(&self, other: &Self) -> Result<Self, LaurentError> {
        self.try_add(other)
    }
    fn mul(&self, other: &Self) -> Result<Self, LaurentError> {
        self.try_mul(other)
    }
    fn div_exact(&self, other: &Self) -> Result<Self, LaurentError> {
        LaurentPoly::div_exact(self, other)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn size(&self) -> usize {
        self.len()
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(c: i64) -> Self {
        BigRational::from_integer(c.into())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Result<Self, LaurentError> {
        Ok(self + other)
    }
    fn mul(&self, other: &Self) -> Result<Self, LaurentError> {
        Ok(self * other)
    }
    fn div_exact(&self, other: &Self) -> Result<Self, LaurentError> {
        if Zero::is_zero(other) {
            return Err(LaurentError::DivideByZero);
        }
        Ok(self / other)
    }
    fn neg(&self) -> Self {
        -self
    }
}
