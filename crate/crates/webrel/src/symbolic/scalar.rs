//! Arithmetic traits shared by the exact, symbolic and numeric scalar types.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::EvalError;

/// A commutative ring element that can be built from rationals.
pub trait Scalar: Clone + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;

    fn from_int(i: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(i)))
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Scalars carrying partial derivatives with respect to indexed variables.
pub trait Differentiable: Scalar {
    fn derivative(&self, var: usize) -> Self;
}

/// Scalars admitting division.
pub trait Field: Scalar {
    /// `None` when `self` is zero.
    fn inv(&self) -> Option<Self>;

    fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|i| self.mul(&i))
    }
}

/// Numeric fields used when evaluating expressions at a point.
pub trait Numeric: Field {
    fn sqrt(&self) -> Result<Self, EvalError>;
    fn ln(&self) -> Result<Self, EvalError>;
    fn atan(&self) -> Result<Self, EvalError>;
    /// Magnitude used for pivoting and zero tests.
    fn magnitude(&self) -> f64;
    /// True for exact arithmetic, where `is_zero` is reliable.
    fn exact() -> bool;
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Field for BigRational {
    fn inv(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
}

impl Numeric for BigRational {
    fn sqrt(&self) -> Result<Self, EvalError> {
        Err(EvalError::ExactUnsupported("sqrt".into()))
    }
    fn ln(&self) -> Result<Self, EvalError> {
        Err(EvalError::ExactUnsupported("ln".into()))
    }
    fn atan(&self) -> Result<Self, EvalError> {
        Err(EvalError::ExactUnsupported("atan".into()))
    }
    fn magnitude(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn exact() -> bool {
        true
    }
}

/// Targets that expressions can be evaluated into. Partial operations
/// report failures instead of panicking.
pub trait EvalDomain: Scalar {
    /// `None` when the divisor vanishes.
    fn try_div(&self, o: &Self) -> Option<Self>;
    fn try_sqrt(&self) -> Result<Self, EvalError>;
    fn try_ln(&self) -> Result<Self, EvalError>;
    fn try_atan(&self) -> Result<Self, EvalError>;
}

impl EvalDomain for BigRational {
    fn try_div(&self, o: &Self) -> Option<Self> {
        Field::div(self, o)
    }
    fn try_sqrt(&self) -> Result<Self, EvalError> {
        Numeric::sqrt(self)
    }
    fn try_ln(&self) -> Result<Self, EvalError> {
        Numeric::ln(self)
    }
    fn try_atan(&self) -> Result<Self, EvalError> {
        Numeric::atan(self)
    }
}
