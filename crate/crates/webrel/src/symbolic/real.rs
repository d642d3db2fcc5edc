//! High-precision reals backed by `astro-float`.
//!
//! The working precision is a per-thread setting; every operation rounds
//! to it. Use [`with_digits`] to run a computation at a given number of
//! decimal digits.

use std::cell::{Cell, RefCell};
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;

use super::scalar::{EvalDomain, Field, Numeric, Scalar};
use crate::error::EvalError;

const RM: RoundingMode = RoundingMode::ToEven;
pub const DEFAULT_DIGITS: usize = 50;

thread_local! {
    static PRECISION: Cell<usize> = const { Cell::new(bits_for(DEFAULT_DIGITS)) };
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

/// Mantissa bits needed for `digits` decimal digits, plus guard bits,
/// rounded up to whole 64-bit words.
pub const fn bits_for(digits: usize) -> usize {
    let bits = (digits * 3322).div_ceil(1000) + 16;
    bits.div_ceil(64) * 64
}

pub fn precision_bits() -> usize {
    PRECISION.with(|p| p.get())
}

/// Runs `f` with the working precision set to `digits` decimal digits.
pub fn with_digits<T>(digits: usize, f: impl FnOnce() -> T) -> T {
    with_bits(bits_for(digits), f)
}

/// Runs `f` at a precision given in mantissa bits. Worker threads use this
/// to inherit the caller's [`precision_bits`].
pub fn with_bits<T>(bits: usize, f: impl FnOnce() -> T) -> T {
    let old = PRECISION.with(|p| p.replace(bits));
    let out = f();
    PRECISION.with(|p| p.set(old));
    out
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Clone)]
pub struct Real(BigFloat);

impl Real {
    pub fn from_f64(v: f64) -> Self {
        Real(BigFloat::from_f64(v, precision_bits()))
    }

    fn from_bigint(i: &BigInt) -> Self {
        let p = precision_bits();
        let s = i.to_string();
        Real(with_consts(|cc| BigFloat::parse(&s, Radix::Dec, p, RM, cc)))
    }

    pub fn parse(s: &str) -> Self {
        let p = precision_bits();
        Real(with_consts(|cc| BigFloat::parse(s, Radix::Dec, p, RM, cc)))
    }

    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    pub fn abs(&self) -> Real {
        Real(self.0.abs())
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive() && !self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    /// Comparison; NaN compares equal to everything.
    pub fn cmp_to(&self, o: &Real) -> std::cmp::Ordering {
        match self.0.cmp(&o.0) {
            Some(c) if c < 0 => std::cmp::Ordering::Less,
            Some(c) if c > 0 => std::cmp::Ordering::Greater,
            _ => std::cmp::Ordering::Equal,
        }
    }

    /// Nearest `f64`, read off the top mantissa word.
    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        match self.0.as_raw_parts() {
            Some((m, _, sign, e, _)) => {
                let top = *m.last().unwrap_or(&0) as f64 / 2f64.powi(64);
                let v = top * 2f64.powi(e);
                if sign == Sign::Neg {
                    -v
                } else {
                    v
                }
            }
            None => f64::NAN,
        }
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let mut v = self.0.clone();
        let _ = v.set_precision(bits_for(digits).max(64), RM);
        with_consts(|cc| v.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into())
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(20))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(20))
    }
}

impl Scalar for Real {
    fn zero() -> Self {
        Real(BigFloat::from_word(0, precision_bits()))
    }
    fn one() -> Self {
        Real(BigFloat::from_word(1, precision_bits()))
    }
    fn from_int(i: i64) -> Self {
        Real(BigFloat::from_i64(i, precision_bits()))
    }
    fn from_rational(r: &BigRational) -> Self {
        let n = Real::from_bigint(r.numer());
        if r.denom() == &BigInt::from(1) {
            return n;
        }
        let d = Real::from_bigint(r.denom());
        Real(n.0.div(&d.0, precision_bits(), RM))
    }
    fn add(&self, o: &Self) -> Self {
        Real(self.0.add(&o.0, precision_bits(), RM))
    }
    fn sub(&self, o: &Self) -> Self {
        Real(self.0.sub(&o.0, precision_bits(), RM))
    }
    fn mul(&self, o: &Self) -> Self {
        Real(self.0.mul(&o.0, precision_bits(), RM))
    }
    fn neg(&self) -> Self {
        Real(self.0.neg())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn pow(&self, e: u32) -> Self {
        Real(self.0.powi(e as usize, precision_bits(), RM))
    }
}

impl Field for Real {
    fn inv(&self) -> Option<Self> {
        (!self.0.is_zero()).then(|| Real(self.0.reciprocal(precision_bits(), RM)))
    }
}

impl Numeric for Real {
    fn sqrt(&self) -> Result<Self, EvalError> {
        if self.is_negative() {
            return Err(EvalError::DomainError(format!("sqrt of negative value {self}")));
        }
        Ok(Real(self.0.sqrt(precision_bits(), RM)))
    }
    fn ln(&self) -> Result<Self, EvalError> {
        if !self.is_positive() {
            return Err(EvalError::DomainError(format!("ln of non-positive value {self}")));
        }
        let p = precision_bits();
        Ok(Real(with_consts(|cc| self.0.ln(p, RM, cc))))
    }
    fn atan(&self) -> Result<Self, EvalError> {
        let p = precision_bits();
        Ok(Real(with_consts(|cc| self.0.atan(p, RM, cc))))
    }
    fn magnitude(&self) -> f64 {
        self.abs().to_f64()
    }
    fn exact() -> bool {
        false
    }
}

impl EvalDomain for Real {
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atan_one_is_quarter_pi() {
        with_digits(50, || {
            let v = Real::one().atan().unwrap();
            let s = v.to_decimal(45);
            assert!(s.starts_with("7.85398163397448309615660845819875721049292349"), "{s}");
        });
    }

    #[test]
    fn rational_conversion() {
        let r = BigRational::new(1.into(), 3.into());
        let v = Real::from_rational(&r).mul(&Real::from_int(3));
        assert!(v.sub(&Real::one()).magnitude() < 1e-45);
        assert!(Real::from_int(-2).sqrt().is_err());
        assert!(Real::zero().ln().is_err());
    }

    #[test]
    fn precision_is_scoped() {
        let before = precision_bits();
        with_digits(100, || assert_eq!(precision_bits(), bits_for(100)));
        assert_eq!(precision_bits(), before);
        assert!(bits_for(50) >= 170);
    }
}
