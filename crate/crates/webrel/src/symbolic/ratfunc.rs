//! Rational functions in canonical form.
//!
//! A `RatFunc` is `num/den` with `gcd(num, den) = 1` and the leading
//! coefficient of `den` positive, so structural equality is equality of
//! rational functions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{gcd, Poly};
use super::scalar::{Differentiable, EvalDomain, Field, Scalar};
use crate::error::EvalError;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn from_poly(p: Poly) -> Self {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn var(i: usize) -> Self {
        RatFunc::from_poly(Poly::var(i))
    }

    /// `num/den` reduced to canonical form. Panics when `den` is zero.
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFunc::from_poly(Poly::zero());
        }
        let g = gcd(&num, &den);
        let (mut num, mut den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        if !den.leading_sign_positive() {
            num = num.neg();
            den = den.neg();
        }
        RatFunc { num, den }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        let n = self.num.constant_value()?;
        let d = self.den.constant_value()?;
        Some(BigRational::new(n, d))
    }

    /// Evaluates at a rational point; `None` when the denominator vanishes.
    pub fn eval(&self, point: &[BigRational]) -> Option<BigRational> {
        let d = self.den.eval(point);
        if Zero::is_zero(&d) {
            return None;
        }
        Some(self.num.eval(point) / d)
    }

    pub fn to_string_with(&self, names: &[&str]) -> String {
        let n = self.num.to_string_with(names);
        if self.den.is_one() {
            return n;
        }
        let wrap = |p: &Poly, s: String| {
            if p.terms().len() > 1 {
                format!("({s})")
            } else {
                s
            }
        };
        format!(
            "{}/{}",
            wrap(&self.num, n),
            wrap(&self.den, self.den.to_string_with(names))
        )
    }

    fn from_rat(r: &BigRational) -> Self {
        RatFunc {
            num: Poly::constant(r.numer().clone()),
            den: Poly::constant(r.denom().clone()),
        }
    }
}

impl Scalar for RatFunc {
    fn zero() -> Self {
        RatFunc::from_poly(Poly::zero())
    }

    fn one() -> Self {
        RatFunc::from_poly(Poly::one())
    }

    fn from_rational(r: &BigRational) -> Self {
        if Zero::is_zero(r) {
            Self::zero()
        } else {
            Self::from_rat(r)
        }
    }

    fn add(&self, o: &Self) -> Self {
        if self.num.is_zero() {
            return o.clone();
        }
        if o.num.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            if self.den.is_one() {
                return RatFunc::from_poly(self.num.add(&o.num));
            }
            return RatFunc::new(self.num.add(&o.num), self.den.clone());
        }
        if self.den.is_constant() && o.den.is_constant() {
            let a = self.den.constant_value().unwrap();
            let b = o.den.constant_value().unwrap();
            let l = a.lcm(&b);
            let num = self.num.scale(&(&l / &a)).add(&o.num.scale(&(&l / &b)));
            return RatFunc::new(num, Poly::constant(l));
        }
        let g = gcd(&self.den, &o.den);
        let da = self.den.div_exact(&g).unwrap();
        let db = o.den.div_exact(&g).unwrap();
        let num = self.num.mul(&db).add(&o.num.mul(&da));
        RatFunc::new(num, self.den.mul(&db))
    }

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    fn mul(&self, o: &Self) -> Self {
        if self.num.is_zero() || o.num.is_zero() {
            return Self::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return RatFunc::from_poly(self.num.mul(&o.num));
        }
        let g1 = gcd(&self.num, &o.den);
        let g2 = gcd(&o.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = o.den.div_exact(&g1).unwrap();
        let n2 = o.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        let mut num = n1.mul(&n2);
        let mut den = d1.mul(&d2);
        if !den.leading_sign_positive() {
            num = num.neg();
            den = den.neg();
        }
        RatFunc { num, den }
    }

    fn neg(&self) -> Self {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn pow(&self, e: u32) -> Self {
        RatFunc {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }
}

impl Field for RatFunc {
    fn inv(&self) -> Option<Self> {
        if self.num.is_zero() {
            return None;
        }
        let (mut num, mut den) = (self.den.clone(), self.num.clone());
        if !den.leading_sign_positive() {
            num = num.neg();
            den = den.neg();
        }
        Some(RatFunc { num, den })
    }
}

impl Differentiable for RatFunc {
    fn derivative(&self, var: usize) -> Self {
        let dn = self.num.derivative(var);
        if self.den.is_constant() {
            return RatFunc {
                num: dn,
                den: self.den.clone(),
            }
            .normalized_const_den();
        }
        let dd = self.den.derivative(var);
        if dd.is_zero() {
            return RatFunc::new(dn, self.den.clone());
        }
        // (n/d)' = (n'd − nd')/d²; dividing by g = gcd(d, d') keeps the
        // intermediate degree down
        let g = gcd(&self.den, &dd);
        let d_g = self.den.div_exact(&g).unwrap();
        let dd_g = dd.div_exact(&g).unwrap();
        let num = dn.mul(&d_g).sub(&self.num.mul(&dd_g));
        RatFunc::new(num, self.den.mul(&d_g))
    }
}

impl RatFunc {
    fn normalized_const_den(self) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        let d = self.den.constant_value().unwrap();
        let g = self.num.int_content().gcd(&d);
        if g.is_one() {
            return self;
        }
        let mut den = &d / &g;
        let mut num = self.num.div_exact(&Poly::constant(g)).unwrap();
        if den.is_negative() {
            den = -den;
            num = num.neg();
        }
        RatFunc {
            num,
            den: Poly::constant(den),
        }
    }
}

impl EvalDomain for RatFunc {
    fn try_div(&self, o: &Self) -> Option<Self> {
        Field::div(self, o)
    }
    fn try_sqrt(&self) -> Result<Self, EvalError> {
        Err(EvalError::ExactUnsupported("sqrt".into()))
    }
    fn try_ln(&self) -> Result<Self, EvalError> {
        Err(EvalError::ExactUnsupported("ln".into()))
    }
    fn try_atan(&self) -> Result<Self, EvalError> {
        Err(EvalError::ExactUnsupported("atan".into()))
    }
}

impl From<i64> for RatFunc {
    fn from(v: i64) -> Self {
        RatFunc::from_poly(Poly::constant(BigInt::from(v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> RatFunc {
        RatFunc::var(i)
    }

    #[test]
    fn canonical_equality() {
        let x = v(0);
        let y = v(1);
        // (x²−y²)/(x−y) = x+y
        let a = RatFunc::new(
            Poly::var(0).pow(2).sub(&Poly::var(1).pow(2)),
            Poly::var(0).sub(&Poly::var(1)),
        );
        assert_eq!(a, x.add(&y));
        let one = RatFunc::one();
        let b = one.div(&x).unwrap().add(&one.div(&y).unwrap());
        let c = x.add(&y).div(&x.mul(&y)).unwrap();
        assert_eq!(b, c);
        assert!(b.sub(&c).is_zero());
        let neg = RatFunc::new(Poly::one(), Poly::from_i64(-2));
        assert_eq!(neg.to_string_with(&[]), "-1/2");
    }

    #[test]
    fn derivatives() {
        let x = v(0);
        let f = RatFunc::one().div(&x.sub(&RatFunc::one())).unwrap();
        let df = f.derivative(0);
        let expect = RatFunc::from(-1)
            .div(&x.sub(&RatFunc::one()).pow(2))
            .unwrap();
        assert_eq!(df, expect);
        let g = x.mul(&x).mul(&v(1)).derivative(1);
        assert_eq!(g, x.mul(&x));
        let h = RatFunc::new(Poly::var(0), Poly::from_i64(6)).derivative(0);
        assert_eq!(h, RatFunc::new(Poly::one(), Poly::from_i64(6)));
    }
}
