//! Truncated multivariate Taylor series at a point.
//!
//! A `Jet<F>` of order `N` stores the Taylor coefficients of a function
//! around a base point up to total degree `N`, indexed by a graded monomial
//! table shared per thread. Differentiation lowers the order by one, so a
//! jet of order `N` carries exactly the partial derivatives up to order `N`
//! at the base point. Constants carry no order and behave as exact.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::multi_index::multi_indices;
use super::scalar::{Differentiable, EvalDomain, Field, Numeric, Scalar};
use crate::error::EvalError;

struct Table {
    index: HashMap<Vec<u32>, usize>,
    /// `offsets[h]` is the first index of degree `h`; `offsets[N+1]` the length.
    offsets: Vec<usize>,
    /// Product pairs `(i, j, target)` sorted by target degree.
    pairs: Vec<(usize, usize, usize)>,
    /// `pair_ends[h]`: number of pairs with target degree ≤ h.
    pair_ends: Vec<usize>,
    /// Per variable: `(target, source, factor)` for differentiation.
    deriv: Vec<Vec<(usize, usize, u32)>>,
}

impl Table {
    fn build(nvars: usize, order: u32) -> Table {
        let mut monos = Vec::new();
        let mut offsets = Vec::new();
        for h in 0..=order {
            offsets.push(monos.len());
            monos.extend(multi_indices(nvars, h).into_iter().map(|m| m.0));
        }
        offsets.push(monos.len());
        let index: HashMap<Vec<u32>, usize> =
            monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let deg = |m: &[u32]| m.iter().sum::<u32>();
        let mut pairs = Vec::new();
        for (i, a) in monos.iter().enumerate() {
            for (j, b) in monos.iter().enumerate() {
                if deg(a) + deg(b) <= order {
                    let t: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                    pairs.push((i, j, index[&t]));
                }
            }
        }
        pairs.sort_by_key(|&(_, _, t)| (deg(&monos[t]), t));
        let mut pair_ends = vec![0; order as usize + 1];
        for (h, end) in pair_ends.iter_mut().enumerate() {
            *end = pairs.partition_point(|&(_, _, t)| deg(&monos[t]) as usize <= h);
        }
        let mut deriv = vec![Vec::new(); nvars];
        for (v, dv) in deriv.iter_mut().enumerate() {
            for (t, m) in monos.iter().enumerate() {
                if deg(m) < order {
                    let mut s = m.clone();
                    s[v] += 1;
                    dv.push((t, index[&s], m[v] + 1));
                }
            }
        }
        Table {
            index,
            offsets,
            pairs,
            pair_ends,
            deriv,
        }
    }

    fn len(&self, order: u32) -> usize {
        self.offsets[order as usize + 1]
    }
}

thread_local! {
    static TABLES: RefCell<HashMap<(usize, u32), Rc<Table>>> = RefCell::new(HashMap::new());
}

fn table(nvars: usize, order: u32) -> Rc<Table> {
    TABLES.with(|t| {
        t.borrow_mut()
            .entry((nvars, order))
            .or_insert_with(|| Rc::new(Table::build(nvars, order)))
            .clone()
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet<F> {
    nvars: usize,
    /// `None` for constants.
    order: Option<u32>,
    coeffs: Vec<F>,
}

impl<F: Numeric> Jet<F> {
    pub fn constant(c: F) -> Self {
        Jet {
            nvars: 0,
            order: None,
            coeffs: vec![c],
        }
    }

    /// The coordinate function `x_i` around a base point where it equals `value`.
    pub fn variable(nvars: usize, i: usize, value: F, order: u32) -> Self {
        let t = table(nvars, order);
        let mut coeffs = vec![F::zero(); t.len(order)];
        coeffs[0] = value;
        if order >= 1 {
            let mut m = vec![0; nvars];
            m[i] = 1;
            coeffs[t.index[&m]] = F::one();
        }
        Jet {
            nvars,
            order: Some(order),
            coeffs,
        }
    }

    pub fn order(&self) -> Option<u32> {
        self.order
    }

    pub fn value(&self) -> &F {
        &self.coeffs[0]
    }

    /// Taylor coefficient of `(x − x₀)^m`; zero beyond the order.
    pub fn coeff(&self, m: &[u32]) -> F {
        match self.order {
            None => {
                if m.iter().all(|&k| k == 0) {
                    self.coeffs[0].clone()
                } else {
                    F::zero()
                }
            }
            Some(n) => {
                let t = table(self.nvars, n);
                match t.index.get(m) {
                    Some(&i) if i < self.coeffs.len() => self.coeffs[i].clone(),
                    _ => F::zero(),
                }
            }
        }
    }

    /// Partial derivative `∂^m` at the base point: `m! · coeff(m)`.
    pub fn derivative_at(&self, m: &[u32]) -> F {
        let f: u64 = m.iter().map(|&k| (1..=k as u64).product::<u64>()).product();
        self.coeff(m).mul(&F::from_int(f as i64))
    }

    fn truncate(&self, order: u32) -> Vec<F> {
        let t = table(self.nvars, self.order.unwrap());
        self.coeffs[..t.len(order)].to_vec()
    }

    fn binary(&self, o: &Self, f: impl Fn(&F, &F) -> F, g: impl Fn(&F) -> F) -> Self {
        match (self.order, o.order) {
            (None, None) => Jet::constant(f(&self.coeffs[0], &o.coeffs[0])),
            (Some(_), None) => {
                let mut c = self.coeffs.clone();
                c[0] = f(&c[0], &o.coeffs[0]);
                Jet { coeffs: c, ..self.clone() }
            }
            (None, Some(_)) => {
                let mut c: Vec<F> = o.coeffs.iter().map(&g).collect();
                c[0] = f(&self.coeffs[0], &o.coeffs[0]);
                Jet { coeffs: c, ..o.clone() }
            }
            (Some(a), Some(b)) => {
                let n = a.min(b);
                let x = self.truncate(n);
                let y = o.truncate(n);
                Jet {
                    nvars: self.nvars,
                    order: Some(n),
                    coeffs: x.iter().zip(&y).map(|(p, q)| f(p, q)).collect(),
                }
            }
        }
    }

    fn scale(&self, k: &F) -> Self {
        Jet {
            coeffs: self.coeffs.iter().map(|c| c.mul(k)).collect(),
            ..self.clone()
        }
    }

    /// `Σ c_m (f − f₀)^m` by Horner's rule; `c` must have `order + 1` entries.
    fn compose(&self, c: &[F]) -> Self {
        let n = self.order.expect("compose needs a non-constant jet");
        let mut tilde = self.clone();
        tilde.coeffs[0] = F::zero();
        let mut acc = Jet::constant(c[n as usize].clone());
        for m in (0..n as usize).rev() {
            acc = acc.mul(&tilde);
            acc = acc.add(&Jet::constant(c[m].clone()));
        }
        acc
    }

    fn series_len(&self) -> usize {
        self.order.map_or(1, |n| n as usize + 1)
    }
}

impl<F: Numeric> Scalar for Jet<F> {
    fn zero() -> Self {
        Jet::constant(F::zero())
    }

    fn one() -> Self {
        Jet::constant(F::one())
    }

    fn from_rational(r: &BigRational) -> Self {
        Jet::constant(F::from_rational(r))
    }

    fn add(&self, o: &Self) -> Self {
        self.binary(o, |a, b| a.add(b), |b| b.clone())
    }

    fn sub(&self, o: &Self) -> Self {
        self.binary(o, |a, b| a.sub(b), |b| b.neg())
    }

    fn mul(&self, o: &Self) -> Self {
        match (self.order, o.order) {
            (None, None) => Jet::constant(self.coeffs[0].mul(&o.coeffs[0])),
            (Some(_), None) => self.scale(&o.coeffs[0]),
            (None, Some(_)) => o.scale(&self.coeffs[0]),
            (Some(a), Some(b)) => {
                let n = a.min(b);
                let t = table(self.nvars, a.max(b));
                let mut out = vec![F::zero(); t.len(n)];
                for &(i, j, k) in &t.pairs[..t.pair_ends[n as usize]] {
                    let (x, y) = (&self.coeffs[i], &o.coeffs[j]);
                    if x.is_zero() || y.is_zero() {
                        continue;
                    }
                    out[k] = out[k].add(&x.mul(y));
                }
                Jet {
                    nvars: self.nvars,
                    order: Some(n),
                    coeffs: out,
                }
            }
        }
    }

    fn neg(&self) -> Self {
        Jet {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            ..self.clone()
        }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

impl<F: Numeric> Field for Jet<F> {
    fn inv(&self) -> Option<Self> {
        let f0 = self.value();
        let r = f0.inv()?;
        if self.order.is_none() {
            return Some(Jet::constant(r));
        }
        let mut c = Vec::with_capacity(self.series_len());
        let mut t = r.clone();
        for m in 0..self.series_len() {
            c.push(if m % 2 == 0 { t.clone() } else { t.neg() });
            t = t.mul(&r);
        }
        Some(self.compose(&c))
    }
}

impl<F: Numeric> Differentiable for Jet<F> {
    fn derivative(&self, var: usize) -> Self {
        let n = match self.order {
            None => return Jet::zero(),
            Some(0) => panic!("derivative of an order-0 jet"),
            Some(n) => n,
        };
        let t = table(self.nvars, n);
        let len = t.len(n - 1);
        let mut out = vec![F::zero(); len];
        for &(tg, src, k) in &t.deriv[var] {
            if tg < len {
                out[tg] = self.coeffs[src].mul(&F::from_int(k as i64));
            }
        }
        Jet {
            nvars: self.nvars,
            order: Some(n - 1),
            coeffs: out,
        }
    }
}

impl<F: Numeric> Jet<F> {
    pub fn sqrt(&self) -> Result<Self, EvalError> {
        let f0 = self.value();
        let s0 = f0.sqrt()?;
        if self.order.is_none() {
            return Ok(Jet::constant(s0));
        }
        let r = f0
            .inv()
            .ok_or_else(|| EvalError::DomainError("sqrt is not differentiable at 0".into()))?;
        let mut c = Vec::with_capacity(self.series_len());
        let mut b = <BigRational as num_traits::One>::one();
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let mut rp = F::one();
        for m in 0..self.series_len() {
            if m > 0 {
                let mm = BigRational::from_integer(BigInt::from(m as i64));
                b = b * (&half - (&mm - <BigRational as num_traits::One>::one())) / mm;
                rp = rp.mul(&r);
            }
            c.push(s0.mul(&F::from_rational(&b)).mul(&rp));
        }
        Ok(self.compose(&c))
    }

    pub fn ln(&self) -> Result<Self, EvalError> {
        let f0 = self.value();
        let l0 = f0.ln()?;
        if self.order.is_none() {
            return Ok(Jet::constant(l0));
        }
        let r = f0.inv().unwrap();
        let mut c = vec![l0];
        let mut rp = F::one();
        for m in 1..self.series_len() {
            rp = rp.mul(&r);
            let v = rp.mul(&F::from_rational(&BigRational::new(1.into(), (m as i64).into())));
            c.push(if m % 2 == 1 { v } else { v.neg() });
        }
        Ok(self.compose(&c))
    }

    pub fn atan(&self) -> Result<Self, EvalError> {
        let f0 = self.value().clone();
        let a0 = f0.atan()?;
        if self.order.is_none() {
            return Ok(Jet::constant(a0));
        }
        let len = self.series_len();
        let ainv = F::one().add(&f0.mul(&f0)).inv().unwrap();
        let two_f0 = f0.mul(&F::from_int(2));
        let mut s: Vec<F> = Vec::with_capacity(len);
        for k in 0..len {
            let v = match k {
                0 => ainv.clone(),
                1 => two_f0.mul(&s[0]).neg().mul(&ainv),
                _ => two_f0.mul(&s[k - 1]).add(&s[k - 2]).neg().mul(&ainv),
            };
            s.push(v);
        }
        let mut c = vec![a0];
        for m in 1..len {
            c.push(s[m - 1].mul(&F::from_rational(&BigRational::new(1.into(), (m as i64).into()))));
        }
        Ok(self.compose(&c))
    }
}

impl<F: Numeric> EvalDomain for Jet<F> {
    fn try_div(&self, o: &Self) -> Option<Self> {
        Field::div(self, o)
    }
    fn try_sqrt(&self) -> Result<Self, EvalError> {
        self.sqrt()
    }
    fn try_ln(&self) -> Result<Self, EvalError> {
        self.ln()
    }
    fn try_atan(&self) -> Result<Self, EvalError> {
        self.atan()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse::parse;
    use crate::symbolic::real::{with_digits, Real};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn jets(point: &[BigRational], order: u32) -> Vec<Jet<BigRational>> {
        (0..point.len())
            .map(|i| Jet::variable(point.len(), i, point[i].clone(), order))
            .collect()
    }

    #[test]
    fn rational_jets_match_symbolic_derivatives() {
        let vars = ["x", "y"];
        let e = parse("(x^2*y + 3)/(1 + x - y^2)").unwrap();
        let pt = [q(1, 3), q(-2, 5)];
        let j: Jet<BigRational> = e.eval_at(&vars, &jets(&pt, 3)).unwrap();
        for m in [[0, 0], [1, 0], [0, 1], [2, 1], [1, 2], [0, 3]] {
            let d = e.derive_multi(&vars, &m);
            let expect: BigRational = d.eval_at(&vars, &pt).unwrap();
            assert_eq!(j.derivative_at(&m), expect, "{m:?}");
        }
        let dx = j.derivative(0);
        assert_eq!(dx.order(), Some(2));
        assert_eq!(dx.derivative_at(&[1, 1]), j.derivative_at(&[2, 1]));
    }

    #[test]
    fn transcendental_jets_match_symbolic_derivatives() {
        with_digits(50, || {
            let vars = ["y", "t"];
            let e = parse("atan(sqrt(y*t))/sqrt(y*t) + ln(1 + y^2)").unwrap();
            let pt = [Real::from_rational(&q(3, 7)), Real::from_rational(&q(5, 2))];
            let js: Vec<Jet<Real>> = (0..2).map(|i| Jet::variable(2, i, pt[i].clone(), 3)).collect();
            let j: Jet<Real> = e.eval_at(&vars, &js).unwrap();
            for m in [[0, 0], [1, 0], [1, 1], [0, 3], [2, 1]] {
                let expect: Real = e.derive_multi(&vars, &m).eval_at(&vars, &pt).unwrap();
                let got = j.derivative_at(&m);
                assert!(got.sub(&expect).magnitude() <= 1e-40 * expect.magnitude().max(1.0), "{m:?}");
            }
        });
    }

    #[test]
    fn domain_errors() {
        with_digits(30, || {
            let x = Jet::variable(1, 0, Real::from_int(-1), 2);
            assert!(x.sqrt().is_err());
            assert!(x.ln().is_err());
            let z = Jet::variable(1, 0, Real::zero(), 2);
            assert!(z.inv().is_none());
        });
    }
}
