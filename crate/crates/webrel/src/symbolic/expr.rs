//! Expression trees over named variables.
//!
//! Nodes are shared through `Arc`, so derived expressions reuse their
//! operands. The smart constructors fold constants and drop neutral
//! elements but do no further simplification; canonical forms are
//! obtained by converting rational expressions to [`RatFunc`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::ratfunc::RatFunc;
use super::scalar::{EvalDomain, Scalar};
use crate::error::EvalError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sqrt,
    Ln,
    Atan,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Ln => "ln",
            Func::Atan => "atan",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Const(BigRational),
    Var(Arc<str>),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, u32),
    Func(Func, Expr),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn key(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }

    fn wrap(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn constant(c: BigRational) -> Expr {
        Expr::wrap(Node::Const(c))
    }

    pub fn int(i: i64) -> Expr {
        Expr::constant(BigRational::from_integer(BigInt::from(i)))
    }

    pub fn var(name: &str) -> Expr {
        Expr::wrap(Node::Var(Arc::from(name)))
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_one())
    }

    pub fn neg(&self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(a) => a.clone(),
            _ => Expr::wrap(Node::Neg(self.clone())),
        }
    }

    pub fn add(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(a), _) if a.is_zero() => o.clone(),
            (_, Some(b)) if b.is_zero() => self.clone(),
            _ => match o.node() {
                Node::Neg(b) => Expr::wrap(Node::Sub(self.clone(), b.clone())),
                _ => Expr::wrap(Node::Add(self.clone(), o.clone())),
            },
        }
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a - b),
            (Some(a), _) if a.is_zero() => o.neg(),
            (_, Some(b)) if b.is_zero() => self.clone(),
            _ if self.key() == o.key() => Expr::int(0),
            _ => match o.node() {
                Node::Neg(b) => Expr::wrap(Node::Add(self.clone(), b.clone())),
                _ => Expr::wrap(Node::Sub(self.clone(), o.clone())),
            },
        }
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(a), _) if a.is_zero() => Expr::int(0),
            (_, Some(b)) if b.is_zero() => Expr::int(0),
            (Some(a), _) if a.is_one() => o.clone(),
            (_, Some(b)) if b.is_one() => self.clone(),
            (Some(a), _) if (-a).is_one() => o.neg(),
            (_, Some(b)) if (-b).is_one() => self.neg(),
            _ => Expr::wrap(Node::Mul(self.clone(), o.clone())),
        }
    }

    pub fn div(&self, o: &Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) if !b.is_zero() => Expr::constant(a / b),
            (Some(a), _) if a.is_zero() => Expr::int(0),
            (_, Some(b)) if b.is_one() => self.clone(),
            _ => Expr::wrap(Node::Div(self.clone(), o.clone())),
        }
    }

    pub fn pow(&self, e: u32) -> Expr {
        match (self.as_const(), e) {
            (_, 0) => Expr::int(1),
            (_, 1) => self.clone(),
            (Some(a), _) => Expr::constant(num_traits::pow(a.clone(), e as usize)),
            _ => Expr::wrap(Node::Pow(self.clone(), e)),
        }
    }

    pub fn func(f: Func, a: &Expr) -> Expr {
        Expr::wrap(Node::Func(f, a.clone()))
    }

    pub fn sqrt(&self) -> Expr {
        Expr::func(Func::Sqrt, self)
    }

    pub fn ln(&self) -> Expr {
        Expr::func(Func::Ln, self)
    }

    pub fn atan(&self) -> Expr {
        Expr::func(Func::Atan, self)
    }

    /// True when no `sqrt`, `ln` or `atan` occurs.
    pub fn is_rational(&self) -> bool {
        match self.node() {
            Node::Const(_) | Node::Var(_) => true,
            Node::Neg(a) | Node::Pow(a, _) => a.is_rational(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.is_rational() && b.is_rational()
            }
            Node::Func(..) => false,
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(v) => {
                out.insert(v.to_string());
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Func(_, a) => a.collect_vars(out),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Exact partial derivative with respect to `var`.
    pub fn differentiate(&self, var: &str) -> Expr {
        let mut memo = HashMap::new();
        self.diff_memo(var, &mut memo)
    }

    fn diff_memo(&self, var: &str, memo: &mut HashMap<*const Node, Expr>) -> Expr {
        if let Some(d) = memo.get(&self.key()) {
            return d.clone();
        }
        let d = match self.node() {
            Node::Const(_) => Expr::int(0),
            Node::Var(v) => Expr::int(i64::from(&**v == var)),
            Node::Neg(a) => a.diff_memo(var, memo).neg(),
            Node::Add(a, b) => a.diff_memo(var, memo).add(&b.diff_memo(var, memo)),
            Node::Sub(a, b) => a.diff_memo(var, memo).sub(&b.diff_memo(var, memo)),
            Node::Mul(a, b) => {
                let (da, db) = (a.diff_memo(var, memo), b.diff_memo(var, memo));
                da.mul(b).add(&a.mul(&db))
            }
            Node::Div(a, b) => {
                let (da, db) = (a.diff_memo(var, memo), b.diff_memo(var, memo));
                if db.is_zero() {
                    da.div(b)
                } else {
                    da.mul(b).sub(&a.mul(&db)).div(&b.pow(2))
                }
            }
            Node::Pow(a, e) => {
                let da = a.diff_memo(var, memo);
                Expr::int(*e as i64).mul(&a.pow(e - 1)).mul(&da)
            }
            Node::Func(f, a) => {
                let da = a.diff_memo(var, memo);
                if da.is_zero() {
                    Expr::int(0)
                } else {
                    match f {
                        Func::Sqrt => da.div(&Expr::int(2).mul(self)),
                        Func::Ln => da.div(a),
                        Func::Atan => da.div(&Expr::int(1).add(&a.pow(2))),
                    }
                }
            }
        };
        memo.insert(self.key(), d.clone());
        d
    }

    /// Iterated partial derivative `∂^L`, with `vars[j]` differentiated `L[j]` times.
    pub fn derive_multi(&self, vars: &[&str], l: &[u32]) -> Expr {
        let mut e = self.clone();
        for (v, &k) in vars.iter().zip(l) {
            for _ in 0..k {
                e = e.differentiate(v);
            }
        }
        e
    }

    /// Replaces variables by expressions.
    pub fn substitute(&self, map: &HashMap<String, Expr>) -> Expr {
        let mut memo = HashMap::new();
        self.subst_memo(map, &mut memo)
    }

    fn subst_memo(&self, map: &HashMap<String, Expr>, memo: &mut HashMap<*const Node, Expr>) -> Expr {
        if let Some(d) = memo.get(&self.key()) {
            return d.clone();
        }
        let r = match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(v) => map.get(&**v).cloned().unwrap_or_else(|| self.clone()),
            Node::Neg(a) => a.subst_memo(map, memo).neg(),
            Node::Add(a, b) => a.subst_memo(map, memo).add(&b.subst_memo(map, memo)),
            Node::Sub(a, b) => a.subst_memo(map, memo).sub(&b.subst_memo(map, memo)),
            Node::Mul(a, b) => a.subst_memo(map, memo).mul(&b.subst_memo(map, memo)),
            Node::Div(a, b) => a.subst_memo(map, memo).div(&b.subst_memo(map, memo)),
            Node::Pow(a, e) => a.subst_memo(map, memo).pow(*e),
            Node::Func(f, a) => Expr::func(*f, &a.subst_memo(map, memo)),
        };
        memo.insert(self.key(), r.clone());
        r
    }

    /// Evaluates with variables looked up in `env`. Shared subtrees are
    /// evaluated once.
    pub fn eval<S: EvalDomain>(&self, env: &dyn Fn(&str) -> Option<S>) -> Result<S, EvalError> {
        let mut memo = HashMap::new();
        self.eval_memo(env, &mut memo)
    }

    fn eval_memo<S: EvalDomain>(
        &self,
        env: &dyn Fn(&str) -> Option<S>,
        memo: &mut HashMap<*const Node, S>,
    ) -> Result<S, EvalError> {
        if let Some(v) = memo.get(&self.key()) {
            return Ok(v.clone());
        }
        let v = match self.node() {
            Node::Const(c) => S::from_rational(c),
            Node::Var(v) => env(v).ok_or_else(|| EvalError::UnboundVariable(v.to_string()))?,
            Node::Neg(a) => a.eval_memo(env, memo)?.neg(),
            Node::Add(a, b) => a.eval_memo(env, memo)?.add(&b.eval_memo(env, memo)?),
            Node::Sub(a, b) => a.eval_memo(env, memo)?.sub(&b.eval_memo(env, memo)?),
            Node::Mul(a, b) => a.eval_memo(env, memo)?.mul(&b.eval_memo(env, memo)?),
            Node::Div(a, b) => {
                let x = a.eval_memo(env, memo)?;
                let y = b.eval_memo(env, memo)?;
                x.try_div(&y)
                    .ok_or_else(|| EvalError::DivisionByZero(b.to_string()))?
            }
            Node::Pow(a, e) => a.eval_memo(env, memo)?.pow(*e),
            Node::Func(f, a) => {
                let x = a.eval_memo(env, memo)?;
                match f {
                    Func::Sqrt => x.try_sqrt(),
                    Func::Ln => x.try_ln(),
                    Func::Atan => x.try_atan(),
                }
                .map_err(|e| match e {
                    EvalError::DomainError(m) => EvalError::DomainError(format!("{m} in `{self}`")),
                    other => other,
                })?
            }
        };
        memo.insert(self.key(), v.clone());
        Ok(v)
    }

    /// Evaluates at a point given as parallel name/value slices.
    pub fn eval_at<S: EvalDomain>(&self, names: &[&str], values: &[S]) -> Result<S, EvalError> {
        let env = |v: &str| names.iter().position(|n| *n == v).map(|i| values[i].clone());
        self.eval(&env)
    }

    /// Canonical rational function in the given variables.
    pub fn to_ratfunc(&self, vars: &[&str]) -> Result<RatFunc, EvalError> {
        if !self.is_rational() {
            return Err(EvalError::ExactUnsupported(format!("`{self}` is not rational")));
        }
        let vals: Vec<RatFunc> = (0..vars.len()).map(RatFunc::var).collect();
        self.eval_at(vars, &vals)
    }

    /// Builds an expression from a rational function.
    pub fn from_ratfunc(r: &RatFunc, vars: &[&str]) -> Expr {
        let poly = |p: &super::poly::Poly| {
            let mut acc = Expr::int(0);
            for (m, c) in p.terms() {
                let mut t = Expr::constant(BigRational::from_integer(c.clone()));
                for (i, &k) in m.exponents().iter().enumerate() {
                    if k > 0 {
                        t = t.mul(&Expr::var(vars[i]).pow(k));
                    }
                }
                acc = acc.add(&t);
            }
            acc
        };
        poly(r.num()).div(&poly(r.den()))
    }

    fn prec(&self) -> u8 {
        match self.node() {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Const(c) if c.is_negative() => 3,
            Node::Const(c) if !c.is_integer() => 2,
            Node::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => {
                if c.is_integer() {
                    write!(f, "{}", c.numer())
                } else {
                    write!(f, "{}/{}", c.numer(), c.denom())
                }
            }
            Node::Var(v) => write!(f, "{v}"),
            Node::Neg(a) => {
                write!(f, "-")?;
                a.fmt_child(f, 3)
            }
            Node::Add(a, b) => {
                a.fmt_child(f, 1)?;
                write!(f, " + ")?;
                b.fmt_child(f, 2)
            }
            Node::Sub(a, b) => {
                a.fmt_child(f, 1)?;
                write!(f, " - ")?;
                b.fmt_child(f, 2)
            }
            Node::Mul(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, "*")?;
                b.fmt_child(f, 3)
            }
            Node::Div(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, "/")?;
                b.fmt_child(f, 4)
            }
            Node::Pow(a, e) => {
                a.fmt_child(f, 5)?;
                write!(f, "^{e}")
            }
            Node::Func(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Scalar for Expr {
    fn zero() -> Self {
        Expr::int(0)
    }
    fn one() -> Self {
        Expr::int(1)
    }
    fn from_rational(r: &BigRational) -> Self {
        Expr::constant(r.clone())
    }
    fn add(&self, o: &Self) -> Self {
        Expr::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Expr::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Expr::mul(self, o)
    }
    fn neg(&self) -> Self {
        Expr::neg(self)
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
    fn pow(&self, e: u32) -> Self {
        Expr::pow(self, e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse::parse;
    use crate::symbolic::real::{with_digits, Real};
    use crate::symbolic::scalar::Numeric;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn derivative_of_polynomial() {
        let e = parse("x^2 + 2*x*y").unwrap();
        let d = e.differentiate("x").to_ratfunc(&["x", "y"]).unwrap();
        let expect = parse("2*x + 2*y").unwrap().to_ratfunc(&["x", "y"]).unwrap();
        assert_eq!(d, expect);
        let e = parse("x^2*y").unwrap();
        let d = e.derive_multi(&["x", "y"], &[1, 1]).to_ratfunc(&["x", "y"]).unwrap();
        assert_eq!(d, parse("2*x").unwrap().to_ratfunc(&["x", "y"]).unwrap());
        assert_eq!(e.derive_multi(&["x", "y"], &[0, 0]), e);
    }

    #[test]
    fn derivative_of_atan_sqrt() {
        let e = parse("atan(sqrt(y*t))").unwrap();
        let d = e.differentiate("t");
        let expect = parse("y/(2*sqrt(y*t)*(1+y*t))").unwrap();
        with_digits(50, || {
            let names = ["y", "t"];
            let vals = [Real::from_rational(&q(3, 7)), Real::from_rational(&q(5, 2))];
            let a: Real = d.eval_at(&names, &vals).unwrap();
            let b: Real = expect.eval_at(&names, &vals).unwrap();
            assert!(a.sub(&b).magnitude() < 1e-45);
        });
    }

    #[test]
    fn exact_evaluation() {
        let e = parse("x + 2*y").unwrap();
        let v: BigRational = e.eval_at(&["x", "y"], &[q(1, 3), q(1, 6)]).unwrap();
        assert_eq!(v, q(2, 3));
        let e = parse("1/(x-1)").unwrap();
        let r: Result<BigRational, _> = e.eval_at(&["x"], &[q(1, 1)]);
        assert_eq!(r, Err(EvalError::DivisionByZero("x - 1".into())));
        let e = parse("sqrt(x)").unwrap();
        let r: Result<BigRational, _> = e.eval_at(&["x"], &[q(4, 1)]);
        assert!(matches!(r, Err(EvalError::ExactUnsupported(_))));
        let e = parse("ln(x)").unwrap();
        let r: Result<Real, _> = e.eval_at(&["x"], &[Real::from_int(-1)]);
        assert!(matches!(r, Err(EvalError::DomainError(_))));
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "x - (y - z)",
            "-(x + 1)^2",
            "x/(y*z)",
            "(1/2)^3*x",
            "atan(sqrt(y*t))/sqrt(y*t)",
            "-x*-y",
            "x - -3",
        ] {
            let e = parse(s).unwrap();
            let again = parse(&e.to_string()).unwrap();
            let vars = ["x", "y", "z", "t"];
            if e.is_rational() {
                assert_eq!(e.to_ratfunc(&vars), again.to_ratfunc(&vars), "{s} vs {e}");
            } else {
                assert_eq!(e.to_string(), again.to_string());
            }
        }
    }

    #[test]
    fn substitution_composes() {
        let f = parse("u1^2 + u2").unwrap();
        let mut m = HashMap::new();
        m.insert("u1".to_string(), parse("x+y").unwrap());
        m.insert("u2".to_string(), parse("x*y").unwrap());
        let g = f.substitute(&m).to_ratfunc(&["x", "y"]).unwrap();
        let expect = parse("x^2 + 3*x*y + y^2").unwrap().to_ratfunc(&["x", "y"]).unwrap();
        assert_eq!(g, expect);
    }
}
