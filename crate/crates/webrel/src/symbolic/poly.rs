//! Sparse multivariate polynomials with integer coefficients.
//!
//! Variables are identified by position. Exponent vectors carry no
//! trailing zeros, so polynomials over different numbers of variables
//! mix freely. Terms are kept in decreasing graded-lex order.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Mono(Vec<u32>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn var(i: usize) -> Self {
        let mut v = vec![0; i + 1];
        v[i] = 1;
        Mono(v)
    }

    pub fn from_exponents(mut e: Vec<u32>) -> Self {
        while e.last() == Some(&0) {
            e.pop();
        }
        Mono(e)
    }

    pub fn exp(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let len = self.0.len().max(o.0.len());
        Mono((0..len).map(|i| self.exp(i) + o.exp(i)).collect())
    }

    /// `self / o` when `o` divides `self`.
    pub fn div(&self, o: &Mono) -> Option<Mono> {
        if o.0.len() > self.0.len() {
            return None;
        }
        let mut e = self.0.clone();
        for (i, &k) in o.0.iter().enumerate() {
            if e[i] < k {
                return None;
            }
            e[i] -= k;
        }
        Some(Mono::from_exponents(e))
    }

    pub fn gcd(&self, o: &Mono) -> Mono {
        let len = self.0.len().min(o.0.len());
        Mono::from_exponents((0..len).map(|i| self.0[i].min(o.0[i])).collect())
    }

    fn with_exp(&self, i: usize, k: u32) -> Mono {
        let mut e = self.0.clone();
        if e.len() <= i {
            e.resize(i + 1, 0);
        }
        e[i] = k;
        Mono::from_exponents(e)
    }

    /// Graded lexicographic comparison.
    pub fn grlex(&self, o: &Mono) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| {
            let len = self.0.len().max(o.0.len());
            for i in 0..len {
                match self.exp(i).cmp(&o.exp(i)) {
                    Ordering::Equal => continue,
                    c => return c,
                }
            }
            Ordering::Equal
        })
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    terms: Vec<(Mono, BigInt)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly {
                terms: vec![(Mono::one(), c)],
            }
        }
    }

    pub fn from_i64(c: i64) -> Self {
        Poly::constant(BigInt::from(c))
    }

    pub fn var(i: usize) -> Self {
        Poly {
            terms: vec![(Mono::var(i), BigInt::one())],
        }
    }

    pub fn monomial(m: Mono, c: BigInt) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Builds a polynomial from unsorted terms, merging duplicates.
    pub fn from_terms(terms: impl IntoIterator<Item = (Mono, BigInt)>) -> Self {
        let mut map: HashMap<Mono, BigInt> = HashMap::new();
        for (m, c) in terms {
            *map.entry(m).or_insert_with(BigInt::zero) += c;
        }
        let mut terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| b.0.grlex(&a.0));
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Mono, BigInt)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn constant_value(&self) -> Option<BigInt> {
        match self.terms.as_slice() {
            [] => Some(BigInt::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn leading(&self) -> Option<&(Mono, BigInt)> {
        self.terms.first()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.iter().map(|(m, _)| m.exp(v)).max().unwrap_or(0)
    }

    /// Number of variable slots in use.
    pub fn nvars(&self) -> usize {
        self.terms.iter().map(|(m, _)| m.0.len()).max().unwrap_or(0)
    }

    pub fn uses_var(&self, v: usize) -> bool {
        self.terms.iter().any(|(m, _)| m.exp(v) > 0)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &o.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        while i < a.len() && j < b.len() {
            match a[i].0.grlex(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &a[i].1 + &b[j].1;
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Poly { terms: out }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    /// Divides every coefficient by `k`, which must divide them all.
    fn scale_down(&self, k: &BigInt) -> Poly {
        if k.is_one() || k.is_zero() {
            return self.clone();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c / k)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Mono, k: &BigInt) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        // multiplying by a monomial preserves the term order
        Poly {
            terms: self.terms.iter().map(|(t, c)| (t.mul(m), c * k)).collect(),
        }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        if o.terms.len() == 1 {
            return self.mul_term(&o.terms[0].0, &o.terms[0].1);
        }
        if self.terms.len() == 1 {
            return o.mul_term(&self.terms[0].0, &self.terms[0].1);
        }
        let mut map: HashMap<Mono, BigInt> =
            HashMap::with_capacity(self.terms.len() * o.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                *map.entry(ma.mul(mb)).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        let mut terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| b.0.grlex(&a.0));
        Poly { terms }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self, v: usize) -> Poly {
        Poly::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let k = m.exp(v);
            (k > 0).then(|| (m.with_exp(v, k - 1), c * BigInt::from(k)))
        }))
    }

    /// Evaluates at a rational point; missing coordinates count as zero.
    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for (i, &k) in m.0.iter().enumerate() {
                if k > 0 {
                    let x = point.get(i).cloned().unwrap_or_else(BigRational::zero);
                    t *= num_traits::pow(x, k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Replaces variable `v` by the polynomial `r`.
    pub fn substitute(&self, v: usize, r: &Poly) -> Poly {
        let coeffs = self.coeffs_in(v);
        let mut acc = Poly::zero();
        for c in coeffs.iter().rev() {
            acc = acc.mul(r).add(c);
        }
        acc
    }

    /// Coefficients with respect to variable `v`, lowest degree first.
    pub fn coeffs_in(&self, v: usize) -> Vec<Poly> {
        let deg = self.degree_in(v) as usize;
        let mut buckets: Vec<Vec<(Mono, BigInt)>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.terms {
            let k = m.exp(v) as usize;
            buckets[k].push((m.with_exp(v, 0), c.clone()));
        }
        buckets
            .into_iter()
            .map(|mut t| {
                t.sort_by(|a, b| b.0.grlex(&a.0));
                Poly { terms: t }
            })
            .collect()
    }

    /// Inverse of [`Poly::coeffs_in`].
    pub fn from_coeffs_in(v: usize, coeffs: &[Poly]) -> Poly {
        Poly::from_terms(coeffs.iter().enumerate().flat_map(|(k, c)| {
            c.terms
                .iter()
                .map(move |(m, a)| (m.with_exp(v, k as u32), a.clone()))
        }))
    }

    /// Gcd of the integer coefficients, positive.
    pub fn int_content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn mono_content(&self) -> Mono {
        let mut it = self.terms.iter();
        match it.next() {
            None => Mono::one(),
            Some((m, _)) => it.fold(m.clone(), |g, (m, _)| g.gcd(m)),
        }
    }

    pub fn leading_sign_positive(&self) -> bool {
        self.terms.first().is_none_or(|(_, c)| c.is_positive())
    }

    /// Exact quotient when `d` divides `self`, otherwise `None`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(k) = d.constant_value() {
            let mut terms = Vec::with_capacity(self.terms.len());
            for (m, c) in &self.terms {
                let (q, r) = c.div_rem(&k);
                if !r.is_zero() {
                    return None;
                }
                terms.push((m.clone(), q));
            }
            return Some(Poly { terms });
        }
        let (dm, dc) = &d.terms[0];
        if d.terms.len() == 1 {
            let mut terms = Vec::with_capacity(self.terms.len());
            for (m, c) in &self.terms {
                let (q, r) = c.div_rem(dc);
                if !r.is_zero() {
                    return None;
                }
                terms.push((m.div(dm)?, q));
            }
            return Some(Poly { terms });
        }
        if self.total_degree() < d.total_degree() {
            return None;
        }
        for v in 0..d.nvars() {
            if d.degree_in(v) > self.degree_in(v) {
                return None;
            }
        }
        let mut rem = self.clone();
        let mut quot: Vec<(Mono, BigInt)> = Vec::new();
        while let Some((rm, rc)) = rem.terms.first().cloned() {
            let m = rm.div(dm)?;
            let (c, r) = rc.div_rem(dc);
            if !r.is_zero() {
                return None;
            }
            rem = rem.sub(&d.mul_term(&m, &c));
            quot.push((m, c));
        }
        Some(Poly::from_terms(quot))
    }

    /// Pseudo-remainder of `self` by `d` in variable `v`.
    fn prem(&self, d: &Poly, v: usize) -> Poly {
        let dd = d.degree_in(v);
        let dc = d.coeffs_in(v);
        let lc = dc[dd as usize].clone();
        let mut r = self.clone();
        while !r.is_zero() && r.degree_in(v) >= dd {
            let rd = r.degree_in(v);
            let rc = r.coeffs_in(v);
            let lr = &rc[rd as usize];
            let shift = Poly::monomial(Mono::one().with_exp(v, rd - dd), BigInt::one());
            r = r.mul(&lc).sub(&d.mul(lr).mul(&shift));
        }
        r
    }

    /// Content with respect to `v`: gcd of the coefficients in `v`.
    fn content_in(&self, v: usize) -> Poly {
        let mut g = Poly::zero();
        for c in self.coeffs_in(v) {
            if c.is_zero() {
                continue;
            }
            g = gcd(&g, &c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Makes the leading coefficient positive.
    pub fn normalize_sign(self) -> Poly {
        if self.leading_sign_positive() {
            self
        } else {
            self.neg()
        }
    }

    pub fn to_string_with(&self, names: &[&str]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            for (i, &k) in m.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let name = names.get(i).map(|n| n.to_string()).unwrap_or_else(|| format!("x{i}"));
                factors.push(if k == 1 { name } else { format!("{name}^{k}") });
            }
            if factors.is_empty() {
                let _ = write!(s, "{a}");
            } else {
                if !a.is_one() {
                    let _ = write!(s, "{a}*");
                }
                s.push_str(&factors.join("*"));
            }
        }
        s
    }
}

/// Greatest common divisor, normalized to a positive leading coefficient.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.clone().normalize_sign();
    }
    if b.is_zero() {
        return a.clone().normalize_sign();
    }
    if a == b {
        return a.clone().normalize_sign();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::constant(a.int_content().gcd(&b.int_content()));
    }
    if a.is_monomial() || b.is_monomial() {
        let m = a.mono_content().gcd(&b.mono_content());
        return Poly::monomial(m, a.int_content().gcd(&b.int_content()));
    }
    // peel the common monomial factor first; it keeps the recursion small
    let (ma, mb) = (a.mono_content(), b.mono_content());
    if !ma.is_one() || !mb.is_one() {
        let m = ma.gcd(&mb);
        let a1 = a.div_exact(&Poly::monomial(ma, BigInt::one())).unwrap();
        let b1 = b.div_exact(&Poly::monomial(mb, BigInt::one())).unwrap();
        return gcd(&a1, &b1).mul_term(&m, &BigInt::one());
    }
    if b.terms.len() <= a.terms.len() {
        if a.div_exact(b).is_some() {
            return b.clone().normalize_sign();
        }
    } else if b.div_exact(a).is_some() {
        return a.clone().normalize_sign();
    }
    if images_coprime(a, b) {
        return Poly::constant(a.int_content().gcd(&b.int_content()));
    }
    if let Some(g) = heuristic_gcd(a, b) {
        return g;
    }
    let nv = a.nvars().max(b.nvars());
    // a variable present in only one argument reduces to a content gcd
    for v in 0..nv {
        match (a.uses_var(v), b.uses_var(v)) {
            (true, false) => return gcd(&a.content_in(v), b),
            (false, true) => return gcd(a, &b.content_in(v)),
            _ => {}
        }
    }
    let v = (0..nv)
        .filter(|&v| a.uses_var(v))
        .min_by_key(|&v| a.degree_in(v).max(b.degree_in(v)))
        .expect("non-constant polynomial uses some variable");
    let (ca, cb) = (a.content_in(v), b.content_in(v));
    let g_content = gcd(&ca, &cb);
    let mut pa = a.div_exact(&ca).expect("content divides");
    let mut pb = b.div_exact(&cb).expect("content divides");
    if pa.degree_in(v) < pb.degree_in(v) {
        std::mem::swap(&mut pa, &mut pb);
    }
    while !pb.is_zero() {
        let r = pa.prem(&pb, v);
        pa = pb;
        if r.is_zero() {
            pb = Poly::zero();
        } else if r.degree_in(v) == 0 {
            // a remainder free of v means the primitive parts are coprime
            pa = Poly::one();
            pb = Poly::zero();
        } else {
            let c = r.content_in(v);
            pb = r.div_exact(&c).expect("content divides");
        }
    }
    let prim = if pa.degree_in(v) == 0 {
        Poly::one()
    } else {
        let c = pa.content_in(v);
        pa.div_exact(&c).expect("content divides")
    };
    prim.mul(&g_content).normalize_sign()
}

const PRIME: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn powmod(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b);
        }
        b = mulmod(b, b);
        e >>= 1;
    }
    r
}

fn residue(c: &BigInt) -> u64 {
    let m = c.mod_floor(&BigInt::from(PRIME));
    u64::try_from(m).expect("reduced residue fits")
}

fn eval_mod(p: &Poly, point: &[u64]) -> u64 {
    p.terms.iter().fold(0, |acc, (m, c)| {
        let t = m.exponents().iter().enumerate().fold(residue(c), |t, (i, &e)| {
            if e == 0 {
                t
            } else {
                mulmod(t, powmod(point[i], e as u64))
            }
        });
        (acc + t) % PRIME
    })
}

/// Degree of the gcd of two univariate polynomials over `Z/PRIME`,
/// coefficients lowest degree first.
fn univariate_gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
    let trim = |v: &mut Vec<u64>| {
        while v.last() == Some(&0) {
            v.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let inv = powmod(*b.last().unwrap(), PRIME - 2);
        while a.len() >= b.len() {
            let f = mulmod(*a.last().unwrap(), inv);
            let shift = a.len() - b.len();
            for (i, &c) in b.iter().enumerate() {
                a[shift + i] = (a[shift + i] + PRIME - mulmod(f, c)) % PRIME;
            }
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Sufficient test for `gcd(a, b)` being an integer: for each shared
/// variable `v`, images at a point where the leading coefficient of `a` in
/// `v` stays nonzero have a constant gcd, so the true gcd has degree zero in `v`.
fn images_coprime(a: &Poly, b: &Poly) -> bool {
    let nv = a.nvars().max(b.nvars());
    let mut seed: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut next = || {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        seed % PRIME
    };
    (0..nv).filter(|&v| a.uses_var(v) && b.uses_var(v)).all(|v| {
        let (ca, cb) = (a.coeffs_in(v), b.coeffs_in(v));
        (0..3).any(|_| {
            let point: Vec<u64> = (0..nv).map(|_| next()).collect();
            let ia: Vec<u64> = ca.iter().map(|c| eval_mod(c, &point)).collect();
            if *ia.last().unwrap() == 0 {
                return false;
            }
            let ib: Vec<u64> = cb.iter().map(|c| eval_mod(c, &point)).collect();
            univariate_gcd_degree(ia, ib) == 0
        })
    })
}

fn max_norm(p: &Poly) -> BigInt {
    p.terms.iter().map(|(_, c)| c.abs()).max().unwrap_or_default()
}

/// Heuristic gcd: evaluate one variable at a large integer `ξ`, take the gcd
/// of the images, and lift it back by symmetric `ξ`-adic expansion. A lift
/// that divides both arguments is the gcd once `ξ` exceeds twice the smaller
/// coefficient norm. Returns `None` when no attempt verifies.
fn heuristic_gcd(a: &Poly, b: &Poly) -> Option<Poly> {
    let v = (0..a.nvars().max(b.nvars())).rev().find(|&v| a.uses_var(v) || b.uses_var(v))?;
    let (ca, cb) = (a.int_content(), b.int_content());
    let c = ca.gcd(&cb);
    let a = a.scale_down(&ca);
    let b = b.scale_down(&cb);
    let mut xi: BigInt = max_norm(&a).min(max_norm(&b)) * 2 + 29;
    for _ in 0..6 {
        let at = Poly::constant(xi.clone());
        let (ia, ib) = (a.substitute(v, &at), b.substitute(v, &at));
        if !ia.is_zero() && !ib.is_zero() {
            let img = gcd(&ia, &ib);
            let g = lift(&img, &xi, v);
            if !g.is_zero() {
                let g = g.scale_down(&g.int_content());
                if a.div_exact(&g).is_some() && b.div_exact(&g).is_some() {
                    return Some(g.scale(&c).normalize_sign());
                }
            }
        }
        xi = xi * 73794 / 27011u32;
    }
    None
}

/// Inverse of evaluating `v` at `xi`, reading each integer coefficient in the
/// symmetric base `xi`.
fn lift(img: &Poly, xi: &BigInt, v: usize) -> Poly {
    let half = xi / 2;
    let mut terms = Vec::new();
    for (m, c) in &img.terms {
        let mut c = c.clone();
        let mut k = 0;
        while !c.is_zero() {
            let mut e = c.mod_floor(xi);
            if e > half {
                e -= xi;
            }
            if !e.is_zero() {
                terms.push((m.with_exp(v, k), e.clone()));
            }
            c = (c - e) / xi;
            k += 1;
        }
    }
    Poly::from_terms(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::var(0)
    }
    fn y() -> Poly {
        Poly::var(1)
    }
    fn z() -> Poly {
        Poly::var(2)
    }
    fn k(c: i64) -> Poly {
        Poly::from_i64(c)
    }

    #[test]
    fn arithmetic_and_order() {
        let p = x().add(&y()).pow(2);
        assert_eq!(p.to_string_with(&["x", "y"]), "x^2 + 2*x*y + y^2");
        let q = x().sub(&y()).mul(&x().add(&y()));
        assert_eq!(q.to_string_with(&["x", "y"]), "x^2 - y^2");
        assert!(x().sub(&x()).is_zero());
        assert_eq!(k(3).mul(&z()).to_string_with(&["x", "y", "z"]), "3*z");
    }

    #[test]
    fn derivative_and_eval() {
        let p = x().pow(2).add(&k(2).mul(&x()).mul(&y()));
        let dx = p.derivative(0);
        assert_eq!(dx, k(2).mul(&x()).add(&k(2).mul(&y())));
        let pt = [
            BigRational::new(1.into(), 3.into()),
            BigRational::new(1.into(), 6.into()),
        ];
        assert_eq!(x().add(&k(2).mul(&y())).eval(&pt), BigRational::new(2.into(), 3.into()));
    }

    #[test]
    fn exact_division() {
        let a = x().add(&y()).mul(&x().sub(&k(2).mul(&z())));
        assert_eq!(a.div_exact(&x().add(&y())), Some(x().sub(&k(2).mul(&z()))));
        assert_eq!(a.div_exact(&x().add(&k(1))), None);
        assert_eq!(k(6).mul(&x()).div_exact(&k(4)), None);
    }

    #[test]
    fn gcds_with_shared_cubic_factors() {
        let f = x().pow(3).sub(&k(7).mul(&x()).mul(&y()).mul(&z())).add(&k(5).mul(&z().pow(2))).add(&k(3));
        let g = y().pow(2).add(&k(4).mul(&x()).mul(&z())).sub(&k(9));
        let h = x().add(&k(2).mul(&y())).sub(&z().pow(3)).add(&k(11));
        assert_eq!(gcd(&f.mul(&g).scale(&6.into()), &f.mul(&h).scale(&4.into())), f.scale(&2.into()).normalize_sign());
        assert_eq!(gcd(&g.mul(&h), &f.mul(&h).neg()), h.clone().normalize_sign());
        assert!(images_coprime(&f, &g));
        assert!(!images_coprime(&f.mul(&g), &f.mul(&h)));
    }

    #[test]
    fn gcds() {
        let f = x().add(&y()).pow(2).mul(&z().sub(&k(1)));
        let g = x().add(&y()).mul(&z().add(&k(1))).mul(&k(6));
        assert_eq!(gcd(&f, &g), x().add(&y()));
        let h = x().mul(&y()).add(&k(1));
        let u = h.mul(&x().pow(3).sub(&z())).scale(&4.into());
        let w = h.mul(&y().pow(2).add(&z())).scale(&(-6).into());
        assert_eq!(gcd(&u, &w), h.scale(&2.into()));
        assert_eq!(gcd(&x().pow(2).mul(&y()), &x().mul(&y().pow(3))), x().mul(&y()));
        assert!(gcd(&x().add(&k(1)), &x().sub(&k(1))).is_one());
        assert_eq!(gcd(&Poly::zero(), &x().neg()), x());
    }

    #[test]
    fn substitution() {
        let p = x().pow(2).add(&y());
        let r = p.substitute(0, &y().add(&k(1)));
        assert_eq!(r, y().pow(2).add(&k(3).mul(&y())).add(&k(1)));
    }
}
