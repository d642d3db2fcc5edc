//! Dense matrices over the scalar types, with exact and numeric elimination.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{gcd, Poly};
use super::ratfunc::RatFunc;
use super::scalar::{Field, Numeric, Scalar};
use crate::error::LinalgError;

#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: fmt::Debug> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        Ok(())
    }
}

impl<S: Clone> Matrix<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &S {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<S> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn map<T: Clone>(&self, f: impl FnMut(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map<T: Clone, E>(&self, f: impl FnMut(&S) -> Result<T, E>) -> Result<Matrix<T>, E> {
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Matrix::from_fn(idx.len(), self.cols, |r, c| self.get(idx[r], c).clone())
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Matrix::from_fn(self.rows, idx.len(), |r, c| self.get(r, idx[c]).clone())
    }

    pub fn hstack(&self, o: &Matrix<S>) -> Self {
        assert_eq!(self.rows, o.rows, "hstack row mismatch");
        Matrix::from_fn(self.rows, self.cols + o.cols, |r, c| {
            if c < self.cols {
                self.get(r, c).clone()
            } else {
                o.get(r, c - self.cols).clone()
            }
        })
    }

    pub fn vstack(&self, o: &Matrix<S>) -> Self {
        assert_eq!(self.cols, o.cols, "vstack column mismatch");
        let mut data = self.data.clone();
        data.extend(o.data.iter().cloned());
        Matrix::new(self.rows + o.rows, self.cols, data)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::new(rows, cols, vec![S::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |r, c| if r == c { S::one() } else { S::zero() })
    }

    pub fn mul(&self, o: &Matrix<S>) -> Self {
        assert_eq!(self.cols, o.rows, "product shape mismatch");
        Matrix::from_fn(self.rows, o.cols, |r, c| {
            let mut acc = S::zero();
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                let b = o.get(k, c);
                if !b.is_zero() {
                    acc = acc.add(&a.mul(b));
                }
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "vector length mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = S::zero();
                for (a, b) in self.row(r).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Determinant by cofactor expansion along the first row. Meant for
    /// small matrices over rings without division.
    pub fn det_cofactor(&self) -> Result<S, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NonSquare(self.rows, self.cols));
        }
        fn rec<S: Scalar>(m: &Matrix<S>, rows: &[usize], cols: &[usize]) -> S {
            if rows.is_empty() {
                return S::one();
            }
            let r = rows[0];
            let mut acc = S::zero();
            for (j, &c) in cols.iter().enumerate() {
                let a = m.get(r, c);
                if a.is_zero() {
                    continue;
                }
                let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let t = a.mul(&rec(m, &rows[1..], &rest));
                acc = if j % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
            }
            acc
        }
        let idx: Vec<usize> = (0..self.rows).collect();
        Ok(rec(self, &idx, &idx))
    }
}

/// Exact fields for Gauss-Jordan elimination.
pub trait ExactField: Field {
    /// Rough cost of the entry, used to prefer cheap pivots.
    fn size(&self) -> usize;
    /// Scales a vector so that no entry has a denominator.
    fn clear_denominators(v: &mut [Self]);
}

impl ExactField for BigRational {
    fn size(&self) -> usize {
        (self.numer().bits() + self.denom().bits()) as usize
    }

    fn clear_denominators(v: &mut [Self]) {
        let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(&(x.numer() * (&l / x.denom()))));
        if g.is_zero() {
            return;
        }
        let k = BigRational::new(l, g);
        for x in v.iter_mut() {
            *x = &*x * &k;
        }
    }
}

impl ExactField for RatFunc {
    fn size(&self) -> usize {
        let weight = |p: &Poly| p.terms().len() * (1 + p.total_degree() as usize);
        weight(self.num()) + weight(self.den()) - 1
    }

    fn clear_denominators(v: &mut [Self]) {
        let mut l = Poly::one();
        for x in v.iter() {
            if !x.den().is_one() {
                let g = gcd(&l, x.den());
                l = l.mul(&x.den().div_exact(&g).unwrap());
            }
        }
        let lf = RatFunc::from_poly(l);
        for x in v.iter_mut() {
            *x = x.mul(&lf);
        }
        let mut g = Poly::zero();
        for x in v.iter() {
            if !x.is_zero() {
                g = gcd(&g, x.num());
            }
        }
        if !g.is_zero() && !g.is_one() {
            let gf = RatFunc::from_poly(g);
            for x in v.iter_mut() {
                *x = x.div(&gf).unwrap();
            }
        }
        if let Some(first) = v.iter().find(|x| !x.is_zero()) {
            if !first.num().leading_sign_positive() {
                for x in v.iter_mut() {
                    *x = x.neg();
                }
            }
        }
    }
}

/// Reduced row echelon form with its pivot columns.
#[derive(Clone, Debug)]
pub struct Rref<S> {
    pub matrix: Matrix<S>,
    pub pivots: Vec<usize>,
}

impl<S: ExactField> Matrix<S> {
    /// Gauss-Jordan elimination to reduced row echelon form.
    pub fn rref(&self) -> Rref<S> {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let best = (r..m.rows)
                .filter(|&i| !m.get(i, c).is_zero())
                .min_by_key(|&i| m.get(i, c).size());
            let Some(p) = best else { continue };
            m.swap_rows(r, p);
            let inv = m.get(r, c).inv().unwrap();
            for j in c..m.cols {
                let v = m.get(r, j).mul(&inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in c..m.cols {
                    let a = m.get(r, j);
                    if a.is_zero() {
                        continue;
                    }
                    let v = m.get(i, j).sub(&f.mul(a));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref { matrix: m, pivots }
    }

    pub fn rank_exact(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Basis of the right kernel read off the reduced echelon form, one
    /// vector per free column, with denominators cleared.
    pub fn kernel(&self) -> Vec<Vec<S>> {
        let Rref { matrix, pivots } = self.rref();
        let mut out = Vec::new();
        for f in 0..self.cols {
            if pivots.contains(&f) {
                continue;
            }
            let mut v = vec![S::zero(); self.cols];
            v[f] = S::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = matrix.get(r, f).neg();
            }
            S::clear_denominators(&mut v);
            out.push(v);
        }
        out
    }

    /// A solution of `self · x = b`, with free variables set to zero.
    pub fn solve(&self, b: &[S]) -> Result<Vec<S>, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::Shape(format!(
                "right-hand side has {} entries for {} rows",
                b.len(),
                self.rows
            )));
        }
        let aug = self.hstack(&Matrix::new(self.rows, 1, b.to_vec()));
        let Rref { matrix, pivots } = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Err(LinalgError::Inconsistent);
        }
        let mut x = vec![S::zero(); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = matrix.get(r, self.cols).clone();
        }
        Ok(x)
    }

    /// Unique solution of a square invertible system.
    pub fn solve_unique(&self, b: &[S]) -> Result<Vec<S>, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NonSquare(self.rows, self.cols));
        }
        if self.rank_exact() < self.cols {
            return Err(LinalgError::Singular);
        }
        self.solve(b)
    }

    /// Solves `self · X = B` column by column; every column must be consistent.
    /// Pivots are chosen over all unpivoted columns by size, which keeps
    /// symbolic entries small when the system is sparse.
    pub fn solve_many(&self, b: &Matrix<S>) -> Result<Matrix<S>, LinalgError> {
        if b.rows != self.rows {
            return Err(LinalgError::Shape(format!(
                "right-hand side has {} rows for {} rows",
                b.rows, self.rows
            )));
        }
        let mut m = self.hstack(b);
        let mut free: Vec<usize> = (0..self.cols).collect();
        let mut pivot_col = Vec::new();
        for r in 0..self.rows {
            let best = (r..m.rows)
                .flat_map(|i| free.iter().map(move |&c| (i, c)))
                .filter(|&(i, c)| !m.get(i, c).is_zero())
                .min_by_key(|&(i, c)| m.get(i, c).size());
            let Some((p, c)) = best else { break };
            m.swap_rows(r, p);
            let inv = m.get(r, c).inv().unwrap();
            for j in 0..m.cols {
                if !m.get(r, j).is_zero() {
                    let v = m.get(r, j).mul(&inv);
                    m.set(r, j, v);
                }
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in 0..m.cols {
                    let a = m.get(r, j);
                    if a.is_zero() {
                        continue;
                    }
                    let v = m.get(i, j).sub(&f.mul(a));
                    m.set(i, j, v);
                }
            }
            free.retain(|&x| x != c);
            pivot_col.push(c);
        }
        let rank = pivot_col.len();
        if (rank..m.rows).any(|i| (self.cols..m.cols).any(|j| !m.get(i, j).is_zero())) {
            return Err(LinalgError::Inconsistent);
        }
        let mut x = Matrix::new(self.cols, b.cols, vec![S::zero(); self.cols * b.cols]);
        for (r, &c) in pivot_col.iter().enumerate() {
            for j in 0..b.cols {
                x.set(c, j, m.get(r, self.cols + j).clone());
            }
        }
        Ok(x)
    }

    pub fn det_exact(&self) -> Result<S, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NonSquare(self.rows, self.cols));
        }
        let mut m = self.clone();
        let mut det = S::one();
        for c in 0..m.cols {
            let best = (c..m.rows)
                .filter(|&i| !m.get(i, c).is_zero())
                .min_by_key(|&i| m.get(i, c).size());
            let Some(p) = best else { return Ok(S::zero()) };
            if p != c {
                m.swap_rows(c, p);
                det = det.neg();
            }
            let piv = m.get(c, c).clone();
            det = det.mul(&piv);
            let inv = piv.inv().unwrap();
            for i in c + 1..m.rows {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).mul(&inv);
                for j in c..m.cols {
                    let v = m.get(i, j).sub(&f.mul(m.get(c, j)));
                    m.set(i, j, v);
                }
            }
        }
        Ok(det)
    }
}

/// Numeric rank with a row-scaled pivot threshold: an entry is accepted as
/// a pivot when its magnitude exceeds `tol` times the largest magnitude of
/// its original row. Exact scalars ignore `tol` and test for zero.
pub fn numeric_rank<F: Numeric>(m: &Matrix<F>, tol: f64) -> usize {
    let mut a = m.clone();
    let mut scale: Vec<f64> = (0..a.rows)
        .map(|r| a.row(r).iter().map(|x| x.magnitude()).fold(0.0, f64::max))
        .collect();
    let negligible = |x: &F, s: f64| {
        if F::exact() {
            x.is_zero()
        } else {
            s == 0.0 || x.magnitude() <= tol * s
        }
    };
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for i in r..a.rows {
            let x = a.get(i, c);
            if negligible(x, scale[i]) {
                continue;
            }
            let rel = if F::exact() { -(i as f64) } else { x.magnitude() / scale[i] };
            if best.is_none_or(|(_, b)| rel > b) {
                best = Some((i, rel));
            }
        }
        let Some((p, _)) = best else { continue };
        a.swap_rows(r, p);
        scale.swap(r, p);
        let inv = a.get(r, c).inv().unwrap();
        for i in r + 1..a.rows {
            if a.get(i, c).is_zero() {
                continue;
            }
            let f = a.get(i, c).mul(&inv);
            a.set(i, c, F::zero());
            for j in c + 1..a.cols {
                let v = a.get(i, j).sub(&f.mul(a.get(r, j)));
                a.set(i, j, v);
            }
        }
        r += 1;
    }
    r
}

/// Clears row denominators, returning polynomial rows and the multipliers.
pub fn to_poly_rows(m: &Matrix<RatFunc>) -> (Matrix<Poly>, Vec<Poly>) {
    let mut mult = Vec::with_capacity(m.rows);
    let mut data = Vec::with_capacity(m.rows * m.cols);
    for r in 0..m.rows {
        let mut l = Poly::one();
        for x in m.row(r) {
            if !x.den().is_one() {
                let g = gcd(&l, x.den());
                l = l.mul(&x.den().div_exact(&g).unwrap());
            }
        }
        for x in m.row(r) {
            data.push(x.num().mul(&l.div_exact(x.den()).unwrap()));
        }
        mult.push(l);
    }
    (Matrix::new(m.rows, m.cols, data), mult)
}

fn poly_cost(p: &Poly) -> usize {
    p.terms().len() * (1 + p.total_degree() as usize)
}

/// Fraction-free (Bareiss) elimination; returns the rank and, for square
/// input, the determinant.
pub fn bareiss(m: &Matrix<Poly>) -> (usize, Option<Poly>) {
    let mut a = m.clone();
    let mut prev = Poly::one();
    let mut sign = 1i32;
    let mut r = 0;
    let mut full = true;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let best = (r..a.rows)
            .filter(|&i| !a.get(i, c).is_zero())
            .min_by_key(|&i| poly_cost(a.get(i, c)));
        let Some(p) = best else {
            full = false;
            continue;
        };
        if p != r {
            a.swap_rows(r, p);
            sign = -sign;
        }
        let piv = a.get(r, c).clone();
        for i in r + 1..a.rows {
            let f = a.get(i, c).clone();
            for j in c + 1..a.cols {
                let v = piv.mul(a.get(i, j)).sub(&f.mul(a.get(r, j)));
                let v = if prev.is_one() {
                    v
                } else {
                    v.div_exact(&prev).expect("Bareiss division is exact")
                };
                a.set(i, j, v);
            }
            a.set(i, c, Poly::zero());
        }
        prev = piv;
        r += 1;
    }
    let det = (a.rows == a.cols).then(|| {
        if full && r == a.rows {
            let d = a.get(a.rows - 1, a.cols - 1).clone();
            if sign < 0 {
                d.neg()
            } else {
                d
            }
        } else {
            Poly::zero()
        }
    });
    (r, det)
}

/// Rank over the rational function field.
pub fn symbolic_rank(m: &Matrix<RatFunc>) -> usize {
    if m.rows == 0 || m.cols == 0 {
        return 0;
    }
    bareiss(&to_poly_rows(m).0).0
}

/// Determinant over the rational function field.
pub fn symbolic_det(m: &Matrix<RatFunc>) -> Result<RatFunc, LinalgError> {
    if m.rows != m.cols {
        return Err(LinalgError::NonSquare(m.rows, m.cols));
    }
    if m.rows == 0 {
        return Ok(RatFunc::one());
    }
    let (pm, mult) = to_poly_rows(m);
    let d = bareiss(&pm).1.unwrap();
    let den = mult.iter().fold(Poly::one(), |acc, x| acc.mul(x));
    Ok(RatFunc::new(d, den))
}

/// Integer matrix helpers for tests and small exact work.
pub fn int_matrix(rows: &[&[i64]]) -> Matrix<BigRational> {
    Matrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
            .collect(),
    )
}

/// True when every entry is an integer.
pub fn is_integral(m: &Matrix<BigRational>) -> bool {
    m.entries().iter().all(|x| x.is_integer())
}

/// Largest entry magnitude as `f64`.
pub fn max_magnitude<F: Numeric>(m: &Matrix<F>) -> f64 {
    m.entries().iter().map(|x| x.magnitude()).fold(0.0, f64::max)
}

impl Matrix<BigRational> {
    pub fn abs_max(&self) -> BigRational {
        self.data
            .iter()
            .map(|x| x.abs())
            .fold(<BigRational as Zero>::zero(), |a, b| if b > a { b } else { a })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::real::{with_digits, Real};

    fn x() -> RatFunc {
        RatFunc::var(0)
    }

    #[test]
    fn exact_rank_kernel_solve() {
        let id: Matrix<BigRational> = Matrix::identity(3);
        assert_eq!(id.rank_exact(), 3);
        assert!(id.kernel().is_empty());
        let m = int_matrix(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, 1, 1]]);
        assert_eq!(m.rank_exact(), 2);
        let k = m.kernel();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.mul_vec(v).iter().all(Zero::is_zero));
        }
        let b: Vec<BigRational> = [1, 2, 3].iter().map(|&i| BigRational::from_integer(i.into())).collect();
        assert_eq!(id.solve(&b).unwrap(), b);
        let bad: Vec<BigRational> = [1, 3, 0].iter().map(|&i| BigRational::from_integer(i.into())).collect();
        assert_eq!(m.solve(&bad), Err(LinalgError::Inconsistent));
        let sing = int_matrix(&[&[1, 2], &[2, 4]]);
        assert_eq!(sing.solve_unique(&b[..2]), Err(LinalgError::Singular));
    }

    #[test]
    fn symbolic_rank_and_det() {
        let m = Matrix::from_rows(vec![vec![x(), x().mul(&x())], vec![RatFunc::one(), x()]]);
        assert_eq!(symbolic_rank(&m), 1);
        assert!(symbolic_det(&m).unwrap().is_zero());
        let id: Matrix<RatFunc> = Matrix::identity(3);
        assert_eq!(symbolic_det(&id).unwrap(), RatFunc::one());
        let y = RatFunc::var(1);
        let m = Matrix::from_rows(vec![
            vec![x(), y.clone()],
            vec![RatFunc::one(), x().inv().unwrap()],
        ]);
        let expect = RatFunc::one().sub(&y);
        assert_eq!(symbolic_det(&m).unwrap(), expect);
        assert_eq!(m.det_exact().unwrap(), expect);
        assert_eq!(m.det_cofactor().unwrap(), expect);
    }

    #[test]
    fn integer_determinants_agree() {
        let m = int_matrix(&[&[2, -1, 0, 3], &[1, 4, 2, -2], &[0, 5, -3, 1], &[7, 0, 1, 1]]);
        let pm = m.map(|v| Poly::constant(v.numer().clone()));
        let bd = bareiss(&pm).1.unwrap().constant_value().unwrap();
        let cd = m.det_cofactor().unwrap();
        assert_eq!(BigRational::from_integer(bd), cd);
        assert_eq!(m.det_exact().unwrap(), cd);
    }

    #[test]
    fn numeric_rank_thresholds() {
        with_digits(50, || {
            let eps = Real::parse("1e-30");
            let one = Real::one();
            let m = Matrix::from_rows(vec![
                vec![one.clone(), one.clone()],
                vec![one.clone(), one.add(&eps)],
            ]);
            assert_eq!(numeric_rank(&m, 1e-20), 1);
            assert_eq!(numeric_rank(&m, 1e-40), 2);
            let q = int_matrix(&[&[1, 2], &[2, 4]]);
            assert_eq!(numeric_rank(&q, 1e-20), 1);
        });
    }
}
