//! Assembly of the jet matrices `P`, `Q`, `M` and their closed counterparts.
//!
//! Rows are labelled `(B, L)` with `B` a `p`-subset of the ambient
//! coordinates and `L` a derivation multi-index, ordered by `B` then `L`
//! within each order layer. Columns are labelled `(i, A, K)` and ordered by
//! `(A, K)` then by the foliation `i`. The entry at `((B, L), (i, A, K))` is
//! `M_L^K(F_i, J^A_{i,B})`. Closed columns replace the `(A, K)` coordinates
//! of order `h` by a basis of closed symbols and are ordered by basis index
//! then foliation.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coeffs::{m_coeffs, CoeffTable, Peel};
use super::koszul::{closed_jet_basis, symbol_labels};
use crate::error::Result;
use crate::symbolic::matrix::Matrix;
use crate::symbolic::real::{precision_bits, with_bits};
use crate::symbolic::{multi_indices, subsets, Differentiable, Jet, MultiIndex, Numeric, RatFunc, Scalar};
use crate::webmodel::{first_derivatives, minor, Web};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowLabel {
    pub b: Vec<usize>,
    pub l: MultiIndex,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColLabel {
    pub i: usize,
    pub a: Vec<usize>,
    pub k: MultiIndex,
}

/// Shape data of a jet system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
    pub q: usize,
    pub d: usize,
    pub p: usize,
}

impl Layout {
    pub fn rows(&self, l: u32) -> Vec<RowLabel> {
        let ls = multi_indices(self.n, l);
        subsets(self.n, self.p)
            .into_iter()
            .flat_map(|b| ls.iter().map(move |l| RowLabel { b: b.clone(), l: l.clone() }))
            .collect()
    }

    pub fn cols(&self, h: u32) -> Vec<ColLabel> {
        let d = self.d;
        symbol_labels(self.q, self.p, h)
            .into_iter()
            .flat_map(|(a, k)| (0..d).map(move |i| ColLabel { i, a: a.clone(), k: k.clone() }))
            .collect()
    }

    /// Position of `(A, K)` within `symbol_labels(q, p, |K|)`.
    pub fn symbol_index(&self, a: &[usize], k: &MultiIndex) -> usize {
        let h = k.degree();
        symbol_labels(self.q, self.p, h)
            .iter()
            .position(|(x, y)| x == a && y == k)
            .expect("symbol label")
    }

    /// Column position of `(i, A, K)` within the order-`|K|` layer.
    pub fn col_index(&self, i: usize, a: &[usize], k: &MultiIndex) -> usize {
        self.symbol_index(a, k) * self.d + i
    }

    /// Rows of the layers `0..=k`.
    pub fn rows_upto(&self, k: u32) -> Vec<RowLabel> {
        (0..=k).flat_map(|l| self.rows(l)).collect()
    }

    pub fn cols_upto(&self, k: u32) -> Vec<ColLabel> {
        (0..=k).flat_map(|h| self.cols(h)).collect()
    }
}

/// All coefficient tables of a web for a fixed form degree, over one scalar type.
pub struct JetSystem<S> {
    pub layout: Layout,
    pub kmax: u32,
    /// Tables indexed by `(i, A-index, B-index)`.
    tables: Vec<CoeffTable<S>>,
    subsets_q: Vec<Vec<usize>>,
    subsets_n: Vec<Vec<usize>>,
    /// Closed jet bases per order.
    z: Vec<Matrix<BigRational>>,
}

impl<S: Differentiable> JetSystem<S> {
    /// Builds the tables from first derivatives `du[i][α][λ]`, which must
    /// carry `kmax` further derivatives.
    pub fn from_derivatives(du: &[Vec<Vec<S>>], n: usize, p: usize, kmax: u32) -> Self {
        let d = du.len();
        let q = du[0].len();
        let layout = Layout { n, q, d, p };
        let subsets_q = subsets(q, p);
        let subsets_n = subsets(n, p);
        let tasks: Vec<(usize, usize, usize)> = (0..d)
            .flat_map(|i| {
                let nb = subsets_n.len();
                (0..subsets_q.len()).flat_map(move |a| (0..nb).map(move |b| (i, a, b)))
            })
            .collect();
        let bits = precision_bits();
        let tables: Vec<CoeffTable<S>> = tasks
            .par_iter()
            .map(|&(i, a, b)| {
                with_bits(bits, || {
                    let j = minor(&du[i], &subsets_q[a], &subsets_n[b]);
                    m_coeffs(&du[i], &j, n, kmax, Peel::First)
                })
            })
            .collect();
        let z = (0..=kmax).map(|h| closed_jet_basis(q, p, h)).collect();
        JetSystem {
            layout,
            kmax,
            tables,
            subsets_q,
            subsets_n,
            z,
        }
    }

    fn table(&self, i: usize, a: &[usize], b: &[usize]) -> &CoeffTable<S> {
        let ai = self.subsets_q.iter().position(|x| x == a).expect("A subset");
        let bi = self.subsets_n.iter().position(|x| x == b).expect("B subset");
        &self.tables[(i * self.subsets_q.len() + ai) * self.subsets_n.len() + bi]
    }

    pub fn entry(&self, row: &RowLabel, col: &ColLabel) -> S {
        if col.k.degree() > row.l.degree() {
            return S::zero();
        }
        self.table(col.i, &col.a, &row.b).get(&row.l, &col.k)
    }

    fn check(&self, k: u32) {
        assert!(k <= self.kmax, "order {k} beyond the built order {}", self.kmax);
    }

    /// Block `P_h^(ℓ)`: rows of order `ℓ`, columns of order `h`.
    pub fn block(&self, l: u32, h: u32) -> Matrix<S> {
        self.check(l);
        let rows = self.layout.rows(l);
        let cols = self.layout.cols(h);
        Matrix::from_fn(rows.len(), cols.len(), |r, c| self.entry(&rows[r], &cols[c]))
    }

    /// Closed jet basis of order `h` (rows `(A, K)`, columns basis vectors).
    pub fn closed_basis(&self, h: u32) -> &Matrix<BigRational> {
        &self.z[h as usize]
    }

    /// Block `P̃_h^(ℓ)`: column `(j, i)` is `Σ_{(A,K)} Z_h[(A,K), j] · column (i, A, K)`.
    pub fn closed_block(&self, l: u32, h: u32) -> Matrix<S> {
        let plain = self.block(l, h);
        let z = &self.z[h as usize];
        let d = self.layout.d;
        Matrix::from_fn(plain.rows(), z.cols() * d, |r, c| {
            let (j, i) = (c / d, c % d);
            let mut acc = S::zero();
            for s in 0..z.rows() {
                let w = z.get(s, j);
                if Scalar::is_zero(w) {
                    continue;
                }
                let e = plain.get(r, s * d + i);
                if !e.is_zero() {
                    acc = acc.add(&e.mul(&S::from_rational(w)));
                }
            }
            acc
        })
    }

    fn assemble(&self, layers: std::ops::RangeInclusive<u32>, hs: std::ops::RangeInclusive<u32>, closed: bool) -> Matrix<S> {
        let mut out: Option<Matrix<S>> = None;
        for l in layers {
            let mut row: Option<Matrix<S>> = None;
            for h in hs.clone() {
                let b = if closed { self.closed_block(l, h) } else { self.block(l, h) };
                row = Some(match row {
                    None => b,
                    Some(r) => r.hstack(&b),
                });
            }
            let row = row.expect("non-empty column range");
            out = Some(match out {
                None => row,
                Some(o) => o.vstack(&row),
            });
        }
        out.expect("non-empty row range")
    }

    /// `P_k(p)`.
    pub fn p_matrix(&self, k: u32) -> Matrix<S> {
        self.block(k, k)
    }

    /// `Q_k(p)`: order-`k` rows against the columns of orders `< k`.
    pub fn q_matrix(&self, k: u32) -> Matrix<S> {
        if k == 0 {
            return Matrix::zeros(self.layout.rows(0).len(), 0);
        }
        self.assemble(k..=k, 0..=k - 1, false)
    }

    /// `M_k(p)`: all rows and columns of orders `≤ k`.
    pub fn m_matrix(&self, k: u32) -> Matrix<S> {
        self.assemble(0..=k, 0..=k, false)
    }

    pub fn p_closed(&self, k: u32) -> Matrix<S> {
        self.closed_block(k, k)
    }

    pub fn q_closed(&self, k: u32) -> Matrix<S> {
        if k == 0 {
            return Matrix::zeros(self.layout.rows(0).len(), 0);
        }
        self.assemble(k..=k, 0..=k - 1, true)
    }

    pub fn m_closed(&self, k: u32) -> Matrix<S> {
        self.assemble(0..=k, 0..=k, true)
    }

    /// All blocks as strings, keyed `P_h^(l)`, for inspection.
    pub fn dump(&self, show: impl Fn(&S) -> String) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for l in 0..=self.kmax {
            for h in 0..=l {
                let b = self.block(l, h);
                let rows: Vec<Vec<String>> = (0..b.rows())
                    .map(|r| b.row(r).iter().map(&show).collect())
                    .collect();
                map.insert(format!("P_{h}^({l})"), serde_json::json!(rows));
            }
        }
        serde_json::Value::Object(map)
    }
}

impl JetSystem<RatFunc> {
    /// Exact symbolic system of a rational web.
    pub fn symbolic(web: &Web, p: usize, kmax: u32) -> Result<Self> {
        let u = web.ratfuncs()?;
        let du = first_derivatives(&u, web.n());
        Ok(JetSystem::from_derivatives(&du, web.n(), p, kmax))
    }
}

impl<F: Numeric> JetSystem<Jet<F>> {
    /// System of Taylor jets at a point, exact for rational scalars.
    pub fn at_point(web: &Web, point: &[F], p: usize, kmax: u32) -> Result<Self> {
        let u = web.jets(point, kmax + 1)?;
        let du = first_derivatives(&u, web.n());
        Ok(JetSystem::from_derivatives(&du, web.n(), p, kmax))
    }
}

/// Values at the base point of a matrix of jets.
pub fn values<F: Numeric>(m: &Matrix<Jet<F>>) -> Matrix<F> {
    m.map(|j| j.value().clone())
}

/// Sparse chain-rule prolongation: `∂_λ(f'_K∘u_i) = Σ_α (f'_{K+1_α}∘u_i)·(u_{i,α})'_λ`.
/// Returns, for each `α`, the coordinate `K + 1_α` and the factor `(u_{i,α})'_λ`.
pub fn prolong<S: Scalar>(du_i: &[Vec<S>], k: &MultiIndex, lam: usize) -> Vec<(MultiIndex, S)> {
    (0..du_i.len())
        .filter(|&a| !du_i[a][lam].is_zero())
        .map(|a| (k.incr(a), du_i[a][lam].clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::{sizes, z};
    use crate::symbolic::matrix::symbolic_rank;
    use crate::symbolic::parse::parse;

    fn template(lambda: &str) -> Web {
        let psi = format!("x + z + (x^2 + 2*({lambda})*x*z + z^2)/2");
        Web::new(
            "w",
            &["x", "y", "z"],
            2,
            &[vec!["x", "y"], vec!["y", "z"], vec!["z", "x"], vec!["x + y", &psi]],
        )
        .unwrap()
    }

    #[test]
    fn template_order_zero_block() {
        let w = template("2");
        let js = JetSystem::symbolic(&w, 2, 1).unwrap();
        let p0 = js.p_matrix(0);
        assert_eq!((p0.rows(), p0.cols()), (3, 4));
        let vars = w.vars();
        let rf = |s: &str| parse(s).unwrap().to_ratfunc(&vars).unwrap();
        // A = r, B = −r, C = −p for φ = x + y
        let (a, b, c) = (rf("1 + 2*x + z"), rf("-(1 + 2*x + z)"), rf("-(1 + x + 2*z)"));
        let one = RatFunc::one();
        let zero = RatFunc::zero();
        let expect = Matrix::from_rows(vec![
            vec![one.clone(), zero.clone(), zero.clone(), c.clone()],
            vec![zero.clone(), zero.clone(), one.neg(), b.neg()],
            vec![zero.clone(), one.clone(), zero.clone(), a.clone()],
        ]);
        assert_eq!(p0, expect);
        assert_eq!(symbolic_rank(&p0), 3);
        let k = p0.kernel();
        assert_eq!(k, vec![vec![c.neg(), a.neg(), b.neg(), one]]);
        let pc = js.p_closed(1);
        assert_eq!((pc.rows(), pc.cols()), (9, 8));
        assert_eq!(symbolic_rank(&pc), 8);
    }

    #[test]
    fn shapes_match_sizes() {
        let w = template("1/2");
        let js = JetSystem::symbolic(&w, 1, 2).unwrap();
        for k in 0..=2u32 {
            let s = sizes(3, 4, 2, 1, k as u64);
            let m = js.m_matrix(k);
            assert_eq!((m.rows() as u64, m.cols() as u64), (s.beta, s.alpha));
            let mc = js.m_closed(k);
            assert_eq!(mc.cols() as u64, s.alpha_tilde);
            assert_eq!(js.p_closed(k).cols() as u64, 4 * z(2, 1, k as i64));
        }
    }

    #[test]
    fn affine_webs_have_no_coupling() {
        let w = Web::new(
            "a",
            &["x", "y", "z"],
            2,
            &[vec!["x", "y"], vec!["y", "z"], vec!["z", "x"], vec!["x + 2*y - z", "3*x + z"]],
        )
        .unwrap();
        let js = JetSystem::symbolic(&w, 1, 2).unwrap();
        for k in 1..=2 {
            assert!(js.q_matrix(k).is_zero());
            assert!(js.q_closed(k).is_zero());
        }
    }

    #[test]
    fn exact_point_matches_symbolic() {
        let w = template("2");
        let js = JetSystem::symbolic(&w, 1, 2).unwrap();
        let pt: Vec<BigRational> = ["1/3", "-2", "5/7"]
            .iter()
            .map(|s| parse(s).unwrap().as_const().unwrap().clone())
            .collect();
        let jp = JetSystem::at_point(&w, &pt, 1, 2).unwrap();
        let a = js.m_closed(2).map(|e| e.eval(&pt).unwrap());
        let b = values(&jp.m_closed(2));
        assert_eq!(a, b);
    }

    #[test]
    fn prolongation_is_chain_rule() {
        let vars = ["x", "y"];
        let u = vec![vec![parse("x + 2*y").unwrap().to_ratfunc(&vars).unwrap()]];
        let du = first_derivatives(&u, 2);
        let pr = prolong(&du[0], &MultiIndex(vec![0]), 1);
        assert_eq!(pr, vec![(MultiIndex(vec![1]), RatFunc::from(2))]);
    }
}
