//! The Koszul differential on polynomial-coefficient forms and the bases of
//! closed homogeneous symbols.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::symbolic::matrix::Matrix;
use crate::symbolic::{multi_indices, subsets, MultiIndex, Scalar};

/// Labels `(A, K)` of `S^h ⊗ Λ^p` in `q` variables, ordered by `A` then `K`.
pub fn symbol_labels(q: usize, p: usize, h: u32) -> Vec<(Vec<usize>, MultiIndex)> {
    let ks = multi_indices(q, h);
    subsets(q, p)
        .into_iter()
        .flat_map(|a| ks.iter().map(move |k| (a.clone(), k.clone())))
        .collect()
}

/// Matrix of `d: S^h ⊗ Λ^p → S^{h−1} ⊗ Λ^{p+1}`,
/// `d(x^K ⊗ dx_A) = Σ_{λ∉A} k_λ x^{K−1_λ} ⊗ dx_λ ∧ dx_A`, with `dx_λ` moved
/// into ascending position. Columns follow `symbol_labels(q, p, h)`, rows
/// `symbol_labels(q, p+1, h−1)`.
pub fn koszul_matrix(q: usize, p: usize, h: u32) -> Matrix<BigRational> {
    assert!(h >= 1, "Koszul differential needs h ≥ 1");
    let cols = symbol_labels(q, p, h);
    let rows = symbol_labels(q, p + 1, h - 1);
    let mut m: Matrix<BigRational> = Matrix::zeros(rows.len(), cols.len());
    for (c, (a, k)) in cols.iter().enumerate() {
        for lam in 0..q {
            if a.contains(&lam) || k.0[lam] == 0 {
                continue;
            }
            let before = a.iter().filter(|&&x| x < lam).count();
            let mut target = a.clone();
            target.insert(before, lam);
            let km = k.decr(lam).unwrap();
            let r = rows
                .iter()
                .position(|(b, l)| *b == target && *l == km)
                .expect("Koszul target label");
            let mut v = BigRational::from_integer(BigInt::from(k.0[lam]));
            if before % 2 == 1 {
                v = -v;
            }
            m.set(r, c, v);
        }
    }
    m
}

/// Integer basis of the closed symbols in `S^h ⊗ Λ^p`, in polynomial
/// coefficients, read off the reduced echelon form of the Koszul matrix.
pub fn closed_symbol_basis(q: usize, p: usize, h: u32) -> Vec<Vec<BigInt>> {
    let dim = symbol_labels(q, p, h).len();
    let vecs: Vec<Vec<BigRational>> = if h == 0 {
        (0..dim)
            .map(|i| (0..dim).map(|j| BigRational::from_int((i == j) as i64)).collect())
            .collect()
    } else {
        koszul_matrix(q, p, h).kernel()
    };
    vecs.into_iter()
        .map(|v| {
            v.into_iter()
                .map(|x| {
                    assert!(x.is_integer(), "kernel vector not integral");
                    x.to_integer()
                })
                .collect()
        })
        .collect()
}

/// The closed basis in jet coordinates: component `(A, K)` is scaled by
/// `K!`, since the jet coordinate `f'_K` is `K!` times the Taylor
/// coefficient. Rows follow `symbol_labels`, columns the basis vectors.
pub fn closed_jet_basis(q: usize, p: usize, h: u32) -> Matrix<BigRational> {
    let labels = symbol_labels(q, p, h);
    let basis = closed_symbol_basis(q, p, h);
    Matrix::from_fn(labels.len(), basis.len(), |r, c| {
        let f = BigInt::from(labels[r].1.factorial());
        BigRational::from_integer(&basis[c][r] * f)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::{binom, c, z};

    #[test]
    fn dimensions_and_complex() {
        for q in 1..=4usize {
            for p in 1..=q {
                for h in 0..=4u32 {
                    let dim = closed_symbol_basis(q, p, h).len() as u64;
                    assert_eq!(dim, z(q as i64, p as i64, h as i64), "q={q} p={p} h={h}");
                    if h >= 2 {
                        let d1 = koszul_matrix(q, p, h);
                        let d2 = koszul_matrix(q, p + 1, h - 1);
                        assert!(d2.mul(&d1).is_zero());
                    }
                }
            }
        }
        assert_eq!(symbol_labels(3, 2, 1).len() as u64, binom(3, 2) * c(3, 1));
    }

    #[test]
    fn small_cases() {
        assert_eq!(closed_symbol_basis(2, 2, 1).len(), 2);
        assert_eq!(closed_symbol_basis(3, 2, 0).len(), 3);
        let m = koszul_matrix(2, 1, 1);
        // d(x dx_2) = dx_1∧dx_2, d(y dx_1) = −dx_1∧dx_2
        assert_eq!(m.rows(), 1);
        let row: Vec<i64> = m.row(0).iter().map(|v| v.to_integer().try_into().unwrap()).collect();
        assert_eq!(row, vec![0, -1, 1, 0]);
        // x dx_1 + y dx_2 = d(x²+y²)/2 is closed; jet coordinates unchanged at h = 1
        let jb = closed_jet_basis(2, 1, 1);
        assert_eq!(jb.cols(), 3);
        let jb2 = closed_jet_basis(1, 1, 2);
        assert_eq!(jb2.get(0, 0), &BigRational::from_int(2));
    }
}
