//! Coefficients of the chain rule for derivatives of `(f∘u)·J`.
//!
//! For a foliation with generators `u = (u_1..u_q)` and a weight `J`,
//! `((f∘u)·J)'_L = Σ_{|K|≤|L|} M_L^K · (f'_K∘u)`. The table is filled order
//! by order from the recurrences
//! `M^K_{L+1_λ} = (M^K_L)'_λ + Σ_α M^{K−1_α}_L · (u_α)'_λ`, where the first
//! term is absent when `|K| = |L| + 1`.

use std::collections::HashMap;

use crate::symbolic::{multi_indices, Differentiable, MultiIndex, Scalar};

/// Which decrement of `L` the recurrence starts from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Peel {
    /// `L = L' + 1_λ` with `λ` the first nonzero position (lexicographically
    /// smallest predecessor).
    First,
    /// `λ` the last nonzero position.
    Last,
}

#[derive(Clone, Debug)]
pub struct CoeffTable<S> {
    pub n: usize,
    pub q: usize,
    pub max_order: u32,
    entries: HashMap<(Vec<u32>, Vec<u32>), S>,
}

impl<S: Scalar> CoeffTable<S> {
    /// `M_L^K`; zero when `|K| > |L|`.
    pub fn get(&self, l: &MultiIndex, k: &MultiIndex) -> S {
        self.entries
            .get(&(l.0.clone(), k.0.clone()))
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn get_ref(&self, l: &[u32], k: &[u32]) -> Option<&S> {
        self.entries.get(&(l.to_vec(), k.to_vec()))
    }
}

/// Builds `M_L^K(F, J)` for `|L| ≤ max_order`. `du[α][λ]` is `(u_α)'_λ`.
///
/// For jets, `J` and `du` must carry at least `max_order` further derivatives.
pub fn m_coeffs<S: Differentiable>(du: &[Vec<S>], j: &S, n: usize, max_order: u32, peel: Peel) -> CoeffTable<S> {
    let q = du.len();
    let mut entries = HashMap::new();
    entries.insert((vec![0; n], vec![0; q]), j.clone());
    let ks: Vec<Vec<MultiIndex>> = (0..=max_order + 1).map(|h| multi_indices(q, h)).collect();
    for level in 1..=max_order {
        for lp in multi_indices(n, level) {
            let lam = match peel {
                Peel::First => lp.first_nonzero(),
                Peel::Last => lp.last_nonzero(),
            }
            .unwrap();
            let l = lp.decr(lam).unwrap();
            for h in 0..=level {
                for k in &ks[h as usize] {
                    let mut v = if h < level {
                        entries
                            .get(&(l.0.clone(), k.0.clone()))
                            .map_or_else(S::zero, |m: &S| m.derivative(lam))
                    } else {
                        S::zero()
                    };
                    for (alpha, row) in du.iter().enumerate() {
                        if let Some(km) = k.decr(alpha) {
                            if let Some(m) = entries.get(&(l.0.clone(), km.0)) {
                                if !m.is_zero() && !row[lam].is_zero() {
                                    v = v.add(&m.mul(&row[lam]));
                                }
                            }
                        }
                    }
                    entries.insert((lp.0.clone(), k.0.clone()), v);
                }
            }
        }
    }
    CoeffTable {
        n,
        q,
        max_order,
        entries,
    }
}

/// Top-degree coefficient `N_L^K` for `|K| = |L|`: with `L` expanded into
/// its sorted direction sequence `λ_1..λ_s`, the sum over all sequences
/// `α_1..α_s` with multiplicities `K` of `Π (u_{α_j})'_{λ_j}`.
pub fn n_coeffs_topdegree<S: Scalar>(du: &[Vec<S>], l: &MultiIndex, k: &MultiIndex) -> S {
    assert_eq!(l.degree(), k.degree(), "top degree needs |K| = |L|");
    fn rec<S: Scalar>(du: &[Vec<S>], lams: &[usize], rest: &mut Vec<u32>, acc: S) -> S {
        let Some((&lam, tail)) = lams.split_first() else {
            return acc;
        };
        let mut total = S::zero();
        for alpha in 0..rest.len() {
            if rest[alpha] == 0 || du[alpha][lam].is_zero() {
                continue;
            }
            rest[alpha] -= 1;
            total = total.add(&rec(du, tail, rest, acc.mul(&du[alpha][lam])));
            rest[alpha] += 1;
        }
        total
    }
    rec(du, &l.expand(), &mut k.0.clone(), S::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse::parse;
    use crate::symbolic::RatFunc;
    use crate::webmodel::first_derivatives;

    fn rf(s: &str, vars: &[&str]) -> RatFunc {
        parse(s).unwrap().to_ratfunc(vars).unwrap()
    }

    #[test]
    fn linear_generator_in_the_plane() {
        let vars = ["x", "y"];
        let u = vec![vec![rf("x + 2*y", &vars)]];
        let du = &first_derivatives(&u, 2)[0];
        let t = m_coeffs(du, &RatFunc::one(), 2, 2, Peel::First);
        let l = MultiIndex(vec![1, 1]);
        assert!(t.get(&l, &MultiIndex(vec![0])).is_zero());
        assert!(t.get(&l, &MultiIndex(vec![1])).is_zero());
        assert_eq!(t.get(&l, &MultiIndex(vec![2])), RatFunc::from(2));
        assert_eq!(n_coeffs_topdegree(du, &l, &MultiIndex(vec![2])), RatFunc::from(2));
        // f(s) = s²: ((x+2y)²)''_{xy} = 4 = M^{(1)}·f' + M^{(2)}·f''
        let ff = rf("(x + 2*y)^2", &vars).derivative(0).derivative(1);
        assert_eq!(ff, RatFunc::from(4));
    }

    #[test]
    fn top_degree_readings() {
        let vars = ["x", "y"];
        let u = vec![rf("x", &vars), rf("y", &vars)];
        let du = &first_derivatives(&[u], 2)[0];
        let n = n_coeffs_topdegree(du, &MultiIndex(vec![1, 1]), &MultiIndex(vec![1, 1]));
        assert_eq!(n, RatFunc::one());
        let u = vec![rf("x + y^2", &vars), rf("x*y", &vars)];
        let du = &first_derivatives(&[u], 2)[0];
        let t = m_coeffs(du, &RatFunc::one(), 2, 3, Peel::First);
        for h in 1..=3 {
            for l in multi_indices(2, h) {
                for k in multi_indices(2, h) {
                    assert_eq!(t.get(&l, &k), n_coeffs_topdegree(du, &l, &k), "{l:?} {k:?}");
                }
            }
        }
        let l = MultiIndex(vec![2, 0]);
        let k = MultiIndex(vec![1, 1]);
        let expect = du[0][0].mul(&du[1][0]).mul(&RatFunc::from(2));
        assert_eq!(n_coeffs_topdegree(du, &l, &k), expect);
    }

    #[test]
    fn weight_only_column_and_peel_independence() {
        let vars = ["x", "y", "z"];
        let u = vec![rf("x*y + z", &vars), rf("y - z^2", &vars)];
        let j = rf("x^2 + y*z - 1", &vars);
        let du = &first_derivatives(&[u], 3)[0];
        let a = m_coeffs(du, &j, 3, 3, Peel::First);
        let b = m_coeffs(du, &j, 3, 3, Peel::Last);
        for h in 0..=3 {
            for l in multi_indices(3, h) {
                let mut jl = j.clone();
                for (v, &e) in l.0.iter().enumerate() {
                    for _ in 0..e {
                        jl = jl.derivative(v);
                    }
                }
                assert_eq!(a.get(&l, &MultiIndex::zero(2)), jl);
                for g in 0..=h {
                    for k in multi_indices(2, g) {
                        assert_eq!(a.get(&l, &k), b.get(&l, &k));
                    }
                }
            }
        }
    }
}
