//! Derivation multi-indices and exterior index sets.

use serde::{Deserialize, Serialize};

#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(r: usize) -> Self {
        MultiIndex(vec![0; r])
    }

    pub fn unit(r: usize, j: usize) -> Self {
        let mut v = vec![0; r];
        v[j] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn incr(&self, j: usize) -> Self {
        let mut v = self.0.clone();
        v[j] += 1;
        MultiIndex(v)
    }

    /// `L − 1_j`, or `None` when `ℓ_j = 0`.
    pub fn decr(&self, j: usize) -> Option<Self> {
        let mut v = self.0.clone();
        if v[j] == 0 {
            return None;
        }
        v[j] -= 1;
        Some(MultiIndex(v))
    }

    pub fn add(&self, o: &MultiIndex) -> Self {
        MultiIndex(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    /// `L!` as an integer.
    pub fn factorial(&self) -> u64 {
        self.0
            .iter()
            .map(|&k| (1..=k as u64).product::<u64>())
            .product()
    }

    pub fn first_nonzero(&self) -> Option<usize> {
        self.0.iter().position(|&k| k > 0)
    }

    pub fn last_nonzero(&self) -> Option<usize> {
        self.0.iter().rposition(|&k| k > 0)
    }

    /// Sorted list of positions with multiplicity, e.g. (2,0,1) → [0,0,2].
    pub fn expand(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize))
            .collect()
    }
}

/// All multi-indices of length `r` and degree `h`, in decreasing
/// lexicographic order: (h,0,…) first, (…,0,h) last.
pub fn multi_indices(r: usize, h: u32) -> Vec<MultiIndex> {
    fn rec(r: usize, h: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == r {
            prefix.push(h);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for k in (0..=h).rev() {
            prefix.push(k);
            rec(r, h - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if r == 0 {
        if h == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return out;
    }
    rec(r, h, &mut Vec::with_capacity(r), &mut out);
    out
}

/// Increasing `p`-element subsets of `0..n`, in lexicographic order.
pub fn subsets(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < p - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if p <= n {
        rec(0, n, p, &mut Vec::with_capacity(p), &mut out);
    }
    out
}

/// Sign of the permutation sorting `idx` (distinct entries), 0 on repeats.
pub fn sort_sign(idx: &[usize]) -> i32 {
    let mut sign = 1;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            match idx[i].cmp(&idx[j]) {
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Equal => return 0,
                _ => {}
            }
        }
    }
    sign
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::{binom, c};

    #[test]
    fn orders() {
        let m: Vec<_> = multi_indices(3, 2).into_iter().map(|m| m.0).collect();
        assert_eq!(
            m,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 2, 0],
                vec![0, 1, 1],
                vec![0, 0, 2]
            ]
        );
        assert_eq!(multi_indices(2, 1), vec![MultiIndex(vec![1, 0]), MultiIndex(vec![0, 1])]);
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        for r in 1..5 {
            for h in 0..5 {
                assert_eq!(multi_indices(r, h).len() as u64, c(r as i64, h as i64));
            }
            for p in 0..=r {
                assert_eq!(subsets(r, p).len() as u64, binom(r as i64, p as i64));
            }
        }
    }

    #[test]
    fn index_arithmetic() {
        let l = MultiIndex(vec![2, 0, 1]);
        assert_eq!(l.incr(1).decr(1), Some(l.clone()));
        assert_eq!(l.decr(1), None);
        assert_eq!(l.degree(), 3);
        assert_eq!(l.factorial(), 2);
        assert_eq!(l.expand(), vec![0, 0, 2]);
        assert_eq!(l.first_nonzero(), Some(0));
        assert_eq!(l.last_nonzero(), Some(2));
        assert_eq!(sort_sign(&[1, 0]), -1);
        assert_eq!(sort_sign(&[0, 2, 1]), -1);
        assert_eq!(sort_sign(&[2, 0, 1]), 1);
        assert_eq!(sort_sign(&[1, 1]), 0);
    }
}
