//! Dimension counts, rank bounds and order thresholds.
//!
//! Everything here is exact: ratios are compared as rationals and the
//! clamped sums `(x)⁺` are accumulated in `BigRational` before being
//! converted back to integers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("codimension {q} does not divide dimension {n}")]
    CodimensionNotDividing { n: u64, q: u64 },
}

/// Binomial coefficient, zero outside `0 ≤ s ≤ r`.
pub fn binom(r: i64, s: i64) -> u64 {
    if r < 0 || s < 0 || s > r {
        return 0;
    }
    let s = s.min(r - s) as u128;
    let r = r as u128;
    let mut acc: u128 = 1;
    for j in 0..s {
        acc = acc * (r - j) / (j + 1);
    }
    u64::try_from(acc).expect("binomial coefficient overflows u64")
}

/// Number of degree-`h` monomials in `r` variables.
pub fn c(r: i64, h: i64) -> u64 {
    if r <= 0 || h < 0 {
        return u64::from(r == 0 && h == 0);
    }
    binom(r - 1 + h, h)
}

/// Dimension of the closed homogeneous symbols of degree `k` in
/// `S^k ⊗ Λ^p` over `n` variables.
pub fn z(n: i64, p: i64, k: i64) -> u64 {
    let v = binom(n + k, n - p) * c(p, k);
    debug_assert_eq!(v as i128, z_alternating(n, p, k));
    v
}

/// The same dimension computed as an alternating sum along the Koszul complex.
pub fn z_alternating(n: i64, p: i64, k: i64) -> i128 {
    (0..p)
        .map(|j| {
            let sign = if (p - j + 1) % 2 == 0 { 1 } else { -1 };
            sign * binom(n, j) as i128 * c(n, k + p - j) as i128
        })
        .sum()
}

fn rat(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `b(n,p)c(n,k) / (b(q,p)c(q,k))`.
pub fn plain_ratio(n: i64, q: i64, p: i64, k: i64) -> BigRational {
    rat(binom(n, p) * c(n, k)) / rat(binom(q, p) * c(q, k))
}

/// `z(n,p,k) / z(q,p,k)`.
pub fn closed_ratio(n: i64, q: i64, p: i64, k: i64) -> BigRational {
    rat(z(n, p, k)) / rat(z(q, p, k))
}

fn last_below(d: u64, ratio: impl Fn(i64) -> BigRational) -> Option<u64> {
    let d = rat(d);
    if ratio(0) > d {
        return None;
    }
    let mut k = 0;
    while ratio(k + 1) <= d {
        k += 1;
    }
    Some(k as u64)
}

/// Largest `k` with `b(n,p)c(n,k)/(b(q,p)c(q,k)) ≤ d`.
pub fn k_zero(n: u64, d: u64, q: u64, p: u64) -> Option<u64> {
    let (n, q, p) = (n as i64, q as i64, p as i64);
    last_below(d, |k| plain_ratio(n, q, p, k))
}

/// Largest `k` with `z(n,p,k)/z(q,p,k) ≤ d`.
pub fn k_one(n: u64, d: u64, q: u64, p: u64) -> Option<u64> {
    let (n, q, p) = (n as i64, q as i64, p as i64);
    last_below(d, |k| closed_ratio(n, q, p, k))
}

/// `Σ_h weight(h)·(d − ratio(h))⁺`, stopping at the first vanishing term.
fn clamped_sum(d: u64, weight: impl Fn(i64) -> u64, ratio: impl Fn(i64) -> BigRational) -> u64 {
    let d = rat(d);
    let mut total = BigRational::zero();
    let mut h = 0;
    loop {
        let gap = &d - ratio(h);
        if !gap.is_positive() {
            break;
        }
        total += rat(weight(h)) * gap;
        h += 1;
    }
    assert!(total.is_integer(), "non-integral bound {total}");
    total.to_integer().to_u64().expect("bound overflows u64")
}

pub fn pi_zero(n: u64, d: u64, q: u64, p: u64) -> u64 {
    let (n, q, p) = (n as i64, q as i64, p as i64);
    clamped_sum(
        d,
        |h| binom(q, p) * c(q, h),
        |h| plain_ratio(n, q, p, h),
    )
}

pub fn pi_prime(n: u64, d: u64, q: u64, p: u64) -> u64 {
    let (n, q, p) = (n as i64, q as i64, p as i64);
    clamped_sum(d, |h| z(q, p, h), |h| closed_ratio(n, q, p, h))
}

/// Hénaut's bound, defined when `q` divides `n`.
pub fn pi_henaut(n: u64, d: u64, q: u64, p: u64) -> Result<u64, BoundsError> {
    if q == 0 || !n.is_multiple_of(q) {
        return Err(BoundsError::CodimensionNotDividing { n, q });
    }
    let m = (n / q) as i64 - 1;
    let (q, p) = (q as i64, p as i64);
    Ok(clamped_sum(
        d,
        |h| binom(q, p) * c(q, h),
        |h| BigRational::from_integer(BigInt::from(m * (p + h) + 1)),
    ))
}

/// Row and column counts of the assembled jet systems up to order `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sizes {
    pub alpha: u64,
    pub beta: u64,
    pub alpha_tilde: u64,
    pub beta_tilde: u64,
}

pub fn sizes(n: u64, d: u64, q: u64, p: u64, k: u64) -> Sizes {
    let (n, q, p) = (n as i64, q as i64, p as i64);
    let mut s = Sizes {
        alpha: 0,
        beta: 0,
        alpha_tilde: 0,
        beta_tilde: 0,
    };
    for h in 0..=k as i64 {
        s.alpha += d * binom(q, p) * c(q, h);
        s.beta += binom(n, p) * c(n, h);
        s.alpha_tilde += d * z(q, p, h);
        s.beta_tilde += z(n, p, h);
    }
    s
}

pub fn is_calibrated(n: u64, d: u64, q: u64, p: u64) -> bool {
    k_zero(n, d, q, p)
        .is_some_and(|k| plain_ratio(n as i64, q as i64, p as i64, k as i64) == rat(d))
}

pub fn is_strongly_calibrated(n: u64, d: u64, q: u64, p: u64) -> bool {
    k_one(n, d, q, p)
        .is_some_and(|k| closed_ratio(n as i64, q as i64, p as i64, k as i64) == rat(d))
}

/// Necessary size condition for a web to be p-ordinary while its closed
/// system is also of maximal rank. For `p = q` both systems describe the
/// same relations, so the check is vacuous.
pub fn prop2_check(n: u64, d: u64, q: u64, p: u64) -> bool {
    if p == q {
        return true;
    }
    let top = match (k_zero(n, d, q, p), k_one(n, d, q, p)) {
        (Some(a), Some(b)) => a.min(b),
        _ => return true,
    };
    (0..=top).all(|k| {
        let s = sizes(n, d, q, p, k);
        s.alpha_tilde as i128 - s.beta_tilde as i128 <= s.alpha as i128 - s.beta as i128
    })
}

/// Closed form quoted for `π⁰₁(3,d,2)`: with `4d − 2 = 3δ + ρ`, the value
/// `δ(δ+1)(δ−ρ)/4`. It only agrees with [`pi_zero`] for some `d`
/// (e.g. `d = 3, 6`) and is kept for comparison.
pub fn pi_zero_curves_closed_form(d: u64) -> i64 {
    let t = 4 * d as i64 - 2;
    let (delta, rho) = (t.div_euclid(3), t.rem_euclid(3));
    delta * (delta + 1) * (delta - rho) / 4
}

pub fn validate(n: u64, d: u64, q: u64, p: u64) -> Result<(), BoundsError> {
    let bad = |m: &str| Err(BoundsError::InvalidParameters(m.to_string()));
    if n < 2 {
        return bad("dimension must be at least 2");
    }
    if q == 0 || q >= n {
        return bad("codimension must satisfy 1 ≤ q ≤ n−1");
    }
    if d == 0 {
        return bad("the web needs at least one foliation");
    }
    if p == 0 || p > q {
        return bad("form degree must satisfy 1 ≤ p ≤ q");
    }
    if n > 60 || d > 10_000 {
        return bad("parameters too large");
    }
    Ok(())
}

/// All bounds and thresholds for one parameter set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundProfile {
    pub n: u64,
    pub q: u64,
    pub d: u64,
    pub p: u64,
    pub k0: Option<u64>,
    pub k1: Option<u64>,
    pub pi0: u64,
    pub pi_prime: u64,
    pub pi_henaut: Option<u64>,
    pub calibrated: bool,
    pub strongly_calibrated: bool,
    pub prop2_ok: bool,
}

impl BoundProfile {
    pub fn new(n: u64, d: u64, q: u64, p: u64) -> Result<Self, BoundsError> {
        validate(n, d, q, p)?;
        Ok(BoundProfile {
            n,
            q,
            d,
            p,
            k0: k_zero(n, d, q, p),
            k1: k_one(n, d, q, p),
            pi0: pi_zero(n, d, q, p),
            pi_prime: pi_prime(n, d, q, p),
            pi_henaut: pi_henaut(n, d, q, p).ok(),
            calibrated: is_calibrated(n, d, q, p),
            strongly_calibrated: is_strongly_calibrated(n, d, q, p),
            prop2_ok: prop2_check(n, d, q, p),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials() {
        assert_eq!(binom(4, 2), 6);
        assert_eq!(binom(5, 3), 10);
        assert_eq!(binom(7, 0), 1);
        assert_eq!(binom(3, 4), 0);
        assert_eq!(binom(3, -1), 0);
        assert_eq!(c(3, 2), 6);
        assert_eq!(c(5, 0), 1);
        for k in 0..10 {
            assert_eq!(c(2, k), k as u64 + 1);
        }
    }

    #[test]
    fn z_values() {
        assert_eq!(z(3, 2, 1), 8);
        assert_eq!(z(4, 1, 1), 10);
        for n in 1..6 {
            for p in 1..=n {
                assert_eq!(z(n, p, 0), binom(n, p));
            }
        }
    }

    #[test]
    fn thresholds() {
        assert_eq!(k_zero(3, 3, 2, 1), Some(2));
        assert_eq!(k_zero(4, 4, 2, 1), Some(1));
        // ratio 3(k+2)/2: 3, 9/2, 6
        assert_eq!(k_zero(3, 4, 2, 2), Some(0));
        assert_eq!(k_one(3, 4, 2, 2), Some(1));
        assert_eq!(k_one(4, 4, 2, 1), Some(1));
        assert_eq!(k_one(3, 3, 2, 1), Some(3));
        assert_eq!(k_zero(3, 1, 2, 1), None);
        assert_eq!(k_one(4, 1, 2, 2), None);
    }

    #[test]
    fn bounds() {
        assert_eq!(pi_zero(3, 3, 2, 1), 6);
        assert_eq!(pi_prime(3, 3, 2, 1), 8);
        assert_eq!(pi_zero(4, 4, 2, 1), 4);
        assert_eq!(pi_prime(3, 4, 2, 2), 1);
        assert_eq!(pi_henaut(4, 4, 2, 2), Ok(1));
        assert_eq!(pi_henaut(4, 1, 2, 1), Ok(0));
        assert!(matches!(
            pi_henaut(3, 4, 2, 1),
            Err(BoundsError::CodimensionNotDividing { .. })
        ));
        for d in 1..=10 {
            assert_eq!(pi_henaut(2, d, 1, 1).unwrap(), (d - 1) * d.saturating_sub(2) / 2);
        }
        for (n, q, p) in [(3, 2, 1), (4, 2, 2), (5, 1, 1)] {
            assert_eq!(pi_zero(n, 1, q, p), 0);
            assert_eq!(pi_prime(n, 1, q, p), 0);
        }
    }

    #[test]
    fn size_records() {
        let s = sizes(4, 4, 2, 1, 1);
        assert_eq!((s.alpha, s.beta), (24, 20));
        let s = sizes(3, 4, 2, 2, 0);
        assert_eq!((s.alpha, s.beta), (4, 3));
        let s = sizes(5, 7, 3, 2, 0);
        assert_eq!((s.alpha, s.beta), (7 * 3, 10));
    }

    #[test]
    fn calibration() {
        assert!(is_calibrated(4, 4, 2, 1));
        assert!(is_calibrated(3, 3, 2, 1));
        assert!(!is_calibrated(3, 5, 2, 1));
        assert!(is_strongly_calibrated(3, 4, 2, 2));
        assert!(!is_calibrated(3, 1, 2, 1));
    }

    #[test]
    fn prop2() {
        assert!(!prop2_check(3, 3, 2, 1));
        assert!(prop2_check(3, 4, 2, 2));
        for d in 1..12 {
            assert!(prop2_check(2, d, 1, 1));
        }
    }

    #[test]
    fn curve_closed_form_matches_only_sometimes() {
        assert_eq!(pi_zero_curves_closed_form(3), 6);
        assert_eq!(pi_zero(3, 3, 2, 1), 6);
        assert_eq!(pi_zero_curves_closed_form(6), pi_zero(3, 6, 2, 1) as i64);
        assert_ne!(pi_zero_curves_closed_form(2), pi_zero(3, 2, 2, 1) as i64);
        assert_ne!(pi_zero_curves_closed_form(4), pi_zero(3, 4, 2, 1) as i64);
    }

    #[test]
    fn profile_rejects_bad_parameters() {
        assert!(BoundProfile::new(3, 3, 3, 1).is_err());
        assert!(BoundProfile::new(3, 3, 2, 3).is_err());
        assert!(BoundProfile::new(3, 0, 2, 1).is_err());
        let b = BoundProfile::new(3, 1, 2, 1).unwrap();
        assert_eq!((b.pi0, b.pi_prime, b.pi_henaut), (0, 0, None));
    }
}
