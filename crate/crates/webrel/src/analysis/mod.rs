//! Rank profiles, ordinarity decisions, bound reports and verification of
//! abelian relations.

pub mod ordinarity;
pub mod relation;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinat::{binom, c, z};
use crate::error::Result;
use crate::jets::{values, JetSystem};
use crate::symbolic::matrix::{numeric_rank, Matrix};
use crate::symbolic::real::with_digits;
use crate::symbolic::sample::Sampler;
use crate::symbolic::{Differentiable, Numeric, Real, Scalar};
use crate::webmodel::Web;

pub use ordinarity::{bound_report, is_p_ordinary, is_strongly_p_ordinary, BoundReport, OrderVerdict, OrdinarityReport, Verdict};
pub use relation::{verify_cobord, verify_relation, CobordVerdict, Relation, RelationSpec, RelationVerdict};

/// Pivot threshold used to flag ranks that depend on the tolerance.
pub const LOOSE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Exact rational arithmetic; rational webs only.
    Exact,
    /// High-precision floating point.
    Bigfloat,
}

/// How sample points are chosen and ranks evaluated.
#[derive(Clone, Debug)]
pub struct SampleConfig {
    pub count: usize,
    pub seed: u64,
    pub digits: usize,
    pub tol: f64,
    /// `None` picks exact arithmetic for rational webs.
    pub backend: Option<Backend>,
    /// Explicit points replace random sampling.
    pub points: Option<Vec<Vec<BigRational>>>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            count: 3,
            seed: 0,
            digits: 50,
            tol: 1e-20,
            backend: None,
            points: None,
        }
    }
}

impl SampleConfig {
    pub fn backend_for(&self, web: &Web) -> Backend {
        self.backend.unwrap_or(if web.is_rational() {
            Backend::Exact
        } else {
            Backend::Bigfloat
        })
    }
}

/// Which matrix of the jet system to rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    P,
    PClosed,
    M,
    MClosed,
}

/// A rank at one point; `ambiguous` when a looser tolerance disagrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointRank {
    pub rank: usize,
    pub ambiguous: bool,
}

fn pick<S: Differentiable>(js: &JetSystem<S>, which: Which, k: u32) -> Matrix<S> {
    match which {
        Which::P => js.p_matrix(k),
        Which::PClosed => js.p_closed(k),
        Which::M => js.m_matrix(k),
        Which::MClosed => js.m_closed(k),
    }
}

fn ranks_with<F: Numeric>(web: &Web, pt: &[F], p: usize, req: &[(Which, u32)], tol: f64) -> Result<Vec<PointRank>> {
    let kmax = req.iter().map(|r| r.1).max().unwrap_or(0);
    let js = JetSystem::at_point(web, pt, p, kmax)?;
    Ok(req
        .iter()
        .map(|&(w, k)| {
            let m = values(&pick(&js, w, k));
            let rank = numeric_rank(&m, tol);
            let ambiguous = !F::exact() && numeric_rank(&m, LOOSE_TOL) != rank;
            PointRank { rank, ambiguous }
        })
        .collect())
}

/// Ranks of the requested matrices at one point.
pub fn point_ranks(web: &Web, point: &[BigRational], p: usize, req: &[(Which, u32)], cfg: &SampleConfig) -> Result<Vec<PointRank>> {
    match cfg.backend_for(web) {
        Backend::Exact => ranks_with(web, point, p, req, cfg.tol),
        Backend::Bigfloat => with_digits(cfg.digits, || {
            let pt: Vec<Real> = point.iter().map(Real::from_rational).collect();
            ranks_with(web, &pt, p, req, cfg.tol)
        }),
    }
}

/// Sample points at which the generators admit jets of order `order`.
pub fn sample_points(web: &Web, cfg: &SampleConfig, order: u32) -> Result<Vec<Vec<BigRational>>> {
    if let Some(pts) = &cfg.points {
        return Ok(pts.clone());
    }
    let backend = cfg.backend_for(web);
    let mut s = Sampler::new(cfg.seed);
    let pts = s.accepted_points(web.n(), cfg.count, |p| {
        let ok = match backend {
            Backend::Exact => web.jets::<BigRational>(p, order).is_ok(),
            Backend::Bigfloat => with_digits(cfg.digits, || {
                let pt: Vec<Real> = p.iter().map(Real::from_rational).collect();
                web.jets(&pt, order).is_ok()
            }),
        };
        ok.then_some(())
    })?;
    Ok(pts.into_iter().map(|(p, _)| p).collect())
}

/// Ranks at every point, computed in parallel.
pub fn ranks_at_points(web: &Web, points: &[Vec<BigRational>], p: usize, req: &[(Which, u32)], cfg: &SampleConfig) -> Result<Vec<Vec<PointRank>>> {
    points
        .par_iter()
        .map(|pt| point_ranks(web, pt, p, req, cfg))
        .collect()
}

pub fn format_point(web: &Web, p: &[BigRational]) -> String {
    web.vars()
        .iter()
        .zip(p)
        .map(|(v, x)| format!("{v}={x}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Ranks of the order-`k` layer and of the full system up to `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderRanks {
    pub k: u32,
    pub p_rows: u64,
    pub p_cols: u64,
    pub p_max: u64,
    pub p_ranks: Vec<PointRank>,
    pub m_rows: u64,
    pub m_cols: u64,
    pub m_ranks: Vec<PointRank>,
    /// `α_k − rank M_k` at each point (tilde variant for closed profiles).
    pub rho: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankProfile {
    pub p: usize,
    pub closed: bool,
    pub backend: Backend,
    pub points: Vec<String>,
    pub orders: Vec<OrderRanks>,
}

/// Row count, column count and maximal rank of `P_k` (or `P̃_k`). Closed
/// systems keep all ambient rows, but their rank never exceeds `z(n,p,k)`.
pub fn layer_shape(web: &Web, p: usize, k: u32, closed: bool) -> (u64, u64, u64) {
    let (n, q, d, p, k) = (web.n() as i64, web.q as i64, web.d() as u64, p as i64, k as i64);
    let rows = binom(n, p) * c(n, k);
    if closed {
        let cols = d * z(q, p, k);
        (rows, cols, z(n, p, k).min(cols))
    } else {
        let cols = d * binom(q, p) * c(q, k);
        (rows, cols, rows.min(cols))
    }
}

/// Observed ranks of `P_k`, `M_k` (or their closed versions) for `k ≤ kmax`.
pub fn rank_profile(web: &Web, p: usize, kmax: u32, closed: bool, cfg: &SampleConfig) -> Result<RankProfile> {
    check_degree(web, p)?;
    let points = sample_points(web, cfg, kmax + 1)?;
    let (pw, mw) = if closed { (Which::PClosed, Which::MClosed) } else { (Which::P, Which::M) };
    let req: Vec<(Which, u32)> = (0..=kmax).flat_map(|k| [(pw, k), (mw, k)]).collect();
    let ranks = ranks_at_points(web, &points, p, &req, cfg)?;
    let mut orders = Vec::new();
    let (mut m_rows, mut m_cols) = (0, 0);
    for k in 0..=kmax {
        let (rows, cols, max) = layer_shape(web, p, k, closed);
        m_rows += rows;
        m_cols += cols;
        let i = 2 * k as usize;
        let p_ranks: Vec<PointRank> = ranks.iter().map(|r| r[i]).collect();
        let m_ranks: Vec<PointRank> = ranks.iter().map(|r| r[i + 1]).collect();
        let rho = m_ranks.iter().map(|r| m_cols as i64 - r.rank as i64).collect();
        orders.push(OrderRanks {
            k,
            p_rows: rows,
            p_cols: cols,
            p_max: max,
            p_ranks,
            m_rows,
            m_cols,
            m_ranks,
            rho,
        });
    }
    Ok(RankProfile {
        p,
        closed,
        backend: cfg.backend_for(web),
        points: points.iter().map(|pt| format_point(web, pt)).collect(),
        orders,
    })
}

pub(crate) fn check_degree(web: &Web, p: usize) -> Result<()> {
    if p == 0 || p > web.q {
        return Err(crate::Error::InvalidWeb(format!(
            "form degree {p} must lie in 1..={}",
            web.q
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn template_profile() {
        let w = template("2");
        let prof = rank_profile(&w, 2, 1, true, &SampleConfig::default()).unwrap();
        assert_eq!(prof.backend, Backend::Exact);
        assert_eq!(prof.orders[0].p_ranks.iter().map(|r| r.rank).collect::<Vec<_>>(), vec![3; 3]);
        assert_eq!(prof.orders[1].p_max, 8);
        assert!(prof.orders[1].p_ranks.iter().all(|r| r.rank == 8));
        // one closed relation survives order 0
        assert!(prof.orders[0].rho.iter().all(|&r| r == 1));
    }

    #[test]
    fn single_foliation_has_no_relation() {
        let w = Web::new("one", &["x", "y", "z"], 2, &[vec!["x", "y"]]).unwrap();
        let prof = rank_profile(&w, 1, 0, false, &SampleConfig::default()).unwrap();
        assert!(prof.orders[0].rho.iter().all(|&r| r == 0));
        assert!(prof.orders[0].p_ranks.iter().all(|r| r.rank == 2));
    }

    #[test]
    fn bigfloat_matches_exact() {
        let w = template("1/2");
        let exact = rank_profile(&w, 1, 1, false, &SampleConfig::default()).unwrap();
        let cfg = SampleConfig {
            backend: Some(Backend::Bigfloat),
            ..SampleConfig::default()
        };
        let num = rank_profile(&w, 1, 1, false, &cfg).unwrap();
        assert_eq!(exact.points, num.points);
        for (a, b) in exact.orders.iter().zip(&num.orders) {
            assert_eq!(a.p_ranks.iter().map(|r| r.rank).collect::<Vec<_>>(), b.p_ranks.iter().map(|r| r.rank).collect::<Vec<_>>());
            assert_eq!(a.rho, b.rho);
        }
    }
}
