//! Ordinarity verdicts from the ranks of the top layers `P_k` (or `P̃_k`).
//!
//! A rank counts as attained when it is reached, without tolerance
//! ambiguity, at some sample point: maximal rank is an open condition, so
//! one good point certifies it generically.

use serde::{Deserialize, Serialize};

use super::{check_degree, format_point, layer_shape, ranks_at_points, sample_points, PointRank, SampleConfig, Which};
use crate::combinat::{k_one, k_zero, z, BoundProfile};
use crate::error::Result;
use crate::webmodel::{bracket_test, Web};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Ordinary,
    NotOrdinary,
    #[serde(rename = "undetermined_at_points")]
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub k: u32,
    pub rows: u64,
    pub cols: u64,
    pub max_rank: u64,
    pub ranks: Vec<PointRank>,
    pub attained: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdinarityReport {
    pub p: usize,
    /// Closed (strong) variant.
    pub strong: bool,
    /// Plain question answered by the closed system (`p = q`).
    pub delegated: bool,
    /// `k⁰_p` or `k¹_p`.
    pub threshold: Option<u64>,
    /// Last order checked.
    pub horizon: u32,
    pub points: Vec<String>,
    pub orders: Vec<OrderVerdict>,
    /// 1-based foliations whose tangent fields span an integrable plane field.
    pub bracket_pair: Option<(usize, usize)>,
    pub verdict: Verdict,
}

/// Orders to check: up to the threshold plus one, or up to the threshold
/// itself when that layer is square. Without a threshold only `k = 0`.
pub fn horizon(web: &Web, p: usize, strong: bool) -> (Option<u64>, u32) {
    let (n, d, q, pp) = (web.n() as u64, web.d() as u64, web.q as u64, p as u64);
    let t = if strong { k_one(n, d, q, pp) } else { k_zero(n, d, q, pp) };
    let Some(k) = t else { return (None, 0) };
    let square = if strong {
        z(n as i64, p as i64, k as i64) == d * z(q as i64, p as i64, k as i64)
    } else {
        let (rows, cols, _) = layer_shape(web, p, k as u32, false);
        rows == cols
    };
    (t, if square { k as u32 } else { k as u32 + 1 })
}

/// First pair of foliations whose bracket criterion holds, when it applies
/// (`q = n−1`, `p ≤ n−2`); such webs have infinite `p`-rank.
pub fn bracket_obstruction(web: &Web, p: usize) -> Result<Option<(usize, usize)>> {
    let n = web.n();
    if web.q + 1 != n || p + 2 > n {
        return Ok(None);
    }
    for i in 0..web.d() {
        for j in i + 1..web.d() {
            if bracket_test(web, i, j)? {
                return Ok(Some((i + 1, j + 1)));
            }
        }
    }
    Ok(None)
}

fn order_verdicts(web: &Web, p: usize, strong: bool, horizon: u32, ranks: &[Vec<PointRank>], offset: usize) -> Vec<OrderVerdict> {
    (0..=horizon)
        .map(|k| {
            let (rows, cols, max_rank) = layer_shape(web, p, k, strong);
            let r: Vec<PointRank> = ranks.iter().map(|pr| pr[offset + k as usize]).collect();
            let attained = r.iter().any(|x| !x.ambiguous && x.rank as u64 == max_rank);
            OrderVerdict {
                k,
                rows,
                cols,
                max_rank,
                ranks: r,
                attained,
            }
        })
        .collect()
}

fn overall(orders: &[OrderVerdict], obstructed: bool) -> Verdict {
    if obstructed {
        return Verdict::NotOrdinary;
    }
    if orders.iter().all(|o| o.attained) {
        return Verdict::Ordinary;
    }
    let decided_failure = orders
        .iter()
        .any(|o| !o.attained && o.ranks.iter().any(|r| !r.ambiguous));
    if decided_failure {
        Verdict::NotOrdinary
    } else {
        Verdict::Undetermined
    }
}

/// Plain and strong reports from one pass over the sample points.
fn reports(web: &Web, p: usize, cfg: &SampleConfig) -> Result<(OrdinarityReport, OrdinarityReport)> {
    check_degree(web, p)?;
    let (t0, h0) = horizon(web, p, false);
    let (t1, h1) = horizon(web, p, true);
    let delegated = p == web.q;
    let points = sample_points(web, cfg, h0.max(h1) + 1)?;
    let mut req: Vec<(Which, u32)> = (0..=h1).map(|k| (Which::PClosed, k)).collect();
    if !delegated {
        req.extend((0..=h0).map(|k| (Which::P, k)));
    }
    let ranks = ranks_at_points(web, &points, p, &req, cfg)?;
    let bracket_pair = bracket_obstruction(web, p)?;
    let shown: Vec<String> = points.iter().map(|pt| format_point(web, pt)).collect();
    let strong_orders = order_verdicts(web, p, true, h1, &ranks, 0);
    let strong = OrdinarityReport {
        p,
        strong: true,
        delegated: false,
        threshold: t1,
        horizon: h1,
        points: shown.clone(),
        verdict: overall(&strong_orders, bracket_pair.is_some()),
        orders: strong_orders,
        bracket_pair,
    };
    let plain = if delegated {
        OrdinarityReport {
            strong: false,
            delegated: true,
            ..strong.clone()
        }
    } else {
        let orders = order_verdicts(web, p, false, h0, &ranks, h1 as usize + 1);
        OrdinarityReport {
            p,
            strong: false,
            delegated: false,
            threshold: t0,
            horizon: h0,
            points: shown,
            verdict: overall(&orders, bracket_pair.is_some()),
            orders,
            bracket_pair,
        }
    };
    Ok((plain, strong))
}

/// Whether `P_k(p)` has maximal rank for every `k` up to the horizon. For
/// `p = q` the closed system answers the question.
pub fn is_p_ordinary(web: &Web, p: usize, cfg: &SampleConfig) -> Result<OrdinarityReport> {
    Ok(reports(web, p, cfg)?.0)
}

/// Whether `P̃_k(p)` has maximal rank `min(z(n,p,k), d·z(q,p,k))` up to the horizon.
pub fn is_strongly_p_ordinary(web: &Web, p: usize, cfg: &SampleConfig) -> Result<OrdinarityReport> {
    Ok(reports(web, p, cfg)?.1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub web: String,
    pub profile: BoundProfile,
    pub ordinary: OrdinarityReport,
    pub strong: OrdinarityReport,
    /// Both ranks are infinite by the bracket criterion.
    pub infinite_rank: bool,
    /// `r_p ≤ π⁰_p`, known when the web is ordinary.
    pub rank_bound: Option<u64>,
    /// `r̃_p ≤ π′_p`, known when the web is strongly ordinary.
    pub closed_rank_bound: Option<u64>,
}

pub fn bound_report(web: &Web, p: usize, cfg: &SampleConfig) -> Result<BoundReport> {
    let profile = BoundProfile::new(web.n() as u64, web.d() as u64, web.q as u64, p as u64)?;
    let (ordinary, strong) = reports(web, p, cfg)?;
    let infinite_rank = strong.bracket_pair.is_some();
    let rank_bound = if ordinary.delegated {
        (strong.verdict == Verdict::Ordinary).then_some(profile.pi_prime)
    } else {
        (ordinary.verdict == Verdict::Ordinary).then_some(profile.pi0)
    };
    let closed_rank_bound = (strong.verdict == Verdict::Ordinary).then_some(profile.pi_prime);
    Ok(BoundReport {
        web: web.name.clone(),
        profile,
        ordinary,
        strong,
        infinite_rank,
        rank_bound,
        closed_rank_bound,
    })
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
    fn horizons() {
        let w = template("2");
        // k¹₂(3,4,2) = 1 and the closed layer is square there
        assert_eq!(horizon(&w, 2, true), (Some(1), 1));
        // ratio 3(k+2)/4 stays ≤ 4 up to k = 3, where the layer is 30×32
        assert_eq!(horizon(&w, 1, false), (Some(3), 4));
    }

    #[test]
    fn template_degree_two_is_strongly_ordinary() {
        let w = template("2");
        let r = bound_report(&w, 2, &SampleConfig::default()).unwrap();
        assert!(r.ordinary.delegated);
        assert_eq!(r.strong.verdict, Verdict::Ordinary);
        assert_eq!(r.ordinary.verdict, Verdict::Ordinary);
        assert_eq!(r.closed_rank_bound, Some(1));
        assert!(!r.infinite_rank);
    }

    #[test]
    fn template_degree_one_has_infinite_rank() {
        let w = template("2");
        let r = bound_report(&w, 1, &SampleConfig::default()).unwrap();
        assert_eq!(r.ordinary.bracket_pair, Some((1, 2)));
        assert_eq!(r.ordinary.verdict, Verdict::NotOrdinary);
        assert_eq!(r.strong.verdict, Verdict::NotOrdinary);
        assert!(r.infinite_rank);
        assert_eq!(r.rank_bound, None);
    }

    #[test]
    fn degenerate_template_is_not_ordinary() {
        // φ = x + y, ψ = x: C = aq − pb = −1, A = br − qc = 0
        let w = Web::new("deg", &["x", "y", "z"], 2, &[vec!["x", "y"], vec!["y", "z"], vec!["z", "x"], vec!["x + y", "x"]]).unwrap();
        let r = is_strongly_p_ordinary(&w, 2, &SampleConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NotOrdinary);
        assert!(r.orders[0].attained);
        assert!(!r.orders[1].attained);
    }

    #[test]
    fn verdict_semantics() {
        let amb = PointRank { rank: 3, ambiguous: true };
        let low = PointRank { rank: 2, ambiguous: false };
        let ok = PointRank { rank: 3, ambiguous: false };
        let ov = |ranks: Vec<PointRank>| OrderVerdict {
            k: 0,
            rows: 3,
            cols: 3,
            max_rank: 3,
            attained: ranks.iter().any(|r| !r.ambiguous && r.rank == 3),
            ranks,
        };
        assert_eq!(overall(&[ov(vec![low, ok])], false), Verdict::Ordinary);
        assert_eq!(overall(&[ov(vec![amb, amb])], false), Verdict::Undetermined);
        assert_eq!(overall(&[ov(vec![amb, low])], false), Verdict::NotOrdinary);
        assert_eq!(overall(&[ov(vec![ok])], true), Verdict::NotOrdinary);
    }
}
