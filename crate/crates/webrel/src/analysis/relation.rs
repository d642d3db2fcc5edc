//! Verification of abelian relations and cobords given as explicit forms.
//!
//! A relation assigns to foliation `i` the form `Σ_A f_{i,A}(u) du_A`,
//! written in the slot variables `u1..uq`. It is abelian when for every
//! `p`-subset `B` of ambient coordinates `Σ_i Σ_A (f_{i,A}∘u_i)·J^A_{i,B} = 0`,
//! and closed when each form is closed in the slot variables.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::parse::parse_in;
use crate::symbolic::real::with_digits;
use crate::symbolic::sample::Sampler;
use crate::symbolic::{subsets, Expr, Numeric, Real, Scalar};
use crate::webmodel::{jacobian_minor, Web};

/// Points used by numeric zero tests.
pub const NUMERIC_POINTS: usize = 5;
/// Working precision of numeric zero tests.
pub const NUMERIC_DIGITS: usize = 50;
/// A sum counts as zero when below this multiple of its largest term (or 1).
pub const NUMERIC_THRESHOLD: f64 = 1e-30;

/// File form: `{"p": int, "forms": [{"foliation": 1-based, "components": {"1,2": expr}}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSpec {
    pub p: usize,
    pub forms: Vec<FormSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormSpec {
    pub foliation: usize,
    #[serde(default)]
    pub components: BTreeMap<String, String>,
}

/// A parsed relation: for each foliation, components `(A, f_A)` with
/// 0-based ascending `A`.
#[derive(Clone, Debug)]
pub struct Relation {
    pub p: usize,
    pub q: usize,
    pub forms: Vec<Vec<(Vec<usize>, Expr)>>,
}

pub fn slot_names(q: usize) -> Vec<String> {
    (1..=q).map(|a| format!("u{a}")).collect()
}

fn parse_subset(key: &str, q: usize, p: usize) -> Result<Vec<usize>> {
    let bad = || Error::InvalidRelation(format!("component key `{key}` is not a {p}-subset of 1..={q}"));
    let idx: Vec<usize> = key
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let ascending = idx.windows(2).all(|w| w[0] < w[1]);
    if idx.len() != p || !ascending || idx.iter().any(|&a| a == 0 || a > q) {
        return Err(bad());
    }
    Ok(idx.into_iter().map(|a| a - 1).collect())
}

impl Relation {
    pub fn from_spec(spec: &RelationSpec, web: &Web) -> Result<Relation> {
        let q = web.q;
        if spec.p > q {
            return Err(Error::InvalidRelation(format!("degree {} exceeds codimension {q}", spec.p)));
        }
        let names = slot_names(q);
        let allowed: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut forms: Vec<Vec<(Vec<usize>, Expr)>> = vec![Vec::new(); web.d()];
        let mut seen = vec![false; web.d()];
        for f in &spec.forms {
            if f.foliation == 0 || f.foliation > web.d() {
                return Err(Error::InvalidRelation(format!(
                    "foliation {} out of range 1..={}",
                    f.foliation,
                    web.d()
                )));
            }
            let i = f.foliation - 1;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidRelation(format!("foliation {} listed twice", f.foliation)));
            }
            for (key, src) in &f.components {
                let a = parse_subset(key, q, spec.p)?;
                let e = parse_in(src, &allowed)?;
                if !e.is_zero() {
                    forms[i].push((a, e));
                }
            }
            forms[i].sort_by(|x, y| x.0.cmp(&y.0));
        }
        Ok(Relation { p: spec.p, q, forms })
    }

    pub fn from_json(src: &str, web: &Web) -> Result<Relation> {
        let spec: RelationSpec = serde_json::from_str(src)?;
        Relation::from_spec(&spec, web)
    }

    pub fn zero(p: usize, web: &Web) -> Relation {
        Relation {
            p,
            q: web.q,
            forms: vec![Vec::new(); web.d()],
        }
    }

    fn component(&self, i: usize, a: &[usize]) -> Option<&Expr> {
        self.forms[i].iter().find(|(x, _)| x == a).map(|(_, e)| e)
    }
}

/// Outcome of a zero test on a sum of terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroTest {
    pub zero: bool,
    /// Canonical form of the sum, or its largest sampled magnitude.
    pub residual: String,
    pub numeric: bool,
}

/// Tests `Σ terms ≡ 0`: exactly for rational terms, otherwise at
/// [`NUMERIC_POINTS`] sample points with a relative threshold. Numeric
/// points lie in the box `(0, 1]^n`, one connected region on which the
/// real branches of `sqrt`, `ln` and `atan` form a single germ.
pub fn zero_test(terms: &[Expr], vars: &[&str], seed: u64) -> Result<ZeroTest> {
    if terms.is_empty() {
        return Ok(ZeroTest {
            zero: true,
            residual: "0".into(),
            numeric: false,
        });
    }
    if terms.iter().all(Expr::is_rational) {
        let mut sum = crate::symbolic::RatFunc::zero();
        for t in terms {
            sum = sum.add(&t.to_ratfunc(vars)?);
        }
        return Ok(ZeroTest {
            zero: sum.is_zero(),
            residual: sum.to_string_with(vars),
            numeric: false,
        });
    }
    let mut s = Sampler::new(seed);
    let samples = with_digits(NUMERIC_DIGITS, || {
        s.accepted_positive_points(vars.len(), NUMERIC_POINTS, |p: &[BigRational]| {
            let pt: Vec<Real> = p.iter().map(Real::from_rational).collect();
            let mut sum = Real::zero();
            let mut biggest: f64 = 1.0;
            for t in terms {
                let v = t.eval_at(vars, &pt).ok()?;
                biggest = biggest.max(v.magnitude());
                sum = sum.add(&v);
            }
            Some((sum.magnitude(), biggest))
        })
    })?;
    let zero = samples.iter().all(|(_, (s, b))| *s <= NUMERIC_THRESHOLD * b);
    let worst = samples.iter().map(|(_, (s, _))| *s).fold(0.0, f64::max);
    Ok(ZeroTest {
        zero,
        residual: format!("{worst:e}"),
        numeric: true,
    })
}

/// A nonvanishing component found by a check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    /// 1-based foliation, absent for trace sums.
    pub foliation: Option<usize>,
    /// 1-based index set.
    pub index: Vec<usize>,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationVerdict {
    pub p: usize,
    pub is_abelian: bool,
    pub is_closed: bool,
    /// True when some check fell back to numeric sampling.
    pub numeric: bool,
    pub residuals: Vec<Residual>,
    pub closedness: Vec<Residual>,
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|x| x + 1).collect()
}

/// Terms of `d(Σ_A f_A du_A)` grouped by the target `(p+1)`-subset.
fn exterior_derivative(form: &[(Vec<usize>, Expr)], q: usize, p: usize, names: &[&str]) -> Vec<(Vec<usize>, Vec<Expr>)> {
    subsets(q, p + 1)
        .into_iter()
        .map(|cset| {
            let mut terms = Vec::new();
            for (pos, &lam) in cset.iter().enumerate() {
                let a: Vec<usize> = cset.iter().copied().filter(|&x| x != lam).collect();
                if let Some((_, f)) = form.iter().find(|(x, _)| *x == a) {
                    let t = f.differentiate(names[lam]);
                    terms.push(if pos % 2 == 1 { t.neg() } else { t });
                }
            }
            (cset, terms)
        })
        .collect()
}

/// Trace-zero and closedness checks of a relation.
pub fn verify_relation(web: &Web, rel: &Relation, seed: u64) -> Result<RelationVerdict> {
    if rel.forms.len() != web.d() || rel.q != web.q {
        return Err(Error::InvalidRelation("relation does not match the web".into()));
    }
    let vars = web.vars();
    let names = slot_names(web.q);
    let slots: Vec<&str> = names.iter().map(String::as_str).collect();
    let composed: Vec<Vec<(Vec<usize>, Expr)>> = rel
        .forms
        .iter()
        .enumerate()
        .map(|(i, form)| {
            let map: HashMap<String, Expr> = names
                .iter()
                .cloned()
                .zip(web.foliations[i].generators.iter().cloned())
                .collect();
            form.iter().map(|(a, f)| (a.clone(), f.substitute(&map))).collect()
        })
        .collect();
    let mut numeric = false;
    let mut residuals = Vec::new();
    for b in subsets(web.n(), rel.p) {
        let mut terms = Vec::new();
        for (i, form) in composed.iter().enumerate() {
            for (a, f) in form {
                terms.push(f.mul(&jacobian_minor(web, i, a, &b)));
            }
        }
        let t = zero_test(&terms, &vars, seed)?;
        numeric |= t.numeric;
        if !t.zero {
            residuals.push(Residual {
                foliation: None,
                index: one_based(&b),
                value: t.residual,
            });
        }
    }
    let mut closedness = Vec::new();
    if rel.p < web.q {
        for (i, form) in rel.forms.iter().enumerate() {
            for (cset, terms) in exterior_derivative(form, web.q, rel.p, &slots) {
                let t = zero_test(&terms, &slots, seed)?;
                numeric |= t.numeric;
                if !t.zero {
                    closedness.push(Residual {
                        foliation: Some(i + 1),
                        index: one_based(&cset),
                        value: t.residual,
                    });
                }
            }
        }
    }
    Ok(RelationVerdict {
        p: rel.p,
        is_abelian: residuals.is_empty(),
        is_closed: closedness.is_empty(),
        numeric,
        residuals,
        closedness,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CobordVerdict {
    pub eta: RelationVerdict,
    pub omega: RelationVerdict,
    pub differential_matches: bool,
    pub mismatches: Vec<Residual>,
    pub holds: bool,
}

/// Checks that `d η_i = ω_i` for every foliation, and that both are abelian.
pub fn verify_cobord(web: &Web, eta: &Relation, omega: &Relation, seed: u64) -> Result<CobordVerdict> {
    if eta.p + 1 != omega.p {
        return Err(Error::InvalidRelation(format!(
            "cobord needs degrees p−1 and p, got {} and {}",
            eta.p, omega.p
        )));
    }
    let ev = verify_relation(web, eta, seed)?;
    let ov = verify_relation(web, omega, seed)?;
    let names = slot_names(web.q);
    let slots: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut mismatches = Vec::new();
    for (i, form) in eta.forms.iter().enumerate() {
        for (cset, mut terms) in exterior_derivative(form, web.q, eta.p, &slots) {
            if let Some(w) = omega.component(i, &cset) {
                terms.push(w.neg());
            }
            let t = zero_test(&terms, &slots, seed)?;
            if !t.zero {
                mismatches.push(Residual {
                    foliation: Some(i + 1),
                    index: one_based(&cset),
                    value: t.residual,
                });
            }
        }
    }
    let differential_matches = mismatches.is_empty();
    Ok(CobordVerdict {
        holds: ev.is_abelian && ov.is_abelian && differential_matches,
        eta: ev,
        omega: ov,
        differential_matches,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn goldberg_w3() -> Web {
        Web::new(
            "w3",
            &["x", "y", "z", "t"],
            2,
            &[
                vec!["x", "y"],
                vec!["z", "t"],
                vec!["x + z + x^2*t/2", "y + t - x*t^2/2"],
                vec!["-x + z + x^2*t/2", "y - t - x*t^2/2"],
            ],
        )
        .unwrap()
    }

    fn spec(p: usize, comps: &[&[(&str, &str)]]) -> RelationSpec {
        RelationSpec {
            p,
            forms: comps
                .iter()
                .enumerate()
                .map(|(i, c)| FormSpec {
                    foliation: i + 1,
                    components: c.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn constant_two_relation() {
        let w = goldberg_w3();
        let s = spec(2, &[&[("1,2", "2")], &[("1,2", "2")], &[("1,2", "-1")], &[("1,2", "1")]]);
        let v = verify_relation(&w, &Relation::from_spec(&s, &w).unwrap(), 0).unwrap();
        assert!(v.is_abelian && v.is_closed && !v.numeric);
        let s = spec(2, &[&[("1,2", "3")], &[("1,2", "2")], &[("1,2", "-1")], &[("1,2", "1")]]);
        let v = verify_relation(&w, &Relation::from_spec(&s, &w).unwrap(), 0).unwrap();
        assert!(!v.is_abelian);
        assert_eq!(v.residuals.len(), 1);
        assert_eq!(v.residuals[0].index, vec![1, 2]);
        assert_eq!(v.residuals[0].value, "1");
    }

    #[test]
    fn zero_relation_and_closedness() {
        let w = goldberg_w3();
        let v = verify_relation(&w, &Relation::zero(1, &w), 0).unwrap();
        assert!(v.is_abelian && v.is_closed);
        let s = spec(1, &[&[("1", "u2")]]);
        let v = verify_relation(&w, &Relation::from_spec(&s, &w).unwrap(), 0).unwrap();
        assert!(!v.is_closed);
        assert!(!v.is_abelian);
    }

    #[test]
    fn malformed_specs() {
        let w = goldberg_w3();
        for bad in [spec(2, &[&[("2,1", "1")]]), spec(2, &[&[("1", "1")]]), spec(1, &[&[("3", "1")]])] {
            assert!(matches!(Relation::from_spec(&bad, &w), Err(Error::InvalidRelation(_))));
        }
        let s = spec(1, &[&[("1", "x")]]);
        assert!(matches!(Relation::from_spec(&s, &w), Err(Error::Parse(_))));
        let s = RelationSpec {
            p: 1,
            forms: vec![FormSpec {
                foliation: 5,
                components: BTreeMap::new(),
            }],
        };
        assert!(Relation::from_spec(&s, &w).is_err());
    }

    #[test]
    fn numeric_zero_test() {
        let e = crate::symbolic::parse("atan(u1)").unwrap();
        let t = zero_test(&[e, crate::symbolic::parse("-u1").unwrap()], &["u1"], 0).unwrap();
        assert!(t.numeric);
        assert!(!t.zero);
        let sq = crate::symbolic::parse("sqrt(u1^2 + 1)^2").unwrap();
        let t = zero_test(&[sq, crate::symbolic::parse("-u1^2 - 1").unwrap()], &["u1"], 0).unwrap();
        assert!(t.zero && t.numeric);
    }

    #[test]
    fn cobord_of_a_parallel_web() {
        let w = Web::new(
            "par",
            &["x", "y", "z"],
            2,
            &[vec!["x", "y"], vec!["y", "z"], vec!["z", "x"], vec!["x + 2*y + 3*z", "2*x - y + z"]],
        )
        .unwrap();
        let omega = spec(2, &[&[("1,2", "5")], &[("1,2", "-5")], &[("1,2", "-5")], &[("1,2", "1")]]);
        let eta = spec(
            1,
            &[
                &[("1", "-2*(u1 + 2*u2)"), ("2", "u1 + 2*u2")],
                &[("1", "3*u2"), ("2", "-(2*u1 + 3*u2)")],
                &[("1", "-u2"), ("2", "-6*u1")],
                &[("2", "u1")],
            ],
        );
        let o = Relation::from_spec(&omega, &w).unwrap();
        let e = Relation::from_spec(&eta, &w).unwrap();
        let v = verify_cobord(&w, &e, &o, 0).unwrap();
        assert!(v.holds, "{v:?}");
        let v = verify_cobord(&w, &Relation::zero(1, &w), &o, 0).unwrap();
        assert!(!v.holds && !v.differential_matches);
        assert!(verify_cobord(&w, &o, &o, 0).is_err());
    }
}
