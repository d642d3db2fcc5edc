//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::collections::HashMap;

use num_rational::BigRational;

use webrel::analysis::Relation;
use webrel::jets::{m_coeffs, values, JetSystem, Peel};
use webrel::symbolic::{multi_indices, parse, Differentiable, EvalDomain, Expr, MultiIndex, Numeric, RatFunc, Scalar};
use webrel::webmodel::{first_derivatives, Web};

pub const VARS: [&str; 4] = ["x", "y", "z", "t"];
pub const SLOTS: [&str; 2] = ["s", "w"];

pub fn data_path(rel: &str) -> String {
    format!("{}/data/{rel}", env!("CARGO_MANIFEST_DIR"))
}

pub fn web(name: &str) -> Web {
    let src = std::fs::read_to_string(data_path(&format!("webs/{name}.json"))).expect("web file");
    Web::from_json(&src).expect("valid web")
}

pub fn relation(name: &str, web: &Web) -> Relation {
    let src = std::fs::read_to_string(data_path(&format!("relations/{name}.json"))).expect("relation file");
    Relation::from_json(&src, web).expect("valid relation")
}

pub fn rf(s: &str, vars: &[&str]) -> RatFunc {
    parse(s).expect("expression").to_ratfunc(vars).expect("rational")
}

/// Number of monomials of degree `≤ deg` in `n` variables.
pub fn monomial_count(n: usize, deg: u32) -> usize {
    (0..=deg).map(|h| multi_indices(n, h).len()).sum()
}

/// Polynomial with the given coefficients on the monomials of degree `≤ deg`,
/// graded; missing coefficients are zero.
pub fn poly_str(vars: &[&str], deg: u32, coeffs: &[i64]) -> String {
    let mut terms = vec!["0".to_string()];
    let mut it = coeffs.iter();
    for h in 0..=deg {
        for m in multi_indices(vars.len(), h) {
            let Some(&c) = it.next() else { break };
            if c == 0 {
                continue;
            }
            let mut t = format!("({c})");
            for (v, &e) in vars.iter().zip(&m.0) {
                if e > 0 {
                    t += &format!("*{v}^{e}");
                }
            }
            terms.push(t);
        }
    }
    terms.join(" + ")
}

pub fn derive(f: &RatFunc, l: &MultiIndex) -> RatFunc {
    let mut out = f.clone();
    for (v, &e) in l.0.iter().enumerate() {
        for _ in 0..e {
            out = out.derivative(v);
        }
    }
    out
}

/// Both sides of the chain-rule identity
/// `((f∘u)·J)'_L = Σ_{|K|≤|L|} M_L^K·(f'_K∘u)` for polynomial data.
pub fn master_identity(n: usize, f: &str, u: &[String], j: &str, l: &MultiIndex) -> (RatFunc, RatFunc) {
    let q = u.len();
    let vars = &VARS[..n];
    let slots = &SLOTS[..q];
    let subst: HashMap<String, Expr> = slots
        .iter()
        .zip(u)
        .map(|(s, g)| (s.to_string(), parse(g).unwrap()))
        .collect();
    let fe = parse(f).unwrap();
    let jr = rf(j, vars);
    let lhs = derive(&fe.substitute(&subst).to_ratfunc(vars).unwrap().mul(&jr), l);
    let ur: Vec<RatFunc> = u.iter().map(|g| rf(g, vars)).collect();
    let du = first_derivatives(&[ur], n).remove(0);
    let table = m_coeffs(&du, &jr, n, l.degree(), Peel::First);
    let mut rhs = RatFunc::zero();
    for h in 0..=l.degree() {
        for k in multi_indices(q, h) {
            let m = table.get(l, &k);
            if m.is_zero() {
                continue;
            }
            let fk = fe.derive_multi(slots, &k.0).substitute(&subst).to_ratfunc(vars).unwrap();
            rhs = rhs.add(&m.mul(&fk));
        }
    }
    (lhs, rhs)
}

/// `M_k·v` at a point, where `v` holds the jet coordinates `f'_{iA,K}(u_i(x))`
/// of a relation; all entries vanish when the relation's jet solves the system.
pub fn relation_jet_residual<F: Numeric + EvalDomain>(web: &Web, rel: &Relation, k: u32, point: &[F]) -> Vec<F> {
    let js = JetSystem::at_point(web, point, rel.p, k).expect("jets at point");
    let m = values(&js.m_matrix(k));
    let u = web.eval_generators(point).expect("generators at point");
    let names = webrel::analysis::relation::slot_names(web.q);
    let slots: Vec<&str> = names.iter().map(String::as_str).collect();
    let v: Vec<F> = js
        .layout
        .cols_upto(k)
        .iter()
        .map(|col| match rel.forms[col.i].iter().find(|(a, _)| *a == col.a) {
            Some((_, e)) => e.derive_multi(&slots, &col.k.0).eval_at(&slots, &u[col.i]).expect("evaluate"),
            None => F::zero(),
        })
        .collect();
    m.mul_vec(&v)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}
