//! Webs: foliations given by generator functions, their jacobians and
//! tangent data.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::matrix::{numeric_rank, symbolic_rank};
use crate::symbolic::parse::parse_in;
use crate::symbolic::real::{with_digits, Real};
use crate::symbolic::sample::Sampler;
use crate::symbolic::{Differentiable, EvalDomain, Expr, Jet, Matrix, Numeric, RatFunc, Scalar};

/// Serialized form of a web.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WebFile {
    pub name: String,
    pub dimension: usize,
    pub codimension: usize,
    pub variables: Vec<String>,
    pub foliations: Vec<FoliationFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoliationFile {
    pub generators: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Foliation {
    pub generators: Vec<Expr>,
}

#[derive(Clone, Debug)]
pub struct Web {
    pub name: String,
    pub variables: Vec<String>,
    pub q: usize,
    pub foliations: Vec<Foliation>,
}

impl Web {
    /// Builds a web from generator strings.
    pub fn new(name: &str, variables: &[&str], q: usize, generators: &[Vec<&str>]) -> Result<Web> {
        let file = WebFile {
            name: name.into(),
            dimension: variables.len(),
            codimension: q,
            variables: variables.iter().map(|s| s.to_string()).collect(),
            foliations: generators
                .iter()
                .map(|g| FoliationFile {
                    generators: g.iter().map(|s| s.to_string()).collect(),
                })
                .collect(),
        };
        Web::from_file(&file)
    }

    pub fn from_json(src: &str) -> Result<Web> {
        let file: WebFile = serde_json::from_str(src)?;
        Web::from_file(&file)
    }

    pub fn from_file(f: &WebFile) -> Result<Web> {
        let n = f.variables.len();
        if f.dimension != n {
            return Err(Error::InvalidWeb(format!(
                "dimension {} but {} variables",
                f.dimension, n
            )));
        }
        if n < 2 || f.codimension < 1 || f.codimension >= n {
            return Err(Error::InvalidWeb(format!(
                "codimension {} must lie in 1..={} for dimension {n}",
                f.codimension,
                n.saturating_sub(1)
            )));
        }
        if f.foliations.is_empty() {
            return Err(Error::InvalidWeb("no foliations".into()));
        }
        for (i, v) in f.variables.iter().enumerate() {
            let ok = v.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok || ["sqrt", "ln", "atan"].contains(&v.as_str()) {
                return Err(Error::InvalidWeb(format!("bad variable name `{v}`")));
            }
            if f.variables[..i].contains(v) {
                return Err(Error::InvalidWeb(format!("duplicate variable `{v}`")));
            }
        }
        let names: Vec<&str> = f.variables.iter().map(String::as_str).collect();
        let mut foliations = Vec::with_capacity(f.foliations.len());
        for (i, fol) in f.foliations.iter().enumerate() {
            if fol.generators.len() != f.codimension {
                return Err(Error::InvalidWeb(format!(
                    "foliation {} has {} generators, expected {}",
                    i + 1,
                    fol.generators.len(),
                    f.codimension
                )));
            }
            let generators = fol
                .generators
                .iter()
                .map(|g| parse_in(g, &names))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            foliations.push(Foliation { generators });
        }
        Ok(Web {
            name: f.name.clone(),
            variables: f.variables.clone(),
            q: f.codimension,
            foliations,
        })
    }

    pub fn to_file(&self) -> WebFile {
        WebFile {
            name: self.name.clone(),
            dimension: self.n(),
            codimension: self.q,
            variables: self.variables.clone(),
            foliations: self
                .foliations
                .iter()
                .map(|f| FoliationFile {
                    generators: f.generators.iter().map(|g| g.to_string()).collect(),
                })
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn d(&self) -> usize {
        self.foliations.len()
    }

    pub fn vars(&self) -> Vec<&str> {
        self.variables.iter().map(String::as_str).collect()
    }

    /// True when every generator is a rational function.
    pub fn is_rational(&self) -> bool {
        self.foliations
            .iter()
            .all(|f| f.generators.iter().all(Expr::is_rational))
    }

    /// Generators as canonical rational functions.
    pub fn ratfuncs(&self) -> Result<Vec<Vec<RatFunc>>> {
        let vars = self.vars();
        self.foliations
            .iter()
            .map(|f| {
                f.generators
                    .iter()
                    .map(|g| {
                        g.to_ratfunc(&vars)
                            .map_err(|_| Error::TranscendentalUnsupported(g.to_string()))
                    })
                    .collect()
            })
            .collect()
    }

    /// Generators as jets of the given order at `point`.
    pub fn jets<F: Numeric>(&self, point: &[F], order: u32) -> Result<Vec<Vec<Jet<F>>>> {
        let n = self.n();
        let xs: Vec<Jet<F>> = (0..n)
            .map(|i| Jet::variable(n, i, point[i].clone(), order))
            .collect();
        self.eval_generators(&xs)
    }

    /// Generators evaluated into any domain, with `xs[i]` standing for variable `i`.
    pub fn eval_generators<S: EvalDomain>(&self, xs: &[S]) -> Result<Vec<Vec<S>>> {
        let vars = self.vars();
        let mut out = Vec::with_capacity(self.d());
        for f in &self.foliations {
            let mut row = Vec::with_capacity(self.q);
            for g in &f.generators {
                row.push(g.eval_at(&vars, xs)?);
            }
            out.push(row);
        }
        Ok(out)
    }
}

/// First derivatives `∂u_α/∂x_λ` as a `q × n` table per foliation.
pub fn first_derivatives<S: Differentiable>(u: &[Vec<S>], n: usize) -> Vec<Vec<Vec<S>>> {
    u.iter()
        .map(|ui| {
            ui.iter()
                .map(|g| (0..n).map(|l| g.derivative(l)).collect())
                .collect()
        })
        .collect()
}

/// Determinant of the `p × p` block of `du` with rows `a` and columns `b`.
pub fn minor<S: Scalar>(du: &[Vec<S>], a: &[usize], b: &[usize]) -> S {
    let m = Matrix::from_fn(a.len(), b.len(), |r, c| du[a[r]][b[c]].clone());
    m.det_cofactor().expect("square minor")
}

/// The jacobian minor `J^A_{i,B}` as an expression.
pub fn jacobian_minor(web: &Web, i: usize, a: &[usize], b: &[usize]) -> Expr {
    let vars = web.vars();
    let du: Vec<Vec<Expr>> = web.foliations[i]
        .generators
        .iter()
        .map(|g| vars.iter().map(|v| g.differentiate(v)).collect())
        .collect();
    minor(&du, a, b)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub failures: Vec<String>,
}

fn fmt_point(p: &[BigRational]) -> String {
    let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn jac_ranks<F: Numeric>(web: &Web, point: &[BigRational], failures: &mut Vec<String>) -> Result<()> {
    let pt: Vec<F> = point.iter().map(F::from_rational).collect();
    let u = web.jets(&pt, 1)?;
    let n = web.n();
    let q = web.q;
    let du: Vec<Vec<Vec<F>>> = u
        .iter()
        .map(|ui| {
            ui.iter()
                .map(|g| (0..n).map(|l| g.derivative(l).value().clone()).collect())
                .collect()
        })
        .collect();
    let tol = 1e-20;
    for (i, dui) in du.iter().enumerate() {
        let m = Matrix::from_rows(dui.clone());
        if numeric_rank(&m, tol) < q {
            failures.push(format!(
                "foliation {} is singular at {}",
                i + 1,
                fmt_point(point)
            ));
        }
    }
    for i in 0..du.len() {
        for j in i + 1..du.len() {
            let mut rows = du[i].clone();
            rows.extend(du[j].iter().cloned());
            let m = Matrix::from_rows(rows);
            if numeric_rank(&m, tol) < (2 * q).min(n) {
                failures.push(format!(
                    "foliations {} and {} are not transverse at {}",
                    i + 1,
                    j + 1,
                    fmt_point(point)
                ));
            }
        }
    }
    Ok(())
}

/// Regularity of each foliation and pairwise transversality at the given
/// points. Points where the generators cannot be evaluated are reported.
pub fn validate(web: &Web, points: &[Vec<BigRational>]) -> ValidationReport {
    let mut failures = Vec::new();
    for p in points {
        let r = if web.is_rational() {
            jac_ranks::<BigRational>(web, p, &mut failures)
        } else {
            with_digits(50, || jac_ranks::<Real>(web, p, &mut failures))
        };
        if let Err(e) = r {
            failures.push(format!("cannot evaluate at {}: {e}", fmt_point(p)));
        }
    }
    ValidationReport {
        ok: failures.is_empty(),
        failures,
    }
}

/// Validation at `count` seeded random points where the web is defined.
pub fn validate_random(web: &Web, count: usize, seed: u64) -> Result<ValidationReport> {
    let mut s = Sampler::new(seed);
    let pts = s.accepted_points(web.n(), count, |p| {
        let ok = if web.is_rational() {
            web.jets::<BigRational>(p, 1).is_ok()
        } else {
            with_digits(50, || {
                let pt: Vec<Real> = p.iter().map(Real::from_rational).collect();
                web.jets(&pt, 1).is_ok()
            })
        };
        ok.then_some(())
    })?;
    let pts: Vec<Vec<BigRational>> = pts.into_iter().map(|(p, _)| p).collect();
    Ok(validate(web, &pts))
}

/// Signed maximal minors of a `(n−1) × n` jacobian: the field spanning its kernel.
pub fn kernel_field<S: Scalar>(du: &[Vec<S>], n: usize) -> Vec<S> {
    let rows: Vec<usize> = (0..du.len()).collect();
    (0..n)
        .map(|l| {
            let cols: Vec<usize> = (0..n).filter(|&c| c != l).collect();
            let m = minor(du, &rows, &cols);
            if (n - 1 + l).is_multiple_of(2) {
                m
            } else {
                m.neg()
            }
        })
        .collect()
}

/// Tangent fields `X_i` of a codimension `n−1` web, as expressions.
pub fn tangent_fields(web: &Web) -> Result<Vec<Vec<Expr>>> {
    let n = web.n();
    if web.q + 1 != n {
        return Err(Error::WrongCodimension { n, q: web.q });
    }
    let vars = web.vars();
    Ok(web
        .foliations
        .iter()
        .map(|f| {
            let du: Vec<Vec<Expr>> = f
                .generators
                .iter()
                .map(|g| vars.iter().map(|v| g.differentiate(v)).collect())
                .collect();
            kernel_field(&du, n)
        })
        .collect())
}

/// Lie bracket `[X, Y]` of vector fields with differentiable components.
pub fn bracket<S: Differentiable>(x: &[S], y: &[S]) -> Vec<S> {
    let n = x.len();
    (0..n)
        .map(|m| {
            let mut acc = S::zero();
            for l in 0..n {
                acc = acc.add(&x[l].mul(&y[m].derivative(l)));
                acc = acc.sub(&y[l].mul(&x[m].derivative(l)));
            }
            acc
        })
        .collect()
}

fn bracket_rank<S: Differentiable>(u: &[Vec<S>], n: usize, i: usize, j: usize) -> Matrix<S> {
    let du = first_derivatives(u, n);
    let x = kernel_field(&du[i], n);
    let y = kernel_field(&du[j], n);
    let b = bracket(&x, &y);
    Matrix::from_rows(vec![x, y, b])
}

/// True when `[X_i, X_j]` lies in the span of `X_i` and `X_j`.
pub fn bracket_test(web: &Web, i: usize, j: usize) -> Result<bool> {
    bracket_test_seeded(web, i, j, 0)
}

pub fn bracket_test_seeded(web: &Web, i: usize, j: usize, seed: u64) -> Result<bool> {
    let n = web.n();
    if web.q + 1 != n {
        return Err(Error::WrongCodimension { n, q: web.q });
    }
    if i == j || i >= web.d() || j >= web.d() {
        return Err(Error::InvalidWeb(format!("bad foliation pair ({}, {})", i + 1, j + 1)));
    }
    if web.is_rational() {
        let u = web.ratfuncs()?;
        let m = bracket_rank(&u, n, i, j);
        return Ok(symbolic_rank(&m) <= 2);
    }
    let mut s = Sampler::new(seed);
    let votes = with_digits(50, || {
        s.accepted_points(n, 3, |p| {
            let pt: Vec<Real> = p.iter().map(Real::from_rational).collect();
            let u = web.jets(&pt, 2).ok()?;
            let m = bracket_rank(&u, n, i, j).map(|e| e.value().clone());
            Some(numeric_rank(&m, 1e-20) <= 2)
        })
    })?;
    Ok(votes.iter().filter(|(_, v)| *v).count() >= 2)
}

/// True when every generator is affine.
pub fn is_affine(web: &Web) -> bool {
    match web.ratfuncs() {
        Ok(u) => u
            .iter()
            .flatten()
            .all(|r| r.is_polynomial() && r.num().total_degree() <= 1),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn parses_and_rejects() {
        let w = template("2");
        assert_eq!((w.n(), w.q, w.d()), (3, 2, 4));
        let back = Web::from_file(&w.to_file()).unwrap();
        assert_eq!(back.to_file(), w.to_file());
        let bad = r#"{"name":"e","dimension":3,"codimension":2,"variables":["x","y","z"],"foliations":[]}"#;
        assert!(matches!(Web::from_json(bad), Err(Error::InvalidWeb(_))));
        let bad = r#"{"name":"e","dimension":2,"codimension":1,"variables":["x","y"],"foliations":[{"generators":["x+"]}]}"#;
        assert!(matches!(Web::from_json(bad), Err(Error::Parse(_))));
        let bad = r#"{"name":"e","dimension":2,"codimension":1,"variables":["x","y"],"foliations":[{"generators":["w"]}]}"#;
        assert!(matches!(Web::from_json(bad), Err(Error::Parse(_))));
        let bad = r#"{"name":"e","dimension":2,"codimension":2,"variables":["x","y"],"foliations":[{"generators":["x","y"]}]}"#;
        assert!(matches!(Web::from_json(bad), Err(Error::InvalidWeb(_))));
    }

    #[test]
    fn minors_of_template() {
        let w = template("2");
        let vars = w.vars();
        // F4 = (x+y, ψ): a=1, b=1, c=0, p = ψ_x, q = 0, r = ψ_z
        let pe = parse("1 + x + 2*z").unwrap();
        let re = parse("1 + 2*x + z").unwrap();
        let a = jacobian_minor(&w, 3, &[0, 1], &[1, 2]).to_ratfunc(&vars).unwrap();
        assert_eq!(a, re.to_ratfunc(&vars).unwrap());
        let c = jacobian_minor(&w, 3, &[0, 1], &[0, 1]).to_ratfunc(&vars).unwrap();
        assert_eq!(c, pe.neg().to_ratfunc(&vars).unwrap());
        let id = jacobian_minor(&w, 0, &[0, 1], &[0, 1]).to_ratfunc(&vars).unwrap();
        assert_eq!(id, RatFunc::one());
        let swapped = jacobian_minor(&w, 3, &[1, 0], &[1, 2]).to_ratfunc(&vars).unwrap();
        assert_eq!(swapped, a.neg());
    }

    #[test]
    fn tangent_fields_annihilate() {
        let w = template("1/2");
        let vars = w.vars();
        let x = tangent_fields(&w).unwrap();
        let xr: Vec<Vec<RatFunc>> = x
            .iter()
            .map(|f| f.iter().map(|e| e.to_ratfunc(&vars).unwrap()).collect())
            .collect();
        assert_eq!(xr[0], vec![RatFunc::zero(), RatFunc::zero(), RatFunc::one()]);
        assert_eq!(xr[1], vec![RatFunc::one(), RatFunc::zero(), RatFunc::zero()]);
        let u = w.ratfuncs().unwrap();
        for (i, ui) in u.iter().enumerate() {
            for g in ui {
                let mut s = RatFunc::zero();
                for l in 0..3 {
                    s = s.add(&g.derivative(l).mul(&xr[i][l]));
                }
                assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn brackets_and_affinity() {
        let w = template("2");
        assert!(bracket_test(&w, 0, 1).unwrap());
        // X1 = ∂z and X4 = (r, −r, −p), so [X1, X4] = (1, −1, −λ) stays in the span
        assert!(bracket_test(&w, 0, 3).unwrap());
        let twisted = Web::new(
            "t",
            &["x", "y", "z"],
            2,
            &[vec!["x", "y"], vec!["y", "z"], vec!["x", "z - x*y"]],
        )
        .unwrap();
        assert!(!bracket_test(&twisted, 1, 2).unwrap());
        assert!(!is_affine(&w));
        let aff = Web::new("a", &["x", "y", "z"], 2, &[vec!["x + 2*y", "3*z - 1"], vec!["y", "z"]]).unwrap();
        assert!(is_affine(&aff));
        let flat = Web::new("f", &["x", "y"], 1, &[vec!["x"], vec!["y"]]).unwrap();
        assert!(tangent_fields(&flat).is_ok());
        let c1 = Web::new("c", &["x", "y", "z", "t"], 2, &[vec!["x", "y"], vec!["z", "t"]]).unwrap();
        assert!(matches!(bracket_test(&c1, 0, 1), Err(Error::WrongCodimension { .. })));
    }

    #[test]
    fn validation_finds_repeats() {
        let w = template("2");
        assert!(validate_random(&w, 3, 0).unwrap().ok);
        let rep = Web::new("r", &["x", "y", "z"], 2, &[vec!["x", "y"], vec!["x", "y"]]).unwrap();
        let rep_report = validate_random(&rep, 2, 0).unwrap();
        assert!(!rep_report.ok);
        assert!(rep_report.failures[0].contains("not transverse"));
    }
}
