//! The tautological connection of a calibrated ordinary web and its curvature.
//!
//! With `k` the calibration order (`k⁰_p`, or `k¹_p` for closed relations),
//! the bundle `E` is the kernel of `M_{k−1}`. A section `s` is lifted to
//! order `k` by solving `P_k·w = −Q_k·s`; the chain rule then predicts the
//! derivatives of every coordinate of order `< k`, and `∇_λ s` is the
//! difference between the actual and the predicted derivative. Expanding
//! `∇_λ s_j = Σ_i s_i η_{ij,λ}` in a frame gives the connection matrix `η`,
//! and `Ω = dη + η∧η`.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::combinat::{is_calibrated, is_strongly_calibrated, k_one, k_zero, pi_prime, pi_zero};
use crate::error::{Error, LinalgError, Result};
use crate::jets::{prolong, JetSystem, Layout};
use crate::symbolic::matrix::{symbolic_rank, Matrix};
use crate::symbolic::{Differentiable, Field, RatFunc, Scalar};
use crate::webmodel::{first_derivatives, Web};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Plain,
    Closed,
}

#[derive(Clone, Debug)]
pub struct ConnectionData {
    pub p: usize,
    pub variant: Variant,
    /// Calibration order `k`.
    pub order: u32,
    pub vars: Vec<String>,
    /// Basis of `ker M_{k−1}`.
    pub frame: Vec<Vec<RatFunc>>,
    /// `∇_λ s_j`, indexed `[λ][j]`.
    pub nabla: Vec<Vec<Vec<RatFunc>>>,
    /// `η` on `dx_λ`, one `ρ×ρ` matrix per `λ`.
    pub eta: Vec<Matrix<RatFunc>>,
    /// `Ω` on `dx_λ∧dx_μ` for `λ < μ`.
    pub omega: Vec<((usize, usize), Matrix<RatFunc>)>,
    pub flat: bool,
}

impl ConnectionData {
    pub fn rank(&self) -> usize {
        self.frame.len()
    }
}

/// Left inverse of a full column rank rational matrix, `(ZᵀZ)⁻¹Zᵀ`.
fn left_inverse(z: &Matrix<BigRational>) -> Result<Matrix<BigRational>> {
    let zt = z.transpose();
    let g = zt.mul(z);
    Ok(g.solve_many(&zt)?)
}

/// Coordinate conversions between plain jet coordinates and closed-basis
/// coordinates of one order layer.
struct Layer {
    z: Matrix<BigRational>,
    left: Matrix<BigRational>,
}

struct Setup<'a> {
    layout: Layout,
    closed: bool,
    k: u32,
    layers: Vec<Layer>,
    du: &'a [Vec<Vec<RatFunc>>],
}

impl Setup<'_> {
    fn layer_len(&self, h: u32) -> usize {
        let d = self.layout.d;
        if self.closed {
            self.layers[h as usize].z.cols() * d
        } else {
            crate::jets::symbol_labels(self.layout.q, self.layout.p, h).len() * d
        }
    }

    fn offsets(&self) -> Vec<usize> {
        let mut out = vec![0];
        for h in 0..self.k {
            out.push(out[h as usize] + self.layer_len(h));
        }
        out
    }

    /// Plain jet coordinates `(A,K)·d + i` of one layer.
    fn to_plain(&self, h: u32, c: &[RatFunc]) -> Vec<RatFunc> {
        if !self.closed {
            return c.to_vec();
        }
        let d = self.layout.d;
        let z = &self.layers[h as usize].z;
        let mut out = vec![RatFunc::zero(); z.rows() * d];
        for s in 0..z.rows() {
            for j in 0..z.cols() {
                let w = z.get(s, j);
                if Scalar::is_zero(w) {
                    continue;
                }
                let w = RatFunc::from_rational(w);
                for i in 0..d {
                    let v = &c[j * d + i];
                    if !v.is_zero() {
                        out[s * d + i] = out[s * d + i].add(&w.mul(v));
                    }
                }
            }
        }
        out
    }

    /// Inverse of [`Setup::to_plain`]; fails when `v` is not closed.
    fn plain_to_layer(&self, h: u32, v: &[RatFunc]) -> Result<Vec<RatFunc>> {
        if !self.closed {
            return Ok(v.to_vec());
        }
        let d = self.layout.d;
        let layer = &self.layers[h as usize];
        let mut out = vec![RatFunc::zero(); layer.z.cols() * d];
        for j in 0..layer.z.cols() {
            for s in 0..layer.z.rows() {
                let w = layer.left.get(j, s);
                if Scalar::is_zero(w) {
                    continue;
                }
                let w = RatFunc::from_rational(w);
                for i in 0..d {
                    out[j * d + i] = out[j * d + i].add(&w.mul(&v[s * d + i]));
                }
            }
        }
        if self.to_plain(h, &out) != v {
            return Err(LinalgError::Inconsistent.into());
        }
        Ok(out)
    }

    /// Chain-rule prediction of `∂_λ` of the layer-`h` coordinates from the
    /// plain coordinates of layer `h+1`.
    fn predict(&self, h: u32, next_plain: &[RatFunc], lam: usize) -> Vec<RatFunc> {
        let d = self.layout.d;
        let labels = crate::jets::symbol_labels(self.layout.q, self.layout.p, h);
        let mut out = vec![RatFunc::zero(); labels.len() * d];
        for (sidx, (a, k)) in labels.iter().enumerate() {
            for i in 0..d {
                let mut acc = RatFunc::zero();
                for (k1, factor) in prolong(&self.du[i], k, lam) {
                    let col = self.layout.col_index(i, a, &k1);
                    acc = acc.add(&next_plain[col].mul(&factor));
                }
                out[sidx * d + i] = acc;
            }
        }
        out
    }
}

fn calibration(web: &Web, p: usize, variant: Variant) -> Result<u32> {
    let (n, d, q, pp) = (web.n() as u64, web.d() as u64, web.q as u64, p as u64);
    let k = match variant {
        Variant::Plain if is_calibrated(n, d, q, pp) => k_zero(n, d, q, pp),
        Variant::Closed if is_strongly_calibrated(n, d, q, pp) => k_one(n, d, q, pp),
        _ => None,
    };
    match k {
        Some(k) if k >= 1 => Ok(k as u32),
        _ => Err(Error::NotCalibrated),
    }
}

/// The variant actually used: for `p = q` closed and plain relations agree
/// and the closed system is used.
pub fn effective_variant(web: &Web, p: usize, variant: Variant) -> Variant {
    if p == web.q {
        Variant::Closed
    } else {
        variant
    }
}

/// Builds the connection with the echelon kernel basis as frame.
pub fn build_connection(web: &Web, p: usize, variant: Variant) -> Result<ConnectionData> {
    build_connection_with_frame(web, p, variant, None)
}

/// As [`build_connection`], with an optional frame of `ker M_{k−1}`.
pub fn build_connection_with_frame(web: &Web, p: usize, variant: Variant, frame: Option<Vec<Vec<RatFunc>>>) -> Result<ConnectionData> {
    if !web.is_rational() {
        let g = web.foliations.iter().flat_map(|f| &f.generators).find(|g| !g.is_rational());
        return Err(Error::TranscendentalUnsupported(g.map(|g| g.to_string()).unwrap_or_default()));
    }
    crate::analysis::check_degree(web, p)?;
    let variant = effective_variant(web, p, variant);
    let closed = variant == Variant::Closed;
    let k = calibration(web, p, variant)?;
    let (n, d, q) = (web.n(), web.d(), web.q);
    let expected = if closed {
        pi_prime(n as u64, d as u64, q as u64, p as u64)
    } else {
        pi_zero(n as u64, d as u64, q as u64, p as u64)
    } as usize;
    let js = JetSystem::<RatFunc>::symbolic(web, p, k)?;
    let u = web.ratfuncs()?;
    let du = first_derivatives(&u, n);
    let layers = (0..=k)
        .map(|h| {
            let z = js.closed_basis(h).clone();
            let left = left_inverse(&z)?;
            Ok(Layer { z, left })
        })
        .collect::<Result<Vec<_>>>()?;
    let setup = Setup {
        layout: js.layout,
        closed,
        k,
        layers,
        du: &du,
    };
    let (m, pk, qk) = if closed {
        (js.m_closed(k - 1), js.p_closed(k), js.q_closed(k))
    } else {
        (js.m_matrix(k - 1), js.p_matrix(k), js.q_matrix(k))
    };
    let frame = match frame {
        Some(f) => {
            for s in &f {
                if s.len() != m.cols() || m.mul_vec(s).iter().any(|x| !x.is_zero()) {
                    return Err(LinalgError::Shape("frame vector outside the kernel".into()).into());
                }
            }
            let fm = Matrix::from_fn(m.cols(), f.len(), |r, c| f[c][r].clone());
            if symbolic_rank(&fm) != f.len() {
                return Err(LinalgError::Shape("frame vectors are dependent".into()).into());
            }
            f
        }
        None => m.kernel(),
    };
    if frame.len() != expected {
        return Err(Error::NotOrdinary);
    }
    let rho = frame.len();
    if symbolic_rank(&pk) < pk.cols() {
        return Err(Error::NotOrdinary);
    }
    // lifts: P·W = −Q·S
    let s_mat = Matrix::from_fn(m.cols(), rho, |r, c| frame[c][r].clone());
    let rhs = qk.mul(&s_mat).map(|x| x.neg());
    let lifts = pk.solve_many(&rhs)?;
    let offsets = setup.offsets();
    let layer_of = |v: &[RatFunc], h: u32| v[offsets[h as usize]..offsets[h as usize] + setup.layer_len(h)].to_vec();
    let mut nabla = vec![Vec::with_capacity(rho); n];
    for j in 0..rho {
        let s = &frame[j];
        let w = lifts.column(j);
        let plain_layers: Vec<Vec<RatFunc>> = (1..=k)
            .map(|h| {
                let c = if h < k { layer_of(s, h) } else { w.clone() };
                setup.to_plain(h, &c)
            })
            .collect();
        for (lam, out) in nabla.iter_mut().enumerate() {
            let mut v = Vec::with_capacity(s.len());
            for h in 0..k {
                let pred = setup.predict(h, &plain_layers[h as usize], lam);
                let pred = setup.plain_to_layer(h, &pred)?;
                for (x, pr) in layer_of(s, h).iter().zip(&pred) {
                    v.push(x.derivative(lam).sub(pr));
                }
            }
            out.push(v);
        }
    }
    // η: S·η_λ = ∇_λ
    let eta: Vec<Matrix<RatFunc>> = nabla
        .iter()
        .map(|cols| {
            let b = Matrix::from_fn(m.cols(), rho, |r, c| cols[c][r].clone());
            s_mat.solve_many(&b).map_err(Error::from)
        })
        .collect::<Result<_>>()?;
    let omega = curvature(&eta);
    let flat = omega.iter().all(|(_, m)| m.is_zero());
    Ok(ConnectionData {
        p,
        variant,
        order: k,
        vars: web.variables.clone(),
        frame,
        nabla,
        eta,
        omega,
        flat,
    })
}

/// `Ω = dη + η∧η` on `dx_λ∧dx_μ`, `λ < μ`.
pub fn curvature(eta: &[Matrix<RatFunc>]) -> Vec<((usize, usize), Matrix<RatFunc>)> {
    let n = eta.len();
    let rho = eta.first().map_or(0, |m| m.rows());
    let mut out = Vec::new();
    for l in 0..n {
        for m in l + 1..n {
            let om = Matrix::from_fn(rho, rho, |i, j| {
                let mut v = eta[m].get(i, j).derivative(l).sub(&eta[l].get(i, j).derivative(m));
                for t in 0..rho {
                    v = v.add(&eta[l].get(i, t).mul(eta[m].get(t, j)));
                    v = v.sub(&eta[m].get(i, t).mul(eta[l].get(t, j)));
                }
                v
            });
            out.push(((l, m), om));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatnessVerdict {
    /// The rank bound is attained.
    pub max_rank: bool,
    pub pi: usize,
}

pub fn flatness_verdict(cd: &ConnectionData) -> FlatnessVerdict {
    FlatnessVerdict {
        max_rank: cd.flat,
        pi: cd.rank(),
    }
}

/// `η = H dφ + K dψ` for the curve template, with the closed forms
/// `H = (pAC'_z − rA'_xC)/(ABC)`, `K = (cA'_xC − aAC'_z)/(ABC)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TemplateForms {
    pub h: RatFunc,
    pub k: RatFunc,
    pub h_formula: RatFunc,
    pub k_formula: RatFunc,
}

impl TemplateForms {
    pub fn matches(&self) -> bool {
        self.h == self.h_formula && self.k == self.k_formula
    }
}

/// `(A, B, C) = (br − qc, cp − ar, aq − pb)` from the gradients of `φ, ψ`.
pub fn template_symbols(dphi: &[RatFunc], dpsi: &[RatFunc]) -> (RatFunc, RatFunc, RatFunc) {
    let (a, b, c) = (&dphi[0], &dphi[1], &dphi[2]);
    let (p, q, r) = (&dpsi[0], &dpsi[1], &dpsi[2]);
    (
        b.mul(r).sub(&q.mul(c)),
        c.mul(p).sub(&a.mul(r)),
        a.mul(q).sub(&p.mul(b)),
    )
}

/// Extracts `H, K` from the general connection of a curve-template web:
/// three coordinate foliations `(x,y), (y,z), (z,x)` and a fourth `(φ, ψ)`.
pub fn connection_form_components(web: &Web) -> Result<TemplateForms> {
    let mismatch = |m: &str| Error::TemplateMismatch(m.to_string());
    if web.n() != 3 || web.q != 2 || web.d() != 4 {
        return Err(mismatch("needs four foliations of codimension 2 in dimension 3"));
    }
    let u = web.ratfuncs()?;
    let x = |i: usize| RatFunc::var(i);
    let coords = [[x(0), x(1)], [x(1), x(2)], [x(2), x(0)]];
    for (i, c) in coords.iter().enumerate() {
        if u[i] != c.to_vec() {
            return Err(mismatch(&format!("foliation {} is not a coordinate pair", i + 1)));
        }
    }
    let du = first_derivatives(&u, 3);
    let (dphi, dpsi) = (&du[3][0], &du[3][1]);
    let (a_, b_, c_) = template_symbols(dphi, dpsi);
    let abc = a_.mul(&b_).mul(&c_);
    if abc.is_zero() {
        return Err(Error::NotOrdinary);
    }
    let cd = build_connection(web, 2, Variant::Closed)?;
    if cd.rank() != 1 {
        return Err(mismatch("connection is not of rank 1"));
    }
    let eta: Vec<RatFunc> = cd.eta.iter().map(|m| m.get(0, 0).clone()).collect();
    let basis = Matrix::from_fn(3, 2, |r, c| if c == 0 { dphi[r].clone() } else { dpsi[r].clone() });
    let hk = basis
        .solve(&eta)
        .map_err(|_| mismatch("η is not a combination of dφ and dψ"))?;
    let (a, c, p, r) = (&dphi[0], &dphi[2], &dpsi[0], &dpsi[2]);
    let (ax, cz) = (a_.derivative(0), c_.derivative(2));
    let inv = abc.inv().expect("ABC ≠ 0");
    let h_formula = p.mul(&a_).mul(&cz).sub(&r.mul(&ax).mul(&c_)).mul(&inv);
    let k_formula = c.mul(&ax).mul(&c_).sub(&a.mul(&a_).mul(&cz)).mul(&inv);
    Ok(TemplateForms {
        h: hk[0].clone(),
        k: hk[1].clone(),
        h_formula,
        k_formula,
    })
}

/// Text form of a connection for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionReport {
    pub web: String,
    pub p: usize,
    pub variant: Variant,
    pub order: u32,
    pub rank: usize,
    pub frame: Vec<Vec<String>>,
    pub eta: Vec<FormEntry>,
    pub omega: Vec<FormEntry>,
    pub flat: bool,
}

/// A matrix of coefficients on one basis form such as `dx` or `dx^dz`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormEntry {
    pub form: String,
    pub matrix: Vec<Vec<String>>,
}

pub fn report(web: &Web, cd: &ConnectionData) -> ConnectionReport {
    let vars = web.vars();
    let show = |m: &Matrix<RatFunc>| -> Vec<Vec<String>> {
        (0..m.rows())
            .map(|r| m.row(r).iter().map(|x| x.to_string_with(&vars)).collect())
            .collect()
    };
    ConnectionReport {
        web: web.name.clone(),
        p: cd.p,
        variant: cd.variant,
        order: cd.order,
        rank: cd.rank(),
        frame: cd
            .frame
            .iter()
            .map(|s| s.iter().map(|x| x.to_string_with(&vars)).collect())
            .collect(),
        eta: cd
            .eta
            .iter()
            .enumerate()
            .map(|(l, m)| FormEntry {
                form: format!("d{}", vars[l]),
                matrix: show(m),
            })
            .collect(),
        omega: cd
            .omega
            .iter()
            .map(|((l, m), om)| FormEntry {
                form: format!("d{}^d{}", vars[*l], vars[*m]),
                matrix: show(om),
            })
            .collect(),
        flat: cd.flat,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse::parse;

    fn template(phi: &str, psi: &str) -> Web {
        Web::new("t", &["x", "y", "z"], 2, &[vec!["x", "y"], vec!["y", "z"], vec!["z", "x"], vec![phi, psi]]).unwrap()
    }

    fn w_lambda(lambda: &str) -> Web {
        template("x + y", &format!("x + z + (x^2 + 2*({lambda})*x*z + z^2)/2"))
    }

    fn rf(s: &str) -> RatFunc {
        parse(s).unwrap().to_ratfunc(&["x", "y", "z"]).unwrap()
    }

    #[test]
    fn w_lambda_forms() {
        let t = connection_form_components(&w_lambda("2")).unwrap();
        assert!(t.h.is_zero());
        assert_eq!(t.k, rf("2/((1 + x + 2*z)*(1 + 2*x + z))"));
        assert!(t.matches());
        let t = connection_form_components(&w_lambda("0")).unwrap();
        assert!(t.h.is_zero() && t.k.is_zero());
    }

    #[test]
    fn w_lambda_curvature() {
        let cd = build_connection(&w_lambda("1/2"), 2, Variant::Closed).unwrap();
        let last = cd.frame[0][3].inv().unwrap();
        let s: Vec<RatFunc> = cd.frame[0].iter().map(|x| x.mul(&last)).collect();
        assert_eq!(s, vec![rf("1 + x + z/2"), rf("-(1 + x/2 + z)"), rf("1 + x/2 + z"), RatFunc::one()]);
        let expect = rf("(1/2)*(-1/2)*(z - x)*((3/2)*(x + z) + 2)/((1 + x + z/2)^2*(1 + x/2 + z)^2)");
        let dxdz = cd.omega.iter().find(|(lm, _)| *lm == (0, 2)).unwrap();
        assert_eq!(dxdz.1.get(0, 0), &expect);
        assert!(!cd.flat);
        assert_eq!(flatness_verdict(&cd), FlatnessVerdict { max_rank: false, pi: 1 });
        assert!(build_connection(&w_lambda("1"), 2, Variant::Closed).unwrap().flat);
    }

    #[test]
    fn parallel_lines_are_flat() {
        let cd = build_connection(&template("x + 2*y + 3*z", "2*x - y + z"), 2, Variant::Plain).unwrap();
        assert_eq!(cd.variant, Variant::Closed);
        assert_eq!(cd.frame, vec![vec![RatFunc::from(5), RatFunc::from(-5), RatFunc::from(-5), RatFunc::one()]]);
        assert!(cd.eta.iter().all(|m| m.is_zero()));
        assert!(cd.flat);
    }

    #[test]
    fn preconditions() {
        let w = w_lambda("2");
        assert_eq!(build_connection(&w, 1, Variant::Plain).unwrap_err(), Error::NotCalibrated);
        let deg = template("x + y", "x");
        assert_eq!(build_connection(&deg, 2, Variant::Closed).unwrap_err(), Error::NotOrdinary);
        let tr = Web::new("t", &["x", "y", "z"], 2, &[vec!["x", "y"], vec!["y", "z"], vec!["z", "x"], vec!["x + y", "sqrt(1 + z)"]]).unwrap();
        assert!(matches!(build_connection(&tr, 2, Variant::Closed), Err(Error::TranscendentalUnsupported(_))));
    }
}
