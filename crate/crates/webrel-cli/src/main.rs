use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use webrel::analysis::{bound_report, rank_profile, verify_cobord, verify_relation, Backend, BoundReport, CobordVerdict, RankProfile, Relation, RelationVerdict, SampleConfig, Verdict};
use webrel::combinat::BoundProfile;
use webrel::connection::{build_connection, report, ConnectionReport, Variant};
use webrel::symbolic::parse;
use webrel::webmodel::{bracket_test_seeded, validate_random, Web};
use webrel::Error;

const EXIT_CODES: &str = "Exit codes:
  0  success (relation verified, connection flat, ...)
  1  invalid input or unmet precondition (not calibrated, not ordinary, ...)
  2  negative verdict (check failed, curvature nonzero, not ordinary with --expect-ordinary)
  3  parse error in a web or relation file";

#[derive(Parser)]
#[command(name = "webrel", version, about = "Abelian relations, rank bounds and connections of webs", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Combinatorial bounds for dimension n, d foliations of codimension q, degree p.
    Bounds {
        n: u64,
        d: u64,
        q: u64,
        p: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Rank profile, ordinarity verdicts and bounds of a web.
    Analyze {
        web: PathBuf,
        #[arg(long)]
        p: usize,
        /// Highest order of the reported rank profile.
        #[arg(long, default_value_t = 2)]
        max_order: u32,
        /// Profile the closed system.
        #[arg(long)]
        closed: bool,
        /// Exit with code 2 when the web is not ordinary.
        #[arg(long)]
        expect_ordinary: bool,
        #[command(flatten)]
        sample: SampleArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Verify an abelian relation, or a cobord pair when --omega is given.
    Verify {
        web: PathBuf,
        relation: PathBuf,
        /// Degree p form ω; `relation` is then the degree p−1 form η with dη = ω.
        #[arg(long)]
        omega: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Connection and curvature of a calibrated ordinary rational web.
    Curvature {
        web: PathBuf,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        closed: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Integrability of the plane fields spanned by pairs of tangent fields (q = n−1).
    BracketCheck {
        web: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Bigfloat,
}

#[derive(Args)]
struct SampleArgs {
    /// Arithmetic backend; exact is the default for rational webs.
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Decimal digits of the bigfloat backend.
    #[arg(long, default_value_t = 50)]
    precision: usize,
    /// Number of random sample points.
    #[arg(long, default_value_t = 3)]
    points: usize,
    /// Explicit sample point such as "x=1/3,y=2,z=0"; repeatable.
    #[arg(long)]
    point: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pivot tolerance of numeric ranks.
    #[arg(long, default_value_t = 1e-20)]
    tol: f64,
}

#[derive(Args)]
struct OutputArgs {
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Json(_) => 3,
            _ => 1,
        };
        Fail(code, e.to_string())
    }
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub web: String,
    pub p: usize,
    pub profile: RankProfile,
    pub bounds: BoundReport,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketReport {
    pub web: String,
    /// 1-based pairs with their verdicts.
    pub pairs: Vec<(usize, usize, bool)>,
}

#[derive(Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VerifyReport {
    Relation(RelationVerdict),
    Cobord(CobordVerdict),
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail(1, format!("{}: {e}", path.display())))
}

fn load_web(path: &Path) -> Result<Web, Fail> {
    Ok(Web::from_json(&read(path)?)?)
}

fn load_relation(path: &Path, web: &Web) -> Result<Relation, Fail> {
    Ok(Relation::from_json(&read(path)?, web)?)
}

fn parse_point(web: &Web, s: &str) -> Result<Vec<BigRational>, Fail> {
    let bad = |m: String| Fail(1, format!("point `{s}`: {m}"));
    let mut vals = vec![None; web.n()];
    for part in s.split(',') {
        let (name, value) = part.split_once('=').ok_or_else(|| bad(format!("expected name=value in `{part}`")))?;
        let i = web
            .variables
            .iter()
            .position(|v| v == name.trim())
            .ok_or_else(|| bad(format!("unknown variable `{}`", name.trim())))?;
        let e = parse(value).map_err(|e| bad(e.to_string()))?;
        let c = e.as_const().ok_or_else(|| bad(format!("`{value}` is not a rational")))?;
        vals[i] = Some(c.clone());
    }
    vals.into_iter()
        .zip(&web.variables)
        .map(|(v, n)| v.ok_or_else(|| bad(format!("missing `{n}`"))))
        .collect()
}

fn sample_config(web: &Web, a: &SampleArgs) -> Result<SampleConfig, Fail> {
    if a.precision < 20 {
        return Err(Fail(1, "precision must be at least 20 digits".into()));
    }
    if a.points == 0 {
        return Err(Fail(1, "at least one point is needed".into()));
    }
    let points = if a.point.is_empty() {
        None
    } else {
        Some(a.point.iter().map(|s| parse_point(web, s)).collect::<Result<_, _>>()?)
    };
    Ok(SampleConfig {
        count: a.points,
        seed: a.seed,
        digits: a.precision,
        tol: a.tol,
        backend: a.backend.map(|b| match b {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Bigfloat => Backend::Bigfloat,
        }),
        points,
    })
}

fn emit<T: Serialize>(out: &OutputArgs, value: &T, text: impl FnOnce() -> String) -> Result<(), Fail> {
    let s = if out.json {
        serde_json::to_string_pretty(value).map_err(|e| Fail(1, e.to_string()))? + "\n"
    } else {
        text()
    };
    match &out.out {
        Some(p) => fs::write(p, s).map_err(|e| Fail(1, format!("{}: {e}", p.display()))),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

fn opt(v: Option<u64>) -> String {
    v.map_or("none".into(), |x| x.to_string())
}

fn bounds_text(b: &BoundProfile) -> String {
    format!(
        "n={} d={} q={} p={}\nk0={} k1={}\npi0={} pi_prime={} pi_henaut={}\ncalibrated={} strongly_calibrated={} prop2_ok={}\n",
        b.n,
        b.d,
        b.q,
        b.p,
        opt(b.k0),
        opt(b.k1),
        b.pi0,
        b.pi_prime,
        opt(b.pi_henaut),
        b.calibrated,
        b.strongly_calibrated,
        b.prop2_ok
    )
}

fn ranks(r: &[webrel::analysis::PointRank]) -> String {
    r.iter()
        .map(|x| if x.ambiguous { format!("{}?", x.rank) } else { x.rank.to_string() })
        .collect::<Vec<_>>()
        .join(" ")
}

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Ordinary => "ordinary",
        Verdict::NotOrdinary => "not_ordinary",
        Verdict::Undetermined => "undetermined_at_points",
    }
}

fn analyze_text(r: &AnalyzeReport) -> String {
    let mut s = format!("web {} p={}\n", r.web, r.p);
    s += &format!("backend {:?}, points: {}\n", r.profile.backend, r.profile.points.join("; "));
    let tag = if r.profile.closed { "closed " } else { "" };
    for o in &r.profile.orders {
        s += &format!(
            "{tag}k={}: P {}x{} max {} ranks [{}]; M {}x{} ranks [{}]; rho [{}]\n",
            o.k,
            o.p_rows,
            o.p_cols,
            o.p_max,
            ranks(&o.p_ranks),
            o.m_rows,
            o.m_cols,
            ranks(&o.m_ranks),
            o.rho.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
        );
    }
    let b = &r.bounds;
    s += &bounds_text(&b.profile);
    for (name, o) in [("ordinary", &b.ordinary), ("strongly ordinary", &b.strong)] {
        let note = if o.delegated { " (closed system)" } else { "" };
        s += &format!("{name}: {}{note}, horizon {}\n", verdict(o.verdict), o.horizon);
    }
    if let Some((i, j)) = b.strong.bracket_pair {
        s += &format!("infinite rank: foliations {i} and {j} span an integrable plane field\n");
    }
    s += &format!("rank bound: {}\nclosed rank bound: {}\n", opt(b.rank_bound), opt(b.closed_rank_bound));
    s
}

fn relation_text(name: &str, v: &RelationVerdict) -> String {
    let mut s = format!("{name} (p={}): abelian={} closed={}{}\n", v.p, v.is_abelian, v.is_closed, if v.numeric { " (numeric)" } else { "" });
    for r in &v.residuals {
        s += &format!("  trace residual at {:?}: {}\n", r.index, r.value);
    }
    for r in &v.closedness {
        s += &format!("  d of foliation {} at {:?}: {}\n", r.foliation.unwrap_or(0), r.index, r.value);
    }
    s
}

fn connection_text(r: &ConnectionReport) -> String {
    let mut s = format!("web {} p={} variant {:?} order {} rank {}\n", r.web, r.p, r.variant, r.order, r.rank);
    for (j, f) in r.frame.iter().enumerate() {
        s += &format!("s{} = ({})\n", j + 1, f.join(", "));
    }
    for e in r.eta.iter().chain(&r.omega) {
        let name = if e.form.contains('^') { "omega" } else { "eta" };
        s += &format!("{name} on {}: {:?}\n", e.form, e.matrix);
    }
    s += &format!("flat: {}\n", r.flat);
    s
}

fn run(cli: Cli) -> Result<u8, Fail> {
    match cli.command {
        Command::Bounds { n, d, q, p, out } => {
            let b = BoundProfile::new(n, d, q, p).map_err(|e| Fail(1, e.to_string()))?;
            emit(&out, &b, || bounds_text(&b))?;
            Ok(0)
        }
        Command::Analyze {
            web,
            p,
            max_order,
            closed,
            expect_ordinary,
            sample,
            out,
        } => {
            let web = load_web(&web)?;
            let cfg = sample_config(&web, &sample)?;
            let v = validate_random(&web, cfg.count, cfg.seed)?;
            if !v.ok {
                return Err(Fail(1, format!("invalid web: {}", v.failures.join("; "))));
            }
            let profile = rank_profile(&web, p, max_order, closed, &cfg)?;
            let bounds = bound_report(&web, p, &cfg)?;
            let r = AnalyzeReport {
                web: web.name.clone(),
                p,
                profile,
                bounds,
            };
            emit(&out, &r, || analyze_text(&r))?;
            let v = if closed { r.bounds.strong.verdict } else { r.bounds.ordinary.verdict };
            Ok(if expect_ordinary && v == Verdict::NotOrdinary { 2 } else { 0 })
        }
        Command::Verify { web, relation, omega, seed, out } => {
            let web = load_web(&web)?;
            let rel = load_relation(&relation, &web)?;
            let (r, ok) = match omega {
                Some(o) => {
                    let om = load_relation(&o, &web)?;
                    let c = verify_cobord(&web, &rel, &om, seed)?;
                    let ok = c.holds;
                    (VerifyReport::Cobord(c), ok)
                }
                None => {
                    let v = verify_relation(&web, &rel, seed)?;
                    let ok = v.is_abelian && v.is_closed;
                    (VerifyReport::Relation(v), ok)
                }
            };
            emit(&out, &r, || match &r {
                VerifyReport::Relation(v) => relation_text("relation", v),
                VerifyReport::Cobord(c) => {
                    let mut s = relation_text("eta", &c.eta) + &relation_text("omega", &c.omega);
                    s += &format!("d eta = omega: {}\n", c.differential_matches);
                    for m in &c.mismatches {
                        s += &format!("  foliation {} at {:?}: {}\n", m.foliation.unwrap_or(0), m.index, m.value);
                    }
                    s += &format!("cobord holds: {}\n", c.holds);
                    s
                }
            })?;
            Ok(if ok { 0 } else { 2 })
        }
        Command::Curvature { web, p, closed, out } => {
            let web = load_web(&web)?;
            let variant = if closed { Variant::Closed } else { Variant::Plain };
            let cd = build_connection(&web, p, variant)?;
            let r = report(&web, &cd);
            emit(&out, &r, || connection_text(&r))?;
            Ok(if r.flat { 0 } else { 2 })
        }
        Command::BracketCheck { web, seed, out } => {
            let web = load_web(&web)?;
            let mut pairs = Vec::new();
            for i in 0..web.d() {
                for j in i + 1..web.d() {
                    pairs.push((i + 1, j + 1, bracket_test_seeded(&web, i, j, seed)?));
                }
            }
            let r = BracketReport {
                web: web.name.clone(),
                pairs,
            };
            emit(&out, &r, || {
                r.pairs
                    .iter()
                    .map(|(i, j, b)| format!("foliations {i},{j}: {}\n", if *b { "integrable" } else { "not integrable" }))
                    .collect()
            })?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn web(name: &str) -> Web {
        let path = format!("{}/../webrel/data/webs/{name}.json", env!("CARGO_MANIFEST_DIR"));
        load_web(Path::new(&path)).ok().expect("web file")
    }

    fn round_trip<T: Serialize + for<'de> Deserialize<'de> + PartialEq + std::fmt::Debug>(v: &T) {
        let s = serde_json::to_string_pretty(v).unwrap();
        assert_eq!(&serde_json::from_str::<T>(&s).unwrap(), v);
    }

    #[test]
    fn reports_round_trip() {
        let w = web("w_lambda_2");
        let cfg = SampleConfig::default();
        round_trip(&AnalyzeReport {
            web: w.name.clone(),
            p: 2,
            profile: rank_profile(&w, 2, 1, true, &cfg).ok().unwrap(),
            bounds: bound_report(&w, 2, &cfg).ok().unwrap(),
        });
        round_trip(&report(&w, &build_connection(&w, 2, Variant::Closed).ok().unwrap()));
        round_trip(&BoundProfile::new(3, 3, 2, 1).unwrap());
        let rel = Relation::zero(2, &w);
        round_trip(&VerifyReport::Relation(verify_relation(&w, &rel, 0).ok().unwrap()));
        round_trip(&BracketReport {
            web: w.name.clone(),
            pairs: vec![(1, 2, true)],
        });
    }
}
