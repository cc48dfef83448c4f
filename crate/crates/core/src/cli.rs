//! Subcommand front end behind the `bergman` binary.
//!
//! Exit codes: 0 success, 2 parse or domain error, 3 accuracy failure (a
//! flagged best-effort report is still written), 64 unknown subcommand,
//! 1 for I/O.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::classify::{self, ClassReport, ScaleGrid};
use crate::decompose::decomposition_norm;
use crate::error::{Error, Result};
use crate::kernel::kernel_eval_derivative;
use crate::lp::{lp_ratio, parse_family};
use crate::project::{angular_for, project, project_plus, AnalyticFunction, Input, QuadratureSpec};
use crate::report::{to_csv, to_json, Cell, Format};
use crate::weights::{parse_construction, parse_weight, RadialWeight};

#[derive(Parser, Debug)]
#[command(name = "bergman", version, about = "Radial weights, Bergman kernels and projections")]
struct Cli {
    /// Relative tolerance for every integral and series.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Report file; `.csv` selects CSV, anything else JSON. Stdout if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ClassArg {
    Dhat,
    Dcheck,
    M,
    Dostanic,
    Cond10,
    Ddint,
    Muck7,
    Ldiag,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Which {
    Prop9,
    Thm10,
    Prop12,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Class-membership profile of a weight.
    Classify {
        #[arg(long)]
        weight: String,
        #[arg(long)]
        class: ClassArg,
        #[arg(long = "K", default_value_t = 2.0)]
        k: f64,
        #[arg(long, default_value_t = 1.5)]
        p: f64,
        /// Exponent for `ddint` (gamma) and the moment characterization.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Dyadic scales `1 - 2^-j`, `j <= jmax`.
        #[arg(long, default_value_t = 40)]
        jmax: u32,
        /// Moment exponents `2^k`, `k <= kmax`.
        #[arg(long, default_value_t = 30)]
        kmax: u32,
    },
    /// Log-moments and log-tails.
    Moments {
        #[arg(long)]
        weight: String,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        r: Vec<f64>,
    },
    /// Kernel series `B(x)` or its derivative.
    Kernel {
        #[arg(long)]
        weight: String,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        x: Complex64,
        #[arg(long, default_value_t = 0)]
        deriv: usize,
    },
    /// `P_w f(z)` or `P+_w f(z)`.
    Project {
        #[arg(long)]
        weight: String,
        #[arg(long)]
        f: String,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Complex64,
        #[arg(long)]
        plus: bool,
    },
    /// Littlewood-Paley ratios over a family of functions.
    LpCheck {
        #[arg(long)]
        weight: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "monomials:1..200")]
        family: String,
    },
    /// Block decomposition norm.
    Decompose {
        #[arg(long)]
        weight: String,
        #[arg(long = "K", default_value_t = 2.0)]
        k: f64,
        #[arg(long)]
        f: String,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Two-weight constants `A_p` and `M_p`.
    TwoWeight {
        #[arg(long)]
        omega: String,
        #[arg(long)]
        nu: String,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 40)]
        jmax: u32,
    },
    /// Build a constructed weight and optionally sample it.
    Construct {
        #[arg(long)]
        which: Which,
        #[arg(long, default_value = "")]
        params: String,
        /// CSV of `r,omega,log_tail,delta`.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Moment condition `w_{np+1}^{1/p} w_{np'+1}^{1/p'} / w_{2n+1}`.
    Dostanic {
        #[arg(long)]
        weight: String,
        #[arg(long, default_value_t = 1.5)]
        p: f64,
        #[arg(long, default_value_t = 40)]
        kmax: u32,
    },
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let (a, b) = s.split_once(',').unwrap_or((s, "0"));
    let re: f64 = a.trim().parse().map_err(|_| format!("bad real part '{a}'"))?;
    let im: f64 = b.trim().parse().map_err(|_| format!("bad imaginary part '{b}'"))?;
    if !(re.is_finite() && im.is_finite()) {
        return Err("complex value must be finite".into());
    }
    Ok(Complex64::new(re, im))
}

/// Output of one command: the main report and an optional side file.
struct Output {
    json: Value,
    csv: Option<(Vec<&'static str>, Vec<Vec<Cell>>)>,
    side: Option<(PathBuf, String)>,
}

impl Output {
    fn json(v: Value) -> Self {
        Output { json: v, csv: None, side: None }
    }
}

fn class_csv(r: &ClassReport) -> Option<(Vec<&'static str>, Vec<Vec<Cell>>)> {
    Some((vec!["scale", "ratio"], r.grid.iter().map(|g| vec![Cell::Float(g.scale), Cell::Float(g.ratio)]).collect()))
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::domain(msg))
    }
}

fn weight_meta(w: &RadialWeight) -> Value {
    json!({"descriptor": w.descriptor(), "notes": w.notes(), "flagged": w.is_flagged()})
}

fn execute(cmd: &Cmd, tol: f64) -> Result<Output> {
    match cmd {
        Cmd::Classify { weight, class, k, p, beta, jmax, kmax } => {
            check(*k > 1.0, "--K must exceed 1")?;
            check(*jmax <= 1100 && *kmax <= 1000, "grid too large")?;
            let w = parse_weight(weight)?;
            let grid = ScaleGrid::dyadic(*jmax);
            let xs: Vec<f64> = (0..=*kmax).map(|i| 2f64.powi(i as i32)).collect();
            let rep = match class {
                ClassArg::Dhat => classify::doubling_profile(&w, &grid, tol)?,
                ClassArg::Dcheck => classify::reverse_doubling_profile(&w, *k, &grid, tol)?,
                ClassArg::M => classify::m_class_profile(&w, *k, &xs, &grid, tol)?,
                ClassArg::Dostanic => classify::dostanic_profile(&w, *p, &xs, tol)?,
                ClassArg::Cond10 => classify::condition10_profile(&w, *k, &grid, tol)?,
                ClassArg::Ddint => classify::dd_integral_profile(&w, *beta, &grid, tol)?,
                ClassArg::Muck7 => classify::pplus_necessity(&w, *p, &grid, tol)?,
                ClassArg::Ldiag => classify::l_diagnostics(&w, &xs, tol)?,
            };
            Ok(Output { json: serde_json::to_value(&rep)?, csv: class_csv(&rep), side: None })
        }
        Cmd::Moments { weight, x, r } => {
            check(x.iter().all(|v| *v >= 0.0 && v.is_finite()), "--x values must be finite and >= 0")?;
            check(r.iter().all(|v| (0.0..1.0).contains(v)), "--r values must lie in [0, 1)")?;
            let w = parse_weight(weight)?;
            let mut ms = Vec::new();
            for &xv in x {
                let l = w.moment(xv, tol)?;
                ms.push(json!({"x": xv, "ln_moment": l, "moment": l.exp()}));
            }
            let mut ts = Vec::new();
            for &rv in r {
                let l = w.tail(rv, tol)?;
                ts.push(json!({"r": rv, "ln_tail": l, "tail": l.exp()}));
            }
            let rows: Vec<Vec<Cell>> =
                ms.iter().map(|m| vec![Cell::Float(m["x"].as_f64().unwrap_or(f64::NAN)), Cell::Float(m["ln_moment"].as_f64().unwrap_or(f64::NAN))]).collect();
            Ok(Output {
                json: json!({"weight": weight_meta(&w), "moments": ms, "tails": ts}),
                csv: Some((vec!["x", "ln_moment"], rows)),
                side: None,
            })
        }
        Cmd::Kernel { weight, x, deriv } => {
            check(x.norm() < 1.0, "--x must satisfy |x| < 1")?;
            let w = parse_weight(weight)?;
            let kv = kernel_eval_derivative(&w, *x, *deriv, tol)?;
            Ok(Output::json(json!({
                "weight": weight_meta(&w),
                "x": [x.re, x.im],
                "deriv": deriv,
                "value": [kv.value.re, kv.value.im],
                "trunc_bound": kv.trunc_bound,
                "terms": kv.terms_used,
            })))
        }
        Cmd::Project { weight, f, z, plus } => {
            check(z.norm() < 1.0, "--z must satisfy |z| < 1")?;
            let w = parse_weight(weight)?;
            let fa = AnalyticFunction::parse(f)?;
            let res = angular_for(&w, fa.degree_bound(), *z, tol)?;
            let quad = QuadratureSpec::for_weight(&w, res, tol)?;
            let v = if *plus {
                let pv = project_plus(&w, Input::Analytic(&fa), *z, &quad)?;
                json!({"value": pv.value, "warning": pv.warning})
            } else {
                let c = project(&w, Input::Analytic(&fa), *z, &quad)?;
                json!({"value": [c.re, c.im]})
            };
            let mut v = v;
            v["weight"] = weight_meta(&w);
            v["f"] = json!(f);
            v["z"] = json!([z.re, z.im]);
            v["plus"] = json!(plus);
            Ok(Output::json(v))
        }
        Cmd::LpCheck { weight, p, k, family } => {
            check(*p > 0.0 && p.is_finite(), "--p must be positive")?;
            check(*k >= 1, "--k must be at least 1")?;
            let fam = parse_family(family)?;
            let w = parse_weight(weight)?;
            let rep = lp_ratio(&w, *p, *k, &fam, tol)?;
            let rows = rep
                .rows
                .iter()
                .map(|r| vec![Cell::Int(r.index as u64), Cell::Float(r.lhs), Cell::Float(r.rhs), Cell::Float(r.ratio)])
                .collect();
            Ok(Output { json: serde_json::to_value(&rep)?, csv: Some((vec!["index", "lhs", "rhs", "ratio"], rows)), side: None })
        }
        Cmd::Decompose { weight, k, f, p } => {
            check(*k > 1.0, "--K must exceed 1")?;
            check(*p > 0.0 && p.is_finite(), "--p must be positive")?;
            let w = parse_weight(weight)?;
            let fa = AnalyticFunction::parse(f)?;
            let c = fa.coefficients().ok_or_else(|| Error::domain("--f must be holomorphic with finite degree"))?;
            let d = decomposition_norm(&w, *p, &c, *k, tol)?;
            let mut v = serde_json::to_value(&d)?;
            v["weight"] = weight_meta(&w);
            v["p"] = json!(p);
            Ok(Output::json(v))
        }
        Cmd::TwoWeight { omega, nu, p, jmax } => {
            check(*p > 1.0, "--p must exceed 1")?;
            check(*jmax <= 1100, "grid too large")?;
            let (w, n) = (parse_weight(omega)?, parse_weight(nu)?);
            let rep = classify::two_weight_constants(&w, &n, *p, &ScaleGrid::dyadic(*jmax), tol)?;
            let rows = rep
                .rows
                .iter()
                .map(|r| vec![Cell::Float(r.r), Cell::Float(r.sigma_hat), Cell::Float(r.ap_integrand), Cell::Float(r.mp_integrand)])
                .collect();
            Ok(Output {
                json: serde_json::to_value(&rep)?,
                csv: Some((vec!["r", "sigma_hat", "Ap_integrand", "Mp_integrand"], rows)),
                side: None,
            })
        }
        Cmd::Construct { which, params, emit } => {
            let name = match which {
                Which::Prop9 => "prop9",
                Which::Thm10 => "thm10",
                Which::Prop12 => "prop12",
            };
            let text = if params.is_empty() { name.to_string() } else { format!("{name}:{params}") };
            let c = parse_construction(&text)?;
            let side = match emit {
                Some(path) => Some((path.clone(), construct_table(&c.weight, tol)?)),
                None => None,
            };
            let v = json!({
                "name": c.name,
                "weight": weight_meta(&c.weight),
                "params": c.params,
                "verified_range": c.verified_range,
                "doubling_deltas": c.doubling_deltas,
                "reverse_deltas": c.reverse_deltas,
                "moment_xs": c.moment_xs,
                "dostanic_ns": c.dostanic_ns,
            });
            Ok(Output { json: v, csv: None, side })
        }
        Cmd::Dostanic { weight, p, kmax } => {
            check(*p > 1.0, "--p must exceed 1")?;
            check(*kmax <= 1000, "grid too large")?;
            let w = parse_weight(weight)?;
            let ns: Vec<f64> = (0..=*kmax).map(|i| 2f64.powi(i as i32)).collect();
            let rep = classify::dostanic_profile(&w, *p, &ns, tol)?;
            Ok(Output { json: serde_json::to_value(&rep)?, csv: class_csv(&rep), side: None })
        }
    }
}

/// Samples `r, w(r), ln w^(r), 1-r` at `1 - r = 2^{-i/4}` while the log-tail
/// is finite.
fn construct_table(w: &RadialWeight, tol: f64) -> Result<String> {
    let mut rows = Vec::new();
    for i in 0..4 * 1100 {
        let d = 2f64.powf(-(i as f64) / 4.0);
        if d == 0.0 {
            break;
        }
        let lt = w.tail_mag(d, tol)?.ln();
        if !lt.is_finite() {
            break;
        }
        rows.push(vec![Cell::Float(1.0 - d), Cell::Float(w.ln_density(d).exp()), Cell::Float(lt), Cell::Float(d)]);
    }
    to_csv(&["r", "omega", "log_tail", "delta"], &rows)
}

fn render(o: &Output, path: Option<&Path>) -> Result<String> {
    match (path.map(Format::from_path), &o.csv) {
        (Some(Format::Csv), Some((h, rows))) => to_csv(h, rows),
        _ => to_json(&o.json),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Domain(_) => 2,
        Error::Accuracy { .. } | Error::Divergent(_) => 3,
        _ => 1,
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 64,
                _ => 2,
            };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    if !(cli.tol > 0.0 && cli.tol < 1.0) {
        let _ = writeln!(stderr, "error: --tol must lie in (0, 1)");
        return 2;
    }
    if cli.jobs == Some(0) {
        let _ = writeln!(stderr, "error: --jobs must be positive");
        return 2;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
    };
    let result = pool.install(|| execute(&cli.cmd, cli.tol));
    let (text, code) = match result.and_then(|o| {
        if let Some((path, body)) = &o.side {
            std::fs::write(path, body)?;
        }
        render(&o, cli.out.as_deref())
    }) {
        Ok(t) => (t, 0),
        Err(e) => {
            let code = exit_code(&e);
            let _ = writeln!(stderr, "error: {e}");
            if code != 3 {
                return code;
            }
            let mut v = json!({"flagged": true, "error": e.to_string()});
            if let Error::Accuracy { estimate, achieved, .. } = &e {
                v["estimate"] = json!(estimate);
                v["achieved"] = json!(achieved);
            }
            match to_json(&v) {
                Ok(t) => (t, code),
                Err(_) => return code,
            }
        }
    };
    let written = match &cli.out {
        Some(p) => std::fs::write(p, text.as_bytes()),
        None => stdout.write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return 1;
    }
    code
}
