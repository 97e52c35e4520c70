use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ore_qe_core::corpus;
use ore_qe_core::formula::{parse_pp, parse_qf};
use ore_qe_core::model_checker::{check_axioms, compare_formulas, SamplerConfig};
use ore_qe_core::ore_poly::OrePoly;
use ore_qe_core::qe_engine::{eliminate, replay, Mode, QeError, Trace};
use ore_qe_core::series_field::Lattice;
use ore_qe_core::solve::{agrees_to, factor_linear, solve_affine, RootStatus, SolveOpts};
use ore_qe_core::text::{Ctx, ParseError};
use ore_qe_core::torsion_values::{ann_value_set, div_value_set, AnnPattern};
use ore_qe_core::value_geometry::{check_prime, tie_set, upsilon, upsilon_inv};
use ore_qe_core::{DeltaPoint, FiniteField, Rat, ValueProfile};
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "ore-qe", version, about = "Quantifier elimination for valued Frobenius modules")]
struct Cli {
    /// TOML file with defaults for the global options.
    #[arg(long, env = "ORE_QE_CONFIG", global = true)]
    config: Option<PathBuf>,
    /// Coefficient field, "p^k" or "p^k:c0,...,ck".
    #[arg(long, global = true)]
    field: Option<String>,
    /// "full" or "tame:ℓ".
    #[arg(long, global = true)]
    lattice: Option<String>,
    /// Truncation precision N.
    #[arg(long, global = true)]
    precision: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Eliminate the bound variables of a pp-formula.
    Qe(QeArgs),
    /// Factor q ∈ ℐ into linear factors.
    Factor(PolyArg),
    /// Solve x·q = n (roots of q by default).
    Roots {
        #[command(flatten)]
        poly: PolyArg,
        /// Right-hand side n as a series literal.
        #[arg(long)]
        rhs: Option<String>,
    },
    /// Right division q1 = q2·c + r, or the integral q1·λ = q2·c + r.
    Divide {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, value_name = "FILE")]
        by: PathBuf,
        #[arg(long)]
        generalized: bool,
    },
    /// Valuations of nonzero elements of ann(q).
    Ann {
        #[command(flatten)]
        poly: PolyArg,
        /// "all", "trivial" or a 0/1 list per linear factor.
        #[arg(long, default_value = "all")]
        pattern: String,
    },
    /// Valuations of solutions of x·q = n with w(n) = δ.
    Divvals {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        delta: String,
        #[arg(long, default_value = "all")]
        pattern: String,
    },
    /// Υ(q, δ) from a valuation profile.
    Upsilon {
        #[arg(long)]
        p: u32,
        /// Comma-separated γ₀,γ₁,… ("inf" for a zero coefficient).
        #[arg(long)]
        profile: String,
        #[arg(long)]
        delta: String,
    },
    /// Compare a pp-formula against a quantifier-free candidate on random models.
    Check {
        #[arg(long, value_name = "FILE")]
        formula: PathBuf,
        #[arg(long, value_name = "FILE")]
        against: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Axiom suite plus the shipped corpus through the model checker.
    Selftest {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Args, Debug)]
struct QeArgs {
    /// torsion-free, ttor or axioms:FILE.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, value_name = "FILE", required_unless_present = "replay")]
    formula: Option<PathBuf>,
    /// Write the JSON trace here.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
    /// Re-run a trace and check it reproduces byte for byte.
    #[arg(long, value_name = "FILE", conflicts_with = "formula")]
    replay: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PolyArg {
    /// File holding an Ore polynomial, e.g. `t^2 + (T)*t + 1`.
    #[arg(long, value_name = "FILE")]
    poly: PathBuf,
}

/// Defaults read from TOML; command-line flags win.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    p: Option<u32>,
    k: Option<u32>,
    modulus: Option<Vec<u32>>,
    lattice: Option<String>,
    precision: Option<String>,
    mode: Option<String>,
    seed: Option<u64>,
}

struct RunConfig {
    ctx: Ctx,
    precision: Rat,
    mode: String,
    seed: u64,
}

/// Failures the user can fix (exit 1) versus internal breaches (exit 2).
#[derive(Debug)]
enum Failure {
    User(anyhow::Error),
    Breach(String, Option<Box<Trace>>),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::User(e) => write!(f, "error: {:#}", e),
            Failure::Breach(m, _) => write!(f, "internal error: {}", m),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Failure {
        Failure::User(e)
    }
}

fn qe_failure(e: QeError) -> Failure {
    match e {
        QeError::Invariant { msg, trace } => Failure::Breach(msg, Some(trace)),
        other => Failure::User(anyhow!(other)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f);
            match f {
                Failure::User(_) => ExitCode::from(1),
                Failure::Breach(_, trace) => {
                    if let Some(t) = trace {
                        eprintln!("{}", t.to_json());
                    }
                    ExitCode::from(2)
                }
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let src = read(path)?;
            toml::from_str(&src).with_context(|| format!("config {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    let field = match &cli.field {
        Some(spec) => FiniteField::from_spec(spec).with_context(|| format!("--field {:?}", spec))?,
        None => {
            let p = file.p.unwrap_or(2);
            let k = file.k.unwrap_or(2);
            check_prime(p)?;
            match &file.modulus {
                Some(m) => {
                    let spec = format!("{}^{}:{}", p, k, m.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","));
                    FiniteField::from_spec(&spec)?
                }
                None => FiniteField::get(p, k)?,
            }
        }
    };
    let lat = cli.lattice.clone().or(file.lattice).unwrap_or_else(|| "full".into());
    let lattice = Lattice::from_spec(&lat).ok_or_else(|| anyhow!("bad lattice {:?}: expected full or tame:ℓ", lat))?;
    if let Lattice::Tame(l) = lattice {
        if l == 0 || l % field.p() == 0 {
            bail!("tame:{} needs ℓ coprime to p = {}", l, field.p());
        }
    }
    let prec = cli.precision.clone().or(file.precision).unwrap_or_else(|| "16".into());
    let precision: Rat = prec.parse().map_err(|e| anyhow!("--precision: {}", e))?;
    if precision <= Rat::int(0) {
        bail!("precision must be positive, got {}", precision);
    }
    Ok(RunConfig {
        ctx: Ctx::new(field, lattice),
        precision,
        mode: file.mode.unwrap_or_else(|| "torsion-free".into()),
        seed: cli.seed.or(file.seed).unwrap_or(0),
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Turns a character offset into `file:line:col`.
fn located(path: &Path, src: &str, e: ParseError) -> anyhow::Error {
    let before: String = src.chars().take(e.pos).collect();
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    anyhow!("{}:{}:{}: {}", path.display(), line, col, e.msg)
}

fn read_poly(path: &Path, ctx: &Ctx) -> Result<OrePoly> {
    let src = read(path)?;
    ctx.parse_ore(src.trim_end()).map_err(|e| located(path, &src, e))
}

fn parse_mode(s: &str) -> Result<Mode> {
    Ok(match s {
        "torsion-free" => Mode::TorsionFree,
        "ttor" => Mode::TTor,
        _ => match s.strip_prefix("axioms:") {
            Some(file) => {
                let src = read(Path::new(file))?;
                Mode::Axioms(Mode::parse_axioms(&src).map_err(|e| anyhow!("{}: {}", file, e))?)
            }
            None => bail!("unknown mode {:?}: expected torsion-free, ttor or axioms:FILE", s),
        },
    })
}

fn parse_pattern(s: &str) -> Result<AnnPattern> {
    Ok(match s {
        "all" => AnnPattern::All,
        "trivial" => AnnPattern::Trivial,
        list => AnnPattern::List(
            list.split(',')
                .map(|b| match b.trim() {
                    "1" => Ok(true),
                    "0" => Ok(false),
                    x => Err(anyhow!("pattern entry {:?} is not 0 or 1", x)),
                })
                .collect::<Result<_>>()?,
        ),
    })
}

fn emit(v: Value) {
    use std::io::Write;
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&v).expect("json"));
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = load_config(&cli)?;
    let ctx = &cfg.ctx;
    let field = ctx.field.spec();
    let lattice = ctx.lattice.spec();
    match cli.cmd {
        Cmd::Qe(a) => {
            if let Some(path) = &a.replay {
                let json = read(path)?;
                let trace = Trace::from_json(&json).map_err(qe_failure)?;
                let out = replay(&trace).map_err(|e| match e {
                    QeError::Replay(m) => Failure::Breach(format!("replay diverged: {}", m), Some(Box::new(trace.clone()))),
                    e => qe_failure(e),
                })?;
                if out.trace.to_json() != json.trim_end() {
                    return Err(Failure::Breach("replayed trace differs from the input".into(), Some(Box::new(out.trace))));
                }
                println!("{}", out.qf);
                return Ok(());
            }
            let path = a.formula.as_ref().expect("clap enforces --formula");
            let src = read(path)?;
            let phi = parse_pp(src.trim_end(), ctx).map_err(|e| located(path, &src, e))?;
            let mode = parse_mode(a.mode.as_deref().unwrap_or(&cfg.mode))?;
            let out = eliminate(&phi, ctx, &mode).map_err(qe_failure)?;
            if let Some(t) = &a.trace {
                std::fs::write(t, out.trace.to_json()).with_context(|| format!("cannot write {}", t.display()))?;
            }
            println!("{}", out.qf);
        }
        Cmd::Factor(a) => {
            let q = read_poly(&a.poly, ctx)?;
            let fz = factor_linear(&q, &cfg.precision).map_err(|e| anyhow!("factor: {}", e))?;
            let product = fz.product();
            let target = q.embed(&fz.embedding);
            let residuals: Vec<String> = (0..target.coeffs().len().max(product.coeffs().len()))
                .map(|i| product.coeff(i).sub(&target.coeff(i)).v_lb().to_string())
                .collect();
            emit(json!({
                "schema": "ore-qe/factor/v1",
                "field": fz.field.spec(),
                "lattice": lattice,
                "input": q.to_string(),
                "factors": fz.factors.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                "product": product.to_string(),
                "precision": fz.precision,
                "verification": {
                    "residual_valuations": residuals,
                    "agrees": agrees_to(&product, &target, &fz.precision),
                    "prefixes_in_I": (1..=fz.factors.len()).all(|j| {
                        fz.factors[..j].iter().fold(OrePoly::one(&fz.field, ctx.lattice), |acc, f| acc.mul(&f.to_poly())).in_i()
                    }),
                },
            }));
        }
        Cmd::Roots { poly, rhs } => {
            let q = read_poly(&poly.poly, ctx)?;
            let n = match &rhs {
                Some(s) => ctx.parse_series(s).map_err(|e| anyhow!("--rhs at offset {}: {}", e.pos, e.msg))?,
                None => ctx.series_zero(),
            };
            let rs = solve_affine(&q, &n, &SolveOpts::new(cfg.precision.clone())).map_err(|e| anyhow!("roots: {}", e))?;
            let balls: Vec<Value> = rs
                .balls
                .iter()
                .map(|b| {
                    let status = match &b.status {
                        RootStatus::Exact => "exact".to_string(),
                        RootStatus::Converged => "converged".to_string(),
                        RootStatus::Stalled => "stalled".to_string(),
                        RootStatus::Defect(e) => format!("defect at exponent {}", e),
                    };
                    json!({"center": b.center.to_string(), "radius": b.radius, "mult": b.mult, "status": status, "residual": b.residual})
                })
                .collect();
            emit(json!({
                "schema": "ore-qe/roots/v1",
                "field": rs.field.spec(),
                "lattice": lattice,
                "input": q.to_string(),
                "rhs": n.to_string(),
                "balls": balls,
                "verification": {"total": rs.total(), "degree": q.deg0(), "complete": rs.complete()},
            }));
        }
        Cmd::Divide { poly, by, generalized } => {
            let q1 = read_poly(&poly.poly, ctx)?;
            let q2 = read_poly(&by, ctx)?;
            let v = if generalized {
                let g = q1.generalized_right_divide(&q2).map_err(|e| anyhow!("divide: {}", e))?;
                let lhs = q1.scalar_right(&g.scale);
                let resid = lhs.sub(&q2.mul(&g.quot).add(&g.rem));
                json!({
                    "schema": "ore-qe/divide/v1",
                    "kind": "generalized",
                    "scale": g.scale.to_string(),
                    "quotient": g.quot.to_string(),
                    "remainder": g.rem.to_string(),
                    "verification": {"exact": resid.is_zero(), "residual": resid.prec().to_string()},
                })
            } else {
                let (c, r) = q1.right_divide(&q2, Some(&cfg.precision)).map_err(|e| anyhow!("divide: {}", e))?;
                let resid = q1.sub(&q2.mul(&c).add(&r));
                let vals: Vec<String> = resid.coeffs().iter().map(|x| x.v_lb().to_string()).collect();
                json!({
                    "schema": "ore-qe/divide/v1",
                    "kind": "right",
                    "quotient": c.to_string(),
                    "remainder": r.to_string(),
                    "verification": {"agrees_to_precision": agrees_to(&q1, &q2.mul(&c).add(&r), &cfg.precision), "residual_valuations": vals},
                })
            };
            emit(v);
        }
        Cmd::Ann { poly, pattern } => {
            let q = read_poly(&poly.poly, ctx)?;
            let vs = ann_value_set(&q, &cfg.precision, &parse_pattern(&pattern)?).map_err(|e| anyhow!("ann: {}", e))?;
            emit(json!({"schema": "ore-qe/values/v1", "field": field, "lattice": lattice, "input": q.to_string(), "ann": vs}));
        }
        Cmd::Divvals { poly, delta, pattern } => {
            let q = read_poly(&poly.poly, ctx)?;
            let d: Rat = delta.parse().map_err(|e| anyhow!("--delta: {}", e))?;
            let vs = div_value_set(&q, &d, &cfg.precision, &parse_pattern(&pattern)?).map_err(|e| anyhow!("divvals: {}", e))?;
            emit(json!({"schema": "ore-qe/values/v1", "field": field, "lattice": lattice, "input": q.to_string(), "delta": d, "div": vs}));
        }
        Cmd::Upsilon { p, profile, delta } => {
            check_prime(p).map_err(|e| anyhow!("--p: {}", e))?;
            let entries = profile
                .split(',')
                .map(|g| match g.trim().parse::<DeltaPoint>() {
                    Ok(DeltaPoint::Inf) => Ok(None),
                    Ok(DeltaPoint::Fin(r)) => Ok(Some(r)),
                    Err(e) => Err(anyhow!("--profile: {}", e)),
                })
                .collect::<Result<Vec<_>>>()?;
            let prof = ValueProfile::new(p, entries);
            let d: DeltaPoint = delta.parse().map_err(|e| anyhow!("--delta: {}", e))?;
            let (mu, idx) = upsilon(&prof, &d).map_err(|e| anyhow!("{}", e))?;
            let back = upsilon_inv(&prof, &mu).map_err(|e| anyhow!("{}", e))?;
            println!("mu = {}", mu);
            println!("witness index = {}", idx);
            if let DeltaPoint::Fin(m) = &mu {
                println!("ties = {:?}", tie_set(&prof, m));
            }
            println!("round trip: Υ⁻¹(q, {}) = {} ({})", mu, back, if back == d { "ok" } else { "MISMATCH" });
            if back != d {
                return Err(Failure::Breach("Υ round trip failed".into(), None));
            }
        }
        Cmd::Check { formula, against, samples } => {
            let src = read(&formula)?;
            let phi = parse_pp(src.trim_end(), ctx).map_err(|e| located(&formula, &src, e))?;
            let src2 = read(&against)?;
            let psi = parse_qf(src2.trim_end(), ctx).map_err(|e| located(&against, &src2, e))?;
            let sc = SamplerConfig { samples, seed: cfg.seed, precision: cfg.precision.clone() };
            let rep = compare_formulas(&phi, &psi, &sc);
            emit(json!({
                "schema": "ore-qe/check/v1",
                "field": field,
                "lattice": lattice,
                "seed": cfg.seed,
                "agree": rep.disagree() == 0,
                "report": rep,
            }));
        }
        Cmd::Selftest { samples } => {
            let mut hard = vec![];
            let mut lattices = vec![Lattice::Full];
            let ell = (3..).find(|l| l % ctx.field.p() != 0).unwrap();
            lattices.push(Lattice::Tame(ell));
            for l in lattices {
                let r = check_axioms(&ctx.field, l, samples, cfg.seed);
                let stalled: usize = r.checks.iter().map(|c| c.stalled).sum();
                println!("axioms {} {}: {} (lattice defects {}, stalled witnesses {})", field, l.spec(), if r.ok() { "ok" } else { "FAILED" }, r.defects(), stalled);
                for c in r.checks.iter().filter(|c| c.failed > 0) {
                    println!("  {}: {} failures, first {}", c.name, c.failed, c.first_failure.as_deref().unwrap_or("?"));
                    hard.push(format!("axiom {} on {}", c.name, l.spec()));
                }
            }
            let sc = SamplerConfig::new(samples, cfg.seed);
            let (mut total, mut unknown) = (0, 0);
            for e in corpus::shipped() {
                match corpus::run_entry(&e, &sc) {
                    Ok(r) => {
                        total += r.compare.samples();
                        unknown += r.compare.unknown();
                        if !r.sound() {
                            println!("corpus {}: UNSOUND ({} disagreements)", r.name, r.compare.disagree());
                            hard.push(format!("corpus {}", r.name));
                        }
                    }
                    Err(err) => {
                        println!("corpus {}: ERROR {}", e.name, err);
                        hard.push(format!("corpus {}", e.name));
                    }
                }
            }
            println!("corpus: {} samples, {} unknown", total, unknown);
            if !hard.is_empty() {
                return Err(Failure::Breach(format!("selftest failures: {}", hard.join(", ")), None));
            }
            println!("selftest ok");
        }
    }
    Ok(())
}
