use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tadic_core::dwork::{certify_turning_points, psi_matrix, verify_trace_formula, TurningStatus};
use tadic_core::ff::{is_prime, FieldDesc, FieldElem};
use tadic_core::hasse::{hasse_polynomial, hasse_product_eval, product_turning_points};
use tadic_core::polygons::{
    arithmetic_polygon, arithmetic_profile, hodge_bound_report, hodge_polygon, polygon_compare,
    rational_string, svg_compare, ConvexPolygon, Interval,
};
use tadic_core::sums::{l_function, LaurentPoly};
use tadic_core::{acceptance, Error, DEFAULT_BUDGET};

#[derive(Parser)]
#[command(
    name = "tadic",
    version,
    about = "Exponential sums over finite fields: L-functions, Newton polygons, genericity certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lower-bound polygons for an exponent interval
    Polygon(PolygonArgs),
    /// Genericity polynomials at the turning points, optionally evaluated
    Hasse(HasseArgs),
    /// L-function of one exponential sum with polygon verdicts
    Lfun(LfunArgs),
    /// Truncated operator: Fredholm coefficients, certificates, residuals
    Dwork(DworkArgs),
    /// Newton polygons across a whole coefficient family
    Sweep(SweepArgs),
    /// Run the built-in verification corpus
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
    Svg,
}

#[derive(clap::Args)]
struct PolygonArgs {
    /// Prime p
    #[arg(long)]
    p: Option<u64>,
    /// Exponent interval, written like 0..3 or -1..1
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Number of slopes to emit (default: twice the interval length)
    #[arg(long)]
    len: Option<usize>,
    /// Ground field degree over F_p; scales both polygons
    #[arg(long)]
    a: Option<u32>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults file with key=value lines
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct HasseArgs {
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Single turning point instead of the full product range
    #[arg(long)]
    m: Option<usize>,
    /// Evaluate at these coefficients, e.g. a(3)=1,a(1)=2
    #[arg(long)]
    coeffs: Option<String>,
    /// Ground field degree for the evaluation coefficients
    #[arg(long)]
    a: Option<u32>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct LfunArgs {
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    a: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Coefficients of f, e.g. a(-1)=1,a(1)=1; extension elements as base-p digits 2:3
    #[arg(long)]
    coeffs: Option<String>,
    /// Uniformizer level: 1 is the T-adic case
    #[arg(long)]
    m: Option<u32>,
    /// Extra coefficients checked to vanish beyond the generic degree
    #[arg(long, default_value_t = 0)]
    slack: u32,
    /// Also emit this many slopes of the completed product polygon
    #[arg(long)]
    c_range: Option<usize>,
    /// Write an overlay of computed and expected polygons to this file
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct DworkArgs {
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    a: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long)]
    coeffs: Option<String>,
    /// Basis degree bound (default: smallest bound the cutoff supports)
    #[arg(long)]
    deg_bound: Option<u32>,
    /// Working precision mod p^prec
    #[arg(long, default_value_t = 2)]
    prec_p: u32,
    /// Uniformizer-numerator cutoff (default: enough for all requested orders)
    #[arg(long)]
    pi_cutoff: Option<i64>,
    /// Compute determinant coefficients 1..=m
    #[arg(long)]
    upto_m: Option<usize>,
    /// Check the trace formula for k = 1..=this
    #[arg(long, default_value_t = 1)]
    trace_upto: u32,
    /// T-order of the trace comparison
    #[arg(long, default_value_t = 4)]
    trace_order: usize,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SweepArgs {
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    a: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Uniformizer level
    #[arg(long)]
    m: Option<u32>,
    /// Pin some coefficients, e.g. a(3)=1; the rest range over the field
    #[arg(long)]
    fix: Option<String>,
    /// Sample this many tuples instead of the full family
    #[arg(long)]
    sample: Option<u64>,
    /// RNG seed for sampled sweeps
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count (default: one per core)
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Run a single criterion by id instead of the whole corpus
    #[arg(long)]
    criterion: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Polygon(args) => cmd_polygon(args),
        Command::Hasse(args) => cmd_hasse(args),
        Command::Lfun(args) => cmd_lfun(args),
        Command::Dwork(args) => cmd_dwork(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            if let Some(io) = err.downcast_ref::<std::io::Error>() {
                if io.kind() == std::io::ErrorKind::BrokenPipe {
                    std::process::exit(0);
                }
            }
            let (kind, code) = match err.downcast_ref::<Error>() {
                Some(e) => (error_kind(e), e.exit_code()),
                None => ("usage", 3),
            };
            let payload = serde_json::json!({
                "error": {
                    "kind": kind,
                    "message": format!("{err:#}"),
                    "exit_code": code,
                }
            });
            eprintln!("{payload}");
            std::process::exit(code);
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::NotPrime(_) => "not-prime",
        Error::Precondition { .. } => "precondition",
        Error::OutsideCone { .. } => "outside-cone",
        Error::Budget { .. } => "budget",
        Error::InsufficientPrecision { .. } => "insufficient-precision",
        Error::TruncationShortfall { .. } => "truncation-shortfall",
        Error::SlopeSetCardinality { .. } => "slope-set-cardinality",
        Error::Integrality { .. } => "integrality",
        Error::DegreeOverflow { .. } => "degree-overflow",
        Error::Property(_) => "property",
        Error::Inconclusive(_) => "inconclusive",
        Error::Unsupported(_) => "unsupported",
    }
}

/// Defaults file: one key=value per line, # starts a comment. Flags given
/// on the command line win over file entries.
struct Config(BTreeMap<String, String>);

impl Config {
    fn load(path: Option<&PathBuf>) -> anyhow::Result<Config> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line.split_once('=').with_context(|| {
                    format!("config line {} is not key=value: {raw:?}", lineno + 1)
                })?;
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Config(map))
    }

    fn str(&self, key: &str) -> Option<String> {
        self.0.get(key).cloned()
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> anyhow::Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| anyhow::anyhow!("config key {key} has unusable value {v:?}")),
        }
    }
}

fn need<T>(x: Option<T>, what: &str) -> anyhow::Result<T> {
    x.with_context(|| format!("missing required --{what} (flag or config key)"))
}

/// Budget precedence: explicit flag, then config file, then the
/// TADIC_BUDGET environment variable, then the built-in default.
fn resolve_budget(flag: Option<u64>, cfg: &Config) -> anyhow::Result<u64> {
    if let Some(b) = flag {
        return Ok(b);
    }
    if let Some(b) = cfg.parsed::<u64>("budget")? {
        return Ok(b);
    }
    if let Ok(v) = std::env::var("TADIC_BUDGET") {
        return v
            .parse()
            .with_context(|| format!("TADIC_BUDGET is not a count: {v:?}"));
    }
    Ok(DEFAULT_BUDGET)
}

fn parse_delta(s: &str) -> anyhow::Result<Interval> {
    let (l, r) = s
        .split_once("..")
        .with_context(|| format!("interval must look like -1..3, got {s:?}"))?;
    let left: i64 = l.trim().parse().context("left endpoint")?;
    let right: i64 = r.trim().parse().context("right endpoint")?;
    if left > 0 || right < 0 {
        bail!("interval {s:?} must contain 0: left endpoint <= 0 <= right endpoint");
    }
    Ok(Interval::new((-left) as u32, right as u32)?)
}

/// One field element from text: either a value index below q, or base-p
/// digits joined by ':', lowest power first, e.g. 2:3 for 2 + 3w.
fn parse_elem(field: &FieldDesc, s: &str) -> anyhow::Result<FieldElem> {
    if s.contains(':') {
        let digits: Vec<u64> = s
            .split(':')
            .map(|d| d.trim().parse().context("element digit"))
            .collect::<anyhow::Result<_>>()?;
        if digits.len() > field.n() as usize || digits.iter().any(|&d| d >= field.p()) {
            bail!(
                "element {s:?} does not fit F_{}: at most {} digits below {}",
                field.q(),
                field.n(),
                field.p()
            );
        }
        let mut e = field.zero();
        e[..digits.len()].copy_from_slice(&digits);
        Ok(e)
    } else {
        let v: u64 = s.trim().parse().context("element value")?;
        if v >= field.q() {
            bail!("element value {v} is not below q = {}", field.q());
        }
        Ok(field.from_value(v))
    }
}

/// Assignments like a(-1)=1,a(1)=2:3 into a coefficient map.
fn parse_coeff_map(field: &FieldDesc, s: &str) -> anyhow::Result<BTreeMap<i64, FieldElem>> {
    let mut map = BTreeMap::new();
    for part in s.split(',') {
        let part = part.trim();
        let (lhs, rhs) = part
            .split_once('=')
            .with_context(|| format!("assignment must look like a(1)=2, got {part:?}"))?;
        let lhs = lhs.trim();
        let inner = lhs
            .strip_prefix("a(")
            .and_then(|t| t.strip_suffix(')'))
            .with_context(|| format!("left side must look like a(-1), got {lhs:?}"))?;
        let u: i64 = inner.trim().parse().context("exponent")?;
        let e = parse_elem(field, rhs.trim())?;
        if map.insert(u, e).is_some() {
            bail!("exponent {u} assigned twice");
        }
    }
    Ok(map)
}

fn elem_string(field: &FieldDesc, e: &FieldElem) -> String {
    if field.n() == 1 {
        e[0].to_string()
    } else {
        let digits: Vec<String> = e.iter().map(u64::to_string).collect();
        format!("({})", digits.join(","))
    }
}

fn coeff_json(field: &FieldDesc, coeffs: &BTreeMap<i64, FieldElem>) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = coeffs
        .iter()
        .map(|(&u, c)| {
            serde_json::json!({"exponent": u, "value": elem_string(field, c)})
        })
        .collect();
    serde_json::Value::Array(rows)
}

fn frac_string(num: i64, den: i64) -> String {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs().max(1)
        } else {
            gcd(b, a % b)
        }
    }
    let g = gcd(num, den);
    let (n, d) = (num / g, den / g);
    if d == 1 {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

fn slope_strings(poly: &ConvexPolygon) -> Vec<String> {
    poly.slopes().iter().map(rational_string).collect()
}

fn emit(out: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn warn_hypothesis(p: u64, delta: &Interval) {
    let den = delta.denominator() as u64;
    if p <= 3 * den {
        eprintln!(
            "warning: p = {p} is not above three times the denominator {den}; \
             genericity verdicts are observations, not theorems, in this range"
        );
    }
}

fn cmd_polygon(args: PolygonArgs) -> anyhow::Result<i32> {
    let cfg = Config::load(args.config.as_ref())?;
    let p = need(args.p.or(cfg.parsed("p")?), "p")?;
    if !is_prime(p) {
        return Err(Error::NotPrime(p).into());
    }
    let delta = parse_delta(&need(
        args.delta.or_else(|| cfg.str("delta")),
        "delta",
    )?)?;
    let a = args.a.or(cfg.parsed("a")?).unwrap_or(1).max(1) as u64;
    let len = args
        .len
        .or(cfg.parsed("len")?)
        .unwrap_or(2 * delta.vol() as usize);
    warn_hypothesis(p, &delta);

    let arith = arithmetic_polygon(&delta, p, len)?.scale(a);
    let hodge = hodge_polygon(&delta, len).scale(a * (p - 1));
    let report = hodge_bound_report(&delta, p, len)?;

    let text = match args.format {
        Format::Csv => arith.to_csv(),
        Format::Svg => svg_compare(&[("arithmetic", &arith), ("hodge-scaled", &hodge)], len),
        Format::Json => serde_json::to_string_pretty(&serde_json::json!({
            "p": p,
            "delta": delta.to_string(),
            "ground_degree": a,
            "len": len,
            "arithmetic": arith.to_json(),
            "hodge_scaled": hodge.to_json(),
            "dominates": report.dominates,
            "equal_at_vol": report.equal_at_vol,
            "agrees_with_polygon": report.agrees_with_polygon,
        }))?,
        Format::Text => {
            let mut s = format!("p = {p}, delta = {delta}, {len} slopes\n");
            s.push_str(&format!("arithmetic: {}\n", slope_strings(&arith).join(", ")));
            s.push_str(&format!(
                "hodge x (p-1): {}\n",
                slope_strings(&hodge).join(", ")
            ));
            s.push_str(&format!(
                "dominates = {}, equal at vol = {}, sorted order attained = {}\n",
                report.dominates, report.equal_at_vol, report.agrees_with_polygon
            ));
            s
        }
    };
    emit(args.out.as_ref(), &text)?;
    Ok(0)
}

fn cmd_hasse(args: HasseArgs) -> anyhow::Result<i32> {
    let cfg = Config::load(args.config.as_ref())?;
    let p = need(args.p.or(cfg.parsed("p")?), "p")?;
    if !is_prime(p) {
        return Err(Error::NotPrime(p).into());
    }
    let delta = parse_delta(&need(
        args.delta.or_else(|| cfg.str("delta")),
        "delta",
    )?)?;
    let a = args.a.or(cfg.parsed("a")?).unwrap_or(1).max(1);
    warn_hypothesis(p, &delta);

    let ms = match args.m.or(cfg.parsed("m")?) {
        Some(m) => vec![m],
        None => product_turning_points(&delta, p)?,
    };
    let factors: Vec<_> = ms
        .iter()
        .map(|&m| hasse_polynomial(&delta, p, m).map(|h| (m, h)))
        .collect::<Result<_, _>>()?;

    let coeffs_arg = args.coeffs.or_else(|| cfg.str("coeffs"));
    let eval = match &coeffs_arg {
        None => None,
        Some(s) => {
            let field = FieldDesc::new(p, a)?;
            let coeffs = parse_coeff_map(&field, s)?;
            let f = LaurentPoly::new(delta.clone(), field.clone(), coeffs)?;
            let mut values = Vec::new();
            let mut product = field.one();
            for (m, h) in &factors {
                let v = h.eval(&field, f.coeffs());
                product = field.mul(&product, &v);
                values.push((*m, v));
            }
            let nonzero = !field.is_zero(&product);
            Some((field, f, values, product, nonzero))
        }
    };

    let text = match args.format {
        Format::Json => {
            let mut payload = serde_json::json!({
                "p": p,
                "delta": delta.to_string(),
                "factors": factors.iter().map(|(m, h)| serde_json::json!({
                    "m": m,
                    "display": h.to_string(),
                    "polynomial": h.to_json(),
                })).collect::<Vec<_>>(),
            });
            if let Some((field, f, values, product, nonzero)) = &eval {
                payload["evaluation"] = serde_json::json!({
                    "coeffs": coeff_json(field, f.coeffs()),
                    "values": values.iter().map(|(m, v)| serde_json::json!({
                        "m": m,
                        "value": elem_string(field, v),
                    })).collect::<Vec<_>>(),
                    "product": elem_string(field, product),
                    "nonzero": nonzero,
                });
            }
            serde_json::to_string_pretty(&payload)?
        }
        Format::Text => {
            let mut s = String::new();
            for (m, h) in &factors {
                s.push_str(&format!("m={m}: {h}\n"));
            }
            if let Some((field, _, values, product, nonzero)) = &eval {
                for (m, v) in values {
                    s.push_str(&format!("m={m} value: {}\n", elem_string(field, v)));
                }
                s.push_str(&format!(
                    "product = {}, nonzero = {nonzero}\n",
                    elem_string(field, product)
                ));
            }
            s
        }
        _ => bail!("hasse supports text and json output"),
    };
    emit(args.out.as_ref(), &text)?;
    Ok(0)
}

fn cmd_lfun(args: LfunArgs) -> anyhow::Result<i32> {
    let cfg = Config::load(args.config.as_ref())?;
    let p = need(args.p.or(cfg.parsed("p")?), "p")?;
    let a = args.a.or(cfg.parsed("a")?).unwrap_or(1).max(1);
    let delta = parse_delta(&need(
        args.delta.or_else(|| cfg.str("delta")),
        "delta",
    )?)?;
    let m = args.m.or(cfg.parsed("m")?).unwrap_or(1);
    let budget = resolve_budget(args.budget, &cfg)?;
    let field = FieldDesc::new(p, a)?;
    let coeffs = parse_coeff_map(
        &field,
        &need(args.coeffs.or_else(|| cfg.str("coeffs")), "coeffs")?,
    )?;
    let f = LaurentPoly::new(delta.clone(), field.clone(), coeffs)?;
    warn_hypothesis(p, &delta);

    let l = l_function(&f, m, budget, args.slack)?;
    let np = l.newton_polygon()?;
    let expected = arithmetic_polygon(&delta, p, l.degree())?.scale(a as u64);
    let cmp = polygon_compare(&np, &expected, l.degree())?;
    let cert = hasse_product_eval(&delta, p, &f)?;
    let valuations: Vec<Option<u64>> =
        l.coeffs().iter().map(|c| l.cyc().pi_valuation(c)).collect();
    let hypothesis = p > 3 * delta.denominator() as u64;

    if let Some(path) = &args.svg {
        let svg = svg_compare(&[("newton", &np), ("arithmetic", &expected)], l.degree());
        fs::write(path, svg).with_context(|| format!("cannot write {}", path.display()))?;
    }

    let text = match args.format {
        Format::Json => {
            let mut payload = serde_json::json!({
                "inputs": {
                    "p": p,
                    "q": field.q(),
                    "ground_degree": a,
                    "delta": delta.to_string(),
                    "m": m,
                    "coeffs": coeff_json(&field, f.coeffs()),
                    "budget": budget,
                    "slack": args.slack,
                },
                "l_function": l.to_json(),
                "valuations": valuations,
                "newton_polygon": np.to_json(),
                "arithmetic_expected": expected.to_json(),
                "verdicts": {
                    "lies_above": cmp.lies_above,
                    "equal": cmp.equal,
                    "first_divergence": cmp.first_divergence,
                    "hasse_nonzero": cert.nonzero,
                    "consistent": cmp.equal == cert.nonzero,
                    "hypothesis_satisfied": hypothesis,
                },
            });
            if let Some(range) = args.c_range {
                payload["c_polygon"] = l.c_polygon(range)?.to_json();
            }
            serde_json::to_string_pretty(&payload)?
        }
        Format::Csv => {
            let mut s = String::from("n,valuation,coefficient\n");
            for (n, c) in l.coeffs().iter().enumerate() {
                let v = valuations[n]
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "inf".into());
                let digits: Vec<String> = l.cyc().to_json(c)["coeffs"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .map(|d| d.as_str().unwrap_or_default().to_string())
                    .collect();
                s.push_str(&format!("{n},{v},{}\n", digits.join(":")));
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "p = {p}, q = {}, delta = {delta}, m = {m}, degree = {}\n",
                field.q(),
                l.degree()
            );
            s.push_str(&format!(
                "newton slopes:     {}\n",
                slope_strings(&np).join(", ")
            ));
            s.push_str(&format!(
                "arithmetic bound:  {}\n",
                slope_strings(&expected).join(", ")
            ));
            s.push_str(&format!(
                "lies above = {}, equal = {}, hasse nonzero = {}, consistent = {}, \
                 hypothesis satisfied = {hypothesis}\n",
                cmp.lies_above,
                cmp.equal,
                cert.nonzero,
                cmp.equal == cert.nonzero
            ));
            s
        }
        Format::Svg => svg_compare(&[("newton", &np), ("arithmetic", &expected)], l.degree()),
    };
    emit(args.out.as_ref(), &text)?;
    Ok(0)
}

fn cmd_dwork(args: DworkArgs) -> anyhow::Result<i32> {
    let cfg = Config::load(args.config.as_ref())?;
    let p = need(args.p.or(cfg.parsed("p")?), "p")?;
    let a = args.a.or(cfg.parsed("a")?).unwrap_or(1).max(1);
    let delta = parse_delta(&need(
        args.delta.or_else(|| cfg.str("delta")),
        "delta",
    )?)?;
    let budget = resolve_budget(args.budget, &cfg)?;
    let field = FieldDesc::new(p, a)?;
    let coeffs = parse_coeff_map(
        &field,
        &need(args.coeffs.or_else(|| cfg.str("coeffs")), "coeffs")?,
    )?;
    let f = LaurentPoly::new(delta.clone(), field.clone(), coeffs)?;
    warn_hypothesis(p, &delta);

    let den = delta.denominator() as i64;
    let upto = args.upto_m.unwrap_or(delta.vol() as usize);
    let prof = arithmetic_profile(&delta, p, upto)?;
    let cutoff = args
        .pi_cutoff
        .unwrap_or(den * a as i64 * prof[upto] as i64 + den + 1);
    let min_bound = {
        let step = den as u64 * (p - 1);
        ((cutoff.max(1) as u64 + step - 1) / step).max(1) as u32
    };
    let bound = args
        .deg_bound
        .unwrap_or_else(|| min_bound.max((upto as u32 + delta.vol() - 1) / delta.vol()));

    let mat = psi_matrix(&f, bound, args.prec_p, cutoff)?;
    let fred = mat.fredholm(upto)?;
    let rows: Vec<serde_json::Value> = fred
        .iter()
        .map(|c| {
            let expected = den * a as i64 * prof[c.index] as i64;
            let ord = c.series.ord();
            let attained = ord == Some(expected);
            let leading = c.series.coeffs().get(&expected).map(|v| {
                elem_string(&field, &mat.ring().reduce(v))
            });
            serde_json::json!({
                "m": c.index,
                "order": ord.map(|o| frac_string(o, den)),
                "order_num": ord,
                "expected": frac_string(expected, den),
                "expected_num": expected,
                "attained": attained,
                "leading": leading,
                "p_trust": c.p_trust,
                "series": c.series.to_json(),
            })
        })
        .collect();

    let certificate = if p > 3 * delta.denominator() as u64 {
        let cert = certify_turning_points(&f, args.prec_p)?;
        let turning: Vec<serde_json::Value> = cert
            .turning
            .iter()
            .map(|(m, status)| match status {
                TurningStatus::Granted { leading } => serde_json::json!({
                    "m": m,
                    "status": "granted",
                    "leading": elem_string(&field, leading),
                }),
                TurningStatus::Denied => serde_json::json!({
                    "m": m,
                    "status": "denied",
                }),
                TurningStatus::Inconclusive(reason) => serde_json::json!({
                    "m": m,
                    "status": "inconclusive",
                    "reason": reason,
                }),
            })
            .collect();
        serde_json::json!({"granted": cert.granted, "turning": turning})
    } else {
        eprintln!("warning: certification needs p above three times the denominator; skipped");
        serde_json::Value::Null
    };

    let mut residuals = Vec::new();
    for k in 1..=args.trace_upto {
        let rep = verify_trace_formula(&f, k, args.prec_p, args.trace_order, budget)?;
        residuals.push(serde_json::json!({
            "k": k,
            "ok": rep.ok,
            "order": rep.order,
            "precision": rep.precision,
            "residual": rep.residual.to_json(),
        }));
    }

    let payload = serde_json::json!({
        "inputs": {
            "p": p,
            "q": field.q(),
            "delta": delta.to_string(),
            "coeffs": coeff_json(&field, f.coeffs()),
            "deg_bound": bound,
            "prec_p": args.prec_p,
            "pi_cutoff": cutoff,
            "upto_m": upto,
        },
        "basis": mat.basis(),
        "coefficients": rows,
        "certificate": certificate,
        "trace_residuals": residuals,
    });
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&payload)?,
        _ => bail!("dwork emits json output"),
    };
    emit(args.out.as_ref(), &text)?;
    Ok(0)
}

struct SweepRow {
    coeffs: Vec<(i64, String)>,
    hasse: String,
    slopes: Vec<String>,
    equal: bool,
    nonzero: bool,
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<i32> {
    let cfg = Config::load(args.config.as_ref())?;
    let p = need(args.p.or(cfg.parsed("p")?), "p")?;
    let a = args.a.or(cfg.parsed("a")?).unwrap_or(1).max(1);
    let delta = parse_delta(&need(
        args.delta.or_else(|| cfg.str("delta")),
        "delta",
    )?)?;
    let m = args.m.or(cfg.parsed("m")?).unwrap_or(1);
    let budget = resolve_budget(args.budget, &cfg)?;
    let sample = args.sample.or(cfg.parsed("sample")?);
    let seed = args.seed.or(cfg.parsed("seed")?).unwrap_or(0);
    let field = FieldDesc::new(p, a)?;
    let q = field.q();
    warn_hypothesis(p, &delta);

    let fixed = match args.fix.or_else(|| cfg.str("fix")) {
        Some(s) => parse_coeff_map(&field, &s)?,
        None => BTreeMap::new(),
    };
    let e = delta.e() as i64;
    let d = delta.d() as i64;
    let is_vertex = |u: i64| (u == d && d > 0) || (u == -e && e > 0);
    let free: Vec<i64> = (-e..=d)
        .filter(|&u| u != 0 && !fixed.contains_key(&u))
        .collect();

    let mut count: u128 = 1;
    for &u in &free {
        count = count.saturating_mul(if is_vertex(u) { q as u128 - 1 } else { q as u128 });
    }
    if let Some(n) = sample {
        count = n as u128;
    }
    let degree = p.pow(m - 1) as u128 * delta.vol() as u128;
    let mut per_tuple: u128 = 0;
    let mut qk: u128 = 1;
    for _ in 0..degree {
        qk = qk.saturating_mul(q as u128);
        per_tuple = per_tuple.saturating_add(qk.saturating_sub(1));
    }
    let required = count.saturating_mul(per_tuple);
    if required > budget as u128 {
        return Err(Error::Budget {
            required: required.min(u64::MAX as u128) as u64,
            budget,
            formula: format!("{count} tuples x sum of (q^k - 1) for k up to {degree}"),
        }
        .into());
    }

    let tuples: Vec<BTreeMap<i64, FieldElem>> = if let Some(n) = sample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let mut map = fixed.clone();
                for &u in &free {
                    let v = if is_vertex(u) {
                        rng.gen_range(1..q)
                    } else {
                        rng.gen_range(0..q)
                    };
                    map.insert(u, field.from_value(v));
                }
                map
            })
            .collect()
    } else {
        let sizes: Vec<u64> = free
            .iter()
            .map(|&u| if is_vertex(u) { q - 1 } else { q })
            .collect();
        let offsets: Vec<u64> = free
            .iter()
            .map(|&u| if is_vertex(u) { 1 } else { 0 })
            .collect();
        let mut out = Vec::with_capacity(count as usize);
        let mut idx = vec![0u64; free.len()];
        'all: loop {
            let mut map = fixed.clone();
            for (pos, &u) in free.iter().enumerate() {
                map.insert(u, field.from_value(offsets[pos] + idx[pos]));
            }
            out.push(map);
            let mut pos = free.len();
            loop {
                if pos == 0 {
                    break 'all;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < sizes[pos] {
                    break;
                }
                idx[pos] = 0;
            }
        }
        out
    };

    let run_one = |coeffs: &BTreeMap<i64, FieldElem>| -> tadic_core::Result<SweepRow> {
        let f = LaurentPoly::new(delta.clone(), field.clone(), coeffs.clone())?;
        let rep = tadic_core::sums::verify_generic_np(&f, m, budget, 0)?;
        if rep.hypothesis_satisfied && !rep.consistent {
            return Err(Error::Property(format!(
                "genericity and polygon equality disagree at {:?}",
                coeffs
            )));
        }
        let cert = hasse_product_eval(&delta, p, &f)?;
        Ok(SweepRow {
            coeffs: coeffs
                .iter()
                .map(|(&u, c)| (u, elem_string(&field, c)))
                .collect(),
            hasse: elem_string(&field, &cert.value),
            slopes: slope_strings(&rep.np_l),
            equal: rep.equal,
            nonzero: cert.nonzero,
        })
    };
    let results: Vec<tadic_core::Result<SweepRow>> = match args.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .context("thread pool")?
            .install(|| tuples.par_iter().map(run_one).collect()),
        None => tuples.par_iter().map(run_one).collect(),
    };
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        rows.push(r?);
    }

    let generic = rows.iter().filter(|r| r.nonzero).count();
    let nongeneric: Vec<&SweepRow> = rows.iter().filter(|r| !r.nonzero).collect();

    let coeff_cells = |row: &SweepRow| -> Vec<serde_json::Value> {
        row.coeffs
            .iter()
            .map(|(u, v)| serde_json::json!({"exponent": u, "value": v}))
            .collect()
    };
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&serde_json::json!({
            "inputs": {
                "p": p,
                "q": q,
                "delta": delta.to_string(),
                "m": m,
                "fixed": fixed.iter().map(|(&u, c)| {
                    serde_json::json!({"exponent": u, "value": elem_string(&field, c)})
                }).collect::<Vec<_>>(),
                "sample": sample,
                "seed": if sample.is_some() { Some(seed) } else { None },
                "budget": budget,
            },
            "rows": rows.iter().map(|r| serde_json::json!({
                "coeffs": coeff_cells(r),
                "hasse": r.hasse,
                "newton_slopes": r.slopes,
                "equal": r.equal,
            })).collect::<Vec<_>>(),
            "summary": {
                "count": rows.len(),
                "generic": generic,
                "nongeneric": nongeneric.len(),
                "nongeneric_coeffs": nongeneric.iter().map(|r| coeff_cells(r)).collect::<Vec<_>>(),
            },
        }))?,
        Format::Csv => {
            let mut s = String::new();
            let header: Vec<String> = rows
                .first()
                .map(|r| r.coeffs.iter().map(|(u, _)| format!("a({u})")).collect())
                .unwrap_or_default();
            s.push_str(&header.join(","));
            if !header.is_empty() {
                s.push(',');
            }
            s.push_str("hasse,slopes,equal\n");
            for r in &rows {
                let cells: Vec<String> = r.coeffs.iter().map(|(_, v)| v.clone()).collect();
                s.push_str(&cells.join(","));
                if !cells.is_empty() {
                    s.push(',');
                }
                s.push_str(&format!(
                    "{},{},{}\n",
                    r.hasse,
                    r.slopes.join(" "),
                    r.equal
                ));
            }
            s.push_str(&format!(
                "# count={} generic={} nongeneric={}\n",
                rows.len(),
                generic,
                nongeneric.len()
            ));
            s
        }
        _ => bail!("sweep supports json and csv output"),
    };
    emit(args.out.as_ref(), &text)?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<i32> {
    let cfg = Config::load(args.config.as_ref())?;
    let budget = resolve_budget(args.budget, &cfg)?;
    let statuses = match args.criterion {
        Some(id) => {
            if !(1..=acceptance::COUNT).contains(&id) {
                bail!("criterion ids are 1..={}", acceptance::COUNT);
            }
            vec![acceptance::run(id, budget)]
        }
        None => acceptance::run_all(budget),
    };
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&serde_json::Value::Array(
            statuses.iter().map(|s| s.to_json()).collect(),
        ))?,
        Format::Text => {
            let mut s = String::new();
            for status in &statuses {
                s.push_str(&status.line());
                s.push('\n');
            }
            s
        }
        _ => bail!("verify supports text and json output"),
    };
    emit(args.out.as_ref(), &text)?;
    let failed = statuses
        .iter()
        .any(|s| matches!(s.outcome, acceptance::Outcome::Failed));
    Ok(if failed { 1 } else { 0 })
}
