//! Command line front end: loads piecewise-constant functions from JSON,
//! computes norms and scale curves, runs the decomposition-norm sandwich
//! and the property verification suites, and emits JSON or CSV.
//!
//! Exit codes: 0 success, 1 domain or precondition failure (including a
//! failed verification run), 2 usage or parse errors. All stdout output
//! is byte-stable for fixed inputs, flags and seed; timing goes to
//! stderr.

use clap::{Args, Parser, Subcommand, ValueEnum};
use fofana_core::approx::{mollifier_convergence, MollifierKind};
use fofana_core::exponents::{Exponent, Exponents};
use fofana_core::fofana::{auto_grid, fofana_norm, phi_curve, GridConfig, ScaleGrid};
use fofana_core::hspace::{hnorm_sandwich, HDecomposition, PartitionStrategy, SandwichConfig};
use fofana_core::norms::{amalgam_norm, lebesgue_norm, morrey_norm, weak_norm, Witness};
use fofana_core::rational::{parse_rat, rat_int};
use fofana_core::real::Real;
use fofana_core::verify::{run_suite, Suite, VerifyConfig};
use fofana_core::{Aabb, SimpleFunction};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fofana",
    version,
    about = "Norms and decomposition certificates for piecewise-constant functions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute one norm of a function and print JSON
    Norm(NormArgs),
    /// Tabulate the scale-weighted amalgam curve as CSV
    Curve(CurveArgs),
    /// Two-sided sandwich for the decomposition norm, as JSON
    Hnorm(HnormArgs),
    /// Run the randomized property suites
    Verify(VerifyArgs),
    /// Mollifier convergence table as CSV
    Mollify(MollifyArgs),
}

#[derive(Args)]
struct NormArgs {
    /// Input function JSON file
    input: PathBuf,
    #[arg(long, value_enum)]
    kind: NormKind,
    /// Cube exponent, "inf" allowed
    #[arg(long)]
    q: Option<String>,
    /// Lattice exponent, "inf" allowed
    #[arg(long)]
    p: Option<String>,
    /// Scale exponent between q and p
    #[arg(long)]
    alpha: Option<String>,
    /// Morrey parameter, strictly between 0 and the dimension
    #[arg(long)]
    lambda: Option<String>,
    /// Lattice scale for the amalgam norm
    #[arg(long, default_value = "1")]
    rho: String,
    /// Local search iterations for sup-norms
    #[arg(long, default_value_t = 40)]
    refine: u32,
    #[arg(long, default_value_t = 64)]
    points_per_decade: u32,
}

#[derive(ValueEnum, Clone, Copy)]
enum NormKind {
    Lebesgue,
    Weak,
    Amalgam,
    Morrey,
    Fofana,
}

#[derive(Args)]
struct CurveArgs {
    input: PathBuf,
    #[arg(long)]
    q: String,
    #[arg(long)]
    p: String,
    #[arg(long)]
    alpha: String,
    #[arg(long, default_value = "1/4")]
    rho_min: String,
    #[arg(long, default_value = "4")]
    rho_max: String,
    /// Approximate number of geometric grid points over the range
    #[arg(long, default_value_t = 33)]
    points: u32,
}

#[derive(Args)]
struct HnormArgs {
    input: PathBuf,
    #[arg(long)]
    q: String,
    #[arg(long)]
    p: String,
    #[arg(long)]
    alpha: String,
    /// Comma list from identity, dyadic, levels
    #[arg(long, default_value = "identity,dyadic,levels")]
    partitions: String,
    #[arg(long, default_value_t = 64)]
    points_per_decade: u32,
    #[arg(long, default_value_t = 16)]
    refine: u32,
    /// Seed for the witness family
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// all, core, fofana, hspace or approx
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Base case count per property
    #[arg(long, default_value_t = 200)]
    cases: u64,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct MollifyArgs {
    input: PathBuf,
    /// box or triangle
    #[arg(long, default_value = "box")]
    phi: String,
    /// Comma list of widths, e.g. "1/2,1/4,1/8"
    #[arg(long)]
    eps_list: String,
    /// Sampling step
    #[arg(long, default_value = "1e-3")]
    h: String,
    #[arg(long)]
    q: String,
    #[arg(long)]
    p: String,
    #[arg(long)]
    alpha: String,
}

// exit-code aware error: 2 for usage and input-schema problems, 1 for
// domain preconditions hit during computation

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

type CliResult<T> = Result<T, Failure>;

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure {
        code: 2,
        msg: e.to_string(),
    }
}

fn domain<E: std::fmt::Display>(e: E) -> Failure {
    Failure {
        code: 1,
        msg: e.to_string(),
    }
}

// FunctionSpec JSON schema: {"dimension": d, "terms": [{"coef": c,
// "box": [["lo","hi"], ...]}]} with rational or decimal strings for all
// coordinates; coefficients may be plain numbers

#[derive(Serialize, Deserialize)]
struct FunctionSpec {
    dimension: usize,
    terms: Vec<TermSpec>,
}

#[derive(Serialize, Deserialize)]
struct TermSpec {
    coef: CoefSpec,
    #[serde(rename = "box")]
    region: Vec<[String; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoefSpec {
    Number(f64),
    Text(String),
}

impl FunctionSpec {
    fn to_simple(&self) -> CliResult<SimpleFunction<f64>> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let coef = match &t.coef {
                CoefSpec::Number(x) => *x,
                CoefSpec::Text(s) => f64::from_rat(&parse_rat(s).map_err(usage)?),
            };
            if t.region.len() != self.dimension {
                return Err(usage(format!(
                    "box has {} axes, function dimension is {}",
                    t.region.len(),
                    self.dimension
                )));
            }
            let mut lo = Vec::with_capacity(self.dimension);
            let mut hi = Vec::with_capacity(self.dimension);
            for [a, b] in &t.region {
                lo.push(parse_rat(a).map_err(usage)?);
                hi.push(parse_rat(b).map_err(usage)?);
            }
            terms.push((coef, Aabb::new(lo, hi).map_err(usage)?));
        }
        SimpleFunction::from_terms(self.dimension, terms).map_err(usage)
    }

    fn from_simple(f: &SimpleFunction<f64>) -> FunctionSpec {
        FunctionSpec {
            dimension: f.dim(),
            terms: f
                .terms()
                .iter()
                .map(|t| TermSpec {
                    coef: CoefSpec::Number(t.value),
                    region: (0..f.dim())
                        .map(|j| {
                            [
                                t.region.lo()[j].to_string(),
                                t.region.hi()[j].to_string(),
                            ]
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct NormOut {
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_rho: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_center: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_radius: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    evaluated: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_points: Option<usize>,
}

impl NormOut {
    fn plain(value: f64) -> NormOut {
        NormOut {
            value,
            witness_rho: None,
            witness_center: None,
            witness_radius: None,
            exact: None,
            evaluated: None,
            grid_points: None,
        }
    }
}

#[derive(Serialize)]
struct DecTermOut {
    coef: f64,
    rho: String,
    atom: FunctionSpec,
}

#[derive(Serialize)]
struct DecompositionOut {
    q: String,
    p: String,
    alpha: String,
    dimension: usize,
    coef_abs_sum: f64,
    terms: Vec<DecTermOut>,
}

impl DecompositionOut {
    fn from_dec(dec: &HDecomposition<f64>) -> DecompositionOut {
        DecompositionOut {
            q: dec.exps().q().to_string(),
            p: dec.exps().p().to_string(),
            alpha: dec.exps().alpha().to_string(),
            dimension: dec.dim(),
            coef_abs_sum: dec.coef_abs_sum(),
            terms: dec
                .terms()
                .iter()
                .map(|t| DecTermOut {
                    coef: t.coef,
                    rho: t.rho.to_string(),
                    atom: FunctionSpec::from_simple(&t.atom),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct HnormOut {
    lower: f64,
    upper: f64,
    certified_lower: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    best_witness: Option<FunctionSpec>,
    decomposition: DecompositionOut,
}

fn load_function(path: &PathBuf) -> CliResult<SimpleFunction<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let spec: FunctionSpec = serde_json::from_str(&text)
        .map_err(|e| usage(format!("invalid function JSON: {e}")))?;
    spec.to_simple()
}

fn parse_exponent(flag: &str, v: &Option<String>) -> CliResult<Exponent> {
    let s = v
        .as_ref()
        .ok_or_else(|| usage(format!("--{flag} is required for this kind")))?;
    Exponent::parse(s).map_err(usage)
}

fn parse_exponent_str(s: &str) -> CliResult<Exponent> {
    Exponent::parse(s).map_err(usage)
}

/// Up to 15 significant digits, trailing zeros trimmed, plain decimal
/// for moderate magnitudes.
fn sig15(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let formatted = format!("{:.14e}", v);
    let (mant, exp) = formatted.split_once('e').expect("e-notation");
    let exp: i32 = exp.parse().expect("exponent");
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let sign = if neg { "-" } else { "" };
    if exp >= 0 && exp < 15 {
        let int_len = (exp + 1) as usize;
        if digits.len() <= int_len {
            format!("{sign}{}{}", digits, "0".repeat(int_len - digits.len()))
        } else {
            format!("{sign}{}.{}", &digits[..int_len], &digits[int_len..])
        }
    } else if exp < 0 && exp >= -5 {
        format!("{sign}0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else if digits.len() == 1 {
        format!("{sign}{}e{}", digits, exp)
    } else {
        format!("{sign}{}.{}e{}", &digits[..1], &digits[1..], exp)
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable output")
    );
}

fn cmd_norm(args: &NormArgs) -> CliResult<()> {
    let f = load_function(&args.input)?;
    let out = match args.kind {
        NormKind::Lebesgue => {
            let q = parse_exponent("q", &args.q)?;
            NormOut::plain(lebesgue_norm(&f, &q))
        }
        NormKind::Weak => {
            let alpha = parse_exponent("alpha", &args.alpha)?;
            NormOut::plain(weak_norm(&f, &alpha).map_err(domain)?)
        }
        NormKind::Amalgam => {
            let q = parse_exponent("q", &args.q)?;
            let p = parse_exponent("p", &args.p)?;
            let rho = parse_rat(&args.rho).map_err(usage)?;
            NormOut::plain(amalgam_norm(&f, &q, &p, &rho).map_err(domain)?)
        }
        NormKind::Morrey => {
            let q = parse_exponent("q", &args.q)?;
            let lambda = parse_rat(
                args.lambda
                    .as_ref()
                    .ok_or_else(|| usage("--lambda is required for the morrey kind"))?,
            )
            .map_err(usage)?;
            if f.is_zero() {
                NormOut {
                    exact: Some(true),
                    ..NormOut::plain(0.0)
                }
            } else {
                let est = morrey_norm(&f, &q, &lambda, args.refine).map_err(domain)?;
                let (center, radius) = match &est.witness {
                    Witness::Window { center, radius } => (
                        center.iter().map(|c| c.to_string()).collect(),
                        radius.to_string(),
                    ),
                    Witness::Scale(r) => (vec![], r.to_string()),
                };
                NormOut {
                    value: est.value,
                    witness_rho: None,
                    witness_center: Some(center),
                    witness_radius: Some(radius),
                    exact: Some(est.exact),
                    evaluated: Some(est.evaluated),
                    grid_points: None,
                }
            }
        }
        NormKind::Fofana => {
            let q = parse_exponent("q", &args.q)?;
            let p = parse_exponent("p", &args.p)?;
            let alpha = parse_exponent("alpha", &args.alpha)?;
            let exps = Exponents::new(q, p, alpha);
            if f.is_zero() {
                NormOut {
                    witness_rho: Some("1".into()),
                    exact: Some(true),
                    ..NormOut::plain(0.0)
                }
            } else {
                let cfg = GridConfig {
                    points_per_decade: args.points_per_decade,
                    ..GridConfig::default()
                };
                let grid = auto_grid(&f, &exps, &cfg).map_err(domain)?;
                let est = fofana_norm(&f, &exps, &grid, args.refine).map_err(domain)?;
                let rho = match &est.witness {
                    Witness::Scale(r) => r.to_string(),
                    Witness::Window { radius, .. } => radius.to_string(),
                };
                NormOut {
                    value: est.value,
                    witness_rho: Some(rho),
                    witness_center: None,
                    witness_radius: None,
                    exact: Some(est.exact),
                    evaluated: Some(est.evaluated),
                    grid_points: Some(grid.points().len()),
                }
            }
        }
    };
    print_json(&out);
    Ok(())
}

fn cmd_curve(args: &CurveArgs) -> CliResult<()> {
    let f = load_function(&args.input)?;
    let q = parse_exponent_str(&args.q)?;
    let p = parse_exponent_str(&args.p)?;
    let alpha = parse_exponent_str(&args.alpha)?;
    let exps = Exponents::new(q, p, alpha);
    let rho_min = parse_rat(&args.rho_min).map_err(usage)?;
    let rho_max = parse_rat(&args.rho_max).map_err(usage)?;

    let mut mandatory = vec![rat_int(1)];
    if !f.is_zero() {
        if let Ok(auto) = auto_grid(&f, &exps, &GridConfig::default()) {
            mandatory.extend(
                auto.mandatory()
                    .iter()
                    .filter(|r| **r >= rho_min && **r <= rho_max)
                    .cloned(),
            );
        }
    }
    let span = f64::from_rat(&(&rho_max / &rho_min));
    let decades = span.log10().max(0.1);
    let ppd = ((args.points as f64 / decades).ceil() as u32).clamp(4, 4096);
    let grid = ScaleGrid::new(rho_min, rho_max, ppd, mandatory).map_err(usage)?;
    let curve = phi_curve(&f, &exps, &grid).map_err(domain)?;

    let mut out = String::from("rho,amalgam,phi\n");
    for pt in &curve {
        out.push_str(&format!(
            "{},{},{}\n",
            sig15(f64::from_rat(&pt.rho)),
            sig15(pt.amalgam),
            sig15(pt.phi)
        ));
    }
    print!("{out}");
    Ok(())
}

fn parse_partitions(s: &str) -> CliResult<Vec<PartitionStrategy>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(match part.to_ascii_lowercase().as_str() {
            "identity" => PartitionStrategy::Identity,
            "dyadic" | "dyadic-blocks" => PartitionStrategy::DyadicBlocks,
            "levels" | "level-sets" => PartitionStrategy::LevelSets,
            other => return Err(usage(format!("unknown partition strategy '{other}'"))),
        });
    }
    if out.is_empty() {
        return Err(usage("at least one partition strategy is required"));
    }
    Ok(out)
}

fn cmd_hnorm(args: &HnormArgs) -> CliResult<()> {
    let f = load_function(&args.input)?;
    let exps = Exponents::new(
        parse_exponent_str(&args.q)?,
        parse_exponent_str(&args.p)?,
        parse_exponent_str(&args.alpha)?,
    );
    let cfg = SandwichConfig {
        grid: GridConfig {
            points_per_decade: args.points_per_decade,
            ..GridConfig::default()
        },
        strategies: parse_partitions(&args.partitions)?,
        refine_iters: args.refine,
        seed: args.seed,
    };
    let sw = hnorm_sandwich(&f, &exps, &cfg).map_err(domain)?;
    let out = HnormOut {
        lower: sw.lower,
        upper: sw.upper,
        certified_lower: sw.lower_certified,
        best_witness: sw.best_witness.as_ref().map(FunctionSpec::from_simple),
        decomposition: DecompositionOut::from_dec(&sw.best_decomposition),
    };
    print_json(&out);
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<ExitCode> {
    let suite = Suite::parse(&args.suite).map_err(usage)?;
    let cfg = VerifyConfig {
        seed: args.seed,
        cases: args.cases,
        inject_fault: args.inject_fault,
    };
    let report = run_suite(suite, &cfg);
    print!("{}", report.render());
    eprintln!("wall time: {:.2}s", report.wall_seconds);
    Ok(if report.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_mollify(args: &MollifyArgs) -> CliResult<()> {
    let f = load_function(&args.input)?;
    let exps = Exponents::new(
        parse_exponent_str(&args.q)?,
        parse_exponent_str(&args.p)?,
        parse_exponent_str(&args.alpha)?,
    );
    let kind = MollifierKind::parse(&args.phi).map_err(usage)?;
    let h = f64::from_rat(&parse_rat(&args.h).map_err(usage)?);
    let mut eps = Vec::new();
    for part in args.eps_list.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        eps.push(f64::from_rat(&parse_rat(part).map_err(usage)?));
    }
    if eps.is_empty() {
        return Err(usage("--eps-list must contain at least one width"));
    }
    let rows = mollifier_convergence(&f, &exps, kind, &eps, h).map_err(domain)?;
    let mut out = String::from("eps,err\n");
    for (e, err) in &rows {
        out.push_str(&format!("{},{}\n", sig15(*e), sig15(*err)));
    }
    print!("{out}");
    Ok(())
}

fn init_threads() {
    if let Ok(v) = std::env::var("FOFANA_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Norm(a) => cmd_norm(a).map(|()| ExitCode::SUCCESS),
        Cmd::Curve(a) => cmd_curve(a).map(|()| ExitCode::SUCCESS),
        Cmd::Hnorm(a) => cmd_hnorm(a).map(|()| ExitCode::SUCCESS),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Mollify(a) => cmd_mollify(a).map(|()| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(sig15(0.0), "0");
        assert_eq!(sig15(1.0), "1");
        assert_eq!(sig15(2.0), "2");
        assert_eq!(sig15(-1.5), "-1.5");
        assert_eq!(sig15(0.5f64.sqrt()), "0.707106781186548");
        assert_eq!(sig15(1e-3), "0.001");
        assert_eq!(sig15(1.23e20), "1.23e20");
        assert_eq!(sig15(3.0e-9), "3e-9");
        assert_eq!(sig15(123456.75), "123456.75");
    }

    #[test]
    fn function_spec_round_trips() {
        let spec: FunctionSpec = serde_json::from_str(
            r#"{"dimension":1,"terms":[{"coef":"3/2","box":[["0","2"]]},{"coef":-0.5,"box":[["5/2","3"]]}]}"#,
        )
        .unwrap();
        let f = spec.to_simple().unwrap();
        assert_eq!(f.terms().len(), 2);
        let back = FunctionSpec::from_simple(&f);
        let f2 = back.to_simple().unwrap();
        assert!(f.sup_abs_diff(&f2).unwrap() == 0.0);
    }

    #[test]
    fn partition_lists_parse() {
        assert_eq!(parse_partitions("identity").unwrap().len(), 1);
        assert_eq!(
            parse_partitions("identity,dyadic,levels").unwrap().len(),
            3
        );
        assert!(parse_partitions("bogus").is_err());
        assert!(parse_partitions("").is_err());
    }
}
