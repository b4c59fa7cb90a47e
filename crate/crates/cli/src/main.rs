//! `vnepkit`: generate gadgets, solve, validate, emit IP models, decode and
//! crosscheck from the shell.
//!
//! Exit codes: 0 success or feasible, 1 definitive negative answer
//! (infeasible, unsatisfiable, disagreement), 2 usage or input error,
//! 3 resource limit. Machine reports are JSON on stdout.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use vnepkit::cnf::parse_dimacs;
use vnepkit::crosscheck::{check_formula, random_formulas, CaseReport};
use vnepkit::format::{instance_from_json, instance_to_json, mapping_from_json, mapping_to_json, mapping_to_value};
use vnepkit::rational::{format_rational, parse_rational};
use vnepkit::reductions::{
    decode_mapping, instantiate_gadget, normalize, GadgetApprox, GadgetArtifacts, GadgetOptions,
    GadgetVariant, Normalized,
};
use vnepkit::sat::evaluate;
use vnepkit::solver::emit_ip;
use vnepkit::{
    solve_decision, verify_certificate, ApproxFactors, CnfFormula, Rational, SolveLimits,
    SolveStatus, VnepInstance,
};

const OK: u8 = 0;
const NEGATIVE: u8 = 1;
const INPUT_ERROR: u8 = 2;
const RESOURCE_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(name = "vnepkit", version, about = "Virtual network embedding toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the gadget instance of a DIMACS formula.
    Generate(GenerateArgs),
    /// Decide feasibility of an instance.
    Solve(SolveArgs),
    /// Check a mapping against an instance and list every violation.
    Validate(ValidateArgs),
    /// Write the integer program of an instance in LP format.
    EmitIp(EmitIpArgs),
    /// Recover a truth assignment from a gadget mapping.
    Decode(DecodeArgs),
    /// Compare the SAT oracle with the solver on random gadgets.
    Crosscheck(CrosscheckArgs),
    /// Split a formula into variable-disjoint components.
    Normalize(NormalizeArgs),
}

#[derive(Args)]
struct FactorArgs {
    /// Node capacity factor.
    #[arg(long, value_parser = rational_arg)]
    alpha: Option<Rational>,
    /// Edge capacity factor.
    #[arg(long, value_parser = rational_arg)]
    beta: Option<Rational>,
    /// Latency factor.
    #[arg(long, value_parser = rational_arg)]
    gamma: Option<Rational>,
}

impl FactorArgs {
    fn given(&self) -> bool {
        self.alpha.is_some() || self.beta.is_some() || self.gamma.is_some()
    }

    fn factors(&self) -> Result<Option<ApproxFactors>> {
        if !self.given() {
            return Ok(None);
        }
        let one = Rational::from_integer(1);
        let f = ApproxFactors::new(self.alpha.unwrap_or(one), self.beta.unwrap_or(one), self.gamma.unwrap_or(one))?;
        Ok(Some(f))
    }
}

#[derive(Args)]
struct LimitArgs {
    /// Search node budget.
    #[arg(long, default_value_t = SolveLimits::DEFAULT_MAX_SEARCH_NODES)]
    max_nodes: u64,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    max_time: Option<f64>,
}

impl LimitArgs {
    fn limits(&self) -> Result<SolveLimits> {
        let max_time = match self.max_time {
            Some(t) if !(t.is_finite() && t >= 0.0) => bail!("--max-time must be a non-negative number of seconds"),
            Some(t) => Some(Duration::from_secs_f64(t)),
            None => None,
        };
        Ok(SolveLimits {
            max_search_nodes: Some(self.max_nodes),
            max_time,
        })
    }
}

#[derive(Args)]
struct GadgetArgs {
    /// Gadget variant: ve, en, vr, nr or nl.
    #[arg(long, value_parser = variant_arg)]
    variant: GadgetVariant,
    /// Build the node-capacity hardness gadget with this epsilon (ve, vr).
    #[arg(long, value_parser = rational_arg, conflicts_with = "gamma_eps")]
    alpha_eps: Option<Rational>,
    /// Build the latency hardness gadget with this epsilon (nl).
    #[arg(long, value_parser = rational_arg)]
    gamma_eps: Option<Rational>,
    /// Override the demand offset lambda.
    #[arg(long, value_parser = rational_arg)]
    lambda: Option<Rational>,
}

impl GadgetArgs {
    fn options(&self) -> GadgetOptions {
        GadgetOptions {
            approx: self
                .alpha_eps
                .map(GadgetApprox::AlphaEps)
                .or(self.gamma_eps.map(GadgetApprox::Gamma)),
            lambda: self.lambda,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// DIMACS CNF file.
    cnf: PathBuf,
    #[command(flatten)]
    gadget: GadgetArgs,
    /// Instance output path; the registry goes next to it as `<stem>.registry.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file.
    instance: PathBuf,
    #[command(flatten)]
    factors: FactorArgs,
    /// Take the approximation factors recorded in a gadget registry.
    #[arg(long, conflicts_with_all = ["alpha", "beta", "gamma"])]
    registry: Option<PathBuf>,
    #[command(flatten)]
    limits: LimitArgs,
    /// Write the mapping here when feasible.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Instance JSON file.
    instance: PathBuf,
    /// Mapping JSON file.
    mapping: PathBuf,
    #[command(flatten)]
    factors: FactorArgs,
}

#[derive(Args)]
struct EmitIpArgs {
    /// Instance JSON file.
    instance: PathBuf,
    /// LP output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    /// Instance JSON file.
    instance: PathBuf,
    /// Registry side-file written by `generate`.
    registry: PathBuf,
    /// Mapping JSON file.
    mapping: PathBuf,
}

#[derive(Args)]
struct CrosscheckArgs {
    /// Variables per formula.
    #[arg(short = 'n', long, default_value_t = 5)]
    num_vars: u32,
    /// Clauses per formula.
    #[arg(short = 'm', long, default_value_t = 5)]
    num_clauses: usize,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated variant list.
    #[arg(long, value_delimiter = ',', value_parser = variant_arg, default_value = "ve,en,vr,nr,nl")]
    variants: Vec<GadgetVariant>,
    /// Use the node-capacity hardness gadget (ve and vr only).
    #[arg(long, value_parser = rational_arg, conflicts_with = "gamma_eps")]
    alpha_eps: Option<Rational>,
    /// Use the latency hardness gadget (nl only).
    #[arg(long, value_parser = rational_arg)]
    gamma_eps: Option<Rational>,
    #[command(flatten)]
    limits: LimitArgs,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct NormalizeArgs {
    /// DIMACS CNF file.
    cnf: PathBuf,
    /// Write each component as `<dir>/component_<k>.cnf`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn variant_arg(s: &str) -> Result<GadgetVariant, String> {
    s.parse::<GadgetVariant>().map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_instance(path: &Path) -> Result<VnepInstance> {
    instance_from_json(&read(path)?).with_context(|| format!("parsing instance {}", path.display()))
}

fn load_formula(path: &Path) -> Result<CnfFormula> {
    parse_dimacs(&read(path)?).with_context(|| format!("parsing DIMACS {}", path.display()))
}

/// Writes to stdout, ignoring a closed pipe.
fn emit_stdout(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print(report: &Value) {
    emit_stdout(&format!("{}\n", serde_json::to_string_pretty(report).expect("reports serialize")));
}

fn registry_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.registry.json"))
}

fn clause_lists(phi: &CnfFormula) -> Vec<Vec<i32>> {
    phi.clauses()
        .iter()
        .map(|c| c.literals().iter().map(|l| l.to_dimacs()).collect())
        .collect()
}

fn generate(args: &GenerateArgs) -> Result<u8> {
    let phi = load_formula(&args.cnf)?;
    if let Normalized::Decomposed(parts) = normalize(&phi) {
        print(&json!({
            "error": "decomposable formula; generate each component separately",
            "components": parts.iter().map(|p| p.formula().to_dimacs()).collect::<Vec<_>>(),
        }));
        eprintln!("error: the formula splits into {} variable-disjoint components (see `vnepkit normalize`)", parts.len());
        return Ok(INPUT_ERROR);
    }
    let g = instantiate_gadget(&phi, args.gadget.variant, args.gadget.options())?;
    write(&args.out, &instance_to_json(&g.instance))?;
    let reg_path = registry_path(&args.out);
    write(&reg_path, &g.registry_json())?;
    let reg = g.registry();
    print(&json!({
        "variant": args.gadget.variant.short_name(),
        "instance": args.out,
        "registry": reg_path,
        "substrate_nodes": g.instance.substrate().node_count(),
        "substrate_edges": g.instance.substrate().edge_count(),
        "request_nodes": g.instance.request().node_count(),
        "request_edges": g.instance.request().edge_count(),
        "lambda": reg.lambda,
        "epsilon": reg.epsilon,
        "factors": reg.factors,
    }));
    Ok(OK)
}

fn solve(args: &SolveArgs) -> Result<u8> {
    let instance = load_instance(&args.instance)?;
    let factors = match &args.registry {
        Some(path) => GadgetArtifacts::from_registry(instance.clone(), &read(path)?)?.params.factors,
        None => args.factors.factors()?,
    };
    let result = solve_decision(&instance, factors.as_ref(), args.limits.limits()?);
    log::info!("{} after {} search nodes", result.status.label(), result.stats.nodes_explored);
    let mut report = json!({
        "status": result.status.label(),
        "factors": factors,
        "stats": result.stats,
    });
    let code = match &result.status {
        SolveStatus::Feasible(m) => {
            match &args.out {
                Some(path) => {
                    write(path, &mapping_to_json(m))?;
                    report["mapping_path"] = json!(path);
                }
                None => report["mapping"] = mapping_to_value(m),
            }
            OK
        }
        SolveStatus::Infeasible => NEGATIVE,
        SolveStatus::ResourceLimit => RESOURCE_LIMIT,
    };
    print(&report);
    Ok(code)
}

fn validate(args: &ValidateArgs) -> Result<u8> {
    let instance = load_instance(&args.instance)?;
    let m = mapping_from_json(&read(&args.mapping)?, instance.request())
        .with_context(|| format!("parsing mapping {}", args.mapping.display()))?;
    let factors = args.factors.factors()?;
    let report = verify_certificate(&instance, &m, factors.as_ref())?;
    print(&json!({
        "ok": report.is_ok(),
        "valid": report.validity_violations().next().is_none(),
        "factors": factors,
        "violations": report.violations,
        "messages": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
    }));
    Ok(if report.is_ok() { OK } else { NEGATIVE })
}

fn emit(args: &EmitIpArgs) -> Result<u8> {
    let lp = emit_ip(&load_instance(&args.instance)?);
    match &args.out {
        Some(path) => write(path, &lp)?,
        None => emit_stdout(&lp),
    }
    Ok(OK)
}

fn decode(args: &DecodeArgs) -> Result<u8> {
    let instance = load_instance(&args.instance)?;
    let g = GadgetArtifacts::from_registry(instance, &read(&args.registry)?)?;
    let m = mapping_from_json(&read(&args.mapping)?, g.instance.request())
        .with_context(|| format!("parsing mapping {}", args.mapping.display()))?;
    let assignment = decode_mapping(&g, &m)?;
    emit_stdout(&format!("{}\n", assignment.to_dimacs_line()));
    Ok(if evaluate(g.formula.formula(), &assignment)? { OK } else { NEGATIVE })
}

fn crosscheck(args: &CrosscheckArgs) -> Result<u8> {
    if args.num_vars > 8 {
        log::warn!("N={} makes the brute-force oracle slow; N <= 8 is recommended", args.num_vars);
    }
    let options = GadgetOptions {
        approx: args
            .alpha_eps
            .map(GadgetApprox::AlphaEps)
            .or(args.gamma_eps.map(GadgetApprox::Gamma)),
        lambda: None,
    };
    let limits = args.limits.limits()?;
    let formulas = random_formulas(args.num_vars, args.num_clauses, args.samples, args.seed)?;
    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let chunk = formulas.len().div_ceil(threads).max(1);
    let results: Vec<Result<Vec<CaseReport>>> = std::thread::scope(|s| {
        let handles: Vec<_> = formulas
            .chunks(chunk)
            .enumerate()
            .map(|(c, part)| {
                s.spawn(move || -> Result<Vec<CaseReport>> {
                    let mut out = Vec::new();
                    for (k, phi) in part.iter().enumerate() {
                        out.extend(check_formula(c * chunk + k, phi, &args.variants, options, limits)?);
                    }
                    Ok(out)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut cases = Vec::new();
    for r in results {
        cases.extend(r?);
    }
    cases.sort_by_key(|c| c.index);

    let mut matrix: BTreeMap<&str, BTreeMap<&str, usize>> = args
        .variants
        .iter()
        .map(|v| (v.short_name(), BTreeMap::from([("agree", 0), ("disagree", 0), ("resource_limit", 0)])))
        .collect();
    let mut disagreements = Vec::new();
    for case in &cases {
        let row = matrix.get_mut(case.variant.short_name()).expect("variant row");
        let cell = if case.gadget_sat.is_none() {
            "resource_limit"
        } else if case.agrees() {
            "agree"
        } else {
            disagreements.push(case);
            "disagree"
        };
        *row.get_mut(cell).expect("cell") += 1;
    }
    let limited = cases.iter().filter(|c| c.gadget_sat.is_none()).count();
    let satisfiable = cases.iter().filter(|c| c.oracle_sat).count() / args.variants.len().max(1);
    print(&json!({
        "num_vars": args.num_vars,
        "num_clauses": args.num_clauses,
        "samples": args.samples,
        "seed": args.seed,
        "epsilon": args.alpha_eps.or(args.gamma_eps).map(|e| format_rational(&e)),
        "variants": args.variants.iter().map(|v| v.short_name()).collect::<Vec<_>>(),
        "satisfiable_formulas": satisfiable,
        "cases": cases.len(),
        "matrix": matrix,
        "disagreements": disagreements,
    }));
    Ok(if !disagreements.is_empty() {
        NEGATIVE
    } else if limited > 0 {
        RESOURCE_LIMIT
    } else {
        OK
    })
}

fn normalize_cmd(args: &NormalizeArgs) -> Result<u8> {
    let phi = load_formula(&args.cnf)?;
    let (ordered, parts) = match normalize(&phi) {
        Normalized::Ordered(o) => (true, vec![o]),
        Normalized::Decomposed(parts) => (false, parts),
    };
    let mut files = Vec::new();
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (k, p) in parts.iter().enumerate() {
            let path = dir.join(format!("component_{}.cnf", k + 1));
            write(&path, &p.formula().to_dimacs())?;
            files.push(path);
        }
    }
    print(&json!({
        "ordered": ordered,
        "components": parts.iter().map(|p| json!({
            "vars": p.formula().occurring_vars(),
            "clauses": clause_lists(p.formula()),
        })).collect::<Vec<_>>(),
        "files": files,
    }));
    Ok(OK)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Validate(a) => validate(a),
        Command::EmitIp(a) => emit(a),
        Command::Decode(a) => decode(a),
        Command::Crosscheck(a) => crosscheck(a),
        Command::Normalize(a) => normalize_cmd(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("VNEPKIT_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
