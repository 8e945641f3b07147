//! `uvleak`: validate, simulate, transform, and verify circuits against
//! cycle-level leakage observers.
//!
//! Exit codes: 0 success / Satisfied / Holds / Pass, 1 violation or failed
//! proof, 2 usage or input error, 3 resource limit.

use std::collections::BTreeSet;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use uvleak_core::engine::{self, VerificationProblem};
use uvleak_core::ir::{self, Circuit, Expr, Value};
use uvleak_core::logic::{DomainBounds, LogicError};
use uvleak_core::sim::{Sim, Valuation};
use uvleak_core::textio::{self, SourceFile};
use uvleak_core::transform;

mod dimacs;

#[derive(Parser)]
#[command(name = "uvleak", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Args)]
struct Common {
    /// Output format: human-readable or stable key=value lines.
    #[arg(long, value_enum, default_value = "human", global = true)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    /// Fixes enumeration order for reproducibility (all orders are already
    /// deterministic; accepted for interface stability).
    #[arg(long, global = true, default_value = "0")]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Parse circuit files and report well-formedness diagnostics.
    Validate {
        files: Vec<std::path::PathBuf>,
        #[arg(long)]
        circuit: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a circuit and dump its output trace.
    Simulate {
        files: Vec<std::path::PathBuf>,
        #[arg(long)]
        circuit: String,
        /// Initial values as a conjunction of equalities, e.g. "pc==0&&reg==0".
        #[arg(long)]
        init: Option<String>,
        /// Memory contents, e.g. "m:0,1,2,...,10" (unlisted cells are 0).
        #[arg(long)]
        mem: Vec<String>,
        #[arg(long)]
        cycles: u64,
        /// Keep only cycles whose state satisfies this predicate.
        #[arg(long)]
        filter: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Compose a monitor onto a circuit and print the result.
    Compose {
        files: Vec<std::path::PathBuf>,
        #[arg(long)]
        monitor: String,
        /// Base circuit; defaults to the monitor's declared base.
        #[arg(long)]
        circuit: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the two-copy product of a circuit.
    Product {
        files: Vec<std::path::PathBuf>,
        #[arg(long)]
        circuit: String,
        #[command(flatten)]
        common: Common,
    },
    /// Print the stuttering product synchronized on a retirement predicate.
    Stutter {
        files: Vec<std::path::PathBuf>,
        #[arg(long)]
        circuit: String,
        #[arg(long)]
        retire: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run invariant learning only and list the surviving invariants.
    LearnInv(VerifyArgs),
    /// Learn invariants over the stuttering product and check attacker
    /// equality.
    Verify(VerifyArgs),
    /// Contract-level check over the four-copy product with a reference
    /// model.
    #[command(name = "verify-4way")]
    Verify4way(VerifyArgs),
    /// Bounded reference-compliance testing over an initial-state domain.
    CheckIsa {
        files: Vec<std::path::PathBuf>,
        #[arg(long = "impl")]
        impl_name: String,
        #[arg(long)]
        arch: String,
        #[arg(long)]
        retire: String,
        #[arg(long, default_value = "16")]
        horizon: u64,
        /// Domain, e.g. "ret=1,res=0..3,m=4x0..3" (unlisted registers are 0).
        #[arg(long)]
        bounds: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustive leakage oracles over an initial-state domain.
    Oracle {
        files: Vec<std::path::PathBuf>,
        #[arg(long, value_enum)]
        kind: OracleKind,
        #[arg(long = "impl")]
        impl_name: String,
        /// Reference model (contract-satisfaction oracle only).
        #[arg(long)]
        arch: Option<String>,
        #[arg(long)]
        contract: String,
        #[arg(long)]
        attacker: String,
        #[arg(long)]
        retire: String,
        #[arg(long)]
        uarch: String,
        #[arg(long, default_value = "16")]
        horizon: u64,
        #[arg(long)]
        bounds: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Decide a DIMACS clause file with the built-in solver.
    SolveCnf { file: std::path::PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    LeakOrder,
    ContractSatisfaction,
}

#[derive(Args)]
struct VerifyArgs {
    files: Vec<std::path::PathBuf>,
    /// Reference model (verify-4way only).
    #[arg(long)]
    arch: Option<String>,
    #[arg(long = "impl")]
    impl_name: String,
    #[arg(long)]
    contract: String,
    #[arg(long)]
    attacker: String,
    #[arg(long)]
    retire: String,
    #[arg(long, default_value = "1")]
    b: u32,
    /// Comma-separated microarchitectural register names.
    #[arg(long)]
    uarch: String,
    /// Extra candidate invariants over the product circuit.
    #[arg(long = "candidate")]
    candidates: Vec<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug)]
struct CliError {
    msg: String,
    code: u8,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> CliError {
        CliError {
            msg: msg.into(),
            code: 2,
        }
    }
}

impl From<textio::ParseError> for CliError {
    fn from(e: textio::ParseError) -> CliError {
        CliError::usage(format!("parse error: {e}"))
    }
}

impl From<engine::EngineError> for CliError {
    fn from(e: engine::EngineError) -> CliError {
        let code = match &e {
            engine::EngineError::Logic(LogicError::ResourceLimit(_)) => 3,
            engine::EngineError::Logic(LogicError::DomainTooLarge(..)) => 3,
            _ => 2,
        };
        CliError {
            msg: e.to_string(),
            code,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("uvleak: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

fn load(files: &[std::path::PathBuf]) -> Result<SourceFile, CliError> {
    if files.is_empty() {
        return Err(CliError::usage("no input files"));
    }
    let mut out = SourceFile::default();
    for f in files {
        let src = std::fs::read_to_string(f)
            .map_err(|e| CliError::usage(format!("{}: {e}", f.display())))?;
        let parsed = textio::parse_file(&src)
            .map_err(|e| CliError::usage(format!("{}: {e}", f.display())))?;
        out.merge(parsed);
    }
    Ok(out)
}

fn circuit<'a>(file: &'a SourceFile, name: &str) -> Result<&'a Circuit, CliError> {
    file.circuit(name)
        .ok_or_else(|| CliError::usage(format!("no circuit named {name}")))
}

fn monitor<'a>(file: &'a SourceFile, name: &str) -> Result<&'a transform::Monitor, CliError> {
    file.monitor(name)
        .ok_or_else(|| CliError::usage(format!("no monitor named {name}")))
}

fn validated(c: &Circuit) -> Result<(), CliError> {
    let diags = ir::validate(c);
    if diags.is_empty() {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "{} does not validate:\n{diags}",
            c.name
        )))
    }
}

fn emit(common: &Common, text: &str) -> Result<(), CliError> {
    match &common.out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display()))),
    }
}

/// Parses "name:v1,v2,...,vn" memory specs, where a literal `...` extends
/// the arithmetic progression of the two preceding values up to the value
/// after it.
fn parse_mem_spec(spec: &str) -> Result<(String, Vec<u64>), CliError> {
    let (name, body) = spec
        .split_once(':')
        .ok_or_else(|| CliError::usage(format!("memory spec {spec:?} needs name:values")))?;
    let mut values: Vec<u64> = Vec::new();
    let mut pending_ellipsis = false;
    for tok in body.split(',') {
        let tok = tok.trim();
        if tok == "..." {
            if values.len() < 2 {
                return Err(CliError::usage("\"...\" needs two preceding values"));
            }
            pending_ellipsis = true;
            continue;
        }
        let v: u64 = tok
            .parse()
            .map_err(|_| CliError::usage(format!("bad memory value {tok:?}")))?;
        if pending_ellipsis {
            let n = values.len();
            let step = values[n - 1] as i128 - values[n - 2] as i128;
            let mut cur = values[n - 1] as i128;
            loop {
                cur += step;
                if (step >= 0 && cur >= v as i128) || (step < 0 && cur <= v as i128) {
                    break;
                }
                values.push(cur as u64);
            }
            pending_ellipsis = false;
        }
        values.push(v);
    }
    if pending_ellipsis {
        return Err(CliError::usage("\"...\" must be followed by a final value"));
    }
    Ok((name.to_string(), values))
}

/// Builds an initial valuation from `--init` equalities and `--mem` specs;
/// unmentioned registers are zero.
fn build_state(
    sim: &Sim,
    c: &Circuit,
    init: Option<&str>,
    mems: &[String],
) -> Result<Valuation, CliError> {
    let mut mu = sim.zeroed();
    if let Some(src) = init {
        let e = textio::parse_expr_over(src, c)?;
        apply_init(&mut mu, &e)?;
    }
    for spec in mems {
        let (name, values) = parse_mem_spec(spec)?;
        for (i, v) in values.iter().enumerate() {
            mu.try_set_cell(&name, i as u64, Value::Num(*v))
                .map_err(CliError::usage)?;
        }
    }
    Ok(mu)
}

fn apply_init(mu: &mut Valuation, e: &Expr) -> Result<(), CliError> {
    match e {
        Expr::Binary(ir::BinOp::And, a, b) => {
            apply_init(mu, a)?;
            apply_init(mu, b)
        }
        Expr::Binary(ir::BinOp::Eq, lhs, rhs) => {
            let Expr::Const(v) = **rhs else {
                return Err(CliError::usage(
                    "--init accepts only name == constant conjunctions",
                ));
            };
            match &**lhs {
                Expr::Ref(name) => mu.try_set(name, v).map_err(CliError::usage),
                Expr::ArrayRead(name, ix) => {
                    let Expr::Const(Value::Num(i)) = **ix else {
                        return Err(CliError::usage("--init array index must be constant"));
                    };
                    mu.try_set_cell(name, i, v).map_err(CliError::usage)
                }
                _ => Err(CliError::usage(
                    "--init accepts only name == constant conjunctions",
                )),
            }
        }
        _ => Err(CliError::usage(
            "--init accepts only name == constant conjunctions",
        )),
    }
}

/// Parses "reg=3,res=0..3,m=4x0..3" domain specs over pinned-zero bounds.
fn parse_bounds(c: &Circuit, spec: Option<&str>) -> Result<DomainBounds, CliError> {
    let mut b = DomainBounds::pinned_zero(c);
    let Some(spec) = spec else { return Ok(b) };
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, val) = part
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("bad bounds item {part:?}")))?;
        let parse_range = |s: &str| -> Result<(u64, u64), CliError> {
            if let Some((lo, hi)) = s.split_once("..") {
                Ok((
                    lo.parse()
                        .map_err(|_| CliError::usage(format!("bad range {s:?}")))?,
                    hi.parse()
                        .map_err(|_| CliError::usage(format!("bad range {s:?}")))?,
                ))
            } else {
                let v: u64 = s
                    .parse()
                    .map_err(|_| CliError::usage(format!("bad value {s:?}")))?;
                Ok((v, v))
            }
        };
        if c.is_array(name) {
            let (cells, range) = val.split_once('x').ok_or_else(|| {
                CliError::usage(format!("array bounds need CELLSxLO..HI: {part:?}"))
            })?;
            let cells: usize = cells
                .parse()
                .map_err(|_| CliError::usage(format!("bad cell count in {part:?}")))?;
            let (lo, hi) = parse_range(range)?;
            b = b.array(name, cells, lo..=hi);
        } else if c.decl(name).is_some() {
            let (lo, hi) = parse_range(val)?;
            b = b.scalar(name, lo..=hi);
        } else {
            return Err(CliError::usage(format!(
                "unknown register {name} in bounds"
            )));
        }
    }
    Ok(b)
}

fn parse_uarch(c: &Circuit, spec: &str) -> Result<BTreeSet<String>, CliError> {
    let set: BTreeSet<String> = spec
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    for r in &set {
        if c.decl(r).is_none() {
            return Err(CliError::usage(format!(
                "unknown microarchitectural register {r}"
            )));
        }
    }
    Ok(set)
}

fn build_problem(file: &SourceFile, a: &VerifyArgs) -> Result<VerificationProblem, CliError> {
    let impl_circuit = circuit(file, &a.impl_name)?.clone();
    validated(&impl_circuit)?;
    let retire = textio::parse_expr_over(&a.retire, &impl_circuit)?;
    Ok(VerificationProblem {
        leakage: monitor(file, &a.contract)?.clone(),
        attacker: monitor(file, &a.attacker)?.clone(),
        retire,
        lookahead: a.b,
        uarch: parse_uarch(&impl_circuit, &a.uarch)?,
        user_candidates: a
            .candidates
            .iter()
            .enumerate()
            .map(|(i, s)| (format!("cli{i}"), s.clone()))
            .collect(),
        impl_circuit,
    })
}

fn report_verdict(common: &Common, report: &engine::VerificationReport) -> Result<u8, CliError> {
    let text = match common.format {
        Format::Machine => report.machine_format(),
        Format::Human => {
            let mut s = format!(
                "result: {}\nlookahead {}, {} invariants learned, {} solver queries ({} base + {} inductive iterations), {:.1?}\n",
                report.verdict.as_str(),
                report.lookahead,
                report.learned.len(),
                report.solver_queries,
                report.iterations_base,
                report.iterations_inductive,
                report.elapsed,
            );
            if let engine::Verdict::NotProved(reason) = &report.verdict {
                s.push_str(&format!("reason: {reason}\n"));
            }
            for ci in &report.learned {
                s.push_str(&format!(
                    "  invariant [{}] {}\n",
                    ci.label(),
                    textio::print_expr(&ci.expr)
                ));
            }
            s
        }
    };
    emit(common, &text)?;
    Ok(match &report.verdict {
        engine::Verdict::Satisfied => 0,
        engine::Verdict::NotProved(reason) if reason.starts_with("resource limit") => 3,
        _ => 1,
    })
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Validate {
            files,
            circuit: name,
            common,
        } => {
            let file = load(&files)?;
            let targets: Vec<&Circuit> = match &name {
                Some(n) => vec![circuit(&file, n)?],
                None => file.circuits.iter().collect(),
            };
            let mut bad = false;
            let mut text = String::new();
            for c in targets {
                let diags = ir::validate(c);
                if diags.is_empty() {
                    text.push_str(&format!("circuit={} result=ok\n", c.name));
                } else {
                    bad = true;
                    text.push_str(&format!("circuit={} result=invalid\n", c.name));
                    text.push_str(&diags.to_string());
                }
            }
            emit(&common, &text)?;
            Ok(if bad { 1 } else { 0 })
        }
        Command::Simulate {
            files,
            circuit: name,
            init,
            mem,
            cycles,
            filter,
            common,
        } => {
            let file = load(&files)?;
            let c = circuit(&file, &name)?;
            validated(c)?;
            let sim = Sim::new(c);
            let mu = build_state(&sim, c, init.as_deref(), &mem)?;
            let dump = match &filter {
                None => sim.trace_prefix(&mu, cycles),
                Some(f) => {
                    let phi = textio::parse_expr_over(f, c)?;
                    sim.filtered_trace_prefix(&mu, &phi, cycles)
                }
            };
            emit(&common, &textio::dump_trace(&dump))?;
            Ok(0)
        }
        Command::Compose {
            files,
            monitor: mname,
            circuit: cname,
            common,
        } => {
            let file = load(&files)?;
            let m = monitor(&file, &mname)?;
            let base = cname.as_deref().unwrap_or(&m.base);
            let c = circuit(&file, base)?;
            let composed = transform::compose(m, c)
                .map_err(|d| CliError::usage(format!("composition rejected:\n{d}")))?;
            emit(&common, &textio::print_circuit(&composed))?;
            Ok(0)
        }
        Command::Product {
            files,
            circuit: name,
            common,
        } => {
            let file = load(&files)?;
            let c = circuit(&file, &name)?;
            validated(c)?;
            let p = transform::product(c).map_err(|d| CliError::usage(d.to_string()))?;
            emit(&common, &textio::print_circuit(&p.circuit))?;
            Ok(0)
        }
        Command::Stutter {
            files,
            circuit: name,
            retire,
            common,
        } => {
            let file = load(&files)?;
            let c = circuit(&file, &name)?;
            validated(c)?;
            let phi = textio::parse_expr_over(&retire, c)?;
            let p = transform::stuttering_product(c, &phi)
                .map_err(|d| CliError::usage(d.to_string()))?;
            emit(&common, &textio::print_circuit(&p.circuit))?;
            Ok(0)
        }
        Command::LearnInv(a) => {
            let file = load(&a.files)?;
            let p = build_problem(&file, &a)?;
            let report = engine::verify(&p)?;
            // Learning output only: list what survived, ignore the final
            // implication verdict.
            let mut text = String::new();
            match a.common.format {
                Format::Machine => {
                    text.push_str(&format!("invariants_learned={}\n", report.learned.len()));
                    for ci in &report.learned {
                        text.push_str(&format!(
                            "invariant={}\n",
                            textio::print_expr_compact(&ci.expr)
                        ));
                    }
                }
                Format::Human => {
                    text.push_str(&format!("{} invariants learned\n", report.learned.len()));
                    for ci in &report.learned {
                        text.push_str(&format!(
                            "  [{}] {}\n",
                            ci.label(),
                            textio::print_expr(&ci.expr)
                        ));
                    }
                }
            }
            emit(&a.common, &text)?;
            Ok(0)
        }
        Command::Verify(a) => {
            let file = load(&a.files)?;
            let p = build_problem(&file, &a)?;
            let report = engine::verify(&p)?;
            report_verdict(&a.common, &report)
        }
        Command::Verify4way(a) => {
            let file = load(&a.files)?;
            let arch_name = a
                .arch
                .as_deref()
                .ok_or_else(|| CliError::usage("verify-4way needs --arch"))?;
            let arch = circuit(&file, arch_name)?.clone();
            let p = build_problem(&file, &a)?;
            let report = engine::verify_4way(&arch, &p)?;
            report_verdict(&a.common, &report)
        }
        Command::CheckIsa {
            files,
            impl_name,
            arch,
            retire,
            horizon,
            bounds,
            common,
        } => {
            let file = load(&files)?;
            let ic = circuit(&file, &impl_name)?.clone();
            let ac = circuit(&file, &arch)?.clone();
            validated(&ic)?;
            validated(&ac)?;
            let phi = textio::parse_expr_over(&retire, &ic)?;
            let b = parse_bounds(&ic, bounds.as_deref())?;
            let verdict = engine::check_isa_compliance(&ic, &ac, &phi, &b, horizon)?;
            let (text, code) = match &verdict {
                engine::IsaVerdict::Pass { states_checked } => {
                    (format!("result=Pass states_checked={states_checked}\n"), 0)
                }
                engine::IsaVerdict::Violation(v) => (
                    format!(
                        "result=Violation condition={} cycle={}\ndetail={}\n{}",
                        v.condition,
                        v.cycle,
                        v.detail,
                        engine::dump_states(std::slice::from_ref(&v.init))
                    ),
                    1,
                ),
            };
            emit(&common, &text)?;
            Ok(code)
        }
        Command::Oracle {
            files,
            kind,
            impl_name,
            arch,
            contract,
            attacker,
            retire,
            uarch,
            horizon,
            bounds,
            common,
        } => {
            let file = load(&files)?;
            let ic = circuit(&file, &impl_name)?.clone();
            validated(&ic)?;
            let l = monitor(&file, &contract)?;
            let atk = monitor(&file, &attacker)?;
            let phi = textio::parse_expr_over(&retire, &ic)?;
            let uarch = parse_uarch(&ic, &uarch)?;
            let b = parse_bounds(&ic, bounds.as_deref())?;
            let verdict = match kind {
                OracleKind::LeakOrder => {
                    engine::oracle_leak_order(&ic, l, atk, &uarch, &phi, &b, horizon)?
                }
                OracleKind::ContractSatisfaction => {
                    let arch_name = arch
                        .as_deref()
                        .ok_or_else(|| CliError::usage("contract-satisfaction needs --arch"))?;
                    let ac = circuit(&file, arch_name)?.clone();
                    validated(&ac)?;
                    engine::oracle_contract_satisfaction(&ac, &ic, l, atk, &uarch, &b, horizon)?
                }
            };
            let (text, code) = match &verdict {
                engine::OracleVerdict::Holds { states, classes } => (
                    format!("result=Holds states={states} classes={classes}\n"),
                    0,
                ),
                engine::OracleVerdict::Violation(pair) => (
                    format!(
                        "result=Violation\nfirst=below\n{}second=below\n{}",
                        engine::dump_states(std::slice::from_ref(&pair.0)),
                        engine::dump_states(std::slice::from_ref(&pair.1))
                    ),
                    1,
                ),
            };
            emit(&common, &text)?;
            Ok(code)
        }
        Command::SolveCnf { file } => dimacs::solve_cnf(&file),
    }
}
