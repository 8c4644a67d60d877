//! `qresource`: evaluate resource measures on state files, run the axiom
//! suites, compute key rates and reproduce the acceptance table.
//!
//! Exit codes: 0 success, 1 suite or acceptance failure, 2 invalid input,
//! 3 optimizer failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qresource::acceptance::{self, CriterionRow};
use qresource::factory::bell_diagonal_errors;
use qresource::io::parse_state_file;
use qresource::measures::{self, Certificate};
use qresource::qkd::devetak_winter_rate;
use qresource::suites::{run_suite, Suite, SuiteOptions, SuiteReport};
use qresource::{
    BipartiteState, BoundType, Error, KeyRateReport, MeasureKind, MeasureResult, OptimizerConfig, QkdSetup, Subsystem,
};

#[derive(Parser)]
#[command(name = "qresource", version, about = "Quantum resource measures on bipartite states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate measures on a state file.
    Measure(MeasureArgs),
    /// Run seeded axiom and lemma suites.
    Axioms(AxiomArgs),
    /// Devetak-Winter key rate of a state file or a Bell-diagonal state.
    Qkd(QkdArgs),
    /// Recompute the acceptance table.
    Demo(DemoArgs),
}

#[derive(Args)]
struct OptimizerFlags {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = OptimizerConfig::default().restarts)]
    restarts: usize,
    #[arg(long = "max-iters", default_value_t = OptimizerConfig::default().max_iterations)]
    max_iters: usize,
    #[arg(long, default_value_t = OptimizerConfig::default().tolerance)]
    tol: f64,
}

impl OptimizerFlags {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_iterations: self.max_iters,
            tolerance: self.tol,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    RelativeEntropy,
    L1,
    Geometric,
    Fidelity,
    ConvexRoof,
}

impl From<KindArg> for MeasureKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::RelativeEntropy => MeasureKind::RelativeEntropy,
            KindArg::L1 => MeasureKind::L1,
            KindArg::Geometric => MeasureKind::Geometric,
            KindArg::Fidelity => MeasureKind::FidelityBased,
            KindArg::ConvexRoof => MeasureKind::ConvexRoofRandomness,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Quantity {
    Bd,
    Coherence,
    Discord,
    Entanglement,
    All,
}

#[derive(Args)]
struct MeasureArgs {
    /// JSON state file.
    state: PathBuf,
    #[arg(long, value_enum, default_value = "relative-entropy")]
    kind: KindArg,
    #[arg(long, value_enum, default_value = "all")]
    measure: Quantity,
    #[command(flatten)]
    optimizer: OptimizerFlags,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Bd,
    Coherence,
    Discord,
    Entanglement,
    Lemmas,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Bd => Suite::Bd,
            SuiteArg::Coherence => Suite::Coherence,
            SuiteArg::Discord => Suite::Discord,
            SuiteArg::Entanglement => Suite::Entanglement,
            SuiteArg::Lemmas => Suite::Lemmas,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Args)]
struct AxiomArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    /// Trials per suite; defaults to 200 for closed-form suites and 25 for
    /// optimizer suites.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also apply a Hadamard on A and record BD increases as out-of-class.
    #[arg(long)]
    adversarial: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct QkdArgs {
    /// JSON state file; omit when using --bell-diagonal.
    #[arg(required_unless_present = "bell_diagonal", conflicts_with = "bell_diagonal")]
    state: Option<PathBuf>,
    /// Bit and phase error rates of a Bell-diagonal state.
    #[arg(long, num_args = 2, value_names = ["E_B", "E_P"], allow_negative_numbers = true)]
    bell_diagonal: Option<Vec<f64>>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DemoArgs {
    /// Comma-separated criterion numbers; all by default.
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<usize>,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Measure(a) => cmd_measure(&a),
        Command::Axioms(a) => cmd_axioms(&a),
        Command::Qkd(a) => cmd_qkd(&a),
        Command::Demo(a) => cmd_demo(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}

fn error_code(e: &Error) -> u8 {
    if e.is_validation() {
        2
    } else {
        3
    }
}

#[derive(Serialize)]
struct MeasureRecord {
    measure: &'static str,
    kind: MeasureKind,
    value: f64,
    bound_type: BoundType,
    certificate: Option<String>,
    restarts_used: Option<usize>,
    evaluations: Option<usize>,
    seconds: f64,
}

#[derive(Serialize)]
struct MeasureReport {
    state: String,
    dims: [usize; 2],
    config: OptimizerConfig,
    results: Vec<MeasureRecord>,
}

fn digest(c: &Certificate) -> String {
    match c {
        Certificate::IqState(s) => format!("iq-state {}x{}", s.d_a(), s.d_b()),
        Certificate::Unitary(u) => format!("unitary {}x{}", u.rows(), u.cols()),
        Certificate::Decomposition(d) => format!("decomposition of {} pure states", d.len()),
        Certificate::Roof { decomposition, .. } => {
            format!("decomposition of {} pure states with local unitaries", decomposition.len())
        }
    }
}

fn record(measure: &'static str, run: impl FnOnce() -> qresource::Result<MeasureResult>) -> qresource::Result<MeasureRecord> {
    let start = Instant::now();
    let r = run()?;
    Ok(MeasureRecord {
        measure,
        kind: r.kind,
        value: r.value,
        bound_type: r.bound,
        certificate: r.certificate.as_ref().map(digest),
        restarts_used: r.diagnostics.as_ref().map(|d| d.restarts_used),
        evaluations: r.diagnostics.as_ref().map(|d| d.evaluations),
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn cmd_measure(a: &MeasureArgs) -> qresource::Result<ExitCode> {
    let rho: BipartiteState = parse_state_file(&a.state)?;
    let cfg = a.optimizer.config();
    cfg.validate()?;
    let kind = MeasureKind::from(a.kind);
    let want = |q: Quantity| a.measure == q || a.measure == Quantity::All;
    let mut results = Vec::new();
    if want(Quantity::Coherence) {
        let rho_a = rho.partial_trace(Subsystem::A);
        results.push(record("coherence", || measures::coherence(&rho_a, kind, None, &cfg))?);
    }
    if want(Quantity::Bd) {
        results.push(record("bd", || measures::bd(&rho, kind, &cfg))?);
    }
    if want(Quantity::Discord) {
        results.push(record("discord", || measures::discord(&rho, kind, &cfg))?);
    }
    if want(Quantity::Entanglement) {
        results.push(record("entanglement", || measures::entanglement(&rho, kind, &cfg))?);
    }
    let report = MeasureReport {
        state: a.state.display().to_string(),
        dims: [rho.d_a(), rho.d_b()],
        config: cfg,
        results,
    };
    if a.json {
        print_json(&report);
    } else {
        println!("state {} dims {}x{}", report.state, report.dims[0], report.dims[1]);
        println!("{:<13} {:<17} {:>14} {:<12} {:>9}", "measure", "kind", "value", "bound", "seconds");
        for r in &report.results {
            println!(
                "{:<13} {:<17} {:>14.10} {:<12} {:>9.3}",
                r.measure,
                r.kind.name(),
                r.value,
                bound_name(r.bound_type),
                r.seconds
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn bound_name(b: BoundType) -> &'static str {
    match b {
        BoundType::Exact => "exact",
        BoundType::UpperBound => "upper-bound",
    }
}

fn cmd_axioms(a: &AxiomArgs) -> qresource::Result<ExitCode> {
    let opts = SuiteOptions {
        trials: a.trials,
        seed: a.seed,
        adversarial: a.adversarial,
        ..SuiteOptions::default()
    };
    let report: SuiteReport = run_suite(a.suite.into(), &opts)?;
    if a.json {
        print_json(&report);
    } else {
        println!(
            "suite {}: {} trials, {} checks, {} failures, {} out-of-class: {}",
            report.suite,
            report.trials,
            report.checks.len(),
            report.failures.len(),
            report.out_of_class.len(),
            if report.pass { "PASS" } else { "FAIL" }
        );
        for f in &report.failures {
            println!("  FAIL {} seed {} margin {:.3e} witness {:?}", f.check, f.seed, f.margin, f.witness);
        }
        for o in &report.out_of_class {
            println!("  out-of-class {} seed {}: {:.6} -> {:.6}", o.channel, o.seed, o.before, o.after);
        }
    }
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_qkd(a: &QkdArgs) -> qresource::Result<ExitCode> {
    let rho = match (&a.state, &a.bell_diagonal) {
        (_, Some(e)) => bell_diagonal_errors(e[0], e[1])?,
        (Some(path), None) => parse_state_file(path)?,
        (None, None) => return Err(Error::InvalidArgument("a state file or --bell-diagonal is required".into())),
    };
    let report: KeyRateReport = devetak_winter_rate(&QkdSetup::new(rho));
    if a.json {
        print_json(&report);
    } else {
        println!("key rate K          {:>14.10}", report.key_rate);
        println!("S(Z_A|E)            {:>14.10}", report.s_za_e);
        println!("S(Z_A|E) purified   {:>14.10}", report.s_za_e_purified);
        println!("S(Z_A|Z_B)          {:>14.10}", report.s_za_zb);
        println!("path gap            {:>14.3e}", report.consistency_gap);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_demo(a: &DemoArgs) -> qresource::Result<ExitCode> {
    let all = acceptance::criteria();
    if let Some(bad) = a.criteria.iter().find(|id| !all.iter().any(|(i, _)| i == *id)) {
        return Err(Error::InvalidArgument(format!("no criterion {bad}")));
    }
    let rows: Vec<CriterionRow> = all
        .into_iter()
        .filter(|(id, _)| a.criteria.is_empty() || a.criteria.contains(id))
        .map(|(_, run)| {
            let row = run();
            if !a.json {
                print_row(&row);
            }
            row
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    if a.json {
        print_json(&rows);
    } else {
        println!("{}", if pass { "all criteria pass" } else { "some criteria FAIL" });
    }
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn print_row(row: &CriterionRow) {
    println!(
        "{:>2} {:<55} {:>8.2}s {}",
        row.id,
        row.name,
        row.seconds,
        if row.pass { "PASS" } else { "FAIL" }
    );
    for c in &row.checks {
        println!(
            "     {:<40} computed {:>11.3e}  expected {:<20} tol {:>7.0e}  {}",
            c.label,
            c.computed,
            c.expected,
            c.tolerance,
            if c.pass { "ok" } else { "FAIL" }
        );
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}
