//! `lqgid`: solve, certify and simulate information-design problems, and run
//! the experiment sweeps.
//!
//! Exit codes: 0 success, 1 input error (nothing written), 2 solver hit the
//! iteration limit, 3 problem unbounded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lqgid_core::analysis::{common_state_certificate, confirm_no_info_not_optimal, public_certificate, theorem1_check, Verdict};
use lqgid_core::equilibrium::{
    bne_coefficients, conditional_info_structure, full_info_solution, full_info_structure, no_info_solution,
    uninformative_structure,
};
use lqgid_core::experiments::{run_sweep, Experiment, Layout, SweepConfig};
use lqgid_core::game::{validate_game, GameSpec};
use lqgid_core::montecarlo::{analytic_regret, obedient_strategy, simulate_play};
use lqgid_core::objectives::{evaluate, full_info_value, FMatrix, ObjectiveSpec};
use lqgid_core::sdp::{build_sdp, check_kkt, solve, SolveStatus, SolverOptions};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "lqgid", version, about = "Information design in linear-quadratic-Gaussian games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the design SDP and write the result as JSON.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed-form optimality certificates.
    Certify {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Also solve the SDP and report whether it agrees with the certificates.
        #[arg(long)]
        with_solver: bool,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate play under an information structure.
    Sample {
        #[arg(long)]
        game: PathBuf,
        /// Needed for `--structure optimal` and for the objective estimate.
        #[arg(long)]
        objective: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Structure::Full)]
        structure: Structure,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Asymmetric-payoff sweep.
    Fig1(SweepArgs),
    /// Relaxed-variance sweep.
    Fig2(SweepArgs),
    /// Blended-objective sweep.
    Fig3(SweepArgs),
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    objective: PathBuf,
}

#[derive(Args, Clone, Copy)]
struct SolverArgs {
    /// Solver stopping tolerance (default 1e-7).
    #[arg(long)]
    tol: Option<f64>,
    /// Solver iteration limit (default 50000).
    #[arg(long)]
    max_iter: Option<usize>,
}

impl SolverArgs {
    fn apply(&self, mut opts: SolverOptions) -> SolverOptions {
        if let Some(t) = self.tol {
            opts.tol = t;
        }
        if let Some(k) = self.max_iter {
            opts.max_iter = k;
        }
        opts
    }
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep configuration; default grids when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; falls back to the config's `out`, then standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// First seed of the per-cell seed range.
    #[arg(long)]
    seed: Option<u64>,
    /// Whitespace-separated blocks per series instead of CSV.
    #[arg(long)]
    gnuplot: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Structure {
    /// Every player observes the whole state.
    Full,
    /// Signals independent of the state.
    None,
    /// Recommendations drawn from the SDP optimum.
    Optimal,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

impl From<lqgid_core::Error> for Failure {
    fn from(e: lqgid_core::Error) -> Self {
        input_error(e.to_string())
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input_error(format!("malformed {what} {}: {e}", path.display())))
}

fn load_game(path: &Path) -> Result<GameSpec, Failure> {
    let g: GameSpec = read_json(path, "game file")?;
    g.check_dims()?;
    let report = validate_game(&g)?;
    if !report.ok {
        return Err(input_error(format!("invalid game: {}", report.messages.join("; "))));
    }
    Ok(g)
}

fn load_objective(path: &Path, g: &GameSpec) -> Result<FMatrix, Failure> {
    let spec: ObjectiveSpec = read_json(path, "objective file")?;
    let f = spec.build(g)?;
    for w in f.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(f)
}

fn write_output(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| input_error(e.to_string()))?;
    write_output(path, &(text + "\n"))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("core types serialise")
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Converged => 0,
        SolveStatus::MaxIter => 2,
        SolveStatus::Unbounded => 3,
        SolveStatus::Infeasible => 1,
    }
}

fn cmd_solve(problem: &ProblemArgs, solver: SolverArgs, out: &Path) -> Result<u8, Failure> {
    let g = load_game(&problem.game)?;
    let f = load_objective(&problem.objective, &g)?;
    let opts = solver.apply(SolverOptions::default());
    let p = build_sdp(&g, &f)?;
    let r = solve(&p, &opts)?;
    let kkt = check_kkt(&p, &r)?;
    let mut doc = to_value(&r);
    doc["kkt"] = to_value(&kkt);
    doc["full_info_value"] = json!(full_info_value(&f, &g)?);
    doc["no_info_value"] = json!(evaluate(&f, &no_info_solution(&g)?)?);
    doc["tol"] = json!(opts.tol);
    write_json(out, &doc)?;
    eprintln!("{}: objective {} after {} iterations", r.status.as_str(), r.objective, r.iterations);
    Ok(status_code(r.status))
}

fn cmd_certify(problem: &ProblemArgs, with_solver: bool, solver: SolverArgs, out: &Path) -> Result<u8, Failure> {
    let g = load_game(&problem.game)?;
    let f = load_objective(&problem.objective, &g)?;
    let public = public_certificate(&g, &f)?;
    let mut common = common_state_certificate(&g, &f)?;
    let theorem1 = theorem1_check(&g)?;
    let mut doc = json!({ "theorem1": to_value(&theorem1) });

    if with_solver {
        let opts = solver.apply(SolverOptions::default());
        let r = solve(&build_sdp(&g, &f)?, &opts)?;
        let full = full_info_value(&f, &g)?;
        let none = evaluate(&f, &no_info_solution(&g)?)?;
        confirm_no_info_not_optimal(&mut common, &r, none, opts.tol);
        let claims_full = common.has(Verdict::FullInfoOptimalGeneral)
            || (theorem1.applies && f.label == lqgid_core::objectives::ObjectiveKind::Welfare);
        let close = (r.objective - full).abs() <= 1e-3 * full.abs().max(1.0);
        let agrees = !claims_full || r.status != SolveStatus::Converged || close;
        if !agrees {
            eprintln!("certificate and solver disagree: optimum {} vs full disclosure {full}", r.objective);
        }
        doc["solver"] = json!({
            "status": r.status.as_str(),
            "objective": r.objective,
            "full_info_value": full,
            "no_info_value": none,
            "agrees": agrees,
        });
    }
    doc["public"] = to_value(&public);
    doc["common_state"] = to_value(&common);
    write_json(out, &doc)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    game: &Path,
    objective: Option<&Path>,
    structure: Structure,
    samples: usize,
    seed: u64,
    solver: SolverArgs,
    out: &Path,
) -> Result<u8, Failure> {
    let g = load_game(game)?;
    let f = objective.map(|p| load_objective(p, &g)).transpose()?;
    let mut doc = json!({});
    let (z, strat, reference) = match structure {
        Structure::Full => {
            let z = full_info_structure(&g);
            let s = bne_coefficients(&g, &z)?;
            (z, s, full_info_solution(&g)?)
        }
        Structure::None => {
            let z = uninformative_structure(&g);
            let s = bne_coefficients(&g, &z)?;
            (z, s, no_info_solution(&g)?)
        }
        Structure::Optimal => {
            let f = f.as_ref().ok_or_else(|| input_error("--structure optimal needs --objective"))?;
            let r = solve(&build_sdp(&g, f)?, &solver.apply(SolverOptions::default()))?;
            doc["solve_status"] = json!(r.status.as_str());
            doc["objective"] = json!(r.objective);
            let x = r.as_cov_solution(&g)?;
            let z = conditional_info_structure(&g, &x)?;
            (z, obedient_strategy(&x), x)
        }
    };
    let report = simulate_play(&g, &z, &strat, f.as_ref(), samples, seed)?;
    doc["report"] = to_value(&report);
    doc["reference_X"] = to_value(&lqgid_core::json::matrix_to_rows(&reference.x));
    doc["analytic_regret"] = json!(analytic_regret(&g, &reference)?);
    if let Some(f) = &f {
        doc["reference_objective"] = json!(evaluate(f, &reference)?);
    }
    write_json(out, &doc)?;
    Ok(0)
}

fn cmd_sweep(experiment: Experiment, args: &SweepArgs) -> Result<u8, Failure> {
    let mut cfg = match &args.config {
        Some(path) => read_json::<SweepConfig>(path, "sweep config")?,
        None => SweepConfig::new(experiment),
    };
    if cfg.experiment != experiment {
        return Err(input_error(format!(
            "config is for {} but the command is {}",
            cfg.experiment.as_str(),
            experiment.as_str()
        )));
    }
    cfg.solver = args.solver.apply(cfg.solver);
    if let Some(s) = args.seed {
        cfg.first_seed = s;
    }
    cfg.validate()?;
    let layout = if args.gnuplot { Layout::Gnuplot } else { Layout::Csv };
    let text = run_sweep(&cfg, layout)?;
    match args.out.as_ref().or(cfg.out.as_ref()) {
        Some(path) => write_output(path, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Solve { problem, solver, out } => cmd_solve(problem, *solver, out),
        Command::Certify { problem, with_solver, solver, out } => cmd_certify(problem, *with_solver, *solver, out),
        Command::Sample { game, objective, structure, samples, seed, solver, out } => {
            cmd_sample(game, objective.as_deref(), *structure, *samples, *seed, *solver, out)
        }
        Command::Fig1(a) => cmd_sweep(Experiment::Fig1, a),
        Command::Fig2(a) => cmd_sweep(Experiment::Fig2, a),
        Command::Fig3(a) => cmd_sweep(Experiment::Fig3, a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
