use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aohf::integrals::{parse_aoints, random_system, write_aoints, AoSystem, ParsedSystem};
use aohf::linalg;
use aohf::oracle::MAX_MODES_TWO_BODY;
use aohf::report::{self, ComparisonReport, Real, ResidualReport, RunReport};
use aohf::scf::{
    scf_density_descent, scf_roothaan, ScfOptions, ScfSolution, Solver, VERIFY_GRADIENT_TOL,
};
use aohf::verify::{check_solution, oracle_identities};

/// Hartree-Fock in a nonorthogonal AO basis.
#[derive(Debug, Parser)]
#[command(name = "aohf", version)]
struct Cli {
    /// Write the JSON result (or generated file) here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized inputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the Hartree-Fock state and report it.
    Run {
        input: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        /// Write the iteration trace as CSV.
        #[arg(long)]
        trace_csv: Option<PathBuf>,
        /// Include the wall time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Solve, then verify the density conditions and the Roothaan-Hall equivalence.
    Check {
        input: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Verify the second-quantization identities in the explicit Fock space.
    Oracle {
        input: PathBuf,
        /// Refuse systems with more spin orbitals than this.
        #[arg(long = "max-M", alias = "max-m", default_value_t = MAX_MODES_TWO_BODY)]
        max_m: usize,
    },
    /// Write a random spin-orbital system.
    Gen {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        overlap: f64,
    },
    /// Expand a spatial-orbital file to spin orbitals.
    Convert { input: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverChoice {
    Roothaan,
    #[value(name = "density_descent", alias = "descent")]
    DensityDescent,
    Both,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value = "roothaan")]
    solver: SolverChoice,
    #[arg(long)]
    tol_energy: Option<f64>,
    /// Defaults to 1e-8 for `run` and 1e-10 for `check`.
    #[arg(long)]
    tol_grad: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// DIIS history length; 0 disables it.
    #[arg(long)]
    diis: Option<usize>,
    /// First trial step of the descent line search.
    #[arg(long)]
    initial_step: Option<f64>,
}

impl SolveArgs {
    fn options(&self) -> ScfOptions {
        self.options_with_gradient(ScfOptions::default().gradient_tolerance)
    }

    fn options_with_gradient(&self, default_gradient: f64) -> ScfOptions {
        let d = ScfOptions::default();
        ScfOptions {
            max_iterations: self.max_iter.unwrap_or(d.max_iterations),
            energy_tolerance: self.tol_energy.unwrap_or(d.energy_tolerance),
            gradient_tolerance: self.tol_grad.unwrap_or(default_gradient),
            diis_depth: self.diis.unwrap_or(d.diis_depth),
            initial_step: self.initial_step.unwrap_or(d.initial_step),
            solver: d.solver,
        }
    }

    fn solvers(&self) -> Vec<Solver> {
        match self.solver {
            SolverChoice::Roothaan => vec![Solver::Roothaan],
            SolverChoice::DensityDescent => vec![Solver::DensityDescent],
            SolverChoice::Both => vec![Solver::Roothaan, Solver::DensityDescent],
        }
    }
}

/// Input problems (exit 1) and failed verification (exit 2).
enum Failure {
    Input(String),
    Unsuccessful,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Unsuccessful) => ExitCode::from(2),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Run {
            input,
            solve,
            trace_csv,
            timing,
        } => cmd_run(input, solve, trace_csv.as_deref(), *timing, out),
        Command::Check { input, solve } => cmd_check(input, solve, out),
        Command::Oracle { input, max_m } => cmd_oracle(input, *max_m, cli.seed, out),
        Command::Gen { m, n, overlap } => cmd_gen(*m, *n, cli.seed, *overlap, out),
        Command::Convert { input } => cmd_convert(input, out),
    }
}

fn read_system(path: &Path) -> Result<ParsedSystem, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_aoints(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(system: &AoSystem, solver: Solver, options: &ScfOptions) -> Result<ScfSolution, Failure> {
    let options = ScfOptions {
        solver,
        ..options.clone()
    };
    let sol = match solver {
        Solver::Roothaan => scf_roothaan(system, &options)?,
        Solver::DensityDescent => scf_density_descent(system, &options)?,
    };
    eprintln!(
        "{}: {} after {} iterations, E = {:.16e}, max|FDS-SDF| = {:.3e}",
        solver,
        if sol.converged {
            "converged"
        } else {
            "not converged"
        },
        sol.iterations,
        sol.energy,
        sol.gradient_max
    );
    Ok(sol)
}

fn cmd_run(
    input: &Path,
    args: &SolveArgs,
    trace_csv: Option<&Path>,
    timing: bool,
    out: Option<&Path>,
) -> Outcome {
    let system = read_system(input)?.into_spin();
    let options = args.options();
    options.validate()?;
    let mut reports = Vec::new();
    let mut solutions = Vec::new();
    for solver in args.solvers() {
        let start = Instant::now();
        let sol = solve(&system, solver, &options)?;
        let elapsed = timing.then(|| start.elapsed().as_secs_f64());
        reports.push(RunReport::new(&system.label, &sol, elapsed));
        solutions.push(sol);
    }

    if let Some(path) = trace_csv {
        let tagged = solutions.len() > 1;
        let traces: Vec<_> = solutions
            .iter()
            .map(|s| (tagged.then(|| s.solver.name()), s.trace.as_slice()))
            .collect();
        fs::write(path, report::trace_csv(&traces))
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    }

    let json = if let [r, d] = solutions.as_slice() {
        let comparison = ComparisonReport {
            energy_delta: Real((r.energy - d.energy).abs()),
            density_max_delta: Real(linalg::max_abs_diff(r.density.matrix(), d.density.matrix())),
            density_descent: reports.pop().expect("two reports"),
            roothaan: reports.pop().expect("two reports"),
        };
        report::to_json(&comparison)
    } else {
        report::to_json(&reports[0])
    };
    emit(&json, out)?;
    if solutions.iter().all(|s| s.converged) {
        Ok(())
    } else {
        Err(Failure::Unsuccessful)
    }
}

#[derive(serde::Serialize)]
struct CheckOutput {
    reports: Vec<ResidualReport>,
    passed: bool,
}

fn print_table(report: &ResidualReport) {
    let title = report.solver.as_deref().unwrap_or(&report.command);
    eprintln!("{title}:");
    for r in &report.residuals {
        eprintln!(
            "  {:<40} {:>12.3e}  < {:.0e}  {}",
            r.name,
            r.value.0,
            r.threshold.0,
            if r.passed { "ok" } else { "FAIL" }
        );
    }
}

fn cmd_check(input: &Path, args: &SolveArgs, out: Option<&Path>) -> Outcome {
    let system = read_system(input)?.into_spin();
    // Converge past the verification thresholds unless told otherwise.
    let options = args.options_with_gradient(VERIFY_GRADIENT_TOL);
    options.validate()?;
    let mut reports = Vec::new();
    for solver in args.solvers() {
        let sol = solve(&system, solver, &options)?;
        let rows = check_solution(&system, &sol, options.gradient_tolerance)?;
        let mut rep = ResidualReport::new(&system.label, "check", rows);
        rep.solver = Some(solver.name().to_string());
        rep.converged = Some(sol.converged);
        rep.energy = Some(Real(sol.energy));
        print_table(&rep);
        reports.push(rep);
    }
    let passed = reports.iter().all(|r| r.passed);
    emit(&report::to_json(&CheckOutput { reports, passed }), out)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Unsuccessful)
    }
}

fn cmd_oracle(input: &Path, max_m: usize, seed: u64, out: Option<&Path>) -> Outcome {
    let system = read_system(input)?.into_spin();
    let rows = oracle_identities(&system, seed, max_m)?;
    let rep = ResidualReport::new(&system.label, "oracle", rows);
    print_table(&rep);
    emit(&report::to_json(&rep), out)?;
    if rep.passed {
        Ok(())
    } else {
        Err(Failure::Unsuccessful)
    }
}

fn cmd_gen(m: usize, n: usize, seed: u64, overlap: f64, out: Option<&Path>) -> Outcome {
    let system = random_system(m, n, seed, overlap)?;
    emit(&write_aoints(&ParsedSystem::SpinOrbital(system)), out)
}

fn cmd_convert(input: &Path, out: Option<&Path>) -> Outcome {
    match read_system(input)? {
        ParsedSystem::SpinOrbital(_) => Err(Failure::Input(format!(
            "{} is already in spin orbitals; nothing to convert",
            input.display()
        ))),
        spatial @ ParsedSystem::Spatial(_) => emit(
            &write_aoints(&ParsedSystem::SpinOrbital(spatial.into_spin())),
            out,
        ),
    }
}
