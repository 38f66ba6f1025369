use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use wdnd_core::experiment::{self, run_experiment, summarize, ExperimentPlan};
use wdnd_core::ils::{brute_force_optimum, run};
use wdnd_core::io::{parse_solution, read_run_records, write_run_record, write_solution};
use wdnd_core::{
    parse_instance, parse_type_catalog, Constraints, Evaluator, Network, PipeTypeCatalog, RunStatus, SearchError,
    SearchParams, Solution, SolverConfig, Variant, Verdict, ViolationKind,
};

#[derive(Parser)]
#[command(name = "wdnd", version, about = "Pipe sizing for gravity-fed water networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a cheap feasible pipe-type assignment.
    Optimize(OptimizeArgs),
    /// Check one assignment against the pressure and velocity bounds.
    Validate(ValidateArgs),
    /// Exhaustive optimum of a tiny instance.
    Bruteforce(BruteforceArgs),
    /// Run an experiment plan (TOML) and write one JSON record per run.
    Bench(BenchArgs),
    /// Cost, deviation and gain tables from run records.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// Network in .inp format.
    #[arg(long)]
    instance: PathBuf,
    /// Pipe type catalog (CSV: index, diameter_mm, roughness, unit_cost).
    /// The built-in 16-type table is used when neither this nor the
    /// environment variable is set.
    #[arg(long, env = "WDND_CATALOG")]
    catalog: Option<PathBuf>,
    /// Minimum pressure head, m.
    #[arg(long, default_value_t = 20.0)]
    h_min: f64,
    /// Maximum velocity, m/s.
    #[arg(long, default_value_t = 2.0)]
    v_max: f64,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Wall-clock budget, s.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Initial type reduction factor.
    #[arg(long, default_value_t = 4)]
    factor: usize,
    /// Solution pool size.
    #[arg(long, default_value_t = 3)]
    pool: usize,
    /// full, base, redu-only, pool-only, pert-only or spt-only.
    #[arg(long, default_value = "full")]
    variant: Variant,
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Probability of the dispersed perturbation (default 1 - alpha).
    #[arg(long)]
    pert_prob: Option<f64>,
    /// Append the run record here instead of printing it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the best assignment here.
    #[arg(long)]
    solution_out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Assignment file of "pipe type" lines.
    #[arg(long, conflicts_with = "uniform")]
    solution: Option<PathBuf>,
    /// Give every pipe this type (default: the largest).
    #[arg(long)]
    uniform: Option<usize>,
}

#[derive(Args)]
struct BruteforceArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Largest number of assignments to enumerate.
    #[arg(long, default_value_t = 1_000_000)]
    limit: u64,
    #[arg(long)]
    solution_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    plan: PathBuf,
    /// Worker threads; overrides the plan.
    #[arg(long)]
    jobs: Option<usize>,
    /// Records file; overrides the plan. Standard output when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SummarizeArgs {
    /// JSON-lines records written by `bench` or `optimize`.
    records: Vec<PathBuf>,
    /// Variant the gains are measured against.
    #[arg(long)]
    baseline: Option<String>,
}

/// Ways a command can fail, by exit code.
enum Failure {
    Infeasible(String),
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // usage errors share the input-error code; 2 means infeasible
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Optimize(a) => optimize(a),
        Command::Validate(a) => validate(a),
        Command::Bruteforce(a) => bruteforce(a),
        Command::Bench(a) => bench(a),
        Command::Summarize(a) => summarize_records(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

struct Problem {
    id: String,
    net: Network,
    cat: PipeTypeCatalog,
    constraints: Constraints,
}

impl ProblemArgs {
    fn load(&self) -> anyhow::Result<Problem> {
        let text = read(&self.instance)?;
        let net = parse_instance(&text).with_context(|| format!("{}", self.instance.display()))?;
        let cat = match &self.catalog {
            Some(path) => parse_type_catalog(&read(path)?).with_context(|| format!("{}", path.display()))?,
            None => PipeTypeCatalog::hg_mp(),
        };
        if !(self.h_min.is_finite() && self.v_max.is_finite() && self.v_max > 0.0) {
            return Err(anyhow!(
                "pressure and velocity bounds must be finite, velocity positive"
            ));
        }
        Ok(Problem {
            id: experiment::instance_id(&self.instance),
            net,
            cat,
            constraints: Constraints {
                h_min: self.h_min,
                v_max: self.v_max,
            },
        })
    }
}

impl Problem {
    fn evaluator(&self) -> anyhow::Result<Evaluator<'_>> {
        Evaluator::build(&self.net, &self.cat, self.constraints, SolverConfig::default()).map_err(|e| anyhow!(e))
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn save_solution(path: &Path, sol: &Solution, net: &Network) -> anyhow::Result<()> {
    let mut w = create(path)?;
    write_solution(sol, net, &mut w)?;
    w.flush()?;
    Ok(())
}

fn optimize(a: OptimizeArgs) -> Outcome {
    let problem = a.problem.load()?;
    if !(a.time_limit.is_finite() && a.time_limit >= 0.0) {
        return Err(anyhow!("time limit must be a nonnegative number of seconds").into());
    }
    if !(0.0..=1.0).contains(&a.alpha) || a.pert_prob.is_some_and(|p| !(0.0..=1.0).contains(&p)) {
        return Err(anyhow!("alpha and the perturbation probability must lie in [0, 1]").into());
    }
    if a.factor == 0 {
        return Err(anyhow!("reduction factor must be at least 1").into());
    }
    let params = SearchParams {
        alpha: a.alpha,
        factor: a.factor,
        pool_size: a.pool,
        time_limit: Duration::from_secs_f64(a.time_limit),
        max_iterations: a.max_iterations,
        target_cost: None,
        seed: a.seed,
        variant: a.variant,
        dispersed_probability: a.pert_prob,
    };
    let eval = problem.evaluator()?;
    let outcome = run(&eval, &params);
    let record = experiment::record(&problem.id, &params, &outcome);
    match &a.out {
        Some(path) => {
            let file = File::options()
                .create(true)
                .append(true)
                .open(path)
                .with_context(|| format!("cannot open {}", path.display()))?;
            write_run_record(&record, BufWriter::new(file)).context("writing record")?;
        }
        None => write_run_record(&record, io::stdout().lock()).context("writing record")?,
    }
    match outcome {
        Ok((best, stats)) => {
            eprintln!(
                "best cost {} after {} iterations ({} simulator calls, initial {})",
                best.cost, stats.iterations, stats.simulator_calls, stats.initial_cost
            );
            if let Some(path) = &a.solution_out {
                save_solution(path, &best.solution, &problem.net)?;
            }
            Ok(())
        }
        Err(SearchError::NoFeasibleUniform) => Err(Failure::Infeasible(
            "even the largest pipe type everywhere violates the bounds".into(),
        )),
        Err(e) => Err(anyhow!(e).into()),
    }
}

fn describe(verdict: &Verdict, net: &Network) -> String {
    let Some(v) = verdict.violation else {
        return "feasible".into();
    };
    let what = match v.kind {
        ViolationKind::NonConvergence => "hydraulic solver did not converge".to_string(),
        ViolationKind::Pressure { node, pressure } => {
            format!("pressure {pressure:.3} m at junction {}", net.node(node).label)
        }
        ViolationKind::Velocity { pipe, velocity } => {
            format!("velocity {velocity:.3} m/s in pipe {}", net.pipe(pipe).label)
        }
    };
    format!("{what} in period {}", v.period)
}

fn validate(a: ValidateArgs) -> Outcome {
    let problem = a.problem.load()?;
    let sol = match (&a.solution, a.uniform) {
        (Some(path), _) => parse_solution(&read(path)?, &problem.net).with_context(|| format!("{}", path.display()))?,
        (None, t) => Solution::uniform(problem.net.pipe_count(), t.unwrap_or(problem.cat.max_index())),
    };
    let eval = problem.evaluator()?;
    let cost = eval.cost(&sol).map_err(|e| anyhow!(e))?;
    let verdict = eval.validator().validate(&sol).map_err(|e| anyhow!(e))?;
    println!(
        "{} (cost {cost}, {} periods simulated)",
        describe(&verdict, &problem.net),
        verdict.periods_simulated
    );
    if verdict.is_feasible() {
        Ok(())
    } else {
        Err(Failure::Infeasible(describe(&verdict, &problem.net)))
    }
}

fn bruteforce(a: BruteforceArgs) -> Outcome {
    let problem = a.problem.load()?;
    let eval = problem.evaluator()?;
    match brute_force_optimum(&eval, a.limit) {
        Ok(best) => {
            println!("optimal cost {}", best.cost);
            write_solution(&best.solution, &problem.net, io::stdout().lock()).context("writing solution")?;
            if let Some(path) = &a.solution_out {
                save_solution(path, &best.solution, &problem.net)?;
            }
            Ok(())
        }
        Err(SearchError::Infeasible) => Err(Failure::Infeasible("no assignment meets the bounds".into())),
        Err(e) => Err(anyhow!(e).into()),
    }
}

fn bench(a: BenchArgs) -> Outcome {
    let text = read(&a.plan)?;
    let mut plan: ExperimentPlan = toml::from_str(&text).with_context(|| format!("{}", a.plan.display()))?;
    plan.rebase(a.plan.parent().unwrap_or(Path::new(".")));
    if let Some(jobs) = a.jobs {
        plan.jobs = jobs;
    }
    if let Some(out) = a.out {
        plan.output = Some(out);
    }
    let records = run_experiment(&plan).map_err(|e| anyhow!(e))?;
    let mut sink: Box<dyn Write> = match &plan.output {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    for r in &records {
        write_run_record(r, &mut sink).context("writing records")?;
    }
    sink.flush().context("writing records")?;
    let failed = records.iter().filter(|r| r.status != RunStatus::Ok).count();
    eprintln!("{} runs, {failed} without a solution", records.len());
    Ok(())
}

fn summarize_records(a: SummarizeArgs) -> Outcome {
    if a.records.is_empty() {
        return Err(anyhow!("no record files given").into());
    }
    let mut records = Vec::new();
    for path in &a.records {
        let file = File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
        records.extend(read_run_records(BufReader::new(file)).with_context(|| format!("{}", path.display()))?);
    }
    let summary = summarize(&records, a.baseline.as_deref()).map_err(|e| anyhow!(e))?;
    let mut out = io::stdout().lock();
    let w = &mut out;
    writeln!(w, "instance\tlimit_s\tvariant\truns\tbest\taverage\tdeviation_pct").context("writing")?;
    for c in &summary.cells {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{:.2}\t{:.3}",
            c.instance_id, c.time_limit_s, c.variant, c.runs, c.best_cost, c.average_cost, c.average_deviation_pct
        )
        .context("writing")?;
    }
    if !summary.gains.is_empty() {
        writeln!(w).context("writing")?;
        writeln!(
            w,
            "variant\tbaseline\tlimit_s\tinstances\tgain_best_pct\tgain_average_pct"
        )
        .context("writing")?;
        for g in &summary.gains {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{:.3}\t{:.3}",
                g.variant, g.baseline, g.time_limit_s, g.instances, g.best_gain_pct, g.average_gain_pct
            )
            .context("writing")?;
        }
    }
    for note in &summary.notes {
        eprintln!("note: {note}");
    }
    Ok(())
}
