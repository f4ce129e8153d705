use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use crib_core::harness::{failure_counts, report, run_suite, verify_suite};
use crib_core::{Agent, CanvasSize, DomainKind, Results, Suite, DEFAULT_BUDGET};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "crib", version, about = "Generate, verify and run creative invention benchmark suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a suite.
    Gen {
        /// A domain name or `all`.
        #[arg(long, default_value = "all")]
        domain: String,
        /// Problems per domain.
        #[arg(long, default_value_t = 400)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Canvas for painting and photobash, as WxH.
        #[arg(long, default_value_t = CanvasSize::DEFAULT)]
        size: CanvasSize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check solvability, invention necessity, sizes, ordering and determinism.
    Verify {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value_t = default_parallel())]
        parallel: usize,
    },
    /// Run an agent over a suite and write a results file.
    Run(RunArgs),
    /// Print a score table from one or more results files.
    Report {
        #[arg(long, required = true, num_args = 1..)]
        results: Vec<PathBuf>,
        #[arg(long)]
        markdown: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    suite: PathBuf,
    /// null, random, ga100, ga1000, oracle or uncreative-max.
    #[arg(long)]
    agent: String,
    /// Score calls allowed per problem.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = default_parallel())]
    parallel: usize,
    #[arg(long)]
    out: PathBuf,
    /// Skip verifying the suite first.
    #[arg(long)]
    no_verify: bool,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long)]
    parents: Option<usize>,
    #[arg(long)]
    children: Option<usize>,
    #[arg(long)]
    invent_rate: Option<f64>,
}

fn default_parallel() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_domains(s: &str) -> Result<Vec<DomainKind>> {
    if s == "all" {
        return Ok(DomainKind::ALL.to_vec());
    }
    s.split(',')
        .map(|d| d.trim().parse::<DomainKind>().map_err(anyhow::Error::msg))
        .collect()
}

fn agent_from(args: &RunArgs) -> Result<Agent> {
    let mut agent: Agent = args.agent.parse().map_err(anyhow::Error::msg)?;
    let overrides = [
        args.population.is_some(),
        args.iterations.is_some(),
        args.mutation_rate.is_some(),
        args.parents.is_some(),
        args.children.is_some(),
        args.invent_rate.is_some(),
    ];
    if let Agent::Ga(cfg) = &mut agent {
        cfg.population = args.population.unwrap_or(cfg.population);
        cfg.iterations = args.iterations.unwrap_or(cfg.iterations);
        cfg.mutation_rate = args.mutation_rate.unwrap_or(cfg.mutation_rate);
        cfg.parents_selected = args.parents.unwrap_or(cfg.parents_selected);
        cfg.children_per_iteration = args.children.unwrap_or(cfg.children_per_iteration);
        cfg.invent_rate = args.invent_rate.unwrap_or(cfg.invent_rate);
        cfg.validate().map_err(anyhow::Error::msg)?;
    } else if overrides.iter().any(|&o| o) {
        bail!("GA options only apply to ga100 and ga1000");
    }
    Ok(agent)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen {
            domain,
            count,
            seed,
            size,
            out,
        } => {
            let domains = parse_domains(&domain)?;
            let suite = Suite::generate(&domains, seed, count, size).context("generating suite")?;
            suite.write(&out).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} problems to {}", suite.problems.len(), out.display());
        }
        Command::Verify { suite, parallel } => {
            let rep = verify_suite(&suite, parallel).with_context(|| format!("reading {}", suite.display()))?;
            for f in &rep.failures {
                println!("FAIL {} [{}] {}", f.problem, f.check, f.detail);
            }
            if rep.passed() {
                println!("ok: {} problems pass every check", rep.problems);
            } else {
                let counts: Vec<String> = failure_counts(&rep)
                    .into_iter()
                    .map(|(k, n)| format!("{k}: {n}"))
                    .collect();
                println!("{} failures ({})", rep.failures.len(), counts.join(", "));
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Run(args) => {
            let agent = agent_from(&args)?;
            if !args.no_verify {
                let rep = verify_suite(&args.suite, args.parallel)?;
                if !rep.passed() {
                    bail!(
                        "suite fails verification ({} failures); run `crib verify` or pass --no-verify",
                        rep.failures.len()
                    );
                }
            }
            let suite = Suite::read(&args.suite).with_context(|| format!("reading {}", args.suite.display()))?;
            let results = run_suite(&suite, &agent, args.budget, args.parallel)?;
            std::fs::write(&args.out, results.to_json()).with_context(|| format!("writing {}", args.out.display()))?;
            print!("{}", report(std::slice::from_ref(&results), false));
        }
        Command::Report { results, markdown } => {
            let all = results
                .iter()
                .map(|p| {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    Ok(Results::from_json(&text)?)
                })
                .collect::<Result<Vec<_>>>()?;
            print!("{}", report(&all, markdown));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
