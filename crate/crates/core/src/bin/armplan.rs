use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use armplan::bench::{de_bench, BenchFunction};
use armplan::montecarlo::{default_template, run_trials, summarize, MonteCarloConfig};
use armplan::output::{format_sig, write_trace, write_trajectory};
use armplan::planner::plan;
use armplan::scenario::{load_scenario, ScenarioFile};

#[derive(Parser)]
#[command(
    name = "armplan",
    version,
    about = "Energy-aware DE path planning for a 3-link arm"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one scenario and write trajectory.csv and trace.csv.
    Plan {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Overrides the DE seed from the scenario file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run seeded random trials and report success statistics.
    Montecarlo {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scenario file providing the arm, start pose, thresholds and DE settings.
        #[arg(long)]
        template: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        obstacles: usize,
        /// Write the scenario file of every failed trial into this directory.
        #[arg(long)]
        dump_failures: Option<PathBuf>,
    },
    /// Run DE on a standard test function.
    DeBench {
        #[arg(long, default_value = "sphere")]
        function: String,
        #[arg(long, default_value_t = 6)]
        dim: usize,
        #[arg(long, default_value_t = 150)]
        np: usize,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.8)]
        f: f64,
        #[arg(long, default_value_t = 0.96)]
        cr: f64,
    },
}

fn run(cli: Cli) -> armplan::Result<()> {
    match cli.command {
        Command::Plan {
            scenario,
            out_dir,
            seed,
        } => {
            let mut loaded = load_scenario(&scenario)?;
            if let Some(seed) = seed {
                loaded.de.seed = seed;
            }
            let traj = plan(&loaded.scenario, &loaded.arm, &loaded.de)?;
            std::fs::create_dir_all(&out_dir)?;
            write_trajectory(&traj, out_dir.join("trajectory.csv"))?;
            write_trace(&traj, out_dir.join("trace.csv"))?;
            println!(
                "outcome={:?} steps={} final_distance={} energy={}",
                traj.outcome,
                traj.steps(),
                format_sig(traj.final_distance()),
                format_sig(traj.total_energy())
            );
        }
        Command::Montecarlo {
            trials,
            seed,
            template,
            obstacles,
            dump_failures,
        } => {
            let template = match template {
                Some(path) => load_scenario(path)?,
                None => default_template(),
            };
            let config = MonteCarloConfig {
                trials,
                seed,
                obstacle_count: obstacles,
                ..MonteCarloConfig::default()
            };
            let started = Instant::now();
            let results = run_trials(&config, &template)?;
            let elapsed = started.elapsed();
            let s = &summarize(&results);
            if let Some(dir) = dump_failures {
                std::fs::create_dir_all(&dir)?;
                for r in results.iter().filter(|r| !r.success()) {
                    if let (Some(scenario), Some(de)) = (&r.scenario, r.de) {
                        ScenarioFile::from_domain(scenario, &template.arm, &de)
                            .write(dir.join(format!("trial_{:04}.toml", r.index)))?;
                    }
                }
            }
            println!(
                "trials={} successes={} errors={}",
                s.trials, s.successes, s.errors
            );
            println!("success_rate={}", format_sig(s.success_rate));
            println!("mean_final_distance={}", format_sig(s.mean_final_distance));
            println!("mean_step_energy={}", format_sig(s.mean_step_energy));
            println!("threat_rate={}", format_sig(s.threat_rate));
            println!("runtime_s={:.3}", elapsed.as_secs_f64());
        }
        Command::DeBench {
            function,
            dim,
            np,
            iters,
            seed,
            f,
            cr,
        } => {
            let function: BenchFunction = function.parse()?;
            let mut params = function.params(dim, seed);
            params.population_size = np;
            params.max_iterations = iters;
            params.scale_factor = f;
            params.crossover_prob = cr;
            let r = de_bench(function, &params)?;
            println!(
                "function={function} dim={dim} best_cost={}",
                format_sig(r.best_cost)
            );
            println!(
                "best_vector={}",
                r.best_vector
                    .iter()
                    .map(|v| format_sig(*v))
                    .collect::<Vec<_>>()
                    .join(",")
            );
            println!("evaluations={}", r.evaluations);
            println!("generation,best_cost");
            for (g, c) in r.history.iter().enumerate() {
                println!("{},{}", g + 1, format_sig(*c));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
