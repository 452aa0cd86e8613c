use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use grr_cli::commands::{self, BuildOptions};
use grr_cli::service::{self, TeleopService, DEFAULT_TICK_RATE};
use grr_core::io::{load_roadmap, save_roadmap};

#[derive(Parser)]
#[command(name = "grr", version, about = "Global redundancy resolution roadmaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a roadmap over a grid task graph.
    Build {
        /// Robot spec file or built-in robot name.
        robot: String,
        /// Box as mins then maxes: x0,y0,x1,y1 or x0,y0,z0,x1,y1,z1.
        #[arg(long, allow_hyphen_values = true)]
        workspace: Option<String>,
        /// Cells per axis, e.g. 36,36.
        #[arg(long)]
        resolution: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Seed from one random configuration instead of the seed cycle.
        #[arg(long)]
        single_seed: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Recompute roadmap metrics and re-verify a sample of edges.
    Eval {
        roadmap: PathBuf,
        #[arg(long, default_value_t = 500)]
        sample: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the teleoperation benchmark.
    Bench {
        roadmap: PathBuf,
        /// Comma-separated task kinds, or "all".
        #[arg(long, default_value = "all")]
        tasks: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value = "expansion-grr,newton-ik")]
        solvers: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report file (JSON).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Start the websocket teleoperation service.
    Serve {
        roadmap: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = DEFAULT_TICK_RATE)]
        tick_rate: f64,
    },
    /// Resolve one task point to a configuration.
    Resolve {
        roadmap: PathBuf,
        /// x,y or x,y,z
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build {
            robot,
            workspace,
            resolution,
            k,
            c,
            epsilon,
            single_seed,
            seed,
            output,
        } => {
            let model = commands::load_model(&robot)?;
            let opts = BuildOptions {
                workspace: workspace.as_deref().map(commands::parse_workspace).transpose()?,
                resolution: resolution.as_deref().map(commands::parse_list).transpose()?,
                k,
                c,
                epsilon,
                single_seed,
                seed,
            };
            let start = Instant::now();
            let (graph, roadmap) = commands::build(&model, &opts)?;
            let secs = start.elapsed().as_secs_f64();
            save_roadmap(&output, &model, &graph, &roadmap).with_context(|| format!("writing {}", output.display()))?;
            println!("{}", commands::quality_header());
            println!("{}", commands::quality_row(&model.name, &graph, &roadmap, &model, Some(secs))?);
        }
        Command::Eval { roadmap, sample, seed } => {
            let loaded = load_roadmap(&roadmap, None).with_context(|| format!("loading {}", roadmap.display()))?;
            println!("{}", commands::quality_header());
            println!(
                "{}",
                commands::quality_row(&loaded.model.name, &loaded.graph, &loaded.roadmap, &loaded.model, None)?
            );
            let check = commands::verify_edges(&loaded, sample, seed);
            println!("re-verified edges: {}/{} continuous", check.passed, check.sampled);
            anyhow::ensure!(check.passed == check.sampled, "some resolved edges failed the continuity check");
        }
        Command::Bench {
            roadmap,
            tasks,
            trials,
            solvers,
            seed,
            output,
        } => {
            let tasks = commands::parse_tasks(&tasks)?;
            let solvers = commands::parse_solvers(&solvers)?;
            let ctx = load_roadmap(&roadmap, None)?.into_context()?;
            let report = commands::bench(&ctx, &tasks, &solvers, trials, seed)?;
            print!("{}", report.summary_table());
            if let Some(path) = output {
                let text = serde_json::to_string_pretty(&report)?;
                std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Serve {
            roadmap,
            port,
            host,
            tick_rate,
        } => {
            let loaded = load_roadmap(&roadmap, None)?;
            let model = loaded.model.clone();
            let svc = Arc::new(TeleopService::new(&model, loaded.into_context()?, tick_rate)?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = service::bind(&host, port)
                    .await
                    .with_context(|| format!("cannot listen on {host}:{port}"))?;
                eprintln!("teleop service on ws://{}/ws", listener.local_addr()?);
                service::serve(listener, svc).await?;
                Ok::<_, anyhow::Error>(())
            })?;
        }
        Command::Resolve { roadmap, point } => {
            let ctx = load_roadmap(&roadmap, None)?.into_context()?;
            let p = commands::parse_point(&ctx, &point)?;
            let q = commands::resolve_point(&ctx, &p)?;
            println!("{}", commands::format_configuration(&q));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
