use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{CommandFactory, Parser, Subcommand};

use sdk2tree::cli::bench::{bench_file, BenchConfig, BenchKind};
use sdk2tree::cli::run_loop;
use sdk2tree::dyngraph::{DynamicGraph, DEFAULT_ARITY, DEFAULT_EPSILON};
use sdk2tree::genmodel::{generate_to_file, meta_path, GeneratorConfig};

#[derive(Parser)]
#[command(name = "sdk2tree", version, about = "Semi-dynamic k2-tree graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Copy)]
struct GraphArgs {
    /// Capacity schedule exponent; the collection has ceil(2/epsilon) slots.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// k2-tree arity.
    #[arg(long, default_value_t = DEFAULT_ARITY)]
    k: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Read instructions from stdin (a/d/q/n/r/s/w/x).
    Run {
        #[command(flatten)]
        graph: GraphArgs,
        /// Start from a saved collection instead of an empty graph.
        #[arg(long)]
        load: Option<PathBuf>,
    },
    /// Time one operation over an edge-list file and print a key=value report.
    Bench {
        /// add, delete, list, query or static
        kind: BenchKind,
        dataset: PathBuf,
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fraction of edges or vertices sampled by delete, list and query.
        #[arg(long, default_value_t = 0.5)]
        sample: f64,
    },
    /// Write a partial duplication model graph and its .meta file.
    Generate {
        #[arg(long)]
        vertices: u64,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command()
        .error(clap::error::ErrorKind::ValueValidation, msg)
        .exit()
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run { graph, load } => {
            let mut g = match load {
                Some(path) => {
                    let bytes = std::fs::read(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    DynamicGraph::load(&bytes)
                        .with_context(|| format!("loading {}", path.display()))?
                }
                None => {
                    DynamicGraph::new(graph.epsilon, graph.k).unwrap_or_else(|e| usage_error(e))
                }
            };
            let stdin = io::stdin().lock();
            let mut out = BufWriter::new(io::stdout().lock());
            run_loop(&mut g, stdin, &mut out, &mut io::stderr())?;
        }
        Command::Bench {
            kind,
            dataset,
            graph,
            seed,
            sample,
        } => {
            if !(0.0..=1.0).contains(&sample) {
                usage_error(format!("--sample must be in [0, 1], got {sample}"));
            }
            if let Err(e) = DynamicGraph::new(graph.epsilon, graph.k) {
                usage_error(e);
            }
            let cfg = BenchConfig {
                epsilon: graph.epsilon,
                k: graph.k,
                seed,
                sample,
            };
            let report = bench_file(kind, &dataset, &cfg)
                .with_context(|| format!("benchmarking {}", dataset.display()))?;
            println!("{report}");
        }
        Command::Generate {
            vertices,
            p,
            seed,
            out,
        } => {
            let cfg = GeneratorConfig::new(vertices, p, seed).unwrap_or_else(|e| usage_error(e));
            let edges = generate_to_file(&cfg, &out)
                .with_context(|| format!("writing {}", out.display()))?;
            eprintln!(
                "wrote {} edges over {} vertices to {} (+ {})",
                edges.len(),
                vertices,
                out.display(),
                meta_path(&out).display()
            );
        }
    }
    Ok(())
}
