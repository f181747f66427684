//! `boppana`: generate instances, solve and certify minimum bisections,
//! run adversary pipelines and parameter sweeps.
//!
//! Exit codes: 0 certified optimum (or success for non-solving commands),
//! 2 solver failure, 1 usage or IO error.

use boppana::experiments::{
    self, emit_plot_script, run_subcritical_sweep, run_threshold_sweep, subcritical_csv, threshold_csv, SweepConfig,
};
use boppana::generators::{hypercube, planted_bisection, planted_regular, PlantedInstance};
use boppana::oracle::brute_force_bw;
use boppana::par::Execution;
use boppana::sdp::duality_witness;
use boppana::{BisectionVector, Error, Graph, SolveOptions, SolveReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "boppana", version, about = "Certified minimum bisection via the spectral lower bound")]
struct Cli {
    /// Run trials and the oracle on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Planted,
    PlantedRegular,
    Hypercube,
    Fixture,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    k_cap: Option<usize>,
}

impl SolverArgs {
    fn options(&self, base: SolveOptions) -> SolveOptions {
        SolveOptions {
            seed: self.seed,
            max_iters: self.max_iters.unwrap_or(base.max_iters),
            restarts: self.restarts.unwrap_or(base.restarts),
            k_cap: self.k_cap.unwrap_or(base.k_cap),
            ..base
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance; writes <out>.edges and <out>.json.
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        b: Option<usize>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output prefix; the edge list goes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximize the bound and try to certify a bisection.
    Solve {
        graph: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Drop the ascent trace from the report.
        #[arg(long)]
        no_trace: bool,
    },
    /// Solve, then build the primal, rank-one and dual SDP certificates.
    Certify {
        graph: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply sampled monotone moves against a certified split and re-solve.
    Adversary {
        graph: PathBuf,
        #[arg(long, default_value_t = 10)]
        moves: usize,
        /// Seed for the move sampler (the solver uses --seed).
        #[arg(long, default_value_t = 1)]
        move_seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive bisection width (n ≤ 28).
    Oracle {
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certified-recovery rate over (alpha, beta) cells, p = alpha ln n / n.
    SweepThreshold {
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cells as alpha:beta pairs, comma separated.
        #[arg(long, default_value = "16:1,9:1,4:1,2:1")]
        cells: String,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fail rate over (mean degree, gamma) cells in the subcritical regime.
    SweepSubcritical {
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cells as degree:gamma pairs, comma separated.
        #[arg(long, default_value = "10:0.5,10:2,10:8")]
        cells: String,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn a sweep CSV into a matplotlib script.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Image path written by the script.
        #[arg(long, default_value = "plot.png")]
        image: String,
    },
}

enum Outcome {
    Done,
    Certified(bool),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match run(cli.cmd, exec) {
        Ok(Outcome::Done | Outcome::Certified(true)) => ExitCode::SUCCESS,
        Ok(Outcome::Certified(false)) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Reads an edge list, or an instance JSON (by extension) with its planted split.
fn load(path: &Path) -> Result<(Graph, Option<BisectionVector>), Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let inst = PlantedInstance::from_json(&text)?;
        return Ok((inst.graph, Some(inst.planted)));
    }
    Ok((Graph::from_edge_list(&text)?, None))
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T, Error> {
    v.ok_or_else(|| Error::InvalidParameter(format!("--{flag} is required for this family")))
}

fn parse_cells(text: &str) -> Result<Vec<(f64, f64)>, Error> {
    text.split(',')
        .filter(|c| !c.trim().is_empty())
        .map(|c| {
            let (a, b) = c.split_once(':').ok_or_else(|| Error::InvalidParameter(format!("cell {c:?} is not a:b")))?;
            let f = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::InvalidParameter(format!("cell {c:?}: {e}")));
            Ok((f(a)?, f(b)?))
        })
        .collect()
}

fn summary(rep: &SolveReport) -> serde_json::Value {
    json!({
        "status": rep.status,
        "h_hat": rep.h_hat,
        "best_cut": rep.best_cut,
        "multiplicity": rep.multiplicity,
        "bisections": rep.bisections.len(),
    })
}

fn run(cmd: Cmd, exec: Execution) -> Result<Outcome, Error> {
    match cmd {
        Cmd::Gen { family, n, p, q, r, b, k, name, seed, out } => {
            let (g, doc) = match family {
                FamilyArg::Planted => {
                    let inst = planted_bisection(need(n, "n")?, need(p, "p")?, need(q, "q")?, seed)?;
                    (inst.graph.clone(), inst.to_json())
                }
                FamilyArg::PlantedRegular => {
                    let inst = planted_regular(need(n, "n")?, need(r, "r")?, need(b, "b")?, seed)?;
                    (inst.graph.clone(), inst.to_json())
                }
                FamilyArg::Hypercube => {
                    let k = need(k, "k")?;
                    let g = hypercube(k)?;
                    (g, pretty(&json!({ "family": "hypercube", "k": k })))
                }
                FamilyArg::Fixture => {
                    let name = need(name, "name")?;
                    let (g, y) = experiments::fixture(&name)?;
                    (g, pretty(&json!({ "family": "fixture", "name": name, "reference": y })))
                }
            };
            match out {
                Some(prefix) => {
                    write_out(Some(&prefix.with_extension("edges")), &g.to_edge_list())?;
                    write_out(Some(&prefix.with_extension("json")), &doc)?;
                    println!("n={} m={} -> {}.edges", g.n(), g.m(), prefix.display());
                }
                None => write_out(None, &g.to_edge_list())?,
            }
            Ok(Outcome::Done)
        }
        Cmd::Solve { graph, solver, out, no_trace } => {
            let (g, _) = load(&graph)?;
            let mut rep = boppana::solve(&g, &solver.options(SolveOptions::default()))?;
            if no_trace {
                rep.trace.clear();
            }
            write_out(out.as_deref(), &(rep.to_json() + "\n"))?;
            Ok(Outcome::Certified(rep.certified()))
        }
        Cmd::Certify { graph, solver, out } => {
            let (g, _) = load(&graph)?;
            let rep = boppana::solve(&g, &solver.options(SolveOptions::default()))?;
            let witness = duality_witness(&g, &rep.d_best, &rep.best_bisection)?;
            let doc = json!({ "solve": summary(&rep), "certificates": witness });
            write_out(out.as_deref(), &pretty(&doc))?;
            Ok(Outcome::Certified(rep.certified()))
        }
        Cmd::Adversary { graph, moves, move_seed, solver, out } => {
            let (g, _) = load(&graph)?;
            let opts = solver.options(SolveOptions::default());
            let before = boppana::solve(&g, &opts)?;
            let y = if before.certified() {
                before.best_bisection.clone()
            } else if g.n() <= boppana::oracle::ORACLE_MAX_N {
                brute_force_bw(&g)?.optimal_bisections[0].clone()
            } else {
                return Err(Error::Precondition("instance is not certified and too large for the oracle".into()));
            };
            let outcome = experiments::adversary_run(&g, &y, before, moves, move_seed, &opts)?;
            let doc = json!({
                "before": summary(&outcome.before),
                "moves": outcome.sample.moves,
                "removed": outcome.sample.removed(),
                "added": outcome.sample.added(),
                "exhausted": outcome.sample.exhausted,
                "predicted_bw": outcome.predicted_bw(),
                "updated_g": outcome.updated_g,
                "after": outcome.after,
            });
            write_out(out.as_deref(), &pretty(&doc))?;
            Ok(Outcome::Certified(outcome.after.certified()))
        }
        Cmd::Oracle { graph, out } => {
            let (g, _) = load(&graph)?;
            let res = boppana::oracle::brute_force_bw_with(&g, exec)?;
            write_out(out.as_deref(), &pretty(&res))?;
            Ok(Outcome::Done)
        }
        Cmd::SweepThreshold { n, trials, seed, cells, max_iters, format, out } => {
            let mut cfg = SweepConfig::new(n, trials, seed);
            cfg.exec = exec;
            if let Some(it) = max_iters {
                cfg.solver.max_iters = it;
            }
            let rows = run_threshold_sweep(&cfg, &parse_cells(&cells)?)?;
            let text = match format {
                Format::Csv => threshold_csv(&rows),
                Format::Json => pretty(&rows),
            };
            write_out(out.as_deref(), &text)?;
            Ok(Outcome::Done)
        }
        Cmd::SweepSubcritical { n, trials, seed, cells, max_iters, format, out } => {
            let mut cfg = SweepConfig::new(n, trials, seed);
            cfg.exec = exec;
            if let Some(it) = max_iters {
                cfg.solver.max_iters = it;
            }
            let rows = run_subcritical_sweep(&cfg, &parse_cells(&cells)?)?;
            let text = match format {
                Format::Csv => subcritical_csv(&rows),
                Format::Json => pretty(&rows),
            };
            write_out(out.as_deref(), &text)?;
            Ok(Outcome::Done)
        }
        Cmd::Plot { csv, out, image } => {
            let text = std::fs::read_to_string(&csv).map_err(|e| Error::Io(format!("{}: {e}", csv.display())))?;
            write_out(out.as_deref(), &emit_plot_script(&text, &image)?)?;
            Ok(Outcome::Done)
        }
    }
}
