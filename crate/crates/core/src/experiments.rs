//! Seeded trial batches: single-family runs, the adversary pipeline and the
//! two parameter sweeps, with CSV and plot-script output.
//!
//! Trial `i` of a batch uses seed `base_seed + i` (wrapping) for the
//! generator, the move sampler and the solver restarts. Records are
//! returned in trial order whatever the execution mode, so CSV output is
//! byte-identical across runs with the same configuration.

use crate::adversary::{apply_monotone_moves, sample_monotone_moves, MoveSample};
use crate::error::{Error, Result};
use crate::generators::{hypercube, planted_bisection, planted_regular};
use crate::graph::{cut_width, BisectionVector, Graph};
use crate::par::{self, Execution};
use crate::rng::splitmix64;
use crate::solver::{eval_g, solve, SolveOptions, SolveReport, Status};
use crate::structure::{fixtures, update_correction};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::time::Instant;

pub const THRESHOLD_SCHEMA: &str = "# boppana threshold-sweep v1";
pub const SUBCRITICAL_SCHEMA: &str = "# boppana subcritical-sweep v1";
pub const THRESHOLD_HEADER: &str = "alpha,beta,n,trials,certified_rate,recovered_rate,mean_h_hat,mean_cut,skipped";
pub const SUBCRITICAL_HEADER: &str = "mean_degree,gamma,c,n,trials,p,q,fail_rate,certified_rate,mean_h_hat,mean_cut,skipped";

/// Seed of trial `index`.
pub fn trial_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}

fn move_seed(seed: u64) -> u64 {
    splitmix64(seed ^ 0x6d6f_7665)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Planted { n: usize, p: f64, q: f64 },
    PlantedRegular { n: usize, r: usize, b: usize },
    Hypercube { k: u32 },
    Adversarial { n: usize, p: f64, q: f64, moves: usize },
    Fixture { name: String },
}

pub const FIXTURES: [&str; 5] = ["double_k4_path", "c4_plus_isolated", "ladder_2x2", "balanced_mismatch", "hypercube3"];

/// Graph of a named fixture with its reference split, if it has one.
pub fn fixture(name: &str) -> Result<(Graph, Option<BisectionVector>)> {
    match name {
        "double_k4_path" => {
            let (g, y, _) = fixtures::double_k4_path();
            Ok((g, Some(y)))
        }
        "c4_plus_isolated" => Ok((fixtures::c4_plus_isolated(), None)),
        "ladder_2x2" => {
            let (g, y, _) = fixtures::ladder_2x2();
            Ok((g, Some(y)))
        }
        "balanced_mismatch" => {
            let (g, y, _) = fixtures::balanced_mismatch();
            Ok((g, Some(y)))
        }
        "hypercube3" => Ok((hypercube(3)?, Some(crate::generators::hypercube_dimension_cut(3, 0)))),
        other => Err(Error::InvalidParameter(format!("unknown fixture {other:?}; known: {}", FIXTURES.join(", ")))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: Family,
    pub trials: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub solver: SolveOptions,
    #[serde(default)]
    pub exec: Execution,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        self.solver.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryRecord {
    pub moves: usize,
    pub removed: usize,
    pub added: usize,
    pub exhausted: bool,
    pub pre_bw: usize,
    pub post_status: Status,
    pub post_best_cut: usize,
    /// `g(G′, d′)` for the correction carried through the moves.
    pub updated_g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub h_hat: f64,
    pub best_cut: usize,
    pub status: Status,
    pub planted_cut: Option<usize>,
    pub recovered_planted: Option<bool>,
    pub adversary: Option<AdversaryRecord>,
    pub wall_ms: u64,
}

/// Before/after view of one adversary run on a certified instance.
#[derive(Clone, Debug)]
pub struct AdversaryOutcome {
    pub before: SolveReport,
    pub sample: MoveSample,
    pub graph: Graph,
    pub after: SolveReport,
    pub updated_d: Vec<f64>,
    pub updated_g: f64,
}

impl AdversaryOutcome {
    /// `bw(G) − #removals`, exact when both solves certify.
    pub fn predicted_bw(&self) -> usize {
        self.before.best_cut - self.sample.removed()
    }
}

/// Samples `moves` monotone edits against `y`, applies them and re-solves.
/// `y` should be an optimal split of `g`.
pub fn adversary_run(
    g: &Graph,
    y: &BisectionVector,
    before: SolveReport,
    moves: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<AdversaryOutcome> {
    let sample = sample_monotone_moves(g, y, moves, seed)?;
    let graph = apply_monotone_moves(g, y, &sample.moves)?;
    let after = solve(&graph, opts)?;
    let updated_d = update_correction(g, y, &before.d_best, &sample.moves)?;
    let (updated_g, _) = eval_g(&graph, &updated_d)?;
    Ok(AdversaryOutcome { before, sample, graph, after, updated_d, updated_g })
}

fn record(trial: usize, seed: u64, g: &Graph, rep: &SolveReport, planted: Option<&BisectionVector>, started: Instant) -> Result<TrialRecord> {
    let planted_cut = planted.map(|y| cut_width(g, y)).transpose()?;
    Ok(TrialRecord {
        trial,
        seed,
        n: g.n(),
        m: g.m(),
        h_hat: rep.h_hat,
        best_cut: rep.best_cut,
        status: rep.status,
        planted_cut,
        recovered_planted: planted.map(|y| rep.contains(y)),
        adversary: None,
        wall_ms: started.elapsed().as_millis() as u64,
    })
}

/// One trial of a family.
pub fn run_trial(family: &Family, trial: usize, base_seed: u64, solver: &SolveOptions) -> Result<TrialRecord> {
    let seed = trial_seed(base_seed, trial);
    let opts = SolveOptions { seed, ..solver.clone() };
    let started = Instant::now();
    match family {
        Family::Planted { n, p, q } => {
            let inst = planted_bisection(*n, *p, *q, seed)?;
            let rep = solve(&inst.graph, &opts)?;
            record(trial, seed, &inst.graph, &rep, Some(&inst.planted), started)
        }
        Family::PlantedRegular { n, r, b } => {
            let inst = planted_regular(*n, *r, *b, seed)?;
            let rep = solve(&inst.graph, &opts)?;
            record(trial, seed, &inst.graph, &rep, Some(&inst.planted), started)
        }
        Family::Hypercube { k } => {
            let g = hypercube(*k)?;
            let rep = solve(&g, &opts)?;
            record(trial, seed, &g, &rep, None, started)
        }
        Family::Fixture { name } => {
            let (g, y) = fixture(name)?;
            let rep = solve(&g, &opts)?;
            record(trial, seed, &g, &rep, y.as_ref(), started)
        }
        Family::Adversarial { n, p, q, moves } => {
            let inst = planted_bisection(*n, *p, *q, seed)?;
            let rep = solve(&inst.graph, &opts)?;
            if !rep.certified() {
                return record(trial, seed, &inst.graph, &rep, Some(&inst.planted), started);
            }
            // edits are made against a certified optimal split
            let y = rep.best_bisection.clone();
            let out = adversary_run(&inst.graph, &y, rep, *moves, move_seed(seed), &opts)?;
            let mut rec = record(trial, seed, &out.graph, &out.after, Some(&inst.planted), started)?;
            rec.adversary = Some(AdversaryRecord {
                moves: out.sample.moves.len(),
                removed: out.sample.removed(),
                added: out.sample.added(),
                exhausted: out.sample.exhausted,
                pre_bw: out.before.best_cut,
                post_status: out.after.status,
                post_best_cut: out.after.best_cut,
                updated_g: out.updated_g,
            });
            Ok(rec)
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    par::map_indexed(cfg.exec, cfg.trials, |i| run_trial(&cfg.family, i, cfg.base_seed, &cfg.solver)).into_iter().collect()
}

/// Trial records as JSON lines (includes wall-clock times).
pub fn records_jsonl(records: &[TrialRecord]) -> String {
    records.iter().map(|r| serde_json::to_string(r).expect("record serializes") + "\n").collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    pub trials: usize,
    pub base_seed: u64,
    #[serde(default = "sweep_solver")]
    pub solver: SolveOptions,
    #[serde(default)]
    pub exec: Execution,
}

/// Solver settings for sweeps: a shorter ascent, since failing trials
/// otherwise run to the iteration cap.
pub fn sweep_solver() -> SolveOptions {
    SolveOptions { max_iters: 60, stall_iters: 20, ..SolveOptions::default() }
}

impl SweepConfig {
    pub fn new(n: usize, trials: usize, base_seed: u64) -> Self {
        SweepConfig { n, trials, base_seed, solver: sweep_solver(), exec: Execution::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.n < 2 || self.n % 2 == 1 {
            return Err(Error::OddVertexCount(self.n));
        }
        self.solver.validate()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
struct Summary {
    certified_rate: f64,
    recovered_rate: f64,
    mean_h_hat: f64,
    mean_cut: f64,
}

fn planted_batch(cfg: &SweepConfig, p: f64, q: f64) -> Result<Summary> {
    let family = Family::Planted { n: cfg.n, p, q };
    let records: Vec<TrialRecord> = par::map_indexed(cfg.exec, cfg.trials, |i| run_trial(&family, i, cfg.base_seed, &cfg.solver))
        .into_iter()
        .collect::<Result<_>>()?;
    let t = records.len() as f64;
    let certified = records.iter().filter(|r| r.status == Status::CertifiedOptimum).count() as f64;
    let recovered = records.iter().filter(|r| r.status == Status::CertifiedOptimum && r.recovered_planted == Some(true)).count() as f64;
    Ok(Summary {
        certified_rate: certified / t,
        recovered_rate: recovered / t,
        mean_h_hat: records.iter().map(|r| r.h_hat).sum::<f64>() / t,
        mean_cut: records.iter().map(|r| r.best_cut as f64).sum::<f64>() / t,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub trials: usize,
    pub certified_rate: f64,
    /// Certified and the planted split is among the returned bisections.
    pub recovered_rate: f64,
    pub mean_h_hat: f64,
    pub mean_cut: f64,
    /// `p` or `q` fell outside `(0, 1)`; rates are NaN.
    pub skipped: bool,
}

/// `p = α ln n / n`, `q = β ln n / n`.
pub fn threshold_probabilities(alpha: f64, beta: f64, n: usize) -> (f64, f64) {
    let s = (n as f64).ln() / n as f64;
    (alpha * s, beta * s)
}

pub fn run_threshold_sweep(cfg: &SweepConfig, cells: &[(f64, f64)]) -> Result<Vec<ThresholdRow>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cells.len());
    for &(alpha, beta) in cells {
        let (p, q) = threshold_probabilities(alpha, beta, cfg.n);
        let inside = |x: f64| x > 0.0 && x < 1.0;
        let (s, skipped) = if inside(p) && inside(q) {
            (planted_batch(cfg, p, q)?, false)
        } else {
            (Summary { certified_rate: f64::NAN, recovered_rate: f64::NAN, mean_h_hat: f64::NAN, mean_cut: f64::NAN }, true)
        };
        rows.push(ThresholdRow {
            alpha,
            beta,
            n: cfg.n,
            trials: cfg.trials,
            certified_rate: s.certified_rate,
            recovered_rate: s.recovered_rate,
            mean_h_hat: s.mean_h_hat,
            mean_cut: s.mean_cut,
            skipped,
        });
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubcriticalRow {
    pub mean_degree: f64,
    pub gamma: f64,
    /// `√γ`: the constant `c` in `p − q = c·√(p ln n / n)`.
    pub c: f64,
    pub n: usize,
    pub trials: usize,
    pub p: f64,
    pub q: f64,
    pub fail_rate: f64,
    pub certified_rate: f64,
    pub mean_h_hat: f64,
    pub mean_cut: f64,
    pub skipped: bool,
}

/// `p = deg/n`, `q = p − √(p·γ·ln n / n)`.
pub fn subcritical_probabilities(mean_degree: f64, gamma: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let p = mean_degree / nf;
    (p, p - (p * gamma * nf.ln() / nf).sqrt())
}

pub fn run_subcritical_sweep(cfg: &SweepConfig, cells: &[(f64, f64)]) -> Result<Vec<SubcriticalRow>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cells.len());
    for &(mean_degree, gamma) in cells {
        if gamma < 0.0 {
            return Err(Error::InvalidParameter(format!("gamma must be nonnegative, got {gamma}")));
        }
        let (p, q) = subcritical_probabilities(mean_degree, gamma, cfg.n);
        let ok = q >= 0.0 && p > 0.0 && p < 1.0;
        let s = if ok {
            planted_batch(cfg, p, q)?
        } else {
            Summary { certified_rate: f64::NAN, recovered_rate: f64::NAN, mean_h_hat: f64::NAN, mean_cut: f64::NAN }
        };
        rows.push(SubcriticalRow {
            mean_degree,
            gamma,
            c: gamma.sqrt(),
            n: cfg.n,
            trials: cfg.trials,
            p,
            q,
            fail_rate: 1.0 - s.certified_rate,
            certified_rate: s.certified_rate,
            mean_h_hat: s.mean_h_hat,
            mean_cut: s.mean_cut,
            skipped: !ok,
        });
    }
    Ok(rows)
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.6}")
    }
}

pub fn threshold_csv(rows: &[ThresholdRow]) -> String {
    let mut out = format!("{THRESHOLD_SCHEMA}\n{THRESHOLD_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(r.alpha),
            num(r.beta),
            r.n,
            r.trials,
            num(r.certified_rate),
            num(r.recovered_rate),
            num(r.mean_h_hat),
            num(r.mean_cut),
            r.skipped
        );
    }
    out
}

pub fn subcritical_csv(rows: &[SubcriticalRow]) -> String {
    let mut out = format!("{SUBCRITICAL_SCHEMA}\n{SUBCRITICAL_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            num(r.mean_degree),
            num(r.gamma),
            num(r.c),
            r.n,
            r.trials,
            num(r.p),
            num(r.q),
            num(r.fail_rate),
            num(r.certified_rate),
            num(r.mean_h_hat),
            num(r.mean_cut),
            r.skipped
        );
    }
    out
}

const THRESHOLD_PLOT: &str = r#"
rows = [r for r in rows if r["skipped"] != "true"]
xs = [(math.sqrt(float(r["alpha"])) - math.sqrt(float(r["beta"]))) ** 2 for r in rows]
ys = [float(r["certified_rate"]) for r in rows]
order = sorted(range(len(xs)), key=lambda i: xs[i])
plt.plot([xs[i] for i in order], [ys[i] for i in order], "o-", label="certified rate")
plt.axvline(2.0, color="red", linestyle="--", label="threshold 2")
plt.xlabel("(sqrt(alpha) - sqrt(beta))^2")
plt.ylabel("certified rate")
plt.ylim(-0.05, 1.05)
plt.legend()
plt.savefig(OUT, dpi=150)
"#;

const SUBCRITICAL_PLOT: &str = r#"
rows = [r for r in rows if r["skipped"] != "true"]
for deg in sorted({r["mean_degree"] for r in rows}, key=float):
    sel = sorted((r for r in rows if r["mean_degree"] == deg), key=lambda r: float(r["gamma"]))
    plt.plot([float(r["gamma"]) for r in sel], [float(r["fail_rate"]) for r in sel], "o-", label="np = " + deg)
plt.xlabel("gamma")
plt.ylabel("fail rate")
plt.ylim(-0.05, 1.05)
plt.legend()
plt.savefig(OUT, dpi=150)
"#;

/// A standalone matplotlib script with the CSV embedded.
pub fn emit_plot_script(csv: &str, image: &str) -> Result<String> {
    let mut lines = csv.lines().filter(|l| !l.trim().is_empty());
    let mut header = lines.next().ok_or_else(|| Error::Empty("csv".into()))?;
    let mut schema = "";
    if header.starts_with('#') {
        schema = header;
        header = lines.next().ok_or_else(|| Error::Empty("csv has no header".into()))?;
    }
    let body: Vec<&str> = lines.collect();
    if body.is_empty() {
        return Err(Error::Empty("csv has no data rows".into()));
    }
    let plot = if header == THRESHOLD_HEADER {
        THRESHOLD_PLOT
    } else if header == SUBCRITICAL_HEADER {
        SUBCRITICAL_PLOT
    } else {
        return Err(Error::Parse { line: 1, msg: format!("unrecognized csv header {header:?}") });
    };
    let mut data = String::new();
    for l in std::iter::once(header).chain(body) {
        data.push_str(l);
        data.push('\n');
    }
    let mut out = String::from("#!/usr/bin/env python3\n");
    if !schema.is_empty() {
        let _ = writeln!(out, "# data: {}", schema.trim_start_matches('#').trim());
    }
    out.push_str("import csv\nimport io\nimport math\n\nimport matplotlib\n\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n");
    let _ = writeln!(out, "OUT = {image:?}");
    let _ = writeln!(out, "DATA = \"\"\"\\\n{data}\"\"\"");
    out.push_str("rows = list(csv.DictReader(io.StringIO(DATA)))\n");
    out.push_str(plot);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_offsets() {
        assert_eq!(trial_seed(10, 3), 13);
        assert_eq!(trial_seed(u64::MAX, 1), 0);
    }

    #[test]
    fn probabilities() {
        let (p, q) = threshold_probabilities(16.0, 1.0, 300);
        assert!((p - 16.0 * 300f64.ln() / 300.0).abs() < 1e-15 && q < p);
        let (p, q) = subcritical_probabilities(10.0, 0.5, 500);
        assert!((p - 0.02).abs() < 1e-15);
        assert!(((p - q) * 500.0 - (10.0 * 0.5 * 500f64.ln()).sqrt()).abs() < 1e-9);
        let (_, q) = subcritical_probabilities(2.0, 50.0, 100);
        assert!(q < 0.0);
    }

    #[test]
    fn skipped_cells() {
        let cfg = SweepConfig::new(20, 2, 0);
        let rows = run_threshold_sweep(&cfg, &[(1000.0, 1.0)]).unwrap();
        assert!(rows[0].skipped && rows[0].certified_rate.is_nan());
        let rows = run_subcritical_sweep(&cfg, &[(2.0, 50.0)]).unwrap();
        assert!(rows[0].skipped);
        assert!(subcritical_csv(&rows).lines().nth(2).unwrap().ends_with("true"));
    }

    #[test]
    fn sweep_csv_is_reproducible() {
        let mut cfg = SweepConfig::new(24, 3, 5);
        let a = threshold_csv(&run_threshold_sweep(&cfg, &[(8.0, 1.0), (2.0, 2.0)]).unwrap());
        cfg.exec = Execution::Sequential;
        let b = threshold_csv(&run_threshold_sweep(&cfg, &[(8.0, 1.0), (2.0, 2.0)]).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.lines().nth(1), Some(THRESHOLD_HEADER));
        assert_eq!(a.lines().count(), 4);
    }

    #[test]
    fn fixture_trials() {
        let solver = SolveOptions::default();
        let rec = run_trial(&Family::Fixture { name: "double_k4_path".into() }, 0, 0, &solver).unwrap();
        assert_eq!((rec.status, rec.best_cut), (Status::Fail, 1));
        let rec = run_trial(&Family::Fixture { name: "hypercube3".into() }, 0, 0, &solver).unwrap();
        assert_eq!(rec.status, Status::CertifiedOptimum);
        assert!(fixture("nope").is_err());
        for name in FIXTURES {
            assert!(fixture(name).is_ok());
        }
    }

    #[test]
    fn adversarial_trial_tracks_bw() {
        let family = Family::Adversarial { n: 32, p: 0.6, q: 0.05, moves: 15 };
        let rec = run_trial(&family, 0, 7, &SolveOptions::default()).unwrap();
        let adv = rec.adversary.expect("instance certifies");
        assert_eq!(adv.post_status, Status::CertifiedOptimum);
        assert_eq!(adv.post_best_cut, adv.pre_bw - adv.removed);
        assert!((adv.updated_g - adv.post_best_cut as f64).abs() < 1e-8);
    }

    #[test]
    fn plot_scripts() {
        let rows = vec![ThresholdRow {
            alpha: 16.0,
            beta: 1.0,
            n: 300,
            trials: 1,
            certified_rate: 1.0,
            recovered_rate: 1.0,
            mean_h_hat: 3.0,
            mean_cut: 3.0,
            skipped: false,
        }];
        let csv = threshold_csv(&rows);
        let s = emit_plot_script(&csv, "t.png").unwrap();
        assert!(s.contains("axvline(2.0") && s.contains("16.000000,1.000000"));
        assert_eq!(s, emit_plot_script(&csv, "t.png").unwrap());
        let rows = run_subcritical_sweep(&SweepConfig::new(20, 1, 0), &[(2.0, 50.0)]).unwrap();
        assert!(emit_plot_script(&subcritical_csv(&rows), "s.png").unwrap().contains("gamma"));
        assert!(matches!(emit_plot_script("", "x.png"), Err(Error::Empty(_))));
        assert!(emit_plot_script(&format!("{THRESHOLD_HEADER}\n"), "x.png").is_err());
        assert!(emit_plot_script("a,b\n1,2\n", "x.png").is_err());
    }
}
