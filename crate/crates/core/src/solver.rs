//! The spectral lower bound `g(G, d) = (2m + Σd − n·λ(B_S)) / 4`, its
//! maximization over `d`, and extraction/certification of bisections.

use crate::error::{Error, Result};
use crate::graph::{cut_width, BisectionVector, Graph};
use crate::linalg::{dot, eig_sym, SymMatrix, EIG_TOL};
use crate::rng;
use crate::spectral::{reduced_matrix, top_eigpair_reduced, SpectralResult, SubspaceBasis, MULT_TOL};
use crate::structure::correction_from_bisection;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// A cut certifies when it is within this much of the lower bound.
pub const CERT_EPS: f64 = 1e-6;

/// Pivot threshold for the column echelon reduction.
pub const PIVOT_TOL: f64 = 1e-9;

/// Entry-wise tolerance for accepting a combination as a ±1 vector.
pub const ROUND_TOL: f64 = 1e-6;

/// Hard upper bound on `k_cap` (2^24 sign patterns).
pub const K_CAP_MAX: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// `s₀ = step_scale · max(1, average degree)`; step `t` is `s₀/√t`.
    pub step_scale: f64,
    /// Improvements of the best value below this count as stagnation.
    pub g_tol: f64,
    /// Stop after this many iterations without improvement.
    pub stall_iters: usize,
    pub mult_tol: f64,
    pub k_cap: usize,
    pub cert_eps: f64,
    pub seed: u64,
    pub restarts: usize,
    /// Line searches along candidate bisections per solve.
    pub max_polish: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 300,
            step_scale: 2.0,
            g_tol: 1e-9,
            stall_iters: 40,
            mult_tol: MULT_TOL,
            k_cap: 16,
            cert_eps: CERT_EPS,
            seed: 0,
            restarts: 0,
            max_polish: 6,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if self.k_cap > K_CAP_MAX {
            return Err(Error::InvalidParameter(format!("k_cap {} exceeds {K_CAP_MAX}", self.k_cap)));
        }
        if !(self.mult_tol > 0.0 && self.cert_eps > 0.0 && self.step_scale > 0.0) {
            return Err(Error::InvalidParameter("tolerances and step scale must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    CertifiedOptimum,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub g: f64,
    pub lambda: f64,
    pub step: f64,
    /// Best value evaluated so far, including line searches.
    pub best: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub h_hat: f64,
    pub best_cut: usize,
    pub status: Status,
    /// `best_cut < h_hat + 1 − cert_eps`: optimal by integrality even when
    /// the bound is not attained.
    pub optimal_by_integrality: bool,
    pub multiplicity: usize,
    pub lambda_at_best: f64,
    pub iterations: usize,
    /// Certified optimal bisections (empty on failure).
    pub bisections: Vec<BisectionVector>,
    pub best_bisection: BisectionVector,
    pub d_best: Vec<f64>,
    pub diagnostics: Vec<String>,
    pub trace: Vec<TraceEntry>,
}

impl SolveReport {
    pub fn certified(&self) -> bool {
        self.status == Status::CertifiedOptimum
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// True if `y` equals a returned bisection up to sign.
    pub fn contains(&self, y: &BisectionVector) -> bool {
        self.bisections.iter().chain([&self.best_bisection]).any(|b| b.same_split(y))
    }
}

fn check_len(g: &Graph, v: &[f64]) -> Result<()> {
    if v.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), got: v.len() });
    }
    Ok(())
}

/// `Σ_{ij ∈ E} (1 − x_i x_j)/2 + Σ_i d_i (x_i² − 1)`.
pub fn eval_f(g: &Graph, d: &[f64], x: &[f64]) -> Result<f64> {
    check_len(g, d)?;
    check_len(g, x)?;
    let edges: f64 = g.edges().iter().map(|&(i, j)| (1.0 - x[i] * x[j]) / 2.0).sum();
    let penalty: f64 = d.iter().zip(x).map(|(di, xi)| di * (xi * xi - 1.0)).sum();
    Ok(edges + penalty)
}

fn g_value(g: &Graph, d: &[f64], lambda: f64) -> f64 {
    (2.0 * g.m() as f64 + d.iter().sum::<f64>() - g.n() as f64 * lambda) / 4.0
}

/// `g(G, d)` together with the top eigenpair it was computed from.
pub fn eval_g(g: &Graph, d: &[f64]) -> Result<(f64, SpectralResult)> {
    eval_g_with(g, d, MULT_TOL)
}

pub fn eval_g_with(g: &Graph, d: &[f64], mult_tol: f64) -> Result<(f64, SpectralResult)> {
    check_len(g, d)?;
    g.require_even()?;
    let basis = SubspaceBasis::new(g.n())?;
    let r = reduced_matrix(g, d, &basis)?;
    let spec = top_eigpair_reduced(&r, &basis, mult_tol)?;
    Ok((g_value(g, d, spec.lambda_max), spec))
}

fn gradient_from(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    v.iter().map(|x| (1.0 - n * x * x) / 4.0).collect()
}

/// `(1 − n v_i²)/4` for the first returned unit top eigenvector `v`; the
/// gradient when the top eigenvalue is simple, a supergradient otherwise.
pub fn supergradient_g(g: &Graph, d: &[f64]) -> Result<Vec<f64>> {
    let (_, spec) = eval_g(g, d)?;
    Ok(gradient_from(&spec.eigvecs[0]))
}

/// Shifts `d` by a constant so that it sums to `target_sum`.
pub fn normalize_d(d: &[f64], target_sum: f64) -> Vec<f64> {
    let c = (target_sum - d.iter().sum::<f64>()) / d.len() as f64;
    d.iter().map(|x| x + c).collect()
}

/// Median split: `+1` above the median, ties at the median take `+1` in
/// index order until the sides balance.
pub fn extract_bisection(x: &[f64]) -> Result<BisectionVector> {
    let n = x.len();
    if n == 0 || n % 2 == 1 {
        return Err(Error::OddVertexCount(n));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let median = sorted[n / 2 - 1];
    let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    let mut values = vec![-1i8; n];
    let mut plus = 0;
    for (i, &v) in x.iter().enumerate() {
        if v > median + tol {
            values[i] = 1;
            plus += 1;
        }
    }
    for (i, &v) in x.iter().enumerate() {
        if plus == n / 2 {
            break;
        }
        if (v - median).abs() <= tol {
            values[i] = 1;
            plus += 1;
        }
    }
    assert_eq!(plus, n / 2, "median split must balance");
    BisectionVector::new(values)
}

/// Optimality certificate: the cut attains the lower bound.
pub fn certify(g: &Graph, h_hat: f64, x: &BisectionVector) -> Result<Status> {
    certify_with(g, h_hat, x, CERT_EPS)
}

pub fn certify_with(g: &Graph, h_hat: f64, x: &BisectionVector, cert_eps: f64) -> Result<Status> {
    let cut = cut_width(g, x)? as f64;
    Ok(if cut - h_hat <= cert_eps { Status::CertifiedOptimum } else { Status::Fail })
}

/// Reduced column echelon form of the column set `cols` (each length n),
/// with complete pivoting. Returns the reduced columns and pivot rows:
/// column `c` is 1 at `pivots[c]` and every other column is 0 there.
pub fn column_echelon(cols: &[Vec<f64>], pivot_tol: f64) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let k = cols.len();
    let n = cols.first().map_or(0, Vec::len);
    let mut c = cols.to_vec();
    let mut pivots = Vec::with_capacity(k);
    let mut used = vec![false; n];
    for step in 0..k {
        let mut best = (0.0f64, 0usize, 0usize);
        for (j, col) in c.iter().enumerate().skip(step) {
            for (r, &v) in col.iter().enumerate() {
                if !used[r] && v.abs() > best.0 {
                    best = (v.abs(), r, j);
                }
            }
        }
        if best.0 < pivot_tol {
            return Err(Error::DegenerateEchelon { rank: step, k });
        }
        let (_, row, j) = best;
        c.swap(step, j);
        used[row] = true;
        let p = c[step][row];
        c[step].iter_mut().for_each(|v| *v /= p);
        let pivot_col = c[step].clone();
        for (j, col) in c.iter_mut().enumerate() {
            if j == step {
                continue;
            }
            let f = col[row];
            if f != 0.0 {
                for (v, &pv) in col.iter_mut().zip(&pivot_col) {
                    *v -= f * pv;
                }
                col[row] = 0.0;
            }
        }
        pivots.push(row);
    }
    Ok((c, pivots))
}

fn combination(cols: &[Vec<f64>], signs: u64) -> Vec<f64> {
    let n = cols[0].len();
    let mut x = vec![0.0; n];
    for (j, col) in cols.iter().enumerate() {
        let s = if signs >> j & 1 == 0 { 1.0 } else { -1.0 };
        for (xi, &ci) in x.iter_mut().zip(col) {
            *xi += s * ci;
        }
    }
    x
}

/// ±1 vectors with zero sum in the span of `eigvecs`: the echelon basis has
/// unit pivots, so any such vector has all coefficients in {±1}.
fn sign_vectors_in_span(eigvecs: &[Vec<f64>]) -> Result<Vec<BisectionVector>> {
    let (cols, _) = column_echelon(eigvecs, PIVOT_TOL)?;
    let k = cols.len();
    let mut found = BTreeSet::new();
    // Patterns s and !s give x and −x; fixing the first sign halves the work.
    for signs in 0..(1u64 << (k - 1)) {
        let x = combination(&cols, signs);
        if x.iter().any(|v| (v.abs() - 1.0).abs() > ROUND_TOL) {
            continue;
        }
        let rounded: Vec<i8> = x.iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect();
        if let Ok(b) = BisectionVector::new(rounded) {
            found.insert(b.canonical());
        }
    }
    Ok(found.into_iter().collect())
}

/// Enumerates the optimal bisections hidden in a degenerate top eigenspace
/// of `B_S` at `d` by trying all 2^k sign patterns of the echelon basis.
pub fn enumerate_bisections_multiplicity(g: &Graph, d: &[f64], k_cap: usize) -> Result<Vec<BisectionVector>> {
    enumerate_with(g, d, k_cap, MULT_TOL, CERT_EPS)
}

pub fn enumerate_with(g: &Graph, d: &[f64], k_cap: usize, mult_tol: f64, cert_eps: f64) -> Result<Vec<BisectionVector>> {
    let (h, spec) = eval_g_with(g, d, mult_tol)?;
    let k = spec.multiplicity;
    if k < 2 {
        return Err(Error::Precondition(format!("top eigenvalue is simple (multiplicity {k})")));
    }
    if k > k_cap.min(K_CAP_MAX) {
        return Err(Error::EigenspaceTooLarge { k, cap: k_cap });
    }
    let mut out = Vec::new();
    for b in sign_vectors_in_span(&spec.eigvecs)? {
        if cut_width(g, &b)? as f64 - h <= cert_eps {
            out.push(b);
        }
    }
    Ok(out)
}

/// Directional derivatives of `α ↦ λ(B_S(d + α y))` from the eigenspace:
/// the extreme eigenvalues of `Vᵀ diag(y) V`.
fn line_derivatives(spec: &SpectralResult, y: &[f64]) -> (f64, f64) {
    let vs = &spec.eigvecs;
    if vs.len() == 1 {
        let s: f64 = vs[0].iter().zip(y).map(|(v, yi)| yi * v * v).sum();
        return (s, s);
    }
    let k = vs.len();
    let m = SymMatrix::from_fn(k, |a, b| vs[a].iter().zip(&vs[b]).zip(y).map(|((p, q), yi)| yi * p * q).sum());
    let m = SymMatrix::from_fn(k, |a, b| 0.5 * (m.get(a, b) + m.get(b, a)));
    match eig_sym(&m, EIG_TOL) {
        Ok(e) => (e.values[0], e.values[k - 1]),
        Err(_) => {
            let s: f64 = vs[0].iter().zip(y).map(|(v, yi)| yi * v * v).sum();
            (s, s)
        }
    }
}

/// State shared by the ascent, the line searches and candidate checks.
struct Search<'a> {
    g: &'a Graph,
    opts: &'a SolveOptions,
    basis: SubspaceBasis,
    best_h: f64,
    best_d: Vec<f64>,
    best_cut: Option<(usize, BisectionVector)>,
    seen: BTreeSet<BisectionVector>,
    polished: usize,
    trace: Vec<TraceEntry>,
}

/// Line searches stop once `g` is within this of the cut.
const TIGHT_SLACK: f64 = 1e-10;
const LINE_STEPS: usize = 80;

impl<'a> Search<'a> {
    fn new(g: &'a Graph, opts: &'a SolveOptions) -> Result<Self> {
        Ok(Search {
            g,
            opts,
            basis: SubspaceBasis::new(g.n())?,
            best_h: f64::NEG_INFINITY,
            best_d: vec![0.0; g.n()],
            best_cut: None,
            seen: BTreeSet::new(),
            polished: 0,
            trace: Vec::new(),
        })
    }

    fn eval(&mut self, d: &[f64], mult_tol: f64) -> Result<(f64, SpectralResult)> {
        let r = reduced_matrix(self.g, d, &self.basis)?;
        let spec = top_eigpair_reduced(&r, &self.basis, mult_tol)?;
        let value = g_value(self.g, d, spec.lambda_max);
        if value > self.best_h {
            self.best_h = value;
            self.best_d = d.to_vec();
        }
        Ok((value, spec))
    }

    fn certified(&self) -> bool {
        self.best_cut.as_ref().is_some_and(|(c, _)| *c as f64 - self.best_h <= self.opts.cert_eps)
    }

    /// Records a candidate; line-searches new bisections that improve the
    /// best cut while the budget lasts.
    fn consider(&mut self, y: BisectionVector) -> Result<()> {
        let y = y.canonical();
        if !self.seen.insert(y.clone()) {
            return Ok(());
        }
        let cut = cut_width(self.g, &y)?;
        let improves = self.best_cut.as_ref().is_none_or(|(c, _)| cut < *c);
        if improves {
            self.best_cut = Some((cut, y.clone()));
        }
        if improves && !self.certified() && self.polished < self.opts.max_polish {
            self.polished += 1;
            self.line_search(&y)?;
        }
        Ok(())
    }

    fn consider_eigenspace(&mut self, spec: &SpectralResult) -> Result<()> {
        for v in &spec.eigvecs {
            self.consider(extract_bisection(v)?)?;
        }
        let k = spec.multiplicity;
        if (2..=10).contains(&k) {
            if let Ok((cols, _)) = column_echelon(&spec.eigvecs, PIVOT_TOL) {
                for signs in 0..(1u64 << (k - 1)) {
                    if self.certified() {
                        break;
                    }
                    self.consider(extract_bisection(&combination(&cols, signs))?)?;
                }
            }
        }
        Ok(())
    }

    /// Minimizes the convex `φ(α) = λ(B_S(d^(y) + α y))` by bisection on the
    /// sign of its one-sided derivatives. Along this line `B y = α·1`, so
    /// `φ ≥ 0` and `g = cw(y) − n φ / 4`; the line attains the cut exactly
    /// when `min φ = 0`.
    fn line_search(&mut self, y: &BisectionVector) -> Result<()> {
        let n = self.g.n() as f64;
        let base = correction_from_bisection(self.g, y)?;
        let yf = y.to_f64();
        let point = |a: f64| -> Vec<f64> { base.iter().zip(&yf).map(|(b, yi)| b + a * yi).collect() };
        let tight = 4.0 * TIGHT_SLACK / n;
        let hopeless = 4.0 * self.opts.cert_eps / n;
        let line_tol = 1e-12;

        let probe = |s: &mut Self, a: f64| -> Result<(f64, f64, f64)> {
            let (_, spec) = s.eval(&point(a), line_tol)?;
            let (dl, dr) = line_derivatives(&spec, &yf);
            Ok((spec.lambda_max, dl, dr))
        };

        let (phi0, dl0, dr0) = probe(self, 0.0)?;
        if phi0 <= tight || (dl0 <= 0.0 && dr0 >= 0.0) {
            return Ok(());
        }
        let step0 = (2.0 * self.g.m() as f64 / n).max(1.0);
        // (α, φ, slope toward the minimum side)
        let (mut lo, mut hi);
        if dr0 < 0.0 {
            lo = (0.0, phi0, dr0);
            let mut a = step0;
            loop {
                let (phi, dl, dr) = probe(self, a)?;
                if phi <= tight || (dl <= 0.0 && dr >= 0.0) {
                    return Ok(());
                }
                if dl > 0.0 {
                    hi = (a, phi, dl);
                    break;
                }
                lo = (a, phi, dr);
                a *= 2.0;
                if a > 1e9 {
                    return Ok(());
                }
            }
        } else {
            hi = (0.0, phi0, dl0);
            let mut a = -step0;
            loop {
                let (phi, dl, dr) = probe(self, a)?;
                if phi <= tight || (dl <= 0.0 && dr >= 0.0) {
                    return Ok(());
                }
                if dr < 0.0 {
                    lo = (a, phi, dr);
                    break;
                }
                hi = (a, phi, dl);
                a *= 2.0;
                if a < -1e9 {
                    return Ok(());
                }
            }
        }
        for _ in 0..LINE_STEPS {
            // Tangent lines at the bracket ends bound min φ from below.
            let width = hi.0 - lo.0;
            let x = (hi.1 - lo.1 - hi.2 * width) / (lo.2 - hi.2);
            let lower = lo.1 + lo.2 * x;
            if lower > hopeless || width <= 1e-15 * lo.0.abs().max(hi.0.abs()).max(1.0) {
                return Ok(());
            }
            let mid = 0.5 * (lo.0 + hi.0);
            let (phi, dl, dr) = probe(self, mid)?;
            if phi <= tight || (dl <= 0.0 && dr >= 0.0) {
                return Ok(());
            }
            if dr < 0.0 {
                lo = (mid, phi, dr);
            } else {
                hi = (mid, phi, dl);
            }
        }
        Ok(())
    }

    fn ascend(&mut self, start: Vec<f64>, iters: usize, s0: f64) -> Result<usize> {
        let mut d = start;
        let mut last_gain = 0usize;
        let mut best_seen = self.best_h;
        let mut done = 0;
        for t in 1..=iters {
            done = t;
            let (value, spec) = self.eval(&d, self.opts.mult_tol)?;
            self.consider_eigenspace(&spec)?;
            let step = s0 / (t as f64).sqrt();
            self.trace.push(TraceEntry { g: value, lambda: spec.lambda_max, step, best: self.best_h });
            if self.certified() {
                break;
            }
            if self.best_h > best_seen + self.opts.g_tol * best_seen.abs().max(1.0) {
                best_seen = self.best_h;
                last_gain = t;
            } else if t - last_gain >= self.opts.stall_iters {
                break;
            }
            let mut grad = gradient_from(&spec.eigvecs[0]);
            let mean = grad.iter().sum::<f64>() / grad.len() as f64;
            grad.iter_mut().for_each(|x| *x -= mean);
            let norm = dot(&grad, &grad).sqrt();
            if norm < 1e-13 {
                // zero gradient at a simple top eigenvalue: a maximizer
                if spec.multiplicity == 1 {
                    break;
                }
                continue;
            }
            for (di, gi) in d.iter_mut().zip(&grad) {
                *di += step * gi / norm;
            }
        }
        Ok(done)
    }
}

/// Result of the ascent phase.
#[derive(Clone, Debug)]
pub struct Ascent {
    /// Normalized to `Σd = 2m`.
    pub d_best: Vec<f64>,
    pub h_hat: f64,
    pub trace: Vec<TraceEntry>,
    pub iterations: usize,
    pub best_cut: Option<(usize, BisectionVector)>,
}

/// Projected supergradient ascent on `g`, started from the better of the
/// uniform correction and `d^(ŷ)` for the median split `ŷ` of the top
/// eigenvector of `A_S`. Candidate bisections met on the way are
/// line-searched, which can only raise the returned bound.
pub fn maximize_g(g: &Graph, opts: &SolveOptions) -> Result<Ascent> {
    let mut s = Search::new(g, opts)?;
    run_search(&mut s)?;
    let iterations = s.trace.len();
    Ok(Ascent {
        d_best: normalize_d(&s.best_d, 2.0 * g.m() as f64),
        h_hat: s.best_h,
        trace: s.trace,
        iterations,
        best_cut: s.best_cut,
    })
}

fn run_search(s: &mut Search) -> Result<()> {
    let g = s.g;
    let opts = s.opts;
    opts.validate()?;
    g.require_even()?;
    let n = g.n();
    if n < 2 {
        return Err(Error::OddVertexCount(n));
    }
    let m2 = 2.0 * g.m() as f64;
    let uniform = vec![m2 / n as f64; n];
    let (gu, spec_u) = s.eval(&uniform, opts.mult_tol)?;
    let (_, spec0) = s.eval(&vec![0.0; n], opts.mult_tol)?;
    let guess = extract_bisection(&spec0.eigvecs[0])?;
    let dy = normalize_d(&correction_from_bisection(g, &guess)?, m2);
    let (gy, spec_y) = s.eval(&dy, opts.mult_tol)?;
    s.consider(guess)?;
    s.consider_eigenspace(&spec_u)?;
    s.consider_eigenspace(&spec_y)?;
    if s.certified() {
        return finish(s);
    }
    let start = if gu >= gy { uniform } else { dy };
    let s0 = opts.step_scale * (m2 / n as f64).max(1.0);
    s.ascend(start, opts.max_iters, s0)?;
    let mut r = rng::seeded(opts.seed);
    for _ in 0..opts.restarts {
        if s.certified() {
            break;
        }
        let jitter = s0 / (n as f64).sqrt();
        let start: Vec<f64> = s.best_d.iter().map(|x| x + r.random_range(-jitter..jitter)).collect();
        s.ascend(start, opts.max_iters, s0)?;
    }
    finish(s)
}

/// Makes sure the best cut has been line-searched so `best_d` is exact on
/// certified instances.
fn finish(s: &mut Search) -> Result<()> {
    if let Some((cut, y)) = s.best_cut.clone() {
        let gap = cut as f64 - s.best_h;
        if gap > TIGHT_SLACK && gap < 1.0 {
            s.line_search(&y)?;
        }
    }
    Ok(())
}

/// The point shared by the lines `d^(y₁) + α₁y₁ + c₁1` and
/// `d^(y₂) + α₂y₂ + c₂1`, by least squares. Every optimal correction lies
/// on the line of every optimal bisection, so two optimal bisections pin
/// the optimum down up to a shift.
fn joint_line_point(g: &Graph, y1: &BisectionVector, y2: &BisectionVector) -> Result<Option<Vec<f64>>> {
    let d1 = correction_from_bisection(g, y1)?;
    let d2 = correction_from_bisection(g, y2)?;
    let n = g.n();
    let (v1, v2) = (y1.to_f64(), y2.to_f64());
    // d1 + a·y1 − d2 − b·y2 − c·1 = 0
    let cols = [v1.clone(), v2.iter().map(|v| -v).collect::<Vec<_>>(), vec![-1.0; n]];
    let rhs: Vec<f64> = d2.iter().zip(&d1).map(|(a, b)| a - b).collect();
    let gram = SymMatrix::from_fn(3, |i, j| dot(&cols[i], &cols[j]));
    let eig = eig_sym(&gram, EIG_TOL)?;
    if eig.values[0] <= 1e-9 * eig.values[2] {
        return Ok(None);
    }
    let b: Vec<f64> = cols.iter().map(|c| dot(c, &rhs)).collect();
    let mut coef = [0.0; 3];
    for (lam, v) in eig.values.iter().zip(&eig.vectors) {
        let t = dot(v, &b) / lam;
        for (c, vi) in coef.iter_mut().zip(v) {
            *c += t * vi;
        }
    }
    Ok(Some(d1.iter().zip(&v1).map(|(d, y)| d + coef[0] * y).collect()))
}

/// Full pipeline: maximize `g`, extract bisections from the top eigenspace
/// (enumerating it when degenerate), certify.
pub fn solve(g: &Graph, opts: &SolveOptions) -> Result<SolveReport> {
    let asc = maximize_g(g, opts)?;
    let m2 = 2.0 * g.m() as f64;
    let d_best = normalize_d(&asc.d_best, m2);
    let (_, spec) = eval_g_with(g, &d_best, opts.mult_tol)?;
    let h_hat = asc.h_hat;
    let mut diagnostics = Vec::new();
    let mut candidates: BTreeSet<BisectionVector> = BTreeSet::new();
    if let Some((_, y)) = &asc.best_cut {
        candidates.insert(y.canonical());
    }
    let k = spec.multiplicity;
    if k == 1 {
        candidates.insert(extract_bisection(&spec.eigvecs[0])?.canonical());
    } else if k > opts.k_cap {
        diagnostics.push(format!("eigenspace too large: multiplicity {k} exceeds k_cap {}", opts.k_cap));
    } else {
        match sign_vectors_in_span(&spec.eigvecs) {
            Ok(found) => candidates.extend(found),
            Err(e) => diagnostics.push(format!("enumeration skipped: {e}")),
        }
        for v in &spec.eigvecs {
            candidates.insert(extract_bisection(v)?.canonical());
        }
    }
    let mut scored = Vec::with_capacity(candidates.len());
    for y in candidates {
        scored.push((cut_width(g, &y)?, y));
    }
    scored.sort();
    let (best_cut, best_bisection) = scored[0].clone();
    let status = if best_cut as f64 - h_hat <= opts.cert_eps { Status::CertifiedOptimum } else { Status::Fail };
    let bisections: Vec<BisectionVector> = if status == Status::CertifiedOptimum {
        scored.into_iter().filter(|(c, _)| *c == best_cut).map(|(_, y)| y).collect()
    } else {
        Vec::new()
    };
    let (mut h_hat, mut d_best, mut spec) = (h_hat, d_best, spec);
    if bisections.len() >= 2 {
        if let Some(d) = joint_line_point(g, &bisections[0], &bisections[1])? {
            let d = normalize_d(&d, m2);
            let (h, sp) = eval_g_with(g, &d, opts.mult_tol)?;
            if h > h_hat {
                (h_hat, d_best, spec) = (h, d, sp);
            }
        }
    }
    Ok(SolveReport {
        h_hat,
        best_cut,
        status,
        optimal_by_integrality: (best_cut as f64) < h_hat + 1.0 - opts.cert_eps,
        multiplicity: k,
        lambda_at_best: spec.lambda_max,
        iterations: asc.iterations,
        bisections,
        best_bisection,
        d_best,
        diagnostics,
        trace: asc.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{hypercube, hypercube_dimension_cut, planted_bisection};
    use proptest::prelude::*;

    fn p4() -> Graph {
        Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
        let mut r = rng::seeded(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if r.random_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn eval_f_examples() {
        let g = Graph::empty(4).unwrap();
        assert_eq!(eval_f(&g, &[1.0; 4], &[0.0; 4]).unwrap(), -4.0);
        assert_eq!(eval_f(&p4(), &[0.0; 4], &[1.0, 1.0, -1.0, -1.0]).unwrap(), 1.0);
        assert!(eval_f(&p4(), &[0.0; 3], &[0.0; 4]).is_err());
    }

    #[test]
    fn eval_g_examples() {
        let (h, _) = eval_g(&hypercube(3).unwrap(), &[-1.0; 8]).unwrap();
        assert!((h - 4.0).abs() < 1e-12);
        let (h, _) = eval_g(&Graph::empty(4).unwrap(), &[0.0; 4]).unwrap();
        assert!(h.abs() < 1e-12);
        let (h, _) = eval_g(&p4(), &[-1.0, 0.0, 0.0, -1.0]).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_d(&[0.0; 4], 8.0), vec![2.0; 4]);
        assert_eq!(normalize_d(&[1.0, 3.0], 4.0), vec![1.0, 3.0]);
    }

    #[test]
    fn median_split_examples() {
        let v = |x: &[i8]| BisectionVector::new(x.to_vec()).unwrap();
        assert_eq!(extract_bisection(&[0.9, 0.2, -0.3, -0.8]).unwrap(), v(&[1, 1, -1, -1]));
        assert_eq!(extract_bisection(&[1.0; 4]).unwrap(), v(&[1, 1, -1, -1]));
        assert_eq!(extract_bisection(&[-1.0, 1.0, 1.0, -1.0]).unwrap(), v(&[-1, 1, 1, -1]));
        assert!(extract_bisection(&[1.0; 3]).is_err());
    }

    #[test]
    fn certify_examples() {
        // K4: every bisection cuts 4
        let k4 = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let y = BisectionVector::new(vec![1, 1, -1, -1]).unwrap();
        assert_eq!(certify(&k4, 4.0, &y).unwrap(), Status::CertifiedOptimum);
        assert_eq!(certify(&k4, 3.2, &y).unwrap(), Status::Fail);
        assert_eq!(certify(&k4, 3.9999999, &y).unwrap(), Status::CertifiedOptimum);
    }

    #[test]
    fn enumerate_hypercubes() {
        for k in [3u32, 4] {
            let g = hypercube(k).unwrap();
            let n = 1usize << k;
            let d = vec![2.0 - k as f64; n];
            let found = enumerate_bisections_multiplicity(&g, &d, 16).unwrap();
            assert_eq!(found.len(), k as usize);
            for bit in 0..k {
                let cut = hypercube_dimension_cut(k, bit);
                assert!(found.iter().any(|b| b.same_split(&cut)));
            }
        }
        assert!(matches!(
            enumerate_bisections_multiplicity(&p4(), &[-1.0, 0.0, 0.0, -1.0], 16),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            enumerate_bisections_multiplicity(&hypercube(3).unwrap(), &[-1.0; 8], 2),
            Err(Error::EigenspaceTooLarge { k: 3, cap: 2 })
        ));
    }

    #[test]
    fn echelon_degenerate() {
        let cols = vec![vec![1.0, 0.0, -1.0], vec![2.0, 0.0, -2.0]];
        assert!(matches!(column_echelon(&cols, PIVOT_TOL), Err(Error::DegenerateEchelon { rank: 1, k: 2 })));
    }

    #[test]
    fn solve_small_examples() {
        let opts = SolveOptions::default();
        let r = solve(&p4(), &opts).unwrap();
        assert!(r.certified() && r.best_cut == 1);
        assert!(r.h_hat >= 1.0 - 1e-6 && r.h_hat <= 1.0 + 1e-9);

        let h8 = solve(&hypercube(3).unwrap(), &opts).unwrap();
        assert!(h8.certified() && h8.best_cut == 4 && h8.bisections.len() == 3);

        let two_k4 = planted_bisection(8, 1.0, 0.0, 2).unwrap();
        let r = solve(&two_k4.graph, &opts).unwrap();
        assert!(r.certified() && r.best_cut == 0 && r.h_hat >= -1e-6);
        assert!(r.contains(&two_k4.planted));
    }

    #[test]
    fn hypercube16_from_default_start() {
        let asc = maximize_g(&hypercube(4).unwrap(), &SolveOptions::default()).unwrap();
        assert!(asc.h_hat >= 8.0 - 1e-6);
        assert!((asc.d_best.iter().sum::<f64>() - 64.0).abs() < 1e-9);
    }

    #[test]
    fn n2_graphs() {
        let e = Graph::from_edges(2, [(0, 1)]).unwrap();
        let r = solve(&e, &SolveOptions::default()).unwrap();
        assert!(r.certified() && r.best_cut == 1);
        let r = solve(&Graph::empty(2).unwrap(), &SolveOptions::default()).unwrap();
        assert!(r.certified() && r.best_cut == 0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut checked = 0;
        let mut seed = 0;
        while checked < 10 {
            seed += 1;
            let g = random_graph(10, 0.5, seed);
            let mut r = rng::seeded(seed + 100);
            let d: Vec<f64> = (0..10).map(|_| r.random_range(-2.0..2.0)).collect();
            let (_, spec) = eval_g(&g, &d).unwrap();
            if spec.gap.is_none_or(|gap| gap < 1e-4) {
                continue;
            }
            let grad = supergradient_g(&g, &d).unwrap();
            assert!(grad.iter().sum::<f64>().abs() < 1e-10);
            for i in 0..10 {
                let mut dp = d.clone();
                let mut dm = d.clone();
                dp[i] += 1e-5;
                dm[i] -= 1e-5;
                let fd = (eval_g(&g, &dp).unwrap().0 - eval_g(&g, &dm).unwrap().0) / 2e-5;
                assert!((fd - grad[i]).abs() <= 1e-4 * grad[i].abs().max(1e-2), "{fd} vs {}", grad[i]);
            }
            checked += 1;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn translation_and_f_identity(seed in 0u64..5000, c in -10.0f64..10.0) {
            let g = random_graph(10, 0.4, seed);
            let mut r = rng::seeded(seed ^ 77);
            let d: Vec<f64> = (0..10).map(|_| r.random_range(-3.0..3.0)).collect();
            let shifted: Vec<f64> = d.iter().map(|x| x + c).collect();
            let a = eval_g(&g, &d).unwrap().0;
            let b = eval_g(&g, &shifted).unwrap().0;
            prop_assert!((a - b).abs() < 1e-9);
            let mut labels: Vec<i8> = (0..10).map(|i| if i < 5 { 1 } else { -1 }).collect();
            rand::seq::SliceRandom::shuffle(labels.as_mut_slice(), &mut r);
            let y = BisectionVector::new(labels).unwrap();
            prop_assert_eq!(eval_f(&g, &d, &y.to_f64()).unwrap(), cut_width(&g, &y).unwrap() as f64);
        }

        #[test]
        fn concave_along_chords(seed in 0u64..5000) {
            let g = random_graph(8, 0.5, seed);
            let mut r = rng::seeded(seed ^ 99);
            let d1: Vec<f64> = (0..8).map(|_| r.random_range(-3.0..3.0)).collect();
            let d2: Vec<f64> = (0..8).map(|_| r.random_range(-3.0..3.0)).collect();
            let (g1, g2) = (eval_g(&g, &d1).unwrap().0, eval_g(&g, &d2).unwrap().0);
            for t in [0.25, 0.5, 0.75] {
                let mix: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| t * a + (1.0 - t) * b).collect();
                prop_assert!(eval_g(&g, &mix).unwrap().0 >= t * g1 + (1.0 - t) * g2 - 1e-8);
            }
        }

        #[test]
        fn trace_best_is_monotone(seed in 0u64..5000) {
            let g = random_graph(10, 0.3, seed);
            let opts = SolveOptions { max_iters: 40, ..Default::default() };
            let r = solve(&g, &opts).unwrap();
            prop_assert!(r.trace.windows(2).all(|w| w[1].best >= w[0].best));
            prop_assert!(r.h_hat <= r.best_cut as f64 + 1e-9);
        }
    }
}
