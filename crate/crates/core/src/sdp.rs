//! Feasible points for the semidefinite reformulations of the bound.
//!
//! Nothing here solves an SDP. Each certificate is built from a correction
//! vector `d` and then checked by an eigenvalue computation:
//!
//! * [`PrimalCert`]: `(z, d)` with `zI − P(A+D)P ⪰ 0`, value `m/2 − (nz − Σd)/4`.
//! * [`RankOnePoint`]: `Y = yyᵀ` for a bisection `y`, value `cw(y)`.
//! * [`FkDualCert`]: `(x, x₀)` with `−A − x₀J − diag(x) ⪰ 0`, value `m/2 + Σx/4`.

use crate::error::{Error, Result};
use crate::graph::{cut_width, BisectionVector, Graph};
use crate::linalg::{dot, eig_sym, eigvals_sym, SymMatrix, EIG_TOL};
use crate::solver::eval_g_with;
use crate::spectral::{reduced_matrix, SubspaceBasis, MULT_TOL};
use serde::{Deserialize, Serialize};

pub const PSD_TOL: f64 = 1e-8;
pub const PSD_SLACK: f64 = 1e-9;
/// Largest n for which the dense constraint matrix is assembled.
pub const DENSE_CHECK_MAX: usize = 400;
pub const X0_DOUBLINGS: usize = 60;
pub const X0_BISECTIONS: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimalCert {
    pub z: f64,
    /// Shifted copy of the input so that `λ(B_S) ≥ 0`; `g` is unchanged.
    pub d: Vec<f64>,
    pub min_eig_constraint: f64,
    /// True when `min_eig_constraint` came from the assembled dense matrix.
    pub dense_check: bool,
    pub objective: f64,
    pub h_equiv: f64,
}

/// `zI − P(A+D)P` written out entrywise.
pub fn primal_constraint_matrix(g: &Graph, d: &[f64], z: f64) -> Result<SymMatrix> {
    let n = g.n();
    if d.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: d.len() });
    }
    let nf = n as f64;
    let deg: Vec<f64> = (0..n).map(|i| g.degree(i) as f64).collect();
    let sum_a = 2.0 * g.m() as f64;
    let sum_d: f64 = d.iter().sum();
    let a = g.adjacency();
    let mut c = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let aij = a.get(i, j);
            let mut v = -aij + (deg[i] + deg[j]) / nf - sum_a / (nf * nf);
            v += (d[i] + d[j]) / nf - sum_d / (nf * nf);
            if i == j {
                v += z - d[i];
            }
            c.set_sym(i, j, v);
        }
    }
    Ok(c)
}

pub fn build_primal_cert(g: &Graph, d_star: &[f64]) -> Result<PrimalCert> {
    let n = g.n();
    let (_, spec) = eval_g_with(g, d_star, MULT_TOL)?;
    let lambda = spec.lambda_max;
    // The constraint matrix also has eigenvalue z on the all-ones direction.
    let shift = (-lambda).max(0.0);
    let d: Vec<f64> = d_star.iter().map(|x| x + shift).collect();
    let z = (lambda + shift).max(0.0) + PSD_SLACK;
    let (min_eig, dense) = if n <= DENSE_CHECK_MAX {
        let c = primal_constraint_matrix(g, &d, z)?;
        (eigvals_sym(&c)?[0], true)
    } else {
        // eigenvalues are z − λᵢ(B_S) on S and z on the ones direction
        ((z - lambda - shift).min(z), false)
    };
    if min_eig < -PSD_TOL {
        return Err(Error::Certificate(format!("primal constraint has eigenvalue {min_eig:e}")));
    }
    let objective = n as f64 * z - d.iter().sum::<f64>();
    Ok(PrimalCert { z, d, min_eig_constraint: min_eig, dense_check: dense, objective, h_equiv: g.m() as f64 / 2.0 - objective / 4.0 })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOnePoint {
    pub y: BisectionVector,
    pub h_y: usize,
    pub diag_ones: bool,
    pub zero_sum: bool,
}

impl RankOnePoint {
    /// Row sums of `yyᵀ`, exactly `yᵢ·Σy`.
    pub fn row_sums(&self) -> Vec<i64> {
        let total: i64 = self.y.values().iter().map(|&v| v as i64).sum();
        self.y.values().iter().map(|&v| v as i64 * total).collect()
    }

    pub fn to_matrix(&self) -> SymMatrix {
        let y = self.y.to_f64();
        SymMatrix::from_fn(y.len(), |i, j| y[i] * y[j])
    }
}

pub fn build_rank_one_point(y: &BisectionVector, g: &Graph) -> Result<RankOnePoint> {
    let h_y = cut_width(g, y)?;
    let total: i64 = y.values().iter().map(|&v| v as i64).sum();
    Ok(RankOnePoint { y: y.clone(), h_y, diag_ones: y.values().iter().all(|v| v * v == 1), zero_sum: total == 0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkDualCert {
    pub x: Vec<f64>,
    pub x0: f64,
    pub min_eig_m: f64,
    pub objective: f64,
    /// `x = d − (λ + epsilon)·1`; the margin keeps `M` strictly definite on `S`.
    pub epsilon: f64,
}

/// Smallest eigenvalue of `M = −A − x₀J − diag(x)` for every `x₀`, from one
/// eigendecomposition.
///
/// In the basis `[Q | 1/√n]` the matrix is `[[K, b], [bᵀ, c − n·x₀]]` with
/// `K = −Qᵀ(A + diag(x))Q`. After diagonalizing `K = U diag(μ) Uᵀ` the
/// smallest eigenvalue is the root below `min μ` of the secular function
/// `c − n·x₀ − θ − Σ b̃ᵢ² / (μᵢ − θ)`.
#[derive(Clone, Debug)]
pub struct BorderedSpectrum {
    mu: Vec<f64>,
    b: Vec<f64>,
    c: f64,
    n: f64,
}

impl BorderedSpectrum {
    pub fn new(g: &Graph, x: &[f64]) -> Result<Self> {
        let n = g.n();
        let basis = SubspaceBasis::new(n)?;
        let mut k = reduced_matrix(g, x, &basis)?;
        for i in 0..k.n() {
            for j in 0..=i {
                let v = -k.get(i, j);
                k.set_sym(i, j, v);
            }
        }
        let eig = eig_sym(&k, EIG_TOL)?;
        let sn = (n as f64).sqrt();
        // M·1/√n = −(deg + x)/√n
        let m1: Vec<f64> = (0..n).map(|i| -(g.degree(i) as f64 + x[i]) / sn).collect();
        let bq = basis.coords(&m1);
        let b = eig.vectors.iter().map(|u| dot(u, &bq)).collect();
        let c = m1.iter().sum::<f64>() / sn;
        Ok(BorderedSpectrum { mu: eig.values, b, c, n: n as f64 })
    }

    pub fn min_eig(&self, x0: f64) -> f64 {
        let corner = self.c - self.n * x0;
        let mu_min = self.mu.first().copied().unwrap_or(f64::INFINITY);
        if self.mu.is_empty() {
            return corner;
        }
        let spread: f64 = self.b.iter().map(|v| v.abs()).sum();
        let mut lo = mu_min.min(corner) - spread - 1.0;
        let mut hi = mu_min;
        let f = |t: f64| {
            corner - t - self.mu.iter().zip(&self.b).map(|(m, b)| b * b / (m - t)).sum::<f64>()
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// `M = −A − x₀J − diag(x)` written out entrywise.
pub fn fk_matrix(g: &Graph, x: &[f64], x0: f64) -> SymMatrix {
    let a = g.adjacency();
    SymMatrix::from_fn(g.n(), |i, j| -a.get(i, j) - x0 - if i == j { x[i] } else { 0.0 })
}

pub fn build_fk_dual_cert(g: &Graph, d_star: &[f64]) -> Result<FkDualCert> {
    build_fk_dual_cert_with(g, d_star, 4e-7 / g.n().max(1) as f64)
}

pub fn build_fk_dual_cert_with(g: &Graph, d_star: &[f64], epsilon: f64) -> Result<FkDualCert> {
    if epsilon <= 0.0 {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let (_, spec) = eval_g_with(g, d_star, MULT_TOL)?;
    let x: Vec<f64> = d_star.iter().map(|v| v - spec.lambda_max - epsilon).collect();
    let objective = g.m() as f64 / 2.0 + x.iter().sum::<f64>() / 4.0;
    let bordered = BorderedSpectrum::new(g, &x)?;
    // aim for strict feasibility; the ε margin makes it reachable
    let feasible = |x0: f64| bordered.min_eig(x0) >= 0.0;
    let mut good = 0.0;
    if !feasible(0.0) {
        let mut hi = 0.0;
        let mut step = 1.0;
        let mut found = false;
        for _ in 0..X0_DOUBLINGS {
            if feasible(-step) {
                found = true;
                break;
            }
            hi = -step;
            step *= 2.0;
        }
        if !found {
            return Err(Error::Certificate(format!(
                "no feasible x0 down to {:e}; best min eigenvalue {:e}",
                hi,
                bordered.min_eig(hi)
            )));
        }
        good = -step;
        for _ in 0..X0_BISECTIONS {
            let mid = 0.5 * (good + hi);
            if feasible(mid) {
                good = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(FkDualCert { min_eig_m: bordered.min_eig(good), x, x0: good, objective, epsilon })
}

/// `h_Y − primal_h`; nonnegative by weak duality.
pub fn duality_gap(primal_h: f64, rank_one: &RankOnePoint) -> f64 {
    rank_one.h_y as f64 - primal_h
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowSumCheck {
    /// False when the total entry sum is not (numerically) zero.
    pub applicable: bool,
    pub holds: bool,
    pub total: f64,
    pub max_row_sum: f64,
    /// `√(λ_max · max(total, 0)) + tol`, the bound implied by `‖Y1‖² ≤ λ_max·1ᵀY1`.
    pub bound: f64,
}

/// For PSD `Y`, a vanishing total sum forces every row sum to vanish.
pub fn psd_row_sum_check(y: &SymMatrix, tol: f64) -> Result<RowSumCheck> {
    let vals = eigvals_sym(y)?;
    let (lo, hi) = match (vals.first(), vals.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(Error::Empty("matrix".into())),
    };
    if lo < -tol * hi.abs().max(1.0) {
        return Err(Error::Precondition(format!("matrix is not PSD (eigenvalue {lo:e})")));
    }
    let total = y.sum();
    let max_row_sum = y.row_sums().iter().fold(0.0f64, |a, r| a.max(r.abs()));
    let bound = (hi.max(0.0) * total.max(0.0)).sqrt() + tol;
    if total.abs() > tol {
        return Ok(RowSumCheck { applicable: false, holds: true, total, max_row_sum, bound });
    }
    Ok(RowSumCheck { applicable: true, holds: max_row_sum <= bound, total, max_row_sum, bound })
}

/// All three certificates at one correction vector plus a bisection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityWitness {
    pub primal: PrimalCert,
    pub rank_one: RankOnePoint,
    pub fk_dual: FkDualCert,
    pub gap: f64,
}

pub fn duality_witness(g: &Graph, d: &[f64], y: &BisectionVector) -> Result<DualityWitness> {
    let primal = build_primal_cert(g, d)?;
    let rank_one = build_rank_one_point(y, g)?;
    let fk_dual = build_fk_dual_cert(g, d)?;
    let gap = duality_gap(primal.h_equiv, &rank_one);
    Ok(DualityWitness { primal, rank_one, fk_dual, gap })
}
