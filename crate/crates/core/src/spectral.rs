//! The zero-sum subspace `S = {x : Σx = 0}` and the top eigenpairs of
//! `A + diag(d)` restricted to it.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{dot, SymMatrix, Tridiagonal};
use serde::{Deserialize, Serialize};

/// Default clustering tolerance for the top eigenvalue.
pub const MULT_TOL: f64 = 1e-7;

/// Orthonormal basis of `S`: vector `k` (1-based) has `k` leading entries
/// equal to `1/√(k(k+1))`, entry `k` equal to `−k/√(k(k+1))`, zeros after.
///
/// The basis is never stored; coordinates and lifts are O(n) prefix/suffix
/// sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubspaceBasis {
    n: usize,
}

impl SubspaceBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("subspace basis needs n >= 2, got {n}")));
        }
        Ok(SubspaceBasis { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n - 1
    }

    /// The basis vectors as explicit length-n arrays.
    pub fn vectors(&self) -> Vec<Vec<f64>> {
        (1..self.n)
            .map(|k| {
                let s = 1.0 / ((k * (k + 1)) as f64).sqrt();
                let mut v = vec![0.0; self.n];
                v[..k].iter_mut().for_each(|x| *x = s);
                v[k] = -(k as f64) * s;
                v
            })
            .collect()
    }

    /// `Qᵀ x`.
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n - 1);
        let mut prefix = x[0];
        for k in 1..self.n {
            let kf = k as f64;
            out.push((prefix - kf * x[k]) / (kf * (kf + 1.0)).sqrt());
            prefix += x[k];
        }
        out
    }

    /// `Q z`, a zero-sum length-n vector.
    pub fn lift(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = vec![0.0; n];
        let mut suffix = 0.0;
        for j in (0..n).rev() {
            let mut v = suffix;
            if j >= 1 {
                let jf = j as f64;
                let s = 1.0 / (jf * (jf + 1.0)).sqrt();
                v -= jf * z[j - 1] * s;
                suffix += z[j - 1] * s;
            }
            x[j] = v;
        }
        x
    }
}

/// `Qᵀ (A + diag(d)) Q`, the (n−1)×(n−1) representation of `B_S` on `S`.
pub fn reduced_matrix(g: &Graph, d: &[f64], basis: &SubspaceBasis) -> Result<SymMatrix> {
    let n = g.n();
    if d.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: d.len() });
    }
    if basis.n() != n {
        return Err(Error::LengthMismatch { expected: n, got: basis.n() });
    }
    let dim = n - 1;
    // rows of B Q, then Qᵀ applied to each column (stored as rows of the transpose)
    let mut bq_t = vec![vec![0.0; n]; dim];
    let mut row = vec![0.0; n];
    for i in 0..n {
        row.iter_mut().for_each(|x| *x = 0.0);
        for &j in g.neighbors(i) {
            row[j] = 1.0;
        }
        row[i] += d[i];
        for (k, c) in basis.coords(&row).into_iter().enumerate() {
            bq_t[k][i] = c;
        }
    }
    let mut r = SymMatrix::zeros(dim);
    for (l, col) in bq_t.iter().enumerate() {
        for (k, v) in basis.coords(col).into_iter().enumerate() {
            r.set(k, l, v);
        }
    }
    // Round-off makes the two triangles differ in the last bits.
    for i in 0..dim {
        for j in 0..i {
            let v = 0.5 * (r.get(i, j) + r.get(j, i));
            r.set_sym(i, j, v);
        }
    }
    Ok(r)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralResult {
    pub lambda_max: f64,
    /// Unit, zero-sum, pairwise orthogonal; spans the top eigenspace.
    pub eigvecs: Vec<Vec<f64>>,
    pub multiplicity: usize,
    /// Max over returned vectors of `‖R v̂ − λ v̂‖₂` in reduced coordinates.
    pub residual: f64,
    /// Distance to the next eigenvalue outside the top cluster.
    pub gap: Option<f64>,
    /// Full reduced spectrum, ascending.
    pub eigenvalues: Vec<f64>,
}

fn residual(r: &SymMatrix, z: &[f64], lambda: f64) -> f64 {
    let rz = r.mul_vec(z);
    rz.iter().zip(z).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt()
}

fn cluster(values: &[f64], mult_tol: f64) -> (f64, usize, Option<f64>) {
    let top = *values.last().expect("nonempty spectrum");
    let cut = top - mult_tol * top.abs().max(1.0);
    let k = values.iter().rev().take_while(|&&v| v >= cut).count();
    let gap = (k < values.len()).then(|| top - values[values.len() - 1 - k]);
    (top, k, gap)
}

/// Largest eigenvalue of `B_S` with its (clustered) eigenspace.
pub fn top_eigpair_s(g: &Graph, d: &[f64], mult_tol: f64) -> Result<SpectralResult> {
    let basis = SubspaceBasis::new(g.n())?;
    let r = reduced_matrix(g, d, &basis)?;
    top_eigpair_reduced(&r, &basis, mult_tol)
}

pub(crate) fn top_eigpair_reduced(r: &SymMatrix, basis: &SubspaceBasis, mult_tol: f64) -> Result<SpectralResult> {
    let tri = Tridiagonal::reduce(r);
    let values = tri.eigenvalues()?;
    let (top, k, gap) = cluster(&values, mult_tol);
    let tol = 1e-9 * top.abs().max(1.0);
    if k == 1 {
        let mut z = tri.inverse_iteration(top);
        tri.back_transform(&mut z);
        let res = residual(r, &z, top);
        if res <= tol {
            return Ok(SpectralResult {
                lambda_max: top,
                eigvecs: vec![basis.lift(&z)],
                multiplicity: 1,
                residual: res,
                gap,
                eigenvalues: values,
            });
        }
    }
    let full = tri.eigen()?;
    let (top, k, gap) = cluster(&full.values, mult_tol);
    let dim = full.values.len();
    let mut worst = 0.0f64;
    let mut eigvecs = Vec::with_capacity(k);
    for idx in (dim - k..dim).rev() {
        let z = &full.vectors[idx];
        worst = worst.max(residual(r, z, full.values[idx]));
        eigvecs.push(basis.lift(z));
    }
    Ok(SpectralResult { lambda_max: top, eigvecs, multiplicity: k, residual: worst, gap, eigenvalues: full.values })
}

/// `xᵀ (A + diag(d)) x`.
pub fn rayleigh(g: &Graph, d: &[f64], x: &[f64]) -> f64 {
    g.adj_quadratic(x) + x.iter().zip(d).map(|(xi, di)| di * xi * xi).sum::<f64>()
}

/// `(A + diag(d)) x`.
pub fn b_mul(g: &Graph, d: &[f64], x: &[f64]) -> Vec<f64> {
    let mut y = g.adj_mul(x);
    for ((yi, xi), di) in y.iter_mut().zip(x).zip(d) {
        *yi += di * xi;
    }
    y
}

/// `P (A + diag(d)) P x` with `P = I − J/n`.
pub fn bs_mul(g: &Graph, d: &[f64], x: &[f64]) -> Vec<f64> {
    let px = center(x);
    center(&b_mul(g, d, &px))
}

pub fn center(x: &[f64]) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - mean).collect()
}

pub fn unit(x: &[f64]) -> Vec<f64> {
    let nrm = dot(x, x).sqrt();
    x.iter().map(|v| v / nrm).collect()
}
