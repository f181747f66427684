//! Dense symmetric eigen-machinery.
//!
//! Householder reduction to tridiagonal form followed by the implicit-shift
//! QL iteration (the EISPACK `tql2` scheme). A values-only path plus
//! tridiagonal inverse iteration is used when only an isolated top
//! eigenpair is needed.

use crate::error::{Error, Result};

/// Row-major dense symmetric matrix (both triangles stored).
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Fills the matrix from `f(i, j)`; no symmetry is enforced, see
    /// [`SymMatrix::max_asymmetry`].
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        SymMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| rows[i][j])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.set(i, j, v);
        self.set(j, i, v);
    }

    pub fn add_diag(&mut self, d: &[f64]) {
        for (i, &x) in d.iter().enumerate() {
            self.data[i * self.n + i] += x;
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn quadratic(&self, x: &[f64]) -> f64 {
        dot(&self.mul_vec(x), x)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Row sums.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// `vectors[i]` is the unit eigenvector for `values[i]`.
    pub vectors: Vec<Vec<f64>>,
}

impl EigenDecomposition {
    /// `‖M − V Λ Vᵀ‖_F`.
    pub fn reconstruction_error(&self, m: &SymMatrix) -> f64 {
        let n = m.n();
        let mut err = 0.0;
        for i in 0..n {
            for j in 0..n {
                let r: f64 = self
                    .values
                    .iter()
                    .zip(&self.vectors)
                    .map(|(l, v)| l * v[i] * v[j])
                    .sum();
                err += (m.get(i, j) - r).powi(2);
            }
        }
        err.sqrt()
    }

    /// `max |VᵀV − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        worst
    }
}

/// Hard cap on QL sweeps per eigenvalue.
pub const QL_MAX_SWEEPS: usize = 50;

/// Default relative tolerance for symmetric eigen-solves.
pub const EIG_TOL: f64 = 1e-11;

const SYMMETRY_TOL: f64 = 1e-12;

/// Full eigendecomposition of a symmetric matrix.
///
/// Fails on asymmetric input (beyond 1e−12) and when the QL sweep cap is
/// hit or the reconstruction error exceeds `tol · max(1, ‖M‖_F)`.
pub fn eig_sym(mat: &SymMatrix, tol: f64) -> Result<EigenDecomposition> {
    let asym = mat.max_asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let n = mat.n();
    if n == 0 {
        return Ok(EigenDecomposition { values: vec![], vectors: vec![] });
    }
    let out = Tridiagonal::reduce(mat).eigen()?;
    if n <= 400 {
        // O(n³) check; skipped for the largest inputs where it would dominate.
        let scale = mat.frobenius().max(1.0);
        let err = out.reconstruction_error(mat);
        if err > tol.max(1e-14) * scale * (n as f64).sqrt().max(1.0) {
            return Err(Error::NoConvergence { iterations: QL_MAX_SWEEPS, residual: err });
        }
    }
    Ok(out)
}

fn sort_pairs(values: Vec<f64>, vectors: Vec<Vec<f64>>) -> EigenDecomposition {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    EigenDecomposition {
        values: idx.iter().map(|&i| values[i]).collect(),
        vectors: idx.iter().map(|&i| vectors[i].clone()).collect(),
    }
}

/// Eigenvalues only, ascending.
pub fn eigvals_sym(mat: &SymMatrix) -> Result<Vec<f64>> {
    let tri = Tridiagonal::reduce(mat);
    tri.eigenvalues()
}

/// Householder tridiagonal form `T = Qᵀ M Q` with the reflectors kept so
/// that individual eigenvectors can be mapped back in O(n²).
#[derive(Clone, Debug)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples `diag[i]` and `diag[i + 1]`; the last entry is 0.
    pub off: Vec<f64>,
    n: usize,
    /// Reflector `k` acts on coordinates `k+1..n` as `I − τ v vᵀ`.
    reflectors: Vec<(Vec<f64>, f64)>,
}

impl Tridiagonal {
    pub fn reduce(mat: &SymMatrix) -> Self {
        let n = mat.n();
        let mut a = mat.as_slice().to_vec();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
        let mut p = vec![0.0; n];
        for k in 0..n.saturating_sub(2) {
            diag[k] = a[k * n + k];
            let m = n - k - 1;
            let mut v: Vec<f64> = (0..m).map(|i| a[(k + 1 + i) * n + k]).collect();
            let alpha = v[0];
            let xnorm = norm2(&v[1..]);
            if xnorm == 0.0 {
                off[k] = alpha;
                reflectors.push((Vec::new(), 0.0));
                continue;
            }
            let beta = -alpha.signum() * alpha.hypot(xnorm);
            let tau = (beta - alpha) / beta;
            let scale = 1.0 / (alpha - beta);
            v[0] = 1.0;
            for x in &mut v[1..] {
                *x *= scale;
            }
            off[k] = beta;
            // p = τ A22 v
            let base = k + 1;
            for i in 0..m {
                let row = &a[(base + i) * n + base..(base + i) * n + n];
                p[i] = tau * dot(row, &v);
            }
            let kappa = 0.5 * tau * dot(&p[..m], &v);
            for i in 0..m {
                p[i] -= kappa * v[i];
            }
            // A22 -= v wᵀ + w vᵀ
            for i in 0..m {
                let (vi, wi) = (v[i], p[i]);
                let row = &mut a[(base + i) * n + base..(base + i) * n + n];
                for ((r, &vj), &wj) in row.iter_mut().zip(&v).zip(&p[..m]) {
                    *r -= vi * wj + wi * vj;
                }
            }
            reflectors.push((v, tau));
        }
        if n >= 2 {
            diag[n - 2] = a[(n - 2) * n + n - 2];
            off[n - 2] = a[(n - 1) * n + n - 2];
        }
        diag[n - 1] = a[(n - 1) * n + n - 1];
        off[n - 1] = 0.0;
        Tridiagonal { diag, off, n, reflectors }
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        ql_implicit(&mut d, &mut e, None)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// Full decomposition of the original matrix, eigenvalues ascending.
    pub fn eigen(&self) -> Result<EigenDecomposition> {
        let mut vecs = self.q_transpose();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        ql_implicit(&mut d, &mut e, Some(&mut vecs))?;
        Ok(sort_pairs(d, vecs))
    }

    /// Maps a tridiagonal-coordinate vector back: returns `Q z`.
    pub fn back_transform(&self, z: &mut [f64]) {
        for (k, (v, tau)) in self.reflectors.iter().enumerate().rev() {
            if *tau == 0.0 {
                continue;
            }
            let tail = &mut z[k + 1..];
            let s = tau * dot(v, tail);
            for (t, &vi) in tail.iter_mut().zip(v) {
                *t -= s * vi;
            }
        }
    }

    /// `Qᵀ` as rows (row `i` is column `i` of `Q`).
    fn q_transpose(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        // Q = H_0 H_1 … H_{K}; accumulate from the right-most reflector so
        // each step touches only the trailing block.
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            q[i * n + i] = 1.0;
        }
        let mut u = vec![0.0; n];
        for (k, (v, tau)) in self.reflectors.iter().enumerate().rev() {
            if *tau == 0.0 {
                continue;
            }
            let b = k + 1;
            // u = vᵀ Q[b.., b..]
            u[b..].iter_mut().for_each(|x| *x = 0.0);
            for (i, &vi) in v.iter().enumerate() {
                let row = &q[(b + i) * n + b..(b + i) * n + n];
                for (acc, &r) in u[b..].iter_mut().zip(row) {
                    *acc += vi * r;
                }
            }
            for (i, &vi) in v.iter().enumerate() {
                let f = tau * vi;
                let row = &mut q[(b + i) * n + b..(b + i) * n + n];
                for (r, &uj) in row.iter_mut().zip(&u[b..]) {
                    *r -= f * uj;
                }
            }
        }
        (0..n).map(|c| (0..n).map(|r| q[r * n + c]).collect()).collect()
    }

    /// Unit eigenvector of `T` for an (isolated) eigenvalue `mu`, by
    /// inverse iteration, in tridiagonal coordinates.
    pub fn inverse_iteration(&self, mu: f64) -> Vec<f64> {
        let n = self.n;
        if n == 1 {
            return vec![1.0];
        }
        let tnorm = self
            .diag
            .iter()
            .zip(&self.off)
            .map(|(d, e)| d.abs() + 2.0 * e.abs())
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let sigma = mu + 4.0 * f64::EPSILON * tnorm;
        let lu = TridiagLu::factor(&self.diag, &self.off, sigma, tnorm);
        // Fixed, non-degenerate start vector.
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (((i * 7919) % 97) as f64 / 97.0)).collect();
        for _ in 0..3 {
            lu.solve(&mut x);
            let nrm = norm2(&x);
            x.iter_mut().for_each(|v| *v /= nrm);
        }
        x
    }

    /// `‖T z − μ z‖₂`.
    pub fn residual(&self, z: &[f64], mu: f64) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            let mut r = (self.diag[i] - mu) * z[i];
            if i + 1 < n {
                r += self.off[i] * z[i + 1];
            }
            if i > 0 {
                r += self.off[i - 1] * z[i - 1];
            }
            acc += r * r;
        }
        acc.sqrt()
    }
}

/// LU factorization with partial pivoting of `T − σ I`.
struct TridiagLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: &[f64], sigma: f64, tnorm: f64) -> Self {
        let n = diag.len();
        let tiny = f64::EPSILON * tnorm;
        let guard = |x: f64| if x.abs() < tiny { if x < 0.0 { -tiny } else { tiny } } else { x };
        let (mut u0, mut u1, mut u2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];
        let mut a = diag[0] - sigma;
        let mut b = off[0];
        for i in 0..n - 1 {
            let c = off[i];
            let nd = diag[i + 1] - sigma;
            let ns = if i + 2 < n { off[i + 1] } else { 0.0 };
            if a.abs() >= c.abs() {
                let piv = guard(a);
                let l = c / piv;
                u0[i] = piv;
                u1[i] = b;
                u2[i] = 0.0;
                a = nd - l * b;
                b = ns;
                mult[i] = l;
            } else {
                let l = a / c;
                swapped[i] = true;
                u0[i] = c;
                u1[i] = nd;
                u2[i] = ns;
                a = b - l * nd;
                b = -l * ns;
                mult[i] = l;
            }
        }
        u0[n - 1] = guard(a);
        TridiagLu { u0, u1, u2, mult, swapped }
    }

    fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.mult[i] * x[i];
        }
        x[n - 1] /= self.u0[n - 1];
        if n >= 2 {
            x[n - 2] = (x[n - 2] - self.u1[n - 2] * x[n - 1]) / self.u0[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.u1[i] * x[i + 1] - self.u2[i] * x[i + 2]) / self.u0[i];
        }
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix.
///
/// `d` holds the diagonal, `e[i]` couples `i` and `i + 1` (last entry
/// ignored). On return `d` holds the eigenvalues (unsorted). When `rows`
/// is given, row `i` is rotated together with eigenvalue `i`, so starting
/// from `Qᵀ` the rows end up as eigenvectors of the original matrix.
pub fn ql_implicit(d: &mut [f64], e: &mut [f64], mut rows: Option<&mut Vec<Vec<f64>>>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        let mut iter = 0;
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            loop {
                iter += 1;
                if iter > QL_MAX_SWEEPS {
                    return Err(Error::NoConvergence { iterations: iter - 1, residual: e[l].abs() });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = rows.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut(i + 1);
                        let zi = &mut lo[i];
                        let zi1 = &mut hi[0];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let hv = *b;
                            *b = s * *a + c * hv;
                            *a = c * *a - s * hv;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
