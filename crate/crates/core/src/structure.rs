//! Structure of tight optima: the correction `d^(y) = −diag(y) A y` of a
//! bisection, checks that an optimum has the expected form, and detectors
//! for substructures that force `h(G) < bw(G)`.

use crate::adversary::MonotoneMove;
use crate::error::{Error, Result};
use crate::graph::{cut_width, BisectionVector, Graph};
use crate::solver::normalize_d;
use crate::spectral::{bs_mul, rayleigh, top_eigpair_s, MULT_TOL};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Threshold above which a Rayleigh quotient disproves tightness.
pub const TOL_POS: f64 = 1e-8;

fn check_len(g: &Graph, y: &BisectionVector) -> Result<()> {
    if y.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), got: y.len() });
    }
    Ok(())
}

/// `d_i = −y_i (A y)_i`: cross-neighbors minus same-side neighbors.
pub fn correction_from_bisection(g: &Graph, y: &BisectionVector) -> Result<Vec<f64>> {
    check_len(g, y)?;
    let d: Vec<i64> = (0..g.n())
        .map(|i| {
            let yi = y.get(i) as i64;
            -yi * g.neighbors(i).iter().map(|&j| y.get(j) as i64).sum::<i64>()
        })
        .collect();
    let total: i64 = d.iter().sum();
    debug_assert_eq!(total, 4 * cut_width(g, y)? as i64 - 2 * g.m() as i64);
    Ok(d.into_iter().map(|v| v as f64).collect())
}

/// Splits `d_star − d^(y)` over `span{y, 1}`; returns the coefficient on
/// `y` and the norm of the part outside the span.
pub fn recover_alpha(g: &Graph, y: &BisectionVector, d_star: &[f64]) -> Result<(f64, f64)> {
    let dy = correction_from_bisection(g, y)?;
    if d_star.len() != dy.len() {
        return Err(Error::LengthMismatch { expected: dy.len(), got: d_star.len() });
    }
    let n = dy.len() as f64;
    let r: Vec<f64> = d_star.iter().zip(&dy).map(|(a, b)| a - b).collect();
    // y ⟂ 1 and both have squared norm n
    let alpha = r.iter().zip(y.values()).map(|(ri, &yi)| ri * yi as f64).sum::<f64>() / n;
    let shift = r.iter().sum::<f64>() / n;
    let off = r
        .iter()
        .zip(y.values())
        .map(|(ri, &yi)| (ri - alpha * yi as f64 - shift).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((alpha, off))
}

/// `‖B_S y − λ y‖∞` with `d_star` first shifted to `Σd = 4·cw(y) − 2m`.
pub fn check_eigenvector_lemma(g: &Graph, d_star: &[f64], y: &BisectionVector) -> Result<f64> {
    check_len(g, y)?;
    let target = 4.0 * cut_width(g, y)? as f64 - 2.0 * g.m() as f64;
    let d = normalize_d(d_star, target);
    let spec = top_eigpair_s(g, &d, MULT_TOL)?;
    let yf = y.to_f64();
    let by = bs_mul(g, &d, &yf);
    Ok(by.iter().zip(&yf).map(|(b, v)| (b - spec.lambda_max * v).abs()).fold(0.0, f64::max))
}

fn split_degrees(g: &Graph, y: &BisectionVector, v: usize) -> (usize, usize) {
    let same = g.neighbors(v).iter().filter(|&&u| y.get(u) == y.get(v)).count();
    (same, g.degree(v) - same)
}

/// Non-adjacent cross pairs `(u, w)` (u on the `+1` side) where both
/// vertices have as many neighbors across as on their own side, yet their
/// neighborhoods differ. At a tight optimum no such pair can exist.
pub fn balanced_same_neighbor_violations(g: &Graph, y: &BisectionVector) -> Result<Vec<(usize, usize)>> {
    check_len(g, y)?;
    let balanced: Vec<usize> = (0..g.n())
        .filter(|&v| {
            let (same, cross) = split_degrees(g, y, v);
            same == cross
        })
        .collect();
    let mut out = Vec::new();
    for &u in balanced.iter().filter(|&&u| y.get(u) > 0) {
        for &w in balanced.iter().filter(|&&w| y.get(w) < 0) {
            if !g.has_edge(u, w) && g.neighbors(u) != g.neighbors(w) {
                out.push((u, w));
            }
        }
    }
    Ok(out)
}

/// `(u', u, w, w')` with `u` on the `+1` side.
pub type PathSegment = (usize, usize, usize, usize);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSegments {
    pub segments: Vec<PathSegment>,
    /// The failure conclusion needs at least 10 vertices.
    pub applies: bool,
}

/// Cut edges `{u, w}` where both ends have degree 2 and their other
/// neighbors sit on their own sides.
pub fn detect_path_segment(g: &Graph, y: &BisectionVector) -> Result<PathSegments> {
    check_len(g, y)?;
    let mut segments = Vec::new();
    for &(a, b) in g.edges() {
        if y.get(a) == y.get(b) || g.degree(a) != 2 || g.degree(b) != 2 {
            continue;
        }
        let (u, w) = if y.get(a) > 0 { (a, b) } else { (b, a) };
        let other = |v: usize, not: usize| *g.neighbors(v).iter().find(|&&x| x != not).expect("degree 2");
        let (up, wp) = (other(u, w), other(w, u));
        if y.get(up) == y.get(u) && y.get(wp) == y.get(w) {
            segments.push((up, u, w, wp));
        }
    }
    Ok(PathSegments { segments, applies: g.n() >= 10 })
}

/// A 2×c ladder across the cut: `u[i]` on the `+1` side, `w[i]` on the
/// `−1` side.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lattice {
    pub u: Vec<usize>,
    pub w: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattices {
    pub lattices: Vec<Lattice>,
    /// The failure conclusion needs at least `10c` vertices.
    pub applies: bool,
}

pub const LATTICE_MAX_C: usize = 4;

/// Ladders with rungs `u_i–w_i`, rails `u_i–u_{i+1}` and `w_i–w_{i+1}`,
/// where every ladder vertex has exactly one further neighbor, outside the
/// ladder and on its own side. `c = 1` is the path segment case.
pub fn detect_lattice(g: &Graph, y: &BisectionVector, c: usize) -> Result<Lattices> {
    check_len(g, y)?;
    if c == 0 || c > LATTICE_MAX_C {
        return Err(Error::InvalidParameter(format!("lattice length must be in 1..={LATTICE_MAX_C}, got {c}")));
    }
    let applies = g.n() >= 10 * c;
    if c == 1 {
        let lattices = detect_path_segment(g, y)?
            .segments
            .into_iter()
            .map(|(_, u, w, _)| Lattice { u: vec![u], w: vec![w] })
            .collect();
        return Ok(Lattices { lattices, applies });
    }
    let mut found = BTreeSet::new();
    // Interior ladder vertices have degree 4, the two ends degree 3.
    let fits = |v: usize| g.degree(v) == 3 || g.degree(v) == 4;
    for &(a, b) in g.edges() {
        if y.get(a) == y.get(b) || !fits(a) || !fits(b) {
            continue;
        }
        let (u, w) = if y.get(a) > 0 { (a, b) } else { (b, a) };
        let mut us = vec![u];
        let mut ws = vec![w];
        extend_ladder(g, y, c, &mut us, &mut ws, &mut found);
    }
    Ok(Lattices { lattices: found.into_iter().collect(), applies })
}

fn extend_ladder(
    g: &Graph,
    y: &BisectionVector,
    c: usize,
    us: &mut Vec<usize>,
    ws: &mut Vec<usize>,
    found: &mut BTreeSet<Lattice>,
) {
    if us.len() == c {
        if ladder_is_exact(g, y, us, ws) && us[0] < us[c - 1] {
            found.insert(Lattice { u: us.clone(), w: ws.clone() });
        }
        return;
    }
    let (lu, lw) = (*us.last().unwrap(), *ws.last().unwrap());
    for &nu in g.neighbors(lu) {
        if y.get(nu) != y.get(lu) || us.contains(&nu) {
            continue;
        }
        for &nw in g.neighbors(lw) {
            if y.get(nw) != y.get(lw) || ws.contains(&nw) || !g.has_edge(nu, nw) {
                continue;
            }
            us.push(nu);
            ws.push(nw);
            extend_ladder(g, y, c, us, ws, found);
            us.pop();
            ws.pop();
        }
    }
}

fn ladder_is_exact(g: &Graph, y: &BisectionVector, us: &[usize], ws: &[usize]) -> bool {
    let c = us.len();
    let members: BTreeSet<usize> = us.iter().chain(ws).copied().collect();
    for (row, other) in [(us, ws), (ws, us)] {
        for i in 0..c {
            let v = row[i];
            let mut expected = vec![other[i]];
            if i > 0 {
                expected.push(row[i - 1]);
            }
            if i + 1 < c {
                expected.push(row[i + 1]);
            }
            let extra: Vec<usize> = g.neighbors(v).iter().copied().filter(|x| !expected.contains(x)).collect();
            if g.degree(v) != expected.len() + 1 || extra.len() != 1 {
                return false;
            }
            if members.contains(&extra[0]) || y.get(extra[0]) != y.get(v) {
                return false;
            }
        }
    }
    true
}

/// True when at least two vertices are isolated.
pub fn detect_isolated_pair(g: &Graph) -> bool {
    (0..g.n()).filter(|&v| g.degree(v) == 0).take(2).count() == 2
}

pub fn isolated_vertices(g: &Graph) -> Vec<usize> {
    (0..g.n()).filter(|&v| g.degree(v) == 0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessParams {
    pub c_plus: Vec<usize>,
    pub c_minus: Vec<usize>,
    pub k: usize,
    pub delta: usize,
    pub l: usize,
    pub z: f64,
    pub beta: f64,
    /// The sides were exchanged so the larger set plays `C₊`.
    pub swapped: bool,
}

/// `z` and `β` for given `k`, `δ`, `l`.
pub fn witness_constants(k: usize, delta: usize, l: usize) -> (f64, f64) {
    let (k, d, l) = (k as f64, delta as f64, l as f64);
    let z = (2.0 * k * l + d * l + 2.0 * (k * l * (k + d) * (l + d)).sqrt()) / (4.0 * k * k + 4.0 * d * k - d * l);
    let beta = ((d + l / (z * z)) / (d + l)).sqrt();
    (z, beta)
}

/// Builds the test vector that shows `λ(B_S) > 0` along the whole line
/// `d^(y) + α y` when the cut-boundary sets `C₊`, `C₋` are small and
/// densely joined.
pub fn witness_vector(
    g: &Graph,
    y: &BisectionVector,
    c_plus: &[usize],
    c_minus: &[usize],
) -> Result<(WitnessParams, Vec<f64>)> {
    check_len(g, y)?;
    let n = g.n();
    let fail = |m: String| Err(Error::WitnessCondition(m));
    if c_plus.is_empty() || c_minus.is_empty() {
        return fail("both vertex sets must be nonempty".into());
    }
    let sp: BTreeSet<usize> = c_plus.iter().copied().collect();
    let sm: BTreeSet<usize> = c_minus.iter().copied().collect();
    for (set, side, name) in [(&sp, 1i8, "C_plus"), (&sm, -1i8, "C_minus")] {
        for &v in set.iter() {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            let at_cut = g.neighbors(v).iter().any(|&u| y.get(u) != y.get(v));
            if y.get(v) != side || !at_cut {
                return fail(format!("{name} contains {v}, which is not a cut vertex on side {side:+}"));
            }
        }
    }
    // The larger set plays C₊.
    let swapped = sp.len() < sm.len();
    let (big, small, orient) = if swapped { (&sm, &sp, -1.0) } else { (&sp, &sm, 1.0) };
    let k = small.len();
    let delta = big.len() - k;
    let half = n / 2;
    let l = half - (k + delta);
    let (kf, df, lf) = (k as f64, delta as f64, l as f64);
    let size_ok = if delta == 0 {
        3 * k < l
    } else {
        4 * k < l && df < (4.0 * kf * kf / (lf - 4.0 * kf)).min(7.0 * lf / 128.0)
    };
    if !size_ok {
        return fail(if delta == 0 {
            format!("size condition 3k < l fails: 3k = {}, l = {l}", 3 * k)
        } else {
            format!(
                "size condition 4k < l and delta < min(4k^2/(l-4k), 7l/128) fails: k = {k}, delta = {delta}, l = {l}"
            )
        });
    }
    let inside: BTreeSet<usize> = sp.union(&sm).copied().collect();
    let mut joined = 0usize;
    let mut leaving = 0usize;
    for &(a, b) in g.edges() {
        match (inside.contains(&a), inside.contains(&b)) {
            (true, true) if y.get(a) != y.get(b) => joined += 1,
            (true, false) | (false, true) => leaving += 1,
            _ => {}
        }
    }
    if 2 * joined < leaving {
        return fail(format!("edge condition 2|E(C+, C-)| >= |E(C, rest)| fails: 2*{joined} < {leaving}"));
    }
    let (z, beta) = witness_constants(k, delta, l);
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let big_side = y.get(i) as f64 * orient > 0.0;
            if inside.contains(&i) {
                z
            } else if big_side {
                -1.0
            } else {
                -beta * z
            }
        })
        .collect();
    let sum: f64 = x.iter().sum();
    let (sq_pos, sq_neg) = side_squares(y, &x);
    let scale = z.max(1.0);
    assert!(sum.abs() <= 1e-9 * scale * n as f64, "witness sum {sum}");
    assert!((sq_pos - sq_neg).abs() <= 1e-9 * scale * scale * n as f64, "witness squares {sq_pos} {sq_neg}");
    let params = WitnessParams {
        c_plus: sp.into_iter().collect(),
        c_minus: sm.into_iter().collect(),
        k,
        delta,
        l,
        z,
        beta,
        swapped,
    };
    Ok((params, x))
}

fn side_squares(y: &BisectionVector, x: &[f64]) -> (f64, f64) {
    let mut pos = 0.0;
    let mut neg = 0.0;
    for (i, v) in x.iter().enumerate() {
        if y.get(i) > 0 {
            pos += v * v;
        } else {
            neg += v * v;
        }
    }
    (pos, neg)
}

/// `xᵀ (A + diag(d^(y))) x` for a balanced witness `x`; positive means no
/// `d^(y) + α y` attains `cw(y)`.
pub fn disprove_tightness(g: &Graph, y: &BisectionVector, x: &[f64]) -> Result<(f64, bool)> {
    check_len(g, y)?;
    if x.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), got: x.len() });
    }
    let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let n = x.len() as f64;
    let sum: f64 = x.iter().sum();
    let (pos, neg) = side_squares(y, x);
    if sum.abs() > 1e-9 * scale * n || (pos - neg).abs() > 1e-9 * scale * scale * n {
        return Err(Error::WitnessCondition(format!(
            "witness is not balanced: sum {sum:.3e}, square difference {:.3e}",
            pos - neg
        )));
    }
    let dy = correction_from_bisection(g, y)?;
    let excess = rayleigh(g, &dy, x);
    Ok((excess, excess > TOL_POS))
}

/// Follows an optimal correction through monotone moves: each move
/// subtracts 1 at both endpoints, starting from `d_opt` shifted to
/// `Σd = 4·cw(y) − 2m`. On a tight instance the result is tight on the
/// edited graph.
pub fn update_correction(g: &Graph, y: &BisectionVector, d_opt: &[f64], moves: &[MonotoneMove]) -> Result<Vec<f64>> {
    check_len(g, y)?;
    if d_opt.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), got: d_opt.len() });
    }
    let target = 4.0 * cut_width(g, y)? as f64 - 2.0 * g.m() as f64;
    let mut d = normalize_d(d_opt, target);
    for mv in moves {
        d[mv.u] -= 1.0;
        d[mv.v] -= 1.0;
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    SameNeighbor { u: usize, w: usize },
    PathSegment { u_prime: usize, u: usize, w: usize, w_prime: usize, applies: bool },
    Lattice { u: Vec<usize>, w: Vec<usize>, applies: bool },
    IsolatedPair { vertices: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub d_y: Vec<f64>,
    pub alpha: Option<f64>,
    pub eigen_residual: Option<f64>,
    pub off_span_residual: Option<f64>,
    pub violations: Vec<Finding>,
}

/// Runs every detector for `y`, plus the optimum-shape checks when a
/// candidate optimal correction is given.
pub fn analyze(g: &Graph, y: &BisectionVector, d_star: Option<&[f64]>) -> Result<StructureReport> {
    let d_y = correction_from_bisection(g, y)?;
    let (alpha, off_span_residual, eigen_residual) = match d_star {
        Some(d) => {
            let (a, off) = recover_alpha(g, y, d)?;
            (Some(a), Some(off), Some(check_eigenvector_lemma(g, d, y)?))
        }
        None => (None, None, None),
    };
    let mut violations: Vec<Finding> = balanced_same_neighbor_violations(g, y)?
        .into_iter()
        .map(|(u, w)| Finding::SameNeighbor { u, w })
        .collect();
    let paths = detect_path_segment(g, y)?;
    violations.extend(paths.segments.iter().map(|&(u_prime, u, w, w_prime)| Finding::PathSegment {
        u_prime,
        u,
        w,
        w_prime,
        applies: paths.applies,
    }));
    for c in 2..=LATTICE_MAX_C {
        let lat = detect_lattice(g, y, c)?;
        violations.extend(lat.lattices.into_iter().map(|l| Finding::Lattice { u: l.u, w: l.w, applies: lat.applies }));
    }
    let iso = isolated_vertices(g);
    if iso.len() >= 2 {
        violations.push(Finding::IsolatedPair { vertices: iso });
    }
    Ok(StructureReport { d_y, alpha, eigen_residual, off_span_residual, violations })
}

/// Test and demo graphs with known failure structure.
pub mod fixtures {
    use crate::graph::{BisectionVector, Graph};

    fn clique(offset: usize, size: usize, edges: &mut Vec<(usize, usize)>) {
        for a in 0..size {
            for b in a + 1..size {
                edges.push((offset + a, offset + b));
            }
        }
    }

    /// Two K4s joined by the path `a3 – u – w – b0` (n = 10, bw = 1).
    /// Returns the graph, the optimal split and `(u', u, w, w')`.
    pub fn double_k4_path() -> (Graph, BisectionVector, (usize, usize, usize, usize)) {
        let mut edges = Vec::new();
        clique(0, 4, &mut edges);
        clique(6, 4, &mut edges);
        edges.extend([(3, 4), (4, 5), (5, 6)]);
        let g = Graph::from_edges(10, edges).expect("valid fixture");
        let y = BisectionVector::from_plus_set(10, &[0, 1, 2, 3, 4]).expect("balanced");
        (g, y, (3, 4, 5, 6))
    }

    /// A 4-cycle plus two isolated vertices (n = 6, bw = 2).
    pub fn c4_plus_isolated() -> Graph {
        Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (0, 3)]).expect("valid fixture")
    }

    /// A 2×2 ladder whose four corners each hang off a K5 (n = 24, bw = 2).
    /// Returns the graph, the split along the rungs and the ladder.
    pub fn ladder_2x2() -> (Graph, BisectionVector, super::Lattice) {
        let mut edges = Vec::new();
        for blob in 0..4 {
            clique(blob * 5, 5, &mut edges);
        }
        // u1 = 20, u2 = 21, w1 = 22, w2 = 23; blobs 0,1 on the + side
        let (u1, u2, w1, w2) = (20, 21, 22, 23);
        edges.extend([(u1, w1), (u2, w2), (u1, u2), (w1, w2)]);
        edges.extend([(0, u1), (5, u2), (10, w1), (15, w2)]);
        let g = Graph::from_edges(24, edges).expect("valid fixture");
        let plus: Vec<usize> = (0..10).chain([u1, u2]).collect();
        let y = BisectionVector::from_plus_set(24, &plus).expect("balanced");
        (g, y, super::Lattice { u: vec![u1, u2], w: vec![w1, w2] })
    }

    /// Two K4s on opposite sides; `u` joins one vertex of each and so does
    /// `w`, but through different vertices (n = 10).
    pub fn balanced_mismatch() -> (Graph, BisectionVector, (usize, usize)) {
        let mut edges = Vec::new();
        clique(0, 4, &mut edges);
        clique(4, 4, &mut edges);
        let (u, w) = (8, 9);
        edges.extend([(u, 0), (u, 4), (w, 1), (w, 5)]);
        let g = Graph::from_edges(10, edges).expect("valid fixture");
        let y = BisectionVector::from_plus_set(10, &[0, 1, 2, 3, u]).expect("balanced");
        (g, y, (u, w))
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::generators::{hypercube, hypercube_dimension_cut, planted_bisection};
    use crate::rng;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::Rng as _;

    fn p4() -> (Graph, BisectionVector) {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        (g, BisectionVector::new(vec![1, 1, -1, -1]).unwrap())
    }

    #[test]
    fn correction_examples() {
        let (g, y) = p4();
        assert_eq!(correction_from_bisection(&g, &y).unwrap(), vec![-1.0, 0.0, 0.0, -1.0]);
        let e = Graph::empty(4).unwrap();
        assert_eq!(correction_from_bisection(&e, &y).unwrap(), vec![0.0; 4]);
        let k44 = planted_bisection(8, 0.0, 1.0, 1).unwrap();
        assert_eq!(correction_from_bisection(&k44.graph, &k44.planted).unwrap(), vec![4.0; 8]);
    }

    #[test]
    fn alpha_examples() {
        let (g, y) = p4();
        let dy = correction_from_bisection(&g, &y).unwrap();
        let d: Vec<f64> = dy.iter().zip(y.values()).map(|(a, &b)| a + 3.0 * b as f64 + 5.0).collect();
        let (alpha, off) = recover_alpha(&g, &y, &d).unwrap();
        assert!((alpha - 3.0).abs() < 1e-12 && off <= 1e-12);
        assert_eq!(recover_alpha(&g, &y, &dy).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn eigenvector_lemma_examples() {
        let (g, y) = p4();
        assert!(check_eigenvector_lemma(&g, &[-1.0, 0.0, 0.0, -1.0], &y).unwrap() <= 1e-10);
        let h = hypercube(3).unwrap();
        for bit in 0..3 {
            let y = hypercube_dimension_cut(3, bit);
            assert!(check_eigenvector_lemma(&h, &[-1.0; 8], &y).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn same_neighbor_examples() {
        let (g, y, (u, w)) = balanced_mismatch();
        assert_eq!(balanced_same_neighbor_violations(&g, &y).unwrap(), vec![(u, w)]);
        let k44 = planted_bisection(8, 0.0, 1.0, 1).unwrap();
        assert!(balanced_same_neighbor_violations(&k44.graph, &k44.planted).unwrap().is_empty());
        let kk = planted_bisection(8, 1.0, 0.0, 1).unwrap();
        assert!(balanced_same_neighbor_violations(&kk.graph, &kk.planted).unwrap().is_empty());
        // the path fixture's balanced pair is adjacent, so the lemma is silent
        let (g, y, _) = double_k4_path();
        assert!(balanced_same_neighbor_violations(&g, &y).unwrap().is_empty());
    }

    #[test]
    fn path_detector() {
        let (g, y, seg) = double_k4_path();
        let found = detect_path_segment(&g, &y).unwrap();
        assert_eq!(found.segments, vec![seg]);
        assert!(found.applies);
        let found = detect_path_segment(&g, &y.negated()).unwrap();
        assert_eq!(found.segments, vec![(seg.3, seg.2, seg.1, seg.0)]);
        assert!(detect_path_segment(&hypercube(3).unwrap(), &hypercube_dimension_cut(3, 0)).unwrap().segments.is_empty());
        let c4 = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let found = detect_path_segment(&c4, &BisectionVector::new(vec![1, 1, -1, -1]).unwrap()).unwrap();
        assert_eq!(found.segments.len(), 2);
        assert!(!found.applies);
    }

    #[test]
    fn lattice_detector() {
        let (g, y, lat) = ladder_2x2();
        let found = detect_lattice(&g, &y, 2).unwrap();
        assert_eq!(found.lattices, vec![lat]);
        assert!(found.applies);
        assert!(detect_lattice(&g, &y, 3).unwrap().lattices.is_empty());
        let (p, py, _) = double_k4_path();
        assert_eq!(detect_lattice(&p, &py, 1).unwrap().lattices.len(), 1);
        let cyc = Graph::from_edges(20, (0..20).map(|i| (i, (i + 1) % 20))).unwrap();
        let cy = BisectionVector::from_plus_set(20, &(0..10).collect::<Vec<_>>()).unwrap();
        assert!(detect_lattice(&cyc, &cy, 2).unwrap().lattices.is_empty());
        assert!(detect_lattice(&g, &y, 5).is_err());
    }

    #[test]
    fn isolated_detector() {
        assert!(detect_isolated_pair(&c4_plus_isolated()));
        assert!(!detect_isolated_pair(&Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap()));
        assert!(detect_isolated_pair(&Graph::empty(4).unwrap()));
    }

    #[test]
    fn witness_on_path_fixture() {
        let (g, y, (_, u, w, _)) = double_k4_path();
        let (params, x) = witness_vector(&g, &y, &[u], &[w]).unwrap();
        assert_eq!((params.k, params.delta, params.l), (1, 0, 4));
        assert!((params.z - 4.0).abs() < 1e-12 && (params.beta - 0.25).abs() < 1e-12);
        let (excess, disproved) = disprove_tightness(&g, &y, &x).unwrap();
        assert!(excess > TOL_POS && disproved);
    }

    #[test]
    fn witness_delta_zero_closed_form() {
        for (k, l) in [(1, 4), (2, 7), (3, 20)] {
            let (z, beta) = witness_constants(k, 0, l);
            assert!((z - l as f64 / k as f64).abs() < 1e-12);
            assert!((beta - 1.0 / z).abs() < 1e-12);
        }
    }

    #[test]
    fn witness_size_condition() {
        // n = 14, k = 2 gives l = 5 and 3k = 6 >= 5
        let mut edges = vec![(0, 7), (1, 8)];
        edges.extend([(0, 2), (1, 3), (7, 9), (8, 10)]);
        let g = Graph::from_edges(14, edges).unwrap();
        let y = BisectionVector::from_plus_set(14, &[0, 1, 2, 3, 4, 5, 6]).unwrap();
        let err = witness_vector(&g, &y, &[0, 1], &[7, 8]).unwrap_err();
        assert!(matches!(err, Error::WitnessCondition(ref m) if m.contains("3k < l")), "{err}");
        assert!(witness_vector(&g, &y, &[2], &[7]).is_err());
    }

    #[test]
    fn unbalanced_witness_rejected() {
        let (g, y, _) = double_k4_path();
        assert!(disprove_tightness(&g, &y, &[1.0; 10]).is_err());
    }

    #[test]
    fn witness_unequal_sets() {
        // |C+| = 5, |C-| = 4: k = 4, delta = 1, l = 25
        let n = 60;
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for i in 0..29 {
            edges.push((i, i + 1));
            edges.push((30 + i, 31 + i));
        }
        for a in 0..5 {
            for b in 30..34 {
                edges.push((a, b));
            }
        }
        let g = Graph::from_edges(n, edges).unwrap();
        let y = BisectionVector::from_plus_set(n, &(0..30).collect::<Vec<_>>()).unwrap();
        let cp: Vec<usize> = (0..5).collect();
        let cm: Vec<usize> = (30..34).collect();
        let (params, x) = witness_vector(&g, &y, &cp, &cm).unwrap();
        assert_eq!((params.k, params.delta, params.l), (4, 1, 25));
        assert!(!params.swapped);
        assert!(x.iter().sum::<f64>().abs() < 1e-9);
        let (swapped, xs) = witness_vector(&g, &y.negated(), &cm, &cp).unwrap();
        assert!(swapped.swapped);
        assert!((swapped.z - params.z).abs() < 1e-12);
        assert!(xs.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn update_correction_stays_tight() {
        let (g, y) = p4();
        let d = vec![-1.0, 0.0, 0.0, -1.0];
        let moves = [MonotoneMove::remove(1, 2)];
        let d2 = update_correction(&g, &y, &d, &moves).unwrap();
        let g2 = crate::adversary::apply_monotone_moves(&g, &y, &moves).unwrap();
        let (h, _) = crate::solver::eval_g(&g2, &d2).unwrap();
        assert!(h.abs() < 1e-12);
    }

    #[test]
    fn report_serializes_tagged() {
        let g = c4_plus_isolated();
        let y = BisectionVector::new(vec![1, 1, -1, -1, 1, -1]).unwrap();
        let r = analyze(&g, &y, None).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"kind\":\"isolated_pair\""));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn correction_sum_identity(seed in 0u64..100_000) {
            let mut r = rng::seeded(seed);
            let n = 2 * r.random_range(1..10usize);
            let p = r.random_range(0.0..1.0);
            let inst = planted_bisection(n, p, p, seed).unwrap();
            let mut labels: Vec<i8> = (0..n).map(|i| if i < n / 2 { 1 } else { -1 }).collect();
            labels.shuffle(&mut r);
            let y = BisectionVector::new(labels).unwrap();
            let d = correction_from_bisection(&inst.graph, &y).unwrap();
            let cw = cut_width(&inst.graph, &y).unwrap() as f64;
            prop_assert_eq!(d.iter().sum::<f64>(), 4.0 * cw - 2.0 * inst.graph.m() as f64);
        }

        #[test]
        fn alpha_round_trip(seed in 0u64..100_000, alpha in -20.0f64..20.0, c in -20.0f64..20.0) {
            let inst = planted_bisection(12, 0.5, 0.2, seed).unwrap();
            let y = &inst.planted;
            let dy = correction_from_bisection(&inst.graph, y).unwrap();
            let d: Vec<f64> = dy.iter().zip(y.values()).map(|(a, &b)| a + alpha * b as f64 + c).collect();
            let (got, off) = recover_alpha(&inst.graph, y, &d).unwrap();
            prop_assert!((got - alpha).abs() <= 1e-10);
            prop_assert!(off <= 1e-10);
        }
    }
}
