//! Undirected simple graphs and balanced ±1 bisection vectors.
//!
//! Vertices are 0-based everywhere. The edge-list text format is
//!
//! ```text
//! n m
//! u v      (m lines, 0 <= u < v < n)
//! ```
//!
//! UTF-8 with LF line endings; [`Graph::to_edge_list`] writes edges sorted
//! lexicographically so equal graphs serialize to identical bytes.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from `(u, v)` pairs in any orientation.
    ///
    /// Rejects self-loops, duplicates and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("graph needs at least one vertex".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(Error::DuplicateEdge(e.0, e.1));
            }
        }
        Ok(Self::from_sorted_unique(n, set.into_iter().collect()))
    }

    pub(crate) fn from_sorted_unique(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph { n, edges, adj }
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::from_edges(n, std::iter::empty())
    }

    /// Parses the edge-list format. Every error carries a 1-based line number.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing \"n m\" header".into(),
        })?;
        let (n, m) = parse_pair(header, hline + 1)?;
        if n == 0 {
            return Err(Error::Parse { line: hline + 1, msg: "n must be positive".into() });
        }
        let mut set = BTreeSet::new();
        let mut count = 0;
        for (idx, line) in lines {
            let lineno = idx + 1;
            let (u, v) = parse_pair(line, lineno)?;
            count += 1;
            if count > m {
                return Err(Error::Parse { line: lineno, msg: format!("more than {m} edge lines") });
            }
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange { vertex: u.max(v), n });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if u > v {
                return Err(Error::Parse { line: lineno, msg: format!("expected u < v, got {u} {v}") });
            }
            if !set.insert((u, v)) {
                return Err(Error::DuplicateEdge(u, v));
            }
        }
        if count != m {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                msg: format!("header announces {m} edges, found {count}"),
            });
        }
        Ok(Self::from_sorted_unique(n, set.into_iter().collect()))
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(8 * (self.edges.len() + 1));
        let _ = writeln!(out, "{} {}", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Edges as sorted `(u, v)` pairs with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// Dense symmetric 0/1 adjacency matrix.
    pub fn adjacency(&self) -> SymMatrix {
        let mut a = SymMatrix::zeros(self.n);
        for &(u, v) in &self.edges {
            a.set_sym(u, v, 1.0);
        }
        a
    }

    /// `A x` without materializing the dense matrix.
    pub fn adj_mul(&self, x: &[f64]) -> Vec<f64> {
        self.adj
            .iter()
            .map(|list| list.iter().map(|&j| x[j]).sum())
            .collect()
    }

    /// `x^T A x`.
    pub fn adj_quadratic(&self, x: &[f64]) -> f64 {
        2.0 * self.edges.iter().map(|&(u, v)| x[u] * x[v]).sum::<f64>()
    }

    /// Errors unless `n` is even, as every bisection workflow requires.
    pub fn require_even(&self) -> Result<()> {
        if self.n % 2 == 1 {
            Err(Error::OddVertexCount(self.n))
        } else {
            Ok(())
        }
    }

    /// Returns a copy with `extra` isolated vertices appended.
    pub fn with_isolated(&self, extra: usize) -> Graph {
        Self::from_sorted_unique(self.n + extra, self.edges.clone())
    }

    pub(crate) fn with_edge_set(&self, edges: BTreeSet<(usize, usize)>) -> Graph {
        Self::from_sorted_unique(self.n, edges.into_iter().collect())
    }
}

fn parse_pair(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        let tok = it.next().ok_or_else(|| Error::Parse { line: lineno, msg: format!("missing {what}") })?;
        tok.parse::<usize>().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("{what} is not a nonnegative integer: {tok:?}"),
        })
    };
    let a = next("first value")?;
    let b = next("second value")?;
    if it.next().is_some() {
        return Err(Error::Parse { line: lineno, msg: "trailing tokens".into() });
    }
    Ok((a, b))
}

/// A ±1 vector with zero sum, encoding a balanced split of the vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct BisectionVector(Vec<i8>);

impl BisectionVector {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::NotBisection("empty vector".into()));
        }
        if let Some(pos) = values.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::NotBisection(format!("entry {pos} is {}", values[pos])));
        }
        let sum: i64 = values.iter().map(|&v| v as i64).sum();
        if sum != 0 {
            return Err(Error::NotBisection(format!("entries sum to {sum}")));
        }
        Ok(BisectionVector(values))
    }

    /// `+1` on the given vertex set, `-1` elsewhere.
    pub fn from_plus_set(n: usize, plus: &[usize]) -> Result<Self> {
        let mut v = vec![-1i8; n];
        for &i in plus {
            if i >= n {
                return Err(Error::VertexOutOfRange { vertex: i, n });
            }
            v[i] = 1;
        }
        Self::new(v)
    }

    /// Bit `i` of `mask` set means vertex `i` is on the `+1` side.
    pub fn from_mask(n: usize, mask: u64) -> Result<Self> {
        Self::new((0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&v| v as f64).collect()
    }

    pub fn negated(&self) -> Self {
        BisectionVector(self.0.iter().map(|&v| -v).collect())
    }

    /// Representative of `{x, -x}` whose first entry is `+1`.
    pub fn canonical(&self) -> Self {
        if self.0[0] == 1 {
            self.clone()
        } else {
            self.negated()
        }
    }

    pub fn same_split(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }

    pub fn plus_set(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.0[i] == 1).collect()
    }
}

impl TryFrom<Vec<i8>> for BisectionVector {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BisectionVector> for Vec<i8> {
    fn from(b: BisectionVector) -> Self {
        b.0
    }
}

/// Number of edges whose endpoints lie on opposite sides of `x`.
pub fn cut_width(g: &Graph, x: &BisectionVector) -> Result<usize> {
    if x.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), got: x.len() });
    }
    Ok(g.edges().iter().filter(|&&(u, v)| x.get(u) != x.get(v)).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p4() -> Graph {
        Graph::from_edge_list("4 3\n0 1\n1 2\n2 3").unwrap()
    }

    fn bv(v: &[i8]) -> BisectionVector {
        BisectionVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn parses_empty_graph() {
        let g = Graph::from_edge_list("4 0").unwrap();
        assert_eq!((g.n(), g.m()), (4, 0));
    }

    #[test]
    fn parses_path() {
        let g = p4();
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(g.degree(1), 2);
    }

    #[test]
    fn rejects_duplicate_edge() {
        let err = Graph::from_edge_list("4 3\n0 1\n0 1\n2 3").unwrap_err();
        assert_eq!(err, Error::DuplicateEdge(0, 1));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(Graph::from_edge_list("3 1\n1 1"), Err(Error::SelfLoop(1))));
        assert!(matches!(
            Graph::from_edge_list("3 1\n0 3"),
            Err(Error::VertexOutOfRange { vertex: 3, n: 3 })
        ));
        assert!(matches!(Graph::from_edge_list("3 1\n0 x"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Graph::from_edge_list("3 2\n0 1"), Err(Error::Parse { .. })));
        assert!(matches!(Graph::from_edge_list("3 1\n2 1"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Graph::from_edge_list(""), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn edge_list_roundtrip_is_sorted() {
        let g = Graph::from_edges(5, [(3, 1), (0, 4), (1, 0)]).unwrap();
        assert_eq!(g.to_edge_list(), "5 3\n0 1\n0 4\n1 3\n");
        assert_eq!(Graph::from_edge_list(&g.to_edge_list()).unwrap(), g);
    }

    #[test]
    fn bisection_vector_rules() {
        assert!(BisectionVector::new(vec![1, 1, -1]).is_err());
        assert!(BisectionVector::new(vec![1, 0, -1, 0]).is_err());
        let x = bv(&[-1, 1, 1, -1]);
        assert_eq!(x.canonical().values(), &[1, -1, -1, 1]);
        assert!(x.same_split(&x.negated()));
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, "[-1,1,1,-1]");
        assert!(serde_json::from_str::<BisectionVector>("[1,1]").is_err());
    }

    #[test]
    fn cut_width_examples() {
        let empty = Graph::empty(4).unwrap();
        assert_eq!(cut_width(&empty, &bv(&[1, -1, 1, -1])).unwrap(), 0);
        assert_eq!(cut_width(&p4(), &bv(&[1, 1, -1, -1])).unwrap(), 1);
        let k4 = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        for x in [[1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]] {
            assert_eq!(cut_width(&k4, &bv(&x)).unwrap(), 4);
        }
        assert!(matches!(
            cut_width(&p4(), &bv(&[1, -1])),
            Err(Error::LengthMismatch { expected: 4, got: 2 })
        ));
    }

    #[test]
    fn quadratic_form_matches_dense() {
        let g = p4();
        let x = [0.3, -1.0, 2.0, 0.5];
        let dense = g.adjacency().quadratic(&x);
        assert!((g.adj_quadratic(&x) - dense).abs() < 1e-12);
    }
}
