//! Monotone adversary: edits that only help a reference bisection `y`,
//! either deleting an edge it cuts or adding an edge inside one side.

use crate::error::{Error, Result};
use crate::graph::{BisectionVector, Graph};
use crate::rng;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    RemoveCutEdge,
    AddInnerEdge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonotoneMove {
    pub kind: MoveKind,
    pub u: usize,
    pub v: usize,
}

impl MonotoneMove {
    pub fn remove(u: usize, v: usize) -> Self {
        MonotoneMove { kind: MoveKind::RemoveCutEdge, u, v }
    }

    pub fn add(u: usize, v: usize) -> Self {
        MonotoneMove { kind: MoveKind::AddInnerEdge, u, v }
    }

    fn key(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }
}

/// Applies `moves` in order, validating each against the current graph.
pub fn apply_monotone_moves(g: &Graph, y: &BisectionVector, moves: &[MonotoneMove]) -> Result<Graph> {
    let n = g.n();
    if y.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: y.len() });
    }
    let mut edges: BTreeSet<(usize, usize)> = g.edges().iter().copied().collect();
    for (index, mv) in moves.iter().enumerate() {
        let bad = |reason: String| Err(Error::InvalidMove { index, reason });
        if mv.u >= n || mv.v >= n {
            return bad(format!("vertex out of range for n={n}"));
        }
        if mv.u == mv.v {
            return bad("self-loop".into());
        }
        let same = y.get(mv.u) == y.get(mv.v);
        let key = mv.key();
        match mv.kind {
            MoveKind::RemoveCutEdge => {
                if same {
                    return bad(format!("{{{}, {}}} is not a cut pair", key.0, key.1));
                }
                if !edges.remove(&key) {
                    return bad(format!("edge {{{}, {}}} does not exist", key.0, key.1));
                }
            }
            MoveKind::AddInnerEdge => {
                if !same {
                    return bad(format!("{{{}, {}}} crosses the bisection", key.0, key.1));
                }
                if !edges.insert(key) {
                    return bad(format!("edge {{{}, {}}} exists", key.0, key.1));
                }
            }
        }
    }
    Ok(g.with_edge_set(edges))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoveSample {
    pub moves: Vec<MonotoneMove>,
    /// True when the valid move set ran out before `count` moves.
    pub exhausted: bool,
}

impl MoveSample {
    pub fn removed(&self) -> usize {
        self.moves.iter().filter(|m| m.kind == MoveKind::RemoveCutEdge).count()
    }

    pub fn added(&self) -> usize {
        self.moves.len() - self.removed()
    }
}

/// Samples up to `count` moves; each is uniform over the moves valid
/// after the previous ones were applied.
pub fn sample_monotone_moves(g: &Graph, y: &BisectionVector, count: usize, seed: u64) -> Result<MoveSample> {
    let n = g.n();
    if y.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: y.len() });
    }
    let mut r = rng::seeded(seed);
    let mut edges: BTreeSet<(usize, usize)> = g.edges().iter().copied().collect();
    let mut cut: Vec<(usize, usize)> = g.edges().iter().copied().filter(|&(u, v)| y.get(u) != y.get(v)).collect();
    let plus = y.plus_set();
    let minus: Vec<usize> = (0..n).filter(|&v| y.get(v) < 0).collect();
    let half_pairs = plus.len() * (plus.len() - 1) / 2;
    let inner_pairs = 2 * half_pairs;
    let mut inner_edges = edges.len() - cut.len();
    let mut moves = Vec::with_capacity(count);
    while moves.len() < count {
        let free_inner = inner_pairs - inner_edges;
        let total = cut.len() + free_inner;
        if total == 0 {
            return Ok(MoveSample { moves, exhausted: true });
        }
        let pick = r.random_range(0..total);
        if pick < cut.len() {
            let (u, v) = cut.swap_remove(pick);
            edges.remove(&(u, v));
            moves.push(MonotoneMove::remove(u, v));
            continue;
        }
        let pair = if free_inner * 8 >= inner_pairs {
            // Rejection sampling over all same-side pairs.
            loop {
                let side = if r.random_bool(0.5) { &plus } else { &minus };
                let a = side[r.random_range(0..side.len())];
                let b = side[r.random_range(0..side.len())];
                let key = (a.min(b), a.max(b));
                if a != b && !edges.contains(&key) {
                    break key;
                }
            }
        } else {
            let mut free = Vec::with_capacity(free_inner);
            for side in [&plus, &minus] {
                for (i, &a) in side.iter().enumerate() {
                    for &b in &side[i + 1..] {
                        let key = (a.min(b), a.max(b));
                        if !edges.contains(&key) {
                            free.push(key);
                        }
                    }
                }
            }
            free.sort_unstable();
            free[r.random_range(0..free.len())]
        };
        edges.insert(pair);
        inner_edges += 1;
        moves.push(MonotoneMove::add(pair.0, pair.1));
    }
    Ok(MoveSample { moves, exhausted: false })
}
