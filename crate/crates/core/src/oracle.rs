//! Exhaustive minimum bisection for small graphs.

use crate::error::{Error, Result};
use crate::graph::{BisectionVector, Graph};
use crate::par::{self, Execution};
use serde::{Deserialize, Serialize};

pub const ORACLE_MAX_N: usize = 28;
const CHUNK: u64 = 1 << 15;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub bw: usize,
    /// Lexicographic in the +1 set, which always contains vertex 0.
    pub optimal_bisections: Vec<BisectionVector>,
    pub count: usize,
}

fn check_n(n: usize) -> Result<()> {
    if n % 2 == 1 {
        return Err(Error::OddVertexCount(n));
    }
    if n > ORACLE_MAX_N {
        return Err(Error::TooLarge { n, cap: ORACLE_MAX_N });
    }
    if n == 0 {
        return Err(Error::Empty("graph has no vertices".into()));
    }
    Ok(())
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of bisections of `n` vertices up to sign, `C(n−1, n/2−1)`.
pub fn bisection_count(n: usize) -> Result<u64> {
    check_n(n)?;
    Ok(binomial(n as u64 - 1, n as u64 / 2 - 1))
}

/// Every bisection of `0..n` exactly once, with vertex 0 on the +1 side,
/// in lexicographic order of the +1 set.
pub fn enumerate_bisections(n: usize) -> Result<Bisections> {
    check_n(n)?;
    let h = n / 2;
    Ok(Bisections { n, plus: Some((0..h).collect()) })
}

#[derive(Clone, Debug)]
pub struct Bisections {
    n: usize,
    plus: Option<Vec<usize>>,
}

impl Iterator for Bisections {
    type Item = BisectionVector;

    fn next(&mut self) -> Option<BisectionVector> {
        let plus = self.plus.as_mut()?;
        let out = BisectionVector::from_plus_set(self.n, plus).expect("balanced by construction");
        let h = plus.len();
        // advance positions 1..h, keeping plus[0] = 0
        let mut i = h;
        loop {
            if i <= 1 {
                self.plus = None;
                break;
            }
            i -= 1;
            if plus[i] < self.n - h + i {
                plus[i] += 1;
                for j in i + 1..h {
                    plus[j] = plus[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Mask of the `rank`-th `k`-subset of `0..`, in colexicographic order.
fn unrank_colex(mut rank: u64, k: u64) -> u64 {
    let mut mask = 0u64;
    for i in (1..=k).rev() {
        let mut c = i - 1;
        while binomial(c + 1, i) <= rank {
            c += 1;
        }
        rank -= binomial(c, i);
        mask |= 1 << c;
    }
    mask
}

/// Next mask with the same popcount (Gosper).
fn next_combination(x: u64) -> u64 {
    let c = x & x.wrapping_neg();
    let r = x + c;
    (((r ^ x) >> 2) / c) | r
}

pub fn brute_force_bw(g: &Graph) -> Result<OracleResult> {
    brute_force_bw_with(g, Execution::default())
}

pub fn brute_force_bw_with(g: &Graph, exec: Execution) -> Result<OracleResult> {
    let n = g.n();
    check_n(n)?;
    let adj: Vec<u64> = (0..n).map(|v| g.neighbors(v).iter().fold(0u64, |m, &u| m | 1 << u)).collect();
    let full = (1u64 << n) - 1;
    let k = (n / 2 - 1) as u64;
    let total = binomial(n as u64 - 1, k);
    let chunks = total.div_ceil(CHUNK);
    let cut = |s: u64| -> usize {
        let out = full & !s;
        let mut rest = s;
        let mut c = 0;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            c += (adj[v] & out).count_ones() as usize;
            rest &= rest - 1;
        }
        c
    };
    let partial = par::map_indexed(exec, chunks as usize, |ci| {
        let start = ci as u64 * CHUNK;
        let len = CHUNK.min(total - start);
        let mut mask = if k == 0 { 0 } else { unrank_colex(start, k) };
        let mut best = usize::MAX;
        let mut hits = Vec::new();
        for step in 0..len {
            let s = 1 | (mask << 1);
            let c = cut(s);
            if c < best {
                best = c;
                hits.clear();
            }
            if c == best {
                hits.push(s);
            }
            if step + 1 < len {
                mask = next_combination(mask);
            }
        }
        (best, hits)
    });
    let bw = partial.iter().map(|(b, _)| *b).min().expect("at least one bisection");
    let mut optimal = Vec::new();
    for (b, hits) in partial {
        if b == bw {
            for s in hits {
                optimal.push(BisectionVector::from_mask(n, s)?);
            }
        }
    }
    optimal.sort_by_key(|b| b.plus_set());
    let count = optimal.len();
    Ok(OracleResult { bw, optimal_bisections: optimal, count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{hypercube, hypercube_dimension_cut, planted_bisection};
    use crate::graph::cut_width;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let k4 = Graph::from_edges(4, (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v)))).unwrap();
        let r = brute_force_bw(&k4).unwrap();
        assert_eq!((r.bw, r.count), (4, 3));
        let r = brute_force_bw(&hypercube(3).unwrap()).unwrap();
        assert_eq!((r.bw, r.count), (4, 3));
        for bit in 0..3 {
            assert!(r.optimal_bisections.contains(&hypercube_dimension_cut(3, bit).canonical()));
        }
        let two_k4 = planted_bisection(8, 1.0, 0.0, 2).unwrap();
        let r = brute_force_bw(&two_k4.graph).unwrap();
        assert_eq!((r.bw, r.count), (0, 1));
        assert_eq!(r.optimal_bisections[0], two_k4.planted.canonical());
    }

    #[test]
    fn bounds() {
        assert!(matches!(brute_force_bw(&Graph::empty(30).unwrap()), Err(Error::TooLarge { .. })));
        assert!(matches!(brute_force_bw(&Graph::empty(5).unwrap()), Err(Error::OddVertexCount(5))));
        assert!(enumerate_bisections(7).is_err());
        assert!(enumerate_bisections(30).is_err());
    }

    #[test]
    fn enumeration_counts_and_order() {
        for (n, want) in [(2, 1), (4, 3), (6, 10), (8, 35), (10, 126)] {
            let all: Vec<_> = enumerate_bisections(n).unwrap().collect();
            assert_eq!(all.len(), want);
            assert_eq!(bisection_count(n).unwrap(), want as u64);
            assert!(all.windows(2).all(|w| w[0].plus_set() < w[1].plus_set()));
            assert!(all.iter().all(|b| b.get(0) == 1));
        }
        let first: Vec<_> = enumerate_bisections(6).unwrap().take(2).map(|b| b.plus_set()).collect();
        assert_eq!(first, vec![vec![0, 1, 2], vec![0, 1, 3]]);
    }

    #[test]
    fn chunking_matches_stream() {
        // n = 20 spans several chunks
        let inst = planted_bisection(20, 0.4, 0.2, 11).unwrap();
        let fast = brute_force_bw_with(&inst.graph, Execution::Sequential).unwrap();
        let par = brute_force_bw_with(&inst.graph, Execution::Parallel).unwrap();
        assert_eq!(fast, par);
        let mut best = usize::MAX;
        let mut all = Vec::new();
        for y in enumerate_bisections(20).unwrap() {
            let c = cut_width(&inst.graph, &y).unwrap();
            if c < best {
                best = c;
                all.clear();
            }
            if c == best {
                all.push(y);
            }
        }
        assert_eq!(fast.bw, best);
        assert_eq!(fast.optimal_bisections, all);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]

        #[test]
        fn optimal_set_is_consistent(seed in 0u64..10_000, half in 1usize..6, p in 0.1f64..0.9) {
            let n = 2 * half;
            let g = planted_bisection(n, p, p, seed).unwrap().graph;
            let r = brute_force_bw(&g).unwrap();
            prop_assert_eq!(r.count, r.optimal_bisections.len());
            let mut min = usize::MAX;
            for y in enumerate_bisections(n).unwrap() {
                min = min.min(cut_width(&g, &y).unwrap());
            }
            prop_assert_eq!(r.bw, min);
            for y in &r.optimal_bisections {
                prop_assert_eq!(cut_width(&g, y).unwrap(), r.bw);
                prop_assert_eq!(y.get(0), 1);
            }
        }
    }
}
