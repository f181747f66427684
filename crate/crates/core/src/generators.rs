//! Seeded generators for the planted bisection model, hypercubes and a
//! planted regular model.
//!
//! Every generator is a pure function of its parameters and seed. The
//! random stream is xoshiro256** seeded through splitmix64; sub-tasks draw
//! from independent substreams so adding draws to one stage never shifts
//! another.

use crate::error::{Error, Result};
use crate::graph::{cut_width, BisectionVector, Graph};
use crate::rng::{self, Rng};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

const TAG_LABELS: u64 = 1;
const TAG_EDGES: u64 = 2;
const TAG_CROSS: u64 = 3;
const TAG_INNER: u64 = 4;

/// Attempts per stage before the planted regular generator gives up.
pub const REGULAR_ATTEMPTS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GeneratorParams {
    Planted { n: usize, p: f64, q: f64 },
    PlantedRegular { n: usize, r: usize, b: usize },
}

/// A generated graph with the balanced split it was built around.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDoc", into = "InstanceDoc")]
pub struct PlantedInstance {
    pub graph: Graph,
    pub planted: BisectionVector,
    pub params: GeneratorParams,
    pub seed: u64,
}

impl PlantedInstance {
    pub fn planted_cut(&self) -> usize {
        cut_width(&self.graph, &self.planted).expect("planted vector matches graph")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    n: usize,
    params: GeneratorParams,
    seed: u64,
    planted: Vec<i8>,
    edges: Vec<[usize; 2]>,
}

impl From<PlantedInstance> for InstanceDoc {
    fn from(inst: PlantedInstance) -> Self {
        InstanceDoc {
            n: inst.graph.n(),
            params: inst.params,
            seed: inst.seed,
            planted: inst.planted.values().to_vec(),
            edges: inst.graph.edges().iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

impl TryFrom<InstanceDoc> for PlantedInstance {
    type Error = Error;
    fn try_from(doc: InstanceDoc) -> Result<Self> {
        let graph = Graph::from_edges(doc.n, doc.edges.iter().map(|e| (e[0], e[1])))?;
        let planted = BisectionVector::new(doc.planted)?;
        if planted.len() != doc.n {
            return Err(Error::LengthMismatch { expected: doc.n, got: planted.len() });
        }
        Ok(PlantedInstance { graph, planted, params: doc.params, seed: doc.seed })
    }
}

fn check_even(n: usize) -> Result<()> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::OddVertexCount(n));
    }
    Ok(())
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("{name} = {p} is not a probability")));
    }
    Ok(())
}

/// First half `+1`, second half `−1`, then shuffled.
fn planted_labels(n: usize, seed: u64) -> BisectionVector {
    let mut labels: Vec<i8> = (0..n).map(|i| if i < n / 2 { 1 } else { -1 }).collect();
    labels.shuffle(&mut rng::substream(seed, TAG_LABELS));
    BisectionVector::new(labels).expect("balanced by construction")
}

/// Planted bisection model: intra-part pairs are edges with probability
/// `p`, cross pairs with probability `q`.
pub fn planted_bisection(n: usize, p: f64, q: f64, seed: u64) -> Result<PlantedInstance> {
    check_even(n)?;
    check_probability("p", p)?;
    check_probability("q", q)?;
    let planted = planted_labels(n, seed);
    let y = planted.values();
    let mut r = rng::substream(seed, TAG_EDGES);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let prob = if y[u] == y[v] { p } else { q };
            if r.random_bool(prob) {
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::from_sorted_unique(n, edges);
    Ok(PlantedInstance { graph, planted, params: GeneratorParams::Planted { n, p, q }, seed })
}

/// Hypercube on `2^k` vertices; labels differing in one bit are adjacent.
pub fn hypercube(k: u32) -> Result<Graph> {
    if k == 0 || k > 20 {
        return Err(Error::InvalidParameter(format!("hypercube dimension must be in 1..=20, got {k}")));
    }
    let n = 1usize << k;
    let mut edges = Vec::with_capacity(n * k as usize / 2);
    for u in 0..n {
        for bit in 0..k {
            let v = u ^ (1 << bit);
            if u < v {
                edges.push((u, v));
            }
        }
    }
    edges.sort_unstable();
    Ok(Graph::from_sorted_unique(n, edges))
}

/// The bisection of the hypercube along coordinate `bit`.
pub fn hypercube_dimension_cut(k: u32, bit: u32) -> BisectionVector {
    let n = 1usize << k;
    BisectionVector::new((0..n).map(|u| if u >> bit & 1 == 0 { 1 } else { -1 }).collect())
        .expect("balanced by construction")
}

/// Random simple graph on stub degrees: `stubs[i]` copies of vertex `i`
/// are paired, avoiding loops and pairs already in `taken`.
/// Returns `None` when the pairing gets stuck.
fn pair_stubs(
    mut stubs: Vec<usize>,
    same_set_allowed: impl Fn(usize, usize) -> bool,
    taken: &mut BTreeSet<(usize, usize)>,
    r: &mut Rng,
) -> Option<Vec<(usize, usize)>> {
    let mut out = Vec::with_capacity(stubs.len() / 2);
    while !stubs.is_empty() {
        let mut placed = false;
        for _ in 0..64 {
            let i = r.random_range(0..stubs.len());
            let j = r.random_range(0..stubs.len());
            let (a, b) = (stubs[i], stubs[j]);
            if i == j || a == b || !same_set_allowed(a, b) {
                continue;
            }
            let key = (a.min(b), a.max(b));
            if taken.contains(&key) {
                continue;
            }
            taken.insert(key);
            out.push(key);
            let (hi, lo) = (i.max(j), i.min(j));
            stubs.swap_remove(hi);
            stubs.swap_remove(lo);
            placed = true;
            break;
        }
        if !placed {
            return None;
        }
    }
    Some(out)
}

/// `b` endpoints spread over `side` as evenly as possible, at random.
fn spread(side: &[usize], b: usize, r: &mut Rng) -> Vec<usize> {
    let h = side.len();
    let mut order = side.to_vec();
    order.shuffle(r);
    let mut counts = vec![b / h; h];
    for c in counts.iter_mut().take(b % h) {
        *c += 1;
    }
    let mut out = Vec::with_capacity(b);
    for (&v, &c) in order.iter().zip(&counts) {
        out.extend(std::iter::repeat_n(v, c));
    }
    out
}

/// Planted regular model: an `r`-regular graph whose planted bisection
/// cuts exactly `b` edges.
///
/// Cross edges are placed first (cross degrees differ by at most one),
/// then each side is completed to degree `r` by stub pairing with
/// collision avoidance. The output is not uniform over r-regular graphs
/// with bisection width `b`.
pub fn planted_regular(n: usize, r: usize, b: usize, seed: u64) -> Result<PlantedInstance> {
    check_even(n)?;
    let h = n / 2;
    let infeasible = |why: String| Err(Error::Infeasible(format!("n={n}, r={r}, b={b}: {why}")));
    if r >= h {
        return infeasible(format!("degree must be below n/2 = {h}"));
    }
    if b > h * h {
        return infeasible("more cross edges than cross pairs".into());
    }
    if b > r * h {
        return infeasible("cross degree would exceed r".into());
    }
    if (h * r - b) % 2 == 1 {
        return infeasible("inner degree sum per side is odd".into());
    }
    let planted = planted_labels(n, seed);
    let plus = planted.plus_set();
    let minus: Vec<usize> = (0..n).filter(|&v| planted.get(v) < 0).collect();
    let y = planted.values().to_vec();
    for attempt in 0..REGULAR_ATTEMPTS as u64 {
        let mut taken = BTreeSet::new();
        let mut rc = rng::substream(seed, TAG_CROSS.wrapping_add(attempt << 8));
        let mut cross_stubs = spread(&plus, b, &mut rc);
        cross_stubs.extend(spread(&minus, b, &mut rc));
        let Some(_) = pair_stubs(cross_stubs, |a, c| y[a] != y[c], &mut taken, &mut rc) else {
            continue;
        };
        let mut deg = vec![0usize; n];
        for &(u, v) in &taken {
            deg[u] += 1;
            deg[v] += 1;
        }
        let mut ri = rng::substream(seed, TAG_INNER.wrapping_add(attempt << 8));
        let inner_stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, r - deg[v])).collect();
        let Some(_) = pair_stubs(inner_stubs, |a, c| y[a] == y[c], &mut taken, &mut ri) else {
            continue;
        };
        let graph = Graph::from_sorted_unique(n, taken.into_iter().collect());
        return Ok(PlantedInstance { graph, planted, params: GeneratorParams::PlantedRegular { n, r, b }, seed });
    }
    Err(Error::AttemptsExhausted(REGULAR_ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_planted_probabilities() {
        let inst = planted_bisection(8, 1.0, 0.0, 5).unwrap();
        assert_eq!(inst.graph.m(), 12);
        assert_eq!(inst.planted_cut(), 0);
        let inst = planted_bisection(8, 0.0, 1.0, 5).unwrap();
        assert_eq!(inst.graph.m(), 16);
        assert_eq!(inst.planted_cut(), 16);
        assert!(matches!(planted_bisection(7, 0.5, 0.1, 1), Err(Error::OddVertexCount(7))));
        assert!(planted_bisection(8, 1.5, 0.1, 1).is_err());
    }

    #[test]
    fn planted_cut_concentrates() {
        // q (n/2)^2 = 500, sd = sqrt(10000 * 0.05 * 0.95) ≈ 21.8
        for seed in 0..20 {
            let inst = planted_bisection(200, 0.25, 0.05, 7 + seed).unwrap();
            let cut = inst.planted_cut() as f64;
            assert!((cut - 500.0).abs() <= 4.0 * 21.8, "seed {seed}: {cut}");
        }
    }

    #[test]
    fn planted_is_deterministic() {
        let a = planted_bisection(40, 0.3, 0.1, 99).unwrap();
        let b = planted_bisection(40, 0.3, 0.1, 99).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.graph.to_edge_list(), b.graph.to_edge_list());
        let c = planted_bisection(40, 0.3, 0.1, 100).unwrap();
        assert_ne!(a.graph, c.graph);
    }

    #[test]
    fn instance_json_roundtrip() {
        let a = planted_regular(12, 3, 2, 4).unwrap();
        let text = a.to_json();
        assert!(text.contains("\"planted_regular\""));
        assert_eq!(PlantedInstance::from_json(&text).unwrap(), a);
    }

    #[test]
    fn hypercube_shapes() {
        let h1 = hypercube(1).unwrap();
        assert_eq!((h1.n(), h1.m()), (2, 1));
        let h3 = hypercube(3).unwrap();
        assert_eq!((h3.n(), h3.m()), (8, 12));
        assert!((0..8).all(|v| h3.degree(v) == 3));
        assert!(hypercube(0).is_err());
        for bit in 0..3 {
            assert_eq!(cut_width(&h3, &hypercube_dimension_cut(3, bit)).unwrap(), 4);
        }
    }

    #[test]
    fn planted_regular_examples() {
        let a = planted_regular(4, 1, 0, 3).unwrap();
        assert_eq!(a.graph.m(), 2);
        assert_eq!(a.planted_cut(), 0);
        let b = planted_regular(8, 3, 2, 11).unwrap();
        assert!((0..8).all(|v| b.graph.degree(v) == 3));
        assert_eq!(b.planted_cut(), 2);
        assert!(matches!(planted_regular(6, 3, 0, 1), Err(Error::Infeasible(_))));
    }

    #[test]
    fn planted_regular_many_seeds() {
        for seed in 0..30 {
            for &(n, r, b) in &[(20, 3, 4), (40, 5, 10), (64, 4, 0), (30, 6, 16)] {
                let inst = planted_regular(n, r, b, seed).unwrap();
                assert!((0..n).all(|v| inst.graph.degree(v) == r));
                assert_eq!(inst.planted_cut(), b);
            }
        }
    }
}
