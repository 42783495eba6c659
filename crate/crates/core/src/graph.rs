//! DAG representation, random graph models and topological orderings.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Directed acyclic graph over `d` nodes stored as a dense adjacency matrix.
///
/// `has_edge(i, j)` is true iff the graph contains `i -> j`. Every constructor
/// rejects self-loops and cycles, so a `Dag` value is always acyclic.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    d: usize,
    adj: Vec<bool>,
}

impl std::fmt::Debug for Dag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dag")
            .field("d", &self.d)
            .field("edges", &self.edges())
            .finish()
    }
}

impl Dag {
    /// Graph with `d` nodes and no edges.
    pub fn empty(d: usize) -> Self {
        Self {
            d,
            adj: vec![false; d * d],
        }
    }

    pub fn from_edges(d: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(d);
        for &(i, j) in edges {
            if i >= d || j >= d {
                return Err(invalid(format!("edge {i}->{j} out of range for d={d}")));
            }
            if i == j {
                return Err(invalid(format!("self-loop on node {i}")));
            }
            g.adj[i * d + j] = true;
        }
        kahn_order(&g)?;
        Ok(g)
    }

    /// Builds a graph from a row-major 0/1 adjacency matrix.
    pub fn from_adjacency(d: usize, adj: Vec<bool>) -> Result<Self> {
        if adj.len() != d * d {
            return Err(invalid(format!(
                "adjacency has {} entries, expected {}",
                adj.len(),
                d * d
            )));
        }
        if (0..d).any(|i| adj[i * d + i]) {
            return Err(invalid("adjacency has a self-loop"));
        }
        let g = Self { d, adj };
        kahn_order(&g)?;
        Ok(g)
    }

    pub fn n_nodes(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.d + j]
    }

    /// Edges in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.d {
            for j in 0..self.d {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&e| e).count()
    }

    pub fn parents(&self, j: usize) -> Vec<usize> {
        (0..self.d).filter(|&i| self.has_edge(i, j)).collect()
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..self.d).filter(|&j| self.has_edge(i, j)).collect()
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        (0..self.d).all(|j| !self.has_edge(i, j))
    }

    pub fn is_root(&self, j: usize) -> bool {
        (0..self.d).all(|i| !self.has_edge(i, j))
    }

    /// Mask of nodes reachable from `i` by a directed path, including `i`.
    pub fn descendants(&self, i: usize) -> Vec<bool> {
        let mut seen = vec![false; self.d];
        let mut stack = vec![i];
        seen[i] = true;
        while let Some(u) = stack.pop() {
            for v in 0..self.d {
                if self.has_edge(u, v) && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Mask of nodes with a directed path into `j`, including `j`.
    pub fn ancestors(&self, j: usize) -> Vec<bool> {
        let mut seen = vec![false; self.d];
        let mut stack = vec![j];
        seen[j] = true;
        while let Some(v) = stack.pop() {
            for u in 0..self.d {
                if self.has_edge(u, v) && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// Subgraph induced by `keep`; node `keep[a]` becomes node `a`.
    pub fn induced(&self, keep: &[usize]) -> Dag {
        let k = keep.len();
        let mut g = Dag::empty(k);
        for (a, &u) in keep.iter().enumerate() {
            for (b, &v) in keep.iter().enumerate() {
                g.adj[a * k + b] = self.has_edge(u, v);
            }
        }
        g
    }

    /// Relabels nodes so that old node `perm[a]` becomes node `a`.
    pub fn permuted(&self, perm: &[usize]) -> Dag {
        self.induced(perm)
    }

    /// Edge-list text: a `d=<n>` header followed by one `i j` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("d={}\n", self.d);
        for (i, j) in self.edges() {
            let _ = writeln!(s, "{i} {j}");
        }
        s
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty edge list".into()))?;
        let d: usize = header
            .strip_prefix("d=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Format(format!("bad edge list header {header:?}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let parse = |t: Option<&str>| -> Result<usize> {
                t.and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Format(format!("bad edge line {line:?}")))
            };
            let i = parse(it.next())?;
            let j = parse(it.next())?;
            if it.next().is_some() {
                return Err(Error::Format(format!("bad edge line {line:?}")));
            }
            edges.push((i, j));
        }
        Dag::from_edges(d, &edges)
    }

    /// Dense 0/1 adjacency matrix as CSV, row `i` holding the out-edges of `i`.
    pub fn to_adjacency_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.d {
            let row: Vec<&str> = (0..self.d)
                .map(|j| if self.has_edge(i, j) { "1" } else { "0" })
                .collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    /// True iff every edge of `self` is also in `other`.
    pub fn is_subgraph_of(&self, other: &Dag) -> bool {
        self.d == other.d && self.adj.iter().zip(&other.adj).all(|(&a, &b)| !a || b)
    }
}

#[derive(Serialize, Deserialize)]
struct DagRepr {
    d: usize,
    edges: Vec<(usize, usize)>,
}

impl Serialize for Dag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DagRepr {
            d: self.d,
            edges: self.edges(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dag {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = DagRepr::deserialize(de)?;
        Dag::from_edges(r.d, &r.edges).map_err(serde::de::Error::custom)
    }
}

/// Node permutation with sources first and leaves last.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Ordering(Vec<usize>);

impl Ordering {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || seen[p] {
                return Err(invalid(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        Ok(Self(perm))
    }

    pub fn identity(d: usize) -> Self {
        Self((0..d).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `pos[v]` is the index of node `v` in the ordering.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (a, &v) in self.0.iter().enumerate() {
            pos[v] = a;
        }
        pos
    }
}

impl<'de> Deserialize<'de> for Ordering {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(de)?;
        Ordering::new(v).map_err(serde::de::Error::custom)
    }
}

fn kahn_order(g: &Dag) -> Result<Vec<usize>> {
    let d = g.d;
    let mut indeg: Vec<usize> = (0..d).map(|j| g.parents(j).len()).collect();
    let mut heap: BinaryHeap<Reverse<usize>> =
        (0..d).filter(|&j| indeg[j] == 0).map(Reverse).collect();
    let mut out = Vec::with_capacity(d);
    while let Some(Reverse(u)) = heap.pop() {
        out.push(u);
        for v in 0..d {
            if g.has_edge(u, v) {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    heap.push(Reverse(v));
                }
            }
        }
    }
    if out.len() != d {
        return Err(Error::CyclicGraph);
    }
    Ok(out)
}

/// Kahn's algorithm, always releasing the smallest ready node first.
pub fn topological_sort(g: &Dag) -> Result<Ordering> {
    kahn_order(g).map(Ordering)
}

pub fn is_consistent_ordering(g: &Dag, order: &Ordering) -> Result<bool> {
    if order.len() != g.n_nodes() {
        return Err(invalid(format!(
            "ordering has {} nodes, graph has {}",
            order.len(),
            g.n_nodes()
        )));
    }
    let pos = order.positions();
    Ok(g.edges().into_iter().all(|(i, j)| pos[i] < pos[j]))
}

/// Complete DAG admitted by `order`: every node points to all of its successors.
pub fn full_dag_from_ordering(order: &Ordering) -> Dag {
    let p = order.as_slice();
    let mut g = Dag::empty(p.len());
    let d = p.len();
    for a in 0..d {
        for b in (a + 1)..d {
            g.adj[p[a] * d + p[b]] = true;
        }
    }
    g
}

/// Erdős–Rényi DAG with `density_mult * d` expected edges.
///
/// Nodes are shuffled into a random causal order and every forward pair gets
/// an edge independently with probability `min(1, density_mult * d / C(d, 2))`.
pub fn sample_er<R: Rng + ?Sized>(d: usize, density_mult: usize, rng: &mut R) -> Result<Dag> {
    if d == 0 {
        return Err(invalid("ER graph needs d >= 1"));
    }
    let mut g = Dag::empty(d);
    let pairs = d * (d - 1) / 2;
    if pairs == 0 {
        return Ok(g);
    }
    let p = ((density_mult * d) as f64 / pairs as f64).min(1.0);
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(rng);
    for a in 0..d {
        for b in (a + 1)..d {
            if rng.random::<f64>() < p {
                g.adj[perm[a] * d + perm[b]] = true;
            }
        }
    }
    Ok(g)
}

/// Barabási–Albert scale-free DAG with `m` edges per attached node.
///
/// Nodes `0..m` form the seed set; each later node attaches to `m` distinct
/// earlier nodes drawn proportionally to degree. Edges run from the earlier
/// node to the newly attached one.
pub fn sample_sf<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Result<Dag> {
    if d == 0 {
        return Err(invalid("SF graph needs d >= 1"));
    }
    if m == 0 || m >= d {
        return Err(invalid(format!("SF attachment m={m} must satisfy 1 <= m < d={d}")));
    }
    let mut g = Dag::empty(d);
    // Each node appears once per incident edge, so uniform draws are degree-weighted.
    let mut repeated: Vec<usize> = Vec::new();
    let mut targets: Vec<usize> = (0..m).collect();
    for source in m..d {
        for &t in &targets {
            g.adj[t * d + source] = true;
        }
        repeated.extend_from_slice(&targets);
        repeated.extend(std::iter::repeat_n(source, m));
        targets.clear();
        while targets.len() < m {
            let pick = repeated[rng.random_range(0..repeated.len())];
            if !targets.contains(&pick) {
                targets.push(pick);
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chain3() -> Dag {
        Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn rejects_cycles_and_self_loops() {
        assert!(matches!(
            Dag::from_edges(2, &[(0, 1), (1, 0)]),
            Err(Error::CyclicGraph)
        ));
        assert!(Dag::from_edges(2, &[(1, 1)]).is_err());
        assert!(Dag::from_edges(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn topological_sort_tie_break() {
        assert_eq!(topological_sort(&Dag::empty(3)).unwrap().as_slice(), &[0, 1, 2]);
        assert_eq!(topological_sort(&chain3()).unwrap().as_slice(), &[0, 1, 2]);
        let g = Dag::from_edges(3, &[(2, 0)]).unwrap();
        assert_eq!(topological_sort(&g).unwrap().as_slice(), &[1, 2, 0]);
    }

    #[test]
    fn topological_sort_on_random_er() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g = sample_er(8, 2, &mut rng).unwrap();
            let o = topological_sort(&g).unwrap();
            assert!(is_consistent_ordering(&g, &o).unwrap());
        }
    }

    #[test]
    fn consistency_examples() {
        let g = chain3();
        let fwd = Ordering::new(vec![0, 1, 2]).unwrap();
        let rev = Ordering::new(vec![2, 1, 0]).unwrap();
        assert!(is_consistent_ordering(&g, &fwd).unwrap());
        assert!(!is_consistent_ordering(&g, &rev).unwrap());
        assert!(is_consistent_ordering(&g, &Ordering::identity(2)).is_err());
    }

    #[test]
    fn ordering_rejects_non_permutations() {
        assert!(Ordering::new(vec![0, 0]).is_err());
        assert!(Ordering::new(vec![0, 2]).is_err());
        assert!(Ordering::new(vec![]).is_ok());
    }

    #[test]
    fn full_dag_examples() {
        assert_eq!(full_dag_from_ordering(&Ordering::identity(1)).edge_count(), 0);
        let g = full_dag_from_ordering(&Ordering::new(vec![1, 0]).unwrap());
        assert_eq!(g.edges(), vec![(1, 0)]);
        let o = Ordering::new(vec![3, 0, 4, 1, 2]).unwrap();
        let g = full_dag_from_ordering(&o);
        assert_eq!(g.edge_count(), 10);
        assert!(topological_sort(&g).is_ok());
        assert!(is_consistent_ordering(&g, &o).unwrap());
    }

    #[test]
    fn er_single_node_and_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_er(1, 4, &mut rng).unwrap().edge_count(), 0);
        assert!(sample_er(0, 1, &mut rng).is_err());
    }

    #[test]
    fn er_expected_edge_count() {
        // Edge count is Binomial(45, 10/45): mean 10, variance 10 * 35/45.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 10_000;
        let total: usize = (0..draws)
            .map(|_| sample_er(10, 1, &mut rng).unwrap().edge_count())
            .sum();
        let mean = total as f64 / draws as f64;
        let sd_mean = (10.0 * 35.0 / 45.0 / draws as f64).sqrt();
        assert!((mean - 10.0).abs() <= 3.0 * sd_mean, "mean edges {mean}");
    }

    #[test]
    fn er_dense_probability_is_capped() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // 4 * 4 = 16 expected edges exceeds C(4, 2) = 6, so the graph is complete.
        assert_eq!(sample_er(4, 4, &mut rng).unwrap().edge_count(), 6);
    }

    #[test]
    fn sf_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_sf(2, 1, &mut rng).unwrap().edges(), vec![(0, 1)]);
        let g = sample_sf(20, 1, &mut rng).unwrap();
        assert_eq!(g.edge_count(), 19);
        assert!(topological_sort(&g).is_ok());
        let g = sample_sf(20, 4, &mut rng).unwrap();
        assert_eq!(g.edge_count(), 16 * 4);
        assert!(sample_sf(3, 3, &mut rng).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let a = sample_er(12, 4, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_er(12, 4, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        let a = sample_sf(12, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_sf(12, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Dag::from_edges(4, &[(0, 3), (2, 1)]).unwrap();
        let text = g.to_edge_list();
        assert_eq!(text, "d=4\n0 3\n2 1\n");
        assert_eq!(Dag::from_edge_list(&text).unwrap(), g);
        assert_eq!(g.to_adjacency_csv(), "0,0,0,1\n0,0,0,0\n0,1,0,0\n0,0,0,0\n");
        assert!(Dag::from_edge_list("d=2\n0 1 2\n").is_err());
        assert!(Dag::from_edge_list("n=2\n").is_err());
    }

    #[test]
    fn induced_subgraph() {
        let g = Dag::from_edges(4, &[(0, 1), (1, 2), (0, 3)]).unwrap();
        let h = g.induced(&[0, 2, 3]);
        assert_eq!(h.edges(), vec![(0, 2)]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn full_dag_contains_every_consistent_dag(seed in 0u64..500, d in 1usize..9) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let g = sample_er(d, 2, &mut rng).unwrap();
                let o = topological_sort(&g).unwrap();
                let full = full_dag_from_ordering(&o);
                prop_assert!(g.is_subgraph_of(&full));
                prop_assert!(is_consistent_ordering(&full, &o).unwrap());
            }

            #[test]
            fn generated_graphs_are_acyclic(seed in 0u64..500, d in 2usize..15, m in 1usize..4) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let g = sample_er(d, m, &mut rng).unwrap();
                prop_assert!(topological_sort(&g).is_ok());
                if m < d {
                    let g = sample_sf(d, m, &mut rng).unwrap();
                    prop_assert!(topological_sort(&g).is_ok());
                }
            }
        }
    }
}
