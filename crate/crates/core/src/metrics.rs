//! Structural comparison of an estimated DAG against the ground truth.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{Dag, Ordering};

/// Column order of the results CSV.
pub const REPORT_COLUMNS: [&str; 11] = [
    "seed",
    "method",
    "graph_type",
    "d",
    "noise",
    "shd",
    "sid",
    "d_top",
    "wall_ms",
    "config_hash",
    "error",
];

/// One row of an experiment sweep. Metrics are absent when the run failed,
/// in which case `error` says why.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seed: u64,
    pub method: String,
    pub graph_type: String,
    pub d: usize,
    pub noise: String,
    pub shd: Option<usize>,
    pub sid: Option<usize>,
    pub d_top: Option<usize>,
    pub wall_ms: Option<f64>,
    pub config_hash: String,
    pub error: Option<String>,
}

impl EvalReport {
    pub fn csv_record(&self) -> Vec<String> {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(T::to_string).unwrap_or_default()
        }
        vec![
            self.seed.to_string(),
            self.method.clone(),
            self.graph_type.clone(),
            self.d.to_string(),
            self.noise.clone(),
            opt(&self.shd),
            opt(&self.sid),
            opt(&self.d_top),
            self.wall_ms.map(|w| format!("{w:.3}")).unwrap_or_default(),
            self.config_hash.clone(),
            opt(&self.error),
        ]
    }
}

/// SHD, SID and D_top of one estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scores {
    pub shd: usize,
    pub sid: usize,
    pub d_top: usize,
}

pub fn evaluate(truth: &Dag, est: &Dag, order: &Ordering) -> Result<Scores> {
    Ok(Scores {
        shd: shd(truth, est)?,
        sid: sid(truth, est)?,
        d_top: d_top(truth, order)?,
    })
}

fn same_size(a: &Dag, b: &Dag) -> Result<()> {
    if a.n_nodes() != b.n_nodes() {
        return Err(invalid(format!(
            "graphs have {} and {} nodes",
            a.n_nodes(),
            b.n_nodes()
        )));
    }
    Ok(())
}

/// Structural Hamming distance: one unit per node pair whose edge status
/// differs (missing, extra or reversed).
pub fn shd(truth: &Dag, est: &Dag) -> Result<usize> {
    same_size(truth, est)?;
    let d = truth.n_nodes();
    let mut count = 0;
    for u in 0..d {
        for v in u + 1..d {
            let t = (truth.has_edge(u, v), truth.has_edge(v, u));
            let e = (est.has_edge(u, v), est.has_edge(v, u));
            if t != e {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Number of true edges that point backwards in `order`. Zero iff the order
/// is consistent with `truth`.
pub fn d_top(truth: &Dag, order: &Ordering) -> Result<usize> {
    if order.len() != truth.n_nodes() {
        return Err(invalid(format!(
            "ordering over {} nodes for a graph on {}",
            order.len(),
            truth.n_nodes()
        )));
    }
    let pos = order.positions();
    Ok(truth.edges().iter().filter(|&&(u, v)| pos[v] < pos[u]).count())
}

/// Whether `x` and `y` are d-separated given `z` in `g`, by reachability
/// over (node, direction) states ("Bayes ball").
pub fn d_separated(g: &Dag, x: usize, y: usize, z: &[bool]) -> bool {
    let d = g.n_nodes();
    // Nodes with a descendant in z: colliders there are open.
    let mut anc_z = vec![false; d];
    let mut stack: Vec<usize> = (0..d).filter(|&v| z[v]).collect();
    while let Some(v) = stack.pop() {
        if anc_z[v] {
            continue;
        }
        anc_z[v] = true;
        stack.extend(g.parents(v));
    }
    // up = arrived from a child, down = arrived from a parent.
    let mut seen = vec![[false; 2]; d];
    let mut queue = VecDeque::from([(x, true)]);
    while let Some((v, up)) = queue.pop_front() {
        let slot = usize::from(up);
        if seen[v][slot] {
            continue;
        }
        seen[v][slot] = true;
        if v == y {
            return false;
        }
        if up {
            if !z[v] {
                queue.extend(g.parents(v).into_iter().map(|p| (p, true)));
                queue.extend(g.children(v).into_iter().map(|c| (c, false)));
            }
        } else {
            if !z[v] {
                queue.extend(g.children(v).into_iter().map(|c| (c, false)));
            }
            if anc_z[v] {
                queue.extend(g.parents(v).into_iter().map(|p| (p, true)));
            }
        }
    }
    true
}

/// Whether adjusting for `z` identifies the effect of `i` on `j` in `g`:
/// no member of `z` descends from a node on a causal path `i -> ... -> j`
/// (other than `i`), and `z` blocks every non-causal path. The latter is
/// checked as d-separation after removing the first edge of each causal path.
pub fn is_valid_adjustment(g: &Dag, i: usize, j: usize, z: &[bool]) -> bool {
    let d = g.n_nodes();
    if z[i] || z[j] {
        return false;
    }
    let de_i = g.descendants(i);
    let an_j = g.ancestors(j);
    let on_causal: Vec<bool> = (0..d).map(|w| w != i && de_i[w] && an_j[w]).collect();
    for w in (0..d).filter(|&w| on_causal[w]) {
        let de_w = g.descendants(w);
        if (0..d).any(|v| de_w[v] && z[v]) {
            return false;
        }
    }
    let kept: Vec<(usize, usize)> = g
        .edges()
        .into_iter()
        .filter(|&(u, v)| !(u == i && on_causal[v]))
        .collect();
    let pbd = Dag::from_edges(d, &kept).expect("subgraph of a DAG is acyclic");
    d_separated(&pbd, i, j, z)
}

/// Structural intervention distance: the number of ordered pairs `(i, j)`
/// whose interventional distribution `p(x_j | do(x_i))` is computed wrongly
/// when adjusting for the parents of `i` in `est`.
pub fn sid(truth: &Dag, est: &Dag) -> Result<usize> {
    same_size(truth, est)?;
    let d = truth.n_nodes();
    let mut count = 0;
    for i in 0..d {
        let pa_est = est.parents(i);
        let mut z = vec![false; d];
        for &p in &pa_est {
            z[p] = true;
        }
        let de_i = truth.descendants(i);
        for j in (0..d).filter(|&j| j != i) {
            let wrong = if z[j] {
                // The estimate asserts j is unaffected by i.
                de_i[j]
            } else {
                !is_valid_adjustment(truth, i, j, &z)
            };
            if wrong {
                count += 1;
            }
        }
    }
    Ok(count)
}
