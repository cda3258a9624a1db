//! Brute-force oracles shared by the integration tests. Each one is written
//! from the definitions, without calling into the library's algorithms.
#![allow(dead_code, clippy::needless_range_loop)]

use std::path::PathBuf;

use nodeoverlap::blocks::BlockAssignment;
use nodeoverlap::{Graph, InfluenceMatrix};
use rand::Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Random simple graph on `n` nodes; each pair is an edge with probability
/// `density`, weights uniform in `[w_lo, w_hi]`.
pub fn random_graph<R: Rng>(
    rng: &mut R,
    n: usize,
    density: f64,
    w_lo: f64,
    w_hi: f64,
    directed: bool,
) -> Graph {
    let mut edges = Vec::new();
    for s in 0..n {
        for t in 0..n {
            if s == t || (!directed && t < s) {
                continue;
            }
            if rng.gen_bool(density) {
                edges.push((s, t, rng.gen_range(w_lo..=w_hi)));
            }
        }
    }
    Graph::from_edges(n, directed, edges).unwrap()
}

/// Random graph with `groups` planted groups: dense strong links inside a
/// group, sparse weak links between groups.
pub fn random_planted<R: Rng>(rng: &mut R, n: usize, groups: usize) -> Graph {
    let label: Vec<usize> = (0..n).map(|i| i % groups).collect();
    let mut edges = Vec::new();
    for s in 0..n {
        for t in s + 1..n {
            if label[s] == label[t] {
                if rng.gen_bool(0.9) {
                    edges.push((s, t, rng.gen_range(0.3..0.8)));
                }
            } else if rng.gen_bool(0.15) {
                edges.push((s, t, rng.gen_range(0.01..0.05)));
            }
        }
    }
    Graph::from_edges(n, false, edges).unwrap()
}

/// Every self-avoiding path from `s` with at most `max_len` arcs, as node lists.
fn all_paths(adj: &[Vec<Option<f64>>], s: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut done = Vec::new();
    let mut frontier = vec![vec![s]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for p in &frontier {
            let last = *p.last().unwrap();
            for (t, w) in adj[last].iter().enumerate() {
                if w.is_some() && !p.contains(&t) {
                    let mut q = p.clone();
                    q.push(t);
                    next.push(q);
                }
            }
        }
        done.extend(next.iter().cloned());
        frontier = next;
    }
    done
}

pub fn adjacency(g: &Graph) -> Vec<Vec<Option<f64>>> {
    let n = g.n_nodes();
    let mut adj = vec![vec![None; n]; n];
    for e in g.edges() {
        adj[e.source][e.target] = Some(e.weight);
        if !g.is_directed() {
            adj[e.target][e.source] = Some(e.weight);
        }
    }
    adj
}

/// `C(s, t) = 1 − ∏_P (1 − ∏_{e∈P} w_e)` by explicit path enumeration.
pub fn influence_oracle(g: &Graph, max_len: usize) -> Vec<Vec<f64>> {
    let n = g.n_nodes();
    let adj = adjacency(g);
    let mut c = vec![vec![0.0; n]; n];
    for s in 0..n {
        let mut miss = vec![1.0; n];
        for p in all_paths(&adj, s, max_len) {
            let prob: f64 = p.windows(2).map(|e| adj[e[0]][e[1]].unwrap()).product();
            miss[*p.last().unwrap()] *= 1.0 - prob;
        }
        for t in 0..n {
            if t != s {
                c[s][t] = 1.0 - miss[t];
            }
        }
    }
    c
}

/// Sum of `C(s, t)` over ordered pairs on the same side.
pub fn quality_oracle(c: &InfluenceMatrix, m: &[bool]) -> f64 {
    let n = m.len();
    let mut q = 0.0;
    for s in 0..n {
        for t in 0..n {
            if s != t && m[s] == m[t] {
                q += c.get(s, t);
            }
        }
    }
    q
}

/// True when no single flip raises the oracle quality beyond `tol`.
pub fn is_one_flip_max(c: &InfluenceMatrix, m: &[bool], tol: f64) -> bool {
    let base = quality_oracle(c, m);
    let mut v = m.to_vec();
    (0..m.len()).all(|i| {
        v[i] = !v[i];
        let q = quality_oracle(c, &v);
        v[i] = !v[i];
        q <= base + tol
    })
}

/// Overlapping nodes under the default rule, computed per block from the
/// definition: a block is kept when, for every community size `T1`, both
/// relative deviations `|T1 − S|/S` and `|N − T1 − S|/S` exceed `thr`.
pub fn overlap_oracle(sizes: &[usize], blocks: &BlockAssignment, thr: f64) -> Vec<usize> {
    let n = blocks.assignment.len();
    let mut out = Vec::new();
    for p in &blocks.blocks {
        let s = p.members.len() as f64;
        let kept = sizes.iter().all(|&t1| {
            let d1 = (t1 as f64 - s).abs() / s;
            let d2 = ((n - t1) as f64 - s).abs() / s;
            d1 > thr && d2 > thr
        });
        if kept {
            out.extend(&p.members);
        }
    }
    out.sort_unstable();
    out
}

/// Mean local clustering from adjacency sets.
pub fn clustering_oracle(g: &Graph) -> f64 {
    let n = g.n_nodes();
    let adj = adjacency(g);
    let linked = |a: usize, b: usize| adj[a][b].is_some() || adj[b][a].is_some();
    let mut total = 0.0;
    for v in 0..n {
        let nb: Vec<usize> = (0..n).filter(|&u| u != v && linked(u, v)).collect();
        let k = nb.len();
        if k < 2 {
            continue;
        }
        let mut tri = 0usize;
        for i in 0..k {
            for j in i + 1..k {
                if linked(nb[i], nb[j]) {
                    tri += 1;
                }
            }
        }
        total += 2.0 * tri as f64 / (k * (k - 1)) as f64;
    }
    total / n as f64
}
