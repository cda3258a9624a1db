//! Influence-spreading matrix `C(s, t)`: the probability that node `s`
//! influences node `t`.
//!
//! The built-in model treats every self-avoiding path `P` from `s` to `t` with
//! at most `max_path_length` arcs as an independent channel that transmits
//! with probability `∏_{e∈P} w_e`, so
//!
//! ```text
//! C(s, t) = 1 − ∏_P (1 − ∏_{e∈P} w_e)
//! ```
//!
//! Independence of overlapping paths is an approximation. Matrices produced by
//! another model can be supplied through [`import_matrix`].

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::graph::Graph;

pub const DEFAULT_MAX_PATH_LENGTH: usize = 4;

/// Dense row-major `n × n` matrix with entries in `[0, 1]` and a zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl InfluenceMatrix {
    pub fn zeros(n: usize) -> Self {
        InfluenceMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Validates and wraps square rows. A non-zero diagonal is reset to zero
    /// with a warning.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        let mut diagonal_reset = false;
        for (s, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Format(format!(
                    "matrix is not square: row {} has {} entries, expected {n}",
                    s + 1,
                    row.len()
                )));
            }
            for (t, v) in row.into_iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Validation(format!(
                        "entry ({}, {}) = {v} is outside [0, 1]",
                        s + 1,
                        t + 1
                    )));
                }
                if s == t && v != 0.0 {
                    diagonal_reset = true;
                    data.push(0.0);
                } else {
                    data.push(v);
                }
            }
        }
        if diagonal_reset {
            log::warn!("influence matrix had a non-zero diagonal; forced to 0");
        }
        Ok(InfluenceMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, s: usize, t: usize) -> f64 {
        self.data[s * self.n + t]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.data[s * self.n..(s + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|s| (s + 1..self.n).all(|t| (self.get(s, t) - self.get(t, s)).abs() <= tol))
    }

    /// Same matrix with rows and columns reordered: entry `(i, j)` of the
    /// result is entry `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> InfluenceMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        InfluenceMatrix { n, data }
    }

    /// Header-free row-major CSV; values use the shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.n * self.n * 8);
        for s in 0..self.n {
            for (t, v) in self.row(s).iter().enumerate() {
                if t > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn compute_influence(g: &Graph, max_path_length: usize) -> Result<InfluenceMatrix> {
    compute_influence_with(g, max_path_length, Execution::default())
}

/// Path-model influence matrix; rows are independent and may run in parallel.
pub fn compute_influence_with(
    g: &Graph,
    max_path_length: usize,
    exec: Execution,
) -> Result<InfluenceMatrix> {
    if max_path_length == 0 {
        return Err(Error::Parameter(
            "max_path_length must be at least 1".into(),
        ));
    }
    if g.is_empty() {
        return Err(Error::Validation(
            "cannot compute influence on an empty graph".into(),
        ));
    }
    let n = g.n_nodes();
    let arcs = g.out_arcs();
    let rows = map_indexed(exec, n, |s| influence_row(&arcs, s, max_path_length));
    let mut data = Vec::with_capacity(n * n);
    for row in rows {
        data.extend(row);
    }
    Ok(InfluenceMatrix { n, data })
}

fn influence_row(arcs: &[Vec<(usize, f64)>], source: usize, max_len: usize) -> Vec<f64> {
    let n = arcs.len();
    // miss[t] = ∏ (1 − p_P) over paths reaching t so far
    let mut miss = vec![1.0f64; n];
    let mut on_path = vec![false; n];
    on_path[source] = true;
    extend_paths(arcs, source, 1.0, max_len, &mut on_path, &mut miss);
    miss[source] = 1.0;
    miss.into_iter()
        .map(|m| (1.0 - m).clamp(0.0, 1.0))
        .collect()
}

fn extend_paths(
    arcs: &[Vec<(usize, f64)>],
    node: usize,
    prob: f64,
    remaining: usize,
    on_path: &mut [bool],
    miss: &mut [f64],
) {
    for &(next, w) in &arcs[node] {
        if on_path[next] {
            continue;
        }
        let p = prob * w;
        miss[next] *= 1.0 - p;
        if remaining > 1 && p > 0.0 {
            on_path[next] = true;
            extend_paths(arcs, next, p, remaining - 1, on_path, miss);
            on_path[next] = false;
        }
    }
}

pub fn import_matrix(path: &Path) -> Result<InfluenceMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_csv(&text, path)
}

pub fn parse_matrix_csv(text: &str, path: &Path) -> Result<InfluenceMatrix> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("bad number `{}`", f.trim()),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    InfluenceMatrix::from_rows(rows)
}
