//! Bipartitions of the network that locally maximise the influence quality
//!
//! ```text
//! q(V) = Σ_{s,t∈V, s≠t} C(s,t) + Σ_{s,t∈G−V, s≠t} C(s,t)
//! ```
//!
//! Local search flips one node at a time, always taking the largest gain and
//! breaking ties towards the lowest node id, until no flip improves `q`.
//! Because `C ≥ 0`, the trivial partition with everything on one side is the
//! global maximum; [`generate_divisions`] discards it together with duplicate
//! divisions (a division and its complement are the same split).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::influence::InfluenceMatrix;

pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// Flips with a gain at or below this are not improvements.
pub const GAIN_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Division {
    /// `true` = node belongs to `V`, `false` = node belongs to `G − V`.
    pub membership: Vec<bool>,
    /// Quality of `membership`; `None` for divisions read from a file.
    pub q_value: Option<f64>,
    pub seed: Option<u64>,
    pub converged: bool,
}

impl Division {
    pub fn is_trivial(&self) -> bool {
        let members = self.membership.iter().filter(|&&m| m).count();
        members == 0 || members == self.membership.len()
    }

    pub fn signature(&self) -> String {
        self.membership.iter().map(|&m| member_char(m)).collect()
    }
}

pub(crate) fn member_char(m: bool) -> char {
    if m {
        'x'
    } else {
        'o'
    }
}

/// The `T × N` indicator matrix `Z`, one division per row.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisionSet {
    n: usize,
    divisions: Vec<Division>,
}

impl DivisionSet {
    /// Wraps rows verbatim. Requires at least two rows of equal length.
    pub fn from_rows(rows: Vec<Vec<bool>>) -> Result<Self> {
        let divisions = rows
            .into_iter()
            .map(|membership| Division {
                membership,
                q_value: None,
                seed: None,
                converged: true,
            })
            .collect();
        Self::from_divisions(divisions)
    }

    pub fn from_divisions(divisions: Vec<Division>) -> Result<Self> {
        if divisions.len() < 2 {
            return Err(Error::Format(format!(
                "a division set needs at least 2 divisions, got {}",
                divisions.len()
            )));
        }
        let n = divisions[0].membership.len();
        if let Some((t, d)) = divisions
            .iter()
            .enumerate()
            .find(|(_, d)| d.membership.len() != n)
        {
            return Err(Error::Format(format!(
                "division {} has {} nodes, division 1 has {n}",
                t + 1,
                d.membership.len()
            )));
        }
        Ok(DivisionSet { n, divisions })
    }

    /// Number of divisions `T`.
    pub fn len(&self) -> usize {
        self.divisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.divisions.is_empty()
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    /// Row `t` (0-based) of `Z`.
    pub fn row(&self, t: usize) -> &[bool] {
        &self.divisions[t].membership
    }

    pub fn divisions(&self) -> &[Division] {
        &self.divisions
    }

    /// Size of the member side of each division.
    pub fn member_counts(&self) -> Vec<usize> {
        self.divisions
            .iter()
            .map(|d| d.membership.iter().filter(|&&m| m).count())
            .collect()
    }

    /// Same divisions with node columns reordered: column `j` of the result is
    /// column `perm[j]` of `self`.
    pub fn permute_nodes(&self, perm: &[usize]) -> DivisionSet {
        let divisions = self
            .divisions
            .iter()
            .map(|d| Division {
                membership: perm.iter().map(|&j| d.membership[j]).collect(),
                ..d.clone()
            })
            .collect();
        DivisionSet {
            n: self.n,
            divisions,
        }
    }

    /// One row per division over `{x, o}`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for d in &self.divisions {
            let _ = writeln!(out, "{}", d.signature());
        }
        out
    }
}

/// Evaluates `q` for a membership vector.
pub fn quality(c: &InfluenceMatrix, membership: &[bool]) -> Result<f64> {
    let n = c.n();
    if membership.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: membership.len(),
        });
    }
    let mut inside = 0.0;
    let mut outside = 0.0;
    for s in 0..n {
        let row = c.row(s);
        for t in 0..n {
            if s == t || membership[s] != membership[t] {
                continue;
            }
            if membership[s] {
                inside += row[t];
            } else {
                outside += row[t];
            }
        }
    }
    Ok(inside + outside)
}

/// Row-major `S = C + Cᵀ`.
fn symmetrized(c: &InfluenceMatrix) -> Vec<f64> {
    let n = c.n();
    let mut sym = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            sym[i * n + j] = c.get(i, j) + c.get(j, i);
        }
    }
    sym
}

/// Change in `q` for flipping each node, `Σ_other S_ij − Σ_same S_ij`.
fn flip_gains(sym: &[f64], membership: &[bool]) -> Vec<f64> {
    let n = membership.len();
    (0..n)
        .map(|i| {
            let row = &sym[i * n..(i + 1) * n];
            let mut g = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                if membership[i] == membership[j] {
                    g -= row[j];
                } else {
                    g += row[j];
                }
            }
            g
        })
        .collect()
}

fn best_flip(gains: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &g) in gains.iter().enumerate() {
        if g > GAIN_TOLERANCE && best.is_none_or(|b| g > gains[b]) {
            best = Some(i);
        }
    }
    best
}

/// Random initial membership for `seed`: one `bool` per node drawn from
/// ChaCha8 seeded with `seed_from_u64(seed)`.
pub fn initial_membership(n: usize, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen::<bool>()).collect()
}

/// Steepest-ascent local search from the random membership of `seed`.
pub fn local_search(c: &InfluenceMatrix, seed: u64, max_iters: usize) -> Result<Division> {
    let init = initial_membership(c.n(), seed);
    let mut d = local_search_from(c, init, max_iters)?;
    d.seed = Some(seed);
    Ok(d)
}

/// Steepest-ascent local search from an explicit membership. When
/// `max_iters` flips are used up before convergence, the current membership
/// is returned with `converged = false`.
pub fn local_search_from(
    c: &InfluenceMatrix,
    membership: Vec<bool>,
    max_iters: usize,
) -> Result<Division> {
    check_search(c)?;
    search(c, &symmetrized(c), membership, max_iters)
}

fn check_search(c: &InfluenceMatrix) -> Result<()> {
    if c.n() < 2 {
        return Err(Error::Parameter(format!(
            "local search needs at least 2 nodes, got {}",
            c.n()
        )));
    }
    Ok(())
}

fn search(
    c: &InfluenceMatrix,
    sym: &[f64],
    mut membership: Vec<bool>,
    max_iters: usize,
) -> Result<Division> {
    let n = c.n();
    if membership.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: membership.len(),
        });
    }
    let mut gains = flip_gains(sym, &membership);
    let mut flips = 0usize;
    let converged = loop {
        let k = match best_flip(&gains) {
            Some(k) => k,
            None => {
                // incremental updates drift; confirm against fresh gains
                gains = flip_gains(sym, &membership);
                match best_flip(&gains) {
                    Some(k) => k,
                    None => break true,
                }
            }
        };
        if flips == max_iters {
            break false;
        }
        let was = membership[k];
        let row = &sym[k * n..(k + 1) * n];
        for i in 0..n {
            if i == k {
                continue;
            }
            // i and k were on the same side before the flip iff they differ now
            if membership[i] == was {
                gains[i] += 2.0 * row[i];
            } else {
                gains[i] -= 2.0 * row[i];
            }
        }
        gains[k] = -gains[k];
        membership[k] = !was;
        flips += 1;
    };
    let q = quality(c, &membership)?;
    Ok(Division {
        membership,
        q_value: Some(q),
        seed: None,
        converged,
    })
}

/// True when no single flip raises `q` above the tolerance (brute force).
pub fn is_local_maximum(c: &InfluenceMatrix, membership: &[bool]) -> Result<bool> {
    let base = quality(c, membership)?;
    let mut m = membership.to_vec();
    for i in 0..m.len() {
        m[i] = !m[i];
        let q = quality(c, &m)?;
        m[i] = !m[i];
        if q > base + GAIN_TOLERANCE * (1.0 + base.abs()) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn default_seeds(n_seeds: usize) -> Vec<u64> {
    (0..n_seeds as u64).collect()
}

/// Runs local search from seeds `0..n_seeds`.
pub fn generate_divisions(c: &InfluenceMatrix, n_seeds: usize) -> Result<DivisionSet> {
    generate_divisions_with(
        c,
        &default_seeds(n_seeds),
        DEFAULT_MAX_ITERS,
        Execution::default(),
    )
}

/// Runs one local search per seed, keeps converged non-trivial results,
/// orients each so node 0 is a member, drops duplicates, and sorts by
/// descending `q` (ties by membership, then seed).
pub fn generate_divisions_with(
    c: &InfluenceMatrix,
    seeds: &[u64],
    max_iters: usize,
    exec: Execution,
) -> Result<DivisionSet> {
    if seeds.len() < 2 {
        return Err(Error::Parameter(format!(
            "need at least 2 seeds, got {}",
            seeds.len()
        )));
    }
    check_search(c)?;
    let sym = symmetrized(c);
    let results = map_indexed(exec, seeds.len(), |i| {
        let init = initial_membership(c.n(), seeds[i]);
        search(c, &sym, init, max_iters).map(|d| Division {
            seed: Some(seeds[i]),
            ..d
        })
    });
    let mut found = Vec::new();
    for r in results {
        let mut d = r?;
        if !d.converged || d.is_trivial() {
            continue;
        }
        if !d.membership[0] {
            d.membership.iter_mut().for_each(|m| *m = !*m);
            d.q_value = Some(quality(c, &d.membership)?);
        }
        found.push(d);
    }
    found.sort_by(|a, b| {
        b.q_value
            .unwrap_or(0.0)
            .total_cmp(&a.q_value.unwrap_or(0.0))
            .then_with(|| a.membership.cmp(&b.membership))
            .then_with(|| a.seed.cmp(&b.seed))
    });
    found.dedup_by(|later, earlier| later.membership == earlier.membership);
    if found.len() < 2 {
        return Err(Error::DegenerateStructure { found: found.len() });
    }
    DivisionSet::from_divisions(found)
}

pub fn import_divisions(path: &Path, transpose: bool) -> Result<DivisionSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_divisions(&text, path, transpose)
}

/// Parses rows of `{x, o}` or `{1, 0}` symbols (whitespace inside a row is
/// ignored). With `transpose`, each line is a node and each column a division.
pub fn parse_divisions(text: &str, path: &Path, transpose: bool) -> Result<DivisionSet> {
    let mut rows: Vec<Vec<bool>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = trimmed
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                'x' | 'X' | '1' => Ok(true),
                'o' | 'O' | '0' => Ok(false),
                other => Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("unexpected symbol `{other}`, expected x/o or 1/0"),
                }),
            })
            .collect::<Result<Vec<bool>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Format(format!(
                    "{}:{}: row has {} symbols, first row has {}",
                    path.display(),
                    i + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if transpose && !rows.is_empty() {
        let t = rows[0].len();
        rows = (0..t)
            .map(|c| rows.iter().map(|r| r[c]).collect())
            .collect();
    }
    DivisionSet::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn matrix(n: usize, f: impl Fn(usize, usize) -> f64) -> InfluenceMatrix {
        InfluenceMatrix::from_rows(
            (0..n)
                .map(|s| (0..n).map(|t| if s == t { 0.0 } else { f(s, t) }).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn quality_degenerate_and_zero_cases() {
        let c = matrix(4, |s, t| 0.1 * (s + t) as f64 / 6.0);
        assert_abs_diff_eq!(quality(&c, &[true; 4]).unwrap(), c.total(), epsilon = 1e-15);
        let z = InfluenceMatrix::zeros(5);
        assert_eq!(
            quality(&z, &[true, false, true, false, false]).unwrap(),
            0.0
        );
        assert!(matches!(
            quality(&c, &[true, false]),
            Err(Error::Dimension {
                expected: 4,
                found: 2
            })
        ));
    }

    #[test]
    fn quality_sums_both_sides() {
        // pairs {0,1} and {2,3} at 0.5, everything else 0.1
        let c = matrix(4, |s, t| if s / 2 == t / 2 { 0.5 } else { 0.1 });
        assert_abs_diff_eq!(quality(&c, &[true, true, false, false]).unwrap(), 2.0);
        assert_abs_diff_eq!(quality(&c, &[false, false, true, true]).unwrap(), 2.0);
    }

    #[test]
    fn zero_matrix_returns_initial_membership() {
        let z = InfluenceMatrix::zeros(6);
        let d = local_search(&z, 11, 100).unwrap();
        assert_eq!(d.membership, initial_membership(6, 11));
        assert!(d.converged);
        assert_eq!(d.q_value, Some(0.0));
    }

    #[test]
    fn exhausted_iterations_are_flagged() {
        let c = matrix(6, |_, _| 0.3);
        let init = vec![true, false, true, false, true, false];
        let d = local_search_from(&c, init.clone(), 0).unwrap();
        assert!(!d.converged);
        assert_eq!(d.membership, init);
        let d = local_search_from(&c, init, 100).unwrap();
        assert!(d.converged);
    }

    #[test]
    fn local_search_rejects_tiny_inputs() {
        assert!(matches!(
            local_search(&InfluenceMatrix::zeros(1), 0, 10),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn ties_go_to_the_lowest_node() {
        // Uniform matrix: from a 2–2 split every flip gains the same.
        let c = matrix(4, |_, _| 0.2);
        let mut first = None;
        let gains = flip_gains(&symmetrized(&c), &[true, true, false, false]);
        for (i, &g) in gains.iter().enumerate() {
            if g > GAIN_TOLERANCE && first.is_none() {
                first = Some(i);
            }
        }
        assert_eq!(best_flip(&gains), first);
        assert_eq!(best_flip(&gains), Some(0));
    }

    #[test]
    fn division_parsing() {
        let p = Path::new("z.div");
        let z = parse_divisions("# c\nxxoo\n1010\n", p, false).unwrap();
        assert_eq!(z.len(), 2);
        assert_eq!(z.row(1), &[true, false, true, false]);
        let zt = parse_divisions("x o\nx x\no x\n", p, true).unwrap();
        assert_eq!(zt.len(), 2);
        assert_eq!(zt.row(0), &[true, true, false]);
        assert!(matches!(
            parse_divisions("xxoo\n", p, false),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            parse_divisions("xxoo\nxo\n", p, false),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            parse_divisions("xxoo\nxqoo\n", p, false),
            Err(Error::Parse { line: 2, .. })
        ));
        assert_eq!(z.to_text(), "xxoo\nxoxo\n");
    }

    #[test]
    fn generate_requires_two_seeds() {
        let c = matrix(4, |_, _| 0.2);
        assert!(matches!(
            generate_divisions(&c, 1),
            Err(Error::Parameter(_))
        ));
    }
}
