//! Cohesion ranking of divisions and building-block extraction.
//!
//! A building block is the set of nodes that share one membership signature
//! over a run of consecutive division rows. Signatures are written over
//! `{x, o}`, `x` meaning "member side" in that division.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::influence::InfluenceMatrix;
use crate::partition::{member_char, DivisionSet};

/// Cohesion score per division and the ranking of those scores.
///
/// `scores[i]` belongs to division row `i + 1` (0-based); the first division is
/// the reference and is not scored. `ranking` lists indices into `scores`,
/// highest score first, ties towards the smaller index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivisionScores {
    pub scores: Vec<f64>,
    pub ranking: Vec<usize>,
    pub normalized: bool,
}

pub fn compute_and_rank(
    m: &InfluenceMatrix,
    z: &DivisionSet,
    normalize: bool,
) -> Result<DivisionScores> {
    compute_and_rank_with(m, z, normalize, Execution::default())
}

pub fn compute_and_rank_with(
    m: &InfluenceMatrix,
    z: &DivisionSet,
    normalize: bool,
    exec: Execution,
) -> Result<DivisionScores> {
    if z.len() < 2 {
        return Err(Error::Parameter(format!(
            "ranking needs at least 2 divisions, got {}",
            z.len()
        )));
    }
    let n = z.n_nodes();
    if m.n() != n {
        return Err(Error::Dimension {
            expected: n,
            found: m.n(),
        });
    }
    let scores = map_indexed(exec, z.len() - 1, |i| {
        division_score(m, z.row(i + 1), normalize)
    });
    let mut ranking: Vec<usize> = (0..scores.len()).collect();
    // stable sort keeps the smaller index first on ties
    ranking.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    Ok(DivisionScores {
        scores,
        ranking,
        normalized: normalize,
    })
}

fn division_score(m: &InfluenceMatrix, v: &[bool], normalize: bool) -> f64 {
    let n = v.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut contrib = 0.0;
        for j in 0..n {
            if v[i] == v[j] {
                contrib += m.get(i, j) + m.get(j, i);
            }
        }
        total += contrib;
    }
    if normalize && n > 0 {
        let zeros = v.iter().filter(|&&x| !x).count();
        let p0 = zeros as f64 / n as f64;
        total /= 1.0 - 2.0 * p0 * (1.0 - p0);
    }
    total / 2.0
}

/// Nodes sharing one signature.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pattern {
    pub signature: String,
    pub members: Vec<usize>,
}

impl Pattern {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Blocks over division rows `first_row..=last_row` (0-based).
///
/// Blocks are numbered in order of first appearance by ascending node id,
/// so `assignment[0] == 0` whenever there is at least one node.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockAssignment {
    /// Rank position (1-based) of the anchor division, when built from a ranking.
    pub anchor: Option<usize>,
    /// Segment index from the anchor recurrence.
    pub segment: Option<i64>,
    pub first_row: usize,
    pub last_row: usize,
    /// The recurrence asked for a first row before division 1.
    pub clamped: bool,
    pub blocks: Vec<Pattern>,
    /// Block index of every node.
    pub assignment: Vec<usize>,
}

impl BlockAssignment {
    pub fn n_nodes(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Pattern::size).collect()
    }

    pub fn width(&self) -> usize {
        self.last_row - self.first_row + 1
    }
}

/// Groups nodes by their signature over rows `first_row..=last_row`.
pub fn blocks_for_rows(
    z: &DivisionSet,
    first_row: usize,
    last_row: usize,
) -> Result<BlockAssignment> {
    if first_row > last_row || last_row >= z.len() {
        return Err(Error::Parameter(format!(
            "row range {}..={} is not inside 1..={}",
            first_row + 1,
            last_row + 1,
            z.len()
        )));
    }
    let n = z.n_nodes();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut blocks: Vec<Pattern> = Vec::new();
    let mut assignment = Vec::with_capacity(n);
    for j in 0..n {
        let sig: String = (first_row..=last_row)
            .map(|t| member_char(z.row(t)[j]))
            .collect();
        let b = match index.get(&sig) {
            Some(&b) => b,
            None => {
                blocks.push(Pattern {
                    signature: sig.clone(),
                    members: Vec::new(),
                });
                index.insert(sig, blocks.len() - 1);
                blocks.len() - 1
            }
        };
        blocks[b].members.push(j);
        assignment.push(b);
    }
    Ok(BlockAssignment {
        anchor: None,
        segment: None,
        first_row,
        last_row,
        clamped: false,
        blocks,
        assignment,
    })
}

/// Blocks over every division row.
pub fn full_blocks(z: &DivisionSet) -> BlockAssignment {
    blocks_for_rows(z, 0, z.len() - 1).expect("a division set has at least two rows")
}

/// A segment the anchor recurrence produced but that lies past the last row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedSegment {
    pub anchor: usize,
    pub segment: i64,
    /// First row requested by the recurrence, 1-based.
    pub requested_first: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockReport {
    pub assignments: Vec<BlockAssignment>,
    pub skipped: Vec<SkippedSegment>,
}

impl BlockReport {
    /// The assignment covering the most rows; ties go to the earliest in
    /// `(anchor, segment)` order.
    pub fn widest(&self) -> Option<&BlockAssignment> {
        self.assignments
            .iter()
            .fold(None, |best: Option<&BlockAssignment>, a| match best {
                Some(b) if b.width() >= a.width() => Some(b),
                _ => Some(a),
            })
    }

    /// Widest assignment of the top-ranked anchor.
    pub fn top_anchor_widest(&self) -> Option<&BlockAssignment> {
        self.assignments
            .iter()
            .filter(|a| a.anchor == Some(1))
            .fold(None, |best: Option<&BlockAssignment>, a| match best {
                Some(b) if b.width() >= a.width() => Some(b),
                _ => Some(a),
            })
    }
}

/// Builds blocks for each of the top `k` anchors of `ranking`.
///
/// With 1-based division numbers, anchor `r` has score index `t* = ranking[r]`
/// (division `t* + 1`), `segment_end = t* + 1`, and segment indices run over
/// `segment_end − segment_length + 1 ..= segment_end + 1`. Segment `seg` uses
/// divisions `T − seg + 3 ..= T`. A first row below 1 is clamped to 1 and
/// flagged; a first row past `T` yields no rows and is reported as skipped.
pub fn build_blocks(
    z: &DivisionSet,
    ranking: &[usize],
    segment_length: usize,
    k: usize,
) -> Result<BlockReport> {
    build_blocks_with(z, ranking, segment_length, k, Execution::default())
}

pub fn build_blocks_with(
    z: &DivisionSet,
    ranking: &[usize],
    segment_length: usize,
    k: usize,
    exec: Execution,
) -> Result<BlockReport> {
    let t = z.len();
    if ranking.len() != t - 1 {
        return Err(Error::Dimension {
            expected: t - 1,
            found: ranking.len(),
        });
    }
    if k == 0 || k > t - 1 {
        return Err(Error::Parameter(format!(
            "number of anchors must be in 1..={}, got {k}",
            t - 1
        )));
    }
    if segment_length == 0 {
        return Err(Error::Parameter("segment_length must be at least 1".into()));
    }

    struct Plan {
        anchor: usize,
        segment: i64,
        t1: i64,
    }
    let t_i = t as i64;
    let mut plans = Vec::new();
    for r in 1..=k {
        let t_star = ranking[r - 1] as i64 + 1;
        let segment_end = t_star + 1;
        let start = segment_end - segment_length as i64 + 1;
        for seg in start..=segment_end + 1 {
            plans.push(Plan {
                anchor: r,
                segment: seg,
                t1: t_i - seg + 3,
            });
        }
    }

    let built = map_indexed(exec, plans.len(), |i| {
        let p = &plans[i];
        if p.t1 > t_i {
            return None;
        }
        let first = p.t1.max(1);
        let mut a = blocks_for_rows(z, (first - 1) as usize, t - 1).ok()?;
        a.anchor = Some(p.anchor);
        a.segment = Some(p.segment);
        a.clamped = p.t1 < 1;
        Some(a)
    });

    let mut report = BlockReport {
        assignments: Vec::new(),
        skipped: Vec::new(),
    };
    for (p, a) in plans.iter().zip(built) {
        match a {
            Some(a) => report.assignments.push(a),
            None => report.skipped.push(SkippedSegment {
                anchor: p.anchor,
                segment: p.segment,
                requested_first: p.t1,
            }),
        }
    }
    Ok(report)
}
