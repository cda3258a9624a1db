//! Threshold rule that separates overlapping nodes from nested structure.
//!
//! Every building block of size `S` is compared with every community of size
//! `T₁` through the relative size deviations
//!
//! ```text
//! d₁ = |T₁ − S| / S        d₂ = |(N − T₁) − S| / S
//! ```
//!
//! A block whose size is close to a community (or to that community's
//! complement) is treated as nested inside it and is *matched*. Nodes of
//! blocks that match no community are the overlapping nodes `O`. Raising the
//! threshold lets more blocks match, so `|O|` never grows with it.
//!
//! How "close" is decided is a [`MatchRule`]. The default reproduces the
//! seven-division Karate example: communities are the division rows, a block
//! matches when either deviation is at most `thr`, and unmatched blocks are
//! collected after all communities have been tried. [`MatchRule::verbatim`]
//! is the literal pseudocode form (both deviations below `thr`, non-strict,
//! accumulation only when the community index equals the block index).

use serde::{Deserialize, Serialize};

use crate::blocks::BlockAssignment;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::partition::DivisionSet;

/// Size ratio of a community to an intersection inside it. The selection
/// predicate is `ratio >= thr`.
pub fn ratio(community_size: usize, intersection_size: usize) -> Result<f64> {
    if intersection_size == 0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(community_size as f64 / intersection_size as f64)
}

/// Whether a deviation equal to the threshold counts as exceeding it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// Unmatched when the deviation is strictly greater than `thr`.
    #[default]
    Strict,
    /// Unmatched when the deviation is greater than or equal to `thr`.
    NonStrict,
}

impl Comparison {
    fn exceeds(self, deviation: f64, thr: f64) -> bool {
        match self {
            Comparison::Strict => deviation > thr,
            Comparison::NonStrict => deviation >= thr,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideRule {
    /// Matched when the community or its complement is close in size.
    #[default]
    Either,
    /// Matched only when both the community and its complement are close.
    Both,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Accumulation {
    /// A block is overlapping when no community matched it.
    #[default]
    AfterScan,
    /// A block is added while scanning community `b == k` if it is unmatched
    /// at that point; blocks past the last community never accumulate.
    Diagonal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRule {
    pub comparison: Comparison,
    pub sides: SideRule,
    pub accumulation: Accumulation,
}

impl MatchRule {
    pub fn verbatim() -> Self {
        MatchRule {
            comparison: Comparison::NonStrict,
            sides: SideRule::Both,
            accumulation: Accumulation::Diagonal,
        }
    }

    pub fn with_comparison(mut self, comparison: Comparison) -> Self {
        self.comparison = comparison;
        self
    }

    fn unmatched(&self, d1: f64, d2: f64, thr: f64) -> bool {
        let (a, b) = (
            self.comparison.exceeds(d1, thr),
            self.comparison.exceeds(d2, thr),
        );
        match self.sides {
            SideRule::Either => a && b,
            SideRule::Both => a || b,
        }
    }
}

/// Community sizes over `N` nodes.
///
/// Built from a node labelling (a partition, `Σ sizes = N`) or from a division
/// set, where each division's member side is one community and its complement
/// is covered by the `N − T₁` term.
#[derive(Clone, Debug, PartialEq)]
pub struct CommunityAssignment {
    n: usize,
    sizes: Vec<usize>,
    labels: Option<Vec<usize>>,
}

impl CommunityAssignment {
    /// `labels[i]` is the 0-based community of node `i`; `K = max + 1`.
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        let mut sizes = vec![0; k];
        for &c in &labels {
            sizes[c] += 1;
        }
        CommunityAssignment {
            n: labels.len(),
            sizes,
            labels: Some(labels),
        }
    }

    pub fn from_divisions(z: &DivisionSet) -> Self {
        CommunityAssignment {
            n: z.n_nodes(),
            sizes: z.member_counts(),
            labels: None,
        }
    }

    /// The blocks themselves as communities (`c = a`).
    pub fn from_blocks(blocks: &BlockAssignment) -> Self {
        Self::from_labels(blocks.assignment.clone())
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapResult {
    pub thr: f64,
    /// Per block: `1` matched, `-1` unmatched.
    pub gamma: Vec<i8>,
    /// Per node accumulator.
    pub o: Vec<u32>,
    /// Nodes with `o[i] == 1`, ascending.
    pub overlapping: Vec<usize>,
}

impl OverlapResult {
    pub fn size(&self) -> usize {
        self.overlapping.len()
    }

    /// Indices of blocks with `gamma == -1`.
    pub fn unmatched_blocks(&self) -> Vec<usize> {
        self.gamma
            .iter()
            .enumerate()
            .filter(|(_, &g)| g == -1)
            .map(|(k, _)| k)
            .collect()
    }
}

fn check_threshold(thr: f64) -> Result<()> {
    if !thr.is_finite() || thr < 0.0 {
        return Err(Error::Parameter(format!(
            "threshold must be a finite non-negative number, got {thr}"
        )));
    }
    Ok(())
}

pub fn evaluate_communities(
    assign: &CommunityAssignment,
    blocks: &BlockAssignment,
    thr: f64,
    rule: MatchRule,
) -> Result<OverlapResult> {
    check_threshold(thr)?;
    let n = blocks.n_nodes();
    if assign.n_nodes() != n {
        return Err(Error::Dimension {
            expected: n,
            found: assign.n_nodes(),
        });
    }
    let mut gamma = vec![-1i8; blocks.n_blocks()];
    let mut o = vec![0u32; n];
    for (k, block) in blocks.blocks.iter().enumerate() {
        let s = block.size();
        let mut accumulated = false;
        for (b, &t1) in assign.sizes().iter().enumerate() {
            if s != 0 {
                let sf = s as f64;
                let d1 = (t1 as f64 - sf).abs() / sf;
                let d2 = ((n - t1) as f64 - sf).abs() / sf;
                if rule.unmatched(d1, d2, thr) {
                    gamma[k] = -1;
                } else {
                    gamma[k] = 1;
                    break;
                }
            } else {
                gamma[k] = 1;
            }
            if rule.accumulation == Accumulation::Diagonal && b == k && gamma[k] == -1 {
                block.members.iter().for_each(|&i| o[i] += 1);
                accumulated = true;
            }
        }
        if rule.accumulation == Accumulation::AfterScan && gamma[k] == -1 && !accumulated {
            block.members.iter().for_each(|&i| o[i] += 1);
        }
    }
    let overlapping = (0..n).filter(|&i| o[i] == 1).collect();
    Ok(OverlapResult {
        thr,
        gamma,
        o,
        overlapping,
    })
}

pub fn threshold_sweep(
    assign: &CommunityAssignment,
    blocks: &BlockAssignment,
    thresholds: &[f64],
    rule: MatchRule,
) -> Result<Vec<OverlapResult>> {
    threshold_sweep_with(assign, blocks, thresholds, rule, Execution::default())
}

/// One independent evaluation per threshold; `thresholds` must be strictly
/// ascending.
pub fn threshold_sweep_with(
    assign: &CommunityAssignment,
    blocks: &BlockAssignment,
    thresholds: &[f64],
    rule: MatchRule,
    exec: Execution,
) -> Result<Vec<OverlapResult>> {
    if thresholds.is_empty() {
        return Err(Error::Parameter("threshold list is empty".into()));
    }
    for &t in thresholds {
        check_threshold(t)?;
    }
    if let Some(w) = thresholds
        .windows(2)
        .find(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::Parameter(format!(
            "thresholds must be strictly ascending, found {} then {}",
            w[0], w[1]
        )));
    }
    map_indexed(exec, thresholds.len(), |i| {
        evaluate_communities(assign, blocks, thresholds[i], rule)
    })
    .into_iter()
    .collect()
}
