//! Machine-readable and plain-text renderings of pipeline results.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::blocks::{BlockAssignment, BlockReport, DivisionScores};
use crate::graph::Graph;
use crate::overlap::OverlapResult;
use crate::partition::{member_char, DivisionSet};

/// External node names used in reports: graph ids, or 1-based positions when
/// no graph is available.
#[derive(Clone, Debug)]
pub struct NodeNames(Vec<String>);

impl NodeNames {
    pub fn from_graph(g: &Graph) -> Self {
        NodeNames(g.external_ids().to_vec())
    }

    pub fn positional(n: usize) -> Self {
        NodeNames((1..=n).map(|i| i.to_string()).collect())
    }

    pub fn get(&self, node: usize) -> &str {
        &self.0[node]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn map(&self, nodes: &[usize]) -> Vec<String> {
        nodes.iter().map(|&i| self.0[i].clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockJson {
    /// 1-based block number.
    pub block: usize,
    pub signature: String,
    pub size: usize,
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentJson {
    pub anchor: Option<usize>,
    pub segment: Option<i64>,
    /// 1-based division numbers.
    pub first_division: usize,
    pub last_division: usize,
    pub clamped: bool,
    pub blocks: Vec<BlockJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedJson {
    pub anchor: usize,
    pub segment: i64,
    pub requested_first_division: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingJson {
    /// Score of divisions 2..=T, in division order.
    pub scores: Vec<f64>,
    /// 1-based division numbers, best first.
    pub ranked_divisions: Vec<usize>,
    pub normalized: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReportJson {
    pub n_nodes: usize,
    pub n_divisions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranking: Option<RankingJson>,
    /// The assignment used for overlap evaluation.
    pub selected: SegmentJson,
    pub segments: Vec<SegmentJson>,
    pub skipped: Vec<SkippedJson>,
}

pub fn segment_json(a: &BlockAssignment, names: &NodeNames) -> SegmentJson {
    SegmentJson {
        anchor: a.anchor,
        segment: a.segment,
        first_division: a.first_row + 1,
        last_division: a.last_row + 1,
        clamped: a.clamped,
        blocks: a
            .blocks
            .iter()
            .enumerate()
            .map(|(k, p)| BlockJson {
                block: k + 1,
                signature: p.signature.clone(),
                size: p.size(),
                members: names.map(&p.members),
            })
            .collect(),
    }
}

pub fn block_report_json(
    z: &DivisionSet,
    scores: Option<&DivisionScores>,
    report: Option<&BlockReport>,
    selected: &BlockAssignment,
    names: &NodeNames,
) -> BlockReportJson {
    BlockReportJson {
        n_nodes: z.n_nodes(),
        n_divisions: z.len(),
        ranking: scores.map(|s| RankingJson {
            scores: s.scores.clone(),
            ranked_divisions: s.ranking.iter().map(|&i| i + 2).collect(),
            normalized: s.normalized,
        }),
        selected: segment_json(selected, names),
        segments: report
            .map(|r| {
                r.assignments
                    .iter()
                    .map(|a| segment_json(a, names))
                    .collect()
            })
            .unwrap_or_default(),
        skipped: report
            .map(|r| {
                r.skipped
                    .iter()
                    .map(|s| SkippedJson {
                        anchor: s.anchor,
                        segment: s.segment,
                        requested_first_division: s.requested_first,
                    })
                    .collect()
            })
            .unwrap_or_default(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapBlockJson {
    pub signature: String,
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPointJson {
    pub thr: f64,
    pub overlapping_external_ids: Vec<String>,
    pub n_overlapping: usize,
    pub gamma: Vec<i8>,
    pub overlapping_blocks: Vec<OverlapBlockJson>,
}

pub fn sweep_json(
    results: &[OverlapResult],
    blocks: &BlockAssignment,
    names: &NodeNames,
) -> Vec<SweepPointJson> {
    results
        .iter()
        .map(|r| SweepPointJson {
            thr: r.thr,
            overlapping_external_ids: names.map(&r.overlapping),
            n_overlapping: r.size(),
            gamma: r.gamma.clone(),
            overlapping_blocks: overlapping_blocks(r, blocks)
                .into_iter()
                .map(|k| OverlapBlockJson {
                    signature: blocks.blocks[k].signature.clone(),
                    members: names.map(&blocks.blocks[k].members),
                })
                .collect(),
        })
        .collect()
}

/// Blocks whose nodes are in `O`, in block order.
pub fn overlapping_blocks(r: &OverlapResult, blocks: &BlockAssignment) -> Vec<usize> {
    blocks
        .blocks
        .iter()
        .enumerate()
        .filter(|(_, p)| p.members.iter().any(|&i| r.o[i] == 1))
        .map(|(k, _)| k)
        .collect()
}

/// Node-by-division table followed by the pattern summary.
pub fn patterns_table(z: &DivisionSet, a: &BlockAssignment, names: &NodeNames) -> String {
    let width = names.0.iter().map(String::len).max().unwrap_or(1).max(1);
    let sig_width = a.width().max("Pattern".len());
    let mut out = String::new();
    let _ = write!(out, "{:>width$}", "N");
    for t in a.first_row..=a.last_row {
        let _ = write!(out, " | Div{}", t + 1);
    }
    let _ = writeln!(out, " | {:<sig_width$}", "Pattern");
    for j in 0..z.n_nodes() {
        let _ = write!(out, "{:>width$}", names.get(j));
        for t in a.first_row..=a.last_row {
            let w = format!("Div{}", t + 1).len();
            let _ = write!(out, " | {:^w$}", member_char(z.row(t)[j]));
        }
        let _ = writeln!(out, " | {}", a.blocks[a.assignment[j]].signature);
    }
    out.push('\n');
    let _ = writeln!(out, "Pattern no | {:<sig_width$} | No nodes", "Pattern");
    for (k, p) in a.blocks.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>10} | {:<sig_width$} | {}",
            k + 1,
            p.signature,
            p.size()
        );
    }
    out
}

pub fn sweep_table(results: &[OverlapResult], names: &NodeNames) -> String {
    let mut out = String::from("thr | |O| | overlapping nodes\n");
    for r in results {
        let ids: Vec<&str> = r.overlapping.iter().map(|&i| names.get(i)).collect();
        let _ = writeln!(out, "{} | {} | {}", r.thr, r.size(), ids.join(" "));
    }
    out
}

/// Fill colours cycled over overlapping blocks; everything else is white.
pub const PALETTE: [&str; 8] = [
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#ffff33", "#a65628", "#f781bf",
];

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering of one sweep point.
pub fn overlap_dot(
    g: &Graph,
    blocks: &BlockAssignment,
    overlapping_blocks: &[usize],
    thr: f64,
) -> String {
    let members = overlapping_blocks
        .iter()
        .map(|&k| blocks.blocks[k].members.clone());
    render_dot(g, &block_colours(g.n_nodes(), members), thr)
}

/// DOT rendering from a saved sweep point, for when only the JSON is at hand.
pub fn overlap_dot_from_json(g: &Graph, point: &SweepPointJson) -> String {
    let members = point
        .overlapping_blocks
        .iter()
        .map(|b| b.members.iter().filter_map(|id| g.index_of(id)).collect());
    render_dot(g, &block_colours(g.n_nodes(), members), point.thr)
}

fn block_colours(n: usize, blocks: impl Iterator<Item = Vec<usize>>) -> Vec<&'static str> {
    let mut colour = vec!["white"; n];
    for (i, members) in blocks.enumerate() {
        for j in members {
            colour[j] = PALETTE[i % PALETTE.len()];
        }
    }
    colour
}

fn render_dot(g: &Graph, colour: &[&str], thr: f64) -> String {
    let (kind, arrow) = if g.is_directed() {
        ("digraph", "->")
    } else {
        ("graph", "--")
    };
    let mut out = String::new();
    let _ = writeln!(out, "{kind} overlap {{");
    let _ = writeln!(out, "  label=\"thr = {thr}\";");
    let _ = writeln!(out, "  node [style=filled, shape=circle];");
    for (j, fill) in colour.iter().enumerate() {
        let _ = writeln!(
            out,
            "  \"{}\" [label=\"{}\", fillcolor=\"{}\"];",
            dot_escape(g.external_id(j)),
            dot_escape(g.display_name(j)),
            fill
        );
    }
    for e in g.edges() {
        let _ = writeln!(
            out,
            "  \"{}\" {arrow} \"{}\";",
            dot_escape(g.external_id(e.source)),
            dot_escape(g.external_id(e.target))
        );
    }
    out.push_str("}\n");
    out
}
