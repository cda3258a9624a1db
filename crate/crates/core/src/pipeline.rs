//! End-to-end run: influence, divisions, ranking, blocks, threshold sweep.
//!
//! Every artifact is rendered in memory first; nothing touches the output
//! directory unless all stages succeed.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::blocks::{
    build_blocks_with, compute_and_rank_with, full_blocks, BlockAssignment, BlockReport,
    DivisionScores,
};
use crate::config::{BlockSelection, RunConfig};
use crate::error::{Error, Result};
use crate::graph::{load_edge_list, Graph};
use crate::influence::{compute_influence_with, import_matrix, parse_matrix_csv, InfluenceMatrix};
use crate::overlap::{threshold_sweep_with, CommunityAssignment, OverlapResult};
use crate::partition::{generate_divisions_with, import_divisions, DivisionSet};
use crate::report::{
    block_report_json, overlap_dot, overlapping_blocks, patterns_table, sweep_json, sweep_table,
    NodeNames,
};

pub const CACHE_ENV: &str = "NODEOVERLAP_CACHE_DIR";

#[derive(Clone, Debug, Default)]
pub struct PipelineOptions {
    /// Directory for cached influence matrices.
    pub cache_dir: Option<PathBuf>,
}

impl PipelineOptions {
    pub fn from_env() -> Self {
        PipelineOptions {
            cache_dir: std::env::var_os(CACHE_ENV).map(PathBuf::from),
        }
    }
}

/// Named output files in write order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bundle {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Bundle {
    pub fn push(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_slice())
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Writes every file into `dir`. On failure, files written by this call
    /// are removed again.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let path = dir.join(name);
            if let Err(e) = fs::write(&path, contents) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(Error::io(path, e));
            }
            written.push(path);
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub graph: Graph,
    pub matrix: InfluenceMatrix,
    pub divisions: DivisionSet,
    pub scores: DivisionScores,
    pub report: BlockReport,
    pub selected: BlockAssignment,
    pub sweep: Vec<OverlapResult>,
    pub bundle: Bundle,
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

pub fn load_graph(cfg: &RunConfig) -> Result<Graph> {
    let path = cfg
        .graph
        .as_deref()
        .ok_or_else(|| Error::Parameter("no graph given".into()))?;
    let mut g = load_edge_list(path, cfg.weight, cfg.directed)?;
    if let Some(labels) = &cfg.labels {
        g.load_labels(labels)?;
    }
    Ok(g)
}

fn cache_key(g: &Graph, max_path_length: usize) -> String {
    let mut h = Sha256::new();
    h.update(b"influence-paths-v1\n");
    h.update(format!(
        "{} {} {}\n",
        g.n_nodes(),
        g.is_directed(),
        max_path_length
    ));
    h.update(g.to_edge_list());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Path-model matrix, reusing a cached copy under `cache_dir` when present.
pub fn influence_cached(
    g: &Graph,
    max_path_length: usize,
    cfg: &RunConfig,
    cache_dir: Option<&Path>,
) -> Result<InfluenceMatrix> {
    let Some(dir) = cache_dir else {
        return compute_influence_with(g, max_path_length, cfg.execution);
    };
    let path = dir.join(format!("{}.csv", cache_key(g, max_path_length)));
    if let Ok(text) = fs::read_to_string(&path) {
        match parse_matrix_csv(&text, &path) {
            Ok(m) if m.n() == g.n_nodes() => {
                log::info!("influence matrix loaded from cache {}", path.display());
                return Ok(m);
            }
            _ => log::warn!("ignoring unreadable cache entry {}", path.display()),
        }
    }
    let m = compute_influence_with(g, max_path_length, cfg.execution)?;
    if let Err(e) = fs::create_dir_all(dir).and_then(|_| fs::write(&path, m.to_csv())) {
        log::warn!("could not write cache entry {}: {e}", path.display());
    }
    Ok(m)
}

fn dot_name(thr: f64) -> String {
    format!("overlap-thr-{thr}.dot")
}

/// Runs all stages and renders the output bundle without writing it.
pub fn run(cfg: &RunConfig, opts: &PipelineOptions) -> Result<PipelineOutput> {
    stage("config", cfg.validate())?;
    let exec = cfg.execution;
    let graph = stage("load", load_graph(cfg))?;
    let n = graph.n_nodes();
    log::info!("graph: {n} nodes, {} edges", graph.n_edges());

    let matrix = stage(
        "influence",
        match &cfg.matrix {
            Some(p) => import_matrix(p).and_then(|m| {
                if m.n() == n {
                    Ok(m)
                } else {
                    Err(Error::Dimension {
                        expected: n,
                        found: m.n(),
                    })
                }
            }),
            None => influence_cached(&graph, cfg.max_path_length, cfg, opts.cache_dir.as_deref()),
        },
    )?;

    let divisions = stage(
        "divisions",
        match &cfg.divisions {
            Some(p) => import_divisions(p, cfg.transpose).and_then(|z| {
                if z.n_nodes() == n {
                    Ok(z)
                } else {
                    Err(Error::Dimension {
                        expected: n,
                        found: z.n_nodes(),
                    })
                }
            }),
            None => generate_divisions_with(&matrix, &cfg.seed_list(), cfg.max_iters, exec),
        },
    )?;
    log::info!("{} divisions", divisions.len());

    let scores = stage(
        "rank",
        compute_and_rank_with(&matrix, &divisions, cfg.normalize, exec),
    )?;
    let report = stage(
        "blocks",
        build_blocks_with(
            &divisions,
            &scores.ranking,
            cfg.segment_length,
            cfg.anchors.min(divisions.len() - 1),
            exec,
        ),
    )?;
    let selected = match cfg.select {
        BlockSelection::Full => full_blocks(&divisions),
        BlockSelection::Ranked => stage(
            "blocks",
            report.top_anchor_widest().cloned().ok_or_else(|| {
                Error::Parameter("top anchor produced no segment within the divisions".into())
            }),
        )?,
    };

    let communities = CommunityAssignment::from_divisions(&divisions);
    let sweep = stage(
        "overlap",
        threshold_sweep_with(&communities, &selected, &cfg.thresholds, cfg.rule(), exec),
    )?;

    let names = NodeNames::from_graph(&graph);
    let mut bundle = Bundle::default();
    bundle.push("config.json", cfg.to_json());
    bundle.push("influence.csv", matrix.to_csv());
    bundle.push("divisions.txt", divisions.to_text());
    let blocks_json =
        block_report_json(&divisions, Some(&scores), Some(&report), &selected, &names);
    bundle.push("blocks.json", pretty(&blocks_json)?);
    bundle.push("blocks.txt", patterns_table(&divisions, &selected, &names));
    bundle.push(
        "sweep.json",
        pretty(&sweep_json(&sweep, &selected, &names))?,
    );
    bundle.push("sweep.txt", sweep_table(&sweep, &names));
    for r in &sweep {
        let ob = overlapping_blocks(r, &selected);
        bundle.push(dot_name(r.thr), overlap_dot(&graph, &selected, &ob, r.thr));
    }

    Ok(PipelineOutput {
        graph,
        matrix,
        divisions,
        scores,
        report,
        selected,
        sweep,
        bundle,
    })
}

/// Runs the pipeline and writes the bundle to `cfg.output_dir`.
pub fn run_and_write(cfg: &RunConfig, opts: &PipelineOptions) -> Result<PipelineOutput> {
    let out = run(cfg, opts)?;
    stage("write", out.bundle.write_to(&cfg.output_dir))?;
    Ok(out)
}

pub(crate) fn pretty<T: serde::Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}
