//! Run configuration shared by the pipeline and the command line.
//!
//! Values resolve as command-line flags over a config file over defaults. A
//! config file is TOML unless its extension is `.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::influence::DEFAULT_MAX_PATH_LENGTH;
use crate::overlap::{Accumulation, Comparison, MatchRule, SideRule};
use crate::partition::DEFAULT_MAX_ITERS;

pub const DEFAULT_N_SEEDS: usize = 100;
pub const DEFAULT_SEGMENT_LENGTH: usize = 2;

/// Which rows feed the block grouping used for overlap evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockSelection {
    /// All divisions.
    #[default]
    Full,
    /// Widest segment of the top-ranked anchor.
    Ranked,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub graph: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub directed: bool,
    /// Weight for edges listed without one.
    pub weight: Option<f64>,
    pub max_path_length: usize,
    /// Precomputed influence matrix (CSV) used instead of the path model.
    pub matrix: Option<PathBuf>,
    /// Precomputed divisions used instead of local search.
    pub divisions: Option<PathBuf>,
    pub transpose: bool,
    pub n_seeds: usize,
    pub seeds: Option<Vec<u64>>,
    pub max_iters: usize,
    pub segment_length: usize,
    pub anchors: usize,
    pub normalize: bool,
    pub select: BlockSelection,
    pub thresholds: Vec<f64>,
    pub mode: Comparison,
    pub sides: SideRule,
    pub accumulation: Accumulation,
    pub output_dir: PathBuf,
    pub execution: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            graph: None,
            labels: None,
            directed: false,
            weight: None,
            max_path_length: DEFAULT_MAX_PATH_LENGTH,
            matrix: None,
            divisions: None,
            transpose: false,
            n_seeds: DEFAULT_N_SEEDS,
            seeds: None,
            max_iters: DEFAULT_MAX_ITERS,
            segment_length: DEFAULT_SEGMENT_LENGTH,
            anchors: 1,
            normalize: false,
            select: BlockSelection::Full,
            thresholds: vec![0.0, 0.25, 0.5, 1.0, 2.0, 5.0],
            mode: Comparison::Strict,
            sides: SideRule::Either,
            accumulation: Accumulation::AfterScan,
            output_dir: PathBuf::from("out"),
            execution: Execution::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: e.line(),
                message: e.to_string(),
            })
        } else {
            toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
        }
    }

    pub fn rule(&self) -> MatchRule {
        MatchRule {
            comparison: self.mode,
            sides: self.sides,
            accumulation: self.accumulation,
        }
    }

    pub fn seed_list(&self) -> Vec<u64> {
        self.seeds
            .clone()
            .unwrap_or_else(|| crate::partition::default_seeds(self.n_seeds))
    }

    /// Checks values that can be rejected before any computation starts.
    pub fn validate(&self) -> Result<()> {
        if self.graph.is_none() {
            return Err(Error::Parameter("no graph given".into()));
        }
        if let Some(w) = self.weight {
            crate::graph::check_probability("weight", w)?;
        }
        if self.max_path_length == 0 {
            return Err(Error::Parameter(
                "max_path_length must be at least 1".into(),
            ));
        }
        if self.segment_length == 0 {
            return Err(Error::Parameter("segment_length must be at least 1".into()));
        }
        if self.anchors == 0 {
            return Err(Error::Parameter("anchors must be at least 1".into()));
        }
        if self.thresholds.is_empty() {
            return Err(Error::Parameter("threshold list is empty".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}
