use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use nodeoverlap::blocks::{build_blocks_with, compute_and_rank_with, full_blocks};
use nodeoverlap::config::{BlockSelection, RunConfig};
use nodeoverlap::graph::clustering_coefficient;
use nodeoverlap::influence::import_matrix;
use nodeoverlap::overlap::{
    threshold_sweep_with, Accumulation, CommunityAssignment, Comparison, SideRule,
};
use nodeoverlap::partition::{generate_divisions_with, import_divisions};
use nodeoverlap::pipeline::{self, influence_cached, load_graph, PipelineOptions};
use nodeoverlap::report::{
    block_report_json, overlap_dot_from_json, patterns_table, sweep_json, sweep_table, NodeNames,
    SweepPointJson,
};
use nodeoverlap::{DivisionSet, Error, Execution, InfluenceMatrix};

#[derive(Parser)]
#[command(
    name = "nodeoverlap",
    version,
    about = "Find overlapping nodes from building blocks of network divisions"
)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the influence matrix of a graph as CSV.
    Influence {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Find distinct local-maximum divisions.
    Detect {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Rank divisions and group nodes into building blocks.
    Blocks {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        input: DivisionArgs,
        #[command(flatten)]
        blocks: BlockArgs,
        /// Write the JSON report here; the table goes to stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Evaluate overlapping nodes over a list of thresholds.
    #[command(visible_alias = "overlap")]
    Sweep {
        /// Graph used for node ids; positional ids are used without one.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        weight: Option<f64>,
        #[arg(long)]
        directed: bool,
        #[command(flatten)]
        input: DivisionArgs,
        /// Rows used for blocks, 1-based inclusive, e.g. 2:7. Default: all.
        #[arg(long, value_parser = parse_rows)]
        rows: Option<(usize, usize)>,
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long, value_enum, default_value_t = ExecArg::Parallel)]
        execution: ExecArg,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run every stage and write the full output bundle.
    Pipeline {
        /// TOML or JSON run configuration; flags override it.
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        weight: Option<f64>,
        #[arg(long)]
        directed: bool,
        #[arg(short = 'L', long)]
        max_path_length: Option<usize>,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        divisions: Option<PathBuf>,
        #[arg(long)]
        transpose: bool,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        segment_length: Option<usize>,
        #[arg(long)]
        anchors: Option<usize>,
        #[arg(long)]
        normalize: bool,
        #[arg(long, value_enum)]
        select: Option<SelectArg>,
        #[arg(long, value_delimiter = ',')]
        thr: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, value_enum)]
        sides: Option<SidesArg>,
        #[arg(long, value_enum)]
        accumulation: Option<AccumulationArg>,
        #[arg(long, value_enum)]
        execution: Option<ExecArg>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Render DOT files from a saved sweep.
    ExportDot {
        #[command(flatten)]
        graph: GraphArgs,
        /// sweep.json written by `sweep` or `pipeline`.
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print the mean clustering coefficient of a graph.
    Clustering {
        #[command(flatten)]
        graph: GraphArgs,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list: `source target [weight]` per line.
    #[arg(long)]
    graph: PathBuf,
    /// Weight for edges listed without one.
    #[arg(long)]
    weight: Option<f64>,
    #[arg(long)]
    directed: bool,
    /// Node names, `id<TAB>name` per line.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Longest path counted by the influence model.
    #[arg(short = 'L', long, default_value_t = nodeoverlap::influence::DEFAULT_MAX_PATH_LENGTH)]
    max_path_length: usize,
    /// Precomputed influence matrix (CSV).
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ExecArg::Parallel)]
    execution: ExecArg,
}

#[derive(Args)]
struct SearchArgs {
    /// Number of random starts (seeds 0..N).
    #[arg(long, default_value_t = nodeoverlap::config::DEFAULT_N_SEEDS)]
    seeds: usize,
    #[arg(long, default_value_t = nodeoverlap::partition::DEFAULT_MAX_ITERS)]
    max_iters: usize,
}

#[derive(Args)]
struct DivisionArgs {
    /// Divisions file, one row of x/o per division.
    #[arg(long)]
    divisions: PathBuf,
    /// The file has one row per node instead.
    #[arg(long)]
    transpose: bool,
}

#[derive(Args)]
struct BlockArgs {
    #[arg(long, default_value_t = nodeoverlap::config::DEFAULT_SEGMENT_LENGTH)]
    segment_length: usize,
    #[arg(long, default_value_t = 1)]
    anchors: usize,
    #[arg(long)]
    normalize: bool,
    #[arg(long, value_enum, default_value_t = SelectArg::Full)]
    select: SelectArg,
}

#[derive(Args)]
struct RuleArgs {
    /// Comma-separated thresholds, ascending.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    thr: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Strict)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SidesArg::Either)]
    sides: SidesArg,
    #[arg(long, value_enum, default_value_t = AccumulationArg::AfterScan)]
    accumulation: AccumulationArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExecArg {
    Sequential,
    Parallel,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectArg {
    Full,
    Ranked,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    NonStrict,
}

#[derive(Clone, Copy, ValueEnum)]
enum SidesArg {
    Either,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum AccumulationArg {
    AfterScan,
    Diagonal,
}

impl From<ExecArg> for Execution {
    fn from(e: ExecArg) -> Self {
        match e {
            ExecArg::Sequential => Execution::Sequential,
            ExecArg::Parallel => Execution::Parallel,
        }
    }
}

impl From<SelectArg> for BlockSelection {
    fn from(s: SelectArg) -> Self {
        match s {
            SelectArg::Full => BlockSelection::Full,
            SelectArg::Ranked => BlockSelection::Ranked,
        }
    }
}

impl From<ModeArg> for Comparison {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Strict => Comparison::Strict,
            ModeArg::NonStrict => Comparison::NonStrict,
        }
    }
}

impl From<SidesArg> for SideRule {
    fn from(s: SidesArg) -> Self {
        match s {
            SidesArg::Either => SideRule::Either,
            SidesArg::Both => SideRule::Both,
        }
    }
}

impl From<AccumulationArg> for Accumulation {
    fn from(a: AccumulationArg) -> Self {
        match a {
            AccumulationArg::AfterScan => Accumulation::AfterScan,
            AccumulationArg::Diagonal => Accumulation::Diagonal,
        }
    }
}

fn parse_rows(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected FIRST:LAST")?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad row `{a}`"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad row `{b}`"))?;
    if a == 0 || b < a {
        return Err("rows are 1-based and FIRST <= LAST".into());
    }
    Ok((a, b))
}

fn graph_config(g: &GraphArgs, run: Option<&RunArgs>) -> RunConfig {
    let mut cfg = RunConfig {
        graph: Some(g.graph.clone()),
        labels: g.labels.clone(),
        directed: g.directed,
        weight: g.weight,
        ..RunConfig::default()
    };
    if let Some(r) = run {
        cfg.max_path_length = r.max_path_length;
        cfg.matrix = r.matrix.clone();
        cfg.execution = r.execution.into();
    }
    cfg
}

fn matrix_for(cfg: &RunConfig) -> nodeoverlap::Result<InfluenceMatrix> {
    cfg.validate()?;
    let g = load_graph(cfg)?;
    match &cfg.matrix {
        Some(p) => {
            let m = import_matrix(p)?;
            if m.n() != g.n_nodes() {
                return Err(Error::Dimension {
                    expected: g.n_nodes(),
                    found: m.n(),
                });
            }
            Ok(m)
        }
        None => influence_cached(
            &g,
            cfg.max_path_length,
            cfg,
            PipelineOptions::from_env().cache_dir.as_deref(),
        ),
    }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn load_divisions(d: &DivisionArgs, n: Option<usize>) -> nodeoverlap::Result<DivisionSet> {
    let z = import_divisions(&d.divisions, d.transpose)?;
    if let Some(n) = n {
        if z.n_nodes() != n {
            return Err(Error::Dimension {
                expected: n,
                found: z.n_nodes(),
            });
        }
    }
    Ok(z)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Influence { graph, run, out } => {
            let cfg = graph_config(&graph, Some(&run));
            let m = matrix_for(&cfg)?;
            emit(out.as_deref(), &m.to_csv())
        }
        Command::Detect {
            graph,
            run,
            search,
            out,
        } => {
            let cfg = graph_config(&graph, Some(&run));
            let m = matrix_for(&cfg)?;
            let seeds = nodeoverlap::partition::default_seeds(search.seeds);
            let z = generate_divisions_with(&m, &seeds, search.max_iters, cfg.execution)?;
            log::info!("{} distinct divisions", z.len());
            emit(out.as_deref(), &z.to_text())
        }
        Command::Blocks {
            graph,
            run,
            input,
            blocks,
            out,
        } => {
            let cfg = graph_config(&graph, Some(&run));
            let g = load_graph(&cfg)?;
            let m = matrix_for(&cfg)?;
            let z = load_divisions(&input, Some(g.n_nodes()))?;
            let exec = cfg.execution;
            let scores = compute_and_rank_with(&m, &z, blocks.normalize, exec)?;
            let report = build_blocks_with(
                &z,
                &scores.ranking,
                blocks.segment_length,
                blocks.anchors,
                exec,
            )?;
            let selected = match BlockSelection::from(blocks.select) {
                BlockSelection::Full => full_blocks(&z),
                BlockSelection::Ranked => report
                    .top_anchor_widest()
                    .cloned()
                    .ok_or_else(|| Error::Parameter("top anchor produced no segment".into()))?,
            };
            let names = NodeNames::from_graph(&g);
            if let Some(p) = &out {
                let json = block_report_json(&z, Some(&scores), Some(&report), &selected, &names);
                emit(Some(p), &to_json(&json)?)?;
            }
            print!("{}", patterns_table(&z, &selected, &names));
            Ok(())
        }
        Command::Sweep {
            graph,
            weight,
            directed,
            input,
            rows,
            rule,
            execution,
            out,
        } => {
            let names_graph = match &graph {
                Some(p) => Some(nodeoverlap::graph::load_edge_list(
                    p,
                    weight.or(Some(1.0)),
                    directed,
                )?),
                None => None,
            };
            let z = load_divisions(&input, names_graph.as_ref().map(|g| g.n_nodes()))?;
            let blocks = match rows {
                Some((a, b)) => nodeoverlap::blocks::blocks_for_rows(&z, a - 1, b - 1)?,
                None => full_blocks(&z),
            };
            let cfg = RunConfig {
                mode: rule.mode.into(),
                sides: rule.sides.into(),
                accumulation: rule.accumulation.into(),
                ..RunConfig::default()
            };
            let communities = CommunityAssignment::from_divisions(&z);
            let results = threshold_sweep_with(
                &communities,
                &blocks,
                &rule.thr,
                cfg.rule(),
                execution.into(),
            )?;
            let names = match &names_graph {
                Some(g) => NodeNames::from_graph(g),
                None => NodeNames::positional(z.n_nodes()),
            };
            if let Some(p) = &out {
                emit(Some(p), &to_json(&sweep_json(&results, &blocks, &names))?)?;
            }
            print!("{}", sweep_table(&results, &names));
            Ok(())
        }
        Command::Pipeline {
            config,
            graph,
            labels,
            weight,
            directed,
            max_path_length,
            matrix,
            divisions,
            transpose,
            seeds,
            max_iters,
            segment_length,
            anchors,
            normalize,
            select,
            thr,
            mode,
            sides,
            accumulation,
            execution,
            out,
        } => {
            let mut cfg = match &config {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::default(),
            };
            macro_rules! set {
                ($field:ident, $v:expr) => {
                    if let Some(v) = $v {
                        cfg.$field = v.into();
                    }
                };
            }
            set!(graph, graph.map(Some));
            set!(labels, labels.map(Some));
            set!(weight, weight.map(Some));
            set!(max_path_length, max_path_length);
            set!(matrix, matrix.map(Some));
            set!(divisions, divisions.map(Some));
            set!(n_seeds, seeds);
            set!(max_iters, max_iters);
            set!(segment_length, segment_length);
            set!(anchors, anchors);
            set!(select, select);
            set!(thresholds, thr);
            set!(mode, mode);
            set!(sides, sides);
            set!(accumulation, accumulation);
            set!(execution, execution);
            set!(output_dir, out);
            if seeds.is_some() {
                cfg.seeds = None;
            }
            cfg.directed |= directed;
            cfg.transpose |= transpose;
            cfg.normalize |= normalize;
            let result = pipeline::run_and_write(&cfg, &PipelineOptions::from_env())?;
            print!(
                "{}",
                sweep_table(&result.sweep, &NodeNames::from_graph(&result.graph))
            );
            log::info!("wrote {}", cfg.output_dir.display());
            Ok(())
        }
        Command::ExportDot {
            graph,
            sweep,
            out_dir,
        } => {
            let cfg = graph_config(&graph, None);
            cfg.validate()?;
            let g = load_graph(&cfg)?;
            let text = fs::read_to_string(&sweep).map_err(|e| Error::Io {
                path: sweep.clone(),
                source: e,
            })?;
            let points: Vec<SweepPointJson> =
                serde_json::from_str(&text).map_err(|e| Error::Parse {
                    path: sweep.clone(),
                    line: e.line(),
                    message: e.to_string(),
                })?;
            fs::create_dir_all(&out_dir).map_err(|e| Error::Io {
                path: out_dir.clone(),
                source: e,
            })?;
            for p in &points {
                let path = out_dir.join(format!("overlap-thr-{}.dot", p.thr));
                fs::write(&path, overlap_dot_from_json(&g, p))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(())
        }
        Command::Clustering { graph } => {
            let cfg = graph_config(&graph, None);
            let weight = cfg.weight.or(Some(1.0));
            let g = nodeoverlap::graph::load_edge_list(&graph.graph, weight, graph.directed)?;
            println!("{:.4}", clustering_coefficient(&g));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // library errors already embed their sources in the message
            let input = match e.downcast_ref::<Error>() {
                Some(err) => {
                    eprintln!("error: {err}");
                    err.is_input_error()
                }
                None => {
                    eprintln!("error: {e:#}");
                    false
                }
            };
            ExitCode::from(if input { 2 } else { 1 })
        }
    }
}
