//! Recovery-rate phase grids with deterministic seeding and single-trial
//! replay.
//!
//! Per cell and trial the protocol is: draw a connected,
//! ambiguity-free graph (redrawing up to a budget), draw a sparse input and
//! an invertible filter, synthesize noiseless observations, run the
//! reweighted solver, and mark success when the aligned relative error is
//! below the threshold. Every trial's RNG seed derives from
//! `(base_seed, cell, trial)`, so results are independent of the
//! parallelism level and any single trial can be replayed bit-identically.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use graphdeconv_core::graphs::{erdos_renyi, Graph, ShiftKind, ShiftOperator};
use graphdeconv_core::identifiability::detect_ambiguities;
use graphdeconv_core::seed::derive_seed;
use graphdeconv_core::signals::{
    bernoulli_gaussian, fixed_sparsity_inputs, make_filter, synthesize, GroundTruth,
};
use graphdeconv_core::solver::{
    relative_error, reweighted_l1, ReweightOptions, SolveStatus,
};
use graphdeconv_core::spectral::{eig_sym, khatri_rao_z, SpectralDecomposition};

use crate::edgelist::{load_graph, EdgeListError};

/// Seed-derivation tags; frozen, since changing them breaks stored grids.
const TAG_GRAPH: u64 = 1;
const TAG_INPUTS: u64 = 2;
const TAG_FILTER: u64 = 3;

/// Redraw budget for disconnected or ambiguous graphs.
pub const GRAPH_REDRAW_BUDGET: usize = 100;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] graphdeconv_core::Error),
    #[error(transparent)]
    EdgeList(#[from] EdgeListError),
    #[error("no admissible graph after {budget} redraws")]
    GraphBudgetExhausted { budget: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Solver parameters carried by configs and bundles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub delta: Option<f64>,
    pub eps: f64,
    pub max_iters: usize,
    pub inner_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = ReweightOptions::default();
        SolverConfig {
            delta: d.delta,
            eps: d.eps,
            max_iters: d.max_iters,
            inner_tol: d.inner_tol,
        }
    }
}

impl SolverConfig {
    pub fn to_options(&self) -> ReweightOptions {
        ReweightOptions {
            delta: self.delta,
            eps: self.eps,
            max_iters: self.max_iters,
            inner_tol: self.inner_tol,
        }
    }
}

/// Where trial graphs come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    ErdosRenyi { n: usize, p: f64 },
    File { path: PathBuf },
}

/// Which shift operator to build from a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftChoice {
    NormalizedAdjacency,
    Adjacency,
}

impl ShiftChoice {
    pub fn build(self, g: &Graph) -> Result<ShiftOperator, graphdeconv_core::Error> {
        match self {
            ShiftChoice::NormalizedAdjacency => ShiftOperator::normalized_adjacency(g),
            ShiftChoice::Adjacency => Ok(ShiftOperator::adjacency(g)),
        }
    }

    pub fn kind(self) -> ShiftKind {
        match self {
            ShiftChoice::NormalizedAdjacency => ShiftKind::NormalizedAdjacency,
            ShiftChoice::Adjacency => ShiftKind::Adjacency,
        }
    }
}

/// Sparse-input generator selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparsitySpec {
    FixedTotal { s: usize },
    Bernoulli { theta: f64 },
}

/// Everything needed to synthesize one instance on a given graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub order: usize,
    pub alpha: f64,
    pub sparsity: SparsitySpec,
    pub n_signals: usize,
}

/// A graph fixed for all trials (file source), with its decomposition.
pub struct FixedGraph {
    pub graph: Graph,
    pub shift: ShiftOperator,
    pub dec: SpectralDecomposition,
}

pub fn resolve_fixed_graph(
    path: &Path,
    shift: ShiftChoice,
) -> Result<FixedGraph, ExperimentError> {
    let graph = load_graph(path)?;
    if !graph.is_connected() {
        return Err(ExperimentError::Config(format!(
            "graph {} is not connected",
            path.display()
        )));
    }
    let shift = shift.build(&graph)?;
    let dec = eig_sym(&shift)?;
    Ok(FixedGraph { graph, shift, dec })
}

/// One synthesized instance plus its generation counters.
pub struct GeneratedInstance {
    pub graph: Graph,
    pub shift_kind: ShiftKind,
    pub dec: SpectralDecomposition,
    pub gt: GroundTruth,
    pub graph_redraws: usize,
    pub ambiguity_redraws: usize,
    pub filter_redraws: usize,
}

/// Draws a connected ambiguity-free Erdos-Renyi graph (budgeted redraws),
/// then the inputs, filter, and observations, all from seeds derived from
/// `seed`.
pub fn generate_er_instance(
    n: usize,
    p_edge: f64,
    shift_choice: ShiftChoice,
    params: &InstanceParams,
    seed: u64,
) -> Result<GeneratedInstance, ExperimentError> {
    let mut graph_redraws = 0;
    let mut ambiguity_redraws = 0;
    let mut chosen: Option<(Graph, ShiftOperator)> = None;
    for attempt in 0..GRAPH_REDRAW_BUDGET as u64 {
        let g = erdos_renyi(n, p_edge, derive_seed(seed, &[TAG_GRAPH, attempt]))?;
        if !g.is_connected() {
            graph_redraws += 1;
            continue;
        }
        let shift = shift_choice.build(&g)?;
        if detect_ambiguities(&shift).ambiguous {
            ambiguity_redraws += 1;
            continue;
        }
        chosen = Some((g, shift));
        break;
    }
    let (graph, shift) = chosen.ok_or(ExperimentError::GraphBudgetExhausted {
        budget: GRAPH_REDRAW_BUDGET,
    })?;
    let dec = eig_sym(&shift)?;
    finish_instance(
        graph,
        shift_choice.kind(),
        dec,
        params,
        seed,
        graph_redraws,
        ambiguity_redraws,
    )
}

/// Synthesizes an instance on a fixed (file-sourced) graph; no redraws.
pub fn generate_fixed_instance(
    fixed: &FixedGraph,
    params: &InstanceParams,
    seed: u64,
) -> Result<GeneratedInstance, ExperimentError> {
    finish_instance(
        fixed.graph.clone(),
        fixed.shift.kind(),
        fixed.dec.clone(),
        params,
        seed,
        0,
        0,
    )
}

fn finish_instance(
    graph: Graph,
    shift_kind: ShiftKind,
    dec: SpectralDecomposition,
    params: &InstanceParams,
    seed: u64,
    graph_redraws: usize,
    ambiguity_redraws: usize,
) -> Result<GeneratedInstance, ExperimentError> {
    let n = graph.n();
    let x0 = match params.sparsity {
        SparsitySpec::FixedTotal { s } => {
            fixed_sparsity_inputs(n, params.n_signals, s, derive_seed(seed, &[TAG_INPUTS]))?
        }
        SparsitySpec::Bernoulli { theta } => {
            bernoulli_gaussian(n, params.n_signals, theta, derive_seed(seed, &[TAG_INPUTS]))?
        }
    };
    let draw = make_filter(
        params.order,
        params.alpha,
        derive_seed(seed, &[TAG_FILTER]),
        &dec,
    )?;
    let filter_redraws = draw.redraws;
    let gt = synthesize(x0, draw.filter, &dec)?;
    Ok(GeneratedInstance {
        graph,
        shift_kind,
        dec,
        gt,
        graph_redraws,
        ambiguity_redraws,
        filter_redraws,
    })
}

/// Grid axes: sparsity against observation count (fixed filter order) or
/// sparsity against filter order (fixed observation count).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridAxes {
    SparsityObservations {
        s_values: Vec<usize>,
        p_values: Vec<usize>,
        filter_order: usize,
    },
    SparsityOrder {
        s_values: Vec<usize>,
        l_values: Vec<usize>,
        n_signals: usize,
    },
}

impl GridAxes {
    pub fn axis2_name(&self) -> &'static str {
        match self {
            GridAxes::SparsityObservations { .. } => "P",
            GridAxes::SparsityOrder { .. } => "L",
        }
    }

    fn axis_tag(&self) -> u64 {
        match self {
            GridAxes::SparsityObservations { .. } => 1,
            GridAxes::SparsityOrder { .. } => 2,
        }
    }

    /// All `(axis1, axis2)` cells in deterministic order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let (s_values, other) = match self {
            GridAxes::SparsityObservations { s_values, p_values, .. } => (s_values, p_values),
            GridAxes::SparsityOrder { s_values, l_values, .. } => (s_values, l_values),
        };
        let mut out = Vec::new();
        for &s in s_values {
            for &o in other {
                out.push((s, o));
            }
        }
        out
    }

    fn instance_params(&self, axis2: usize, s: usize, alpha: f64) -> InstanceParams {
        match self {
            GridAxes::SparsityObservations { filter_order, .. } => InstanceParams {
                order: *filter_order,
                alpha,
                sparsity: SparsitySpec::FixedTotal { s },
                n_signals: axis2,
            },
            GridAxes::SparsityOrder { n_signals, .. } => InstanceParams {
                order: axis2,
                alpha,
                sparsity: SparsitySpec::FixedTotal { s },
                n_signals: *n_signals,
            },
        }
    }
}

/// Full grid specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub axes: GridAxes,
    pub alpha: f64,
    pub trials: usize,
    pub success_threshold: f64,
    pub base_seed: u64,
    pub workers: usize,
    pub solver: SolverConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let err = |msg: String| Err(ExperimentError::Config(msg));
        if self.trials == 0 {
            return err("trials must be >= 1".into());
        }
        if !(self.success_threshold > 0.0) {
            return err("success_threshold must be > 0".into());
        }
        if !(self.alpha >= 0.0) {
            return err("alpha must be >= 0".into());
        }
        if self.workers == 0 {
            return err("workers must be >= 1".into());
        }
        let cells = self.axes.cells();
        if cells.is_empty() {
            return err("grid has no cells".into());
        }
        if let GraphSource::ErdosRenyi { n, p } = self.graph {
            if n < 2 || !(p > 0.0 && p <= 1.0) {
                return err(format!("bad Erdos-Renyi parameters n={n} p={p}"));
            }
            for &(s, axis2) in &cells {
                let params = self.axes.instance_params(axis2, s, self.alpha);
                if params.n_signals == 0 {
                    return err("observation count must be >= 1".into());
                }
                if params.order == 0 || params.order > n {
                    return err(format!("filter order {} out of 1..={n}", params.order));
                }
                if let SparsitySpec::FixedTotal { s } = params.sparsity {
                    if s == 0 || s > n * params.n_signals {
                        return err(format!(
                            "sparsity {s} out of range for {n}x{} inputs",
                            params.n_signals
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub e_x: f64,
    pub solver_failed: bool,
    pub graph_redraws: usize,
    pub ambiguity_redraws: usize,
    pub filter_redraws: usize,
    /// Set when the graph redraw budget ran out; `e_x` is then the 1.0
    /// sentinel and the trial counts as a solver failure.
    pub generation_failed: bool,
}

/// Runs one trial of a config at cell `(s, axis2)`. The same function backs
/// grid execution and replay, so recorded values reproduce bit-identically.
pub fn run_trial(
    cfg: &ExperimentConfig,
    fixed: Option<&FixedGraph>,
    s: usize,
    axis2: usize,
    trial: usize,
) -> TrialOutcome {
    let trial_seed = derive_seed(
        cfg.base_seed,
        &[cfg.axes.axis_tag(), s as u64, axis2 as u64, trial as u64],
    );
    let params = cfg.axes.instance_params(axis2, s, cfg.alpha);
    let generated = match (&cfg.graph, fixed) {
        (GraphSource::ErdosRenyi { n, p }, None) => generate_er_instance(
            *n,
            *p,
            ShiftChoice::NormalizedAdjacency,
            &params,
            trial_seed,
        ),
        (_, Some(fg)) => generate_fixed_instance(fg, &params, trial_seed),
        (GraphSource::File { .. }, None) => {
            unreachable!("file-sourced grids resolve the graph up front")
        }
    };
    let inst = match generated {
        Ok(inst) => inst,
        Err(_) => {
            return TrialOutcome {
                e_x: 1.0,
                solver_failed: true,
                graph_redraws: GRAPH_REDRAW_BUDGET,
                ambiguity_redraws: 0,
                filter_redraws: 0,
                generation_failed: true,
            }
        }
    };
    let z = match khatri_rao_z(&inst.gt.y, &inst.dec) {
        Ok(z) => z,
        Err(_) => {
            return TrialOutcome {
                e_x: 1.0,
                solver_failed: true,
                graph_redraws: inst.graph_redraws,
                ambiguity_redraws: inst.ambiguity_redraws,
                filter_redraws: inst.filter_redraws,
                generation_failed: true,
            }
        }
    };
    let opts = cfg.solver.to_options();
    match reweighted_l1(&z, &opts) {
        Ok(res) => {
            let e_x = relative_error(&res.x_hat, inst.gt.x0.values()).unwrap_or(1.0);
            TrialOutcome {
                e_x,
                solver_failed: res.status == SolveStatus::SolverFailure,
                graph_redraws: inst.graph_redraws,
                ambiguity_redraws: inst.ambiguity_redraws,
                filter_redraws: inst.filter_redraws,
                generation_failed: false,
            }
        }
        Err(_) => TrialOutcome {
            e_x: 1.0,
            solver_failed: true,
            graph_redraws: inst.graph_redraws,
            ambiguity_redraws: inst.ambiguity_redraws,
            filter_redraws: inst.filter_redraws,
            generation_failed: false,
        },
    }
}

/// Aggregated cell statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub success_rate: f64,
    pub mean_error: f64,
    pub trials: usize,
    pub solver_failures: usize,
    pub ambiguity_redraws: usize,
    /// Per-trial aligned relative errors, in trial order; replaying trial
    /// `t` must reproduce entry `t` exactly.
    pub per_trial_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub axis1: usize,
    pub axis2: usize,
    #[serde(flatten)]
    pub result: CellResult,
}

/// Completed grid with config echo and metadata. Serialized as the JSON
/// sidecar of the CSV table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub schema_version: String,
    pub axis1_name: String,
    pub axis2_name: String,
    pub config: ExperimentConfig,
    pub cells: Vec<GridCell>,
    /// Wall-clock metadata only; never part of the CSV.
    pub timing_seconds: f64,
    pub code_version: String,
}

/// Runs the full grid. Deterministic for a fixed config (including
/// `base_seed`) at any `workers` level: per-trial seeds fix the randomness
/// and results are reduced in task order.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<ExperimentGrid, ExperimentError> {
    cfg.validate()?;
    let fixed = match &cfg.graph {
        GraphSource::File { path } => {
            Some(resolve_fixed_graph(path, ShiftChoice::NormalizedAdjacency)?)
        }
        GraphSource::ErdosRenyi { .. } => None,
    };
    let cells = cfg.axes.cells();
    let mut tasks = Vec::with_capacity(cells.len() * cfg.trials);
    for (ci, &(s, axis2)) in cells.iter().enumerate() {
        for trial in 0..cfg.trials {
            tasks.push((ci, s, axis2, trial));
        }
    }

    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| ExperimentError::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<TrialOutcome> = pool.install(|| {
        use rayon::prelude::*;
        tasks
            .par_iter()
            .map(|&(_, s, axis2, trial)| run_trial(cfg, fixed.as_ref(), s, axis2, trial))
            .collect()
    });
    let timing_seconds = started.elapsed().as_secs_f64();

    let mut grid_cells = Vec::with_capacity(cells.len());
    for (ci, &(s, axis2)) in cells.iter().enumerate() {
        let slice = &outcomes[ci * cfg.trials..(ci + 1) * cfg.trials];
        let successes = slice
            .iter()
            .filter(|o| o.e_x < cfg.success_threshold)
            .count();
        let mean_error = slice.iter().map(|o| o.e_x).sum::<f64>() / cfg.trials as f64;
        grid_cells.push(GridCell {
            axis1: s,
            axis2,
            result: CellResult {
                success_rate: successes as f64 / cfg.trials as f64,
                mean_error,
                trials: cfg.trials,
                solver_failures: slice.iter().filter(|o| o.solver_failed).count(),
                ambiguity_redraws: slice.iter().map(|o| o.ambiguity_redraws).sum(),
                per_trial_errors: slice.iter().map(|o| o.e_x).collect(),
            },
        });
    }

    Ok(ExperimentGrid {
        schema_version: crate::SCHEMA_VERSION.to_string(),
        axis1_name: "S".to_string(),
        axis2_name: cfg.axes.axis2_name().to_string(),
        config: cfg.clone(),
        cells: grid_cells,
        timing_seconds,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// CSV table: one row per cell, byte-stable for identical grids (timing
/// lives only in the JSON sidecar).
pub fn to_csv(grid: &ExperimentGrid) -> String {
    let mut out = String::from(
        "axis1,axis2,success_rate,mean_error,trials,solver_failures,ambiguity_redraws\n",
    );
    for cell in &grid.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            cell.axis1,
            cell.axis2,
            cell.result.success_rate,
            cell.result.mean_error,
            cell.result.trials,
            cell.result.solver_failures,
            cell.result.ambiguity_redraws,
        ));
    }
    out
}

/// Writes `<stem>.csv` and `<stem>.json`.
pub fn persist(grid: &ExperimentGrid, stem: &Path) -> Result<(PathBuf, PathBuf), ExperimentError> {
    let csv_path = stem.with_extension("csv");
    let json_path = stem.with_extension("json");
    let io_err = |path: &Path, source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    };
    std::fs::write(&csv_path, to_csv(grid)).map_err(|e| io_err(&csv_path, e))?;
    let json = serde_json::to_string_pretty(grid).expect("grid serializes");
    std::fs::write(&json_path, json).map_err(|e| io_err(&json_path, e))?;
    Ok((csv_path, json_path))
}

pub fn load_grid(path: &Path) -> Result<ExperimentGrid, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text)
        .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))
}

/// Replays one recorded trial; returns `(recomputed, recorded)` errors.
pub fn replay_trial(
    grid: &ExperimentGrid,
    axis1: usize,
    axis2: usize,
    trial: usize,
) -> Result<(f64, f64), ExperimentError> {
    let cell = grid
        .cells
        .iter()
        .find(|c| c.axis1 == axis1 && c.axis2 == axis2)
        .ok_or_else(|| {
            ExperimentError::Config(format!("cell ({axis1},{axis2}) not in grid"))
        })?;
    let recorded = *cell.result.per_trial_errors.get(trial).ok_or_else(|| {
        ExperimentError::Config(format!("trial {trial} not recorded (cell has {})",
            cell.result.per_trial_errors.len()))
    })?;
    let fixed = match &grid.config.graph {
        GraphSource::File { path } => {
            Some(resolve_fixed_graph(path, ShiftChoice::NormalizedAdjacency)?)
        }
        GraphSource::ErdosRenyi { .. } => None,
    };
    let outcome = run_trial(&grid.config, fixed.as_ref(), axis1, axis2, trial);
    Ok((outcome.e_x, recorded))
}

/// Mean success rate (uniform over cells) per alpha, ascending in alpha.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSummary {
    pub alpha: f64,
    pub mean_success_rate: f64,
}

/// Runs config clones that differ only in alpha and summarizes each.
pub fn compare_alpha(configs: &[ExperimentConfig]) -> Result<Vec<AlphaSummary>, ExperimentError> {
    if configs.is_empty() {
        return Err(ExperimentError::Config("no configs given".into()));
    }
    let mut reference = configs[0].clone();
    reference.alpha = 0.0;
    for cfg in configs {
        let mut probe = cfg.clone();
        probe.alpha = 0.0;
        if probe != reference {
            return Err(ExperimentError::Config(
                "configs must be identical except for alpha".into(),
            ));
        }
    }
    let mut out = Vec::with_capacity(configs.len());
    for cfg in configs {
        let grid = run_grid(cfg)?;
        out.push(AlphaSummary {
            alpha: cfg.alpha,
            mean_success_rate: mean_success(&grid),
        });
    }
    out.sort_by(|a, b| a.alpha.partial_cmp(&b.alpha).unwrap());
    Ok(out)
}

/// Uniform-over-cells mean success rate of a grid.
pub fn mean_success(grid: &ExperimentGrid) -> f64 {
    grid.cells
        .iter()
        .map(|c| c.result.success_rate)
        .sum::<f64>()
        / grid.cells.len() as f64
}
