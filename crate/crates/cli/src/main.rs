//! Command-line surface: generation, solving, certification, ambiguity
//! checks, phase grids, and trial replay.
//!
//! Exit codes: 0 success, 2 usage or data error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use graphdeconv_cli::bundle::{
    status_name, AmbiguityFile, BundleError, BundleFile, CertificateFile, SolveResultFile,
};
use graphdeconv_cli::edgelist::{load_graph, save_graph, EdgeListError};
use graphdeconv_cli::experiments::{
    compare_alpha, generate_er_instance, generate_fixed_instance, load_grid, persist,
    replay_trial, resolve_fixed_graph, run_grid, ExperimentConfig, ExperimentError, GraphSource,
    GridAxes, InstanceParams, ShiftChoice, SolverConfig, SparsitySpec,
};
use graphdeconv_core::graphs::{erdos_renyi, ShiftKind, ShiftOperator};
use graphdeconv_core::identifiability::{certify, detect_ambiguities};
use graphdeconv_core::seed::derive_seed;
use graphdeconv_core::solver::{recover_filter, relative_error, reweighted_l1, SolveStatus};
use graphdeconv_core::spectral::{eig_sym, khatri_rao_z};
use graphdeconv_core::Mat;

#[derive(Debug, thiserror::Error)]
enum CliError {
    /// Bad flags or bad input data: exit 2.
    #[error("{0}")]
    Data(String),
    /// Numerical failure: exit 3.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<BundleError> for CliError {
    fn from(e: BundleError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EdgeListError> for CliError {
    fn from(e: EdgeListError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<graphdeconv_core::Error> for CliError {
    fn from(e: graphdeconv_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ShiftArg {
    /// Normalized adjacency D^{-1/2} A D^{-1/2} (the default).
    Normalized,
    /// Plain adjacency matrix.
    Adjacency,
}

impl ShiftArg {
    fn choice(self) -> ShiftChoice {
        match self {
            ShiftArg::Normalized => ShiftChoice::NormalizedAdjacency,
            ShiftArg::Adjacency => ShiftChoice::Adjacency,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "graphdeconv",
    about = "Blind identification of graph filters and sparse diffusion sources",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded Erdos-Renyi graph and write it as an edge list.
    GenGraph {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Redraw (derived seeds) until the graph is connected.
        #[arg(long)]
        require_connected: bool,
    },
    /// Synthesize a ground-truth bundle: graph, sparse inputs, invertible
    /// filter, and noiseless observations.
    Simulate {
        /// Node count for an Erdos-Renyi graph (with --p).
        #[arg(long, conflicts_with = "graph", requires = "p")]
        n: Option<usize>,
        /// Edge probability for an Erdos-Renyi graph (with --n).
        #[arg(long, conflicts_with = "graph", requires = "n")]
        p: Option<f64>,
        /// Edge-list file to use instead of a random graph.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Filter order.
        #[arg(long = "L")]
        order: usize,
        /// Filter perturbation scale.
        #[arg(long)]
        alpha: f64,
        /// Total number of nonzeros in the input matrix.
        #[arg(long, conflicts_with = "theta")]
        s: Option<usize>,
        /// Bernoulli-Gaussian nonzero probability (alternative to --s).
        #[arg(long)]
        theta: Option<f64>,
        /// Number of observed signals (columns of Y).
        #[arg(long = "P")]
        n_signals: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "normalized")]
        shift: ShiftArg,
    },
    /// Run the reweighted solver on a bundle and report the recovery error.
    Solve {
        #[arg(long)]
        bundle: PathBuf,
        /// Reweighting smoothing; derived from the first iterate if unset.
        #[arg(long)]
        delta: Option<f64>,
        /// Stopping threshold on the relative l1 change of X.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Certified duality-gap tolerance of the inner solves.
        #[arg(long)]
        inner_tol: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the exact-recovery certificate (C1 rank, C2 dual vector).
    Certify {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report node pairs with permutation ambiguities.
    Ambiguity {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "normalized")]
        shift: ShiftArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a recovery-rate grid and persist CSV + JSON results.
    Grid {
        #[arg(long, conflicts_with = "graph", requires = "p")]
        n: Option<usize>,
        #[arg(long, conflicts_with = "graph", requires = "n")]
        p: Option<f64>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        alpha: f64,
        /// Sparsity axis: "start:end:step" or comma list.
        #[arg(long)]
        s_range: String,
        /// Observation-count axis (requires --L).
        #[arg(long, conflicts_with = "l_range", requires = "order")]
        p_range: Option<String>,
        /// Filter-order axis (requires --P).
        #[arg(long, requires = "n_signals")]
        l_range: Option<String>,
        /// Fixed filter order (with --p-range).
        #[arg(long = "L")]
        order: Option<usize>,
        /// Fixed observation count (with --l-range).
        #[arg(long = "P")]
        n_signals: Option<usize>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Success threshold on the aligned relative error.
        #[arg(long, default_value_t = 0.01)]
        threshold: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Output stem: writes <stem>.csv and <stem>.json.
        #[arg(long)]
        out: PathBuf,
        /// Optional second alpha; prints a per-alpha mean-success summary
        /// alongside the primary grid.
        #[arg(long)]
        compare_alpha: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        inner_tol: Option<f64>,
    },
    /// Re-run one recorded grid trial and check it reproduces exactly.
    Replay {
        #[arg(long)]
        grid_result: PathBuf,
        /// Cell key, e.g. "S=25,P=10" or "S=10,L=3".
        #[arg(long)]
        cell: String,
        #[arg(long)]
        trial: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cmd: Command) -> Result<u8, CliError> {
    match cmd {
        Command::GenGraph {
            n,
            p,
            seed,
            out,
            require_connected,
        } => {
            let mut graph = erdos_renyi(n, p, seed)?;
            if require_connected {
                let mut attempt = 0u64;
                while !graph.is_connected() {
                    attempt += 1;
                    if attempt > 100 {
                        return Err(CliError::Numerical(
                            "no connected graph within 100 redraws".into(),
                        ));
                    }
                    graph = erdos_renyi(n, p, derive_seed(seed, &[attempt]))?;
                }
            }
            save_graph(&out, &graph)?;
            println!(
                "nodes={} edges={} connected={} wrote {}",
                graph.n(),
                graph.edges().len(),
                graph.is_connected(),
                out.display()
            );
            Ok(0)
        }

        Command::Simulate {
            n,
            p,
            graph,
            order,
            alpha,
            s,
            theta,
            n_signals,
            seed,
            out,
            shift,
        } => {
            let sparsity = match (s, theta) {
                (Some(s), None) => SparsitySpec::FixedTotal { s },
                (None, Some(theta)) => SparsitySpec::Bernoulli { theta },
                _ => {
                    return Err(CliError::Data(
                        "exactly one of --s and --theta is required".into(),
                    ))
                }
            };
            let params = InstanceParams {
                order,
                alpha,
                sparsity,
                n_signals,
            };
            let inst = match (n, p, graph) {
                (Some(n), Some(p), None) => {
                    generate_er_instance(n, p, shift.choice(), &params, seed)?
                }
                (None, None, Some(path)) => {
                    let fixed = resolve_fixed_graph(&path, shift.choice())?;
                    generate_fixed_instance(&fixed, &params, seed)?
                }
                _ => {
                    return Err(CliError::Data(
                        "either --n with --p, or --graph, is required".into(),
                    ))
                }
            };
            let bundle = BundleFile::from_instance(&inst, &params, seed);
            bundle.save(&out)?;
            println!(
                "n={} P={} nnz={} L={} alpha={} filter_redraws={} wrote {}",
                inst.graph.n(),
                n_signals,
                bundle.support.len(),
                order,
                alpha,
                inst.filter_redraws,
                out.display()
            );
            Ok(0)
        }

        Command::Solve {
            bundle,
            delta,
            eps,
            max_iters,
            inner_tol,
            out,
        } => {
            let bundle = BundleFile::load(&bundle)?;
            let (z, dec, x0) = instance_from_bundle(&bundle)?;
            let defaults = SolverConfig::default();
            let solver = SolverConfig {
                delta: delta.or(defaults.delta),
                eps: eps.unwrap_or(defaults.eps),
                max_iters: max_iters.unwrap_or(defaults.max_iters),
                inner_tol: inner_tol.unwrap_or(defaults.inner_tol),
            };
            let result = reweighted_l1(&z, &solver.to_options())
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let e_x = relative_error(&result.x_hat, &x0)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let (h_coeffs, h_residual) = match recover_filter(
                &result.g_tilde,
                &dec,
                bundle.params.order,
            ) {
                Ok(rec) => (Some(rec.fit.coeffs), Some(rec.fit.residual)),
                Err(_) => (None, None),
            };
            let file = SolveResultFile::new(&result, solver, Some(e_x), h_coeffs, h_residual);
            file.save(&out)?;
            println!(
                "e_X={:.6} iters={} status={}",
                e_x,
                result.iterations.len(),
                status_name(result.status)
            );
            Ok(if result.status == SolveStatus::SolverFailure {
                3
            } else {
                0
            })
        }

        Command::Certify { bundle, out } => {
            let bundle = BundleFile::load(&bundle)?;
            let (z, _dec, _x0) = instance_from_bundle(&bundle)?;
            let support = bundle.vec_support();
            let report = certify(&z, &support, &bundle.g_tilde0)
                .map_err(|e| CliError::Data(e.to_string()))?;
            let file = CertificateFile::from_report(&report);
            file.save(&out)?;
            let margin = match report.c2_margin {
                Some(m) => format!("{m}"),
                None => "inf".to_string(),
            };
            println!(
                "C1={} C2={} margin={}",
                report.c1_holds, report.c2_holds, margin
            );
            Ok(0)
        }

        Command::Ambiguity { graph, shift, out } => {
            let g = load_graph(&graph)?;
            let shift_op = shift.choice().build(&g)?;
            let report = detect_ambiguities(&shift_op);
            for pair in &report.pairs {
                println!("pair=({},{}) lambda={}", pair.i, pair.j, pair.eigenvalue);
            }
            println!("ambiguous={}", report.ambiguous);
            if let Some(path) = out {
                AmbiguityFile::from_report(&report, shift_op.kind()).save(&path)?;
            }
            Ok(0)
        }

        Command::Grid {
            n,
            p,
            graph,
            alpha,
            s_range,
            p_range,
            l_range,
            order,
            n_signals,
            trials,
            threshold,
            seed,
            workers,
            out,
            compare_alpha: alpha2,
            delta,
            eps,
            max_iters,
            inner_tol,
        } => {
            let source = match (n, p, graph) {
                (Some(n), Some(p), None) => GraphSource::ErdosRenyi { n, p },
                (None, None, Some(path)) => GraphSource::File { path },
                _ => {
                    return Err(CliError::Data(
                        "either --n with --p, or --graph, is required".into(),
                    ))
                }
            };
            let s_values = parse_axis(&s_range)?;
            let axes = match (&p_range, &l_range) {
                (Some(pr), None) => GridAxes::SparsityObservations {
                    s_values,
                    p_values: parse_axis(pr)?,
                    filter_order: order.ok_or_else(|| {
                        CliError::Data("--p-range requires --L".into())
                    })?,
                },
                (None, Some(lr)) => GridAxes::SparsityOrder {
                    s_values,
                    l_values: parse_axis(lr)?,
                    n_signals: n_signals.ok_or_else(|| {
                        CliError::Data("--l-range requires --P".into())
                    })?,
                },
                _ => {
                    return Err(CliError::Data(
                        "exactly one of --p-range and --l-range is required".into(),
                    ))
                }
            };
            let defaults = SolverConfig::default();
            let cfg = ExperimentConfig {
                graph: source,
                axes,
                alpha,
                trials,
                success_threshold: threshold,
                base_seed: seed,
                workers,
                solver: SolverConfig {
                    delta: delta.or(defaults.delta),
                    eps: eps.unwrap_or(defaults.eps),
                    max_iters: max_iters.unwrap_or(defaults.max_iters),
                    inner_tol: inner_tol.unwrap_or(defaults.inner_tol),
                },
            };
            let grid = run_grid(&cfg)?;
            let (csv_path, json_path) = persist(&grid, &out)?;
            println!(
                "cells={} trials_per_cell={} wrote {} {}",
                grid.cells.len(),
                trials,
                csv_path.display(),
                json_path.display()
            );
            if let Some(a2) = alpha2 {
                let mut cfg2 = cfg.clone();
                cfg2.alpha = a2;
                let summary = compare_alpha(&[cfg, cfg2])?;
                for s in summary {
                    println!("alpha={} mean_success_rate={}", s.alpha, s.mean_success_rate);
                }
            }
            Ok(0)
        }

        Command::Replay {
            grid_result,
            cell,
            trial,
        } => {
            let grid = load_grid(&grid_result)?;
            let (axis1, axis2) = parse_cell_key(&cell, &grid.axis2_name)?;
            let (recomputed, recorded) = replay_trial(&grid, axis1, axis2, trial)?;
            let matches = recomputed == recorded;
            println!("e_X={recomputed} recorded={recorded} match={matches}");
            Ok(if matches { 0 } else { 3 })
        }
    }
}

/// Builds the design matrix and decomposition recorded in a bundle. The
/// decomposition is recomputed from the graph (the eigensolver is
/// deterministic), which keeps bundles small.
fn instance_from_bundle(bundle: &BundleFile) -> Result<(Mat, graphdeconv_core::spectral::SpectralDecomposition, Mat), CliError> {
    let graph = bundle.graph.to_graph()?;
    let shift = match bundle.shift.as_str() {
        "adjacency" => ShiftOperator::adjacency(&graph),
        "normalized_adjacency" => ShiftOperator::normalized_adjacency(&graph)?,
        other => {
            return Err(CliError::Data(format!(
                "bundle has unsupported shift kind {other:?}"
            )))
        }
    };
    debug_assert!(matches!(
        shift.kind(),
        ShiftKind::Adjacency | ShiftKind::NormalizedAdjacency
    ));
    let dec = eig_sym(&shift)?;
    let y = graphdeconv_cli::bundle::rows_to_mat(&bundle.y)?;
    let x0 = graphdeconv_cli::bundle::rows_to_mat(&bundle.x0)?;
    let z = khatri_rao_z(&y, &dec)?;
    Ok((z, dec, x0))
}

/// Parses "start:end:step" (inclusive) or a comma list into axis values.
fn parse_axis(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = |msg: &str| CliError::Data(format!("bad axis spec {text:?}: {msg}"));
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:end:step"));
        }
        let start: usize = parts[0].trim().parse().map_err(|_| bad("bad start"))?;
        let end: usize = parts[1].trim().parse().map_err(|_| bad("bad end"))?;
        let step: usize = parts[2].trim().parse().map_err(|_| bad("bad step"))?;
        if step == 0 || end < start {
            return Err(bad("need step >= 1 and end >= start"));
        }
        (start..=end).step_by(step).collect()
    } else {
        let mut v = Vec::new();
        for tok in text.split(',') {
            v.push(tok.trim().parse().map_err(|_| bad("bad value"))?);
        }
        v
    };
    if values.is_empty() {
        return Err(bad("empty axis"));
    }
    Ok(values)
}

/// Parses a "S=25,P=10" cell key against the grid's axis names.
fn parse_cell_key(text: &str, axis2_name: &str) -> Result<(usize, usize), CliError> {
    let bad = |msg: String| CliError::Data(format!("bad cell key {text:?}: {msg}"));
    let mut axis1 = None;
    let mut axis2 = None;
    for part in text.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| bad("expected K=V pairs".into()))?;
        let value: usize = value
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad value {value:?}")))?;
        match key.trim() {
            "S" => axis1 = Some(value),
            k if k == axis2_name => axis2 = Some(value),
            k => return Err(bad(format!("unknown axis {k:?} (expected S, {axis2_name})"))),
        }
    }
    match (axis1, axis2) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(bad(format!("need both S and {axis2_name}"))),
    }
}
