//! Versioned JSON schemas for ground-truth bundles, solve results,
//! certificate reports, and ambiguity reports.
//!
//! Matrices serialize as row-major nested arrays with an explicit
//! `storage: "row_major"` tag; the solver's internal column-major `vec`
//! convention never leaks into files. Bundles carry every seed, so any
//! instance is replayable from its file alone.

use std::path::Path;

use serde::{Deserialize, Serialize};

use graphdeconv_core::graphs::{Graph, ShiftKind};
use graphdeconv_core::identifiability::{AmbiguityReport, CertificateReport};
use graphdeconv_core::signals::GroundTruth;
use graphdeconv_core::solver::{DeconvolutionResult, SolveStatus};
use graphdeconv_core::Mat;

use crate::experiments::{GeneratedInstance, InstanceParams, SolverConfig};
use crate::SCHEMA_VERSION;

#[derive(Debug, thiserror::Error)]
pub enum BundleError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Malformed { path: String, message: String },
}

fn io_err(path: &Path, source: std::io::Error) -> BundleError {
    BundleError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn malformed(path: &Path, message: impl Into<String>) -> BundleError {
    BundleError::Malformed {
        path: path.display().to_string(),
        message: message.into(),
    }
}

pub fn mat_to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn rows_to_mat(rows: &[Vec<f64>]) -> Result<Mat, graphdeconv_core::Error> {
    Mat::from_rows(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDto {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl GraphDto {
    pub fn from_graph(g: &Graph) -> GraphDto {
        GraphDto {
            n: g.n(),
            edges: g.edges().iter().map(|e| (e.u, e.v, e.weight)).collect(),
        }
    }

    pub fn to_graph(&self) -> Result<Graph, graphdeconv_core::Error> {
        Graph::new(self.n, self.edges.iter().copied())
    }
}

pub fn shift_kind_name(kind: ShiftKind) -> &'static str {
    match kind {
        ShiftKind::Adjacency => "adjacency",
        ShiftKind::NormalizedAdjacency => "normalized_adjacency",
        ShiftKind::Custom => "custom",
    }
}

/// Ground-truth bundle: everything needed to re-run a solve or certificate
/// on one synthesized instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleFile {
    pub schema_version: String,
    pub storage: String,
    pub graph: GraphDto,
    pub shift: String,
    pub params: InstanceParams,
    pub seed: u64,
    pub graph_redraws: usize,
    pub ambiguity_redraws: usize,
    pub filter_redraws: usize,
    /// Filter coefficients `h0` (unit l1 norm).
    pub h0: Vec<f64>,
    /// Frequency response of `h0` on this graph.
    pub h_tilde0: Vec<f64>,
    /// Unnormalized inverse response (`g_tilde0 o h_tilde0 = 1`).
    pub g_tilde0: Vec<f64>,
    /// `1^T g_tilde0`, the scale mapping onto the solver constraint.
    pub scale_c: f64,
    pub x0: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    /// Ground-truth support as `(row, col)` pairs.
    pub support: Vec<(usize, usize)>,
}

impl BundleFile {
    pub fn from_instance(inst: &GeneratedInstance, params: &InstanceParams, seed: u64) -> Self {
        let gt: &GroundTruth = &inst.gt;
        BundleFile {
            schema_version: SCHEMA_VERSION.to_string(),
            storage: "row_major".to_string(),
            graph: GraphDto::from_graph(&inst.graph),
            shift: shift_kind_name(inst.shift_kind).to_string(),
            params: params.clone(),
            seed,
            graph_redraws: inst.graph_redraws,
            ambiguity_redraws: inst.ambiguity_redraws,
            filter_redraws: inst.filter_redraws,
            h0: gt.h0.coeffs().unwrap_or_default().to_vec(),
            h_tilde0: gt.h0.stored_response().unwrap_or_default().to_vec(),
            g_tilde0: gt.g_tilde0.clone(),
            scale_c: gt.scale_c,
            x0: mat_to_rows(gt.x0.values()),
            y: mat_to_rows(&gt.y),
            support: gt.x0.support().to_vec(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), BundleError> {
        let json = serde_json::to_string_pretty(self).expect("bundle serializes");
        std::fs::write(path, json).map_err(|e| io_err(path, e))
    }

    pub fn load(path: &Path) -> Result<BundleFile, BundleError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let bundle: BundleFile =
            serde_json::from_str(&text).map_err(|e| malformed(path, e.to_string()))?;
        bundle.check(path)?;
        Ok(bundle)
    }

    fn check(&self, path: &Path) -> Result<(), BundleError> {
        if self.storage != "row_major" {
            return Err(malformed(path, format!("unknown storage {:?}", self.storage)));
        }
        let n = self.graph.n;
        if self.g_tilde0.len() != n || self.h_tilde0.len() != n {
            return Err(malformed(path, "response length does not match graph size"));
        }
        if self.x0.len() != n || self.y.len() != n {
            return Err(malformed(path, "signal row count does not match graph size"));
        }
        let p = self.x0.first().map_or(0, Vec::len);
        if p == 0 || self.x0.iter().any(|r| r.len() != p) || self.y.iter().any(|r| r.len() != p) {
            return Err(malformed(path, "ragged or empty signal matrices"));
        }
        for &(i, j) in &self.support {
            if i >= n || j >= p {
                return Err(malformed(path, format!("support entry ({i},{j}) out of range")));
            }
        }
        Ok(())
    }

    /// Support as column-major vec indices, sorted.
    pub fn vec_support(&self) -> Vec<usize> {
        let n = self.graph.n;
        let mut idx: Vec<usize> = self.support.iter().map(|&(i, j)| j * n + i).collect();
        idx.sort_unstable();
        idx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationDto {
    pub objective: f64,
    pub rel_gap: f64,
    pub delta_ratio: Option<f64>,
}

pub fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxIters => "max_iters",
        SolveStatus::SolverFailure => "solver_failure",
    }
}

/// Solve result file: recovered responses, inputs, trace, and metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResultFile {
    pub schema_version: String,
    pub storage: String,
    pub status: String,
    pub g_tilde: Vec<f64>,
    pub x_hat: Vec<Vec<f64>>,
    pub h_tilde: Option<Vec<f64>>,
    /// Least-squares filter coefficients at the bundle's order, with the
    /// fit residual; absent when `g_tilde` has near-zero entries.
    pub h_coeffs: Option<Vec<f64>>,
    pub h_fit_residual: Option<f64>,
    pub iterations: Vec<IterationDto>,
    /// Aligned relative recovery error against the bundle's ground truth.
    pub e_x: Option<f64>,
    pub solver: SolverConfig,
}

impl SolveResultFile {
    pub fn new(
        result: &DeconvolutionResult,
        solver: SolverConfig,
        e_x: Option<f64>,
        h_coeffs: Option<Vec<f64>>,
        h_fit_residual: Option<f64>,
    ) -> Self {
        SolveResultFile {
            schema_version: SCHEMA_VERSION.to_string(),
            storage: "row_major".to_string(),
            status: status_name(result.status).to_string(),
            g_tilde: result.g_tilde.clone(),
            x_hat: mat_to_rows(&result.x_hat),
            h_tilde: result.h_tilde.clone(),
            h_coeffs,
            h_fit_residual,
            iterations: result
                .iterations
                .iter()
                .map(|it| IterationDto {
                    objective: it.objective,
                    rel_gap: it.rel_gap,
                    delta_ratio: it.delta_ratio,
                })
                .collect(),
            e_x,
            solver,
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), BundleError> {
        let json = serde_json::to_string_pretty(self).expect("result serializes");
        std::fs::write(path, json).map_err(|e| io_err(path, e))
    }
}

/// Certificate report file (C1 rank condition and C2 dual certificate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub schema_version: String,
    pub c1_rank: usize,
    pub c1_holds: bool,
    /// `null` encodes an infeasible C2 program (margin +inf).
    pub c2_margin: Option<f64>,
    pub c2_gamma: f64,
    pub c2_holds: bool,
    pub certified: bool,
}

impl CertificateFile {
    pub fn from_report(report: &CertificateReport) -> Self {
        CertificateFile {
            schema_version: SCHEMA_VERSION.to_string(),
            c1_rank: report.c1_rank,
            c1_holds: report.c1_holds,
            c2_margin: report.c2_margin,
            c2_gamma: report.c2_gamma,
            c2_holds: report.c2_holds,
            certified: report.certified(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), BundleError> {
        let json = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(path, json).map_err(|e| io_err(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityPairDto {
    pub i: usize,
    pub j: usize,
    pub eigenvalue: f64,
}

/// Ambiguity report file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityFile {
    pub schema_version: String,
    pub shift: String,
    pub pairs: Vec<AmbiguityPairDto>,
    pub ambiguous: bool,
}

impl AmbiguityFile {
    pub fn from_report(report: &AmbiguityReport, kind: ShiftKind) -> Self {
        AmbiguityFile {
            schema_version: SCHEMA_VERSION.to_string(),
            shift: shift_kind_name(kind).to_string(),
            pairs: report
                .pairs
                .iter()
                .map(|p| AmbiguityPairDto {
                    i: p.i,
                    j: p.j,
                    eigenvalue: p.eigenvalue,
                })
                .collect(),
            ambiguous: report.ambiguous,
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), BundleError> {
        let json = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(path, json).map_err(|e| io_err(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mat_roundtrip_row_major() {
        let m = Mat::from_fn(3, 2, |i, j| (i * 2 + j) as f64);
        let rows = mat_to_rows(&m);
        assert_eq!(rows[2], vec![4.0, 5.0]);
        let back = rows_to_mat(&rows).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn bundle_check_rejects_ragged() {
        let dto = BundleFile {
            schema_version: SCHEMA_VERSION.into(),
            storage: "row_major".into(),
            graph: GraphDto { n: 2, edges: vec![(0, 1, 1.0)] },
            shift: "normalized_adjacency".into(),
            params: InstanceParams {
                order: 1,
                alpha: 0.0,
                sparsity: crate::experiments::SparsitySpec::FixedTotal { s: 1 },
                n_signals: 1,
            },
            seed: 0,
            graph_redraws: 0,
            ambiguity_redraws: 0,
            filter_redraws: 0,
            h0: vec![1.0],
            h_tilde0: vec![1.0, 1.0],
            g_tilde0: vec![1.0, 1.0],
            scale_c: 2.0,
            x0: vec![vec![1.0], vec![0.0, 0.0]],
            y: vec![vec![1.0], vec![0.0]],
            support: vec![(0, 0)],
        };
        let path = Path::new("test.json");
        assert!(dto.check(path).is_err());
    }
}
