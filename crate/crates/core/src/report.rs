//! Deterministic text output: number formatting, CSV tables, JSON reports
//! and atomic file writes.
//!
//! CSV floats are written with 17 significant digits in scientific notation.
//! JSON floats use serde_json's shortest round-trip representation, which is
//! equally deterministic.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::graph::InteractionGraph;
use crate::induced::{component_regularity, components, largest_component_bounds, max_degree, max_degree_bound};
use crate::laplacian::QuantumLaplacian;
use crate::sync::reduced_states;
use crate::{Error, Result, STRUCTURAL_CAP};

/// `x` with 17 significant digits, e.g. `1.0000000000000000e0`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `contents` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// `t,residual,trace_defect,min_eig[,d1,…,dn]`, one row per sample.
///
/// `distances[i][k]` is `D_{k+1}` at the `i`-th sample; the `d` columns are
/// omitted when no distances are supplied.
pub fn trajectory_csv(traj: &Trajectory, residuals: &[f64], distances: Option<&[Vec<f64>]>) -> String {
    let n = traj.states.first().map_or(0, |s| s.n());
    let mut out = String::from("t,residual,trace_defect,min_eig");
    if distances.is_some() {
        for k in 1..=n {
            let _ = write!(out, ",d{k}");
        }
    }
    out.push('\n');
    for (i, (t, state)) in traj.times.iter().zip(&traj.states).enumerate() {
        let _ = write!(
            out,
            "{},{},{},{}",
            fmt_f64(*t),
            fmt_f64(residuals[i]),
            fmt_f64(state.trace_defect()),
            fmt_f64(state.min_eigenvalue())
        );
        if let Some(d) = distances {
            for x in &d[i] {
                let _ = write!(out, ",{}", fmt_f64(*x));
            }
        }
        out.push('\n');
    }
    out
}

/// `t,qubit,x,y,z`, qubits 1-based, one row per qubit per sample.
pub fn bloch_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,qubit,x,y,z\n");
    for (t, state) in traj.times.iter().zip(&traj.states) {
        for r in reduced_states(state) {
            let b = r.bloch();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(*t),
                r.qubit + 1,
                fmt_f64(b.x),
                fmt_f64(b.y),
                fmt_f64(b.z)
            );
        }
    }
    out
}

/// `t,D_1,…,D_n`.
pub fn sync_csv(times: &[f64], distances: &[Vec<f64>]) -> String {
    let n = distances.first().map_or(0, Vec::len);
    let mut out = String::from("t");
    for k in 1..=n {
        let _ = write!(out, ",D_{k}");
    }
    out.push('\n');
    for (t, row) in times.iter().zip(distances) {
        out.push_str(&fmt_f64(*t));
        for x in row {
            let _ = write!(out, ",{}", fmt_f64(*x));
        }
        out.push('\n');
    }
    out
}

/// Structural and spectral summary of one interaction graph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub connected: bool,
    pub total_components: usize,
    pub size_histogram: std::collections::BTreeMap<usize, usize>,
    pub largest: usize,
    pub bounds: [u64; 2],
    pub max_degree: usize,
    pub max_degree_node: String,
    pub degree_bound: usize,
    pub all_components_regular: bool,
    /// component ids (discovery order) whose nodes have unequal degrees
    pub irregular_components: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    pub notes: Vec<String>,
}

/// Census, degree and regularity data for `g`, plus the Laplacian kernel
/// dimension and `λ₂` unless `structural_only`.
///
/// Structural analysis walks the implicit induced graph and accepts
/// `n ≤ STRUCTURAL_CAP`; the spectral part builds the Laplacian and needs
/// `n ≤ cap`.
pub fn analyze_graph(g: &InteractionGraph, cap: usize, structural_only: bool) -> Result<AnalysisReport> {
    let n = g.n();
    let limit = if structural_only { STRUCTURAL_CAP } else { cap };
    if n > limit {
        return Err(Error::QubitCap { n, cap: limit });
    }
    let partition = components(g)?;
    let census = partition.census();
    let (node, degree) = max_degree(g)?;
    let regularity = component_regularity(g, &partition);
    let irregular: Vec<usize> = regularity
        .iter()
        .filter(|r| !r.is_regular())
        .map(|r| r.component)
        .collect();
    let (lo, hi) = largest_component_bounds(n.max(2));
    let connected = g.is_connected();
    let mut notes = Vec::new();
    if !connected {
        notes.push("not connected".to_string());
    }

    let (kernel_dimension, lambda2) = if structural_only {
        notes.push("spectral analysis skipped".to_string());
        (None, None)
    } else {
        let lap = QuantumLaplacian::build_capped(g, cap)?;
        let lambda2 = if connected && g.num_edges() > 0 {
            Some(lap.lambda2()?)
        } else {
            notes.push("lambda2 omitted: graph is not connected".to_string());
            None
        };
        (Some(lap.kernel_dimension()), lambda2)
    };

    Ok(AnalysisReport {
        n,
        edges: g.edges().iter().map(|e| [e.lo + 1, e.hi + 1]).collect(),
        connected,
        total_components: census.total_components,
        size_histogram: census.size_histogram,
        largest: census.largest,
        bounds: [lo, hi],
        max_degree: degree,
        max_degree_node: node.to_string(),
        degree_bound: max_degree_bound(n.max(2)),
        all_components_regular: irregular.is_empty(),
        irregular_components: irregular,
        kernel_dimension,
        lambda2,
        notes,
    })
}
