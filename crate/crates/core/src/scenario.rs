//! Simulation scenarios: the JSON input of `swapnet simulate` and the
//! pipeline that turns one into trajectory, Bloch, sync and summary outputs.
//!
//! ```json
//! {
//!   "n": 3,
//!   "schedule": {"n": 3, "segments": [{"t": 0.0, "edges": [[1,2],[1,3],[2,3]]}], "dwell_floor": 1.0},
//!   "hamiltonian": {"kind": "tensor_power", "h0": [[[1,0],[0,0]],[[0,0],[-1,0]]]},
//!   "initial_state": {"ket": [[0,0],[0,0],[0,0],[0,0],[0.7071067811865476,0],[0.7071067811865476,0],[0,0],[0,0]]},
//!   "t_end": 10.0,
//!   "output_stride": 0.05
//! }
//! ```
//!
//! `repeat: {"period": p, "count": c}` tiles the schedule's segments
//! periodically. `options` may set `check_states` (validate every output
//! state), `step` (Runge-Kutta step override), `method` and `sync`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{
    estimate_rate, fit_decay_rate, integrate, quantum_average, DensityState, IntegratorOptions, Method, RateFit,
    Trajectory,
};
use crate::graph::{ScheduleJson, SwitchingSchedule};
use crate::laplacian::QuantumLaplacian;
use crate::operators::{matrix_from_pairs, HamiltonianJson, HamiltonianSpec};
use crate::report::{bloch_csv, sync_csv, trajectory_csv};
use crate::sync::{coinciding_curves, max_pairwise_distance, sync_distances, SyncOrbit};
use crate::{Error, Result, C64, DEFAULT_DENSE_CAP};

/// Distance curves that agree to this are reported as coinciding.
pub const COINCIDENCE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepeatJson {
    pub period: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialStateJson {
    /// amplitudes in ket-index order, each `[re, im]`
    Ket(Vec<[f64; 2]>),
    /// rows of `[re, im]` pairs
    Density(Vec<Vec<[f64; 2]>>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsJson {
    #[serde(default)]
    pub check_states: bool,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub method: Option<Method>,
    /// emit synchronization distances when the Hamiltonian allows it
    #[serde(default = "yes")]
    pub sync: bool,
}

fn yes() -> bool {
    true
}

impl Default for OptionsJson {
    fn default() -> Self {
        Self {
            check_states: false,
            step: None,
            method: None,
            sync: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioJson {
    pub n: usize,
    pub schedule: ScheduleJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeat: Option<RepeatJson>,
    pub hamiltonian: HamiltonianJson,
    pub initial_state: InitialStateJson,
    pub t_end: f64,
    pub output_stride: f64,
    #[serde(default)]
    pub options: OptionsJson,
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub schedule: SwitchingSchedule,
    pub hamiltonian: HamiltonianSpec,
    pub initial_state: DensityState,
    pub t_end: f64,
    pub output_stride: f64,
    pub check_states: bool,
    pub step: Option<f64>,
    pub method: Method,
    pub sync: bool,
    /// SHA-256 of the source text, lowercase hex
    pub hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ScenarioJson = serde_json::from_str(text)?;
        Self::from_raw(raw, sha256_hex(text.as_bytes()))
    }

    pub fn from_raw(raw: ScenarioJson, hash: String) -> Result<Self> {
        if raw.schedule.n != raw.n {
            return Err(Error::InvalidArgument(format!(
                "scenario n = {} but schedule n = {}",
                raw.n, raw.schedule.n
            )));
        }
        // the qubit cap is enforced before any 2^n allocation
        if raw.n > DEFAULT_DENSE_CAP {
            return Err(Error::QubitCap {
                n: raw.n,
                cap: DEFAULT_DENSE_CAP,
            });
        }
        let schedule = match &raw.repeat {
            Some(r) => SwitchingSchedule::periodic(raw.schedule.segments()?, r.period, r.count, raw.schedule.dwell_floor)?,
            None => raw.schedule.clone().into_schedule()?,
        };
        let initial_state = match &raw.initial_state {
            InitialStateJson::Ket(amp) => {
                let amp: Vec<C64> = amp.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                DensityState::from_ket(&amp)?
            }
            InitialStateJson::Density(rows) => DensityState::new(matrix_from_pairs(rows)?)?,
        };
        if initial_state.n() != raw.n {
            return Err(Error::DimensionMismatch {
                expected: 1 << raw.n,
                got: initial_state.dim(),
            });
        }
        Ok(Self {
            schedule,
            hamiltonian: raw.hamiltonian.try_into()?,
            initial_state,
            t_end: raw.t_end,
            output_stride: raw.output_stride,
            check_states: raw.options.check_states,
            step: raw.options.step,
            method: raw.options.method.unwrap_or_default(),
            sync: raw.options.sync,
            hash,
        })
    }

    pub fn n(&self) -> usize {
        self.initial_state.n()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyncSummary {
    pub final_max_distance: f64,
    /// groups of 1-based qubits whose `D_k` curves coincide to 1e-10
    pub coinciding_groups: Vec<Vec<usize>>,
    pub note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub n: usize,
    pub scenario_hash: String,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    pub t_end: f64,
    pub samples: usize,
    pub hamiltonian: String,
    /// `λ₂` of the union graph over `[0, t_end)`, when connected
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    pub initial_residual: f64,
    pub final_residual: f64,
    /// exponential fit of the residual to the quantum average of `ρ₀`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_fit: Option<RateFit>,
    pub final_max_pairwise_distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sync: Option<SyncSummary>,
    pub warnings: Vec<String>,
}

/// Everything `simulate` produces for one scenario.
#[derive(Clone, Debug)]
pub struct SimulationOutput {
    pub trajectory: Trajectory,
    pub residuals: Vec<f64>,
    /// `D_k(t)` per sample, when the synchronization orbit is defined
    pub distances: Option<Vec<Vec<f64>>>,
    pub summary: SimulationSummary,
}

impl SimulationOutput {
    pub fn trajectory_csv(&self) -> String {
        trajectory_csv(&self.trajectory, &self.residuals, self.distances.as_deref())
    }

    pub fn bloch_csv(&self) -> String {
        bloch_csv(&self.trajectory)
    }

    pub fn sync_csv(&self) -> Option<String> {
        self.distances
            .as_ref()
            .map(|d| sync_csv(&self.trajectory.times, d))
    }
}

/// Integrates `scenario` and derives the reported quantities.
pub fn run_scenario(scenario: &Scenario, cap: usize, step_override: Option<f64>) -> Result<SimulationOutput> {
    let options = IntegratorOptions {
        method: scenario.method,
        step: step_override.or(scenario.step),
        validate_states: scenario.check_states,
        cap,
    };
    let mut trajectory = integrate(
        &scenario.initial_state,
        &scenario.schedule,
        &scenario.hamiltonian,
        scenario.t_end,
        scenario.output_stride,
        &options,
    )?;
    trajectory.meta.scenario_hash = Some(scenario.hash.clone());

    let mut warnings = Vec::new();
    let target = quantum_average(&scenario.initial_state)?;
    let residuals = trajectory.residuals(&target)?;
    let residual_fit = if scenario.hamiltonian.is_zero() {
        match estimate_rate(&trajectory, &target) {
            Ok(fit) => Some(fit),
            Err(e) => {
                warnings.push(format!("residual fit: {e}"));
                None
            }
        }
    } else {
        None
    };

    let union = scenario.schedule.union_graph(0.0, scenario.t_end)?;
    let lambda2 = if union.num_edges() > 0 && union.is_connected() {
        Some(QuantumLaplacian::build_capped(&union, cap)?.lambda2()?)
    } else {
        warnings.push("union interaction graph is not connected".into());
        None
    };

    let (distances, sync) = if scenario.sync {
        match SyncOrbit::new(&target, &scenario.hamiltonian) {
            Ok(orbit) => {
                let d: Vec<Vec<f64>> = trajectory
                    .times
                    .iter()
                    .zip(&trajectory.states)
                    .map(|(t, s)| sync_distances(s, &orbit, *t))
                    .collect();
                let curves: Vec<Vec<f64>> = (0..scenario.n())
                    .map(|k| d.iter().map(|row| row[k]).collect())
                    .collect();
                let groups: Vec<Vec<usize>> = coinciding_curves(&curves, COINCIDENCE_TOL)
                    .into_iter()
                    .map(|g| g.into_iter().map(|k| k + 1).collect())
                    .collect();
                let coinciding: Vec<String> = groups
                    .iter()
                    .filter(|g| g.len() > 1)
                    .map(|g| g.iter().map(|k| format!("D_{k}")).collect::<Vec<_>>().join(" = "))
                    .collect();
                let note = if coinciding.is_empty() {
                    "no two distance curves coincide".to_string()
                } else {
                    format!("coinciding distance curves: {}", coinciding.join("; "))
                };
                let worst: Vec<f64> = d.iter().map(|row| row.iter().copied().fold(0.0, f64::max)).collect();
                let fit = fit_decay_rate(&trajectory.times, &worst).ok();
                let summary = SyncSummary {
                    final_max_distance: *worst.last().expect("non-empty"),
                    coinciding_groups: groups,
                    note,
                    fit,
                };
                (Some(d), Some(summary))
            }
            Err(Error::NonCommuting) => {
                warnings.push("Hamiltonian does not commute with all qubit permutations; sync outputs skipped".into());
                (None, None)
            }
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };

    let last = trajectory.states.last().expect("non-empty");
    let summary = SimulationSummary {
        n: scenario.n(),
        scenario_hash: scenario.hash.clone(),
        method: trajectory.meta.method,
        step: trajectory.meta.step,
        t_end: scenario.t_end,
        samples: trajectory.len(),
        hamiltonian: scenario.hamiltonian.kind().to_string(),
        lambda2,
        initial_residual: residuals[0],
        final_residual: *residuals.last().expect("non-empty"),
        residual_fit,
        final_max_pairwise_distance: max_pairwise_distance(last),
        sync,
        warnings,
    };
    Ok(SimulationOutput {
        trajectory,
        residuals,
        distances,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE_EDGE: &str = r#"{
        "n": 2,
        "schedule": {"n": 2, "segments": [{"t": 0.0, "edges": [[1, 2]]}], "dwell_floor": 1.0},
        "hamiltonian": {"kind": "zero"},
        "initial_state": {"ket": [[0, 0], [1, 0], [0, 0], [0, 0]]},
        "t_end": 5.0,
        "output_stride": 0.05
    }"#;

    #[test]
    fn single_edge_scenario() {
        let s = Scenario::from_json(SINGLE_EDGE).unwrap();
        assert_eq!(s.hash.len(), 64);
        let out = run_scenario(&s, 8, None).unwrap();
        let fit = out.summary.residual_fit.clone().unwrap();
        assert!((fit.rate - 2.0).abs() <= 0.04);
        assert_eq!(out.summary.lambda2, Some(2.0));
        assert!(out.distances.is_some());
        assert_eq!(out.trajectory.meta.scenario_hash.as_deref(), Some(s.hash.as_str()));
        // a second run is byte-identical
        let again = run_scenario(&s, 8, None).unwrap();
        assert_eq!(out.trajectory_csv(), again.trajectory_csv());
    }

    #[test]
    fn rejects_malformed_scenarios() {
        assert!(matches!(Scenario::from_json("{"), Err(Error::Json(_))));
        let unnormalized = SINGLE_EDGE.replace("[1, 0], [0, 0], [0, 0]]", "[1, 0], [1, 0], [0, 0]]");
        assert!(matches!(Scenario::from_json(&unnormalized), Err(Error::InvalidState(_))));
        let mismatched = SINGLE_EDGE.replace("\"n\": 2,\n", "\"n\": 3,\n");
        assert!(Scenario::from_json(&mismatched).is_err());
        let extra = SINGLE_EDGE.replace("\"t_end\"", "\"bogus\": 1, \"t_end\"");
        assert!(Scenario::from_json(&extra).is_err());
    }

    #[test]
    fn non_commuting_hamiltonian_skips_sync() {
        let text = SINGLE_EDGE.replace(
            r#"{"kind": "zero"}"#,
            r#"{"kind": "dense", "dense_matrix": [[[0,0],[0,0],[0,0],[0,0]],[[0,0],[1,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]]]}"#,
        ).replace("\"t_end\": 5.0", "\"t_end\": 0.5");
        let out = run_scenario(&Scenario::from_json(&text).unwrap(), 8, None).unwrap();
        assert!(out.distances.is_none());
        assert!(out.summary.warnings.iter().any(|w| w.contains("sync outputs skipped")), "{:?}", out.summary);
    }
}
