//! Density states, the quantum average and time integration of
//!
//! ```text
//! dρ/dt = -i[H, ρ] + Σ_{{j,k} ∈ E_σ(t)} α_jk (U_jk ρ U_jk - ρ)      (ħ = 1)
//! ```
//!
//! Two integrators share one entry point. With `H = 0` each segment is solved
//! exactly: `vec(ρ)(t) = exp(-L t) vec(ρ)(0)` evaluated block by block from
//! the eigendecomposition of every component of the quantum Laplacian. For
//! any other Hamiltonian a fixed-step classical Runge-Kutta scheme runs on the
//! dense matrix, with step boundaries aligned to output times and switches.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::basis::{swap_ket_bits, KetBits};
use crate::graph::{InteractionGraph, SwitchingSchedule};
use crate::induced::{components, ComponentPartition};
use crate::laplacian::{BlockSpectrum, QuantumLaplacian};
use crate::operators::{build_hamiltonian, hermiticity_defect, HamiltonianSpec};
use crate::{par, Error, Result, C64, DEFAULT_DENSE_CAP};

/// Construction tolerances for [`DensityState::new`].
pub const STATE_HERMITIAN_TOL: f64 = 1e-9;
pub const STATE_TRACE_TOL: f64 = 1e-9;
pub const STATE_PSD_TOL: f64 = 1e-8;

/// Tolerances applied to states along a trajectory when validation is on.
pub const FLOW_HERMITIAN_TOL: f64 = 1e-8;
pub const FLOW_TRACE_TOL: f64 = 1e-8;
pub const FLOW_PSD_TOL: f64 = 1e-6;

/// Upper limit on Runge-Kutta steps per trajectory.
pub const MAX_RK4_STEPS: f64 = 1e8;

/// Residuals at or below this are treated as converged when fitting rates.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

/// Dense `2^n × 2^n` density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    n: usize,
    matrix: DMatrix<C64>,
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidState(format!("dimension {dim} is not 2^n with n ≥ 1")));
    }
    let n = dim.trailing_zeros() as usize;
    if n > DEFAULT_DENSE_CAP {
        return Err(Error::QubitCap {
            n,
            cap: DEFAULT_DENSE_CAP,
        });
    }
    Ok(n)
}

impl DensityState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let state = Self::from_matrix_unchecked(matrix)?;
        let herm = state.hermiticity_defect();
        if herm > STATE_HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("Hermiticity defect {herm:e}")));
        }
        let tr = state.trace_defect();
        if tr > STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!("trace defect {tr:e}")));
        }
        let min = state.min_eigenvalue();
        if min < -STATE_PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(state)
    }

    /// Wraps a square `2^n` matrix without checking the state invariants.
    pub fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let n = qubits_for_dim(matrix.nrows())?;
        Ok(Self { n, matrix })
    }

    /// `|ψ⟩⟨ψ|` from amplitudes in ket-index order; `‖ψ‖ = 1` to 1e-9.
    pub fn from_ket(amplitudes: &[C64]) -> Result<Self> {
        qubits_for_dim(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("ket norm {norm} is not 1")));
        }
        let dim = amplitudes.len();
        let m = DMatrix::from_fn(dim, dim, |r, c| amplitudes[r] * amplitudes[c].conj());
        Self::new(m)
    }

    pub fn basis_projector(ket: KetBits) -> Result<Self> {
        let dim = 1usize << ket.n();
        let mut m = DMatrix::zeros(dim, dim);
        m[(ket.index(), ket.index())] = C64::new(1.0, 0.0);
        Self::new(m)
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let dim = 1usize << n;
        Self::new(DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// `vec(ρ)`: nalgebra storage is column-major, exactly the vectorization order.
    pub fn vec(&self) -> &[C64] {
        self.matrix.as_slice()
    }

    pub fn trace_defect(&self) -> f64 {
        (self.matrix.trace() - C64::new(1.0, 0.0)).norm()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Frobenius distance `‖ρ − target‖_F`, the Euclidean norm of the vec difference.
pub fn residual(rho: &DensityState, target: &DensityState) -> Result<f64> {
    if rho.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            got: rho.dim(),
        });
    }
    Ok((&rho.matrix - &target.matrix).norm())
}

/// The quantum average `𝒫*(ρ) = (1/n!) Σ_π U_π ρ U_π†`, evaluated as the mean
/// of `vec(ρ)` over each orbit of the qubit permutation group.
#[derive(Clone, Debug)]
pub struct QuantumAverage {
    orbits: ComponentPartition,
}

impl QuantumAverage {
    pub fn new(n: usize) -> Result<Self> {
        if n > DEFAULT_DENSE_CAP {
            return Err(Error::QubitCap {
                n,
                cap: DEFAULT_DENSE_CAP,
            });
        }
        // components of K_n are exactly the permutation orbits
        Ok(Self {
            orbits: components(&InteractionGraph::complete(n)?)?,
        })
    }

    pub fn apply_matrix(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let src = m.as_slice();
        let mut out = vec![C64::new(0.0, 0.0); src.len()];
        for orbit in self.orbits.components() {
            let mean = orbit.iter().map(|&i| src[i as usize]).sum::<C64>() / orbit.len() as f64;
            for &i in orbit {
                out[i as usize] = mean;
            }
        }
        DMatrix::from_vec(m.nrows(), m.ncols(), out)
    }

    pub fn apply(&self, rho: &DensityState) -> Result<DensityState> {
        if rho.n() != self.orbits.n() {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.orbits.n(),
                got: rho.dim(),
            });
        }
        Ok(DensityState {
            n: rho.n,
            matrix: self.apply_matrix(&rho.matrix),
        })
    }
}

pub fn quantum_average(rho: &DensityState) -> Result<DensityState> {
    QuantumAverage::new(rho.n())?.apply(rho)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// exact evolution when `H = 0`, Runge-Kutta otherwise
    #[default]
    Auto,
    Exact,
    Rk4,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorOptions {
    pub method: Method,
    /// overrides the Runge-Kutta step heuristic
    pub step: Option<f64>,
    /// check trace, Hermiticity and positivity at every output time
    pub validate_states: bool,
    pub cap: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            step: None,
            validate_states: false,
            cap: DEFAULT_DENSE_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    /// `exact` or `rk4`
    pub method: Method,
    /// nominal Runge-Kutta step; `None` for exact evolution
    pub step: Option<f64>,
    pub scenario_hash: Option<String>,
}

/// Sampled solution of the master equation.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityState>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &DensityState)> {
        self.times.last().copied().zip(self.states.last())
    }

    pub fn residuals(&self, target: &DensityState) -> Result<Vec<f64>> {
        self.states.iter().map(|s| residual(s, target)).collect()
    }
}

/// Output grid `0, s, 2s, …` up to `t_end`, with `t_end` appended when it is
/// not a multiple of the stride.
pub fn output_times(t_end: f64, stride: f64) -> Vec<f64> {
    let count = (t_end / stride + 1e-9).floor() as usize;
    let mut times: Vec<f64> = (0..=count).map(|k| k as f64 * stride).collect();
    let last = *times.last().expect("non-empty");
    if t_end - last > 1e-9 * t_end.max(1.0) {
        times.push(t_end);
    } else {
        *times.last_mut().expect("non-empty") = t_end.max(last).min(t_end);
    }
    times
}

/// Sorted breakpoints `(t, is_output)`: output times plus switching instants.
fn breakpoints(outputs: &[f64], schedule: &SwitchingSchedule, t_end: f64) -> Vec<(f64, bool)> {
    let mut points: Vec<(f64, bool)> = outputs.iter().map(|&t| (t, true)).collect();
    for s in schedule.segments() {
        if s.start > 0.0 && s.start < t_end {
            points.push((s.start, false));
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, bool)> = Vec::with_capacity(points.len());
    for (t, out) in points {
        match merged.last_mut() {
            Some(last) if (t - last.0).abs() <= 1e-12 * t.abs().max(1.0) => last.1 |= out,
            _ => merged.push((t, out)),
        }
    }
    merged
}

fn check_flow_state(state: &DensityState, t: f64) -> Result<()> {
    let herm = state.hermiticity_defect();
    let tr = state.trace_defect();
    let min = state.min_eigenvalue();
    if herm > FLOW_HERMITIAN_TOL || tr > FLOW_TRACE_TOL || min < -FLOW_PSD_TOL {
        return Err(Error::InvalidState(format!(
            "at t = {t}: Hermiticity defect {herm:e}, trace defect {tr:e}, min eigenvalue {min:e}"
        )));
    }
    Ok(())
}

fn check_finite(m: &DMatrix<C64>, t: f64) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t })
    }
}

/// Runge-Kutta step heuristic `min(stride, 0.01 / (‖H‖_max·2^n + Σα·n))`.
pub fn default_step(h: &DMatrix<C64>, n: usize, schedule: &SwitchingSchedule, stride: f64) -> f64 {
    let hmax = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = hmax * (1u64 << n) as f64 + schedule.max_total_weight() * n as f64;
    if scale > 0.0 {
        stride.min(0.01 / scale)
    } else {
        stride
    }
}

/// Solves the master equation from `rho0` over `[0, t_end]`.
pub fn integrate(
    rho0: &DensityState,
    schedule: &SwitchingSchedule,
    hamiltonian: &HamiltonianSpec,
    t_end: f64,
    output_stride: f64,
    options: &IntegratorOptions,
) -> Result<Trajectory> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("t_end = {t_end} must be positive")));
    }
    if !(output_stride.is_finite() && output_stride > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "output stride {output_stride} must be positive"
        )));
    }
    let n = rho0.n();
    if schedule.n() != n {
        return Err(Error::DimensionMismatch {
            expected: schedule.n(),
            got: n,
        });
    }
    if n > options.cap {
        return Err(Error::QubitCap { n, cap: options.cap });
    }
    if schedule.segments()[0].start > 0.0 {
        return Err(Error::InvalidSchedule(format!(
            "schedule starts at {} and does not cover t = 0",
            schedule.segments()[0].start
        )));
    }
    let outputs = output_times(t_end, output_stride);
    let points = breakpoints(&outputs, schedule, t_end);
    let exact = match options.method {
        Method::Auto => hamiltonian.is_zero(),
        Method::Exact if !hamiltonian.is_zero() => {
            return Err(Error::InvalidArgument(
                "exact evolution requires a zero Hamiltonian".into(),
            ))
        }
        Method::Exact => true,
        Method::Rk4 => false,
    };
    let (states, meta) = if exact {
        (
            evolve_exact(rho0, schedule, &points, options)?,
            TrajectoryMeta {
                method: Method::Exact,
                step: None,
                scenario_hash: None,
            },
        )
    } else {
        let h = build_hamiltonian(hamiltonian, n)?;
        let step = match options.step {
            Some(s) if s.is_finite() && s > 0.0 => s,
            Some(s) => return Err(Error::InvalidArgument(format!("step {s} must be positive"))),
            None => default_step(&h, n, schedule, output_stride),
        };
        if t_end / step > MAX_RK4_STEPS {
            return Err(Error::InvalidArgument(format!(
                "step {step:e} needs more than {MAX_RK4_STEPS:e} Runge-Kutta steps"
            )));
        }
        (
            evolve_rk4(rho0, schedule, &h, &points, step, options)?,
            TrajectoryMeta {
                method: Method::Rk4,
                step: Some(step),
                scenario_hash: None,
            },
        )
    };
    Ok(Trajectory {
        times: outputs,
        states,
        meta,
    })
}

/// Exact propagator of one segment, `vec(ρ)(s0 + τ) = Σ_blocks V e^{-Λτ} Vᵀ x(s0)`.
struct SegmentPropagator {
    spectra: Vec<BlockSpectrum>,
    members: Vec<Vec<u32>>,
    /// `Vᵀ x(s0)` per block
    coeffs: Vec<Vec<C64>>,
}

impl SegmentPropagator {
    fn new(graph: &InteractionGraph, start: &[C64], cap: usize) -> Result<Self> {
        let lap = QuantumLaplacian::build_capped(graph, cap)?;
        let spectra = lap.block_spectra();
        let members: Vec<Vec<u32>> = lap.partition().components().to_vec();
        let coeffs = par::map_range(0..spectra.len(), |b| {
            let v = &spectra[b].vectors;
            let x: Vec<C64> = members[b].iter().map(|&i| start[i as usize]).collect();
            (0..v.ncols())
                .map(|k| (0..v.nrows()).map(|i| x[i] * v[(i, k)]).sum())
                .collect()
        });
        Ok(Self {
            spectra,
            members,
            coeffs,
        })
    }

    fn evaluate(&self, tau: f64, dim: usize) -> Vec<C64> {
        let blocks = par::map_range(0..self.spectra.len(), |b| {
            let spec = &self.spectra[b];
            let scaled: Vec<C64> = self.coeffs[b]
                .iter()
                .zip(&spec.values)
                .map(|(y, &lam)| y * (-lam.max(0.0) * tau).exp())
                .collect();
            let v = &spec.vectors;
            (0..v.nrows())
                .map(|i| (0..v.ncols()).map(|k| scaled[k] * v[(i, k)]).sum::<C64>())
                .collect::<Vec<C64>>()
        });
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (members, values) in self.members.iter().zip(blocks) {
            for (&i, x) in members.iter().zip(values) {
                out[i as usize] = x;
            }
        }
        out
    }
}

fn evolve_exact(
    rho0: &DensityState,
    schedule: &SwitchingSchedule,
    points: &[(f64, bool)],
    options: &IntegratorOptions,
) -> Result<Vec<DensityState>> {
    let dim = rho0.vec().len();
    let side = rho0.dim();
    let to_state = |x: Vec<C64>, t: f64| -> Result<DensityState> {
        let m = DMatrix::from_vec(side, side, x);
        check_finite(&m, t)?;
        let state = DensityState {
            n: rho0.n(),
            matrix: m,
        };
        if options.validate_states {
            check_flow_state(&state, t)?;
        }
        Ok(state)
    };

    let mut states = vec![to_state(rho0.vec().to_vec(), 0.0)?];
    let mut seg_index = schedule.segment_index_at(0.0).expect("covers t = 0");
    let mut seg_start = 0.0;
    let mut prop = SegmentPropagator::new(&schedule.segments()[seg_index].graph, rho0.vec(), options.cap)?;
    for &(t, is_output) in &points[1..] {
        let next = schedule.segment_index_at(t).expect("covers t");
        if next != seg_index {
            // restart from the state at the switching instant
            let x = prop.evaluate(t - seg_start, dim);
            prop = SegmentPropagator::new(&schedule.segments()[next].graph, &x, options.cap)?;
            seg_index = next;
            seg_start = t;
        }
        if is_output {
            states.push(to_state(prop.evaluate(t - seg_start, dim), t)?);
        }
    }
    Ok(states)
}

/// Right-hand side of the master equation on dense matrices.
struct Generator<'a> {
    h: Option<&'a DMatrix<C64>>,
    /// ket-index permutation table and weight per active edge
    swaps: Vec<(Vec<usize>, f64)>,
}

impl<'a> Generator<'a> {
    fn new(h: &'a DMatrix<C64>, graph: &InteractionGraph) -> Self {
        let n = graph.n();
        let dim = 1usize << n;
        let swaps = graph
            .weighted_edges()
            .map(|(e, w)| {
                let table = (0..dim).map(|x| swap_ket_bits(x, n, e.lo, e.hi)).collect();
                (table, w)
            })
            .collect();
        let h = (!h.iter().all(|z| *z == C64::new(0.0, 0.0))).then_some(h);
        Self { h, swaps }
    }

    fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let dim = rho.nrows();
        let mut out = match self.h {
            Some(h) => (h * rho - rho * h) * C64::new(0.0, -1.0),
            None => DMatrix::zeros(dim, dim),
        };
        for (s, alpha) in &self.swaps {
            for c in 0..dim {
                for r in 0..dim {
                    out[(r, c)] += (rho[(s[r], s[c])] - rho[(r, c)]) * *alpha;
                }
            }
        }
        out
    }

    fn rk4_step(&self, rho: &DMatrix<C64>, h: f64) -> DMatrix<C64> {
        let half = C64::new(h / 2.0, 0.0);
        let full = C64::new(h, 0.0);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1 * half));
        let k3 = self.apply(&(rho + &k2 * half));
        let k4 = self.apply(&(rho + &k3 * full));
        rho + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0)
    }
}

fn evolve_rk4(
    rho0: &DensityState,
    schedule: &SwitchingSchedule,
    h: &DMatrix<C64>,
    points: &[(f64, bool)],
    step: f64,
    options: &IntegratorOptions,
) -> Result<Vec<DensityState>> {
    let mut rho = rho0.matrix.clone();
    let mut states = vec![rho0.clone()];
    if options.validate_states {
        check_flow_state(rho0, 0.0)?;
    }
    let mut seg_index = usize::MAX;
    let mut generator: Option<Generator> = None;
    for w in points.windows(2) {
        let ((a, _), (b, is_output)) = (w[0], w[1]);
        let idx = schedule.segment_index_at(a).expect("covers t");
        if idx != seg_index {
            generator = Some(Generator::new(h, &schedule.segments()[idx].graph));
            seg_index = idx;
        }
        let gen = generator.as_ref().expect("set above");
        let steps = ((b - a) / step - 1e-9).ceil().max(1.0) as usize;
        let dt = (b - a) / steps as f64;
        for _ in 0..steps {
            rho = gen.rk4_step(&rho, dt);
        }
        check_finite(&rho, b)?;
        if is_output {
            let state = DensityState {
                n: rho0.n,
                matrix: rho.clone(),
            };
            if options.validate_states {
                check_flow_state(&state, b)?;
            }
            states.push(state);
        }
    }
    Ok(states)
}

/// Least-squares exponential fit `value ≈ C e^{−rate·t}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub rate: f64,
    /// fitted `ln C`
    pub intercept: f64,
    pub r_squared: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
}

/// Fits `−ln value` against `t` over the latter half of the leading run of
/// samples above [`RESIDUAL_FLOOR`]; needs at least 10 such samples.
pub fn fit_decay_rate(times: &[f64], values: &[f64]) -> Result<RateFit> {
    let valid = values
        .iter()
        .position(|&v| !(v > RESIDUAL_FLOOR))
        .unwrap_or(values.len());
    if valid < 10 {
        return Err(Error::NoDecay(format!(
            "only {valid} samples above {RESIDUAL_FLOOR:e}"
        )));
    }
    let lo = valid / 2;
    let ts = &times[lo..valid];
    let ys: Vec<f64> = values[lo..valid].iter().map(|v| -v.ln()).collect();
    let m = ts.len() as f64;
    let t_mean = ts.iter().sum::<f64>() / m;
    let y_mean = ys.iter().sum::<f64>() / m;
    let sxx: f64 = ts.iter().map(|t| (t - t_mean).powi(2)).sum();
    let sxy: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - t_mean) * (y - y_mean)).sum();
    let syy: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::NoDecay("fit window has a single time".into()));
    }
    let rate = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateFit {
        rate,
        intercept: -(y_mean - rate * t_mean),
        r_squared,
        t_start: ts[0],
        t_end: *ts.last().expect("non-empty"),
        samples: ts.len(),
    })
}

/// Smallest `C` with `value(t) ≤ C e^{−rate·t}` at every sample.
pub fn envelope_constant(times: &[f64], values: &[f64], rate: f64) -> f64 {
    times
        .iter()
        .zip(values)
        .map(|(t, v)| v * (rate * t).exp())
        .fold(0.0, f64::max)
}

/// Empirical exponential convergence rate of `traj` towards `target`.
pub fn estimate_rate(traj: &Trajectory, target: &DensityState) -> Result<RateFit> {
    fit_decay_rate(&traj.times, &traj.residuals(target)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Segment;
    use crate::operators::{permutation_matrix, Permutation};
    use crate::random::{random_density, seeded_rng};
    use approx::assert_abs_diff_eq;

    fn ket(s: &str) -> KetBits {
        s.parse().unwrap()
    }

    fn projector(s: &str) -> DensityState {
        DensityState::basis_projector(ket(s)).unwrap()
    }

    fn single_edge() -> SwitchingSchedule {
        SwitchingSchedule::constant(InteractionGraph::complete(2).unwrap())
    }

    fn entry(state: &DensityState, r: &str, c: &str) -> C64 {
        state.matrix()[(ket(r).index(), ket(c).index())]
    }

    #[test]
    fn state_validation() {
        assert!(DensityState::new(DMatrix::identity(4, 4)).is_err());
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 0)] = C64::new(1.5, 0.0);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(DensityState::new(m).is_err());
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityState::new(m).is_err());
        assert!(DensityState::new(DMatrix::identity(3, 3) / C64::new(3.0, 0.0)).is_err());
        assert!(DensityState::from_ket(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).is_err());
        let s = 0.5f64.sqrt();
        assert!(DensityState::from_ket(&[C64::new(s, 0.0), C64::new(0.0, s)]).is_ok());
    }

    #[test]
    fn residual_examples() {
        let rho = projector("01");
        assert_eq!(residual(&rho, &rho).unwrap(), 0.0);
        let avg = quantum_average(&rho).unwrap();
        assert_abs_diff_eq!(residual(&rho, &avg).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(residual(&rho, &projector("011")).is_err());
    }

    #[test]
    fn quantum_average_examples() {
        let mixed = DensityState::maximally_mixed(3).unwrap();
        assert_eq!(quantum_average(&mixed).unwrap(), mixed);

        let avg = quantum_average(&projector("01")).unwrap();
        assert_eq!(entry(&avg, "01", "01"), C64::new(0.5, 0.0));
        assert_eq!(entry(&avg, "10", "10"), C64::new(0.5, 0.0));
        assert_eq!(avg.matrix().iter().filter(|z| z.norm() != 0.0).count(), 2);
    }

    #[test]
    fn quantum_average_is_idempotent_and_invariant() {
        let mut rng = seeded_rng(3);
        let avg = QuantumAverage::new(3).unwrap();
        for _ in 0..10 {
            let rho = DensityState::new(random_density(3, &mut rng)).unwrap();
            let once = avg.apply(&rho).unwrap();
            let twice = avg.apply(&once).unwrap();
            assert!((once.matrix() - twice.matrix()).camax() <= 1e-12);
            for i in 0..2 {
                let u = permutation_matrix(&Permutation::transposition(3, i, i + 1).unwrap());
                let conj = &u * once.matrix() * u.adjoint();
                assert!((conj - once.matrix()).camax() <= 1e-12);
            }
        }
    }

    #[test]
    fn output_grid() {
        assert_eq!(output_times(1.0, 0.25), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(output_times(1.0, 0.3), vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
        assert_eq!(output_times(0.1, 1.0), vec![0.0, 0.1]);
        let grid = output_times(10.0, 0.1);
        assert_eq!(grid.len(), 101);
        assert_eq!(*grid.last().unwrap(), 10.0);
    }

    #[test]
    fn symmetric_state_is_an_equilibrium() {
        let mut rng = seeded_rng(4);
        let rho = DensityState::new(random_density(3, &mut rng)).unwrap();
        let sym = quantum_average(&rho).unwrap();
        let sched = SwitchingSchedule::constant(InteractionGraph::path(3).unwrap());
        for method in [Method::Exact, Method::Rk4] {
            let opts = IntegratorOptions {
                method,
                ..Default::default()
            };
            let traj = integrate(&sym, &sched, &HamiltonianSpec::Zero, 2.0, 0.5, &opts).unwrap();
            for s in &traj.states {
                assert!(residual(s, &sym).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn single_edge_closed_form() {
        let rho0 = projector("01");
        for (method, tol) in [(Method::Exact, 1e-12), (Method::Rk4, 1e-7)] {
            let opts = IntegratorOptions {
                method,
                ..Default::default()
            };
            let traj = integrate(&rho0, &single_edge(), &HamiltonianSpec::Zero, 3.0, 0.1, &opts).unwrap();
            assert_eq!(traj.meta.method, method);
            for (t, s) in traj.times.iter().zip(&traj.states) {
                let decay = (-2.0 * t).exp();
                assert!((entry(s, "01", "01").re - 0.5 * (1.0 + decay)).abs() <= tol);
                assert!((entry(s, "10", "10").re - 0.5 * (1.0 - decay)).abs() <= tol);
            }
            let fit = estimate_rate(&traj, &quantum_average(&rho0).unwrap()).unwrap();
            assert!((fit.rate - 2.0).abs() <= 0.04, "{fit:?}");
        }
    }

    #[test]
    fn integrator_errors() {
        let rho0 = projector("01");
        let opts = IntegratorOptions::default();
        let z = HamiltonianSpec::Zero;
        assert!(integrate(&rho0, &single_edge(), &z, 0.0, 0.1, &opts).is_err());
        assert!(integrate(&rho0, &single_edge(), &z, 1.0, 0.0, &opts).is_err());
        let late = SwitchingSchedule::new(
            vec![Segment {
                start: 1.0,
                graph: InteractionGraph::complete(2).unwrap(),
            }],
            0.5,
        )
        .unwrap();
        assert!(matches!(
            integrate(&rho0, &late, &z, 2.0, 0.1, &opts),
            Err(Error::InvalidSchedule(_))
        ));
        let wrong_n = SwitchingSchedule::constant(InteractionGraph::complete(3).unwrap());
        assert!(integrate(&rho0, &wrong_n, &z, 1.0, 0.1, &opts).is_err());
        let exact_with_h = IntegratorOptions {
            method: Method::Exact,
            ..Default::default()
        };
        let h = HamiltonianSpec::KronSum(HamiltonianSpec::pauli_z());
        assert!(integrate(&rho0, &single_edge(), &h, 1.0, 0.1, &exact_with_h).is_err());
        let bad_step = IntegratorOptions {
            method: Method::Rk4,
            step: Some(-1.0),
            ..Default::default()
        };
        assert!(integrate(&rho0, &single_edge(), &z, 1.0, 0.1, &bad_step).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let rho0 = projector("01");
        let opts = IntegratorOptions {
            method: Method::Rk4,
            step: Some(10.0),
            ..Default::default()
        };
        let g = InteractionGraph::new(2, [(0, 1, 1e200)]).unwrap();
        let res = integrate(&rho0, &SwitchingSchedule::constant(g), &HamiltonianSpec::Zero, 1000.0, 10.0, &opts);
        assert!(matches!(res, Err(Error::NonFinite { .. })), "{res:?}");
    }

    #[test]
    fn exact_and_rk4_agree_on_switching_schedule() {
        let mut rng = seeded_rng(5);
        let rho0 = DensityState::new(random_density(3, &mut rng)).unwrap();
        let seg = |start: f64, pairs: &[(usize, usize)]| Segment {
            start,
            graph: InteractionGraph::unweighted(3, pairs).unwrap(),
        };
        let sched = SwitchingSchedule::periodic(vec![seg(0.0, &[(0, 1)]), seg(0.7, &[(1, 2)])], 1.4, 4, 0.5).unwrap();
        let run = |method| {
            let opts = IntegratorOptions {
                method,
                validate_states: true,
                ..Default::default()
            };
            integrate(&rho0, &sched, &HamiltonianSpec::Zero, 5.0, 0.25, &opts).unwrap()
        };
        let (a, b) = (run(Method::Exact), run(Method::Rk4));
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!(residual(x, y).unwrap() <= 1e-7);
        }
        // the average is conserved along the flow
        let target = quantum_average(&rho0).unwrap();
        for s in &a.states {
            assert!(residual(&quantum_average(s).unwrap(), &target).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn rate_fit_needs_decay() {
        let times: Vec<f64> = (0..20).map(f64::from).collect();
        assert!(fit_decay_rate(&times, &[0.0; 20]).is_err());
        let values: Vec<f64> = times.iter().map(|t| 3.0 * (-0.5 * t).exp()).collect();
        let fit = fit_decay_rate(&times, &values).unwrap();
        assert_abs_diff_eq!(fit.rate, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 3.0f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(envelope_constant(&times, &values, 0.5), 3.0, epsilon = 1e-12);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }
}
