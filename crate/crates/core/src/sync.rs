//! Single-qubit views of a network state and the synchronization orbit.
//!
//! For a Hamiltonian commuting with every qubit permutation, the state
//! `ρ̃(t) = e^{iHt} ρ(t) e^{−iHt}` obeys the pure consensus dynamics, so every
//! reduced state `ρᵏ(t)` approaches the common trajectory
//! `Tr_{others}(e^{−iHt} ρ* e^{iHt})` with `ρ* = 𝒫*(ρ₀)`.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use serde::Serialize;

use crate::dynamics::{DensityState, STATE_HERMITIAN_TOL, STATE_PSD_TOL, STATE_TRACE_TOL};
use crate::operators::{build_hamiltonian, commutes_with_all_permutations, HamiltonianSpec};
use crate::{Error, Result, C64};

/// Reduced 2×2 density matrix of one qubit (0-based).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedState {
    pub qubit: usize,
    pub matrix: Matrix2<C64>,
}

impl ReducedState {
    pub fn hermiticity_defect(&self) -> f64 {
        (self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace_defect(&self) -> f64 {
        (self.matrix.trace() - C64::new(1.0, 0.0)).norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(herm).eigenvalues;
        eig[0].min(eig[1])
    }

    /// Checks the density-matrix invariants with the [`DensityState`] tolerances.
    pub fn validate(&self) -> Result<()> {
        if self.hermiticity_defect() > STATE_HERMITIAN_TOL
            || self.trace_defect() > STATE_TRACE_TOL
            || self.min_eigenvalue() < -STATE_PSD_TOL
        {
            return Err(Error::InvalidState(format!("reduced state of qubit {} is not a density matrix", self.qubit + 1)));
        }
        Ok(())
    }

    pub fn bloch(&self) -> BlochVector {
        bloch_vector(&self.matrix)
    }
}

fn partial_trace_matrix(m: &DMatrix<C64>, n: usize, k: usize) -> Matrix2<C64> {
    let shift = n - 1 - k;
    let dim = 1usize << n;
    let mut out = Matrix2::zeros();
    for r in 0..dim {
        if (r >> shift) & 1 == 1 {
            continue;
        }
        let one = r | (1 << shift);
        out[(0, 0)] += m[(r, r)];
        out[(0, 1)] += m[(r, one)];
        out[(1, 0)] += m[(one, r)];
        out[(1, 1)] += m[(one, one)];
    }
    out
}

/// Traces out every qubit except `k` (0-based).
pub fn partial_trace_to_qubit(rho: &DensityState, k: usize) -> Result<ReducedState> {
    let n = rho.n();
    if k >= n {
        return Err(Error::QubitOutOfRange { qubit: k, n });
    }
    Ok(ReducedState {
        qubit: k,
        matrix: partial_trace_matrix(rho.matrix(), n, k),
    })
}

/// Reduced states of all qubits, in order.
pub fn reduced_states(rho: &DensityState) -> Vec<ReducedState> {
    (0..rho.n())
        .map(|k| ReducedState {
            qubit: k,
            matrix: partial_trace_matrix(rho.matrix(), rho.n(), k),
        })
        .collect()
}

/// `½ Σ σᵢ(ρ₁ − ρ₂)`.
pub fn trace_distance(a: &Matrix2<C64>, b: &Matrix2<C64>) -> f64 {
    0.5 * (a - b).singular_values().sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// `(2 Re ρ₀₁, 2 Im ρ₁₀, ρ₀₀ − ρ₁₁)`.
pub fn bloch_vector(m: &Matrix2<C64>) -> BlochVector {
    BlochVector {
        x: 2.0 * m[(0, 1)].re,
        y: 2.0 * m[(1, 0)].im,
        z: m[(0, 0)].re - m[(1, 1)].re,
    }
}

/// `e^{−iHt}` for Hermitian `H`, via its eigendecomposition.
pub fn unitary_propagator(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(h.clone());
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::from_polar(1.0, -e * t)));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

fn unitary_propagator2(h: &Matrix2<C64>, t: f64) -> Matrix2<C64> {
    let eig = SymmetricEigen::new(*h);
    let phases = Matrix2::from_diagonal(&eig.eigenvalues.map(|e| C64::from_polar(1.0, -e * t)));
    eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Synchronization orbit evaluator for one `(ρ*, H)` pair.
///
/// Construction checks that `H` commutes with all permutations; the orbit is
/// undefined otherwise.
#[derive(Clone, Debug)]
pub struct SyncOrbit {
    n: usize,
    rho_star: DensityState,
    kind: OrbitKind,
}

#[derive(Clone, Debug)]
enum OrbitKind {
    Static(Matrix2<C64>),
    KronSum { h0: Matrix2<C64>, reduced: Matrix2<C64> },
    General { eigvals: Vec<f64>, eigvecs: DMatrix<C64> },
}

impl SyncOrbit {
    pub fn new(rho_star: &DensityState, spec: &HamiltonianSpec) -> Result<Self> {
        let n = rho_star.n();
        let h = build_hamiltonian(spec, n)?;
        if !commutes_with_all_permutations(&h, n)? {
            return Err(Error::NonCommuting);
        }
        // every qubit shares the same reduced state when ρ* is symmetric;
        // the last qubit is used throughout
        let reduced = partial_trace_matrix(rho_star.matrix(), n, n - 1);
        let kind = match spec {
            _ if spec.is_zero() => OrbitKind::Static(reduced),
            HamiltonianSpec::KronSum(h0) => OrbitKind::KronSum { h0: *h0, reduced },
            _ => Self::general_kind(h),
        };
        Ok(Self {
            n,
            rho_star: rho_star.clone(),
            kind,
        })
    }

    /// Same orbit, forced through dense conjugation and partial trace.
    pub fn new_general(rho_star: &DensityState, spec: &HamiltonianSpec) -> Result<Self> {
        let mut orbit = Self::new(rho_star, spec)?;
        orbit.kind = Self::general_kind(build_hamiltonian(spec, orbit.n)?);
        Ok(orbit)
    }

    fn general_kind(h: DMatrix<C64>) -> OrbitKind {
        let eig = SymmetricEigen::new(h);
        OrbitKind::General {
            eigvals: eig.eigenvalues.iter().copied().collect(),
            eigvecs: eig.eigenvectors,
        }
    }

    pub fn at(&self, t: f64) -> Matrix2<C64> {
        match &self.kind {
            OrbitKind::Static(m) => *m,
            OrbitKind::KronSum { h0, reduced } => {
                let u = unitary_propagator2(h0, t);
                u * reduced * u.adjoint()
            }
            OrbitKind::General { eigvals, eigvecs } => {
                let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    eigvals.len(),
                    eigvals.iter().map(|e| C64::from_polar(1.0, -e * t)),
                ));
                let u = eigvecs * phases * eigvecs.adjoint();
                let evolved = &u * self.rho_star.matrix() * u.adjoint();
                partial_trace_matrix(&evolved, self.n, self.n - 1)
            }
        }
    }
}

/// `Tr_{others}(e^{−iHt} ρ* e^{iHt})`; closed form for Kronecker-sum Hamiltonians.
pub fn sync_orbit(rho_star: &DensityState, spec: &HamiltonianSpec, t: f64) -> Result<Matrix2<C64>> {
    Ok(SyncOrbit::new(rho_star, spec)?.at(t))
}

/// `D_k(t)` for every qubit: trace distance of each reduced state to the orbit.
pub fn sync_distances(rho: &DensityState, orbit: &SyncOrbit, t: f64) -> Vec<f64> {
    let target = orbit.at(t);
    reduced_states(rho)
        .iter()
        .map(|r| trace_distance(&r.matrix, &target))
        .collect()
}

/// `max_{k,m} ‖ρᵏ − ρᵐ‖_tr` — how far the qubits are from agreeing.
pub fn max_pairwise_distance(rho: &DensityState) -> f64 {
    let reduced = reduced_states(rho);
    let mut worst: f64 = 0.0;
    for (i, a) in reduced.iter().enumerate() {
        for b in &reduced[i + 1..] {
            worst = worst.max(trace_distance(&a.matrix, &b.matrix));
        }
    }
    worst
}

/// Groups qubits whose distance curves agree pointwise to `tol`.
///
/// `curves[k][i]` is `D_k` at the `i`-th sample; the result lists groups of
/// 0-based qubit indices in order of first appearance.
pub fn coinciding_curves(curves: &[Vec<f64>], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, curve) in curves.iter().enumerate() {
        let same = |g: &Vec<usize>| {
            curves[g[0]]
                .iter()
                .zip(curve)
                .all(|(a, b)| (a - b).abs() <= tol)
        };
        match groups.iter_mut().find(|g| same(g)) {
            Some(g) => g.push(k),
            None => groups.push(vec![k]),
        }
    }
    groups
}
