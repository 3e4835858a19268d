//! Maximizing the convergence rate `λ₂(L(α))` over edge weights under a
//! total budget `Σ α ≤ W₀`.
//!
//! `λ₂` is concave in `α`, so projected supergradient ascent converges. The
//! supergradient with respect to `α_e` is `vᵀ(I − P_e)v` for a unit
//! `λ₂`-eigenvector `v`, where `P_e` is the node permutation of the swap on
//! edge `e`; when `λ₂` is repeated the value is averaged over an orthonormal
//! basis of its eigenspace. Since `λ₂` never decreases when a weight grows,
//! iterates are projected onto the face `Σ α = W₀`.
//!
//! Step sizes follow `s_t = 0.1·W₀ / (|E|·√t)`; the best iterate is returned.

use serde::Serialize;

use crate::basis::swap_node_bits;
use crate::graph::InteractionGraph;
use crate::laplacian::{BlockSpectrum, QuantumLaplacian};
use crate::{par, Error, Result};

/// Eigenvalues closer than this to `λ₂` count as part of its eigenspace.
pub const EIGENGAP_TOL: f64 = 1e-8;

/// Feasibility slack on the budget.
pub const BUDGET_TOL: f64 = 1e-9;

/// Nonnegative edge weights with `Σ α ≤ W₀`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightVector {
    values: Vec<f64>,
    budget: f64,
}

impl WeightVector {
    pub fn new(values: Vec<f64>, budget: f64) -> Result<Self> {
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::InvalidArgument(format!("budget {budget} must be positive")));
        }
        if let Some(w) = values.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidArgument(format!("weight {w} must be nonnegative")));
        }
        let total: f64 = values.iter().sum();
        if total > budget + BUDGET_TOL {
            return Err(Error::InvalidArgument(format!("weights sum to {total} > budget {budget}")));
        }
        Ok(Self { values, budget })
    }

    /// `W₀/|E|` on every edge.
    pub fn uniform(edges: usize, budget: f64) -> Result<Self> {
        if edges == 0 {
            return Err(Error::NoEdges);
        }
        Self::new(vec![budget / edges as f64; edges], budget)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Euclidean projection onto `{α ≥ 0, Σ α = budget}`.
pub fn project_to_budget_simplex(v: &[f64], budget: f64) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - budget) / (i + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// `λ₂` together with its eigenspace and the resulting supergradient.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lambda2Analysis {
    pub lambda2: f64,
    /// dimension of the `λ₂` eigenspace, summed over component blocks
    pub multiplicity: usize,
    /// distance from `λ₂` to the next larger nontrivial eigenvalue, if any
    pub eigengap: Option<f64>,
    /// one entry per edge, in the graph's edge order
    pub supergradient: Vec<f64>,
}

fn non_singleton_spectra(lap: &QuantumLaplacian) -> Vec<BlockSpectrum> {
    let ids: Vec<usize> = (0..lap.partition().len())
        .filter(|&id| lap.partition().component(id).len() > 1)
        .collect();
    par::map(&ids, |&id| lap.block_spectrum(id))
}

/// `vᵀ(I − P_e)v = Σ_i v_i (v_i − v_{P_e(i)})` within one block.
fn edge_quadratic_form(lap: &QuantumLaplacian, spectrum: &BlockSpectrum, col: usize, lo: usize, hi: usize) -> f64 {
    let members = lap.partition().component(spectrum.component);
    let v = spectrum.vectors.column(col);
    members
        .iter()
        .enumerate()
        .map(|(i, &node)| {
            let image = swap_node_bits(node as usize, lap.n(), lo, hi);
            v[i] * (v[i] - v[lap.partition().local_index(image)])
        })
        .sum()
}

pub fn analyze_lambda2(g: &InteractionGraph, weights: &WeightVector) -> Result<Lambda2Analysis> {
    let lap = QuantumLaplacian::with_weights(g, weights.values())?;
    let spectra = non_singleton_spectra(&lap);
    if spectra.is_empty() {
        return Err(Error::NoEdges);
    }
    let lambda2 = spectra
        .iter()
        .map(|s| s.values[1])
        .fold(f64::INFINITY, f64::min);
    let tol = EIGENGAP_TOL * lambda2.abs().max(1.0);
    let mut active: Vec<(&BlockSpectrum, usize)> = Vec::new();
    let mut next = f64::INFINITY;
    for s in &spectra {
        for (col, &value) in s.values.iter().enumerate().skip(1) {
            if value <= lambda2 + tol {
                active.push((s, col));
            } else {
                next = next.min(value);
                break;
            }
        }
    }
    let supergradient = g
        .edges()
        .iter()
        .map(|e| {
            active
                .iter()
                .map(|&(s, col)| edge_quadratic_form(&lap, s, col, e.lo, e.hi))
                .sum::<f64>()
                / active.len() as f64
        })
        .collect();
    Ok(Lambda2Analysis {
        lambda2,
        multiplicity: active.len(),
        eigengap: next.is_finite().then_some(next - lambda2),
        supergradient,
    })
}

/// Supergradient of `λ₂` with respect to the edge weights.
pub fn lambda2_supergradient(g: &InteractionGraph, weights: &WeightVector) -> Result<Vec<f64>> {
    Ok(analyze_lambda2(g, weights)?.supergradient)
}

/// `λ₂(L(α))` for an explicit weight vector.
pub fn lambda2_at(g: &InteractionGraph, weights: &[f64]) -> Result<f64> {
    QuantumLaplacian::with_weights(g, weights)?.lambda2()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerReport {
    pub n: usize,
    /// 1-based qubit pairs, aligned with the weight vectors
    pub edges: Vec<[usize; 2]>,
    pub budget: f64,
    pub iterations: usize,
    pub initial_weights: Vec<f64>,
    pub initial_lambda2: f64,
    pub final_weights: Vec<f64>,
    pub final_lambda2: f64,
    /// iterate index (0 = uniform start) that achieved the best `λ₂`
    pub best_iteration: usize,
    /// `λ₂` of every iterate, starting with the uniform point
    pub lambda2_history: Vec<f64>,
    pub final_multiplicity: usize,
    pub final_eigengap: Option<f64>,
}

/// Projected supergradient ascent from uniform weights.
pub fn optimize_weights(g: &InteractionGraph, budget: f64, iterations: usize) -> Result<OptimizerReport> {
    if g.num_edges() == 0 {
        return Err(Error::NoEdges);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let edges = g.num_edges();
    let start = WeightVector::uniform(edges, budget)?;
    let first = analyze_lambda2(g, &start)?;

    let mut current = start.clone();
    let mut analysis = first.clone();
    let mut best = (0usize, start.clone(), first.clone());
    let mut history = vec![first.lambda2];
    for t in 1..=iterations {
        let step = 0.1 * budget / (edges as f64 * (t as f64).sqrt());
        let moved: Vec<f64> = current
            .values()
            .iter()
            .zip(&analysis.supergradient)
            .map(|(a, g)| a + step * g)
            .collect();
        current = WeightVector::new(project_to_budget_simplex(&moved, budget), budget)?;
        analysis = analyze_lambda2(g, &current)?;
        history.push(analysis.lambda2);
        if analysis.lambda2 > best.2.lambda2 {
            best = (t, current.clone(), analysis.clone());
        }
    }
    let (best_iteration, weights, at_best) = best;
    Ok(OptimizerReport {
        n: g.n(),
        edges: g.edges().iter().map(|e| [e.lo + 1, e.hi + 1]).collect(),
        budget,
        iterations,
        initial_weights: start.values().to_vec(),
        initial_lambda2: first.lambda2,
        final_weights: weights.values().to_vec(),
        final_lambda2: at_best.lambda2,
        best_iteration,
        lambda2_history: history,
        final_multiplicity: at_best.multiplicity,
        final_eigengap: at_best.eigengap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_weights, seeded_rng};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn single_edge_gradient_and_optimum() {
        let g = InteractionGraph::complete(2).unwrap();
        let w = WeightVector::uniform(1, 1.0).unwrap();
        let grad = lambda2_supergradient(&g, &w).unwrap();
        assert_abs_diff_eq!(grad[0], 2.0, epsilon = 1e-12);
        let report = optimize_weights(&g, 1.0, 10).unwrap();
        assert_abs_diff_eq!(report.final_weights[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.final_lambda2, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_gradient_on_complete_graph() {
        let g = InteractionGraph::complete(3).unwrap();
        let grad = lambda2_supergradient(&g, &WeightVector::uniform(3, 3.0).unwrap()).unwrap();
        assert_abs_diff_eq!(grad[0], grad[1], epsilon = 1e-10);
        assert_abs_diff_eq!(grad[1], grad[2], epsilon = 1e-10);
    }

    #[test]
    fn zero_iterations_return_uniform() {
        let g = InteractionGraph::path(3).unwrap();
        let report = optimize_weights(&g, 2.0, 0).unwrap();
        assert_eq!(report.final_weights, vec![1.0, 1.0]);
        assert_eq!(report.lambda2_history.len(), 1);
        assert_eq!(report.best_iteration, 0);
    }

    #[test]
    fn disconnected_graph_is_infeasible() {
        let g = InteractionGraph::unweighted(3, &[(0, 1)]).unwrap();
        assert!(matches!(optimize_weights(&g, 1.0, 5), Err(Error::Disconnected)));
        assert!(matches!(optimize_weights(&InteractionGraph::empty(2).unwrap(), 1.0, 5), Err(Error::NoEdges)));
    }

    #[test]
    fn finite_differences_match() {
        let g = InteractionGraph::path(3).unwrap();
        let mut rng = seeded_rng(9);
        let w = random_weights(2, 0.5, 1.5, &mut rng);
        let analysis = analyze_lambda2(&g, &WeightVector::new(w.clone(), 10.0).unwrap()).unwrap();
        let eps = 1e-6;
        for e in 0..2 {
            let mut bumped = w.clone();
            bumped[e] += eps;
            let fd = (lambda2_at(&g, &bumped).unwrap() - analysis.lambda2) / eps;
            assert!((fd - analysis.supergradient[e]).abs() <= 1e-4, "edge {e}: {fd} vs {}", analysis.supergradient[e]);
        }
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5, 0.6], 1.0).is_err());
        assert!(WeightVector::new(vec![-0.1], 1.0).is_err());
        assert!(WeightVector::new(vec![0.1], 0.0).is_err());
        assert!(WeightVector::new(vec![0.4, 0.6], 1.0).is_ok());
    }

    proptest! {
        #[test]
        fn projection_is_feasible(v in proptest::collection::vec(-5.0f64..5.0, 1..8), budget in 0.1f64..10.0) {
            let p = project_to_budget_simplex(&v, budget);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - budget).abs() <= 1e-9 * budget.max(1.0));
        }

        #[test]
        fn projection_fixes_feasible_points(v in proptest::collection::vec(0.0f64..1.0, 1..8)) {
            let budget: f64 = v.iter().sum();
            prop_assume!(budget > 0.1);
            let p = project_to_budget_simplex(&v, budget);
            for (a, b) in p.iter().zip(&v) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
