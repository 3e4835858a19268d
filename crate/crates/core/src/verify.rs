//! The structural invariant suite run by `swapnet verify`.
//!
//! Every check is evaluated exhaustively (or on a seeded batch of random
//! states) for one `n` and reports pass/fail with the first counterexamples.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::basis::{node_index, BasisNode};
use crate::dynamics::QuantumAverage;
use crate::graph::InteractionGraph;
use crate::induced::{
    all_type_counts, binomial, component_census, component_regularity, components, largest_component_bounds,
    max_degree, max_degree_bound, orbit_size, type_count_classes, verify_diagonal_strong_regularity,
    ComponentPartition,
};
use crate::laplacian::QuantumLaplacian;
use crate::operators::{build_hamiltonian, commutes_with_all_permutations, permutation_matrix, HamiltonianSpec, Permutation};
use crate::random::{random_density, random_hermitian, seeded_rng};
use crate::{Error, Result, C64, DEFAULT_DENSE_CAP};

/// Largest `n` for which the dense rank and kernel-vector checks run.
pub const DENSE_ORACLE_CAP: usize = 3;

/// Random states drawn per randomized check.
pub const RANDOM_TRIALS: usize = 10;

const MAX_COUNTEREXAMPLES: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub n: usize,
    pub check: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub counterexamples: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub n_values: Vec<usize>,
    pub all_passed: bool,
    pub failed: Vec<String>,
    pub results: Vec<CheckResult>,
}

fn check(n: usize, name: &str, passed: bool, detail: String, counterexamples: Vec<String>) -> CheckResult {
    CheckResult {
        n,
        check: name.to_string(),
        passed,
        detail,
        counterexamples,
    }
}

fn node_label(n: usize, index: usize) -> String {
    BasisNode::from_index(n, index).map_or_else(|_| index.to_string(), |v| v.to_string())
}

fn partition_independence(n: usize, complete: &ComponentPartition) -> Result<CheckResult> {
    let mut mismatched = Vec::new();
    for (name, g) in [("path", InteractionGraph::path(n)?), ("star", InteractionGraph::star(n)?)] {
        if !components(&g)?.same_partition(complete) {
            mismatched.push(name.to_string());
        }
    }
    Ok(check(
        n,
        "partition_independence",
        mismatched.is_empty(),
        "path, star and complete graphs induce the same components".into(),
        mismatched,
    ))
}

fn orbit_labels(n: usize, complete: &ComponentPartition) -> Result<CheckResult> {
    let classes = type_count_classes(n);
    let mut bad = Vec::new();
    for (tc, members) in &classes {
        let id = complete.component_of(members[0] as usize);
        if complete.component(id) != members.as_slice() {
            bad.push(format!("type counts {:?} do not form one component", tc.as_array()));
        } else if members.len() as u64 != orbit_size(tc) {
            bad.push(format!("type counts {:?}: size {} ≠ orbit size {}", tc.as_array(), members.len(), orbit_size(tc)));
        }
    }
    let expected = binomial(n + 3, 3) as usize;
    let census = component_census(n)?;
    let consistent = complete.len() == expected
        && classes.len() == all_type_counts(n).len()
        && census == complete.census();
    if !consistent {
        bad.push(format!("{} components, expected {expected}", complete.len()));
    }
    bad.truncate(MAX_COUNTEREXAMPLES);
    Ok(check(
        n,
        "type_count_orbits",
        bad.is_empty(),
        format!("components are the {expected} type-count orbits with sizes n!/(a!b!c!d!)"),
        bad,
    ))
}

fn four_isolated_nodes(n: usize, complete: &ComponentPartition) -> CheckResult {
    let ones = (1usize << n) - 1;
    let mut expected: Vec<usize> = vec![
        node_index(0, 0, n),
        node_index(0, ones, n),
        node_index(ones, 0, n),
        node_index(ones, ones, n),
    ];
    expected.sort_unstable();
    let mut singletons: Vec<usize> = complete
        .components()
        .iter()
        .filter(|c| c.len() == 1)
        .map(|c| c[0] as usize)
        .collect();
    singletons.sort_unstable();
    let passed = singletons == expected;
    check(
        n,
        "four_isolated_nodes",
        passed,
        "the only singleton components are |0…0⟩⟨0…0|, |0…0⟩⟨1…1|, |1…1⟩⟨0…0|, |1…1⟩⟨1…1|".into(),
        if passed {
            vec![]
        } else {
            singletons.iter().take(MAX_COUNTEREXAMPLES).map(|&i| node_label(n, i)).collect()
        },
    )
}

fn largest_component(n: usize, complete: &ComponentPartition) -> CheckResult {
    let (lo, hi) = largest_component_bounds(n);
    let largest = complete.census().largest as u64;
    check(
        n,
        "largest_component_bounds",
        (lo..=hi).contains(&largest),
        format!("largest component {largest} within [{lo}, {hi}]"),
        vec![],
    )
}

fn degree_bound(n: usize, g: &InteractionGraph) -> Result<CheckResult> {
    let (node, degree) = max_degree(g)?;
    let bound = max_degree_bound(n);
    Ok(check(
        n,
        "degree_bound",
        degree == bound,
        format!("max degree {degree} at {node}, bound {bound}"),
        if degree == bound { vec![] } else { vec![node.to_string()] },
    ))
}

fn regularity(n: usize, g: &InteractionGraph, complete: &ComponentPartition) -> CheckResult {
    let irregular: Vec<String> = component_regularity(g, complete)
        .into_iter()
        .filter(|r| !r.is_regular())
        .take(MAX_COUNTEREXAMPLES)
        .map(|r| {
            let first = complete.component(r.component)[0] as usize;
            format!("component containing {}", node_label(n, first))
        })
        .collect();
    check(
        n,
        "component_regularity",
        irregular.is_empty(),
        "every component of the complete graph's induced graph is regular".into(),
        irregular,
    )
}

fn diagonal_regularity(n: usize) -> Result<Vec<CheckResult>> {
    let r = verify_diagonal_strong_regularity(n)?;
    let fmt = |(v, w, c): &(String, String, usize)| format!("{v} ~ {w}: {c} common neighbours");
    let adjacent_ce: Vec<String> = if r.adjacent_holds {
        vec![]
    } else {
        r.counterexamples.iter().take(1).map(fmt).collect()
    };
    let nonadjacent_ce: Vec<String> = if r.nonadjacent_holds {
        vec![]
    } else {
        r.counterexamples.iter().skip(usize::from(!r.adjacent_holds)).take(1).map(fmt).collect()
    };
    let by_distance: Vec<String> = r
        .nonadjacent_common
        .iter()
        .map(|(h, counts)| format!("distance {h}: {counts:?}"))
        .collect();
    Ok(vec![
        check(
            n,
            "diagonal_adjacent_common",
            r.adjacent_holds,
            format!(
                "{} adjacent diagonal pairs, common-neighbour counts {:?}, expected {}",
                r.adjacent_pairs,
                r.adjacent_common,
                n - 2
            ),
            adjacent_ce,
        ),
        check(
            n,
            "diagonal_nonadjacent_common",
            r.nonadjacent_holds,
            format!(
                "{} non-adjacent same-component pairs; observed {}; expected 1 at distance 4, 0 beyond",
                r.nonadjacent_pairs,
                if by_distance.is_empty() { "none".to_string() } else { by_distance.join(", ") }
            ),
            nonadjacent_ce,
        ),
    ])
}

/// `L vec(ρ)` against the dense `vec(Σ α (ρ − U ρ U†))` on random states.
fn vectorized_swap_action(n: usize, g: &InteractionGraph, lap: &QuantumLaplacian, seed: u64) -> CheckResult {
    let mut rng = seeded_rng(seed ^ 0x5eed_0001);
    let unitaries: Vec<(DMatrix<C64>, f64)> = g
        .weighted_edges()
        .map(|(e, w)| {
            let pi = Permutation::transposition(n, e.lo, e.hi).expect("valid edge");
            (permutation_matrix(&pi), w)
        })
        .collect();
    let mut worst: f64 = 0.0;
    for _ in 0..RANDOM_TRIALS {
        let rho = random_density(n, &mut rng);
        let mut dense = DMatrix::<C64>::zeros(rho.nrows(), rho.ncols());
        for (u, w) in &unitaries {
            dense += (&rho - u * &rho * u.adjoint()) * C64::new(*w, 0.0);
        }
        let sparse = lap.apply_complex(rho.as_slice());
        let err = sparse
            .iter()
            .zip(dense.as_slice())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        worst = worst.max(err);
    }
    check(
        n,
        "vectorized_swap_action",
        worst <= 1e-12,
        format!("max |L vec(ρ) − vec(Σα(ρ − UρU†))| = {worst:e} over {RANDOM_TRIALS} random states"),
        vec![],
    )
}

fn kernel_checks(n: usize, lap: &QuantumLaplacian, complete: &ComponentPartition, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let avg = QuantumAverage::new(n)?;
    let side = 1usize << n;

    // the quantum average of any state lies in the kernel
    let mut rng = seeded_rng(seed ^ 0x5eed_0002);
    let mut worst: f64 = 0.0;
    for _ in 0..RANDOM_TRIALS {
        let sym = avg.apply_matrix(&random_density(n, &mut rng));
        let lz = lap.apply_complex(sym.as_slice());
        worst = worst.max(lz.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    out.push(check(
        n,
        "average_in_kernel",
        worst <= 1e-10,
        format!("max |L vec(𝒫*(ρ))| = {worst:e}"),
        vec![],
    ));

    let dim_ok = lap.kernel_dimension() == complete.len();
    if n > DENSE_ORACLE_CAP {
        out.push(check(
            n,
            "kernel_dimension",
            dim_ok,
            format!("kernel dimension {} (dense rank oracle skipped above n = {DENSE_ORACLE_CAP})", lap.kernel_dimension()),
            vec![],
        ));
        return Ok(out);
    }

    let eig = SymmetricEigen::new(lap.to_dense());
    let threshold = lap.zero_threshold();
    let zero_cols: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i].abs() <= threshold)
        .collect();
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    out.push(check(
        n,
        "kernel_dimension",
        dim_ok && zero_cols.len() == complete.len() && min_eig >= -1e-10,
        format!(
            "dense nullity {} vs {} components; smallest eigenvalue {min_eig:e}",
            zero_cols.len(),
            complete.len()
        ),
        vec![],
    ));

    // every kernel vector is fixed by the quantum average
    let mut worst: f64 = 0.0;
    for &col in &zero_cols {
        let z: Vec<C64> = eig.eigenvectors.column(col).iter().map(|&x| C64::new(x, 0.0)).collect();
        let zm = DMatrix::from_vec(side, side, z);
        worst = worst.max((avg.apply_matrix(&zm) - &zm).norm());
    }
    out.push(check(
        n,
        "kernel_is_symmetric",
        worst <= 1e-10,
        format!("max ‖𝒫*(z) − z‖ over kernel vectors = {worst:e}"),
        vec![],
    ));
    Ok(out)
}

fn commuting_families(n: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = seeded_rng(seed ^ 0x5eed_0003);
    let mut bad = Vec::new();
    for _ in 0..RANDOM_TRIALS {
        let h0 = random_hermitian(&mut rng);
        for spec in [HamiltonianSpec::KronSum(h0), HamiltonianSpec::TensorPower(h0)] {
            if !commutes_with_all_permutations(&build_hamiltonian(&spec, n)?, n)? {
                bad.push(format!("{} does not commute", spec.kind()));
            }
        }
    }
    // a generic local field on qubit 1 alone must be detected
    let mut local = DMatrix::<C64>::zeros(1 << n, 1 << n);
    for r in 0..1usize << n {
        local[(r, r)] = C64::new(if r >> (n - 1) & 1 == 1 { -1.0 } else { 1.0 }, 0.0);
    }
    if commutes_with_all_permutations(&local, n)? {
        bad.push("a single-qubit field was reported as commuting".into());
    }
    bad.truncate(MAX_COUNTEREXAMPLES);
    Ok(check(
        n,
        "commuting_hamiltonians",
        bad.is_empty(),
        "Kronecker sums and tensor powers commute with every permutation".into(),
        bad,
    ))
}

/// Runs every check for one `n`.
pub fn verify_n(n: usize, seed: u64) -> Result<Vec<CheckResult>> {
    if !(2..=DEFAULT_DENSE_CAP).contains(&n) {
        return Err(Error::QubitCap {
            n,
            cap: DEFAULT_DENSE_CAP,
        });
    }
    let g = InteractionGraph::complete(n)?;
    let complete = components(&g)?;
    let lap = QuantumLaplacian::build(&g)?;
    let mut out = vec![
        partition_independence(n, &complete)?,
        orbit_labels(n, &complete)?,
        four_isolated_nodes(n, &complete),
        largest_component(n, &complete),
        degree_bound(n, &g)?,
        regularity(n, &g, &complete),
    ];
    out.extend(diagonal_regularity(n)?);
    out.push(vectorized_swap_action(n, &g, &lap, seed));
    out.extend(kernel_checks(n, &lap, &complete, seed)?);
    out.push(commuting_families(n, seed)?);
    Ok(out)
}

pub fn verify_range(ns: &[usize], seed: u64) -> Result<VerifyReport> {
    let mut results = Vec::new();
    for &n in ns {
        results.extend(verify_n(n, seed)?);
    }
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("n={} {}", r.n, r.check))
        .collect();
    Ok(VerifyReport {
        seed,
        n_values: ns.to_vec(),
        all_passed: failed.is_empty(),
        failed,
        results,
    })
}
