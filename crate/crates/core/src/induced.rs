//! The induced graph on the `4^n` operator-basis nodes.
//!
//! `{v, w}` is an edge iff `w = F_{π_jk}(v) ≠ v` for some interaction edge
//! `{j, k}`. Adjacency is never materialized: neighbours are generated on
//! demand from the node index, which keeps the structural results usable up
//! to [`STRUCTURAL_CAP`] qubits.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::basis::{swap_node_bits, type_counts_of, BasisNode, TypeCounts};
use crate::graph::InteractionGraph;
use crate::{par, Error, Result, STRUCTURAL_CAP};

fn check_structural(n: usize) -> Result<()> {
    if n > STRUCTURAL_CAP {
        return Err(Error::QubitCap {
            n,
            cap: STRUCTURAL_CAP,
        });
    }
    Ok(())
}

/// Distinct neighbour indices of node `index`, ascending.
pub(crate) fn neighbor_indices(index: usize, g: &InteractionGraph) -> Vec<usize> {
    let n = g.n();
    let mut out: Vec<usize> = g
        .edges()
        .iter()
        .map(|e| swap_node_bits(index, n, e.lo, e.hi))
        .filter(|&w| w != index)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// `{F_{π_jk}(v) : {j,k} ∈ E} \ {v}`.
pub fn neighbors(v: BasisNode, g: &InteractionGraph) -> Result<BTreeSet<BasisNode>> {
    if v.n() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: v.n(),
        });
    }
    neighbor_indices(v.index(), g)
        .into_iter()
        .map(|w| BasisNode::from_index(g.n(), w))
        .collect()
}

/// Number of distinct neighbours (set semantics, not edge multiplicity).
pub fn degree(v: BasisNode, g: &InteractionGraph) -> Result<usize> {
    Ok(neighbors(v, g)?.len())
}

/// Connected components of an induced graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentPartition {
    n: usize,
    components: Vec<Vec<u32>>,
    lookup: Vec<u32>,
}

impl ComponentPartition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Node indices of each component, ascending; ids follow discovery order.
    pub fn components(&self) -> &[Vec<u32>] {
        &self.components
    }

    pub fn component(&self, id: usize) -> &[u32] {
        &self.components[id]
    }

    /// Component id of a node index.
    pub fn component_of(&self, index: usize) -> usize {
        self.lookup[index] as usize
    }

    /// Position of a node index inside its component's list.
    pub fn local_index(&self, index: usize) -> usize {
        let comp = &self.components[self.component_of(index)];
        comp.binary_search(&(index as u32)).expect("node in its own component")
    }

    pub fn census(&self) -> Census {
        let mut hist = BTreeMap::new();
        for c in &self.components {
            *hist.entry(c.len()).or_insert(0) += 1;
        }
        Census::from_histogram(self.n, hist)
    }

    /// True iff both partitions group the same nodes together (ids may differ).
    pub fn same_partition(&self, other: &ComponentPartition) -> bool {
        if self.n != other.n || self.len() != other.len() {
            return false;
        }
        // ids are assigned in index-order discovery, so equal partitions have equal lists
        self.components == other.components
    }
}

/// Breadth-first traversal from unvisited nodes in index order.
pub fn components(g: &InteractionGraph) -> Result<ComponentPartition> {
    let n = g.n();
    check_structural(n)?;
    let dim = 1usize << (2 * n);
    const UNSEEN: u32 = u32::MAX;
    let mut lookup = vec![UNSEEN; dim];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..dim {
        if lookup[start] != UNSEEN {
            continue;
        }
        let id = components.len() as u32;
        lookup[start] = id;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(v) = queue.pop_front() {
            members.push(v as u32);
            for e in g.edges() {
                let w = swap_node_bits(v, n, e.lo, e.hi);
                if lookup[w] == UNSEEN {
                    lookup[w] = id;
                    queue.push_back(w);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    Ok(ComponentPartition {
        n,
        components,
        lookup,
    })
}

/// Component size histogram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Census {
    pub n: usize,
    pub total_components: usize,
    /// component size → number of components of that size
    pub size_histogram: BTreeMap<usize, usize>,
    pub largest: usize,
}

impl Census {
    fn from_histogram(n: usize, size_histogram: BTreeMap<usize, usize>) -> Self {
        Self {
            n,
            total_components: size_histogram.values().sum(),
            largest: size_histogram.keys().next_back().copied().unwrap_or(0),
            size_histogram,
        }
    }

    pub fn total_nodes(&self) -> usize {
        self.size_histogram.iter().map(|(s, c)| s * c).sum()
    }
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k as u64).fold(1, |acc, i| acc * (n as u64 - i) / (i + 1))
}

/// `n! / (a! b! c! d!)`, the size of the orbit labelled by `tc`.
pub fn orbit_size(tc: &TypeCounts) -> u64 {
    tc.as_array()
        .iter()
        .fold(factorial(tc.total()), |acc, &k| acc / factorial(k))
}

/// Every `TypeCounts` with `a + b + c + d = n`.
pub fn all_type_counts(n: usize) -> Vec<TypeCounts> {
    let mut out = Vec::new();
    for a in 0..=n {
        for b in 0..=n - a {
            for c in 0..=n - a - b {
                out.push(TypeCounts {
                    a,
                    b,
                    c,
                    d: n - a - b - c,
                });
            }
        }
    }
    out
}

/// Orbit census of the symmetric group acting on the operator basis, computed
/// from the type-count labels without touching the `4^n` nodes.
pub fn component_census(n: usize) -> Result<Census> {
    if !(2..=STRUCTURAL_CAP).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "census needs 2 ≤ n ≤ {STRUCTURAL_CAP}, got {n}"
        )));
    }
    let mut hist = BTreeMap::new();
    for tc in all_type_counts(n) {
        *hist.entry(orbit_size(&tc) as usize).or_insert(0) += 1;
    }
    Ok(Census::from_histogram(n, hist))
}

/// Largest degree attainable in the induced graph of any `n`-qubit network:
/// `3n²/8`, `(3n²−3)/8`, `(3n²−4)/8`, `(3n²−3)/8` for `n mod 4 = 0, 1, 2, 3`.
pub fn max_degree_bound(n: usize) -> usize {
    let sq = 3 * n * n;
    match n % 4 {
        0 => sq / 8,
        1 | 3 => (sq - 3) / 8,
        _ => (sq - 4) / 8,
    }
}

/// Node of maximum degree (smallest index on ties) and that degree.
pub fn max_degree(g: &InteractionGraph) -> Result<(BasisNode, usize)> {
    let n = g.n();
    check_structural(n)?;
    let (idx, deg) = par::max_by_key_range(0..1 << (2 * n), |i| neighbor_indices(i, g).len())
        .expect("non-empty node set");
    Ok((BasisNode::from_index(n, idx)?, deg))
}

/// `(max_k C(n,k), (max_k C(n,k))²)`.
pub fn largest_component_bounds(n: usize) -> (u64, u64) {
    let m = binomial(n, n / 2);
    (m, m * m)
}

/// Regularity verdict for one component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentRegularity {
    pub component: usize,
    pub size: usize,
    /// common degree, or `None` when degrees differ
    pub degree: Option<usize>,
}

impl ComponentRegularity {
    pub fn is_regular(&self) -> bool {
        self.degree.is_some()
    }
}

/// Degree-equality check inside every component of `partition` under `g`.
pub fn component_regularity(g: &InteractionGraph, partition: &ComponentPartition) -> Vec<ComponentRegularity> {
    par::map_range(0..partition.len(), |id| {
        let comp = partition.component(id);
        let first = neighbor_indices(comp[0] as usize, g).len();
        let regular = comp[1..]
            .iter()
            .all(|&v| neighbor_indices(v as usize, g).len() == first);
        ComponentRegularity {
            component: id,
            size: comp.len(),
            degree: regular.then_some(first),
        }
    })
}

/// Regularity of every component of the induced graph of `K_n`.
pub fn verify_component_regularity(n: usize) -> Result<Vec<ComponentRegularity>> {
    let g = InteractionGraph::complete(n)?;
    let partition = components(&g)?;
    Ok(component_regularity(&g, &partition))
}

/// Common-neighbour statistics of the diagonal induced graph of `K_n`
/// (nodes `|p⟩⟨p|`), checked against the near-strong-regularity claim:
/// adjacent pairs share `n − 2` neighbours, non-adjacent pairs in one
/// component share 1 neighbour at Hamming distance 4 and none beyond.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagonalRegularityReport {
    pub n: usize,
    /// distinct common-neighbour counts seen over adjacent pairs
    pub adjacent_common: BTreeSet<usize>,
    /// Hamming distance → distinct common-neighbour counts over non-adjacent pairs
    pub nonadjacent_common: BTreeMap<usize, BTreeSet<usize>>,
    pub adjacent_pairs: usize,
    pub nonadjacent_pairs: usize,
    pub adjacent_holds: bool,
    pub nonadjacent_holds: bool,
    /// first violating pair per failed clause: (v, w, observed common count)
    pub counterexamples: Vec<(String, String, usize)>,
}

impl DiagonalRegularityReport {
    pub fn holds(&self) -> bool {
        self.adjacent_holds && self.nonadjacent_holds
    }
}

/// Claimed common-neighbour count for a non-adjacent same-component pair.
pub fn claimed_nonadjacent_common(hamming: usize) -> usize {
    usize::from(hamming == 4)
}

pub fn verify_diagonal_strong_regularity(n: usize) -> Result<DiagonalRegularityReport> {
    if !(2..=crate::DEFAULT_DENSE_CAP).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "diagonal check needs 2 ≤ n ≤ {}, got {n}",
            crate::DEFAULT_DENSE_CAP
        )));
    }
    let g = InteractionGraph::complete(n)?;
    let dim = 1usize << n;
    let diag = |p: usize| crate::basis::node_index(p, p, n);
    let nbrs: Vec<BTreeSet<usize>> = (0..dim)
        .map(|p| neighbor_indices(diag(p), &g).into_iter().collect())
        .collect();

    // components of the diagonal graph are the Hamming-weight classes
    let mut by_weight: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for p in 0..dim {
        by_weight.entry(p.count_ones()).or_default().push(p);
    }
    let pairs: Vec<(usize, usize)> = by_weight
        .values()
        .flat_map(|class| {
            class
                .iter()
                .enumerate()
                .flat_map(move |(i, &p)| class[i + 1..].iter().map(move |&q| (p, q)))
        })
        .collect();

    let stats = par::map(&pairs, |&(p, q)| {
        let adjacent = nbrs[p].contains(&diag(q));
        let common = nbrs[p].intersection(&nbrs[q]).count();
        (p, q, adjacent, (p ^ q).count_ones() as usize, common)
    });

    let mut report = DiagonalRegularityReport {
        n,
        adjacent_common: BTreeSet::new(),
        nonadjacent_common: BTreeMap::new(),
        adjacent_pairs: 0,
        nonadjacent_pairs: 0,
        adjacent_holds: true,
        nonadjacent_holds: true,
        counterexamples: Vec::new(),
    };
    let label = |p: usize| BasisNode::from_index(n, diag(p)).map(|v| v.to_string());
    for (p, q, adjacent, hamming, common) in stats {
        if adjacent {
            report.adjacent_pairs += 1;
            report.adjacent_common.insert(common);
            if common != n - 2 && report.adjacent_holds {
                report.adjacent_holds = false;
                report.counterexamples.push((label(p)?, label(q)?, common));
            }
        } else {
            report.nonadjacent_pairs += 1;
            report
                .nonadjacent_common
                .entry(hamming)
                .or_default()
                .insert(common);
            if common != claimed_nonadjacent_common(hamming) && report.nonadjacent_holds {
                report.nonadjacent_holds = false;
                report.counterexamples.push((label(p)?, label(q)?, common));
            }
        }
    }
    Ok(report)
}

/// Groups node indices by type counts, for comparison with traversal results.
pub fn type_count_classes(n: usize) -> BTreeMap<TypeCounts, Vec<u32>> {
    let mut classes: BTreeMap<TypeCounts, Vec<u32>> = BTreeMap::new();
    for idx in 0..1usize << (2 * n) {
        let (ket, bra) = crate::basis::split_node_index(idx, n);
        classes
            .entry(type_counts_of(ket, bra, n))
            .or_default()
            .push(idx as u32);
    }
    classes
}
