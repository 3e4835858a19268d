//! Quantum interaction graphs and piecewise-constant switching schedules.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, STRUCTURAL_CAP};

/// Undirected edge between two qubits, stored with `lo < hi` (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub lo: usize,
    pub hi: usize,
}

impl Edge {
    pub fn new(j: usize, k: usize) -> Result<Self> {
        if j == k {
            return Err(Error::InvalidGraph(format!("self-loop on qubit {}", j + 1)));
        }
        Ok(Self {
            lo: j.min(k),
            hi: j.max(k),
        })
    }
}

/// Weighted undirected graph on `n` qubits. Edge order is preserved and is
/// the order in which weight vectors are reported.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionGraph {
    n: usize,
    edges: Vec<Edge>,
    weights: Vec<f64>,
}

impl InteractionGraph {
    /// Builds a graph from 0-based `(j, k, α_jk)` triples.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if n == 0 || n > STRUCTURAL_CAP {
            return Err(Error::QubitCap {
                n,
                cap: STRUCTURAL_CAP,
            });
        }
        let mut out = Self {
            n,
            edges: Vec::new(),
            weights: Vec::new(),
        };
        for (j, k, w) in edges {
            let e = Edge::new(j, k)?;
            if e.hi >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {{{},{}}} out of range for n = {n}",
                    e.lo + 1,
                    e.hi + 1
                )));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "weight {w} on edge {{{},{}}} must be positive",
                    e.lo + 1,
                    e.hi + 1
                )));
            }
            if out.edges.contains(&e) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge {{{},{}}}",
                    e.lo + 1,
                    e.hi + 1
                )));
            }
            out.edges.push(e);
            out.weights.push(w);
        }
        Ok(out)
    }

    /// Unit-weight graph from 0-based pairs.
    pub fn unweighted(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, pairs.iter().map(|&(j, k)| (j, k, 1.0)))
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, std::iter::empty())
    }

    pub fn complete(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (0..n)
            .flat_map(|j| (j + 1..n).map(move |k| (j, k)))
            .collect();
        Self::unweighted(n, &pairs)
    }

    pub fn path(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (1..n).map(|k| (k - 1, k)).collect();
        Self::unweighted(n, &pairs)
    }

    /// Star centred on the first qubit.
    pub fn star(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (1..n).map(|k| (0, k)).collect();
        Self::unweighted(n, &pairs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn weighted_edges(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        self.edges.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Same edge set with new positive weights, in edge order.
    pub fn with_weights(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::DimensionMismatch {
                expected: self.edges.len(),
                got: weights.len(),
            });
        }
        Self::new(
            self.n,
            self.edges
                .iter()
                .zip(weights)
                .map(|(e, &w)| (e.lo, e.hi, w)),
        )
    }

    pub fn has_edge(&self, j: usize, k: usize) -> bool {
        Edge::new(j, k).is_ok_and(|e| self.edges.contains(&e))
    }

    /// True iff a traversal from the first qubit reaches every qubit.
    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.lo].push(e.hi);
            adj[e.hi].push(e.lo);
        }
        let mut seen = vec![false; self.n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == self.n
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GraphJson = serde_json::from_str(text)?;
        raw.into_graph()
    }

    pub fn to_json_value(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            edges: self.edges.iter().map(|e| [e.lo + 1, e.hi + 1]).collect(),
            weights: Some(self.weights.clone()),
        }
    }
}

/// `{"n":3, "edges":[[1,2],[2,3]], "weights":[1.0,1.0]}`, 1-based qubits.
/// Missing weights default to 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl GraphJson {
    pub fn into_graph(self) -> Result<InteractionGraph> {
        edges_from_json(self.n, &self.edges, self.weights.as_deref())
    }
}

fn edges_from_json(n: usize, edges: &[[usize; 2]], weights: Option<&[f64]>) -> Result<InteractionGraph> {
    if let Some(w) = weights {
        if w.len() != edges.len() {
            return Err(Error::InvalidGraph(format!(
                "{} edges but {} weights",
                edges.len(),
                w.len()
            )));
        }
    }
    let mut triples = Vec::with_capacity(edges.len());
    for (i, &[j, k]) in edges.iter().enumerate() {
        if j == 0 || k == 0 {
            return Err(Error::InvalidGraph("qubit labels are 1-based".into()));
        }
        triples.push((j - 1, k - 1, weights.map_or(1.0, |w| w[i])));
    }
    InteractionGraph::new(n, triples)
}

/// One constant piece of a switching signal, active from `start` until the
/// next segment starts (the last one extends to infinity).
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub graph: InteractionGraph,
}

/// Piecewise-constant switching signal `σ(t)` with a dwell-time floor.
#[derive(Clone, Debug, PartialEq)]
pub struct SwitchingSchedule {
    segments: Vec<Segment>,
    dwell_floor: f64,
}

impl SwitchingSchedule {
    pub fn new(segments: Vec<Segment>, dwell_floor: f64) -> Result<Self> {
        if !(dwell_floor.is_finite() && dwell_floor > 0.0) {
            return Err(Error::InvalidSchedule(format!(
                "dwell floor {dwell_floor} must be positive"
            )));
        }
        let first = segments
            .first()
            .ok_or_else(|| Error::InvalidSchedule("no segments".into()))?;
        let n = first.graph.n();
        for s in &segments {
            if !s.start.is_finite() {
                return Err(Error::InvalidSchedule("non-finite start time".into()));
            }
            if s.graph.n() != n {
                return Err(Error::InvalidSchedule(format!(
                    "segment at t = {} has n = {}, expected {n}",
                    s.start,
                    s.graph.n()
                )));
            }
        }
        for w in segments.windows(2) {
            let gap = w[1].start - w[0].start;
            if gap <= 0.0 {
                return Err(Error::InvalidSchedule(format!(
                    "start times not increasing at t = {}",
                    w[1].start
                )));
            }
            // relative slack so that periodic expansions like 0.1·k pass
            if gap < dwell_floor * (1.0 - 1e-9) {
                return Err(Error::InvalidSchedule(format!(
                    "gap {gap} at t = {} is below the dwell floor {dwell_floor}",
                    w[1].start
                )));
            }
        }
        Ok(Self {
            segments,
            dwell_floor,
        })
    }

    /// A single graph active from `t = 0` forever.
    pub fn constant(graph: InteractionGraph) -> Self {
        Self {
            segments: vec![Segment { start: 0.0, graph }],
            dwell_floor: 1.0,
        }
    }

    /// Repeats one period's segments `count` times; segment starts must lie in
    /// `[0, period)`.
    pub fn periodic(period_segments: Vec<Segment>, period: f64, count: usize, dwell_floor: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) || count == 0 {
            return Err(Error::InvalidSchedule("period must be positive and count ≥ 1".into()));
        }
        if let Some(s) = period_segments.iter().find(|s| s.start < 0.0 || s.start >= period) {
            return Err(Error::InvalidSchedule(format!(
                "segment start {} outside one period [0, {period})",
                s.start
            )));
        }
        let mut segments = Vec::with_capacity(period_segments.len() * count);
        for r in 0..count {
            for s in &period_segments {
                segments.push(Segment {
                    start: s.start + r as f64 * period,
                    graph: s.graph.clone(),
                });
            }
        }
        Self::new(segments, dwell_floor)
    }

    pub fn n(&self) -> usize {
        self.segments[0].graph.n()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn dwell_floor(&self) -> f64 {
        self.dwell_floor
    }

    pub fn is_constant(&self) -> bool {
        self.segments.len() == 1
    }

    /// End of segment `i` (infinity for the last one).
    pub fn segment_end(&self, i: usize) -> f64 {
        self.segments
            .get(i + 1)
            .map_or(f64::INFINITY, |s| s.start)
    }

    /// Index of the segment active at `t`, if the schedule has started.
    pub fn segment_index_at(&self, t: f64) -> Option<usize> {
        self.segments.iter().rposition(|s| s.start <= t)
    }

    pub fn graph_at(&self, t: f64) -> Option<&InteractionGraph> {
        self.segment_index_at(t).map(|i| &self.segments[i].graph)
    }

    /// Union of the edge sets active during `[t0, t1)`; a union edge carries
    /// the largest weight it attains.
    pub fn union_graph(&self, t0: f64, t1: f64) -> Result<InteractionGraph> {
        if !(t0 < t1) {
            return Err(Error::InvalidSchedule(format!("empty interval [{t0}, {t1})")));
        }
        let first = self.segment_index_at(t0).ok_or_else(|| {
            Error::InvalidSchedule(format!(
                "interval starts at {t0}, before the first segment at {}",
                self.segments[0].start
            ))
        })?;
        let mut union: BTreeMap<Edge, f64> = BTreeMap::new();
        for s in self.segments[first..].iter().take_while(|s| s.start < t1) {
            for (e, w) in s.graph.weighted_edges() {
                let slot = union.entry(e).or_insert(w);
                *slot = slot.max(w);
            }
        }
        InteractionGraph::new(self.n(), union.into_iter().map(|(e, w)| (e.lo, e.hi, w)))
    }

    /// Largest `Σα` over all segments.
    pub fn max_total_weight(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.graph.total_weight())
            .fold(0.0, f64::max)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ScheduleJson = serde_json::from_str(text)?;
        raw.into_schedule()
    }

    pub fn to_json_value(&self) -> ScheduleJson {
        ScheduleJson {
            n: self.n(),
            segments: self
                .segments
                .iter()
                .map(|s| {
                    let g = s.graph.to_json_value();
                    SegmentJson {
                        t: s.start,
                        edges: g.edges,
                        weights: g.weights,
                    }
                })
                .collect(),
            dwell_floor: self.dwell_floor,
        }
    }
}

/// `{"n":3, "segments":[{"t":0.0, "edges":[[1,2],[2,3]], "weights":[1.0,1.0]}], "dwell_floor":0.1}`
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleJson {
    pub n: usize,
    pub segments: Vec<SegmentJson>,
    pub dwell_floor: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentJson {
    pub t: f64,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl ScheduleJson {
    pub fn segments(&self) -> Result<Vec<Segment>> {
        self.segments
            .iter()
            .map(|s| {
                Ok(Segment {
                    start: s.t,
                    graph: edges_from_json(self.n, &s.edges, s.weights.as_deref())?,
                })
            })
            .collect()
    }

    pub fn into_schedule(self) -> Result<SwitchingSchedule> {
        SwitchingSchedule::new(self.segments()?, self.dwell_floor)
    }
}
