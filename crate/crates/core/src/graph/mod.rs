//! Multigraph data model shared by every solver in the crate.
//!
//! Edges are undirected and carry an all-or-nothing purchase cost plus a
//! capacity. Vertices are dense integer ids in `[0, n)`; edges are addressed
//! internally by their position in the edge list ([`EdgeIdx`]) and externally
//! by their textual id.

mod flow;
mod parse;
mod verify;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

pub use flow::{circulation_feasible, max_flow, max_flow_with_capacities, EdgeFlow, FlowAssignment};
pub use parse::{parse_instance, ParseError, ParseErrorKind};
pub use verify::{verify_solution, Check, VerificationReport};

pub type VertexId = usize;
pub type EdgeIdx = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeRecord {
    pub id: String,
    pub u: VertexId,
    pub v: VertexId,
    pub cost: u64,
    pub capacity: u64,
}

impl EdgeRecord {
    pub fn new(id: impl Into<String>, u: VertexId, v: VertexId, cost: u64, capacity: u64) -> Self {
        EdgeRecord { id: id.into(), u, v, cost, capacity }
    }

    /// The endpoint opposite to `x`. `x` must be one of the endpoints.
    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            debug_assert_eq!(x, self.v);
            self.u
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {edge}: endpoint {vertex} is not a vertex of a {n}-vertex graph")]
    EndpointOutOfRange { edge: String, vertex: VertexId, n: usize },
    #[error("edge {0} is a self-loop")]
    SelfLoop(String),
    #[error("duplicate edge id {0}")]
    DuplicateEdgeId(String),
    #[error("{role} {vertex} is not a vertex of a {n}-vertex graph")]
    VertexOutOfRange { role: &'static str, vertex: VertexId, n: usize },
    #[error("source and sink must differ (both are {0})")]
    SourceEqualsSink(VertexId),
    #[error("declared terminals must differ (both are {0})")]
    DegenerateTerminals(VertexId),
    #[error("total {0} exceeds the signed 64-bit range")]
    Overflow(&'static str),
    #[error("unknown edge id {0}")]
    UnknownEdge(String),
}

/// Undirected multigraph with a designated source and sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    vertex_count: usize,
    edges: Vec<EdgeRecord>,
    source: VertexId,
    sink: VertexId,
    terminals: Option<(VertexId, VertexId)>,
}

impl MultiGraph {
    /// Validates and builds a graph.
    ///
    /// Total cost and total capacity must each fit in `i64`; this keeps every
    /// residue, flow value and the infeasibility sentinel in range downstream.
    pub fn new(
        vertex_count: usize,
        edges: Vec<EdgeRecord>,
        source: VertexId,
        sink: VertexId,
        terminals: Option<(VertexId, VertexId)>,
    ) -> Result<Self, GraphError> {
        let n = vertex_count;
        for (role, vertex) in [("source", source), ("sink", sink)] {
            if vertex >= n {
                return Err(GraphError::VertexOutOfRange { role, vertex, n });
            }
        }
        if source == sink {
            return Err(GraphError::SourceEqualsSink(source));
        }
        if let Some((a, b)) = terminals {
            for vertex in [a, b] {
                if vertex >= n {
                    return Err(GraphError::VertexOutOfRange { role: "terminal", vertex, n });
                }
            }
            if a == b {
                return Err(GraphError::DegenerateTerminals(a));
            }
        }
        let mut seen = HashSet::new();
        let (mut cost_sum, mut cap_sum) = (0u64, 0u64);
        for e in &edges {
            for vertex in [e.u, e.v] {
                if vertex >= n {
                    return Err(GraphError::EndpointOutOfRange { edge: e.id.clone(), vertex, n });
                }
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop(e.id.clone()));
            }
            if !seen.insert(e.id.as_str()) {
                return Err(GraphError::DuplicateEdgeId(e.id.clone()));
            }
            cost_sum =
                cost_sum.checked_add(e.cost).filter(|&c| c < i64::MAX as u64).ok_or(GraphError::Overflow("cost"))?;
            cap_sum = cap_sum
                .checked_add(e.capacity)
                .filter(|&c| c < i64::MAX as u64)
                .ok_or(GraphError::Overflow("capacity"))?;
        }
        Ok(MultiGraph { vertex_count, edges, source, sink, terminals })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn edge(&self, idx: EdgeIdx) -> &EdgeRecord {
        &self.edges[idx]
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }

    pub fn declared_terminals(&self) -> Option<(VertexId, VertexId)> {
        self.terminals
    }

    pub fn capacities(&self) -> Vec<u64> {
        self.edges.iter().map(|e| e.capacity).collect()
    }

    pub fn total_cost(&self) -> u64 {
        self.edges.iter().map(|e| e.cost).sum()
    }

    pub fn total_capacity(&self) -> u64 {
        self.edges.iter().map(|e| e.capacity).sum()
    }

    pub fn edge_index(&self, id: &str) -> Option<EdgeIdx> {
        self.edges.iter().position(|e| e.id == id)
    }

    /// Cost of a set of edges.
    pub fn cost_of(&self, set: &EdgeSet) -> u64 {
        set.iter().map(|i| self.edges[i].cost).sum()
    }

    /// Same graph with a different source/sink pair.
    pub fn with_endpoints(&self, source: VertexId, sink: VertexId) -> Result<Self, GraphError> {
        MultiGraph::new(self.vertex_count, self.edges.clone(), source, sink, self.terminals)
    }

    /// Same graph with the given capacities, in edge order.
    pub fn with_capacities(&self, capacities: &[u64]) -> Result<Self, GraphError> {
        assert_eq!(capacities.len(), self.edges.len());
        let edges =
            self.edges.iter().zip(capacities).map(|(e, &capacity)| EdgeRecord { capacity, ..e.clone() }).collect();
        MultiGraph::new(self.vertex_count, edges, self.source, self.sink, self.terminals)
    }

    /// True when every vertex is reachable from vertex 0 through edges.
    pub fn is_connected(&self) -> bool {
        if self.vertex_count == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }
}

/// A subset of the edges of a graph, stored as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct EdgeSet {
    mask: Vec<bool>,
}

impl EdgeSet {
    pub fn empty(m: usize) -> Self {
        EdgeSet { mask: vec![false; m] }
    }

    pub fn full(m: usize) -> Self {
        EdgeSet { mask: vec![true; m] }
    }

    /// Builds a set from indices. Panics if an index is `>= m`.
    pub fn from_indices(m: usize, indices: impl IntoIterator<Item = EdgeIdx>) -> Self {
        let mut set = EdgeSet::empty(m);
        for i in indices {
            set.mask[i] = true;
        }
        set
    }

    /// Set encoded by the low `m` bits of `bits`.
    pub fn from_bits(m: usize, bits: u64) -> Self {
        EdgeSet { mask: (0..m).map(|i| bits >> i & 1 == 1).collect() }
    }

    pub fn from_ids<S: AsRef<str>>(graph: &MultiGraph, ids: &[S]) -> Result<Self, GraphError> {
        let mut set = EdgeSet::empty(graph.edge_count());
        for id in ids {
            let idx = graph.edge_index(id.as_ref()).ok_or_else(|| GraphError::UnknownEdge(id.as_ref().to_string()))?;
            set.mask[idx] = true;
        }
        Ok(set)
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, idx: EdgeIdx) -> bool {
        self.mask.get(idx).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, idx: EdgeIdx) {
        self.mask[idx] = true;
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeIdx> + '_ {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn to_vec(&self) -> Vec<EdgeIdx> {
        self.iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Bcmfp,
    Capndp,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Bcmfp => "bcmfp",
            ProblemKind::Capndp => "capndp",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Maximize flow subject to total cost at most this budget.
    Budget(u64),
    /// Minimize cost subject to max flow at least this demand.
    Demand(u64),
}

impl Objective {
    pub fn kind(&self) -> ProblemKind {
        match self {
            Objective::Budget(_) => ProblemKind::Bcmfp,
            Objective::Demand(_) => ProblemKind::Capndp,
        }
    }
}

/// An edge offering a menu of mutually exclusive (cost, capacity) upgrades.
/// Consumed by [`crate::extensions::expand_upgrades`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpgradeEdge {
    pub id: String,
    pub u: VertexId,
    pub v: VertexId,
    pub choices: Vec<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    pub graph: MultiGraph,
    pub objective: Objective,
    pub upgrades: Vec<UpgradeEdge>,
}

impl ProblemInstance {
    pub fn new(graph: MultiGraph, objective: Objective) -> Self {
        ProblemInstance { graph, objective, upgrades: Vec::new() }
    }

    pub fn with_objective(&self, objective: Objective) -> Self {
        ProblemInstance { objective, ..self.clone() }
    }
}

/// Writes the instance in the line-oriented text format accepted by
/// [`parse_instance`].
impl fmt::Display for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.graph;
        writeln!(f, "graph {}", g.vertex_count)?;
        if let Some((a, b)) = g.terminals {
            writeln!(f, "terminals {a} {b}")?;
        }
        writeln!(f, "source {}", g.source)?;
        writeln!(f, "sink {}", g.sink)?;
        for e in &g.edges {
            writeln!(f, "edge {} {} {} {} {}", e.id, e.u, e.v, e.cost, e.capacity)?;
        }
        for up in &self.upgrades {
            write!(f, "upedge {} {} {} {}", up.id, up.u, up.v, up.choices.len())?;
            for (c, u) in &up.choices {
                write!(f, " {c} {u}")?;
            }
            writeln!(f)?;
        }
        match self.objective {
            Objective::Budget(b) => writeln!(f, "budget {b}"),
            Objective::Demand(d) => writeln!(f, "demand {d}"),
        }
    }
}

/// Prescribed net inflow (inflow minus outflow) per vertex; absent vertices
/// have residue 0.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResidueAssignment {
    residues: BTreeMap<VertexId, i64>,
}

impl ResidueAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VertexId, i64)>) -> Self {
        let mut r = Self::new();
        for (v, x) in pairs {
            r.add(v, x);
        }
        r
    }

    /// Adds `amount` to the residue of `v`.
    pub fn add(&mut self, v: VertexId, amount: i64) {
        *self.residues.entry(v).or_insert(0) += amount;
    }

    pub fn get(&self, v: VertexId) -> i64 {
        self.residues.get(&v).copied().unwrap_or(0)
    }

    pub fn sum(&self) -> i128 {
        self.residues.values().map(|&x| x as i128).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, i64)> + '_ {
        self.residues.iter().map(|(&v, &x)| (v, x))
    }

    /// Residues of an s-t flow of value `v`: `-v` at the source, `+v` at the sink.
    pub fn st_flow(graph: &MultiGraph, v: i64) -> Self {
        Self::from_pairs([(graph.source(), -v), (graph.sink(), v)])
    }
}

/// A purchased edge set together with its cost and exact max flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub purchased: EdgeSet,
    pub total_cost: u64,
    pub achieved_flow: u64,
}

impl Solution {
    /// Evaluates `purchased` on `graph`: sums its cost and computes its max flow.
    pub fn evaluate(graph: &MultiGraph, purchased: EdgeSet) -> Self {
        let total_cost = graph.cost_of(&purchased);
        let achieved_flow = max_flow(graph, &purchased).value;
        Solution { purchased, total_cost, achieved_flow }
    }

    /// Purchased edge ids in lexicographic order.
    pub fn edge_ids<'g>(&self, graph: &'g MultiGraph) -> Vec<&'g str> {
        let mut ids: Vec<&str> = self.purchased.iter().map(|i| graph.edge(i).id.as_str()).collect();
        ids.sort_unstable();
        ids
    }

    /// The machine-readable `RESULT cost=<c> flow=<f> edges=<id,...>` line.
    pub fn result_line(&self, graph: &MultiGraph) -> String {
        format!("RESULT cost={} flow={} edges={}", self.total_cost, self.achieved_flow, self.edge_ids(graph).join(","))
    }
}
