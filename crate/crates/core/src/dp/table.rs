use std::time::{Duration, Instant};

use super::{classify, CaseCounts, Cost, DpError, ResidueDomain, ResidueTuple};
use crate::decompose::{DecompTree, NodeId, NodeKind};
use crate::graph::{EdgeRecord, EdgeSet};

/// Which tuples a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableScope {
    /// Every tuple over the domain.
    Full,
    /// Only tuples whose source residue is `-flow` and sink residue `+flow`.
    ///
    /// The source and sink residues pass unchanged to whichever child
    /// contains them, so these are exactly the tuples a root query for
    /// `flow` can reach. Each node then has one free coordinate instead of
    /// up to three.
    Pinned { flow: u64 },
}

/// How a table entry was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    Leaf {
        bought: bool,
    },
    Series,
    /// The first child's residue at the shared first terminal.
    Parallel {
        split: Option<i64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpEntry {
    pub cost: Cost,
    pub choice: Choice,
}

#[derive(Debug, Clone, Default)]
pub struct TableStats {
    /// Admissible tuples evaluated, over all nodes.
    pub entries: u64,
    /// Candidate splits examined by parallel nodes.
    pub split_evaluations: u64,
    /// Admissible tuples per node, indexed by node id.
    pub node_entries: Vec<u64>,
    pub cases: CaseCounts,
    pub build_time: Duration,
}

const NO_SPLIT: u32 = u32::MAX;

/// Dense index layout of one node's tuples: the first-terminal residue is
/// always a free coordinate, the special residues are free unless pinned,
/// and the second-terminal residue is implied by the zero sum.
#[derive(Debug, Clone, Copy)]
struct Layout {
    has_s: bool,
    has_t: bool,
    pin: Option<i64>,
    len: usize,
}

impl Layout {
    fn new(has_s: bool, has_t: bool, pin: Option<i64>, dlen: usize) -> Self {
        let free = 1 + usize::from(pin.is_none()) * (usize::from(has_s) + usize::from(has_t));
        Layout { has_s, has_t, pin, len: dlen.pow(free as u32) }
    }

    #[inline]
    fn index(&self, domain: &ResidueDomain, a: i64, s: i64, t: i64) -> Option<usize> {
        let dlen = domain.len();
        let mut idx = domain.index(a)?;
        let mut mul = dlen;
        match self.pin {
            Some(v) => {
                if (self.has_s && s != -v) || (self.has_t && t != v) {
                    return None;
                }
            }
            None => {
                if self.has_s {
                    idx += domain.index(s)? * mul;
                    mul *= dlen;
                }
                if self.has_t {
                    idx += domain.index(t)? * mul;
                }
            }
        }
        Some(idx)
    }

    fn decode(&self, domain: &ResidueDomain, idx: usize) -> (i64, i64, i64) {
        let dlen = domain.len();
        let a = domain.value(idx % dlen);
        let mut rest = idx / dlen;
        let (mut s, mut t) = (0, 0);
        match self.pin {
            Some(v) => {
                if self.has_s {
                    s = -v;
                }
                if self.has_t {
                    t = v;
                }
            }
            None => {
                if self.has_s {
                    s = domain.value(rest % dlen);
                    rest /= dlen;
                }
                if self.has_t {
                    t = domain.value(rest % dlen);
                }
            }
        }
        (a, s, t)
    }
}

/// A filled DP table for one decomposition tree.
#[derive(Debug, Clone)]
pub struct DpTable {
    domain: ResidueDomain,
    scope: TableScope,
    capacities: Vec<u64>,
    infinity: u64,
    layouts: Vec<Layout>,
    costs: Vec<Vec<u64>>,
    splits: Vec<Vec<u32>>,
    stats: TableStats,
}

/// Cost of a single edge carrying `|tuple.a|` units: zero when unused, its
/// cost when the amount fits its capacity, infinite otherwise.
pub fn leaf_cost(edge: &EdgeRecord, tuple: &ResidueTuple) -> Result<Cost, DpError> {
    if tuple.s.is_some() || tuple.t.is_some() {
        return Err(DpError::SpecialsMismatch { node: usize::MAX, tuple: *tuple });
    }
    if tuple.sum() != 0 {
        return Err(DpError::NonZeroSum(*tuple));
    }
    Ok(match tuple.a.unsigned_abs() {
        0 => Cost::Finite(0),
        r if r <= edge.capacity => Cost::Finite(edge.cost),
        _ => Cost::Infinite,
    })
}

/// Fills the table bottom-up with the edge capacities of `tree`.
pub fn build_table(tree: &DecompTree, domain: ResidueDomain, scope: TableScope) -> DpTable {
    let caps: Vec<u64> = tree.edges().iter().map(|e| e.capacity).collect();
    DpTable::build(tree, &caps, domain, scope)
}

impl DpTable {
    /// Fills the table bottom-up, with `capacities[i]` used for edge `i`.
    pub fn build(tree: &DecompTree, capacities: &[u64], domain: ResidueDomain, scope: TableScope) -> DpTable {
        assert_eq!(capacities.len(), tree.edges().len(), "one capacity per edge");
        let started = Instant::now();
        let pin = match scope {
            TableScope::Full => None,
            TableScope::Pinned { flow } => Some(flow as i64),
        };
        let dlen = domain.len();
        let layouts: Vec<Layout> =
            tree.nodes().iter().map(|n| Layout::new(n.specials.s, n.specials.t, pin, dlen)).collect();
        let infinity = tree.edges().iter().map(|e| e.cost).sum::<u64>() + 1;
        let mut table = DpTable {
            domain,
            scope,
            capacities: capacities.to_vec(),
            infinity,
            layouts,
            costs: vec![Vec::new(); tree.len()],
            splits: vec![Vec::new(); tree.len()],
            stats: TableStats { node_entries: vec![0; tree.len()], ..TableStats::default() },
        };
        for id in tree.postorder() {
            table.fill_node(tree, id);
        }
        table.stats.build_time = started.elapsed();
        table
    }

    fn fill_node(&mut self, tree: &DecompTree, id: NodeId) {
        let layout = self.layouts[id];
        let is_parallel = matches!(tree.node(id).kind, NodeKind::Parallel { .. });
        let mut costs = vec![self.infinity; layout.len];
        let mut splits = if is_parallel { vec![NO_SPLIT; layout.len] } else { Vec::new() };
        let mut admissible = 0u64;
        let mut split_evals = 0u64;
        for (idx, cost) in costs.iter_mut().enumerate() {
            let (a, s, t) = layout.decode(&self.domain, idx);
            let b = -(a + s + t);
            if !self.domain.contains(b) {
                continue;
            }
            admissible += 1;
            let (c, split, evals) = self.evaluate(tree, id, a, s, t, b);
            *cost = c;
            split_evals += evals;
            if is_parallel {
                splits[idx] = split;
            }
        }
        if let Some(key) = classify(tree, id) {
            self.stats.cases.add(key);
        }
        self.stats.entries += admissible;
        self.stats.split_evaluations += split_evals;
        self.stats.node_entries[id] = admissible;
        self.costs[id] = costs;
        self.splits[id] = splits;
    }

    #[inline]
    fn lookup(&self, id: NodeId, a: i64, s: i64, t: i64) -> u64 {
        match self.layouts[id].index(&self.domain, a, s, t) {
            Some(idx) => self.costs[id][idx],
            None => self.infinity,
        }
    }

    #[inline]
    fn add(&self, x: u64, y: u64) -> u64 {
        if x >= self.infinity || y >= self.infinity {
            self.infinity
        } else {
            x + y
        }
    }

    /// Residues of the specials inside `child`, as (s, t, their sum).
    #[inline]
    fn child_specials(tree: &DecompTree, child: NodeId, s: i64, t: i64) -> (i64, i64, i64) {
        let sp = tree.node(child).specials;
        let cs = if sp.s { s } else { 0 };
        let ct = if sp.t { t } else { 0 };
        (cs, ct, cs + ct)
    }

    /// Core recurrence; `s`/`t` are zero when the node lacks them. Returns
    /// the cost, the chosen split index (parallel only) and the number of
    /// splits examined.
    fn evaluate(&self, tree: &DecompTree, id: NodeId, a: i64, s: i64, t: i64, b: i64) -> (u64, u32, u64) {
        match tree.node(id).kind {
            NodeKind::Leaf { edge } => {
                let cost = match a.unsigned_abs() {
                    0 => 0,
                    r if r <= self.capacities[edge] => tree.edges()[edge].cost,
                    _ => self.infinity,
                };
                (cost, NO_SPLIT, 0)
            }
            NodeKind::Series { left, right, .. } => {
                let (ls, lt, _) = Self::child_specials(tree, left, s, t);
                let (rs, rt, rsum) = Self::child_specials(tree, right, s, t);
                let lc = self.lookup(left, a, ls, lt);
                if lc >= self.infinity {
                    return (self.infinity, NO_SPLIT, 0);
                }
                // left = (a, S_L, -(a + S_L)); right = (-(b + S_R), S_R, b)
                let rc = self.lookup(right, -(b + rsum), rs, rt);
                (self.add(lc, rc), NO_SPLIT, 0)
            }
            NodeKind::Parallel { left, right } => {
                let (ls, lt, s1) = Self::child_specials(tree, left, s, t);
                let (rs, rt, _) = Self::child_specials(tree, right, s, t);
                // child1 = (r, S1, -(r + S1)); child2 = (a - r, S2, b + r + S1)
                let mut best = self.infinity;
                let mut best_split = NO_SPLIT;
                let mut evals = 0;
                let mut try_split = |i: usize, r: i64| {
                    evals += 1;
                    let c1 = self.lookup(left, r, ls, lt);
                    if c1 >= best {
                        return;
                    }
                    let c = self.add(c1, self.lookup(right, a - r, rs, rt));
                    if c < best {
                        best = c;
                        best_split = i as u32;
                    }
                };
                match &self.domain {
                    ResidueDomain::Interval { bound } => {
                        // only splits keeping all four child residues in range
                        let f = *bound as i64;
                        let lo = (-f).max(a - f).max(-f - s1).max(-f - b - s1);
                        let hi = f.min(a + f).min(f - s1).min(f - b - s1);
                        for r in lo..=hi {
                            try_split((r + f) as usize, r);
                        }
                    }
                    ResidueDomain::Lattice { values } => {
                        for (i, &r) in values.iter().enumerate() {
                            try_split(i, r);
                        }
                    }
                }
                (best, best_split, evals)
            }
        }
    }

    fn check_tuple(&self, tree: &DecompTree, id: NodeId, tuple: &ResidueTuple) -> Result<(), DpError> {
        let sp = tree.node(id).specials;
        if sp.s != tuple.s.is_some() || sp.t != tuple.t.is_some() {
            return Err(DpError::SpecialsMismatch { node: id, tuple: *tuple });
        }
        if tuple.sum() != 0 {
            return Err(DpError::NonZeroSum(*tuple));
        }
        Ok(())
    }

    fn in_domain(&self, tuple: &ResidueTuple) -> bool {
        tuple.values().all(|v| self.domain.contains(v))
    }

    fn wrap(&self, cost: u64) -> Cost {
        if cost >= self.infinity {
            Cost::Infinite
        } else {
            Cost::Finite(cost)
        }
    }

    /// Stored value of `tuple` at node `id`. Tuples outside the domain or
    /// outside a pinned scope are infinite.
    pub fn entry(&self, tree: &DecompTree, id: NodeId, tuple: &ResidueTuple) -> Result<Cost, DpError> {
        self.check_tuple(tree, id, tuple)?;
        if !self.in_domain(tuple) {
            return Ok(Cost::Infinite);
        }
        Ok(self.wrap(self.lookup(id, tuple.a, tuple.s.unwrap_or(0), tuple.t.unwrap_or(0))))
    }

    fn combine(&self, tree: &DecompTree, id: NodeId, tuple: &ResidueTuple) -> Result<DpEntry, DpError> {
        self.check_tuple(tree, id, tuple)?;
        if !self.in_domain(tuple) {
            return Ok(DpEntry { cost: Cost::Infinite, choice: Choice::Series });
        }
        let (cost, split, _) = self.evaluate(tree, id, tuple.a, tuple.s.unwrap_or(0), tuple.t.unwrap_or(0), tuple.b);
        let choice = match tree.node(id).kind {
            NodeKind::Parallel { .. } => {
                Choice::Parallel { split: (split != NO_SPLIT).then(|| self.domain.value(split as usize)) }
            }
            NodeKind::Series { .. } => Choice::Series,
            NodeKind::Leaf { .. } => Choice::Leaf { bought: tuple.a != 0 && cost < self.infinity },
        };
        Ok(DpEntry { cost: self.wrap(cost), choice })
    }

    /// Recomputes the series recurrence at `id` from the stored child values.
    pub fn combine_series(&self, tree: &DecompTree, id: NodeId, tuple: &ResidueTuple) -> Result<DpEntry, DpError> {
        if !matches!(tree.node(id).kind, NodeKind::Series { .. }) {
            return Err(DpError::WrongNodeKind { node: id, expected: "series" });
        }
        self.combine(tree, id, tuple)
    }

    /// Recomputes the parallel recurrence at `id` from the stored child values,
    /// breaking ties toward the smallest split.
    pub fn combine_parallel(&self, tree: &DecompTree, id: NodeId, tuple: &ResidueTuple) -> Result<DpEntry, DpError> {
        if !matches!(tree.node(id).kind, NodeKind::Parallel { .. }) {
            return Err(DpError::WrongNodeKind { node: id, expected: "parallel" });
        }
        self.combine(tree, id, tuple)
    }

    /// Tuple at the root for pushing `flow` units from source to sink.
    pub fn root_tuple(tree: &DecompTree, flow: u64) -> ResidueTuple {
        let v = flow as i64;
        let (x, y) = tree.terminals();
        let at = |w| {
            if w == tree.source() {
                -v
            } else if w == tree.sink() {
                v
            } else {
                0
            }
        };
        let sp = tree.node(tree.root()).specials;
        ResidueTuple { a: at(x), s: sp.s.then_some(-v), t: sp.t.then_some(v), b: at(y) }
    }

    fn check_flow(&self, flow: u64) -> Result<(), DpError> {
        if let TableScope::Pinned { flow: pinned } = self.scope {
            if pinned != flow {
                return Err(DpError::ScopeMismatch { flow, pinned });
            }
        }
        let bound = self.domain.bound();
        if flow > bound {
            return Err(DpError::FlowOutOfRange { flow, bound });
        }
        Ok(())
    }

    /// Minimum cost of an edge set that can route `flow` from source to sink.
    pub fn min_cost(&self, tree: &DecompTree, flow: u64) -> Result<Cost, DpError> {
        self.check_flow(flow)?;
        self.entry(tree, tree.root(), &Self::root_tuple(tree, flow))
    }

    /// Minimum cost and a cheapest edge set for routing `flow`, or `None` if
    /// no edge set can.
    pub fn query(&self, tree: &DecompTree, flow: u64) -> Result<Option<(u64, EdgeSet)>, DpError> {
        let tuple = Self::root_tuple(tree, flow);
        match self.min_cost(tree, flow)? {
            Cost::Infinite => Ok(None),
            Cost::Finite(c) => Ok(Some((c, self.reconstruct(tree, tree.root(), &tuple)?))),
        }
    }

    /// Walks the recorded choices down from `tuple` at `id` and collects the
    /// edges that carry nonzero residue.
    pub fn reconstruct(&self, tree: &DecompTree, id: NodeId, tuple: &ResidueTuple) -> Result<EdgeSet, DpError> {
        if self.entry(tree, id, tuple)? == Cost::Infinite {
            return Err(DpError::Infeasible { node: id, tuple: *tuple });
        }
        let mut set = EdgeSet::empty(tree.edges().len());
        let mut stack = vec![(id, tuple.a, tuple.s.unwrap_or(0), tuple.t.unwrap_or(0), tuple.b)];
        while let Some((x, a, s, t, b)) = stack.pop() {
            match tree.node(x).kind {
                NodeKind::Leaf { edge } => {
                    if a != 0 {
                        set.insert(edge);
                    }
                }
                NodeKind::Series { left, right, .. } => {
                    let (ls, lt, lsum) = Self::child_specials(tree, left, s, t);
                    let (rs, rt, rsum) = Self::child_specials(tree, right, s, t);
                    stack.push((left, a, ls, lt, -(a + lsum)));
                    stack.push((right, -(b + rsum), rs, rt, b));
                }
                NodeKind::Parallel { left, right } => {
                    let idx = self.layouts[x].index(&self.domain, a, s, t).expect("reachable tuple is indexed");
                    let split = self.splits[x][idx];
                    if split == NO_SPLIT {
                        let tuple = ResidueTuple::new(a, None, None, b);
                        return Err(DpError::Infeasible { node: x, tuple });
                    }
                    let r = self.domain.value(split as usize);
                    let (ls, lt, s1) = Self::child_specials(tree, left, s, t);
                    let (rs, rt, _) = Self::child_specials(tree, right, s, t);
                    stack.push((left, r, ls, lt, -(r + s1)));
                    stack.push((right, a - r, rs, rt, b + r + s1));
                }
            }
        }
        Ok(set)
    }

    pub fn domain(&self) -> &ResidueDomain {
        &self.domain
    }

    pub fn scope(&self) -> TableScope {
        self.scope
    }

    pub fn stats(&self) -> &TableStats {
        &self.stats
    }

    /// The finite-cost sentinel: one more than the total edge cost.
    pub fn infinity(&self) -> u64 {
        self.infinity
    }

    /// Allocated slots at node `id`, admissible or not.
    pub fn node_slots(&self, id: NodeId) -> usize {
        self.layouts[id].len
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose;
    use crate::graph::{circulation_feasible, EdgeRecord, MultiGraph, ResidueAssignment};

    fn i1() -> MultiGraph {
        MultiGraph::new(2, vec![EdgeRecord::new("e1", 0, 1, 5, 7)], 0, 1, None).unwrap()
    }

    fn i2() -> MultiGraph {
        let edges = vec![
            EdgeRecord::new("e1", 0, 1, 1, 2),
            EdgeRecord::new("e2", 1, 2, 1, 2),
            EdgeRecord::new("e3", 0, 2, 3, 1),
        ];
        MultiGraph::new(3, edges, 0, 2, None).unwrap()
    }

    fn i3() -> MultiGraph {
        let edges = vec![
            EdgeRecord::new("e1", 0, 1, 1, 1),
            EdgeRecord::new("e2", 1, 2, 1, 2),
            EdgeRecord::new("e3", 2, 3, 1, 1),
            EdgeRecord::new("e4", 0, 3, 1, 1),
        ];
        MultiGraph::new(4, edges, 1, 2, Some((0, 3))).unwrap()
    }

    fn full(tree: &DecompTree, f: u64) -> DpTable {
        build_table(tree, ResidueDomain::interval(f), TableScope::Full)
    }

    #[test]
    fn leaf_costs() {
        let e = EdgeRecord::new("e1", 0, 1, 5, 7);
        assert_eq!(leaf_cost(&e, &ResidueTuple::pair(0, 0)), Ok(Cost::Finite(0)));
        assert_eq!(leaf_cost(&e, &ResidueTuple::pair(7, -7)), Ok(Cost::Finite(5)));
        assert_eq!(leaf_cost(&e, &ResidueTuple::pair(-3, 3)), Ok(Cost::Finite(5)));
        assert_eq!(leaf_cost(&e, &ResidueTuple::pair(8, -8)), Ok(Cost::Infinite));
        assert!(leaf_cost(&e, &ResidueTuple::pair(1, 1)).is_err());
    }

    #[test]
    fn single_edge_table() {
        let tree = decompose(&i1()).unwrap();
        let table = full(&tree, 7);
        assert_eq!(table.min_cost(&tree, 7), Ok(Cost::Finite(5)));
        assert_eq!(table.min_cost(&tree, 0), Ok(Cost::Finite(0)));
        assert_eq!(table.stats().entries, 15);
    }

    #[test]
    fn diamond_root_and_series_values() {
        let g = i2();
        let g = MultiGraph::new(3, g.edges().to_vec(), 0, 2, Some((0, 2))).unwrap();
        let tree = decompose(&g).unwrap();
        let table = full(&tree, 3);
        let root = tree.root();
        let (x, _) = tree.terminals();
        let sign = if x == 0 { 1 } else { -1 };
        // residues written for terminals (0, 2): source side first
        let at = |r0: i64| ResidueTuple::pair(-sign * r0, sign * r0);
        assert_eq!(table.entry(&tree, root, &at(3)), Ok(Cost::Finite(5)));
        assert_eq!(table.entry(&tree, root, &at(2)), Ok(Cost::Finite(2)));
        assert_eq!(table.entry(&tree, root, &at(1)), Ok(Cost::Finite(2)));
        let series = tree.nodes().iter().position(|n| matches!(n.kind, NodeKind::Series { .. })).unwrap();
        assert_eq!(table.entry(&tree, series, &at(2)), Ok(Cost::Finite(2)));
        assert_eq!(table.entry(&tree, series, &at(3)), Ok(Cost::Infinite));
        let (cost, set) = table.query(&tree, 3).unwrap().unwrap();
        assert_eq!((cost, set.len()), (5, 3));
    }

    #[test]
    fn four_cycle_interior_specials() {
        let g = i3();
        let tree = decompose(&g).unwrap();
        let table = full(&tree, 3);
        let t = ResidueTuple::new(0, Some(-3), Some(3), 0);
        assert_eq!(table.entry(&tree, tree.root(), &t), Ok(Cost::Finite(4)));
        let t2 = ResidueTuple::new(0, Some(-2), Some(2), 0);
        assert_eq!(table.entry(&tree, tree.root(), &t2), Ok(Cost::Finite(1)));
        let (c, set) = table.query(&tree, 2).unwrap().unwrap();
        assert_eq!((c, set.to_vec()), (1, vec![1]));
        assert!(table.entry(&tree, tree.root(), &ResidueTuple::pair(0, 0)).is_err());
    }

    #[test]
    fn combine_matches_stored_entries() {
        let tree = decompose(&i3()).unwrap();
        let table = full(&tree, 3);
        let root = tree.root();
        for s in -3..=3i64 {
            for t in -3..=3i64 {
                for a in -3..=3i64 {
                    let tuple = ResidueTuple::new(a, Some(s), Some(t), -(a + s + t));
                    let stored = table.entry(&tree, root, &tuple).unwrap();
                    let entry = table.combine_parallel(&tree, root, &tuple).unwrap();
                    assert_eq!(stored, entry.cost);
                }
            }
        }
        assert!(table.combine_series(&tree, root, &ResidueTuple::new(0, Some(0), Some(0), 0)).is_err());
    }

    #[test]
    fn entries_are_sound_and_minimal() {
        for g in [i2(), i3()] {
            let tree = decompose(&g).unwrap();
            let table = full(&tree, 3);
            let m = g.edge_count();
            for id in tree.postorder() {
                let node = tree.node(id);
                let (x, y) = node.terminals;
                let leaves = tree.leaf_edges(id);
                let sv: Vec<i64> = if node.specials.s { (-3..=3).collect() } else { vec![0] };
                let tv: Vec<i64> = if node.specials.t { (-3..=3).collect() } else { vec![0] };
                for a in -3..=3i64 {
                    for &s in &sv {
                        for &t in &tv {
                            let b = -(a + s + t);
                            if b.abs() > 3 {
                                continue;
                            }
                            let tuple =
                                ResidueTuple::new(a, node.specials.s.then_some(s), node.specials.t.then_some(t), b);
                            let mut res = ResidueAssignment::from_pairs([(x, a), (y, b)]);
                            res.add(g.source(), s);
                            res.add(g.sink(), t);
                            let brute = (0..1u64 << leaves.len())
                                .filter_map(|bits| {
                                    let set = EdgeSet::from_indices(
                                        m,
                                        leaves.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &e)| e),
                                    );
                                    circulation_feasible(&g, &set, &res).then(|| g.cost_of(&set))
                                })
                                .min();
                            let got = table.entry(&tree, id, &tuple).unwrap();
                            assert_eq!(got.finite(), brute, "node {id} tuple {tuple}");
                            if let Cost::Finite(c) = got {
                                let set = table.reconstruct(&tree, id, &tuple).unwrap();
                                assert_eq!(g.cost_of(&set), c);
                                assert!(circulation_feasible(&g, &set, &res));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pinned_agrees_with_full() {
        for g in [i2(), i3()] {
            let tree = decompose(&g).unwrap();
            let table = full(&tree, 3);
            for v in 0..=3 {
                let pinned = build_table(&tree, ResidueDomain::interval(3), TableScope::Pinned { flow: v });
                assert_eq!(pinned.min_cost(&tree, v), table.min_cost(&tree, v));
                assert!(pinned.stats().entries <= table.stats().entries);
                assert_eq!(
                    pinned.min_cost(&tree, (v + 1) % 4),
                    Err(DpError::ScopeMismatch { flow: (v + 1) % 4, pinned: v })
                );
            }
            assert!(matches!(table.min_cost(&tree, 4), Err(DpError::FlowOutOfRange { .. })));
        }
    }

    #[test]
    fn lattice_domain_restricts_values() {
        let tree = decompose(&i2()).unwrap();
        // only even residues: e3 (capacity 1) can never be used alone
        let table = build_table(&tree, ResidueDomain::lattice([-2, 2]), TableScope::Full);
        assert_eq!(table.min_cost(&tree, 2), Ok(Cost::Finite(2)));
        assert_eq!(table.min_cost(&tree, 1), Ok(Cost::Infinite));
    }
}
