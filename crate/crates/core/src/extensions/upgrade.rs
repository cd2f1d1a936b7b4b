//! Replacing an edge with a menu of cost/capacity upgrades by a nested
//! series-parallel gadget in which buying more than one option never helps.
//!
//! With the menu sorted by capacity `u_1 <= ... <= u_k`, the gadget between
//! endpoints `x = x_k` and `y = y_k` is built inward: level `j` (from `k` down
//! to 2) adds guard edges `x_j - x_{j-1}` and `y_{j-1} - y_j` of cost 0 and
//! capacity `u_j`, and option `j` (for `j >= 3`) as an edge `x_{j-1} - y_{j-1}`
//! wrapped around everything inside. Options 1 and 2 sit in parallel between
//! `x_1` and `y_1`. Everything behind the level-`j` guards is capped at `u_j`,
//! so the best purchase contains one option plus the guards outside it.

use std::collections::BTreeMap;

use log::warn;

use super::ExtensionError;
use crate::graph::{
    max_flow, EdgeIdx, EdgeRecord, EdgeSet, MultiGraph, ProblemInstance, Solution, UpgradeEdge, VertexId,
};

/// A menu sorted by capacity (ties by cost) with equal-capacity duplicates
/// removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpgradeMenu {
    pub id: String,
    pub endpoints: (VertexId, VertexId),
    /// `(cost, capacity)`, capacities strictly increasing.
    pub choices: Vec<(u64, u64)>,
    /// Position (1-based) of each kept choice in the input menu.
    pub input_index: Vec<usize>,
}

impl UpgradeMenu {
    pub fn from_upgrade(up: &UpgradeEdge) -> Result<Self, ExtensionError> {
        if up.choices.is_empty() {
            return Err(ExtensionError::EmptyMenu(up.id.clone()));
        }
        let mut order: Vec<usize> = (0..up.choices.len()).collect();
        order.sort_by_key(|&i| (up.choices[i].1, up.choices[i].0, i));
        let mut choices: Vec<(u64, u64)> = Vec::new();
        let mut input_index = Vec::new();
        for i in order {
            let (c, u) = up.choices[i];
            if choices.last().is_some_and(|&(_, last_u)| last_u == u) {
                warn!("upgrade {}: option {} duplicates an equal-capacity cheaper option; dropped", up.id, i + 1);
                continue;
            }
            choices.push((c, u));
            input_index.push(i + 1);
        }
        Ok(UpgradeMenu { id: up.id.clone(), endpoints: (up.u, up.v), choices, input_index })
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }
}

/// Where one gadget's edges ended up in the expanded graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gadget {
    pub menu: UpgradeMenu,
    /// Expanded edge of each sorted choice.
    pub choice_edges: Vec<EdgeIdx>,
    /// Guard pair of level `j` at position `j - 2`.
    pub guard_edges: Vec<(EdgeIdx, EdgeIdx)>,
    /// Vertices created for this gadget.
    pub new_vertices: Vec<VertexId>,
}

impl Gadget {
    /// Guard levels a purchase of sorted choice `i` (0-based) relies on.
    fn guards_for(&self, i: usize) -> impl Iterator<Item = (EdgeIdx, EdgeIdx)> + '_ {
        let first_level = (i + 1).max(2);
        self.guard_edges.iter().copied().skip(first_level - 2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetMap {
    pub gadgets: Vec<Gadget>,
    /// The instance with every upgrade edge collapsed to nothing, used to
    /// rebuild interpreted instances.
    base: ProblemInstance,
}

/// Replaces every upgrade edge by its gadget. Ordinary edges keep their
/// indices; gadget edges follow in upgrade order.
pub fn expand_upgrades(instance: &ProblemInstance) -> Result<(ProblemInstance, GadgetMap), ExtensionError> {
    let g = &instance.graph;
    let mut edges = g.edges().to_vec();
    let mut n = g.vertex_count();
    let mut gadgets = Vec::new();
    for up in &instance.upgrades {
        let menu = UpgradeMenu::from_upgrade(up)?;
        let k = menu.len();
        let (x, y) = menu.endpoints;
        let mut push = |id: String, a: VertexId, b: VertexId, (c, u): (u64, u64)| {
            edges.push(EdgeRecord::new(id, a, b, c, u));
            edges.len() - 1
        };
        if k == 1 {
            let e = push(menu.id.clone(), x, y, menu.choices[0]);
            gadgets.push(Gadget { menu, choice_edges: vec![e], guard_edges: Vec::new(), new_vertices: Vec::new() });
            continue;
        }
        // xs[j-1], ys[j-1] hold x_j, y_j
        let mut xs = vec![0; k];
        let mut ys = vec![0; k];
        let mut new_vertices = Vec::new();
        xs[k - 1] = x;
        ys[k - 1] = y;
        for j in 0..k - 1 {
            xs[j] = n;
            ys[j] = n + 1;
            new_vertices.extend([n, n + 1]);
            n += 2;
        }
        let mut choice_edges = vec![0; k];
        let mut guard_edges = vec![(0, 0); k - 1];
        for j in (2..=k).rev() {
            let u = menu.choices[j - 1].1;
            let ga = push(format!("{}#g{j}a", menu.id), xs[j - 1], xs[j - 2], (0, u));
            let gb = push(format!("{}#g{j}b", menu.id), ys[j - 2], ys[j - 1], (0, u));
            guard_edges[j - 2] = (ga, gb);
            if j >= 3 {
                choice_edges[j - 1] = push(format!("{}#c{j}", menu.id), xs[j - 2], ys[j - 2], menu.choices[j - 1]);
            }
        }
        for j in [1, 2] {
            choice_edges[j - 1] = push(format!("{}#c{j}", menu.id), xs[0], ys[0], menu.choices[j - 1]);
        }
        gadgets.push(Gadget { menu, choice_edges, guard_edges, new_vertices });
    }
    let graph = MultiGraph::new(n, edges, g.source(), g.sink(), g.declared_terminals())?;
    let expanded = ProblemInstance { graph, objective: instance.objective, upgrades: Vec::new() };
    let base = ProblemInstance { upgrades: Vec::new(), ..instance.clone() };
    Ok((expanded, GadgetMap { gadgets, base }))
}

/// The option taken at one gadget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpgradeChoice {
    /// 0-based position in the sorted menu.
    pub sorted: usize,
    /// 1-based position in the input menu.
    pub input: usize,
    pub cost: u64,
    pub capacity: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpretation {
    /// One entry per gadget, in upgrade order.
    pub choices: Vec<Option<UpgradeChoice>>,
    /// The expanded purchase with only the chosen options and their guards.
    pub normalized: Solution,
    /// The original instance with each upgrade replaced by its chosen option.
    pub interpreted: ProblemInstance,
    pub interpreted_solution: Solution,
}

impl Interpretation {
    /// `UPGRADE <id> choice=<i>` lines, `choice=none` when nothing was bought.
    pub fn upgrade_lines(&self, map: &GadgetMap) -> Vec<String> {
        map.gadgets
            .iter()
            .zip(&self.choices)
            .map(|(g, c)| match c {
                Some(c) => format!("UPGRADE {} choice={}", g.menu.id, c.input),
                None => format!("UPGRADE {} choice=none", g.menu.id),
            })
            .collect()
    }
}

/// Reads an expanded purchase back as one option per upgrade edge.
///
/// The highest purchased option of each gadget is taken; cheaper options
/// bought alongside it are dropped and missing zero-cost guards are added.
/// The interpreted instance must then route at least the purchase's flow at
/// no more than its cost.
pub fn map_back(expanded: &MultiGraph, solution: &Solution, map: &GadgetMap) -> Result<Interpretation, ExtensionError> {
    let base_m = map.base.graph.edge_count();
    let mut normalized =
        EdgeSet::from_indices(expanded.edge_count(), solution.purchased.iter().filter(|&e| e < base_m));
    let mut choices = Vec::new();
    for gadget in &map.gadgets {
        let picked = (0..gadget.menu.len()).rev().find(|&i| solution.purchased.contains(gadget.choice_edges[i]));
        if let Some(i) = picked {
            normalized.insert(gadget.choice_edges[i]);
            for (a, b) in gadget.guards_for(i) {
                normalized.insert(a);
                normalized.insert(b);
            }
        }
        choices.push(picked.map(|i| UpgradeChoice {
            sorted: i,
            input: gadget.menu.input_index[i],
            cost: gadget.menu.choices[i].0,
            capacity: gadget.menu.choices[i].1,
        }));
    }
    let normalized = Solution::evaluate(expanded, normalized);

    let base = &map.base.graph;
    let mut edges = base.edges().to_vec();
    let mut bought: Vec<EdgeIdx> = solution.purchased.iter().filter(|&e| e < base_m).collect();
    for (gadget, choice) in map.gadgets.iter().zip(&choices) {
        let (x, y) = gadget.menu.endpoints;
        let (c, u) = choice.map_or(gadget.menu.choices[0], |ch| (ch.cost, ch.capacity));
        edges.push(EdgeRecord::new(gadget.menu.id.clone(), x, y, c, u));
        if choice.is_some() {
            bought.push(edges.len() - 1);
        }
    }
    let graph = MultiGraph::new(base.vertex_count(), edges, base.source(), base.sink(), base.declared_terminals())?;
    let interpreted_solution = Solution::evaluate(&graph, EdgeSet::from_indices(graph.edge_count(), bought));
    let interpreted = ProblemInstance::new(graph, map.base.objective);

    let claimed = (solution.total_cost, max_flow(expanded, &solution.purchased).value);
    let got = (interpreted_solution.total_cost, interpreted_solution.achieved_flow);
    if got.0 > claimed.0
        || got.1 < claimed.1
        || normalized.total_cost > claimed.0
        || normalized.achieved_flow < claimed.1
    {
        return Err(ExtensionError::MapBackMismatch {
            expanded_cost: claimed.0,
            expanded_flow: claimed.1,
            interpreted_cost: got.0,
            interpreted_flow: got.1,
        });
    }
    Ok(Interpretation { choices, normalized, interpreted, interpreted_solution })
}

/// Number of guard and choice edges per gadget, by id suffix; used in
/// diagnostics.
pub fn gadget_edge_counts(map: &GadgetMap) -> BTreeMap<String, usize> {
    map.gadgets.iter().map(|g| (g.menu.id.clone(), g.choice_edges.len() + 2 * g.guard_edges.len())).collect()
}
