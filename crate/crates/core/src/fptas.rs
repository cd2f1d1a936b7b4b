//! Approximation scheme for budget-constrained max flow by capacity scaling.
//!
//! For a scale level `M`, every capacity becomes `floor(m * u / (M * eps'))`
//! and the exact table answers one question: can some edge set within budget
//! route `R = ceil(m / eps')` units under the scaled capacities? Larger `M`
//! only shrinks capacities, so the answers along the ladder
//! `1, (1+eps'), (1+eps')^2, ...` are YES then NO, and a binary search finds
//! the last YES. The table for each question is bounded by `R`, not by the
//! original capacities.

use std::fmt;
use std::str::FromStr;

use log::debug;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::decompose::{decompose, DecompTree};
use crate::dp::{upper_bound_flow, DpSolver, ResidueDomain, SolveError, TableMode};
use crate::graph::{EdgeSet, MultiGraph, Objective, ProblemInstance, ProblemKind, Solution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FptasError {
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(String),
    #[error("cannot parse epsilon {0:?}: expected p/q or a decimal")]
    BadEpsilon(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Parses `p/q`, an integer, or a plain decimal such as `0.125` into an
/// exact positive rational.
pub fn parse_epsilon(text: &str) -> Result<BigRational, FptasError> {
    let bad = || FptasError::BadEpsilon(text.to_string());
    let text = text.trim();
    let value = if let Some((p, q)) = text.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        BigRational::new(p, q)
    } else {
        let (neg, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        let v = BigRational::new(numer, denom);
        if neg {
            -v
        } else {
            v
        }
    };
    if !value.is_positive() {
        return Err(FptasError::NonPositiveEpsilon(text.to_string()));
    }
    Ok(value)
}

/// The accuracy parameters of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleParams {
    pub epsilon: BigRational,
    /// `min(1, epsilon / 3)`.
    pub epsilon_prime: BigRational,
    /// `ceil(m / epsilon')`, the flow every scaled question asks for.
    pub target: u64,
}

impl ScaleParams {
    pub fn new(m: usize, epsilon: &BigRational) -> Result<Self, FptasError> {
        if !epsilon.is_positive() {
            return Err(FptasError::NonPositiveEpsilon(epsilon.to_string()));
        }
        let third = epsilon / BigRational::from_integer(BigInt::from(3));
        let epsilon_prime = if third > BigRational::one() { BigRational::one() } else { third };
        let target = (BigRational::from_integer(BigInt::from(m)) / &epsilon_prime).ceil().to_integer();
        let target = target.to_u64().unwrap_or(u64::MAX);
        Ok(ScaleParams { epsilon: epsilon.clone(), epsilon_prime, target })
    }
}

/// `floor(m * u / (M * epsilon'))`, saturating at `u64::MAX`.
pub fn scale_capacity(m: usize, capacity: u64, level: &BigRational, epsilon_prime: &BigRational) -> u64 {
    assert!(level >= &BigRational::one(), "scale level must be at least 1");
    let numer = BigRational::from_integer(BigInt::from(m) * BigInt::from(capacity));
    (numer / (level * epsilon_prime)).floor().to_integer().to_u64().unwrap_or(u64::MAX)
}

/// Scaled capacity of every edge of `graph`, in edge order.
pub fn scale_capacities(graph: &MultiGraph, level: &BigRational, epsilon_prime: &BigRational) -> Vec<u64> {
    let m = graph.edge_count();
    graph.edges().iter().map(|e| scale_capacity(m, e.capacity, level, epsilon_prime)).collect()
}

/// Scale levels `(1+eps')^j` not exceeding `max_flow`, starting at 1.
pub fn ladder(epsilon_prime: &BigRational, max_flow: u64) -> Vec<BigRational> {
    let cap = BigRational::from_integer(BigInt::from(max_flow));
    let step = BigRational::one() + epsilon_prime;
    let mut levels = Vec::new();
    let mut level = BigRational::one();
    while level <= cap {
        let next = &level * &step;
        levels.push(level);
        level = next;
    }
    levels
}

/// How the returned solution was obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FptasPath {
    /// Max flow is at most the target, so the exact table was used.
    Exact,
    /// The largest ladder level whose scaled question answered YES.
    Ladder { index: usize, level: BigRational },
    /// Even level 1 answered NO, which forces OPT <= 1; the exact answer
    /// for one unit (or the empty set) was returned.
    UnitFallback,
}

impl fmt::Display for FptasPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FptasPath::Exact => f.write_str("exact"),
            FptasPath::Ladder { index, level } => write!(f, "ladder[{index}]={level}"),
            FptasPath::UnitFallback => f.write_str("unit-fallback"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FptasOutcome {
    pub solution: Solution,
    pub params: ScaleParams,
    pub path: FptasPath,
    pub ladder_len: usize,
    /// Admissible tuples in each scaled question's table, in query order.
    pub query_entries: Vec<u64>,
}

/// Answers one scaled question at `level`, returning a witnessing edge set.
pub fn scaled_query(
    graph: &MultiGraph,
    tree: &DecompTree,
    budget: u64,
    params: &ScaleParams,
    level: &BigRational,
) -> Result<(Option<EdgeSet>, u64), SolveError> {
    let caps = scale_capacities(graph, level, &params.epsilon_prime);
    let solver =
        DpSolver::with_domain(graph, tree.clone(), caps, ResidueDomain::interval(params.target), TableMode::Pinned);
    let found = solver.cheapest_set(params.target)?.and_then(|(c, set)| (c <= budget).then_some(set));
    Ok((found, solver.stats().entries))
}

/// Budget-constrained max flow within a factor `1 + epsilon` of optimal.
pub fn fptas_bcmfp(instance: &ProblemInstance, epsilon: &BigRational) -> Result<FptasOutcome, FptasError> {
    let graph = &instance.graph;
    if !instance.upgrades.is_empty() {
        return Err(SolveError::UnexpandedUpgrades(instance.upgrades.len()).into());
    }
    let Objective::Budget(budget) = instance.objective else {
        let found = instance.objective.kind();
        return Err(SolveError::WrongObjective { expected: ProblemKind::Bcmfp, found }.into());
    };
    let params = ScaleParams::new(graph.edge_count(), epsilon)?;
    let tree = decompose(graph).map_err(SolveError::from)?;
    let max_flow = upper_bound_flow(graph);

    if max_flow <= params.target {
        let solver =
            DpSolver::with_domain(graph, tree, graph.capacities(), ResidueDomain::interval(max_flow), TableMode::Auto);
        let solution = solver.bcmfp(budget)?;
        let entries = solver.stats().entries;
        return Ok(FptasOutcome {
            solution,
            params,
            path: FptasPath::Exact,
            ladder_len: 0,
            query_entries: vec![entries],
        });
    }

    let levels = ladder(&params.epsilon_prime, max_flow);
    debug!("fptas: target {}, {} ladder levels", params.target, levels.len());
    let mut query_entries = Vec::new();
    let mut ask = |j: usize| -> Result<Option<EdgeSet>, SolveError> {
        let (found, entries) = scaled_query(graph, &tree, budget, &params, &levels[j])?;
        query_entries.push(entries);
        Ok(found)
    };

    let Some(mut witness) = ask(0)? else {
        let solver = DpSolver::with_domain(
            graph,
            tree.clone(),
            graph.capacities(),
            ResidueDomain::interval(1),
            TableMode::Pinned,
        );
        let set = match solver.cheapest_set(1)? {
            Some((c, set)) if c <= budget => set,
            _ => EdgeSet::empty(graph.edge_count()),
        };
        return Ok(FptasOutcome {
            solution: Solution::evaluate(graph, set),
            params,
            path: FptasPath::UnitFallback,
            ladder_len: levels.len(),
            query_entries,
        });
    };
    // invariant: level lo answers YES, every level above hi answers NO
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        match ask(mid)? {
            Some(set) => {
                lo = mid;
                witness = set;
            }
            None => hi = mid - 1,
        }
    }
    Ok(FptasOutcome {
        solution: Solution::evaluate(graph, witness),
        path: FptasPath::Ladder { index: lo, level: levels[lo].clone() },
        params,
        ladder_len: levels.len(),
        query_entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_instance, EdgeRecord};

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn i2(budget: u64) -> ProblemInstance {
        let text = "graph 3\nsource 0\nsink 2\nedge e1 0 1 1 2\nedge e2 1 2 1 2\nedge e3 0 2 3 1\n";
        parse_instance(&format!("{text}budget {budget}\n")).unwrap()
    }

    #[test]
    fn parses_epsilon_exactly() {
        assert_eq!(parse_epsilon("1/10").unwrap(), rat(1, 10));
        assert_eq!(parse_epsilon("0.1").unwrap(), rat(1, 10));
        assert_eq!(parse_epsilon("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_epsilon("2").unwrap(), rat(2, 1));
        assert_eq!(parse_epsilon(".5").unwrap(), rat(1, 2));
        assert!(matches!(parse_epsilon("0"), Err(FptasError::NonPositiveEpsilon(_))));
        assert!(matches!(parse_epsilon("-1/2"), Err(FptasError::NonPositiveEpsilon(_))));
        assert!(matches!(parse_epsilon("abc"), Err(FptasError::BadEpsilon(_))));
        assert!(matches!(parse_epsilon("1/0"), Err(FptasError::BadEpsilon(_))));
        assert!(matches!(parse_epsilon("."), Err(FptasError::BadEpsilon(_))));
    }

    #[test]
    fn params() {
        let p = ScaleParams::new(10, &rat(1, 10)).unwrap();
        assert_eq!((p.epsilon_prime.clone(), p.target), (rat(1, 30), 300));
        let p = ScaleParams::new(4, &rat(6, 1)).unwrap();
        assert_eq!((p.epsilon_prime.clone(), p.target), (rat(1, 1), 4));
        let p = ScaleParams::new(3, &rat(1, 2)).unwrap();
        assert_eq!(p.target, 18);
    }

    #[test]
    fn scaling_examples() {
        assert_eq!(scale_capacity(3, 9, &rat(3, 1), &rat(1, 1)), 9);
        assert_eq!(scale_capacity(3, 9, &rat(2, 1), &rat(1, 2)), 27);
        // independent floor: 4 * 10^6 * 3 / (5 * 10^5) = 24 exactly
        let direct = (4u128 * 1_000_000 * 3) / 500_000;
        assert_eq!(scale_capacity(4, 1_000_000, &rat(500_000, 1), &rat(1, 3)), direct as u64);
        assert_eq!(scale_capacity(2, u64::MAX, &rat(1, 1), &rat(1, 3)), u64::MAX);
    }

    #[test]
    fn ladder_levels() {
        let l = ladder(&rat(1, 1), 10);
        assert_eq!(l, vec![rat(1, 1), rat(2, 1), rat(4, 1), rat(8, 1)]);
        let l = ladder(&rat(1, 2), 3);
        assert_eq!(l, vec![rat(1, 1), rat(3, 2), rat(9, 4)]);
        assert!(ladder(&rat(1, 1), 0).is_empty());
    }

    #[test]
    fn small_instances_are_exact() {
        let out = fptas_bcmfp(&i2(5), &rat(1, 1)).unwrap();
        assert_eq!(out.solution.achieved_flow, 3);
        assert_eq!(out.path, FptasPath::Exact);
        let out = fptas_bcmfp(&i2(2), &rat(1, 2)).unwrap();
        assert!(out.solution.total_cost <= 2);
        assert!(rat(out.solution.achieved_flow as i64, 1) * rat(3, 2) >= rat(2, 1));
        assert!(fptas_bcmfp(&i2(2), &rat(0, 1)).is_err());
    }

    fn big_diamond(scale: u64, budget: u64) -> ProblemInstance {
        let edges = vec![
            EdgeRecord::new("e1", 0, 1, 1, 2 * scale),
            EdgeRecord::new("e2", 1, 2, 1, 2 * scale),
            EdgeRecord::new("e3", 0, 2, 3, scale),
            EdgeRecord::new("e4", 0, 2, 2, scale / 2 + 1),
        ];
        let g = MultiGraph::new(3, edges, 0, 2, None).unwrap();
        ProblemInstance::new(g, Objective::Budget(budget))
    }

    #[test]
    fn ladder_path_meets_guarantee() {
        for budget in 0..=8 {
            let inst = big_diamond(1000, budget);
            let g = &inst.graph;
            let opt = (0..16u64)
                .map(|bits| EdgeSet::from_bits(4, bits))
                .filter(|set| g.cost_of(set) <= budget)
                .map(|set| crate::graph::max_flow(g, &set).value)
                .max()
                .unwrap();
            for eps in [rat(1, 10), rat(1, 2), rat(1, 1)] {
                let out = fptas_bcmfp(&inst, &eps).unwrap();
                let s = &out.solution;
                assert!(s.total_cost <= budget);
                let lhs = rat(s.achieved_flow as i64, 1) * (BigRational::one() + &eps);
                assert!(lhs >= rat(opt as i64, 1), "budget {budget} eps {eps}: {} vs {opt}", s.achieved_flow);
                if opt <= 1 {
                    assert_eq!(out.path, FptasPath::UnitFallback);
                } else {
                    assert!(matches!(out.path, FptasPath::Ladder { .. }));
                }
            }
        }
    }

    #[test]
    fn full_budget_gets_full_flow() {
        let inst = big_diamond(1000, 100);
        let out = fptas_bcmfp(&inst, &rat(1, 2)).unwrap();
        assert_eq!(out.solution.achieved_flow, upper_bound_flow(&inst.graph));
    }

    #[test]
    fn ladder_answers_are_monotone() {
        for budget in [1, 2, 3, 5] {
            let inst = big_diamond(500, budget);
            let tree = decompose(&inst.graph).unwrap();
            let params = ScaleParams::new(4, &rat(1, 2)).unwrap();
            let levels = ladder(&params.epsilon_prime, upper_bound_flow(&inst.graph));
            let answers: Vec<bool> = levels
                .iter()
                .map(|l| scaled_query(&inst.graph, &tree, budget, &params, l).unwrap().0.is_some())
                .collect();
            let first_no = answers.iter().position(|a| !a).unwrap_or(answers.len());
            assert!(answers[first_no..].iter().all(|a| !a), "{answers:?}");
        }
    }

    #[test]
    fn query_size_independent_of_capacities() {
        let a = fptas_bcmfp(&big_diamond(1000, 3), &rat(1, 2)).unwrap();
        let b = fptas_bcmfp(&big_diamond(1_000_000, 3), &rat(1, 2)).unwrap();
        assert_eq!(a.query_entries.iter().max(), b.query_entries.iter().max());
        assert!(b.ladder_len > a.ladder_len);
    }
}
