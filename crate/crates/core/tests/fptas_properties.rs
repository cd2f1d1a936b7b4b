mod common;

use num_rational::BigRational;
use num_traits::One;
use spnd_core::decompose::decompose;
use spnd_core::dp::upper_bound_flow;
use spnd_core::fptas::{fptas_bcmfp, ladder, parse_epsilon, scale_capacities, scaled_query, FptasPath, ScaleParams};
use spnd_core::graph::{Objective, ProblemInstance, ProblemKind};
use spnd_core::oracle::{generate_sp, GenParams, SubsetProfile};

fn epsilons() -> Vec<BigRational> {
    ["0.1", "0.5", "1"].iter().map(|e| parse_epsilon(e).unwrap()).collect()
}

fn meets_guarantee(flow: u64, eps: &BigRational, opt: u64) -> bool {
    BigRational::from_integer(flow.into()) * (BigRational::one() + eps) >= BigRational::from_integer(opt.into())
}

/// A generated instance with every capacity multiplied by `scale`.
fn scaled_instance(seed: u64, max_edges: usize, cap_max: u64, scale: u64) -> ProblemInstance {
    let inst = generate_sp(&GenParams::new(seed, max_edges, cap_max, 10, ProblemKind::Bcmfp));
    let caps: Vec<u64> = inst.graph.capacities().iter().map(|c| c * scale).collect();
    ProblemInstance::new(inst.graph.with_capacities(&caps).unwrap(), inst.objective)
}

#[test]
fn guarantee_on_small_flow_instances() {
    let mut checked = 0;
    for seed in 1..=80 {
        let inst = scaled_instance(seed, 10, 8, 1);
        if upper_bound_flow(&inst.graph) > 50 {
            continue;
        }
        let profile = SubsetProfile::enumerate(&inst.graph).unwrap();
        for budget in [0, 3, 7, 15, inst.graph.total_cost() / 2, inst.graph.total_cost()] {
            let opt = profile.best_for_budget(&inst.graph, budget).achieved_flow;
            let inst = inst.with_objective(Objective::Budget(budget));
            for eps in epsilons() {
                let s = fptas_bcmfp(&inst, &eps).unwrap().solution;
                assert!(s.total_cost <= budget);
                assert!(meets_guarantee(s.achieved_flow, &eps, opt), "seed {seed} budget {budget} eps {eps}");
                checked += 1;
            }
        }
    }
    assert!(checked > 600);
}

#[test]
fn guarantee_on_the_ladder_path() {
    let mut ladder_runs = 0;
    for seed in 1..=25 {
        let inst = scaled_instance(seed, 8, 6, 997);
        let profile = SubsetProfile::enumerate(&inst.graph).unwrap();
        for budget in [2, 6, 12, 25] {
            let opt = profile.best_for_budget(&inst.graph, budget).achieved_flow;
            let inst = inst.with_objective(Objective::Budget(budget));
            for eps in epsilons() {
                let out = fptas_bcmfp(&inst, &eps).unwrap();
                assert!(out.solution.total_cost <= budget);
                assert!(
                    meets_guarantee(out.solution.achieved_flow, &eps, opt),
                    "seed {seed} budget {budget} eps {eps}"
                );
                if let FptasPath::Ladder { .. } = out.path {
                    ladder_runs += 1;
                }
            }
        }
    }
    assert!(ladder_runs > 100, "only {ladder_runs} runs used the ladder");
}

#[test]
fn ladder_answers_switch_once() {
    for seed in 1..=30 {
        let inst = scaled_instance(seed, 7, 6, 53);
        let g = &inst.graph;
        let tree = decompose(g).unwrap();
        let params = ScaleParams::new(g.edge_count(), &parse_epsilon("1/2").unwrap()).unwrap();
        let levels = ladder(&params.epsilon_prime, upper_bound_flow(g));
        for budget in [1, 4, 9, 20] {
            let answers: Vec<bool> =
                levels.iter().map(|l| scaled_query(g, &tree, budget, &params, l).unwrap().0.is_some()).collect();
            let first_no = answers.iter().position(|a| !a).unwrap_or(answers.len());
            assert!(answers[first_no..].iter().all(|a| !a), "seed {seed} budget {budget}: {answers:?}");
        }
    }
}

#[test]
fn optimal_set_keeps_scaled_cuts_above_target() {
    let mut levels_checked = 0;
    for seed in 1..=40 {
        let inst = scaled_instance(seed, 8, 6, 101);
        let g = &inst.graph;
        if g.vertex_count() > 8 {
            continue;
        }
        let profile = SubsetProfile::enumerate(g).unwrap();
        let opt = profile.best_for_budget(g, g.total_cost() / 2);
        for eps in epsilons() {
            let params = ScaleParams::new(g.edge_count(), &eps).unwrap();
            let one_plus = BigRational::one() + &params.epsilon_prime;
            let limit = BigRational::from_integer(opt.achieved_flow.into()) / &one_plus;
            for level in ladder(&params.epsilon_prime, upper_bound_flow(g)) {
                if level > limit {
                    break;
                }
                let caps = scale_capacities(g, &level, &params.epsilon_prime);
                let cut = common::min_cut_brute(g, &opt.purchased, &caps);
                assert!(cut >= params.target, "seed {seed} eps {eps} level {level}: cut {cut}");
                levels_checked += 1;
            }
        }
    }
    assert!(levels_checked > 100);
}

#[test]
fn query_tables_are_bounded_by_the_target() {
    for seed in 1..=20 {
        for eps in epsilons() {
            let small = scaled_instance(seed, 8, 6, 1000);
            let big = scaled_instance(seed, 8, 6, 2000);
            let a = fptas_bcmfp(&small, &eps).unwrap();
            let b = fptas_bcmfp(&big, &eps).unwrap();
            let m = small.graph.edge_count() as u64;
            let side = 2 * a.params.target + 1;
            let bound = (2 * m - 1) * side * side * side;
            for out in [&a, &b] {
                assert!(out.query_entries.iter().all(|&e| e <= bound));
            }
            // doubling capacities lengthens the ladder but leaves the queries alone
            if a.path != FptasPath::Exact && b.path != FptasPath::Exact {
                assert_eq!(a.query_entries[0], b.query_entries[0]);
                assert!(b.ladder_len >= a.ladder_len);
            }
        }
    }
}
