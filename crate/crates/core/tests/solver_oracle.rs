mod common;

use common::{factors, naive_feasible, random_instance, relabel};
use vnepkit::rational::{int, rat};
use vnepkit::reductions::{instantiate_gadget, GadgetOptions, GadgetVariant};
use vnepkit::{
    edge, solve_decision, verify_certificate, ApproxFactors, CnfFormula, Quantity, RequestGraph,
    SolveLimits, SolveStatus, SubstrateGraph, VariantSpec, VnepInstance,
};

fn solve(instance: &VnepInstance, f: Option<&ApproxFactors>) -> SolveStatus {
    solve_decision(instance, f, SolveLimits::default()).status
}

#[test]
fn matches_naive_enumerator_on_small_grid() {
    let exact = ApproxFactors::exact();
    let mut feasible = 0;
    for seed in 0..1500 {
        let inst = random_instance(seed, 8, 4);
        let status = solve(&inst, None);
        let naive = naive_feasible(&inst, &exact);
        assert_eq!(status.is_feasible(), naive.is_some(), "seed {seed}");
        if let SolveStatus::Feasible(m) = &status {
            feasible += 1;
            assert!(verify_certificate(&inst, m, None).unwrap().is_ok(), "seed {seed}");
        }
    }
    // the grid exercises both answers
    assert!(feasible >= 200 && 1500 - feasible >= 150, "{feasible}");
}

#[test]
fn approximate_answers_match_naive_enumerator() {
    let f = factors(rat(3, 2), rat(2, 1), rat(3, 2));
    for seed in 0..400 {
        let inst = random_instance(10_000 + seed, 6, 3);
        let status = solve(&inst, Some(&f));
        assert_eq!(status.is_feasible(), naive_feasible(&inst, &f).is_some(), "seed {seed}");
        if let SolveStatus::Feasible(m) = &status {
            assert!(verify_certificate(&inst, m, Some(&f)).unwrap().is_ok());
        }
    }
}

#[test]
fn unit_factors_coincide_with_exact_solving() {
    let one = ApproxFactors::exact();
    for seed in 0..1000 {
        let inst = random_instance(20_000 + seed, 6, 3);
        assert_eq!(solve(&inst, None), solve(&inst, Some(&one)), "seed {seed}");
    }
}

#[test]
fn larger_factors_never_lose_feasibility() {
    let small = factors(rat(5, 4), rat(5, 4), rat(5, 4));
    let large = factors(int(2), int(3), int(2));
    for seed in 0..500 {
        let inst = random_instance(30_000 + seed, 6, 3);
        let exact = solve(&inst, None).is_feasible();
        let mid = solve(&inst, Some(&small)).is_feasible();
        let wide = solve(&inst, Some(&large)).is_feasible();
        assert!(!exact || mid, "seed {seed}");
        assert!(!mid || wide, "seed {seed}");
    }
}

#[test]
fn status_is_invariant_under_relabeling() {
    for seed in 0..150 {
        let inst = random_instance(40_000 + seed, 7, 4);
        let expected = solve(&inst, None).is_feasible();
        for k in 0..10 {
            let renamed = relabel(&inst, seed * 31 + k);
            assert_eq!(solve(&renamed, None).is_feasible(), expected, "seed {seed} relabel {k}");
        }
    }
}

#[test]
fn search_is_deterministic() {
    for seed in 0..100 {
        let inst = random_instance(50_000 + seed, 8, 4);
        let a = solve_decision(&inst, None, SolveLimits::default());
        let b = solve_decision(&inst, None, SolveLimits::default());
        assert_eq!(a.status, b.status);
        assert_eq!(a.stats.nodes_explored, b.stats.nodes_explored);
    }
}

#[test]
fn identity_embedding_of_the_substrate_itself() {
    let mut s = SubstrateGraph::new();
    let mut r = RequestGraph::new();
    for (k, id) in ["a", "b", "c", "d"].iter().enumerate() {
        s.add_node(*id, int(k as i64 + 1)).unwrap();
        r.add_node(*id, int(k as i64 + 1)).unwrap();
    }
    for (u, v) in [("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")] {
        s.add_edge(u, v, int(2), int(1)).unwrap();
        r.add_edge(u, v, int(2), int(1)).unwrap();
    }
    let ids: Vec<_> = s.nodes().cloned().collect();
    for i in &ids {
        for u in ids.iter().filter(|u| *u != i) {
            r.forbid_node(i, u.clone()).unwrap();
        }
    }
    let inst = VnepInstance::new(s, r, VariantSpec::ALL).unwrap();
    let SolveStatus::Feasible(m) = solve(&inst, None) else { panic!() };
    assert!(m.node_map.iter().all(|(i, u)| i == u));
    assert_eq!(m.edge_map[&edge("a", "d")], vec![edge("a", "d")]);
}

#[test]
fn contradiction_gadget_is_infeasible() {
    let phi = CnfFormula::from_clauses(&[&[1], &[-1]]).unwrap();
    for variant in GadgetVariant::ALL {
        let g = instantiate_gadget(&phi, variant, GadgetOptions::default()).unwrap();
        assert_eq!(solve(&g.instance, None), SolveStatus::Infeasible, "{variant}");
    }
}

#[test]
fn node_limit_reports_resource_limit() {
    let phi = CnfFormula::from_clauses(&[&[1, 2, 3], &[-1, 2, 4], &[2, -3, 4]]).unwrap();
    let g = instantiate_gadget(&phi, GadgetVariant::VeNone, GadgetOptions::default()).unwrap();
    let tight = SolveLimits {
        max_search_nodes: Some(2),
        max_time: None,
    };
    let r = solve_decision(&g.instance, None, tight);
    assert_eq!(r.status, SolveStatus::ResourceLimit);
    assert!(r.stats.nodes_explored <= 3);
    let free = solve_decision(&g.instance, None, SolveLimits::unlimited());
    assert!(free.status.is_feasible());
    assert!(free.stats.paths_enumerated >= 3);
}

#[test]
fn suitability_uses_original_capacities() {
    // demand 2 on a node of capacity 1: alpha = 2 scales only the cumulative check
    let mut s = SubstrateGraph::new();
    s.add_node("u", int(1)).unwrap();
    let mut r = RequestGraph::new();
    r.add_node("i", int(2)).unwrap();
    let inst = VnepInstance::new(s.clone(), r, VariantSpec::VE_NONE).unwrap();
    let f = factors(int(2), int(1), int(1));
    assert_eq!(solve(&inst, Some(&f)), SolveStatus::Infeasible);

    // two unit demands on a unit node fit only at alpha = 2
    let mut r2 = RequestGraph::new();
    r2.add_node("i", int(1)).unwrap();
    r2.add_node("j", int(1)).unwrap();
    let inst2 = VnepInstance::new(s, r2, VariantSpec::VE_NONE).unwrap();
    assert_eq!(solve(&inst2, None), SolveStatus::Infeasible);
    assert!(solve(&inst2, Some(&f)).is_feasible());
    assert_eq!(Quantity::Finite(int(1)).scaled(int(2)), Quantity::Finite(int(2)));
}
