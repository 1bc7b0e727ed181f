//! The worked examples, checked through the public API and against the
//! JSON files in `fixtures/`.

use std::path::PathBuf;

use num_complex::Complex64;
use structlti::fixtures;
use structlti::graph::{adjacency, validate_graph};
use structlti::io::{parse_graph, parse_system};
use structlti::realize::{column_realization, realize_chain, realize_stable, verify_structured_realization, PbhKind};
use structlti::stability::{internal_stability_ss, internal_stability_tf};
use structlti::synthesis::{diagonal_test, structured_stabilizability_test, synthesize_k0};
use structlti::system::{evaluate, systems_equal, tf_to_ss};
use structlti::{Error, StateSpaceSystem, StructuredRealization, Tolerances, Verdict};

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn load(name: &str) -> StateSpaceSystem {
    parse_system(&fixture(name)).unwrap().to_state_space().unwrap()
}

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn fixture_files_match_the_builtin_examples() {
    let t = tol();
    assert_eq!(parse_graph(&fixture("s1_graph.json")).unwrap(), fixtures::s1_graph());
    assert_eq!(parse_graph(&fixture("g2_graph.json")).unwrap(), fixtures::s2_graph());
    assert_eq!(load("g1_ss.json"), fixtures::g1_ss());
    assert_eq!(load("coupled_ss.json"), fixtures::coupled_ss([2, 1]));
    assert_eq!(load("coupled_ss_split12.json"), fixtures::coupled_ss([1, 2]));
    assert!(systems_equal(&load("g1_tf.json"), &tf_to_ss(&fixtures::g1_tf()).unwrap(), &t).unwrap());
    assert!(systems_equal(&load("g2_tf.json"), &tf_to_ss(&fixtures::g2_tf()).unwrap(), &t).unwrap());
    assert!(systems_equal(&load("g2_minimal_ss.json"), &fixtures::g2_minimal(), &t).unwrap());
}

#[test]
fn example_graphs_are_valid() {
    assert!(validate_graph(&fixtures::s1_graph()).is_empty());
    assert!(validate_graph(&fixtures::s2_graph()).is_empty());
    let s2 = adjacency(&fixtures::s2_graph()).unwrap();
    // Node 3 hears from 1 and 2 but not from 4.
    assert!(s2.allows(2, 0) && s2.allows(2, 1) && !s2.allows(2, 3));
}

#[test]
fn g1_values_at_known_points() {
    let g = fixtures::g1_ss();
    let v = evaluate(&g, Complex64::new(1.0, 0.0)).unwrap();
    let expect = [[0.5, 0.0], [0.5, 1.0 / 3.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((v[(i, j)] - expect[i][j]).norm() < 1e-15);
        }
    }
}

#[test]
fn g1_is_stabilizable_by_the_zero_controller() {
    let t = tol();
    let g = fixtures::g1_ss();
    let pattern = g.io_pattern(&fixtures::s1()).unwrap();
    let r = StructuredRealization::verified(g.clone(), pattern.clone(), &t).unwrap();
    assert_eq!(structured_stabilizability_test(&r, &t).unwrap().stabilizable, Verdict::Yes);
    let diag = diagonal_test(&g, &pattern, &t).unwrap();
    assert_eq!(diag.stabilizable, Verdict::Yes);
    let kd = diag.controller.unwrap();
    assert!(kd.d().iter().chain(kd.c().iter()).all(|&x| x == 0.0));
    let k0 = synthesize_k0(&r, &t).unwrap();
    assert!(k0.closed_loop.stable);
    // A stable plant gets zero gains, so K0 has zero transfer matrix.
    let zero = StateSpaceSystem::zero(g.inputs().clone(), g.outputs().clone()).unwrap();
    assert!(systems_equal(k0.controller.sys(), &zero, &t).unwrap());
}

#[test]
fn g1_stable_realization_has_one_state_per_node() {
    let t = tol();
    let g = tf_to_ss(&fixtures::g1_tf()).unwrap();
    let r = realize_stable(&g, &g.io_pattern(&fixtures::s1()).unwrap(), &t).unwrap();
    assert_eq!(r.states().dims(), &[1, 1]);
    assert!(systems_equal(r.sys(), &fixtures::g1_ss(), &t).unwrap());
}

#[test]
fn g2_minimal_realization_is_not_structured() {
    let t = tol();
    let g = fixtures::g2_minimal();
    let pattern = g.io_pattern(&fixtures::s2()).unwrap();
    // The only state must sit at some node; every choice breaks a block.
    for node in 0..4 {
        let mut dims = vec![0; 4];
        dims[node] = 1;
        let placed = g.clone().with_states(Some(structlti::IndexSet::new(dims))).unwrap();
        let rep = verify_structured_realization(&placed, &pattern, &t).unwrap();
        assert!(!rep.structured, "state at node {}", node + 1);
    }
}

#[test]
fn g2_column_realization_loses_stabilizability() {
    let t = tol();
    let g = tf_to_ss(&fixtures::g2_tf()).unwrap();
    let pattern = g.io_pattern(&fixtures::s2()).unwrap();
    let stacked = column_realization(&g, &pattern, &t).unwrap();
    assert!(systems_equal(&stacked, &g, &t).unwrap());
    let rep = verify_structured_realization(&stacked, &pattern, &t).unwrap();
    assert!(rep.structured && !rep.accepted);
    assert!(matches!(realize_stable(&g, &pattern, &t), Err(Error::Precondition(_))));
}

#[test]
fn g2_is_not_stabilizable_with_the_pattern() {
    let t = tol();
    for g in [fixtures::g2_minimal(), tf_to_ss(&fixtures::g2_tf()).unwrap()] {
        let pattern = g.io_pattern(&fixtures::s2()).unwrap();
        let rep = diagonal_test(&g, &pattern, &t).unwrap();
        assert_eq!(rep.stabilizable, Verdict::No);
        let cl = rep.closed_loop.unwrap();
        assert!(cl.eigenvalues.iter().any(|z| (z - 1.0).norm() < 1e-8));
    }
}

#[test]
fn coupled_plant_fails_the_block_test_for_either_split() {
    let t = tol();
    for (split, node, kind) in [([2, 1], 0, PbhKind::Detectability), ([1, 2], 1, PbhKind::Stabilizability)] {
        let g = fixtures::coupled_ss(split);
        let pattern = g.io_pattern(&fixtures::s1()).unwrap();
        let r = StructuredRealization::verified(g, pattern, &t).unwrap();
        let rep = structured_stabilizability_test(&r, &t).unwrap();
        assert_eq!(rep.stabilizable, Verdict::No);
        assert_eq!(rep.failing_blocks.len(), 1);
        assert_eq!((rep.failing_blocks[0].node, rep.failing_blocks[0].kind), (node, kind));
    }
}

#[test]
fn coupled_plant_keeps_its_unstable_pole_under_diagonal_control() {
    let t = tol();
    let g = fixtures::coupled_ss([2, 1]);
    let pattern = g.io_pattern(&fixtures::s1()).unwrap();
    let rep = diagonal_test(&g, &pattern, &t).unwrap();
    assert_eq!(rep.stabilizable, Verdict::No);
    // Both diagonal entries are 1/(s+1), so the diagonal controller is zero.
    let kd = rep.controller.unwrap();
    assert!(kd.d().iter().all(|&x| x == 0.0) && kd.c().iter().all(|&x| x == 0.0));
}

#[test]
fn scrambled_chain_fixture_is_recovered() {
    let t = tol();
    let g = load("chain_scrambled_ss.json");
    let r = realize_chain(&g, &t).unwrap();
    assert_eq!(r.states().dims(), &[1, 1, 1]);
    assert!(systems_equal(r.sys(), &g, &t).unwrap());
}

#[test]
fn loop_fixtures_agree_across_criteria() {
    let t = tol();
    let cases = [
        ("g1_ss.json", "k_g1_static.json", Verdict::Yes),
        ("g2_minimal_ss.json", "k_g2_zero.json", Verdict::No),
    ];
    for (g, k, want) in cases {
        let (g, k) = (load(g), load(k));
        let ss = internal_stability_ss(&g, &k, &t).unwrap();
        let tf = internal_stability_tf(&g, &k, &t).unwrap();
        assert_eq!(ss.verdict, want);
        assert_eq!(tf.verdict, want);
    }
}
