//! Worked examples and figure values, checked one by one.

use coevo_games::eda::{restrict, theorem_gamma};
use coevo_games::game::{all_strategies, payoff};
use coevo_games::games::{
    annotated_fixture, chomp, decode_nim_strategy, fixture, silver_dollar, subtraction_nim,
    turning_turtles,
};
use coevo_games::grundy::{self, grundy_values};
use coevo_games::switchability::{self, EdgeSet, ProfileMode};
use coevo_games::{play, GameGraph, Strategy};

const V0: usize = 0;
const A: usize = 1;
const B: usize = 2;
const C: usize = 3;
const D: usize = 4;

fn fig1() -> GameGraph {
    fixture("fig1").unwrap()
}

fn targets(g: &GameGraph, pairs: &[(usize, usize)]) -> Strategy {
    let mut t = vec![None; g.num_vertices()];
    for &(u, w) in pairs {
        t[u] = Some(w);
    }
    Strategy::from_targets(g, &t).unwrap()
}

#[test]
fn fig1_shape_and_values() {
    let g = fig1();
    assert_eq!((g.num_vertices(), g.max_degree(), g.root()), (5, 3, V0));
    // v0->a is drawn twice in the figure; as a simple graph there are 7 edges
    assert_eq!(g.num_edges(), 7);
    let gd = grundy_values(&g);
    assert_eq!(gd.h, vec![1, 0, 2, 1, 0]);
    assert_eq!(gd.critical, vec![V0, B]);
    assert_eq!(grundy::ensure_first_player_win(&g).num_vertices(), 5);
}

#[test]
fn fig1_moving_to_d_is_optimal() {
    let g = fig1();
    for x in all_strategies(&g).filter(|x| x.target(&g, V0) == Some(D)) {
        assert!(grundy::is_optimal_exact(&g, &x));
        for y in all_strategies(&g) {
            let t = play(&g, &x, &y);
            assert_eq!((t.winner, t.moves()), (1, 1));
        }
    }
}

#[test]
fn fig1_sufficient_condition_is_not_necessary() {
    let g = fig1();
    let gd = grundy_values(&g);
    let x = targets(&g, &[(V0, D), (A, B), (B, C), (C, D)]);
    assert!(!grundy::is_optimal_sufficient(&g, &gd, &x).unwrap());
    assert!(grundy::is_optimal_exact(&g, &x));
}

#[test]
fn nim7_worked_example() {
    let g = subtraction_nim(7, 2).unwrap();
    assert_eq!(g.num_vertices(), 7);
    assert_eq!(g.successors(3), &[2, 1]);
    assert_eq!(g.max_degree(), 2);
    let x = decode_nim_strategy(&g, 2, "122111").unwrap();
    let y = decode_nim_strategy(&g, 2, "122122").unwrap();
    assert_eq!(x.target(&g, 6), Some(5));
    assert_eq!(x.target(&g, 5), Some(4));
    assert_eq!(x.target(&g, 1), Some(0));
    let t = play(&g, &x, &y);
    assert_eq!(t.winner, -1);
    assert_eq!(t.visited, vec![6, 5, 3, 1, 0]);
}

#[test]
fn nim8_matches_fig3_top() {
    let nim = subtraction_nim(8, 2).unwrap();
    let fig = fixture("fig3_top").unwrap();
    assert_eq!(nim.num_vertices(), 8);
    for h in 0..8 {
        let mut a: Vec<usize> = nim.successors(h).iter().map(|&w| 7 - w).collect();
        let mut b = fig.successors(7 - h).to_vec();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }
}

#[test]
fn game_family_sizes() {
    let g = silver_dollar(4, 2).unwrap();
    assert_eq!(g.num_vertices(), 6);
    assert_eq!(g.label(g.root()), Some("(3,4)"));
    let sinks: Vec<_> = (0..6).filter(|&v| g.is_sink(v)).collect();
    assert_eq!(sinks.len(), 1);
    assert_eq!(g.label(sinks[0]), Some("(1,2)"));

    let g = turning_turtles(5).unwrap();
    assert_eq!(g.num_vertices(), 32);
    assert!(g.max_degree() <= 15 && g.max_degree() <= 25);

    assert_eq!(chomp(3).unwrap().num_vertices(), 19);
}

#[test]
fn fixture_shapes() {
    let fx = annotated_fixture("fig3_bottom").unwrap();
    assert_eq!(fx.graph.num_vertices(), 13);
    // column 3, top row
    assert_eq!(fx.marked, Some(1 + 3 * 2 + 2));

    let fx = annotated_fixture("fig2").unwrap();
    assert_eq!(fx.graph.num_vertices(), 8);
    assert_eq!(fx.graph.successors(0).len(), 5);
    let a = EdgeSet::new(&fx.graph, fx.highlighted.clone()).unwrap();
    assert_eq!(a.len(), 5);
    assert_eq!(switchability::depth(&fx.graph, &a).unwrap(), 1);
    assert!(switchability::is_switcher(&fx.graph, &a, fx.marked.unwrap()).unwrap());
}

#[test]
fn fig3_switchers() {
    let top = annotated_fixture("fig3_top").unwrap();
    let a = EdgeSet::new(&top.graph, top.highlighted.clone()).unwrap();
    assert_eq!(switchability::depth(&top.graph, &a).unwrap(), 1);
    assert!(switchability::is_switcher(&top.graph, &a, top.marked.unwrap()).unwrap());

    let bottom = annotated_fixture("fig3_bottom").unwrap();
    let a = EdgeSet::new(&bottom.graph, bottom.highlighted.clone()).unwrap();
    let v = bottom.marked.unwrap();
    assert_eq!(switchability::depth(&bottom.graph, &a).unwrap(), 2);
    assert!(switchability::is_switcher(&bottom.graph, &a, v).unwrap());
    // one column to the left
    assert!(!switchability::is_switcher(&bottom.graph, &a, v - 3).unwrap());

    let s = |fx: &coevo_games::games::Fixture| {
        switchability::exact_switchability(
            &fx.graph,
            fx.marked.unwrap(),
            switchability::DEFAULT_EDGE_LIMIT,
        )
        .unwrap()
        .exact
    };
    assert_eq!(s(&top), Some(1));
    assert_eq!(s(&bottom), Some(2));
}

#[test]
fn switchability_of_families() {
    let g = subtraction_nim(8, 2).unwrap();
    let p = switchability::switchability_profile(&g, ProfileMode::Exact, 64).unwrap();
    assert!(p.all_exact);
    assert!(p.s_bar <= 1);

    for m in 2..=4 {
        let g = chomp(m).unwrap();
        for v in 0..g.num_vertices() {
            assert!(switchability::upper_bound_switchability(&g, v).unwrap() <= m);
        }
    }

    let g = fixture("fig4").unwrap();
    let p = switchability::switchability_profile(&g, ProfileMode::Exact, 64).unwrap();
    let s: Vec<usize> = p.reports.iter().map(|r| r.exact.unwrap()).collect();
    assert_eq!(s, vec![0, 1, 2, 3, 4, 5, 6, 7, 0, 0]);
}

#[test]
fn restrict_examples() {
    let q = restrict(&[0.995, 0.005], 0.01);
    assert!((q[0] - 0.99).abs() < 1e-12 && (q[1] - 0.01).abs() < 1e-12);
    let q = restrict(&[0.9, 0.05, 0.05], 0.1);
    for (a, b) in q.iter().zip([0.8, 0.1, 0.1]) {
        assert!((a - b).abs() < 1e-12);
    }
    let u = vec![0.25; 4];
    assert_eq!(restrict(&u, 0.1), u);
}

#[test]
fn theorem_gamma_for_nim() {
    for (n, k) in [(7, 2), (16, 2), (12, 3)] {
        let g = subtraction_nim(n, k).unwrap();
        assert_eq!(theorem_gamma(&g), 1.0 / (20.0 * k as f64 * n as f64));
    }
}

#[test]
fn nim7_intransitive_triple_exists() {
    let g = subtraction_nim(7, 2).unwrap();
    let rep =
        coevo_games::harness::intransitivity_search(&g, 0, coevo_games::eda::RngStreams::new(0, 0));
    let w = rep.witness.expect("three-cycle");
    let xs: Vec<Strategy> = w
        .iter()
        .map(|c| Strategy::from_indices(&g, c.clone()).unwrap())
        .collect();
    for i in 0..3 {
        let (x, y) = (&xs[i], &xs[(i + 1) % 3]);
        assert_eq!(payoff(&g, x, y), 1);
        assert_eq!(payoff(&g, y, x), -1);
    }
}
