//! Random games shared by the integration tests.
#![allow(dead_code)]

use coevo_games::eda::ProbModel;
use coevo_games::switchability::EdgeSet;
use coevo_games::{GameGraph, Vertex};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

/// A random rooted DAG on `n` vertices with out-degree at most `max_out`.
///
/// Every non-root vertex gets one parent earlier in a hidden order, which
/// makes it reachable; extra forward edges are added with probability
/// `density`. Ids are then shuffled so they carry no order information.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize, max_out: usize, density: f64) -> GameGraph {
    assert!(n >= 1 && max_out >= 1);
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 1..n {
        // pick a parent that still has room; vertex 0 always qualifies eventually
        let candidates: Vec<usize> = (0..j).filter(|&i| succ[i].len() < max_out).collect();
        let i = if candidates.is_empty() {
            0
        } else {
            candidates[rng.random_range(0..candidates.len())]
        };
        succ[i].push(j);
    }
    for (i, s) in succ.iter_mut().enumerate() {
        for j in i + 1..n {
            if s.len() < max_out && !s.contains(&j) && rng.random_bool(density) {
                s.push(j);
            }
        }
        s.shuffle(rng);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut out = vec![Vec::new(); n];
    for (i, s) in succ.into_iter().enumerate() {
        out[perm[i]] = s.into_iter().map(|j| perm[j]).collect();
    }
    GameGraph::new(out, perm[0]).expect("generator builds valid DAGs")
}

/// Random DAGs until one has at most `limit` strategies.
pub fn random_dag_bounded<R: Rng>(
    rng: &mut R,
    n: usize,
    max_out: usize,
    density: f64,
    limit: u128,
) -> GameGraph {
    loop {
        let g = random_dag(rng, n, max_out, density);
        if g.strategy_count().is_some_and(|c| c <= limit) {
            return g;
        }
    }
}

/// Random model with every entry at least `gamma`.
pub fn random_model<R: Rng>(rng: &mut R, g: &GameGraph, gamma: f64) -> ProbModel {
    let dists = (0..g.num_vertices())
        .map(|v| {
            let d = g.successors(v).len();
            if d == 0 {
                return Vec::new();
            }
            let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = w.iter().sum();
            let free = 1.0 - gamma * d as f64;
            w.iter().map(|x| gamma + free * x / s).collect()
        })
        .collect();
    ProbModel { gamma, dists }
}

/// Random rational model with every entry at least `gamma`.
pub fn random_rational_model<R: Rng>(
    rng: &mut R,
    g: &GameGraph,
    gamma: &BigRational,
) -> Vec<Vec<BigRational>> {
    (0..g.num_vertices())
        .map(|v| {
            let d = g.successors(v).len();
            if d == 0 {
                return Vec::new();
            }
            let w: Vec<BigRational> = (0..d)
                .map(|_| BigRational::from_integer(rng.random_range(1..100i64).into()))
                .collect();
            let s = w.iter().fold(BigRational::zero(), |a, b| a + b);
            let free = BigRational::one() - gamma * BigRational::from_integer((d as i64).into());
            w.iter().map(|x| gamma + &free * x / &s).collect()
        })
        .collect()
}

/// Every root-to-sink path built by the inductive compatibility rule:
/// extend by an `A`-edge, or by any edge when the last vertex has none.
pub fn literal_switcher(g: &GameGraph, a: &EdgeSet, v: Vertex) -> bool {
    fn walk(g: &GameGraph, a: &EdgeSet, v: Vertex, path: &mut Vec<Vertex>) -> bool {
        let u = *path.last().unwrap();
        if g.is_sink(u) {
            return path.contains(&v);
        }
        let has_a = g.successors(u).iter().any(|&w| a.contains(u, w));
        for &w in g.successors(u) {
            if a.contains(u, w) || !has_a {
                path.push(w);
                let ok = walk(g, a, v, path);
                path.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    walk(g, a, v, &mut vec![g.root()])
}
