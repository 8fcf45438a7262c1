//! Exact probabilities of the tournament process under a product model.
//!
//! With `x, y` drawn independently from the same model, the realised path
//! is a Markov chain that moves from `u` to `w` with probability `p(u, w)`
//! whoever is to move, and visits each position at most once because the
//! graph is acyclic. Reach probabilities therefore follow from a forward
//! pass, and win probabilities for the player to move from a backward pass.
//! The winner's choice distribution at each position then has a closed form.
//!
//! Everything here is generic over the number type so the same code runs in
//! `f64` and in exact rationals.

use num_traits::Num;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::eda::{self, ProbModel, RngStreams};
use crate::game::{all_strategies, GameGraph, Strategy, Vertex};
use crate::grundy;

/// Upper limit on the number of strategies [`brute_force_opt`] enumerates.
pub const MAX_ENUMERATION: u128 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("game has {0:?} strategies, more than the enumeration limit")]
    TooLarge(Option<u128>),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("vertex {0} is a sink")]
    NotInterior(Vertex),
}

/// `P(v on the realised path)` for every position.
pub fn reach_probabilities<T: Num + Clone>(g: &GameGraph, probs: &[Vec<T>]) -> Vec<T> {
    let mut reach = vec![T::zero(); g.num_vertices()];
    reach[g.root()] = T::one();
    for &u in g.reverse_topological_order().iter().rev() {
        if reach[u].is_zero() {
            continue;
        }
        for (i, &w) in g.successors(u).iter().enumerate() {
            let add = reach[u].clone() * probs[u][i].clone();
            reach[w] = reach[w].clone() + add;
        }
    }
    reach
}

/// `P(the player to move at v wins)` for every position.
pub fn win_probabilities<T: Num + Clone>(g: &GameGraph, probs: &[Vec<T>]) -> Vec<T> {
    let mut win = vec![T::zero(); g.num_vertices()];
    for &v in g.reverse_topological_order() {
        if g.is_sink(v) {
            continue;
        }
        let mut opp = T::zero();
        for (i, &w) in g.successors(v).iter().enumerate() {
            opp = opp + probs[v][i].clone() * win[w].clone();
        }
        win[v] = T::one() - opp;
    }
    win
}

fn selection_with<T: Num + Clone>(
    g: &GameGraph,
    probs: &[Vec<T>],
    reach: &[T],
    win: &[T],
    u: Vertex,
) -> Vec<T> {
    g.successors(u)
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let bracket =
                T::one() + reach[u].clone() * (T::one() - win[v].clone() - win[u].clone());
            probs[u][i].clone() * bracket
        })
        .collect()
}

/// Distribution of the tournament winner's choice at `u`:
/// `p(u, v) * (1 + r(u) * (1 - win(v) - win(u)))` for each `v` in `F(u)`.
pub fn selection_distribution<T: Num + Clone>(
    g: &GameGraph,
    probs: &[Vec<T>],
    u: Vertex,
) -> Result<Vec<T>, OracleError> {
    if g.is_sink(u) {
        return Err(OracleError::NotInterior(u));
    }
    let reach = reach_probabilities(g, probs);
    let win = win_probabilities(g, probs);
    Ok(selection_with(g, probs, &reach, &win, u))
}

/// Selection vectors at every position (empty at sinks).
pub fn selection_all<T: Num + Clone>(g: &GameGraph, probs: &[Vec<T>]) -> Vec<Vec<T>> {
    let reach = reach_probabilities(g, probs);
    let win = win_probabilities(g, probs);
    (0..g.num_vertices())
        .map(|u| {
            if g.is_sink(u) {
                Vec::new()
            } else {
                selection_with(g, probs, &reach, &win, u)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicatorForm<T> {
    /// Current frequencies `p(u, v_i)`.
    pub q: Vec<T>,
    /// Fitness `r(u) * (1 - win(v_i))`.
    pub a: Vec<T>,
    /// `q_i (1 + a_i - sum_j q_j a_j)`.
    pub q_next: Vec<T>,
}

/// The selection update at `u` written as a discrete replicator step.
pub fn replicator_form<T: Num + Clone>(
    g: &GameGraph,
    probs: &[Vec<T>],
    u: Vertex,
) -> Result<ReplicatorForm<T>, OracleError> {
    if g.is_sink(u) {
        return Err(OracleError::NotInterior(u));
    }
    let reach = reach_probabilities(g, probs);
    let win = win_probabilities(g, probs);
    let q: Vec<T> = probs[u].clone();
    let a: Vec<T> = g
        .successors(u)
        .iter()
        .map(|&v| reach[u].clone() * (T::one() - win[v].clone()))
        .collect();
    let mean = q
        .iter()
        .zip(&a)
        .fold(T::zero(), |acc, (qi, ai)| acc + qi.clone() * ai.clone());
    let q_next = q
        .iter()
        .zip(&a)
        .map(|(qi, ai)| qi.clone() * (T::one() + ai.clone() - mean.clone()))
        .collect();
    Ok(ReplicatorForm { q, a, q_next })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelAnalysis {
    pub reach: Vec<f64>,
    pub win: Vec<f64>,
    pub selection: Vec<Vec<f64>>,
}

pub fn analyze(g: &GameGraph, model: &ProbModel) -> ModelAnalysis {
    let probs = &model.dists;
    ModelAnalysis {
        reach: reach_probabilities(g, probs),
        win: win_probabilities(g, probs),
        selection: selection_all(g, probs),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub trials: u64,
    pub frequencies: Vec<f64>,
    /// Binomial standard error of each frequency.
    pub std_errors: Vec<f64>,
}

const MC_CHUNK: u64 = 4096;

/// Empirical distribution of the tournament winner's choice at `u`.
///
/// Trials run in chunks of 4096, chunk `c` drawing from slot `c` of `streams`,
/// so the estimate is independent of thread scheduling.
pub fn monte_carlo_selection(
    g: &GameGraph,
    model: &ProbModel,
    u: Vertex,
    trials: u64,
    streams: RngStreams,
) -> Result<MonteCarloEstimate, OracleError> {
    if trials == 0 {
        return Err(OracleError::NoTrials);
    }
    if g.is_sink(u) {
        return Err(OracleError::NotInterior(u));
    }
    let deg = g.successors(u).len();
    let words_per_chunk = 4 * g.num_interior() as u128 * MC_CHUNK as u128;
    let chunks = trials.div_ceil(MC_CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = streams.at(c as u128, words_per_chunk);
            let mut counts = vec![0u64; deg];
            let todo = MC_CHUNK.min(trials - c * MC_CHUNK);
            let mut evals = 0;
            for _ in 0..todo {
                let z = eda::tournament(g, model, &mut rng, &mut evals);
                counts[z.index(u)] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; deg],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let n = trials as f64;
    let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let std_errors = frequencies
        .iter()
        .map(|&p| (p * (1.0 - p) / n).sqrt())
        .collect();
    Ok(MonteCarloEstimate {
        trials,
        frequencies,
        std_errors,
    })
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Every optimal strategy, by enumeration and the exact best-response test.
pub fn brute_force_opt(g: &GameGraph) -> Result<Vec<Strategy>, OracleError> {
    let count = g.strategy_count();
    if count.is_none_or(|c| c > MAX_ENUMERATION) {
        return Err(OracleError::TooLarge(count));
    }
    Ok(all_strategies(g)
        .filter(|x| grundy::is_optimal_exact(g, x))
        .collect())
}

/// Optimal strategies by playing every pair; only for small strategy spaces.
pub fn optimal_by_playout(g: &GameGraph, limit: u128) -> Result<Vec<Strategy>, OracleError> {
    let count = g.strategy_count();
    if count.is_none_or(|c| c > limit) {
        return Err(OracleError::TooLarge(count));
    }
    let all: Vec<Strategy> = all_strategies(g).collect();
    Ok(all
        .par_iter()
        .filter(|x| all.iter().all(|y| crate::game::payoff(g, x, y) == 1))
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eda::uniform_model;
    use crate::games::fixture;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn uniform_rational(g: &GameGraph) -> Vec<Vec<BigRational>> {
        (0..g.num_vertices())
            .map(|v| {
                let d = g.successors(v).len() as i64;
                vec![rat(1, d.max(1)); d as usize]
            })
            .collect()
    }

    #[test]
    fn fig1_win_probabilities() {
        let g = fixture("fig1").unwrap();
        let win = win_probabilities(&g, &uniform_rational(&g));
        assert_eq!(
            win,
            vec![rat(2, 3), rat(1, 2), rat(1, 2), rat(1, 1), rat(0, 1)]
        );
        let reach = reach_probabilities(&g, &uniform_rational(&g));
        assert_eq!(reach[0], rat(1, 1));
        assert_eq!(reach[4], rat(1, 1));
    }

    #[test]
    fn fig2_reach_of_u_is_half() {
        let g = fixture("fig2").unwrap();
        let reach = reach_probabilities(&g, &uniform_rational(&g));
        assert_eq!(reach[6], rat(1, 2));
        assert_eq!(reach[7], rat(1, 2));
    }

    #[test]
    fn fig1_selection_at_root() {
        let g = fixture("fig1").unwrap();
        let sel = selection_distribution(&g, &uniform_rational(&g), 0).unwrap();
        assert_eq!(sel, vec![rat(5, 18), rat(5, 18), rat(4, 9)]);
        let rep = replicator_form(&g, &uniform_rational(&g), 0).unwrap();
        assert_eq!(rep.q_next, sel);

        let m = uniform_model(&g, 0.0).unwrap();
        let selection = selection_distribution(&g, &m.dists, 0).unwrap();
        for (a, b) in selection.iter().zip([0.2778, 0.2778, 0.4444]) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn forced_move_and_fixed_point() {
        let g = fixture("fig1").unwrap();
        let probs = uniform_rational(&g);
        assert_eq!(
            selection_distribution(&g, &probs, 1).unwrap(),
            vec![rat(1, 1)]
        );
        let rep = replicator_form(&g, &probs, 3).unwrap();
        assert_eq!(rep.q_next, vec![rat(1, 1)]);
        // fig2: every b has successors u, w that are both sinks, so equal fitness.
        let g = fixture("fig2").unwrap();
        let probs = uniform_rational(&g);
        let rep = replicator_form(&g, &probs, 1).unwrap();
        assert_eq!(rep.q_next, rep.q);
        assert!(selection_distribution(&g, &probs, 6).is_err());
    }

    #[test]
    fn point_mass_monte_carlo_is_exact() {
        let g = fixture("fig1").unwrap();
        let mut m = uniform_model(&g, 0.0).unwrap();
        m.dists[0] = vec![0.0, 1.0, 0.0];
        m.dists[2] = vec![0.0, 1.0];
        let est = monte_carlo_selection(&g, &m, 0, 1000, RngStreams::new(1, 0)).unwrap();
        assert_eq!(est.frequencies, vec![0.0, 1.0, 0.0]);
        assert!(est.std_errors.iter().all(|&s| s == 0.0));
        assert_eq!(
            monte_carlo_selection(&g, &m, 0, 0, RngStreams::new(1, 0)).unwrap_err(),
            OracleError::NoTrials
        );
    }

    #[test]
    fn fig1_optimal_set() {
        let g = fixture("fig1").unwrap();
        let opt = brute_force_opt(&g).unwrap();
        assert_eq!(opt.len(), 3);
        assert_eq!(opt, optimal_by_playout(&g, 10_000).unwrap());
        for x in &opt {
            let first = x.target(&g, 0);
            assert!(first == Some(4) || (first == Some(1) && x.target(&g, 2) == Some(4)));
        }
    }
}
