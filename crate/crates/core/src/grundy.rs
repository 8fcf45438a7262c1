//! Sprague-Grundy values, critical positions and optimality certificates.

use serde::Serialize;
use thiserror::Error;

use crate::game::{GameGraph, Strategy, Vertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrundyError {
    #[error("the first player does not win this game (h(root) = 0)")]
    FirstPlayerLoses,
}

/// Which reading of the critical-position condition to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalRule {
    /// `h(v) != 0` and some successor lies outside the zero set.
    #[default]
    Literal,
    /// `h(v) != 0`, some successor lies in the zero set, and `|F(v)| > 1`.
    ZeroMoveAndChoice,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrundyData {
    pub h: Vec<usize>,
    pub zero_set: Vec<Vertex>,
    pub nonzero_set: Vec<Vertex>,
    pub critical: Vec<Vertex>,
}

impl GrundyData {
    pub fn is_zero(&self, v: Vertex) -> bool {
        self.h[v] == 0
    }

    pub fn is_critical(&self, v: Vertex) -> bool {
        self.critical.binary_search(&v).is_ok()
    }
}

/// Smallest non-negative integer not in `values`.
pub fn mex<I: IntoIterator<Item = usize>>(values: I) -> usize {
    let values: Vec<usize> = values.into_iter().collect();
    // The answer is at most values.len(), so larger entries can be ignored.
    let mut present = vec![false; values.len() + 1];
    for v in values {
        if v < present.len() {
            present[v] = true;
        }
    }
    present.iter().position(|p| !p).unwrap_or(present.len())
}

/// Computes `h` in one pass over the reverse topological order, together
/// with the zero set and the critical positions under the literal rule.
pub fn grundy_values(g: &GameGraph) -> GrundyData {
    grundy_values_with(g, CriticalRule::Literal)
}

pub fn grundy_values_with(g: &GameGraph, rule: CriticalRule) -> GrundyData {
    let n = g.num_vertices();
    let mut h = vec![0usize; n];
    let mut present = Vec::new();
    for &v in g.reverse_topological_order() {
        let succ = g.successors(v);
        present.clear();
        present.resize(succ.len() + 1, false);
        for &w in succ {
            if h[w] < present.len() {
                present[h[w]] = true;
            }
        }
        h[v] = present.iter().position(|p| !p).unwrap_or(present.len());
    }
    let zero_set = (0..n).filter(|&v| h[v] == 0).collect();
    let nonzero_set = (0..n).filter(|&v| h[v] != 0).collect();
    let critical = critical_from_values(g, &h, rule);
    GrundyData {
        h,
        zero_set,
        nonzero_set,
        critical,
    }
}

fn critical_from_values(g: &GameGraph, h: &[usize], rule: CriticalRule) -> Vec<Vertex> {
    g.interior()
        .filter(|&v| {
            if h[v] == 0 {
                return false;
            }
            let succ = g.successors(v);
            match rule {
                CriticalRule::Literal => succ.iter().any(|&w| h[w] != 0),
                CriticalRule::ZeroMoveAndChoice => {
                    succ.len() > 1 && succ.iter().any(|&w| h[w] == 0)
                }
            }
        })
        .collect()
}

/// Critical positions of `g` under `rule`, using precomputed values.
pub fn critical_positions(g: &GameGraph, gd: &GrundyData, rule: CriticalRule) -> Vec<Vertex> {
    critical_from_values(g, &gd.h, rule)
}

/// Sufficient optimality test: `x` moves into the zero set at every critical position.
pub fn is_optimal_sufficient(
    g: &GameGraph,
    gd: &GrundyData,
    x: &Strategy,
) -> Result<bool, GrundyError> {
    if gd.h[g.root()] == 0 {
        return Err(GrundyError::FirstPlayerLoses);
    }
    Ok(gd
        .critical
        .iter()
        .all(|&v| x.target(g, v).is_some_and(|w| gd.h[w] == 0)))
}

/// Exact test: does `x` win as first mover against every opponent?
///
/// `wins[v]` records whether `x`, to move at `v`, beats every reply. With
/// `u = x(v)` that holds iff `u` is a sink or every opponent move from `u`
/// lands on a position that is again a win for `x`.
pub fn is_optimal_exact(g: &GameGraph, x: &Strategy) -> bool {
    let wins = best_response_table(g, x);
    wins[g.root()]
}

fn best_response_table(g: &GameGraph, x: &Strategy) -> Vec<bool> {
    let mut wins = vec![false; g.num_vertices()];
    for &v in g.reverse_topological_order() {
        wins[v] = match x.target(g, v) {
            None => false,
            Some(u) => g.successors(u).iter().all(|&w| wins[w]),
        };
    }
    wins
}

/// An opponent beating `x` when `x` is not optimal.
pub fn refuting_opponent(g: &GameGraph, x: &Strategy) -> Option<Strategy> {
    let wins = best_response_table(g, x);
    if wins[g.root()] {
        return None;
    }
    // At each position pick a reply that leaves x in a non-winning position
    // when one exists.
    let mut y = Strategy::first_choice(g);
    for v in g.interior() {
        if let Some(i) = g.successors(v).iter().position(|&w| !wins[w]) {
            y.set_index(v, i as u32);
        }
    }
    Some(y)
}

/// Chooses the first successor in the zero set wherever one exists.
pub fn canonical_optimal_strategy(g: &GameGraph, gd: &GrundyData) -> Result<Strategy, GrundyError> {
    if gd.h[g.root()] == 0 {
        return Err(GrundyError::FirstPlayerLoses);
    }
    let mut x = Strategy::first_choice(g);
    for v in g.interior() {
        if let Some(i) = g.successors(v).iter().position(|&w| gd.h[w] == 0) {
            x.set_index(v, i as u32);
        }
    }
    Ok(x)
}

/// Prepends a fresh root when the first player would otherwise lose.
pub fn ensure_first_player_win(g: &GameGraph) -> GameGraph {
    let gd = grundy_values(g);
    if gd.h[g.root()] != 0 {
        g.clone()
    } else {
        g.with_new_root()
    }
}
