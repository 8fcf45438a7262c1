//! Benchmark game families and the small hand-drawn fixture graphs.
//!
//! Every generator enumerates the positions reachable from the start, sorts
//! them, and uses the rank as the vertex id:
//!
//! * subtraction nim: id = heap size.
//! * silver dollar: coin squares as an increasing tuple over `1..=m`, ranked
//!   lexicographically.
//! * turning turtles: id = heads bitmask (coin `i` is bit `i - 1`).
//! * chomp: row lengths `(λ1, ..., λm)` with row 1 holding the poison square,
//!   ranked lexicographically.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{GameGraph, GraphError, Strategy, StrategyError, Vertex};

/// Largest graph the generators will materialise.
pub const MAX_POSITIONS: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("game would have more than {MAX_POSITIONS} positions")]
    TooLarge,
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GameSpec {
    SubtractionNim { n: usize, k: usize },
    SilverDollar { m: usize, k: usize },
    TurningTurtles { m: usize },
    Chomp { m: usize },
    Fixture { name: String },
}

impl GameSpec {
    pub fn build(&self) -> Result<GameGraph, GameError> {
        match self {
            Self::SubtractionNim { n, k } => subtraction_nim(*n, *k),
            Self::SilverDollar { m, k } => silver_dollar(*m, *k),
            Self::TurningTurtles { m } => turning_turtles(*m),
            Self::Chomp { m } => chomp(*m),
            Self::Fixture { name } => fixture(name),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::SubtractionNim { .. } => "subtraction_nim",
            Self::SilverDollar { .. } => "silver_dollar",
            Self::TurningTurtles { .. } => "turning_turtles",
            Self::Chomp { .. } => "chomp",
            Self::Fixture { .. } => "fixture",
        }
    }

    /// Compact parameter string, e.g. `n=16;k=2`.
    pub fn params(&self) -> String {
        match self {
            Self::SubtractionNim { n, k } => format!("n={n};k={k}"),
            Self::SilverDollar { m, k } => format!("m={m};k={k}"),
            Self::TurningTurtles { m } | Self::Chomp { m } => format!("m={m}"),
            Self::Fixture { name } => format!("name={name}"),
        }
    }
}

/// One heap of `n - 1` items; a move removes between 1 and `k` items.
///
/// `F(v)` lists `v - 1, v - 2, ..., v - k` (clipped at zero), so successor
/// index `c - 1` means "take `c`".
pub fn subtraction_nim(n: usize, k: usize) -> Result<GameGraph, GameError> {
    if n == 0 || k == 0 {
        return Err(GameError::BadParams(format!(
            "subtraction nim needs n>=1, k>=1 (got n={n}, k={k})"
        )));
    }
    if n > MAX_POSITIONS {
        return Err(GameError::TooLarge);
    }
    let succ = (0..n)
        .map(|v| (1..=k.min(v)).map(|c| v - c).collect())
        .collect();
    Ok(GameGraph::new(succ, n - 1)?)
}

/// `k` coins on a strip of `m` squares starting on the rightmost squares.
pub fn silver_dollar(m: usize, k: usize) -> Result<GameGraph, GameError> {
    if k == 0 || m < k {
        return Err(GameError::BadParams(format!(
            "silver dollar needs m>=k>=1 (got m={m}, k={k})"
        )));
    }
    silver_dollar_from(m, ((m - k + 1)..=m).collect())
}

/// Silver dollar from an arbitrary start; only reachable positions are kept.
pub fn silver_dollar_from(m: usize, start: Vec<usize>) -> Result<GameGraph, GameError> {
    let k = start.len();
    if k == 0 || m < k {
        return Err(GameError::BadParams(format!(
            "silver dollar needs m>=k>=1 (got m={m}, k={k})"
        )));
    }
    if start.windows(2).any(|w| w[0] >= w[1]) || start[0] == 0 || start[k - 1] > m {
        return Err(GameError::BadParams(format!(
            "start squares {start:?} must be increasing within 1..={m}"
        )));
    }
    if binomial(m as u64, k as u64).is_none_or(|c| c > MAX_POSITIONS as u128) {
        return Err(GameError::TooLarge);
    }
    let (g, _) = explore(
        start,
        |pos: &Vec<usize>| {
            let mut out = Vec::new();
            for i in 0..pos.len() {
                let floor = if i == 0 { 0 } else { pos[i - 1] };
                for square in (floor + 1)..pos[i] {
                    let mut next = pos.clone();
                    next[i] = square;
                    out.push(next);
                }
            }
            out
        },
        |pos| {
            let parts: Vec<String> = pos.iter().map(usize::to_string).collect();
            format!("({})", parts.join(","))
        },
    )?;
    Ok(g)
}

/// `m` coins, all heads. Turn one head to tails, then optionally flip one
/// coin to its left either way.
pub fn turning_turtles(m: usize) -> Result<GameGraph, GameError> {
    if m == 0 {
        return Err(GameError::BadParams("turning turtles needs m>=1".into()));
    }
    if m >= 23 {
        return Err(GameError::TooLarge);
    }
    let n = 1usize << m;
    let succ = (0..n)
        .map(|mask| {
            let mut out = Vec::new();
            for i in 0..m {
                if mask & (1 << i) == 0 {
                    continue;
                }
                let base = mask & !(1 << i);
                out.push(base);
                for j in 0..i {
                    out.push(base ^ (1 << j));
                }
            }
            out
        })
        .collect();
    let labels = (0..n)
        .map(|mask| {
            Some(
                (0..m)
                    .map(|i| if mask & (1 << i) != 0 { 'H' } else { 'T' })
                    .collect(),
            )
        })
        .collect();
    Ok(GameGraph::with_labels(succ, n - 1, labels)?)
}

/// Square chomp. Taking cell `(i, j)` removes every cell `(i', j')` with
/// `i' >= i`, `j' >= j`; taking the poison cell `(1, 1)` is not a move, so the
/// lone poison square is the sink.
pub fn chomp(m: usize) -> Result<GameGraph, GameError> {
    if m == 0 {
        return Err(GameError::BadParams("chomp needs m>=1".into()));
    }
    if binomial(2 * m as u64, m as u64).is_none_or(|c| c > MAX_POSITIONS as u128 + 1) {
        return Err(GameError::TooLarge);
    }
    let (g, _) = explore(
        vec![m; m],
        |rows: &Vec<usize>| {
            let mut out = Vec::new();
            for i in 0..rows.len() {
                for j in 0..rows[i] {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    let mut next = rows.clone();
                    for r in next.iter_mut().skip(i) {
                        *r = (*r).min(j);
                    }
                    out.push(next);
                }
            }
            out
        },
        |rows| {
            let parts: Vec<String> = rows.iter().map(usize::to_string).collect();
            format!("[{}]", parts.join(","))
        },
    )?;
    Ok(g)
}

/// Enumerates positions reachable from `start`, ranks them in sorted order
/// and builds the graph. Returns the states indexed by vertex id.
fn explore<S, M, L>(start: S, moves: M, label: L) -> Result<(GameGraph, Vec<S>), GameError>
where
    S: Clone + Ord + Hash,
    M: Fn(&S) -> Vec<S>,
    L: Fn(&S) -> String,
{
    let mut seen: HashSet<S> = HashSet::new();
    seen.insert(start.clone());
    let mut stack = vec![start.clone()];
    while let Some(s) = stack.pop() {
        for t in moves(&s) {
            if seen.insert(t.clone()) {
                if seen.len() > MAX_POSITIONS {
                    return Err(GameError::TooLarge);
                }
                stack.push(t);
            }
        }
    }
    let mut states: Vec<S> = seen.into_iter().collect();
    states.sort();
    let index: HashMap<&S, Vertex> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let succ = states
        .iter()
        .map(|s| moves(s).iter().map(|t| index[t]).collect())
        .collect();
    let labels = states.iter().map(|s| Some(label(s))).collect();
    let root = index[&start];
    let g = GameGraph::with_labels(succ, root, labels)?;
    Ok((g, states))
}

pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

pub const FIXTURE_NAMES: [&str; 5] = ["fig1", "fig2", "fig3_top", "fig3_bottom", "fig4"];

/// A hand-drawn example graph with its highlighted vertex and edge set.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub graph: GameGraph,
    pub marked: Option<Vertex>,
    pub highlighted: Vec<(Vertex, Vertex)>,
}

pub fn fixture(name: &str) -> Result<GameGraph, GameError> {
    Ok(annotated_fixture(name)?.graph)
}

/// Fixture graphs with documented numbering.
///
/// * `fig1`: `v0=0, a=1, b=2, c=3, d=4`.
/// * `fig2`: `v0=0`, layer `B = 1..=5`, `u=6`, `w=7`; every `b` moves to `u` or `w`.
/// * `fig3_top`: chain `0..=7` with skip edges `i -> i+2`; marked `v = 5`.
/// * `fig3_bottom`: `v0=0`, then column `c` in `1..=4`, row `r` in `0..=2`
///   (0 = bottom) at id `1 + 3(c-1) + r`; marked `v` is column 3, top row (id 9).
/// * `fig4`: chain `0..=7`, every chain vertex also moves to `u=8`, and `u -> w=9`.
pub fn annotated_fixture(name: &str) -> Result<Fixture, GameError> {
    let named = |names: &[&str]| {
        names
            .iter()
            .map(|s| Some(s.to_string()))
            .collect::<Vec<_>>()
    };
    let fx = match name {
        "fig1" => Fixture {
            graph: GameGraph::with_labels(
                vec![vec![1, 2, 4], vec![2], vec![3, 4], vec![4], vec![]],
                0,
                named(&["v0", "a", "b", "c", "d"]),
            )?,
            marked: None,
            highlighted: Vec::new(),
        },
        "fig2" => {
            let mut succ = vec![(1..=5).collect::<Vec<_>>()];
            succ.extend((1..=5).map(|_| vec![6, 7]));
            succ.push(vec![]);
            succ.push(vec![]);
            Fixture {
                graph: GameGraph::with_labels(
                    succ,
                    0,
                    named(&["v0", "b1", "b2", "b3", "b4", "b5", "u", "w"]),
                )?,
                marked: Some(6),
                highlighted: (1..=5).map(|b| (b, 6)).collect(),
            }
        }
        "fig3_top" => {
            let succ = (0..8usize)
                .map(|i| [i + 1, i + 2].into_iter().filter(|&j| j < 8).collect())
                .collect();
            Fixture {
                graph: GameGraph::new(succ, 0)?,
                marked: Some(5),
                highlighted: vec![(3, 5), (4, 5)],
            }
        }
        "fig3_bottom" => {
            let id = |c: usize, r: usize| 1 + 3 * (c - 1) + r;
            let mut succ = vec![Vec::new(); 13];
            succ[0] = vec![id(1, 2), id(1, 1), id(1, 0)];
            for c in 2..=4 {
                let p = c - 1;
                succ[id(p, 0)].extend([id(c, 0), id(c, 1)]);
                succ[id(p, 1)].extend([id(c, 0), id(c, 2)]);
                succ[id(p, 2)].extend([id(c, 1), id(c, 2)]);
            }
            let mut labels = vec![Some("v0".to_string())];
            for c in 1..=4 {
                for r in 0..3 {
                    labels.push(Some(format!("c{c}r{r}")));
                }
            }
            Fixture {
                graph: GameGraph::with_labels(succ, 0, labels)?,
                marked: Some(id(3, 2)),
                highlighted: vec![(0, id(1, 2)), (id(2, 1), id(3, 2)), (id(2, 2), id(3, 2))],
            }
        }
        "fig4" => {
            let mut succ: Vec<Vec<Vertex>> = (0..7).map(|i| vec![i + 1, 8]).collect();
            succ.push(vec![8]);
            succ.push(vec![9]);
            succ.push(vec![]);
            let mut labels: Vec<Option<String>> = (0..8).map(|i| Some(format!("v{i}"))).collect();
            labels.push(Some("u".into()));
            labels.push(Some("w".into()));
            Fixture {
                graph: GameGraph::with_labels(succ, 0, labels)?,
                marked: Some(8),
                highlighted: Vec::new(),
            }
        }
        other => return Err(GameError::UnknownFixture(other.to_string())),
    };
    Ok(fx)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("expected {expected} characters, got {got}")]
    BadLength { expected: usize, got: usize },
    #[error("character {ch:?} at heap {heap} is not in 1..={k}")]
    BadChar { heap: usize, ch: char, k: usize },
    #[error("cannot take {take} from a heap of {heap}")]
    IllegalMove { heap: usize, take: usize },
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// Decodes a subtraction-nim strategy string: character `i` (1-based) is the
/// number taken from a heap of `i`.
pub fn decode_nim_strategy(g: &GameGraph, k: usize, text: &str) -> Result<Strategy, CodecError> {
    let n = g.num_vertices();
    let chars: Vec<char> = text.chars().collect();
    if chars.len() != n - 1 {
        return Err(CodecError::BadLength {
            expected: n - 1,
            got: chars.len(),
        });
    }
    let mut choice = vec![0u32; n];
    for (i, &ch) in chars.iter().enumerate() {
        let heap = i + 1;
        let take = ch
            .to_digit(10)
            .map(|d| d as usize)
            .filter(|&d| (1..=k).contains(&d))
            .ok_or(CodecError::BadChar { heap, ch, k })?;
        if take > heap {
            return Err(CodecError::IllegalMove { heap, take });
        }
        choice[heap] = (take - 1) as u32;
    }
    Ok(Strategy::from_indices(g, choice)?)
}

pub fn encode_nim_strategy(x: &Strategy) -> String {
    x.indices()
        .iter()
        .skip(1)
        .map(|&i| char::from_digit(i + 1, 10).unwrap_or('?'))
        .collect()
}
