//! Impartial games as rooted acyclic digraphs, strategies over them, and playouts.
//!
//! Positions are dense integers `0..n`. The order of each successor list is
//! preserved exactly as built: it is the canonical index order used by
//! strategies, probability models and every serialised form.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense position identifier.
pub type Vertex = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("game graph has no vertices")]
    Empty,
    #[error("root {0} is not a vertex")]
    BadRoot(Vertex),
    #[error("edge {from} -> {to} points outside the vertex set")]
    DanglingEdge { from: Vertex, to: Vertex },
    #[error("bad edge {from} -> {to}: {reason}")]
    BadEdge {
        from: Vertex,
        to: Vertex,
        reason: &'static str,
    },
    #[error("graph contains a directed cycle")]
    CycleDetected,
    #[error("vertex {0} is not reachable from the root")]
    Unreachable(Vertex),
    #[error("vertex ids must be exactly 0..{n}; found {id}")]
    BadVertexId { id: usize, n: usize },
    #[error("vertex id {0} listed twice")]
    DuplicateVertex(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("strategy covers {got} vertices, game has {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("vertex {vertex}: choice {choice} is not a successor")]
    NotASuccessor { vertex: Vertex, choice: Vertex },
    #[error("interior vertex {0} has no choice")]
    MissingChoice(Vertex),
    #[error("sink {0} cannot have a choice")]
    ChoiceAtSink(Vertex),
}

/// A finite acyclic rooted game graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameGraph {
    succ: Vec<Vec<Vertex>>,
    root: Vertex,
    labels: Vec<Option<String>>,
    /// Sinks first; every vertex appears after all of its successors.
    reverse_topo: Vec<Vertex>,
    max_degree: usize,
    edge_count: usize,
}

impl GameGraph {
    /// Validates an adjacency list and builds the graph.
    pub fn new(succ: Vec<Vec<Vertex>>, root: Vertex) -> Result<Self, GraphError> {
        let labels = vec![None; succ.len()];
        Self::with_labels(succ, root, labels)
    }

    pub fn with_labels(
        succ: Vec<Vec<Vertex>>,
        root: Vertex,
        labels: Vec<Option<String>>,
    ) -> Result<Self, GraphError> {
        let n = succ.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if root >= n {
            return Err(GraphError::BadRoot(root));
        }
        debug_assert_eq!(labels.len(), n);
        let mut seen = vec![usize::MAX; n];
        for (u, out) in succ.iter().enumerate() {
            for &w in out {
                if w >= n {
                    return Err(GraphError::DanglingEdge { from: u, to: w });
                }
                if w == u {
                    return Err(GraphError::BadEdge {
                        from: u,
                        to: w,
                        reason: "self-loop",
                    });
                }
                if seen[w] == u {
                    return Err(GraphError::BadEdge {
                        from: u,
                        to: w,
                        reason: "duplicate edge",
                    });
                }
                seen[w] = u;
            }
        }

        // Kahn's algorithm on the reversed graph: out-degree zero first.
        let mut preds: Vec<Vec<Vertex>> = vec![Vec::new(); n];
        for (u, out) in succ.iter().enumerate() {
            for &w in out {
                preds[w].push(u);
            }
        }
        let mut remaining: Vec<usize> = succ.iter().map(Vec::len).collect();
        let mut queue: VecDeque<Vertex> = (0..n).filter(|&v| remaining[v] == 0).collect();
        let mut reverse_topo = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            reverse_topo.push(v);
            for &p in &preds[v] {
                remaining[p] -= 1;
                if remaining[p] == 0 {
                    queue.push_back(p);
                }
            }
        }
        if reverse_topo.len() != n {
            return Err(GraphError::CycleDetected);
        }

        let mut reached = vec![false; n];
        reached[root] = true;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &w in &succ[u] {
                if !reached[w] {
                    reached[w] = true;
                    stack.push(w);
                }
            }
        }
        if let Some(v) = reached.iter().position(|r| !r) {
            return Err(GraphError::Unreachable(v));
        }

        let max_degree = succ.iter().map(Vec::len).max().unwrap_or(0);
        let edge_count = succ.iter().map(Vec::len).sum();
        Ok(Self {
            succ,
            root,
            labels,
            reverse_topo,
            max_degree,
            edge_count,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.succ.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_count
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    /// Maximum out-degree.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn successors(&self, v: Vertex) -> &[Vertex] {
        &self.succ[v]
    }

    pub fn is_sink(&self, v: Vertex) -> bool {
        self.succ[v].is_empty()
    }

    pub fn label(&self, v: Vertex) -> Option<&str> {
        self.labels[v].as_deref()
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    /// Interior positions (those with at least one move), in id order.
    pub fn interior(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.num_vertices()).filter(move |&v| !self.is_sink(v))
    }

    pub fn num_interior(&self) -> usize {
        self.succ.iter().filter(|s| !s.is_empty()).count()
    }

    /// Ordering `u_1..u_n` with every successor of `u_i` strictly before it.
    pub fn reverse_topological_order(&self) -> &[Vertex] {
        &self.reverse_topo
    }

    /// Iterates over all edges `(u, w)` in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, out)| out.iter().map(move |&w| (u, w)))
    }

    pub fn has_edge(&self, u: Vertex, w: Vertex) -> bool {
        u < self.num_vertices() && self.succ[u].contains(&w)
    }

    /// Index of `w` within `F(u)`, if it is a successor.
    pub fn successor_index(&self, u: Vertex, w: Vertex) -> Option<usize> {
        self.succ[u].iter().position(|&x| x == w)
    }

    pub fn predecessors(&self) -> Vec<Vec<Vertex>> {
        let mut preds = vec![Vec::new(); self.num_vertices()];
        for (u, w) in self.edges() {
            preds[w].push(u);
        }
        preds
    }

    /// Number of distinct strategies, or `None` on overflow.
    pub fn strategy_count(&self) -> Option<u128> {
        self.succ
            .iter()
            .filter(|s| !s.is_empty())
            .try_fold(1u128, |acc, s| acc.checked_mul(s.len() as u128))
    }

    /// Returns a copy with one extra vertex `n` whose only move is to the old root.
    pub fn with_new_root(&self) -> Self {
        let n = self.num_vertices();
        let mut succ = self.succ.clone();
        succ.push(vec![self.root]);
        let mut labels = self.labels.clone();
        labels.push(Some("v*".to_string()));
        let mut reverse_topo = self.reverse_topo.clone();
        reverse_topo.push(n);
        Self {
            succ,
            root: n,
            labels,
            reverse_topo,
            max_degree: self.max_degree.max(1),
            edge_count: self.edge_count + 1,
        }
    }

    pub fn to_json_model(&self) -> GameJson {
        GameJson {
            root: self.root,
            vertices: (0..self.num_vertices())
                .map(|v| VertexJson {
                    id: v,
                    succ: self.succ[v].clone(),
                    label: self.labels[v].clone(),
                })
                .collect(),
        }
    }

    pub fn from_json_model(model: GameJson) -> Result<Self, GraphError> {
        let n = model.vertices.len();
        let mut succ: Vec<Option<Vec<Vertex>>> = vec![None; n];
        let mut labels = vec![None; n];
        for vj in model.vertices {
            if vj.id >= n {
                return Err(GraphError::BadVertexId { id: vj.id, n });
            }
            if succ[vj.id].is_some() {
                return Err(GraphError::DuplicateVertex(vj.id));
            }
            succ[vj.id] = Some(vj.succ);
            labels[vj.id] = vj.label;
        }
        let succ = succ.into_iter().map(|s| s.unwrap_or_default()).collect();
        Self::with_labels(succ, model.root, labels)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_model()).expect("game json serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, GameParseError> {
        let model: GameJson = serde_json::from_str(text)?;
        Ok(Self::from_json_model(model)?)
    }

    /// Graphviz rendering; the root is drawn with a double circle.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph game {\n");
        for v in 0..self.num_vertices() {
            let name = self.label(v).map_or_else(|| v.to_string(), str::to_string);
            let shape = if v == self.root {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(out, "  {v} [label=\"{name}\", shape={shape}];");
        }
        for (u, w) in self.edges() {
            let _ = writeln!(out, "  {u} -> {w};");
        }
        out.push_str("}\n");
        out
    }
}

/// Builds a graph from a keyed adjacency map, assigning dense ids in key order.
///
/// Returns the graph together with the key of each dense id.
pub fn build_graph<K>(
    adjacency: &[(K, Vec<K>)],
    root: &K,
) -> Result<(GameGraph, Vec<K>), GraphError>
where
    K: Clone + Eq + std::hash::Hash,
{
    let mut index: HashMap<K, Vertex> = HashMap::with_capacity(adjacency.len());
    for (i, (key, _)) in adjacency.iter().enumerate() {
        if index.insert(key.clone(), i).is_some() {
            return Err(GraphError::DuplicateVertex(i));
        }
    }
    let mut succ = Vec::with_capacity(adjacency.len());
    for (i, (_, out)) in adjacency.iter().enumerate() {
        let mut ids = Vec::with_capacity(out.len());
        for key in out {
            let &id = index.get(key).ok_or(GraphError::DanglingEdge {
                from: i,
                to: usize::MAX,
            })?;
            ids.push(id);
        }
        succ.push(ids);
    }
    let &root_id = index.get(root).ok_or(GraphError::BadRoot(usize::MAX))?;
    let keys = adjacency.iter().map(|(k, _)| k.clone()).collect();
    Ok((GameGraph::new(succ, root_id)?, keys))
}

#[derive(Debug, Error)]
pub enum GameParseError {
    #[error("malformed game json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GameJson {
    pub root: Vertex,
    pub vertices: Vec<VertexJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct VertexJson {
    pub id: Vertex,
    pub succ: Vec<Vertex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// A total choice of move at every interior position.
///
/// Stored as the index into each vertex's successor list; the entry at a sink
/// is always zero and carries no meaning.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Strategy {
    choice: Vec<u32>,
}

impl Strategy {
    /// Builds a strategy from successor indices, validating each against `g`.
    pub fn from_indices(g: &GameGraph, choice: Vec<u32>) -> Result<Self, StrategyError> {
        if choice.len() != g.num_vertices() {
            return Err(StrategyError::WrongLength {
                expected: g.num_vertices(),
                got: choice.len(),
            });
        }
        for (v, &c) in choice.iter().enumerate() {
            let deg = g.successors(v).len();
            if deg == 0 && c != 0 {
                return Err(StrategyError::ChoiceAtSink(v));
            }
            if deg > 0 && c as usize >= deg {
                return Err(StrategyError::NotASuccessor {
                    vertex: v,
                    choice: c as usize,
                });
            }
        }
        Ok(Self { choice })
    }

    /// Unchecked constructor for hot loops that already guarantee validity.
    pub(crate) fn from_indices_unchecked(choice: Vec<u32>) -> Self {
        Self { choice }
    }

    /// Builds a strategy from the chosen target vertex at each position
    /// (`None` exactly at sinks).
    pub fn from_targets(g: &GameGraph, targets: &[Option<Vertex>]) -> Result<Self, StrategyError> {
        if targets.len() != g.num_vertices() {
            return Err(StrategyError::WrongLength {
                expected: g.num_vertices(),
                got: targets.len(),
            });
        }
        let mut choice = Vec::with_capacity(targets.len());
        for (v, t) in targets.iter().enumerate() {
            match (g.is_sink(v), t) {
                (true, None) => choice.push(0),
                (true, Some(_)) => return Err(StrategyError::ChoiceAtSink(v)),
                (false, None) => return Err(StrategyError::MissingChoice(v)),
                (false, Some(w)) => {
                    let idx = g
                        .successor_index(v, *w)
                        .ok_or(StrategyError::NotASuccessor {
                            vertex: v,
                            choice: *w,
                        })?;
                    choice.push(idx as u32);
                }
            }
        }
        Ok(Self { choice })
    }

    /// The strategy that always takes the first listed successor.
    pub fn first_choice(g: &GameGraph) -> Self {
        Self {
            choice: vec![0; g.num_vertices()],
        }
    }

    pub fn index(&self, v: Vertex) -> usize {
        self.choice[v] as usize
    }

    pub fn indices(&self) -> &[u32] {
        &self.choice
    }

    pub(crate) fn set_index(&mut self, v: Vertex, idx: u32) {
        self.choice[v] = idx;
    }

    /// Position reached by moving from `v`; `None` at sinks.
    pub fn target(&self, g: &GameGraph, v: Vertex) -> Option<Vertex> {
        g.successors(v).get(self.choice[v] as usize).copied()
    }

    pub fn targets(&self, g: &GameGraph) -> Vec<Option<Vertex>> {
        (0..g.num_vertices()).map(|v| self.target(g, v)).collect()
    }
}

/// The outcome of playing `x` (moving first) against `y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transcript {
    /// Positions in order of play, from the root to a sink.
    pub visited: Vec<Vertex>,
    /// `+1` if the first mover wins, `-1` otherwise.
    pub winner: i8,
}

impl Transcript {
    pub fn moves(&self) -> usize {
        self.visited.len() - 1
    }
}

/// Plays `x` against `y` from the root under normal play.
pub fn play(g: &GameGraph, x: &Strategy, y: &Strategy) -> Transcript {
    let mut visited = vec![g.root()];
    let mut v = g.root();
    let mut players = [x, y];
    while let Some(w) = players[0].target(g, v) {
        visited.push(w);
        v = w;
        players.swap(0, 1);
    }
    // The player to move at the sink has lost; an odd move count means that is y.
    let winner = if visited.len() % 2 == 0 { 1 } else { -1 };
    Transcript { visited, winner }
}

/// Winner only, without recording the path.
#[inline]
pub fn payoff(g: &GameGraph, x: &Strategy, y: &Strategy) -> i8 {
    payoff_from(g, g.root(), x, y)
}

/// Iterative evaluation of `f^v(x, y)`: `x` to move at `v`.
#[inline]
pub fn payoff_from(g: &GameGraph, v: Vertex, x: &Strategy, y: &Strategy) -> i8 {
    let mut v = v;
    let mut moves = 0usize;
    let mut players = [x, y];
    while let Some(w) = players[0].target(g, v) {
        v = w;
        moves += 1;
        players.swap(0, 1);
    }
    if moves % 2 == 1 {
        1
    } else {
        -1
    }
}

/// Recursive reference form of the payoff: `-1` at a sink, otherwise the
/// negated payoff from `x(v)` with roles swapped.
pub fn play_from(g: &GameGraph, v: Vertex, x: &Strategy, y: &Strategy) -> i8 {
    match x.target(g, v) {
        None => -1,
        Some(w) => -play_from(g, w, y, x),
    }
}

/// Odometer over every strategy of a game, in lexicographic order of the
/// interior positions' successor indices (highest vertex id varies fastest).
#[derive(Debug, Clone)]
pub struct StrategyIter<'a> {
    g: &'a GameGraph,
    interior: Vec<Vertex>,
    next: Option<Vec<u32>>,
}

impl<'a> StrategyIter<'a> {
    pub fn new(g: &'a GameGraph) -> Self {
        Self {
            g,
            interior: g.interior().collect(),
            next: Some(vec![0; g.num_vertices()]),
        }
    }
}

impl Iterator for StrategyIter<'_> {
    type Item = Strategy;

    fn next(&mut self) -> Option<Strategy> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for &v in self.interior.iter().rev() {
            let deg = self.g.successors(v).len() as u32;
            if succ[v] + 1 < deg {
                succ[v] += 1;
                self.next = Some(succ);
                break;
            }
            succ[v] = 0;
        }
        Some(Strategy::from_indices_unchecked(current))
    }
}

pub fn all_strategies(g: &GameGraph) -> StrategyIter<'_> {
    StrategyIter::new(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    // v0=0, a=1, b=2, c=3, d=4
    fn fig1() -> GameGraph {
        GameGraph::new(vec![vec![1, 2, 4], vec![2], vec![3, 4], vec![4], vec![]], 0).unwrap()
    }

    #[test]
    fn fig1_shape() {
        let g = fig1();
        assert_eq!(g.num_vertices(), 5);
        assert_eq!(g.max_degree(), 3);
        assert_eq!(g.num_edges(), 7);
        assert_eq!(g.num_interior(), 4);
        let order = g.reverse_topological_order();
        let pos: Vec<usize> = (0..5)
            .map(|v| order.iter().position(|&u| u == v).unwrap())
            .collect();
        for (u, w) in g.edges() {
            assert!(pos[w] < pos[u]);
        }
    }

    #[test]
    fn single_vertex() {
        let g = GameGraph::new(vec![vec![]], 0).unwrap();
        assert_eq!(g.num_vertices(), 1);
        assert_eq!(g.interior().count(), 0);
        assert_eq!(g.max_degree(), 0);
    }

    #[test]
    fn rejects_cycle() {
        let err = GameGraph::new(
            vec![vec![1, 2, 4], vec![2], vec![3, 4], vec![4], vec![0]],
            0,
        );
        assert_eq!(err.unwrap_err(), GraphError::CycleDetected);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            GameGraph::new(vec![vec![0]], 0),
            Err(GraphError::BadEdge {
                reason: "self-loop",
                ..
            })
        ));
        assert!(matches!(
            GameGraph::new(vec![vec![1, 1], vec![]], 0),
            Err(GraphError::BadEdge {
                reason: "duplicate edge",
                ..
            })
        ));
        assert_eq!(
            GameGraph::new(vec![vec![], vec![0]], 0).unwrap_err(),
            GraphError::Unreachable(1)
        );
        assert!(matches!(
            GameGraph::new(vec![vec![5]], 0),
            Err(GraphError::DanglingEdge { .. })
        ));
    }

    #[test]
    fn keyed_builder() {
        let adj = vec![
            ("v0", vec!["a", "b", "d"]),
            ("a", vec!["b"]),
            ("b", vec!["c", "d"]),
            ("c", vec!["d"]),
            ("d", vec![]),
        ];
        let (g, keys) = build_graph(&adj, &"v0").unwrap();
        assert_eq!(g, fig1());
        assert_eq!(keys[2], "b");
    }

    #[test]
    fn json_round_trip() {
        let g = fig1();
        let back = GameGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
        assert!(GameGraph::from_json(r#"{"root":0,"vertices":[{"id":3,"succ":[]}]}"#).is_err());
    }

    #[test]
    fn fig1_first_move_to_d_wins() {
        let g = fig1();
        let x = Strategy::from_targets(&g, &[Some(4), Some(2), Some(3), Some(4), None]).unwrap();
        for y in all_strategies(&g) {
            let t = play(&g, &x, &y);
            assert_eq!(t.winner, 1);
            assert_eq!(t.visited, vec![0, 4]);
        }
    }

    #[test]
    fn play_from_sink_and_forced_tail() {
        let g = fig1();
        let x = Strategy::first_choice(&g);
        assert_eq!(play_from(&g, 4, &x, &x), -1);
        for y in all_strategies(&g) {
            assert_eq!(play_from(&g, 3, &x, &y), 1);
        }
    }

    #[test]
    fn strategy_validation() {
        let g = fig1();
        assert!(Strategy::from_indices(&g, vec![3, 0, 0, 0, 0]).is_err());
        assert!(Strategy::from_indices(&g, vec![0, 0, 0, 0, 1]).is_err());
        assert!(Strategy::from_indices(&g, vec![0; 4]).is_err());
        assert!(Strategy::from_targets(&g, &[Some(3), Some(2), Some(3), Some(4), None]).is_err());
        assert!(Strategy::from_targets(&g, &[None, Some(2), Some(3), Some(4), None]).is_err());
    }

    #[test]
    fn dot_export_marks_root() {
        let dot = fig1().to_dot();
        assert!(dot.contains("0 [label=\"0\", shape=doublecircle]"));
        assert!(dot.contains("2 -> 3;"));
    }
}
