//! Switchers and switchability.
//!
//! A path is compatible with an edge set `A` when it leaves every vertex
//! that has an outgoing `A`-edge along one of those edges. `A` is a
//! `v`-switcher when every maximal compatible path from the root passes
//! through `v`, and the switchability `s(v)` is the least depth (max number
//! of `A`-edges on one directed path) over all `v`-switchers.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::game::{GameGraph, Vertex};
use crate::grundy;

pub const DEFAULT_EDGE_LIMIT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SwitchError {
    #[error("edge {0} -> {1} is not in the game graph")]
    ForeignEdge(Vertex, Vertex),
    #[error("vertex {0} is not reachable from the root")]
    Unreachable(Vertex),
    #[error("exact search for vertex {vertex} needs {edges} free edges (limit {limit})")]
    TooLarge {
        vertex: Vertex,
        edges: usize,
        limit: usize,
    },
}

/// A set of edges of a host graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EdgeSet {
    edges: BTreeSet<(Vertex, Vertex)>,
}

impl EdgeSet {
    pub fn new(
        g: &GameGraph,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
    ) -> Result<Self, SwitchError> {
        let edges: BTreeSet<_> = edges.into_iter().collect();
        if let Some(&(u, w)) = edges.iter().find(|&&(u, w)| !g.has_edge(u, w)) {
            return Err(SwitchError::ForeignEdge(u, w));
        }
        Ok(Self { edges })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, u: Vertex, w: Vertex) -> bool {
        self.edges.contains(&(u, w))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.edges.iter().copied()
    }

    /// Whether `u` has at least one outgoing edge in the set.
    pub fn has_out_edge(&self, u: Vertex) -> bool {
        self.edges.range((u, 0)..=(u, Vertex::MAX)).next().is_some()
    }
}

fn check(g: &GameGraph, a: &EdgeSet) -> Result<(), SwitchError> {
    match a.iter().find(|&(u, w)| !g.has_edge(u, w)) {
        Some((u, w)) => Err(SwitchError::ForeignEdge(u, w)),
        None => Ok(()),
    }
}

/// Maximum number of `A`-edges on any directed path.
pub fn depth(g: &GameGraph, a: &EdgeSet) -> Result<usize, SwitchError> {
    check(g, a)?;
    Ok(depth_by(g, |u, w| a.contains(u, w)))
}

fn depth_by(g: &GameGraph, in_set: impl Fn(Vertex, Vertex) -> bool) -> usize {
    let mut best = vec![0usize; g.num_vertices()];
    let mut overall = 0;
    for &v in g.reverse_topological_order() {
        let b = g
            .successors(v)
            .iter()
            .map(|&w| best[w] + usize::from(in_set(v, w)))
            .max()
            .unwrap_or(0);
        best[v] = b;
        overall = overall.max(b);
    }
    overall
}

/// Forced-graph test: from the root, follow only `A`-edges where a vertex
/// has any, otherwise every edge; `A` is a `v`-switcher iff no sink is
/// reachable without passing through `v`.
pub fn is_switcher(g: &GameGraph, a: &EdgeSet, v: Vertex) -> Result<bool, SwitchError> {
    check(g, a)?;
    Ok(forced_avoids_sinks(g, v, |u| {
        if a.has_out_edge(u) {
            g.successors(u)
                .iter()
                .copied()
                .filter(|&w| a.contains(u, w))
                .collect()
        } else {
            g.successors(u).to_vec()
        }
    }))
}

fn forced_avoids_sinks(g: &GameGraph, v: Vertex, forced: impl Fn(Vertex) -> Vec<Vertex>) -> bool {
    if g.root() == v {
        return true;
    }
    let mut seen = vec![false; g.num_vertices()];
    seen[g.root()] = true;
    seen[v] = true;
    let mut stack = vec![g.root()];
    while let Some(u) = stack.pop() {
        if g.is_sink(u) {
            return false;
        }
        for w in forced(u) {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactSearch,
    PathBound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SwitchabilityReport {
    pub vertex: Vertex,
    pub exact: Option<usize>,
    pub upper_bound: usize,
    pub witness: Option<EdgeSet>,
    pub method: Method,
}

impl SwitchabilityReport {
    /// The exact value when known, else the bound.
    pub fn value(&self) -> usize {
        self.exact.unwrap_or(self.upper_bound)
    }
}

/// Shortest root-to-`v` distance in edges, together with one such path.
fn shortest_path(g: &GameGraph, v: Vertex) -> Result<Vec<Vertex>, SwitchError> {
    if v >= g.num_vertices() {
        return Err(SwitchError::Unreachable(v));
    }
    let mut parent = vec![usize::MAX; g.num_vertices()];
    parent[g.root()] = g.root();
    let mut queue = VecDeque::from([g.root()]);
    while let Some(u) = queue.pop_front() {
        if u == v {
            break;
        }
        for &w in g.successors(u) {
            if parent[w] == usize::MAX {
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    if parent[v] == usize::MAX {
        return Err(SwitchError::Unreachable(v));
    }
    let mut path = vec![v];
    let mut cur = v;
    while cur != g.root() {
        cur = parent[cur];
        path.push(cur);
    }
    path.reverse();
    Ok(path)
}

/// Length of a shortest directed path from the root to `v`.
pub fn upper_bound_switchability(g: &GameGraph, v: Vertex) -> Result<usize, SwitchError> {
    Ok(shortest_path(g, v)?.len() - 1)
}

/// The edges of a shortest root-to-`v` path, which always form a `v`-switcher.
pub fn path_switcher(g: &GameGraph, v: Vertex) -> Result<EdgeSet, SwitchError> {
    let path = shortest_path(g, v)?;
    EdgeSet::new(g, path.windows(2).map(|w| (w[0], w[1])))
}

/// `{(v + i, v) : 1 <= i <= k - 1}` restricted to the edges of a subtraction
/// nim graph whose ids are heap sizes.
pub fn subtraction_nim_switcher(g: &GameGraph, k: usize, v: Vertex) -> EdgeSet {
    let edges = (1..k)
        .map(|i| (v + i, v))
        .filter(|&(u, w)| g.has_edge(u, w));
    EdgeSet::new(g, edges).expect("filtered to host edges")
}

/// Vertices whose outgoing edges the exact search may choose from: interior
/// vertices other than `v` that the root reaches without passing `v`.
///
/// Gives up with the running edge count as soon as it exceeds `limit`.
fn search_vertices(g: &GameGraph, v: Vertex, limit: usize) -> Result<Vec<Vertex>, usize> {
    if g.root() == v {
        return Ok(Vec::new());
    }
    let mut seen = vec![false; g.num_vertices()];
    seen[g.root()] = true;
    seen[v] = true;
    let mut stack = vec![g.root()];
    let mut out = Vec::new();
    let mut edges = 0;
    while let Some(u) = stack.pop() {
        edges += g.successors(u).len();
        if edges > limit {
            return Err(edges);
        }
        if !g.is_sink(u) {
            out.push(u);
        }
        for &w in g.successors(u) {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Number of edges the exact search would branch over for `v`.
pub fn search_edge_count(g: &GameGraph, v: Vertex) -> usize {
    match search_vertices(g, v, usize::MAX) {
        Ok(verts) => verts.iter().map(|&u| g.successors(u).len()).sum(),
        Err(edges) => edges,
    }
}

/// Exact `s(v)` by iterative deepening over the target depth.
///
/// At each candidate vertex the search picks a proper subset of its moves to
/// force (the empty subset meaning "not forced"); forcing every move is
/// equivalent to forcing none at greater depth, so it is skipped. Edges out
/// of `v`, or out of vertices reachable only through `v`, never matter and
/// are not branched on. `edge_limit` caps the number of branched edges.
pub fn exact_switchability(
    g: &GameGraph,
    v: Vertex,
    edge_limit: usize,
) -> Result<SwitchabilityReport, SwitchError> {
    if v >= g.num_vertices() {
        return Err(SwitchError::Unreachable(v));
    }
    let verts = search_vertices(g, v, edge_limit).map_err(|edges| SwitchError::TooLarge {
        vertex: v,
        edges,
        limit: edge_limit,
    })?;
    let upper = upper_bound_switchability(g, v)?;
    let mut search = Search {
        g,
        target: v,
        verts: &verts,
        chosen: vec![0u64; g.num_vertices()],
    };
    for d in 0..=upper {
        if search.descend(0, d) {
            let witness = EdgeSet::new(
                g,
                verts.iter().flat_map(|&u| {
                    let mask = search.chosen[u];
                    g.successors(u)
                        .iter()
                        .enumerate()
                        .filter(move |(i, _)| mask >> i & 1 == 1)
                        .map(move |(_, &w)| (u, w))
                }),
            )?;
            return Ok(SwitchabilityReport {
                vertex: v,
                exact: Some(d),
                upper_bound: upper,
                witness: Some(witness),
                method: Method::ExactSearch,
            });
        }
    }
    unreachable!("a shortest root-to-v path is a switcher of depth {upper}")
}

struct Search<'a> {
    g: &'a GameGraph,
    target: Vertex,
    verts: &'a [Vertex],
    /// Bitmask of forced successor indices per vertex.
    chosen: Vec<u64>,
}

impl Search<'_> {
    fn in_set(&self, u: Vertex, w: Vertex) -> bool {
        let mask = self.chosen[u];
        mask != 0
            && self
                .g
                .successors(u)
                .iter()
                .position(|&x| x == w)
                .is_some_and(|i| mask >> i & 1 == 1)
    }

    fn depth(&self) -> usize {
        depth_by(self.g, |u, w| self.in_set(u, w))
    }

    fn is_switcher(&self) -> bool {
        forced_avoids_sinks(self.g, self.target, |u| {
            let mask = self.chosen[u];
            let succ = self.g.successors(u);
            if mask == 0 {
                succ.to_vec()
            } else {
                succ.iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &w)| w)
                    .collect()
            }
        })
    }

    /// Tries every completion of choices from `verts[idx..]` with depth at most `max_depth`.
    fn descend(&mut self, idx: usize, max_depth: usize) -> bool {
        if idx == self.verts.len() {
            return self.is_switcher();
        }
        let u = self.verts[idx];
        let deg = self.g.successors(u).len();
        let full: u64 = if deg >= 64 {
            u64::MAX
        } else {
            (1u64 << deg) - 1
        };
        // mask 0 first, then proper non-empty subsets in increasing order.
        for mask in 0..full {
            self.chosen[u] = mask;
            if mask != 0 && self.depth() > max_depth {
                continue;
            }
            if self.descend(idx + 1, max_depth) {
                return true;
            }
        }
        self.chosen[u] = 0;
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMode {
    Exact,
    Bound,
    Hybrid,
}

impl ProfileMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Bound => "bound",
            Self::Hybrid => "hybrid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SwitchabilityProfile {
    pub mode: ProfileMode,
    pub reports: Vec<SwitchabilityReport>,
    /// Max over all vertices (exact value where known, else bound).
    pub s_bar: usize,
    /// Max over critical positions.
    pub s_hat: usize,
    /// Whether every reported value is exact.
    pub all_exact: bool,
}

impl SwitchabilityProfile {
    pub fn values(&self) -> Vec<Option<usize>> {
        self.reports.iter().map(|r| Some(r.value())).collect()
    }
}

/// Per-vertex switchability for the whole game.
pub fn switchability_profile(
    g: &GameGraph,
    mode: ProfileMode,
    edge_limit: usize,
) -> Result<SwitchabilityProfile, SwitchError> {
    let parent = bfs_tree(g);
    let bound_report = |v: Vertex| -> Result<SwitchabilityReport, SwitchError> {
        let mut path = vec![v];
        let mut cur = v;
        while cur != g.root() {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        Ok(SwitchabilityReport {
            vertex: v,
            exact: None,
            upper_bound: path.len() - 1,
            witness: Some(EdgeSet::new(g, path.windows(2).map(|w| (w[0], w[1])))?),
            method: Method::PathBound,
        })
    };
    let mut reports = Vec::with_capacity(g.num_vertices());
    for v in 0..g.num_vertices() {
        let report = match mode {
            ProfileMode::Exact => exact_switchability(g, v, edge_limit)?,
            ProfileMode::Bound => bound_report(v)?,
            ProfileMode::Hybrid => match exact_switchability(g, v, edge_limit) {
                Ok(r) => r,
                Err(SwitchError::TooLarge { .. }) => bound_report(v)?,
                Err(e) => return Err(e),
            },
        };
        reports.push(report);
    }
    let gd = grundy::grundy_values(g);
    let s_bar = reports
        .iter()
        .map(SwitchabilityReport::value)
        .max()
        .unwrap_or(0);
    let s_hat = gd
        .critical
        .iter()
        .map(|&v| reports[v].value())
        .max()
        .unwrap_or(0);
    let all_exact = reports.iter().all(|r| r.exact.is_some());
    Ok(SwitchabilityProfile {
        mode,
        reports,
        s_bar,
        s_hat,
        all_exact,
    })
}

/// Breadth-first parent pointers from the root (every vertex is reachable).
fn bfs_tree(g: &GameGraph) -> Vec<Vertex> {
    let mut parent = vec![usize::MAX; g.num_vertices()];
    parent[g.root()] = g.root();
    let mut queue = VecDeque::from([g.root()]);
    while let Some(u) = queue.pop_front() {
        for &w in g.successors(u) {
            if parent[w] == usize::MAX {
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    parent
}
