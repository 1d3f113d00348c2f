//! Allocations, Pareto efficiency and intensity dominance.
//!
//! Dominance is only defined between Pareto-efficient allocations. `x`
//! intensity-dominates `y` when they share at least one flipped pair of
//! agents, i.e. `(x_i, x_j) = (y_j, y_i) = (a, b)`, every flipped pair has
//! `s_i(a, b) >= s_j(a, b)`, and at least one of those comparisons is strict.

use std::collections::VecDeque;
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use thiserror::Error;

use crate::model::{CanonicalIntensity, ObjectId, Profile, MAX_OBJECTS};
use crate::perm;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EfficiencyError {
    #[error("n = {0} is outside the supported range 1..={MAX_OBJECTS}")]
    UnsupportedSize(usize),
    #[error("allocation {0} is not Pareto efficient; intensity dominance is undefined for it")]
    NotParetoEfficient(String),
    #[error("allocation has {got} agents, profile has {n}")]
    SizeMismatch { got: usize, n: usize },
    #[error("not a bijection: {0:?}")]
    NotABijection(Vec<u8>),
}

/// Agent `i` receives `objects()[i]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Allocation(Vec<ObjectId>);

impl Allocation {
    pub fn new(objects: Vec<ObjectId>) -> Result<Self, EfficiencyError> {
        let n = objects.len();
        let mut seen = vec![false; n];
        for o in &objects {
            if o.index() >= n || std::mem::replace(&mut seen[o.index()], true) {
                return Err(EfficiencyError::NotABijection(
                    objects.iter().map(|o| o.0).collect(),
                ));
            }
        }
        Ok(Allocation(objects))
    }

    /// Parses a display string such as `"bac"`.
    pub fn parse(label: &str) -> Result<Self, EfficiencyError> {
        Self::new(
            label
                .bytes()
                .map(|b| ObjectId(b.wrapping_sub(b'a')))
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn objects(&self) -> &[ObjectId] {
        &self.0
    }

    pub fn object(&self, agent: usize) -> ObjectId {
        self.0[agent]
    }

    /// Object names concatenated in agent order, e.g. `abc`.
    pub fn label(&self) -> String {
        let n = self.n();
        self.0.iter().map(|o| o.name(n)).collect()
    }

    /// Image under renaming objects `o -> perm[o]`.
    pub fn relabel_objects(&self, perm: &[u8]) -> Self {
        Allocation(self.0.iter().map(|o| ObjectId(perm[o.index()])).collect())
    }

    /// Image under the agent relabelling of [`Profile::permute_agents`]:
    /// new agent `i` is old agent `perm[i]`.
    pub fn permute_agents(&self, perm: &[u8]) -> Self {
        Allocation(perm.iter().map(|&p| self.0[p as usize]).collect())
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Agents `i < j` with `x_i = a = y_j` and `x_j = b = y_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlippedPair {
    pub i: usize,
    pub j: usize,
    pub a: ObjectId,
    pub b: ObjectId,
}

fn check_size(n: usize) -> Result<(), EfficiencyError> {
    if (1..=MAX_OBJECTS).contains(&n) {
        Ok(())
    } else {
        Err(EfficiencyError::UnsupportedSize(n))
    }
}

/// All `n!` allocations in lexicographic order.
pub fn all_allocations(n: usize) -> Result<Vec<Allocation>, EfficiencyError> {
    check_size(n)?;
    Ok(perm::permutations(n)
        .into_iter()
        .map(|p| Allocation(p.into_iter().map(ObjectId).collect()))
        .collect())
}

/// True iff every agent weakly prefers `y` to `x` and some agent strictly.
pub fn pareto_dominates(y: &Allocation, x: &Allocation, profile: &Profile) -> bool {
    let mut strict = false;
    for (i, s) in profile.agents().iter().enumerate() {
        let v = s.value(y.object(i), x.object(i));
        if v < 0 {
            return false;
        }
        strict |= v > 0;
    }
    strict
}

/// Allocations not Pareto-dominated by any other, in lexicographic order.
pub fn pareto_set(profile: &Profile) -> Vec<Allocation> {
    let all = all_allocations(profile.n()).expect("profile size is in range");
    all.iter()
        .filter(|x| !all.iter().any(|y| pareto_dominates(y, x, profile)))
        .cloned()
        .collect()
}

pub fn flipped_pairs(x: &Allocation, y: &Allocation) -> Vec<FlippedPair> {
    let n = x.n();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (x.object(i), x.object(j));
            if a != b && y.object(i) == b && y.object(j) == a {
                out.push(FlippedPair { i, j, a, b });
            }
        }
    }
    out
}

fn dominates_via(pairs: &[FlippedPair], agents: &[CanonicalIntensity]) -> bool {
    let mut strict = false;
    for f in pairs {
        let (vi, vj) = (agents[f.i].value(f.a, f.b), agents[f.j].value(f.a, f.b));
        if vi < vj {
            return false;
        }
        strict |= vi > vj;
    }
    strict
}

/// Intensity dominance of `x` over `y`. Both must be Pareto efficient.
pub fn intensity_dominates(
    x: &Allocation,
    y: &Allocation,
    profile: &Profile,
) -> Result<bool, EfficiencyError> {
    for alloc in [x, y] {
        if alloc.n() != profile.n() {
            return Err(EfficiencyError::SizeMismatch {
                got: alloc.n(),
                n: profile.n(),
            });
        }
    }
    let pe = pareto_set(profile);
    for alloc in [x, y] {
        if !pe.contains(alloc) {
            return Err(EfficiencyError::NotParetoEfficient(alloc.label()));
        }
    }
    Ok(dominates_via(&flipped_pairs(x, y), profile.agents()))
}

/// Intensity dominance over the Pareto-efficient allocations of a profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominanceDigraph {
    nodes: Vec<Allocation>,
    /// `(from, to)` node indices, sorted.
    edges: Vec<(usize, usize)>,
}

impl DominanceDigraph {
    pub fn new(nodes: Vec<Allocation>, mut edges: Vec<(usize, usize)>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        DominanceDigraph { nodes, edges }
    }

    pub fn nodes(&self) -> &[Allocation] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_allocations(&self) -> impl Iterator<Item = (&Allocation, &Allocation)> {
        self.edges
            .iter()
            .map(|&(a, b)| (&self.nodes[a], &self.nodes[b]))
    }

    pub fn node_index(&self, x: &Allocation) -> Option<usize> {
        self.nodes.iter().position(|n| n == x)
    }

    pub fn has_edge(&self, x: &Allocation, y: &Allocation) -> bool {
        match (self.node_index(x), self.node_index(y)) {
            (Some(a), Some(b)) => self.edges.binary_search(&(a, b)).is_ok(),
            _ => false,
        }
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for &(_, to) in &self.edges {
            deg[to] += 1;
        }
        deg
    }

    /// Nodes with no incoming edge.
    pub fn undominated(&self) -> Vec<Allocation> {
        self.in_degrees()
            .iter()
            .zip(&self.nodes)
            .filter(|(&d, _)| d == 0)
            .map(|(_, x)| x.clone())
            .collect()
    }

    fn successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            succ[a].push(b);
        }
        succ
    }

    /// Subgraph induced by the given allocations, in the order given;
    /// allocations that are not nodes are skipped.
    pub fn induced(&self, keep: &[Allocation]) -> DominanceDigraph {
        let old: Vec<usize> = keep.iter().filter_map(|x| self.node_index(x)).collect();
        let new_index = |i: usize| old.iter().position(|&o| o == i);
        let edges = self
            .edges
            .iter()
            .filter_map(|&(a, b)| Some((new_index(a)?, new_index(b)?)))
            .collect();
        DominanceDigraph::new(old.iter().map(|&i| self.nodes[i].clone()).collect(), edges)
    }

    /// Shortest directed cycle through `start`, as node indices beginning
    /// with `start`.
    pub fn shortest_cycle_through(&self, start: usize) -> Option<Vec<usize>> {
        let succ = self.successors();
        let mut parent: Vec<Option<usize>> = vec![None; self.nodes.len()];
        let mut queue = VecDeque::new();
        for &s in &succ[start] {
            if s == start {
                return Some(vec![start]);
            }
            if parent[s].is_none() {
                parent[s] = Some(start);
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &w in &succ[v] {
                if w == start {
                    let mut path = vec![v];
                    let mut cur = v;
                    while let Some(p) = parent[cur] {
                        if p == start {
                            break;
                        }
                        path.push(p);
                        cur = p;
                    }
                    path.push(start);
                    path.reverse();
                    return Some(path);
                }
                if parent[w].is_none() && w != start {
                    parent[w] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        None
    }
}

/// Dominance digraph over every Pareto-efficient allocation of `profile`.
pub fn dominance_digraph(profile: &Profile) -> DominanceDigraph {
    let nodes = pareto_set(profile);
    let mut edges = Vec::new();
    for (a, x) in nodes.iter().enumerate() {
        for (b, y) in nodes.iter().enumerate() {
            if a != b && dominates_via(&flipped_pairs(x, y), profile.agents()) {
                edges.push((a, b));
            }
        }
    }
    DominanceDigraph::new(nodes, edges)
}

/// Pareto-efficient allocations that no Pareto-efficient allocation dominates.
pub fn intensity_efficient_set(profile: &Profile) -> Vec<Allocation> {
    dominance_digraph(profile).undominated()
}

/// A directed cycle `w1 D w2 D ... D wk D w1`, if any.
///
/// Cycles are found inside a non-trivial strongly connected component; the
/// component containing the smallest node is used, and the cycle returned is
/// the shortest through that component's smallest node.
pub fn find_cycle(g: &DominanceDigraph) -> Option<Vec<Allocation>> {
    let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(g.nodes.len(), g.edges.len());
    let ids: Vec<NodeIndex> = (0..g.nodes.len()).map(|_| graph.add_node(())).collect();
    for &(a, b) in &g.edges {
        graph.add_edge(ids[a], ids[b], ());
    }
    let start = tarjan_scc(&graph)
        .into_iter()
        .filter(|c| c.len() > 1 || graph.contains_edge(c[0], c[0]))
        .map(|c| c.iter().map(|i| i.index()).min().expect("non-empty"))
        .min()?;
    let cycle = g.shortest_cycle_through(start)?;
    Some(cycle.into_iter().map(|i| g.nodes[i].clone()).collect())
}

/// Every elementary directed cycle, each starting at its smallest node,
/// stopping after `limit` cycles.
pub fn elementary_cycles(g: &DominanceDigraph, limit: usize) -> Vec<Vec<Allocation>> {
    let succ = g.successors();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut path = Vec::new();
    let mut on_path = vec![false; g.nodes.len()];
    for start in 0..g.nodes.len() {
        cycles_from(
            start,
            start,
            &succ,
            &mut path,
            &mut on_path,
            &mut out,
            limit,
        );
    }
    out.into_iter()
        .map(|c| c.into_iter().map(|i| g.nodes[i].clone()).collect())
        .collect()
}

fn cycles_from(
    start: usize,
    v: usize,
    succ: &[Vec<usize>],
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Vec<usize>>,
    limit: usize,
) {
    path.push(v);
    on_path[v] = true;
    for &w in &succ[v] {
        if out.len() >= limit {
            break;
        }
        if w == start {
            out.push(path.clone());
        } else if w > start && !on_path[w] {
            cycles_from(start, w, succ, path, on_path, out, limit);
        }
    }
    path.pop();
    on_path[v] = false;
}

/// Existence facts about one profile, computed without building a graph type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub pareto: usize,
    pub edges: usize,
    pub efficient: usize,
    pub cyclic: bool,
}

/// Allocations and flipped-pair structure for one `n`, precomputed so that
/// profiles can be analysed in a tight loop.
pub struct AllocationSpace {
    n: usize,
    allocations: Vec<Allocation>,
    /// Flat objects, `allocations[x].object(i) == objects[x * n + i]`.
    objects: Vec<u8>,
    /// Flipped agent pairs of `(x, y)` live in `flips[offsets[x*N+y]..offsets[x*N+y+1]]`.
    offsets: Vec<u32>,
    flips: Vec<(u8, u8)>,
}

impl AllocationSpace {
    pub fn new(n: usize) -> Result<Self, EfficiencyError> {
        let allocations = all_allocations(n)?;
        let objects = allocations
            .iter()
            .flat_map(|a| a.objects().iter().map(|o| o.0))
            .collect();
        let mut offsets = Vec::with_capacity(allocations.len().pow(2) + 1);
        let mut flips = Vec::new();
        offsets.push(0);
        for x in &allocations {
            for y in &allocations {
                flips.extend(flipped_pairs(x, y).iter().map(|f| (f.i as u8, f.j as u8)));
                offsets.push(flips.len() as u32);
            }
        }
        Ok(AllocationSpace {
            n,
            allocations,
            objects,
            offsets,
            flips,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn allocations(&self) -> &[Allocation] {
        &self.allocations
    }

    #[inline]
    fn obj(&self, x: usize, agent: usize) -> usize {
        self.objects[x * self.n + agent] as usize
    }

    /// Indices of Pareto-efficient allocations, ascending.
    pub fn pareto_indices(&self, agents: &[&CanonicalIntensity]) -> Vec<usize> {
        let total = self.allocations.len();
        (0..total)
            .filter(|&x| {
                !(0..total).any(|y| {
                    let mut strict = false;
                    for (i, s) in agents.iter().enumerate() {
                        let v = s.value_idx(self.obj(y, i), self.obj(x, i));
                        if v < 0 {
                            return false;
                        }
                        strict |= v > 0;
                    }
                    strict
                })
            })
            .collect()
    }

    #[inline]
    fn dominates(&self, x: usize, y: usize, agents: &[&CanonicalIntensity]) -> bool {
        let slot = x * self.allocations.len() + y;
        let pairs = &self.flips[self.offsets[slot] as usize..self.offsets[slot + 1] as usize];
        let mut strict = false;
        for &(i, j) in pairs {
            let (a, b) = (self.obj(x, i as usize), self.obj(x, j as usize));
            let vi = agents[i as usize].value_idx(a, b);
            let vj = agents[j as usize].value_idx(a, b);
            if vi < vj {
                return false;
            }
            strict |= vi > vj;
        }
        strict
    }

    /// Edges between positions of `pareto`.
    fn edges(&self, pareto: &[usize], agents: &[&CanonicalIntensity]) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for (a, &x) in pareto.iter().enumerate() {
            for (b, &y) in pareto.iter().enumerate() {
                if a != b && self.dominates(x, y, agents) {
                    edges.push((a, b));
                }
            }
        }
        edges
    }

    pub fn digraph(&self, agents: &[&CanonicalIntensity]) -> DominanceDigraph {
        let pareto = self.pareto_indices(agents);
        let edges = self.edges(&pareto, agents);
        DominanceDigraph::new(
            pareto
                .iter()
                .map(|&x| self.allocations[x].clone())
                .collect(),
            edges,
        )
    }

    pub fn digraph_of(&self, profile: &Profile) -> DominanceDigraph {
        self.digraph(&profile.agents().iter().collect::<Vec<_>>())
    }

    /// Size of the efficient set and whether dominance is cyclic.
    pub fn verdict(&self, agents: &[&CanonicalIntensity]) -> Verdict {
        let pareto = self.pareto_indices(agents);
        let edges = self.edges(&pareto, agents);
        let m = pareto.len();
        let mut indeg = vec![0u32; m];
        let mut succ = vec![Vec::new(); m];
        for &(a, b) in &edges {
            indeg[b] += 1;
            succ[a].push(b);
        }
        let efficient = indeg.iter().filter(|&&d| d == 0).count();
        // Kahn: the graph is acyclic iff every node can be peeled.
        let mut stack: Vec<usize> = (0..m).filter(|&v| indeg[v] == 0).collect();
        let mut peeled = 0;
        while let Some(v) = stack.pop() {
            peeled += 1;
            for &w in &succ[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    stack.push(w);
                }
            }
        }
        Verdict {
            pareto: m,
            edges: edges.len(),
            efficient,
            cyclic: peeled < m,
        }
    }
}
