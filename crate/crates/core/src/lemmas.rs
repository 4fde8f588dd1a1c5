//! Constructive versions of the two structural lemmas behind the locality
//! gap: a small binocular exists in every multigraph that is dense enough,
//! and improvements found after deleting looped vertices lift back to the
//! original graph with at most two extra edges.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{self, ConnectedEdgeSubsets, SubsetSearch};

/// Undirected multigraph; loops and parallel edges allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multigraph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Multigraph {
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(i) = edges
            .iter()
            .position(|&(u, v)| u >= num_vertices || v >= num_vertices)
        {
            return Err(Error::invalid(format!(
                "edge {i} has an endpoint out of range"
            )));
        }
        Ok(Multigraph {
            num_vertices,
            edges,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> (usize, usize) {
        self.edges[i]
    }

    fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.num_vertices];
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            inc[u].push(i);
            if u != v {
                inc[v].push(i);
            }
        }
        inc
    }

    fn first_loop_at(&self, v: usize) -> Option<usize> {
        self.edges.iter().position(|&(a, b)| a == v && b == v)
    }
}

/// A connected edge set with exactly one more edge than vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binocular {
    pub edges: Vec<usize>,
    pub vertices: BTreeSet<usize>,
}

impl Binocular {
    pub fn from_edges(h: &Multigraph, mut edges: Vec<usize>) -> Self {
        edges.sort_unstable();
        let ends: Vec<(usize, usize)> = edges
            .iter()
            .filter(|&&e| e < h.num_edges())
            .map(|&e| h.edge(e))
            .collect();
        Binocular {
            edges,
            vertices: graph::vertices_of(&ends),
        }
    }

    pub fn is_valid_in(&self, h: &Multigraph) -> bool {
        let mut sorted = self.edges.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.edges.len() || sorted.iter().any(|&e| e >= h.num_edges()) {
            return false;
        }
        let ends: Vec<(usize, usize)> = sorted.iter().map(|&e| h.edge(e)).collect();
        graph::vertices_of(&ends) == self.vertices
            && graph::is_connected(&ends)
            && ends.len() == self.vertices.len() + 1
    }
}

/// `4 p log2(n) - 1`, the vertex bound for [`find_binocular`].
pub fn binocular_vertex_bound(n: usize, p: usize) -> f64 {
    4.0 * p as f64 * (n as f64).log2() - 1.0
}

/// Finds a binocular with few vertices in a multigraph with
/// `|E| >= (p + 1) / p * |V|`.
///
/// The graph is pruned (degree <= 1 vertices, acyclic or unicyclic
/// components, and runs of at least `p` degree-2 vertices) until what remains
/// has minimum degree 2 and short degree-2 chains. Contracting the chains
/// gives a multigraph of minimum degree 3, where a breadth-first search from
/// the root closes a first cycle; that cycle with its root path is contracted
/// and a second search from the contracted vertex closes another. The union,
/// with chains expanded back, is the result.
pub fn find_binocular(h: &Multigraph, p: usize) -> Result<Binocular> {
    let (n, m) = (h.num_vertices(), h.num_edges());
    if p == 0 || n == 0 || p * m < (p + 1) * n {
        return Err(Error::invalid(format!(
            "need p >= 1, |V| >= 1 and p|E| >= (p+1)|V|; got p={p}, |V|={n}, |E|={m}"
        )));
    }
    let alive = prune(h, p);
    let core = contract_chains(h, &alive);
    if core.vertices.is_empty() {
        return Err(Error::invalid("pruning left no vertex of degree 3"));
    }
    let bound = binocular_vertex_bound(n, p);
    let mut best: Option<Binocular> = None;
    for root in 0..core.vertices.len() {
        let Some(found) = core.binocular_from(root) else {
            continue;
        };
        let edges: Vec<usize> = found
            .iter()
            .flat_map(|&ce| core.chains[ce].iter().copied())
            .collect();
        let b = Binocular::from_edges(h, edges);
        let small_enough = b.vertices.len() as f64 <= bound;
        if best
            .as_ref()
            .is_none_or(|cur| b.vertices.len() < cur.vertices.len())
        {
            best = Some(b);
        }
        if small_enough {
            break;
        }
    }
    best.ok_or_else(|| Error::invalid("no binocular found in the pruned core"))
}

/// Alive-edge mask after pruning to the dense part of the graph.
fn prune(h: &Multigraph, p: usize) -> Vec<bool> {
    let n = h.num_vertices();
    let inc = h.incidence();
    let mut edge_alive = vec![true; h.num_edges()];
    let mut vert_alive = vec![true; n];
    let degree = |v: usize, edge_alive: &[bool]| -> usize {
        inc[v]
            .iter()
            .filter(|&&e| edge_alive[e])
            .map(|&e| if h.edge(e).0 == h.edge(e).1 { 2 } else { 1 })
            .sum()
    };
    let kill = |v: usize, edge_alive: &mut [bool], vert_alive: &mut [bool]| {
        vert_alive[v] = false;
        for &e in &inc[v] {
            edge_alive[e] = false;
        }
    };
    loop {
        let mut changed = false;
        // low-degree vertices
        let mut queue: VecDeque<usize> = (0..n)
            .filter(|&v| vert_alive[v] && degree(v, &edge_alive) <= 1)
            .collect();
        while let Some(v) = queue.pop_front() {
            if !vert_alive[v] || degree(v, &edge_alive) > 1 {
                continue;
            }
            let neighbours: Vec<usize> = inc[v]
                .iter()
                .filter(|&&e| edge_alive[e])
                .map(|&e| {
                    if h.edge(e).0 == v {
                        h.edge(e).1
                    } else {
                        h.edge(e).0
                    }
                })
                .collect();
            kill(v, &mut edge_alive, &mut vert_alive);
            changed = true;
            for u in neighbours {
                if vert_alive[u] && degree(u, &edge_alive) <= 1 {
                    queue.push_back(u);
                }
            }
        }
        // components with at most one cycle
        let mut uf = graph::UnionFind::new(n);
        for (e, &(u, v)) in h.edges().iter().enumerate() {
            if edge_alive[e] {
                uf.union(u, v);
            }
        }
        let mut comp_v = vec![0usize; n];
        let mut comp_e = vec![0usize; n];
        for v in 0..n {
            if vert_alive[v] {
                comp_v[uf.find(v)] += 1;
            }
        }
        for (e, &(u, _)) in h.edges().iter().enumerate() {
            if edge_alive[e] {
                comp_e[uf.find(u)] += 1;
            }
        }
        for v in 0..n {
            let r = uf.find(v);
            if vert_alive[v] && comp_e[r] <= comp_v[r] {
                kill(v, &mut edge_alive, &mut vert_alive);
                changed = true;
            }
        }
        // long runs of degree-2 vertices
        let mut seen = vec![false; n];
        for start in 0..n {
            if !vert_alive[start] || seen[start] || degree(start, &edge_alive) != 2 {
                continue;
            }
            let chain = degree_two_run(h, &inc, &edge_alive, &vert_alive, start, &degree);
            for &v in &chain {
                seen[v] = true;
            }
            if chain.len() >= p {
                for &v in &chain {
                    kill(v, &mut edge_alive, &mut vert_alive);
                }
                changed = true;
            }
        }
        if !changed {
            return edge_alive;
        }
    }
}

/// The maximal run of degree-2 vertices containing `start`.
fn degree_two_run(
    h: &Multigraph,
    inc: &[Vec<usize>],
    edge_alive: &[bool],
    vert_alive: &[bool],
    start: usize,
    degree: &dyn Fn(usize, &[bool]) -> usize,
) -> Vec<usize> {
    let mut run = vec![start];
    let mut in_run = BTreeSet::from([start]);
    let live: Vec<usize> = inc[start]
        .iter()
        .copied()
        .filter(|&e| edge_alive[e])
        .collect();
    for &first in &live {
        let mut came = first;
        let mut at = start;
        loop {
            let (a, b) = h.edge(came);
            let next = if a == at { b } else { a };
            if !vert_alive[next] || in_run.contains(&next) || degree(next, edge_alive) != 2 {
                break;
            }
            run.push(next);
            in_run.insert(next);
            let Some(&out) = inc[next].iter().find(|&&e| edge_alive[e] && e != came) else {
                break;
            };
            came = out;
            at = next;
        }
    }
    run
}

/// Minimum-degree-3 multigraph obtained by replacing degree-2 chains with
/// single edges; each contracted edge remembers the original chain.
struct Core {
    vertices: Vec<usize>,
    ends: Vec<(usize, usize)>,
    chains: Vec<Vec<usize>>,
    incident: Vec<Vec<usize>>,
}

fn contract_chains(h: &Multigraph, edge_alive: &[bool]) -> Core {
    let n = h.num_vertices();
    let mut deg = vec![0usize; n];
    for (e, &(u, v)) in h.edges().iter().enumerate() {
        if edge_alive[e] {
            deg[u] += 1;
            deg[v] += 1;
        }
    }
    let vertices: Vec<usize> = (0..n).filter(|&v| deg[v] >= 3).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &v) in vertices.iter().enumerate() {
        index[v] = i;
    }
    let inc = h.incidence();
    let mut used = vec![false; h.num_edges()];
    let mut ends = Vec::new();
    let mut chains = Vec::new();
    for &w in &vertices {
        for &first in &inc[w] {
            if !edge_alive[first] || used[first] {
                continue;
            }
            let mut chain = vec![first];
            used[first] = true;
            let mut at = w;
            let mut came = first;
            loop {
                let (a, b) = h.edge(came);
                let next = if a == at { b } else { a };
                if deg[next] >= 3 {
                    ends.push((index[w], index[next]));
                    break;
                }
                let out = inc[next]
                    .iter()
                    .copied()
                    .find(|&e| edge_alive[e] && !used[e])
                    .expect("degree-2 vertex continues its chain");
                used[out] = true;
                chain.push(out);
                came = out;
                at = next;
            }
            chains.push(chain);
        }
    }
    let mut incident = vec![Vec::new(); vertices.len()];
    for (i, &(u, v)) in ends.iter().enumerate() {
        incident[u].push(i);
        if u != v {
            incident[v].push(i);
        }
    }
    Core {
        vertices,
        ends,
        chains,
        incident,
    }
}

impl Core {
    /// Two rounds of breadth-first search: the first closes a cycle reachable
    /// from `root`, the second runs from that cycle contracted to a point.
    fn binocular_from(&self, root: usize) -> Option<Vec<usize>> {
        let first = self.bfs_cycle(&[root], &BTreeSet::new())?;
        let merged: Vec<usize> = {
            let ends: Vec<(usize, usize)> = first.iter().map(|&e| self.ends[e]).collect();
            graph::vertices_of(&ends).into_iter().collect()
        };
        let contracted: BTreeSet<usize> = first.iter().copied().collect();
        let second = self.bfs_cycle(&merged, &contracted)?;
        let mut union: Vec<usize> = first.into_iter().chain(second).collect();
        union.sort_unstable();
        union.dedup();
        Some(self.strip_pendants(union))
    }

    /// Breadth-first search from a set of vertices treated as one node.
    /// Edges in `skip` are ignored. Returns the tree paths of the first
    /// non-tree edge met, plus that edge.
    fn bfs_cycle(&self, sources: &[usize], skip: &BTreeSet<usize>) -> Option<Vec<usize>> {
        let nv = self.vertices.len();
        let mut parent: Vec<Option<usize>> = vec![None; nv];
        let mut seen = vec![false; nv];
        let mut queue: VecDeque<Vec<usize>> = VecDeque::new();
        for &s in sources {
            seen[s] = true;
        }
        queue.push_back(sources.to_vec());
        while let Some(node) = queue.pop_front() {
            for &v in &node {
                for &e in &self.incident[v] {
                    if skip.contains(&e) || parent[v] == Some(e) {
                        continue;
                    }
                    let (a, b) = self.ends[e];
                    let u = if a == v { b } else { a };
                    if node.contains(&u) && node.len() > 1 && u != v {
                        // both ends inside the contracted node: a loop there,
                        // met from each side; take it once
                        if v > u {
                            continue;
                        }
                        return Some(vec![e]);
                    }
                    if seen[u] {
                        if parent[u] == Some(e) {
                            continue;
                        }
                        let mut path = vec![e];
                        path.extend(self.root_path(&parent, v));
                        path.extend(self.root_path(&parent, u));
                        path.sort_unstable();
                        path.dedup();
                        return Some(path);
                    }
                    seen[u] = true;
                    parent[u] = Some(e);
                    queue.push_back(vec![u]);
                }
            }
        }
        None
    }

    fn root_path(&self, parent: &[Option<usize>], mut v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while let Some(e) = parent[v] {
            out.push(e);
            let (a, b) = self.ends[e];
            v = if a == v { b } else { a };
        }
        out
    }

    fn strip_pendants(&self, mut edges: Vec<usize>) -> Vec<usize> {
        loop {
            let mut deg = std::collections::BTreeMap::<usize, usize>::new();
            for &e in &edges {
                let (a, b) = self.ends[e];
                *deg.entry(a).or_default() += 1;
                *deg.entry(b).or_default() += 1;
            }
            let before = edges.len();
            edges.retain(|&e| {
                let (a, b) = self.ends[e];
                deg[&a] > 1 && deg[&b] > 1
            });
            if edges.len() == before {
                return edges;
            }
        }
    }
}

/// Result of deleting every vertex that carries a loop.
#[derive(Clone, Debug)]
pub struct LoopReduction {
    pub reduced: Multigraph,
    /// Original edge behind each reduced edge.
    pub edge_origin: Vec<usize>,
    /// Original vertex behind each reduced vertex.
    pub vertex_origin: Vec<usize>,
}

/// Deletes all looped vertices. An edge that loses exactly one endpoint
/// becomes a loop on the endpoint that survives; edges that lose both vanish.
pub fn loop_reduce(h: &Multigraph) -> LoopReduction {
    let n = h.num_vertices();
    let mut deleted = vec![false; n];
    for &(u, v) in h.edges() {
        if u == v {
            deleted[u] = true;
        }
    }
    let vertex_origin: Vec<usize> = (0..n).filter(|&v| !deleted[v]).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &v) in vertex_origin.iter().enumerate() {
        index[v] = i;
    }
    let mut edges = Vec::new();
    let mut edge_origin = Vec::new();
    for (e, &(u, v)) in h.edges().iter().enumerate() {
        let mapped = match (deleted[u], deleted[v]) {
            (false, false) => (index[u], index[v]),
            (true, false) => (index[v], index[v]),
            (false, true) => (index[u], index[u]),
            (true, true) => continue,
        };
        edges.push(mapped);
        edge_origin.push(e);
    }
    LoopReduction {
        reduced: Multigraph {
            num_vertices: vertex_origin.len(),
            edges,
        },
        edge_origin,
        vertex_origin,
    }
}

/// Lifts a binocular of the reduced graph to one of the original graph.
///
/// Loop-free binoculars carry over unchanged. A reduced loop at `v` stands
/// for an original edge `(v, u)` with `u` looped; it is replaced by that edge
/// plus a loop at `u`. When both cycles are such loops and lead to the same
/// `u`, the two edges close a cycle through `u` and one loop at `u` suffices.
pub fn lift_improvement(
    h: &Multigraph,
    reduction: &LoopReduction,
    improvement: &Binocular,
) -> Result<Binocular> {
    if !improvement.is_valid_in(&reduction.reduced) {
        return Err(Error::invalid(
            "improvement is not a binocular of the reduced graph",
        ));
    }
    let mut edges = Vec::new();
    let mut lost_ends = Vec::new();
    for &e in &improvement.edges {
        let orig = reduction.edge_origin[e];
        edges.push(orig);
        let (a, b) = reduction.reduced.edge(e);
        if a == b {
            let v = reduction.vertex_origin[a];
            let (x, y) = h.edge(orig);
            lost_ends.push(if x == v { y } else { x });
        }
    }
    lost_ends.sort_unstable();
    lost_ends.dedup();
    for u in lost_ends {
        let l = h
            .first_loop_at(u)
            .ok_or_else(|| Error::invalid(format!("deleted vertex {u} has no loop")))?;
        edges.push(l);
    }
    let lifted = Binocular::from_edges(h, edges);
    if !lifted.is_valid_in(h) {
        return Err(Error::invalid("lifted edge set is not a binocular"));
    }
    Ok(lifted)
}

/// Every binocular with at most `max_edges` edges, up to `limit` of them.
pub fn enumerate_binoculars(h: &Multigraph, max_edges: usize, limit: usize) -> Vec<Binocular> {
    let subsets = ConnectedEdgeSubsets::new(h.num_vertices(), h.edges());
    let mut out = Vec::new();
    let mut budget = u64::MAX;
    let r = subsets.search(
        max_edges,
        &mut budget,
        |_, _| true,
        |sub| {
            let ends: Vec<(usize, usize)> = sub.iter().map(|&e| h.edge(e)).collect();
            if sub.len() == graph::vertices_of(&ends).len() + 1 {
                out.push(Binocular::from_edges(h, sub.to_vec()));
            }
            out.len() >= limit
        },
    );
    debug_assert!(!matches!(r, SubsetSearch::BudgetExceeded));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mg(n: usize, edges: &[(usize, usize)]) -> Multigraph {
        Multigraph::new(n, edges.to_vec()).unwrap()
    }

    #[test]
    fn two_loops_on_one_vertex() {
        let h = mg(1, &[(0, 0), (0, 0)]);
        let b = find_binocular(&h, 1).unwrap();
        assert_eq!(b.edges, vec![0, 1]);
        assert_eq!(b.vertices.len(), 1);
        assert!(b.is_valid_in(&h));
    }

    #[test]
    fn theta_graph_is_returned_whole() {
        let h = mg(2, &[(0, 1), (0, 1), (0, 1)]);
        assert!(find_binocular(&h, 1).is_err());
        let b = find_binocular(&h, 2).unwrap();
        assert_eq!(b.edges, vec![0, 1, 2]);
        assert!(b.is_valid_in(&h));
    }

    #[test]
    fn precondition_is_enforced() {
        let h = mg(3, &[(0, 1), (1, 2), (2, 0)]);
        assert!(matches!(find_binocular(&h, 1), Err(Error::InvalidInput(_))));
        assert!(find_binocular(&mg(0, &[]), 1).is_err());
    }

    #[test]
    fn chains_are_expanded() {
        // two triangles sharing vertex 0 with a pendant path attached: with
        // p = 3 the degree-2 vertices stay and get expanded back
        let h = mg(
            6,
            &[
                (0, 1),
                (1, 2),
                (2, 0),
                (0, 3),
                (3, 4),
                (4, 0),
                (4, 5),
                (0, 0),
                (0, 0),
            ],
        );
        // |E| = 9, |V| = 6: 3 * 9 >= 4 * 6
        let b = find_binocular(&h, 3).unwrap();
        assert!(b.is_valid_in(&h));
    }

    #[test]
    fn loop_free_reduction_is_identity() {
        let h = mg(3, &[(0, 1), (1, 2)]);
        let r = loop_reduce(&h);
        assert_eq!(r.reduced, h);
        assert_eq!(r.edge_origin, vec![0, 1]);
    }

    #[test]
    fn looped_endpoint_becomes_loop() {
        // u = 0, v = 1 with a loop on v
        let h = mg(2, &[(0, 1), (1, 1)]);
        let r = loop_reduce(&h);
        assert_eq!(r.reduced, mg(1, &[(0, 0)]));
        assert_eq!(r.edge_origin, vec![0]);
        assert_eq!(r.vertex_origin, vec![0]);
    }

    #[test]
    fn lone_looped_vertex_disappears() {
        let r = loop_reduce(&mg(1, &[(0, 0)]));
        assert_eq!(r.reduced.num_vertices(), 0);
        assert_eq!(r.reduced.num_edges(), 0);
    }

    #[test]
    fn lift_cycle_plus_loop() {
        // triangle 0-1-2, edge 2-3, loop at 3
        let h = mg(4, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 3)]);
        let r = loop_reduce(&h);
        let b = Binocular::from_edges(&r.reduced, (0..r.reduced.num_edges()).collect());
        assert!(b.is_valid_in(&r.reduced));
        let lifted = lift_improvement(&h, &r, &b).unwrap();
        assert_eq!(lifted.edges.len(), b.edges.len() + 1);
        assert!(lifted.is_valid_in(&h));
    }

    #[test]
    fn lift_two_loops_distinct_partners() {
        // reduced: 0 - 1 path with loops from 0-2 and 1-3; 2 and 3 looped
        let h = mg(4, &[(0, 1), (0, 2), (1, 3), (2, 2), (3, 3)]);
        let r = loop_reduce(&h);
        let b = Binocular::from_edges(&r.reduced, (0..r.reduced.num_edges()).collect());
        assert!(b.is_valid_in(&r.reduced));
        let lifted = lift_improvement(&h, &r, &b).unwrap();
        assert_eq!(lifted.edges.len(), b.edges.len() + 2);
        assert!(lifted.is_valid_in(&h));
    }

    #[test]
    fn lift_two_loops_shared_partner() {
        // reduced: path 0 - 1 with loops from 0-2 and 1-2; 2 looped
        let h = mg(3, &[(0, 1), (0, 2), (1, 2), (2, 2)]);
        let r = loop_reduce(&h);
        let b = Binocular::from_edges(&r.reduced, (0..r.reduced.num_edges()).collect());
        assert!(b.is_valid_in(&r.reduced));
        let lifted = lift_improvement(&h, &r, &b).unwrap();
        // the two edges into 2 close a cycle with the path; one loop at 2
        assert_eq!(lifted.edges.len(), b.edges.len() + 1);
        assert!(lifted.is_valid_in(&h));
    }

    #[test]
    fn lift_rejects_non_binocular() {
        let h = mg(2, &[(0, 1), (1, 1)]);
        let r = loop_reduce(&h);
        let bad = Binocular::from_edges(&r.reduced, vec![0]);
        assert!(lift_improvement(&h, &r, &bad).is_err());
    }

    #[test]
    fn enumeration_finds_small_binoculars() {
        let h = mg(2, &[(0, 0), (0, 1), (1, 1), (0, 1)]);
        let all = enumerate_binoculars(&h, 4, 100);
        assert!(all.iter().all(|b| b.is_valid_in(&h)));
        // {0,1,2}, {0,3,2}, {0,1,3}, {1,2,3}
        assert_eq!(all.len(), 4);
    }
}
