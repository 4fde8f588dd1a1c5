//! Small multigraph helpers shared by the auxiliary graph, the oracles, and
//! the lemma constructions. Edges are `(u, v)` endpoint pairs; `u == v` is a
//! loop and contributes 2 to the degree of its vertex.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// The three connected two-cycle structures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shape {
    /// Two edge-disjoint cycles meeting in one vertex.
    TwoCyclesSharedVertex,
    /// Two vertex-disjoint cycles joined by a path.
    TwoCyclesJoinedByPath,
    /// Two vertices joined by three edge-disjoint paths.
    ThreePaths,
}

impl Shape {
    pub fn as_str(self) -> &'static str {
        match self {
            Shape::TwoCyclesSharedVertex => "shared-vertex",
            Shape::TwoCyclesJoinedByPath => "joined-by-path",
            Shape::ThreePaths => "three-paths",
        }
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

pub fn vertices_of(ends: &[(usize, usize)]) -> BTreeSet<usize> {
    ends.iter().flat_map(|&(u, v)| [u, v]).collect()
}

/// Whether the graph formed by these edges (and only their endpoints) is
/// connected. An empty edge set is not.
pub fn is_connected(ends: &[(usize, usize)]) -> bool {
    if ends.is_empty() {
        return false;
    }
    let verts: Vec<usize> = vertices_of(ends).into_iter().collect();
    let index = |v: usize| verts.binary_search(&v).unwrap();
    let mut uf = UnionFind::new(verts.len());
    let mut comps = verts.len();
    for &(u, v) in ends {
        if uf.union(index(u), index(v)) {
            comps -= 1;
        }
    }
    comps == 1
}

/// Classifies a connected edge set with exactly one more edge than vertices.
/// Pendant trees are ignored. Returns `None` for anything else.
pub fn classify_shape(ends: &[(usize, usize)]) -> Option<Shape> {
    if !is_connected(ends) || ends.len() != vertices_of(ends).len() + 1 {
        return None;
    }
    let mut alive = vec![true; ends.len()];
    let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
    for &(u, v) in ends {
        *degree.entry(u).or_default() += 1;
        *degree.entry(v).or_default() += 1;
    }
    loop {
        let leaf = degree.iter().find(|(_, &d)| d == 1).map(|(&v, _)| v);
        let Some(leaf) = leaf else { break };
        let e = (0..ends.len())
            .find(|&e| alive[e] && (ends[e].0 == leaf || ends[e].1 == leaf))
            .unwrap();
        alive[e] = false;
        let (u, v) = ends[e];
        *degree.get_mut(&u).unwrap() -= 1;
        *degree.get_mut(&v).unwrap() -= 1;
    }
    if degree.values().any(|&d| d == 4) {
        return Some(Shape::TwoCyclesSharedVertex);
    }
    let branch: Vec<usize> = degree
        .iter()
        .filter(|(_, &d)| d == 3)
        .map(|(&v, _)| v)
        .collect();
    if branch.len() != 2 {
        return None;
    }
    let (a, b) = (branch[0], branch[1]);
    // Follow each of the three chains leaving `a`; a theta graph has all of
    // them ending at `b`.
    let mut used = vec![false; ends.len()];
    let mut chains_to_b = 0;
    for start in 0..ends.len() {
        if !alive[start] || used[start] || (ends[start].0 != a && ends[start].1 != a) {
            continue;
        }
        let mut e = start;
        let mut at = a;
        loop {
            used[e] = true;
            let (u, v) = ends[e];
            let next = if u == at { v } else { u };
            if degree[&next] != 2 {
                if next == b {
                    chains_to_b += 1;
                }
                break;
            }
            at = next;
            match (0..ends.len())
                .find(|&f| alive[f] && !used[f] && (ends[f].0 == at || ends[f].1 == at))
            {
                Some(f) => e = f,
                None => break,
            }
        }
    }
    if chains_to_b == 3 {
        Some(Shape::ThreePaths)
    } else {
        Some(Shape::TwoCyclesJoinedByPath)
    }
}

/// Enumerates connected edge subsets of a multigraph, each exactly once, in
/// the style of the ESU subgraph enumeration applied to the line graph.
pub struct ConnectedEdgeSubsets<'a> {
    ends: &'a [(usize, usize)],
    neighbors: Vec<Vec<usize>>,
}

/// Outcome of a bounded subset enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubsetSearch {
    Found(Vec<usize>),
    Exhausted,
    BudgetExceeded,
}

impl<'a> ConnectedEdgeSubsets<'a> {
    pub fn new(num_vertices: usize, ends: &'a [(usize, usize)]) -> Self {
        let mut incident = vec![Vec::new(); num_vertices];
        for (e, &(u, v)) in ends.iter().enumerate() {
            incident[u].push(e);
            if v != u {
                incident[v].push(e);
            }
        }
        let neighbors = ends
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| {
                let mut n: Vec<usize> = incident[u]
                    .iter()
                    .chain(incident[v].iter())
                    .copied()
                    .filter(|&f| f != e)
                    .collect();
                n.sort_unstable();
                n.dedup();
                n
            })
            .collect();
        ConnectedEdgeSubsets { ends, neighbors }
    }

    /// Walks all connected subsets with at most `max_size` edges.
    ///
    /// `compatible(subset, e)` may veto adding edge `e` to `subset`; every
    /// extension of a vetoed subset is skipped. `accept(subset)` ends the
    /// search with `Found`. `budget` counts visited subsets.
    pub fn search<C, A>(
        &self,
        max_size: usize,
        budget: &mut u64,
        mut compatible: C,
        mut accept: A,
    ) -> SubsetSearch
    where
        C: FnMut(&[usize], usize) -> bool,
        A: FnMut(&[usize]) -> bool,
    {
        if max_size == 0 {
            return SubsetSearch::Exhausted;
        }
        let m = self.ends.len();
        let mut state = EsuState {
            in_sub: vec![false; m],
            near: vec![0; m],
            sub: Vec::with_capacity(max_size),
        };
        for start in 0..m {
            if !compatible(&[], start) {
                continue;
            }
            state.push(start, &self.neighbors);
            let ext: Vec<usize> = self.neighbors[start]
                .iter()
                .copied()
                .filter(|&f| f > start)
                .collect();
            let r = self.extend(
                &mut state,
                ext,
                start,
                max_size,
                budget,
                &mut compatible,
                &mut accept,
            );
            state.pop(&self.neighbors);
            if let Some(r) = r {
                return r;
            }
        }
        SubsetSearch::Exhausted
    }

    #[allow(clippy::too_many_arguments)]
    fn extend<C, A>(
        &self,
        state: &mut EsuState,
        mut ext: Vec<usize>,
        start: usize,
        max_size: usize,
        budget: &mut u64,
        compatible: &mut C,
        accept: &mut A,
    ) -> Option<SubsetSearch>
    where
        C: FnMut(&[usize], usize) -> bool,
        A: FnMut(&[usize]) -> bool,
    {
        if *budget == 0 {
            return Some(SubsetSearch::BudgetExceeded);
        }
        *budget -= 1;
        if accept(&state.sub) {
            return Some(SubsetSearch::Found(state.sub.clone()));
        }
        if state.sub.len() == max_size {
            return None;
        }
        while let Some(w) = ext.pop() {
            if !compatible(&state.sub, w) {
                continue;
            }
            let mut next_ext = ext.clone();
            for &u in &self.neighbors[w] {
                if u > start && !state.in_sub[u] && state.near[u] == 0 && u != w {
                    next_ext.push(u);
                }
            }
            state.push(w, &self.neighbors);
            let r = self.extend(state, next_ext, start, max_size, budget, compatible, accept);
            state.pop(&self.neighbors);
            if r.is_some() {
                return r;
            }
        }
        None
    }
}

struct EsuState {
    in_sub: Vec<bool>,
    // number of subset edges adjacent to each edge
    near: Vec<u32>,
    sub: Vec<usize>,
}

impl EsuState {
    fn push(&mut self, e: usize, neighbors: &[Vec<usize>]) {
        self.in_sub[e] = true;
        for &u in &neighbors[e] {
            self.near[u] += 1;
        }
        self.sub.push(e);
    }

    fn pop(&mut self, neighbors: &[Vec<usize>]) {
        let e = self.sub.pop().unwrap();
        self.in_sub[e] = false;
        for &u in &neighbors[e] {
            self.near[u] -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connectivity() {
        assert!(is_connected(&[(0, 0)]));
        assert!(is_connected(&[(0, 1), (1, 2)]));
        assert!(!is_connected(&[(0, 1), (2, 3)]));
        assert!(!is_connected(&[]));
    }

    #[test]
    fn shapes() {
        assert_eq!(
            classify_shape(&[(0, 0), (0, 0)]),
            Some(Shape::TwoCyclesSharedVertex)
        );
        assert_eq!(
            classify_shape(&[(0, 1), (0, 1), (0, 1)]),
            Some(Shape::ThreePaths)
        );
        assert_eq!(
            classify_shape(&[(0, 0), (0, 1), (1, 1)]),
            Some(Shape::TwoCyclesJoinedByPath)
        );
        assert_eq!(
            classify_shape(&[(0, 1), (1, 2), (2, 0), (0, 0), (2, 5)]),
            Some(Shape::TwoCyclesSharedVertex)
        );
        assert_eq!(
            classify_shape(&[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 3)]),
            Some(Shape::TwoCyclesJoinedByPath)
        );
        assert_eq!(
            classify_shape(&[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]),
            Some(Shape::ThreePaths)
        );
        assert_eq!(classify_shape(&[(0, 1), (1, 0)]), None);
    }

    fn count_subsets(n: usize, ends: &[(usize, usize)], max: usize) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut budget = u64::MAX;
        let r = ConnectedEdgeSubsets::new(n, ends).search(
            max,
            &mut budget,
            |_, _| true,
            |s| {
                let mut s = s.to_vec();
                s.sort_unstable();
                assert!(seen.insert(s), "subset visited twice");
                false
            },
        );
        assert_eq!(r, SubsetSearch::Exhausted);
        seen.len()
    }

    fn brute_force(ends: &[(usize, usize)], max: usize) -> usize {
        (1u32..(1 << ends.len()))
            .filter(|m| m.count_ones() as usize <= max)
            .filter(|m| {
                let sub: Vec<_> = (0..ends.len())
                    .filter(|i| m & (1 << i) != 0)
                    .map(|i| ends[i])
                    .collect();
                is_connected(&sub)
            })
            .count()
    }

    #[test]
    fn esu_matches_brute_force() {
        let graphs: Vec<(usize, Vec<(usize, usize)>)> = vec![
            (3, vec![(0, 1), (1, 2), (2, 0), (0, 0)]),
            (4, vec![(0, 1), (0, 1), (1, 2), (2, 3), (3, 3), (1, 3)]),
            (
                5,
                vec![(0, 1), (2, 3), (3, 4), (4, 2), (1, 1), (0, 4), (2, 2)],
            ),
        ];
        for (n, ends) in graphs {
            for max in 1..=ends.len() {
                assert_eq!(count_subsets(n, &ends, max), brute_force(&ends, max));
            }
        }
    }
}
