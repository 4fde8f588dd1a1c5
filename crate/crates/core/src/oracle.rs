//! Ground-truth engines used by the tests and by the certified search mode:
//! an exact maximum packing, an exhaustive canonical-improvement search, and
//! a brute-force colorful-walk enumerator.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;

use crate::auxgraph::{AuxMultigraph, ImprovementCandidate};
use crate::colorcoding::Coloring;
use crate::error::{Error, Result};
use crate::graph::{self, ConnectedEdgeSubsets, Shape, SubsetSearch};
use crate::instance::{Instance, Packing, SetId};

/// Limits for the exhaustive searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: u64,
    pub time_limit: Option<Duration>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: 50_000_000,
            time_limit: None,
        }
    }
}

impl Budget {
    pub fn nodes(max_nodes: u64) -> Self {
        Budget {
            max_nodes,
            time_limit: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExactOutcome {
    pub packing: Packing,
    /// Whether the search finished, i.e. `packing` is a maximum packing.
    pub optimal: bool,
    pub nodes: u64,
}

struct BranchAndBound<'a> {
    instance: &'a Instance,
    // conflicting sets, excluding the set itself
    conflicts: Vec<FixedBitSet>,
    best: Vec<SetId>,
    chosen: Vec<SetId>,
    nodes: u64,
    budget: Budget,
    started: Instant,
    aborted: bool,
}

impl BranchAndBound<'_> {
    fn upper_bound(&self, candidates: &FixedBitSet) -> usize {
        let count = candidates.count_ones(..);
        let mut union = FixedBitSet::with_capacity(self.instance.ground_size());
        for id in candidates.ones() {
            for &e in self.instance.set(id).elements() {
                union.insert(e as usize);
            }
        }
        count.min(union.count_ones(..) / self.instance.k())
    }

    fn out_of_budget(&mut self) -> bool {
        if self.nodes >= self.budget.max_nodes {
            return true;
        }
        if let Some(limit) = self.budget.time_limit {
            if self.nodes.is_multiple_of(1024) && self.started.elapsed() > limit {
                return true;
            }
        }
        false
    }

    fn run(&mut self, candidates: FixedBitSet) {
        if self.aborted {
            return;
        }
        if self.out_of_budget() {
            self.aborted = true;
            return;
        }
        self.nodes += 1;
        let Some(v) = candidates.ones().next() else {
            if self.chosen.len() > self.best.len() {
                self.best = self.chosen.clone();
            }
            return;
        };
        if self.chosen.len() + self.upper_bound(&candidates) <= self.best.len() {
            return;
        }
        let mut with = candidates.clone();
        with.difference_with(&self.conflicts[v]);
        with.set(v, false);
        self.chosen.push(v);
        self.run(with);
        self.chosen.pop();
        let mut without = candidates;
        without.set(v, false);
        self.run(without);
    }
}

/// Maximum packing by include/exclude branch and bound, seeded with the
/// greedy packing and pruned by `min(#candidates, |union of candidates| / k)`.
pub fn exact_max_packing(instance: &Instance, budget: Budget) -> ExactOutcome {
    let n = instance.num_sets();
    let mut owners: Vec<Vec<SetId>> = vec![Vec::new(); instance.ground_size()];
    for id in 0..n {
        for &e in instance.set(id).elements() {
            owners[e as usize].push(id);
        }
    }
    let mut conflicts = vec![FixedBitSet::with_capacity(n); n];
    for list in &owners {
        for &a in list {
            for &b in list {
                if a != b {
                    conflicts[a].insert(b);
                }
            }
        }
    }
    let greedy = crate::localsearch::greedy_maximalize(instance, &Packing::empty());
    let mut bb = BranchAndBound {
        instance,
        conflicts,
        best: greedy.members().iter().copied().collect(),
        chosen: Vec::new(),
        nodes: 0,
        budget,
        started: Instant::now(),
        aborted: false,
    };
    let mut all = FixedBitSet::with_capacity(n);
    all.insert_range(..);
    bb.run(all);
    ExactOutcome {
        packing: Packing::from_members_unchecked(bb.best.iter().copied().collect()),
        optimal: !bb.aborted,
        nodes: bb.nodes,
    }
}

/// Exhaustive search for a canonical improvement of at most `t` edges.
///
/// Connected edge subsets with pairwise disjoint labels are enumerated in
/// increasing size, so the first hit is a smallest improvement. `Ok(None)`
/// certifies that no such improvement exists.
pub fn naive_canonical_search(
    g: &AuxMultigraph,
    instance: &Instance,
    t: usize,
    budget: Budget,
) -> Result<Option<ImprovementCandidate>> {
    let m = g.num_edges();
    let mut clash = vec![FixedBitSet::with_capacity(m); m];
    for e in 0..m {
        for f in e + 1..m {
            if instance.conflicts(g.edge(e).label, g.edge(f).label) {
                clash[e].insert(f);
                clash[f].insert(e);
            }
        }
    }
    let ends = g.endpoint_pairs();
    let subsets = ConnectedEdgeSubsets::new(g.num_vertices(), &ends);
    let mut remaining = budget.max_nodes;
    for size in 2..=t.min(m) {
        let outcome = subsets.search(
            size,
            &mut remaining,
            |sub, w| sub.iter().all(|&e| !clash[e][w]),
            |sub| {
                let pairs: Vec<(usize, usize)> = sub.iter().map(|&e| ends[e]).collect();
                sub.len() > graph::vertices_of(&pairs).len()
            },
        );
        match outcome {
            SubsetSearch::Found(mut edges) => {
                edges.sort_unstable();
                return Ok(Some(ImprovementCandidate::from_edges(
                    g,
                    edges,
                    Shape::TwoCyclesSharedVertex,
                )));
            }
            SubsetSearch::Exhausted => {}
            SubsetSearch::BudgetExceeded => {
                return Err(Error::Budget(format!(
                    "naive improvement search exceeded {} nodes at size {size}",
                    budget.max_nodes
                )));
            }
        }
    }
    Ok(None)
}

/// All walks of exactly `len` edges from `s` to `t` whose edges are rainbow
/// and whose color sets are pairwise disjoint. Walks are directed traversals,
/// so a walk and its reversal are listed separately when `s != t`.
pub fn enumerate_colorful_walks(
    g: &AuxMultigraph,
    instance: &Instance,
    coloring: &Coloring,
    s: usize,
    t: usize,
    len: usize,
) -> Vec<Vec<usize>> {
    let edge_colors: Vec<Option<Vec<usize>>> = g
        .edges()
        .iter()
        .map(|edge| {
            let colors: Vec<usize> = instance
                .set(edge.label)
                .elements()
                .iter()
                .map(|&e| coloring.color(e))
                .collect();
            let distinct: HashSet<usize> = colors.iter().copied().collect();
            (distinct.len() == colors.len()).then_some(colors)
        })
        .collect();
    let mut out = Vec::new();
    let mut walk = Vec::new();
    let mut used = HashSet::new();
    walk_dfs(g, &edge_colors, s, t, len, &mut walk, &mut used, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn walk_dfs(
    g: &AuxMultigraph,
    edge_colors: &[Option<Vec<usize>>],
    at: usize,
    target: usize,
    remaining: usize,
    walk: &mut Vec<usize>,
    used: &mut HashSet<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if remaining == 0 {
        if at == target {
            out.push(walk.clone());
        }
        return;
    }
    for (e, edge) in g.edges().iter().enumerate() {
        if edge.a != at && edge.b != at {
            continue;
        }
        let Some(colors) = &edge_colors[e] else {
            continue;
        };
        if walk.contains(&e) || colors.iter().any(|c| used.contains(c)) {
            continue;
        }
        let next = if edge.a == at { edge.b } else { edge.a };
        walk.push(e);
        used.extend(colors.iter().copied());
        walk_dfs(g, edge_colors, next, target, remaining - 1, walk, used, out);
        for c in colors {
            used.remove(c);
        }
        walk.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auxgraph::{build_aux_graph, validate_improvement};
    use crate::instance::random_instance;

    fn subset_optimum(instance: &Instance) -> usize {
        let n = instance.num_sets();
        (0u32..(1 << n))
            .filter(|mask| {
                let ids: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                instance.is_packing(&ids).unwrap()
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn disjoint_instance_takes_everything() {
        let inst = Instance::new(2, vec![vec![0, 1], vec![2, 3], vec![4, 5]], 6).unwrap();
        let out = exact_max_packing(&inst, Budget::default());
        assert!(out.optimal);
        assert_eq!(out.packing.len(), 3);
    }

    #[test]
    fn exact_matches_subset_enumeration() {
        for seed in 0..40 {
            let n = 6 + (seed as usize % 9);
            let inst = random_instance(3, n, 2 * n, seed).unwrap();
            let out = exact_max_packing(&inst, Budget::default());
            assert!(out.optimal);
            assert!(inst.is_packing(out.packing.members()).unwrap());
            assert_eq!(out.packing.len(), subset_optimum(&inst), "seed {seed}");
        }
    }

    #[test]
    fn tiny_budget_is_reported() {
        let inst = random_instance(3, 30, 40, 5).unwrap();
        let out = exact_max_packing(&inst, Budget::nodes(3));
        assert!(!out.optimal);
        assert!(inst.is_packing(out.packing.members()).unwrap());
    }

    #[test]
    fn naive_finds_two_loops() {
        let inst = Instance::new(3, vec![vec![0, 1, 2], vec![0, 3, 4], vec![1, 5, 6]], 7).unwrap();
        let a = Packing::new(&inst, [0]).unwrap();
        let g = build_aux_graph(&inst, &a, true).unwrap();
        let cand = naive_canonical_search(&g, &inst, 5, Budget::default())
            .unwrap()
            .unwrap();
        assert_eq!(cand.size(), 2);
        assert!(validate_improvement(&g, &inst, &cand).is_valid());
    }

    #[test]
    fn naive_reports_absence_on_single_cycle() {
        // packing {0,1}; sets 2 and 3 both join the two members, and two
        // parallel edges form a single cycle
        let inst =
            Instance::new(2, vec![vec![0, 1], vec![2, 3], vec![0, 2], vec![1, 3]], 4).unwrap();
        let a = Packing::new(&inst, [0, 1]).unwrap();
        let g = build_aux_graph(&inst, &a, false).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert!(naive_canonical_search(&g, &inst, 6, Budget::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn naive_budget_error() {
        let inst = random_instance(3, 14, 12, 3).unwrap();
        let a = crate::localsearch::greedy_maximalize(&inst, &Packing::empty());
        let g = build_aux_graph(&inst, &a, true).unwrap();
        if g.num_edges() >= 2 {
            let r = naive_canonical_search(&g, &inst, 10, Budget::nodes(1));
            assert!(matches!(r, Err(Error::Budget(_)) | Ok(Some(_))));
        }
    }

    #[test]
    fn empty_walk_for_zero_length() {
        let inst = Instance::new(1, vec![vec![0]], 1).unwrap();
        let g = AuxMultigraph::from_parts(vec![0, 0], vec![]).unwrap();
        let col = crate::colorcoding::random_coloring(1, 1, 0);
        assert_eq!(
            enumerate_colorful_walks(&g, &inst, &col, 1, 1, 0),
            vec![Vec::<usize>::new()]
        );
        assert!(enumerate_colorful_walks(&g, &inst, &col, 0, 1, 0).is_empty());
    }
}
