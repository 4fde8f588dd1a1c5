use indexmap::IndexMap;

use super::coloring::Coloring;
use super::mask::ColorMask;
use crate::auxgraph::AuxMultigraph;
use crate::error::{Error, Result};
use crate::instance::Instance;

/// Color set of every auxiliary edge under one coloring; `None` marks an edge
/// whose set repeats a color, which can never be part of a colorful walk.
#[derive(Clone, Debug)]
pub struct EdgeColorInfo<M> {
    masks: Vec<Option<M>>,
}

impl<M: ColorMask> EdgeColorInfo<M> {
    pub fn new(g: &AuxMultigraph, instance: &Instance, coloring: &Coloring) -> Result<Self> {
        if coloring.num_colors() > M::CAPACITY {
            return Err(Error::Config(format!(
                "{} colors exceed mask capacity {}",
                coloring.num_colors(),
                M::CAPACITY
            )));
        }
        let masks = g
            .edges()
            .iter()
            .map(|edge| {
                let mut mask = M::empty();
                for &e in instance.set(edge.label).elements() {
                    let c = coloring.color(e);
                    if mask.contains(c) {
                        return None;
                    }
                    mask.insert(c);
                }
                Some(mask)
            })
            .collect();
        Ok(EdgeColorInfo { masks })
    }

    pub fn mask(&self, edge: usize) -> Option<&M> {
        self.masks[edge].as_ref()
    }

    pub fn is_rainbow(&self, edge: usize) -> bool {
        self.masks[edge].is_some()
    }
}

/// How an entry was first reached: through `edge`, coming from vertex `prev`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub edge: usize,
    pub prev: usize,
}

const BASE: Step = Step {
    edge: usize::MAX,
    prev: usize::MAX,
};

type Layer<M> = IndexMap<(usize, usize), IndexMap<M, Step>>;

/// Sparse table of colorful walks: layer `i` maps `(source, target)` to every
/// color set `C` for which a colorful walk of `i` edges from source to target
/// uses exactly the colors in `C`.
#[derive(Clone, Debug)]
pub struct DpTable<M> {
    layers: Vec<Layer<M>>,
    masks: Vec<Option<M>>,
    edge_ends: Vec<(usize, usize)>,
}

/// Fills the table up to walks of `t` edges. Walks start with
/// `D(S, S, 0, {}) = 1` and extend one rainbow edge at a time with colors
/// disjoint from those already used. Fails once more than `max_entries`
/// entries would be stored.
pub fn build_dp<M: ColorMask>(
    g: &AuxMultigraph,
    colors: &EdgeColorInfo<M>,
    t: usize,
    max_entries: usize,
) -> Result<DpTable<M>> {
    let mut layers: Vec<Layer<M>> = Vec::with_capacity(t + 1);
    let mut base: Layer<M> = IndexMap::new();
    for s in 0..g.num_vertices() {
        base.entry((s, s)).or_default().insert(M::empty(), BASE);
    }
    layers.push(base);
    let mut stored = g.num_vertices();
    for _ in 1..=t {
        let prev = layers.last().unwrap();
        let mut next: Layer<M> = IndexMap::new();
        for (&(s, v), sets) in prev {
            for &e in g.incident(v) {
                let Some(b) = colors.mask(e) else { continue };
                let target = g.edge(e).other(v);
                for c in sets.keys() {
                    if !c.is_disjoint(b) {
                        continue;
                    }
                    let slot = next.entry((s, target)).or_default();
                    if let indexmap::map::Entry::Vacant(vac) = slot.entry(c.union(b)) {
                        vac.insert(Step { edge: e, prev: v });
                        stored += 1;
                        if stored > max_entries {
                            return Err(Error::Budget(format!(
                                "color-coding table exceeds {max_entries} entries"
                            )));
                        }
                    }
                }
            }
        }
        layers.push(next);
    }
    Ok(DpTable {
        layers,
        masks: colors.masks.clone(),
        edge_ends: g.edges().iter().map(|e| (e.a, e.b)).collect(),
    })
}

impl<M: ColorMask> DpTable<M> {
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn get(&self, s: usize, t: usize, i: usize, c: &M) -> bool {
        self.layers
            .get(i)
            .and_then(|l| l.get(&(s, t)))
            .is_some_and(|m| m.contains_key(c))
    }

    /// All color sets reachable by walks of `i` edges from `s` to `t`.
    pub fn color_sets(&self, s: usize, t: usize, i: usize) -> impl Iterator<Item = &M> + '_ {
        self.layers
            .get(i)
            .and_then(|l| l.get(&(s, t)))
            .into_iter()
            .flat_map(|m| m.keys())
    }

    /// Number of stored entries in layer `i`.
    pub fn layer_len(&self, i: usize) -> usize {
        self.layers
            .get(i)
            .map_or(0, |l| l.values().map(|m| m.len()).sum())
    }

    /// Every `(source, target)` pair with at least one entry in layer `i`.
    pub fn pairs(&self, i: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.layers
            .get(i)
            .into_iter()
            .flat_map(|l| l.keys().copied())
    }

    /// Reconstructs the edge sequence of the walk recorded for `(s, t, i, c)`.
    pub fn walk(&self, s: usize, t: usize, i: usize, c: &M) -> Option<Vec<usize>> {
        let mut edges = Vec::with_capacity(i);
        let mut at = t;
        let mut colors = *c;
        for level in (1..=i).rev() {
            let step = *self.layers.get(level)?.get(&(s, at))?.get(&colors)?;
            edges.push(step.edge);
            colors = colors.difference(self.masks[step.edge].as_ref()?);
            at = step.prev;
        }
        if at != s || colors != M::empty() {
            return None;
        }
        edges.reverse();
        Some(edges)
    }

    /// Edge endpoints as stored in the graph the table was built from.
    pub fn edge_ends(&self, e: usize) -> (usize, usize) {
        self.edge_ends[e]
    }
}

pub fn find_colorful_path<M: ColorMask>(
    dp: &DpTable<M>,
    s: usize,
    t: usize,
    i: usize,
) -> Option<Vec<usize>> {
    let c = *dp.color_sets(s, t, i).next()?;
    dp.walk(s, t, i, &c)
}

pub fn find_colorful_cycle<M: ColorMask>(
    dp: &DpTable<M>,
    u: usize,
    j: usize,
) -> Option<Vec<usize>> {
    if j == 0 {
        return None;
    }
    find_colorful_path(dp, u, u, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auxgraph::AuxEdge;

    fn edge(label: usize, a: usize, b: usize) -> AuxEdge {
        AuxEdge { label, a, b }
    }

    /// Each edge label `i` is instance set `i`; vertex labels are not used.
    fn setup(
        sets: Vec<Vec<u32>>,
        ground: usize,
        nv: usize,
        edges: Vec<AuxEdge>,
        colors: Vec<u16>,
        kt: usize,
    ) -> (AuxMultigraph, Instance, Coloring) {
        let k = sets[0].len();
        let inst = Instance::new(k, sets, ground).unwrap();
        let g = AuxMultigraph::from_parts((0..nv).collect(), edges).unwrap();
        let col = Coloring::new(colors, kt).unwrap();
        (g, inst, col)
    }

    #[test]
    fn single_edge_single_entry() {
        let (g, inst, col) = setup(vec![vec![0, 1]], 2, 2, vec![edge(0, 0, 1)], vec![2, 3], 4);
        let info = EdgeColorInfo::<u64>::new(&g, &inst, &col).unwrap();
        let dp = build_dp(&g, &info, 2, 1000).unwrap();
        assert!(dp.get(0, 1, 1, &0b1100));
        assert_eq!(dp.color_sets(0, 1, 1).count(), 1);
        assert_eq!(dp.color_sets(0, 0, 1).count(), 0);
        assert_eq!(find_colorful_path(&dp, 0, 1, 1), Some(vec![0]));
        // the only edge cannot be reused
        assert_eq!(dp.layer_len(2), 0);
    }

    #[test]
    fn non_rainbow_edge_is_ignored() {
        let (g, inst, col) = setup(vec![vec![0, 1]], 2, 2, vec![edge(0, 0, 1)], vec![1, 1], 4);
        let info = EdgeColorInfo::<u64>::new(&g, &inst, &col).unwrap();
        assert!(!info.is_rainbow(0));
        let dp = build_dp(&g, &info, 2, 1000).unwrap();
        assert_eq!(dp.layer_len(1), 0);
    }

    #[test]
    fn triangle_closes() {
        let (g, inst, col) = setup(
            vec![vec![0, 1], vec![2, 3], vec![4, 5]],
            6,
            3,
            vec![edge(0, 0, 1), edge(1, 1, 2), edge(2, 2, 0)],
            vec![0, 1, 2, 3, 4, 5],
            6,
        );
        let info = EdgeColorInfo::<u64>::new(&g, &inst, &col).unwrap();
        let dp = build_dp(&g, &info, 3, 1000).unwrap();
        assert!(dp.get(0, 0, 3, &0b111111));
        let cycle = find_colorful_cycle(&dp, 0, 3).unwrap();
        assert_eq!(cycle.len(), 3);
        assert!(find_colorful_cycle(&dp, 0, 2).is_none());
    }

    #[test]
    fn loop_is_a_cycle_of_length_one() {
        let (g, inst, col) = setup(vec![vec![0, 1]], 2, 1, vec![edge(0, 0, 0)], vec![0, 1], 2);
        let info = EdgeColorInfo::<u64>::new(&g, &inst, &col).unwrap();
        let dp = build_dp(&g, &info, 3, 1000).unwrap();
        assert_eq!(find_colorful_cycle(&dp, 0, 1), Some(vec![0]));
    }

    #[test]
    fn wide_mask_matches_word_mask() {
        let (g, inst, col) = setup(
            vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![0, 5]],
            6,
            3,
            vec![edge(0, 0, 1), edge(1, 1, 2), edge(2, 2, 0), edge(3, 1, 1)],
            vec![0, 1, 2, 3, 4, 5],
            6,
        );
        let narrow = build_dp(
            &g,
            &EdgeColorInfo::<u64>::new(&g, &inst, &col).unwrap(),
            4,
            1000,
        )
        .unwrap();
        let wide = build_dp(
            &g,
            &EdgeColorInfo::<super::super::mask::WideMask>::new(&g, &inst, &col).unwrap(),
            4,
            1000,
        )
        .unwrap();
        for i in 0..=4 {
            assert_eq!(narrow.layer_len(i), wide.layer_len(i));
        }
    }

    #[test]
    fn entry_budget_is_enforced() {
        let (g, inst, col) = setup(
            vec![vec![0, 1], vec![2, 3], vec![4, 5]],
            6,
            3,
            vec![edge(0, 0, 1), edge(1, 1, 2), edge(2, 2, 0)],
            vec![0, 1, 2, 3, 4, 5],
            6,
        );
        let info = EdgeColorInfo::<u64>::new(&g, &inst, &col).unwrap();
        assert!(matches!(build_dp(&g, &info, 3, 5), Err(Error::Budget(_))));
    }
}
