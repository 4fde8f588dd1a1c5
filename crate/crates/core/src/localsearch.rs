//! The outer local search: make the packing maximal, look for a canonical
//! improvement in the auxiliary graph, apply it, repeat until none is found.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxgraph::{apply_improvement, build_aux_graph, AuxMultigraph, ImprovementCandidate};
use crate::colorcoding::{
    derive_seed, search_canonical, ColoringFamily, ExhaustiveFamily, RandomFamily,
    DEFAULT_MAX_ENTRIES,
};
use crate::error::{Error, Result};
use crate::graph::Shape;
use crate::instance::{Element, Instance, Packing, SetId};
use crate::oracle::{naive_canonical_search, Budget};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subroutine {
    #[serde(rename = "color")]
    ColorCoding,
    #[serde(rename = "naive")]
    NaiveEnumeration,
}

impl Subroutine {
    pub fn as_str(self) -> &'static str {
        match self {
            Subroutine::ColorCoding => "color",
            Subroutine::NaiveEnumeration => "naive",
        }
    }
}

/// Source of colorings for the color-coding subroutine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// Independent seeded random colorings, `trials` per call.
    Random,
    /// Every coloring of the elements that appear in auxiliary-graph edges.
    /// Refused when that would take more than `max_colorings` colorings.
    Exhaustive { max_colorings: u64 },
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Largest improvement (in edges) to look for; `None` picks
    /// `4 * ceil(log2 n) + 1`, at least 3.
    pub t: Option<usize>,
    pub trials: u64,
    pub seed: u64,
    pub subroutine: Subroutine,
    pub include_self_loops: bool,
    pub family: FamilyKind,
    pub naive_budget: Budget,
    pub max_dp_entries: usize,
    /// Run the colorings of one call on the rayon pool. The winner is still
    /// the lowest-indexed successful coloring.
    pub parallel_trials: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            t: None,
            trials: 1000,
            seed: 0,
            subroutine: Subroutine::ColorCoding,
            include_self_loops: true,
            family: FamilyKind::Random,
            naive_budget: Budget::default(),
            max_dp_entries: DEFAULT_MAX_ENTRIES,
            parallel_trials: false,
        }
    }
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

pub fn default_t(num_sets: usize) -> usize {
    (4 * ceil_log2(num_sets) + 1).max(3)
}

impl SearchConfig {
    pub fn naive() -> Self {
        SearchConfig {
            subroutine: Subroutine::NaiveEnumeration,
            ..Self::default()
        }
    }

    pub fn resolve_t(&self, num_sets: usize) -> usize {
        self.t.unwrap_or_else(|| default_t(num_sets))
    }

    pub fn validate(&self, num_sets: usize) -> Result<()> {
        let t = self.resolve_t(num_sets);
        if t < 3 {
            return Err(Error::Config(format!("t must be at least 3, got {t}")));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AppliedImprovement {
    pub shape: Shape,
    pub edges: usize,
    pub covered: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationRecord {
    /// Packing size after greedy completion, before the improvement.
    pub packing_size: usize,
    pub greedy_added: usize,
    pub improvement: Option<AppliedImprovement>,
    pub colorings_tried: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchTrace {
    pub t: usize,
    pub iterations: Vec<IterationRecord>,
}

impl SearchTrace {
    pub fn colorings_tried(&self) -> u64 {
        self.iterations.iter().map(|r| r.colorings_tried).sum()
    }

    pub fn improvements(&self) -> usize {
        self.iterations
            .iter()
            .filter(|r| r.improvement.is_some())
            .count()
    }
}

/// Adds every set that conflicts with nothing already chosen, scanning ids in
/// increasing order.
pub fn greedy_maximalize(instance: &Instance, packing: &Packing) -> Packing {
    let mut occupied = packing.occupancy(instance);
    let mut out = packing.clone();
    for id in 0..instance.num_sets() {
        if out.contains(id) {
            continue;
        }
        let elems = instance.set(id).elements();
        if elems.iter().all(|&e| !occupied[e as usize]) {
            for &e in elems {
                occupied[e as usize] = true;
            }
            out.insert(id);
        }
    }
    out
}

pub struct ImprovementSearch {
    pub graph: AuxMultigraph,
    pub candidate: Option<ImprovementCandidate>,
    pub colorings_tried: u64,
}

/// One call of the improvement subroutine. `call` distinguishes successive
/// calls within a run so each gets its own stream of colorings.
pub fn search_improvement(
    instance: &Instance,
    packing: &Packing,
    cfg: &SearchConfig,
    call: u64,
) -> Result<ImprovementSearch> {
    cfg.validate(instance.num_sets())?;
    let t = cfg.resolve_t(instance.num_sets());
    let graph = build_aux_graph(instance, packing, cfg.include_self_loops)?;
    match cfg.subroutine {
        Subroutine::NaiveEnumeration => {
            let candidate = naive_canonical_search(&graph, instance, t, cfg.naive_budget)?;
            Ok(ImprovementSearch {
                graph,
                candidate,
                colorings_tried: 0,
            })
        }
        Subroutine::ColorCoding => {
            if graph.num_edges() < 2 {
                return Ok(ImprovementSearch {
                    graph,
                    candidate: None,
                    colorings_tried: 0,
                });
            }
            let num_colors = instance.k() * t;
            let call_seed = derive_seed(cfg.seed, call);
            let (candidate, tried) = match cfg.family {
                FamilyKind::Random => {
                    let fam = RandomFamily::new(instance.ground_size(), num_colors, call_seed);
                    run_family(&fam, cfg.trials, &graph, instance, t, cfg)?
                }
                FamilyKind::Exhaustive { max_colorings } => {
                    let relevant = edge_elements(&graph, instance);
                    let fam = ExhaustiveFamily::new(
                        instance.ground_size(),
                        num_colors,
                        relevant,
                        max_colorings,
                    )?;
                    let total = fam.size().unwrap_or(0);
                    run_family(&fam, total, &graph, instance, t, cfg)?
                }
            };
            Ok(ImprovementSearch {
                graph,
                candidate,
                colorings_tried: tried,
            })
        }
    }
}

fn edge_elements(g: &AuxMultigraph, instance: &Instance) -> Vec<Element> {
    let mut elems: Vec<Element> = g
        .edges()
        .iter()
        .flat_map(|e| instance.set(e.label).elements().iter().copied())
        .collect();
    elems.sort_unstable();
    elems.dedup();
    elems
}

fn run_family<F: ColoringFamily>(
    family: &F,
    count: u64,
    g: &AuxMultigraph,
    instance: &Instance,
    t: usize,
    cfg: &SearchConfig,
) -> Result<(Option<ImprovementCandidate>, u64)> {
    let trial = |i: u64| -> Option<Result<ImprovementCandidate>> {
        let coloring = family.coloring(i)?;
        search_canonical(g, instance, &coloring, t, cfg.max_dp_entries).transpose()
    };
    if cfg.parallel_trials {
        let hit = (0..count)
            .into_par_iter()
            .find_map_first(|i| trial(i).map(|r| (i, r)));
        return match hit {
            Some((i, r)) => Ok((Some(r?), i + 1)),
            None => Ok((None, count)),
        };
    }
    for i in 0..count {
        if let Some(r) = trial(i) {
            return Ok((Some(r?), i + 1));
        }
    }
    Ok((None, count))
}

/// Runs the local search from the empty packing. The result is always a
/// maximal packing; with the naive subroutine it also admits no canonical
/// improvement of at most `t` edges.
pub fn run_local_search(instance: &Instance, cfg: &SearchConfig) -> Result<(Packing, SearchTrace)> {
    cfg.validate(instance.num_sets())?;
    let mut trace = SearchTrace {
        t: cfg.resolve_t(instance.num_sets()),
        iterations: Vec::new(),
    };
    let mut packing = Packing::empty();
    for call in 0..=instance.num_sets() as u64 {
        let before = packing.len();
        packing = greedy_maximalize(instance, &packing);
        let greedy_added = packing.len() - before;
        let found = search_improvement(instance, &packing, cfg, call)?;
        let mut record = IterationRecord {
            packing_size: packing.len(),
            greedy_added,
            improvement: None,
            colorings_tried: found.colorings_tried,
        };
        let Some(cand) = found.candidate else {
            trace.iterations.push(record);
            return Ok((packing, trace));
        };
        packing = apply_improvement(instance, &packing, &found.graph, &cand)?;
        record.improvement = Some(AppliedImprovement {
            shape: cand.shape,
            edges: cand.size(),
            covered: cand.covered_vertices.len(),
        });
        trace.iterations.push(record);
    }
    Err(Error::invalid(
        "local search made more improvements than there are sets",
    ))
}

/// Local optimum under every swap that removes `p` packing sets and adds
/// `p + 1` outside sets, for all `p < swap_size`. `swap_size = 1` is plain
/// greedy. `max_work` bounds the number of removal sets examined per pass.
pub fn hurkens_schrijver_baseline(
    instance: &Instance,
    swap_size: usize,
    max_work: u64,
) -> Result<Packing> {
    if swap_size == 0 {
        return Err(Error::Config("swap size must be at least 1".into()));
    }
    let mut packing = greedy_maximalize(instance, &Packing::empty());
    'outer: loop {
        let members: Vec<SetId> = packing.members().iter().copied().collect();
        let work: f64 = (1..swap_size).map(|p| binomial_f64(members.len(), p)).sum();
        if work > max_work as f64 {
            return Err(Error::Config(format!(
                "swap size {swap_size} needs about {work:.0} removal sets per pass, over the budget {max_work}"
            )));
        }
        let mut owner: Vec<Option<usize>> = vec![None; instance.ground_size()];
        for (i, &id) in members.iter().enumerate() {
            for &e in instance.set(id).elements() {
                owner[e as usize] = Some(i);
            }
        }
        // for each outside set, the packing positions it conflicts with
        let touches: Vec<(SetId, Vec<usize>)> = (0..instance.num_sets())
            .filter(|id| !packing.contains(*id))
            .map(|id| {
                let mut t: Vec<usize> = instance
                    .set(id)
                    .elements()
                    .iter()
                    .filter_map(|&e| owner[e as usize])
                    .collect();
                t.sort_unstable();
                t.dedup();
                (id, t)
            })
            .collect();
        for p in 1..swap_size {
            let mut removal = Vec::with_capacity(p);
            if let Some(added) = find_swap(instance, &touches, members.len(), p, 0, &mut removal) {
                let mut next = packing.members().clone();
                for &i in &removal {
                    next.remove(&members[i]);
                }
                next.extend(added);
                packing = greedy_maximalize(instance, &Packing::from_members_unchecked(next));
                continue 'outer;
            }
        }
        return Ok(packing);
    }
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn find_swap(
    instance: &Instance,
    touches: &[(SetId, Vec<usize>)],
    num_members: usize,
    p: usize,
    from: usize,
    removal: &mut Vec<usize>,
) -> Option<Vec<SetId>> {
    if removal.len() == p {
        let candidates: Vec<SetId> = touches
            .iter()
            .filter(|(_, t)| !t.is_empty() && t.iter().all(|i| removal.contains(i)))
            .map(|(id, _)| *id)
            .collect();
        let mut picked = Vec::with_capacity(p + 1);
        return pick_disjoint(instance, &candidates, 0, p + 1, &mut picked).then_some(picked);
    }
    for i in from..num_members {
        removal.push(i);
        if let Some(found) = find_swap(instance, touches, num_members, p, i + 1, removal) {
            return Some(found);
        }
        removal.pop();
    }
    None
}

fn pick_disjoint(
    instance: &Instance,
    candidates: &[SetId],
    from: usize,
    need: usize,
    picked: &mut Vec<SetId>,
) -> bool {
    if picked.len() == need {
        return true;
    }
    for i in from..candidates.len() {
        if candidates.len() - i < need - picked.len() {
            return false;
        }
        let c = candidates[i];
        if picked.iter().all(|&q| !instance.conflicts(q, c)) {
            picked.push(c);
            if pick_disjoint(instance, candidates, i + 1, need, picked) {
                return true;
            }
            picked.pop();
        }
    }
    false
}
