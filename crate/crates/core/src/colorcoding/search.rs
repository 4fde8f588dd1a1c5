use super::coloring::Coloring;
use super::dp::{build_dp, DpTable, EdgeColorInfo};
use super::mask::{ColorMask, WideMask};
use crate::auxgraph::{validate_improvement, AuxMultigraph, ImprovementCandidate};
use crate::error::{Error, Result};
use crate::graph::Shape;
use crate::instance::Instance;

/// Default cap on stored table entries per coloring.
pub const DEFAULT_MAX_ENTRIES: usize = 4_000_000;

/// Looks for a canonical improvement of at most `t` edges that is colorful
/// under `coloring`. Total sizes are tried in increasing order; for each size
/// the shared-vertex shape is tried first, then three paths, then two cycles
/// joined by a path. The first candidate passing validation is returned.
pub fn search_canonical(
    g: &AuxMultigraph,
    instance: &Instance,
    coloring: &Coloring,
    t: usize,
    max_entries: usize,
) -> Result<Option<ImprovementCandidate>> {
    if coloring.num_colors() <= <u64 as ColorMask>::CAPACITY {
        search_with::<u64>(g, instance, coloring, t, max_entries)
    } else if coloring.num_colors() <= WideMask::CAPACITY {
        search_with::<WideMask>(g, instance, coloring, t, max_entries)
    } else {
        Err(Error::Config(format!(
            "{} colors exceed the supported maximum of {}",
            coloring.num_colors(),
            WideMask::CAPACITY
        )))
    }
}

fn search_with<M: ColorMask>(
    g: &AuxMultigraph,
    instance: &Instance,
    coloring: &Coloring,
    t: usize,
    max_entries: usize,
) -> Result<Option<ImprovementCandidate>> {
    let info = EdgeColorInfo::<M>::new(g, instance, coloring)?;
    let dp = build_dp(g, &info, t, max_entries)?;
    Ok(find_in_table(g, instance, &dp, t))
}

/// Runs the three shape searches against a filled table.
pub fn find_in_table<M: ColorMask>(
    g: &AuxMultigraph,
    instance: &Instance,
    dp: &DpTable<M>,
    t: usize,
) -> Option<ImprovementCandidate> {
    let t = t.min(dp.depth());
    let nv = g.num_vertices();
    let accept = |pieces: &[(usize, usize, usize, M)], shape: Shape| {
        let mut edges = Vec::new();
        for (s, e, len, c) in pieces {
            edges.extend(dp.walk(*s, *e, *len, c)?);
        }
        let cand = ImprovementCandidate::from_edges(g, edges, shape);
        validate_improvement(g, instance, &cand)
            .is_valid()
            .then_some(cand)
    };
    let mut pairs: Vec<(usize, usize)> = (1..=t)
        .flat_map(|i| dp.pairs(i))
        .filter(|&(s, e)| s < e)
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    for total in 2..=t {
        // two cycles through one vertex
        for s in 0..nv {
            for a in 1..=total / 2 {
                let b = total - a;
                for ca in dp.color_sets(s, s, a) {
                    for cb in dp.color_sets(s, s, b) {
                        if (a == b && cb <= ca) || !ca.is_disjoint(cb) {
                            continue;
                        }
                        let pieces = [(s, s, a, *ca), (s, s, b, *cb)];
                        if let Some(c) = accept(&pieces, Shape::TwoCyclesSharedVertex) {
                            return Some(c);
                        }
                    }
                }
            }
        }
        if total < 3 {
            continue;
        }
        // three paths between two vertices
        for &(s, e) in &pairs {
            for a in 1..=total / 3 {
                for b in a..=(total - a) / 2 {
                    let c = total - a - b;
                    for ca in dp.color_sets(s, e, a) {
                        for cb in dp.color_sets(s, e, b) {
                            if (a == b && cb <= ca) || !ca.is_disjoint(cb) {
                                continue;
                            }
                            let ab = ca.union(cb);
                            for cc in dp.color_sets(s, e, c) {
                                if (b == c && cc <= cb) || !ab.is_disjoint(cc) {
                                    continue;
                                }
                                let pieces = [(s, e, a, *ca), (s, e, b, *cb), (s, e, c, *cc)];
                                if let Some(found) = accept(&pieces, Shape::ThreePaths) {
                                    return Some(found);
                                }
                            }
                        }
                    }
                }
            }
        }
        // two cycles joined by a path
        for &(s, e) in &pairs {
            for c in 1..=total - 2 {
                for a in 1..=total - c - 1 {
                    let b = total - c - a;
                    for cp in dp.color_sets(s, e, c) {
                        for ca in dp.color_sets(s, s, a) {
                            if !cp.is_disjoint(ca) {
                                continue;
                            }
                            let pa = cp.union(ca);
                            for cb in dp.color_sets(e, e, b) {
                                if !pa.is_disjoint(cb) {
                                    continue;
                                }
                                let pieces = [(s, s, a, *ca), (s, e, c, *cp), (e, e, b, *cb)];
                                if let Some(found) = accept(&pieces, Shape::TwoCyclesJoinedByPath) {
                                    return Some(found);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    None
}
