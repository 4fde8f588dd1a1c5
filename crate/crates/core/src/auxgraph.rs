//! The auxiliary conflict multigraph of a packing.
//!
//! Vertices are the members of the current packing `A`. Every set outside `A`
//! that conflicts with exactly one member becomes a loop on that member, and
//! every set conflicting with exactly two members becomes an edge between
//! them. Sets conflicting with zero or three or more members are dropped.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{self, Shape};
use crate::instance::{Instance, Packing, SetId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AuxEdge {
    pub label: SetId,
    /// Vertex indices; equal for a loop, otherwise `a < b`.
    pub a: usize,
    pub b: usize,
}

impl AuxEdge {
    pub fn is_loop(&self) -> bool {
        self.a == self.b
    }

    pub fn other(&self, v: usize) -> usize {
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Clone, Debug)]
pub struct AuxMultigraph {
    vertices: Vec<SetId>,
    edges: Vec<AuxEdge>,
    adjacency: Vec<Vec<usize>>,
}

impl AuxMultigraph {
    /// Assembles a graph from explicit parts, checking endpoint ranges.
    /// Labels are not checked against any instance.
    pub fn from_parts(vertices: Vec<SetId>, edges: Vec<AuxEdge>) -> Result<Self> {
        let n = vertices.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut edges = edges;
        for (i, e) in edges.iter_mut().enumerate() {
            if e.a >= n || e.b >= n {
                return Err(Error::invalid(format!(
                    "edge {i} has an endpoint out of range"
                )));
            }
            if e.a > e.b {
                std::mem::swap(&mut e.a, &mut e.b);
            }
            adjacency[e.a].push(i);
            if !e.is_loop() {
                adjacency[e.b].push(i);
            }
        }
        Ok(AuxMultigraph {
            vertices,
            edges,
            adjacency,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Packing set id behind vertex `v`.
    pub fn vertex_set(&self, v: usize) -> SetId {
        self.vertices[v]
    }

    pub fn vertices(&self) -> &[SetId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[AuxEdge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &AuxEdge {
        &self.edges[i]
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn endpoint_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.a, e.b)).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph aux {\n");
        for (v, id) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  v{v} [label=\"{id}\"];");
        }
        for e in &self.edges {
            let _ = writeln!(out, "  v{} -- v{} [label=\"{}\"];", e.a, e.b, e.label);
        }
        out.push_str("}\n");
        out
    }
}

pub fn build_aux_graph(
    instance: &Instance,
    packing: &Packing,
    include_self_loops: bool,
) -> Result<AuxMultigraph> {
    if !instance.is_packing(packing.members())? {
        return Err(Error::invalid("packing has conflicting members"));
    }
    let vertices: Vec<SetId> = packing.members().iter().copied().collect();
    let mut owner: Vec<Option<u32>> = vec![None; instance.ground_size()];
    for (v, &id) in vertices.iter().enumerate() {
        for &e in instance.set(id).elements() {
            owner[e as usize] = Some(v as u32);
        }
    }
    let mut edges = Vec::new();
    for id in 0..instance.num_sets() {
        if packing.contains(id) {
            continue;
        }
        let mut hit: Vec<usize> = Vec::with_capacity(3);
        for &e in instance.set(id).elements() {
            if let Some(v) = owner[e as usize] {
                if !hit.contains(&(v as usize)) {
                    hit.push(v as usize);
                    if hit.len() == 3 {
                        break;
                    }
                }
            }
        }
        match hit.len() {
            1 => edges.push(AuxEdge {
                label: id,
                a: hit[0],
                b: hit[0],
            }),
            2 => edges.push(AuxEdge {
                label: id,
                a: hit[0].min(hit[1]),
                b: hit[0].max(hit[1]),
            }),
            _ => {}
        }
    }
    if include_self_loops {
        for (v, &id) in vertices.iter().enumerate() {
            edges.push(AuxEdge {
                label: id,
                a: v,
                b: v,
            });
        }
    }
    AuxMultigraph::from_parts(vertices, edges)
}

/// A set of auxiliary-graph edges proposed as a canonical improvement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImprovementCandidate {
    pub edge_indices: Vec<usize>,
    pub shape: Shape,
    pub covered_vertices: BTreeSet<usize>,
}

impl ImprovementCandidate {
    /// Builds a candidate from edges, deriving covered vertices and shape.
    pub fn from_edges(g: &AuxMultigraph, edge_indices: Vec<usize>, fallback: Shape) -> Self {
        let ends: Vec<(usize, usize)> = edge_indices
            .iter()
            .filter(|&&e| e < g.num_edges())
            .map(|&e| (g.edge(e).a, g.edge(e).b))
            .collect();
        let covered_vertices = graph::vertices_of(&ends);
        let shape = graph::classify_shape(&ends).unwrap_or(fallback);
        ImprovementCandidate {
            edge_indices,
            shape,
            covered_vertices,
        }
    }

    pub fn size(&self) -> usize {
        self.edge_indices.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rejection {
    EmptyCandidate,
    EdgeOutOfRange(usize),
    RepeatedEdge(usize),
    CoveredMismatch,
    Disconnected,
    TooFewEdges { edges: usize, vertices: usize },
    LabelsOverlap(SetId, SetId),
    LabelConflictMismatch(SetId),
    ShapeMismatch { declared: Shape, actual: Shape },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Validation {
    pub reasons: Vec<Rejection>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.reasons.is_empty()
    }
}

/// Rechecks a candidate from the raw sets of the instance, independently of
/// whatever search produced it.
pub fn validate_improvement(
    g: &AuxMultigraph,
    instance: &Instance,
    cand: &ImprovementCandidate,
) -> Validation {
    let mut reasons = Vec::new();
    if cand.edge_indices.is_empty() {
        reasons.push(Rejection::EmptyCandidate);
        return Validation { reasons };
    }
    let mut seen = HashSet::new();
    for &e in &cand.edge_indices {
        if e >= g.num_edges() {
            reasons.push(Rejection::EdgeOutOfRange(e));
        } else if !seen.insert(e) {
            reasons.push(Rejection::RepeatedEdge(e));
        }
    }
    if !reasons.is_empty() {
        return Validation { reasons };
    }
    let ends: Vec<(usize, usize)> = cand
        .edge_indices
        .iter()
        .map(|&e| (g.edge(e).a, g.edge(e).b))
        .collect();
    let covered = graph::vertices_of(&ends);
    if covered != cand.covered_vertices {
        reasons.push(Rejection::CoveredMismatch);
    }
    if !graph::is_connected(&ends) {
        reasons.push(Rejection::Disconnected);
    }
    if ends.len() < covered.len() + 1 {
        reasons.push(Rejection::TooFewEdges {
            edges: ends.len(),
            vertices: covered.len(),
        });
    }
    let labels: Vec<SetId> = cand.edge_indices.iter().map(|&e| g.edge(e).label).collect();
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            if instance.conflicts(labels[i], labels[j]) {
                reasons.push(Rejection::LabelsOverlap(labels[i], labels[j]));
            }
        }
    }
    for &e in &cand.edge_indices {
        let edge = g.edge(e);
        let expected: BTreeSet<usize> = [edge.a, edge.b].into_iter().collect();
        let actual: BTreeSet<usize> = (0..g.num_vertices())
            .filter(|&v| instance.conflicts(edge.label, g.vertex_set(v)))
            .collect();
        if expected != actual {
            reasons.push(Rejection::LabelConflictMismatch(edge.label));
        }
    }
    if let Some(actual) = graph::classify_shape(&ends) {
        if actual != cand.shape {
            reasons.push(Rejection::ShapeMismatch {
                declared: cand.shape,
                actual,
            });
        }
    }
    Validation { reasons }
}

/// Swaps the covered packing sets for the edge labels.
pub fn apply_improvement(
    instance: &Instance,
    packing: &Packing,
    g: &AuxMultigraph,
    cand: &ImprovementCandidate,
) -> Result<Packing> {
    let validation = validate_improvement(g, instance, cand);
    if !validation.is_valid() {
        return Err(Error::invalid(format!(
            "improvement rejected: {:?}",
            validation.reasons
        )));
    }
    let mut members = packing.members().clone();
    for &v in &cand.covered_vertices {
        members.remove(&g.vertex_set(v));
    }
    for &e in &cand.edge_indices {
        members.insert(g.edge(e).label);
    }
    let next = Packing::from_members_unchecked(members);
    if !instance.is_packing(next.members())? || next.len() <= packing.len() {
        return Err(Error::invalid(
            "improvement did not produce a larger packing",
        ));
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binocular_instance() -> Instance {
        // S = {0,1,2}; X and Y each meet only S and are disjoint.
        Instance::new(3, vec![vec![0, 1, 2], vec![0, 3, 4], vec![1, 5, 6]], 7).unwrap()
    }

    #[test]
    fn empty_packing_gives_empty_graph() {
        let inst = binocular_instance();
        let g = build_aux_graph(&inst, &Packing::empty(), true).unwrap();
        assert_eq!(g.num_vertices(), 0);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn single_conflict_is_a_loop() {
        let inst = Instance::new(3, vec![vec![0, 1, 2], vec![2, 3, 4]], 5).unwrap();
        let a = Packing::new(&inst, [0]).unwrap();
        let g = build_aux_graph(&inst, &a, false).unwrap();
        assert_eq!(g.num_vertices(), 1);
        assert_eq!(
            g.edges(),
            &[AuxEdge {
                label: 1,
                a: 0,
                b: 0
            }]
        );
        let g = build_aux_graph(&inst, &a, true).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(
            g.edge(1),
            &AuxEdge {
                label: 0,
                a: 0,
                b: 0
            }
        );
    }

    #[test]
    fn three_conflicts_give_no_edge() {
        let inst = Instance::new(
            3,
            vec![vec![0, 1, 6], vec![2, 3, 7], vec![4, 5, 8], vec![1, 3, 5]],
            9,
        )
        .unwrap();
        let a = Packing::new(&inst, [0, 1, 2]).unwrap();
        let g = build_aux_graph(&inst, &a, false).unwrap();
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn two_loops_validate_and_apply() {
        let inst = binocular_instance();
        let a = Packing::new(&inst, [0]).unwrap();
        let g = build_aux_graph(&inst, &a, true).unwrap();
        let cand = ImprovementCandidate::from_edges(&g, vec![0, 1], Shape::ThreePaths);
        assert_eq!(cand.shape, Shape::TwoCyclesSharedVertex);
        assert!(validate_improvement(&g, &inst, &cand).is_valid());
        let next = apply_improvement(&inst, &a, &g, &cand).unwrap();
        assert_eq!(
            next.members().iter().copied().collect::<Vec<_>>(),
            vec![1, 2]
        );
    }

    #[test]
    fn single_cycle_is_rejected() {
        let inst = binocular_instance();
        let a = Packing::new(&inst, [0]).unwrap();
        let g = build_aux_graph(&inst, &a, false).unwrap();
        let cand = ImprovementCandidate::from_edges(&g, vec![0], Shape::TwoCyclesSharedVertex);
        let v = validate_improvement(&g, &inst, &cand);
        assert!(v.reasons.contains(&Rejection::TooFewEdges {
            edges: 1,
            vertices: 1
        }));
    }

    #[test]
    fn overlapping_labels_are_rejected() {
        let inst = Instance::new(3, vec![vec![0, 1, 2], vec![0, 3, 4], vec![1, 3, 5]], 6).unwrap();
        let a = Packing::new(&inst, [0]).unwrap();
        let g = build_aux_graph(&inst, &a, false).unwrap();
        let cand = ImprovementCandidate::from_edges(&g, vec![0, 1], Shape::TwoCyclesSharedVertex);
        let v = validate_improvement(&g, &inst, &cand);
        assert_eq!(v.reasons, vec![Rejection::LabelsOverlap(1, 2)]);
        assert!(apply_improvement(&inst, &a, &g, &cand).is_err());
    }

    #[test]
    fn self_loop_conflicts_with_neighbours() {
        let inst = binocular_instance();
        let a = Packing::new(&inst, [0]).unwrap();
        let g = build_aux_graph(&inst, &a, true).unwrap();
        // edge 2 is the self-loop of S; it overlaps both X and Y
        let cand = ImprovementCandidate::from_edges(&g, vec![0, 2], Shape::TwoCyclesSharedVertex);
        assert!(!validate_improvement(&g, &inst, &cand).is_valid());
    }

    #[test]
    fn dot_export_mentions_every_edge() {
        let inst = binocular_instance();
        let a = Packing::new(&inst, [0]).unwrap();
        let g = build_aux_graph(&inst, &a, false).unwrap();
        let dot = g.to_dot();
        assert!(dot.contains("v0 -- v0 [label=\"1\"]"));
        assert!(dot.contains("v0 -- v0 [label=\"2\"]"));
    }
}
