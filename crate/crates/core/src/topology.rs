//! Combinatorics of an ideally triangulated surface with boundary.
//!
//! Boundary components play the role of vertices: every hexagonal face is
//! incident to three boundary components and bounded by three ideal edges.
//! The structure is immutable once built.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Index of a boundary component, `0..n_boundaries`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoundaryId(pub usize);

/// Index of an ideal edge into [`IdealTriangulation::edges`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

/// Index of a hexagonal face into [`IdealTriangulation::faces`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaceId(pub usize);

impl fmt::Display for BoundaryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("triangulation has no faces")]
    Empty,
    #[error("face {face} has a repeated boundary component in {corners:?}")]
    RepeatedCorner { face: usize, corners: [usize; 3] },
    #[error("face {face} references boundary {boundary}, expected < {n_boundaries}")]
    BoundaryOutOfRange {
        face: usize,
        boundary: usize,
        n_boundaries: usize,
    },
    #[error("edge {{{a},{b}}} (key {key}) lies in {count} face(s), expected exactly 2")]
    NonManifold {
        a: usize,
        b: usize,
        key: u32,
        count: usize,
    },
    #[error("boundary {0} is not incident to any face")]
    IsolatedBoundary(usize),
    #[error("surface is not hyperbolic: chi - N = {chi_minus_n} >= 0")]
    NotHyperbolic { chi_minus_n: i64 },
    #[error("face edge keys given for {given} faces, expected {expected}")]
    KeyCountMismatch { given: usize, expected: usize },
}

/// An unoriented ideal edge joining two distinct boundary components.
///
/// `key` distinguishes parallel edges between the same pair of boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdealEdge {
    pub id: EdgeId,
    pub ends: (BoundaryId, BoundaryId),
    pub key: u32,
}

impl IdealEdge {
    /// The endpoint that is not `b`.
    pub fn other(&self, b: BoundaryId) -> BoundaryId {
        if self.ends.0 == b {
            self.ends.1
        } else {
            self.ends.0
        }
    }
}

/// A hexagonal face. `edges[r]` is the ideal edge opposite `corners[r]`,
/// i.e. the one joining the two other corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HexFace {
    pub id: FaceId,
    pub corners: [BoundaryId; 3],
    pub edges: [EdgeId; 3],
}

/// A corner of a face: the boundary arc of `face` at slot `slot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Corner {
    pub face: FaceId,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdealTriangulation {
    n_boundaries: usize,
    edges: Vec<IdealEdge>,
    faces: Vec<HexFace>,
    corner_index: Vec<Vec<Corner>>,
    edge_lookup: BTreeMap<(usize, usize, u32), EdgeId>,
}

/// Builds a triangulation from corner triples. Each unordered pair of
/// boundaries that occurs in a face must occur in exactly two faces.
pub fn build_triangulation(faces: &[[usize; 3]]) -> Result<IdealTriangulation, TopologyError> {
    build_triangulation_keyed(faces, None)
}

/// Like [`build_triangulation`], with explicit edge keys per face slot so
/// that several edges may join the same pair of boundary components.
/// `keys[f][r]` names the edge opposite corner `r` of face `f`.
pub fn build_triangulation_keyed(
    faces: &[[usize; 3]],
    keys: Option<&[[u32; 3]]>,
) -> Result<IdealTriangulation, TopologyError> {
    if faces.is_empty() {
        return Err(TopologyError::Empty);
    }
    if let Some(k) = keys {
        if k.len() != faces.len() {
            return Err(TopologyError::KeyCountMismatch {
                given: k.len(),
                expected: faces.len(),
            });
        }
    }
    let n_boundaries = faces.iter().flatten().copied().max().unwrap_or(0) + 1;
    build_with_count(n_boundaries, faces, keys)
}

pub(crate) fn build_with_count(
    n_boundaries: usize,
    faces: &[[usize; 3]],
    keys: Option<&[[u32; 3]]>,
) -> Result<IdealTriangulation, TopologyError> {
    if faces.is_empty() {
        return Err(TopologyError::Empty);
    }
    for (fi, c) in faces.iter().enumerate() {
        for &b in c {
            if b >= n_boundaries {
                return Err(TopologyError::BoundaryOutOfRange {
                    face: fi,
                    boundary: b,
                    n_boundaries,
                });
            }
        }
        if c[0] == c[1] || c[1] == c[2] || c[0] == c[2] {
            return Err(TopologyError::RepeatedCorner {
                face: fi,
                corners: *c,
            });
        }
    }

    // slot r of a face is the edge between the other two corners
    let slot_key = |fi: usize, r: usize| -> (usize, usize, u32) {
        let c = faces[fi];
        let (a, b) = (c[(r + 1) % 3], c[(r + 2) % 3]);
        let key = keys.map_or(0, |k| k[fi][r]);
        (a.min(b), a.max(b), key)
    };

    let mut counts: BTreeMap<(usize, usize, u32), usize> = BTreeMap::new();
    for fi in 0..faces.len() {
        for r in 0..3 {
            *counts.entry(slot_key(fi, r)).or_insert(0) += 1;
        }
    }
    for (&(a, b, key), &count) in &counts {
        if count != 2 {
            return Err(TopologyError::NonManifold { a, b, key, count });
        }
    }

    // BTreeMap iteration is lexicographic in (min, max, key)
    let mut edges = Vec::with_capacity(counts.len());
    let mut edge_lookup = BTreeMap::new();
    for (idx, &(a, b, key)) in counts.keys().enumerate() {
        edges.push(IdealEdge {
            id: EdgeId(idx),
            ends: (BoundaryId(a), BoundaryId(b)),
            key,
        });
        edge_lookup.insert((a, b, key), EdgeId(idx));
    }

    let mut hex_faces = Vec::with_capacity(faces.len());
    let mut corner_index = vec![Vec::new(); n_boundaries];
    for (fi, c) in faces.iter().enumerate() {
        let mut face_edges = [EdgeId(0); 3];
        for (r, e) in face_edges.iter_mut().enumerate() {
            *e = edge_lookup[&slot_key(fi, r)];
        }
        hex_faces.push(HexFace {
            id: FaceId(fi),
            corners: [BoundaryId(c[0]), BoundaryId(c[1]), BoundaryId(c[2])],
            edges: face_edges,
        });
        for (slot, &b) in c.iter().enumerate() {
            corner_index[b].push(Corner {
                face: FaceId(fi),
                slot,
            });
        }
    }
    if let Some(b) = corner_index.iter().position(|c| c.is_empty()) {
        return Err(TopologyError::IsolatedBoundary(b));
    }

    let tri = IdealTriangulation {
        n_boundaries,
        edges,
        faces: hex_faces,
        corner_index,
        edge_lookup,
    };
    let chi_minus_n = tri.euler_characteristic() - n_boundaries as i64;
    if chi_minus_n >= 0 {
        return Err(TopologyError::NotHyperbolic { chi_minus_n });
    }
    Ok(tri)
}

impl IdealTriangulation {
    pub fn n_boundaries(&self) -> usize {
        self.n_boundaries
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn edges(&self) -> &[IdealEdge] {
        &self.edges
    }

    pub fn faces(&self) -> &[HexFace] {
        &self.faces
    }

    pub fn edge(&self, e: EdgeId) -> &IdealEdge {
        &self.edges[e.0]
    }

    pub fn face(&self, f: FaceId) -> &HexFace {
        &self.faces[f.0]
    }

    /// Euler characteristic `N - |E| + |F|` of the closed surface obtained by
    /// capping every boundary component with a disk.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_boundaries as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Euler characteristic of the bordered surface itself, `chi - N`.
    pub fn bordered_euler_characteristic(&self) -> i64 {
        self.euler_characteristic() - self.n_boundaries as i64
    }

    /// All corners at boundary `i`, ordered by (face id, slot).
    pub fn corners_at(&self, i: BoundaryId) -> &[Corner] {
        &self.corner_index[i.0]
    }

    /// Looks up the edge joining `a` and `b` with the given key.
    pub fn find_edge(&self, a: usize, b: usize, key: u32) -> Option<EdgeId> {
        self.edge_lookup.get(&(a.min(b), a.max(b), key)).copied()
    }

    /// The corner triples in input order.
    pub fn face_corners(&self) -> Vec<[usize; 3]> {
        self.faces
            .iter()
            .map(|f| [f.corners[0].0, f.corners[1].0, f.corners[2].0])
            .collect()
    }

    /// Boundaries joined to `i` by at least one edge, ascending.
    pub fn neighbors(&self, i: BoundaryId) -> Vec<BoundaryId> {
        let mut out: Vec<BoundaryId> = self
            .edges
            .iter()
            .filter(|e| e.ends.0 == i || e.ends.1 == i)
            .map(|e| e.other(i))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}
