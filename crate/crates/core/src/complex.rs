//! The nerve of the facets of a polyhedron and the holonomic rank.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ConeClass, GeneralPositionReport, HPolyhedron};
use crate::index_set::IndexSet;
use crate::Scalar;

/// A downward-closed family of index sets over `0..n`, stored in basis
/// order (cardinality, then lexicographic) with a position index.
#[derive(Clone, Debug, Serialize)]
pub struct SimplicialComplex {
    faces: Vec<IndexSet>,
    n: usize,
    #[serde(skip)]
    position: HashMap<IndexSet, usize>,
}

impl PartialEq for SimplicialComplex {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.faces == other.faces
    }
}

impl Eq for SimplicialComplex {}

impl SimplicialComplex {
    /// Builds the complex from any collection of faces; the empty set is
    /// added, order and duplicates are normalized. Fails if the family is
    /// not downward closed or mentions an index `>= n`.
    pub fn from_faces(n: usize, faces: impl IntoIterator<Item = IndexSet>) -> Result<Self> {
        let mut faces: Vec<IndexSet> = faces.into_iter().collect();
        faces.push(IndexSet::EMPTY);
        faces.sort();
        faces.dedup();
        let position: HashMap<IndexSet, usize> =
            faces.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        for &f in &faces {
            if f.iter().any(|j| j >= n) {
                return Err(Error::InvalidPolyhedron(format!(
                    "face {f} outside ground set of size {n}"
                )));
            }
            if let Some(missing) = f.facets().find(|g| !position.contains_key(g)) {
                return Err(Error::InvalidPolyhedron(format!(
                    "face {f} present but its subset {missing} is not"
                )));
            }
        }
        Ok(Self { faces, n, position })
    }

    /// Faces in basis order; index 0 is always the empty set.
    pub fn faces(&self) -> &[IndexSet] {
        &self.faces
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn contains(&self, face: IndexSet) -> bool {
        self.position.contains_key(&face)
    }

    /// Position of `face` in the basis order.
    pub fn index_of(&self, face: IndexSet) -> Option<usize> {
        self.position.get(&face).copied()
    }

    pub fn max_face_size(&self) -> usize {
        self.faces.last().map_or(0, |f| f.len())
    }

    /// Faces not contained in any larger face.
    pub fn maximal_faces(&self) -> Vec<IndexSet> {
        self.faces
            .iter()
            .copied()
            .filter(|&f| (0..self.n).all(|j| f.contains(j) || !self.contains(f.with(j))))
            .collect()
    }
}

/// The nerve `{J ⊆ [n] : F_J ≠ ∅}` read off a general-position report of
/// the homogenized family of `p`.
///
/// In general position `F_J` is nonempty exactly when the cone `F̂_J` over
/// the shifted labels is full-dimensional.
pub fn nerve<T: Scalar>(p: &HPolyhedron<T>, gp: &GeneralPositionReport) -> Result<SimplicialComplex> {
    if !gp.in_general_position {
        return Err(Error::NotGeneralPosition(gp.witness.unwrap_or(IndexSet::EMPTY)));
    }
    let n = p.num_constraints();
    let faces = gp
        .face_dims
        .iter()
        .filter(|(j, class)| **class == ConeClass::FullDimCone && !j.contains(0))
        .map(|(j, _)| IndexSet::from_bits(j.bits() >> 1));
    let complex = SimplicialComplex::from_faces(n, faces)?;
    if let Some(j) = (0..n).find(|&j| !complex.contains(IndexSet::singleton(j))) {
        // a facet that is an empty face means `p` still has redundant rows
        return Err(Error::InvalidPolyhedron(format!(
            "constraint {} does not define a facet; strip redundant rows first",
            j + 1
        )));
    }
    Ok(complex)
}

/// Convenience: general-position check and nerve in one call.
pub fn nerve_of<T: Scalar>(p: &HPolyhedron<T>) -> Result<SimplicialComplex> {
    let gp = p.homogenize().check_general_position()?;
    nerve(p, &gp)
}

/// Dimension of the solution space of the holonomic system, `|𝓕|`.
pub fn holonomic_rank(c: &SimplicialComplex) -> usize {
    c.len()
}
