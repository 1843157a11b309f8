use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cell::{check_dim, ConvexCell, Cut};
use super::halfspace::HalfSpace;
use super::parallelotope::Parallelotope;
use crate::construct::{ConstructionParams, ConstructionTrace};
use crate::error::{Result, WavekitError};
use crate::ratgeom::{DilationSpec, Rat, RatMatrix, RatVec};

/// Provenance carried alongside a region in its JSON form.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilation: Option<DilationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<ConstructionTrace>,
}

/// A finite union of pairwise interior-disjoint, full-dimensional cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub dim: usize,
    pub cells: Vec<ConvexCell>,
    /// Outer parallelotope of the construction, when there is one.
    pub frame: Option<Parallelotope>,
    pub metadata: RegionMetadata,
}

/// Sequential-cut decomposition of `cell \ hole`.
///
/// With hole facets `F_1..F_m` in canonical order, piece `i` is
/// `cell ∩ outside(F_i) ∩ inside(F_1..F_{i-1})`. Pieces without interior are
/// dropped. A hole that misses the interior of `cell` leaves it whole.
pub fn subtract_convex(cell: &ConvexCell, hole: &ConvexCell) -> Vec<ConvexCell> {
    if cell.intersect(hole).is_none() {
        return vec![cell.clone()];
    }
    let mut facets: Vec<&HalfSpace> = hole.halfspaces().iter().collect();
    facets.sort();
    let mut pieces = Vec::new();
    let mut inside = cell.clone();
    for f in facets {
        match inside.cut(&f.flipped()) {
            Cut::Unchanged => {
                pieces.push(inside);
                return pieces;
            }
            Cut::Cell(piece) => pieces.push(piece),
            Cut::Empty => {}
        }
        match inside.cut(f) {
            Cut::Unchanged => {}
            Cut::Cell(rest) => inside = rest,
            Cut::Empty => break,
        }
    }
    pieces
}

impl Region {
    pub fn new(dim: usize, cells: Vec<ConvexCell>) -> Result<Self> {
        check_dim(dim)?;
        for c in &cells {
            if c.dim() != dim {
                return Err(WavekitError::Dimension("cell dimension mismatch".into()));
            }
            if !c.is_full_dimensional() {
                return Err(WavekitError::Parameter("region cells must be full-dimensional".into()));
            }
        }
        Ok(Region {
            dim,
            cells,
            frame: None,
            metadata: RegionMetadata::default(),
        })
    }

    pub fn with_frame(mut self, frame: Parallelotope) -> Self {
        self.frame = Some(frame);
        self
    }

    pub fn with_metadata(mut self, metadata: RegionMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    /// Checks the pairwise interior-disjointness invariant exactly.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.cells.len() {
            for j in i + 1..self.cells.len() {
                if let Some(w) = self.cells[i].overlap_witness(&self.cells[j])? {
                    return Err(WavekitError::Parameter(format!(
                        "cells {i} and {j} overlap at {w}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn volume(&self) -> Rat {
        self.cells
            .par_iter()
            .map(ConvexCell::volume)
            .reduce(Rat::zero, |a, b| a + b)
    }

    /// Closed membership in any cell.
    pub fn contains_point(&self, x: &RatVec) -> bool {
        self.cells.iter().any(|c| c.contains(x))
    }

    pub fn bounding_box(&self) -> (RatVec, RatVec) {
        let mut boxes = self.cells.iter().map(ConvexCell::bounding_box);
        let (mut lo, mut hi) = boxes.next().expect("region has at least one cell");
        for (l, h) in boxes {
            for i in 0..self.dim {
                if l[i] < lo[i] {
                    lo.0[i] = l[i].clone();
                }
                if h[i] > hi[i] {
                    hi.0[i] = h[i].clone();
                }
            }
        }
        (lo, hi)
    }

    /// Removes a convex hole from every cell; cells the hole misses are kept
    /// as they are.
    pub fn subtract_convex(&self, hole: &ConvexCell) -> Region {
        let cells = self.cells.iter().flat_map(|c| subtract_convex(c, hole)).collect();
        Region {
            dim: self.dim,
            cells,
            frame: self.frame.clone(),
            metadata: self.metadata.clone(),
        }
    }

    pub fn translate(&self, shift: &RatVec) -> Region {
        Region {
            dim: self.dim,
            cells: self.cells.iter().map(|c| c.translate(shift)).collect(),
            frame: self.frame.as_ref().map(|f| f.translate(shift)),
            metadata: self.metadata.clone(),
        }
    }

    /// Image under `x ↦ M x + shift`, frame included.
    pub fn affine_image(&self, m: &RatMatrix, shift: &RatVec) -> Result<Region> {
        Ok(Region {
            dim: self.dim,
            cells: self
                .cells
                .iter()
                .map(|c| c.affine_image(m, shift))
                .collect::<Result<_>>()?,
            frame: self.frame.as_ref().map(|f| f.affine_image(m, shift)).transpose()?,
            metadata: self.metadata.clone(),
        })
    }

    /// An interior point shared by the two regions, or `None` when they are
    /// interior-disjoint.
    pub fn overlap_witness(&self, other: &Region) -> Result<Option<RatVec>> {
        for a in &self.cells {
            for b in &other.cells {
                if let Some(w) = a.overlap_witness(b)? {
                    return Ok(Some(w));
                }
            }
        }
        Ok(None)
    }

    pub fn intersection_volume(&self, other: &Region) -> Rat {
        let pairs: Vec<(&ConvexCell, &ConvexCell)> = self
            .cells
            .iter()
            .flat_map(|a| other.cells.iter().map(move |b| (a, b)))
            .collect();
        pairs
            .par_iter()
            .filter_map(|(a, b)| a.intersect(b).map(|c| c.volume()))
            .reduce(Rat::zero, |a, b| a + b)
    }

    pub fn to_json(&self) -> String {
        let wire = RegionWire {
            dim: self.dim,
            cells: self
                .cells
                .iter()
                .map(|c| CellWire {
                    halfspaces: c.halfspaces().to_vec(),
                })
                .collect(),
            frame: self.frame.clone(),
            metadata: self.metadata.clone(),
        };
        serde_json::to_string_pretty(&wire).expect("region serializes")
    }

    pub fn from_json(text: &str) -> Result<Region> {
        let wire: RegionWire =
            serde_json::from_str(text).map_err(|e| WavekitError::Parse(e.to_string()))?;
        let cells = wire
            .cells
            .into_iter()
            .map(|c| ConvexCell::from_halfspaces(wire.dim, c.halfspaces))
            .collect::<Result<Vec<_>>>()?;
        let region = Region::new(wire.dim, cells)?;
        region.validate()?;
        Ok(Region {
            frame: wire.frame,
            metadata: wire.metadata,
            ..region
        })
    }
}

pub fn region_subtract_convex(region: &Region, hole: &ConvexCell) -> Region {
    region.subtract_convex(hole)
}

pub fn region_volume(region: &Region) -> Rat {
    region.volume()
}

pub fn region_contains_point(region: &Region, x: &RatVec) -> bool {
    region.contains_point(x)
}

pub fn region_bounding_box(region: &Region) -> (RatVec, RatVec) {
    region.bounding_box()
}

/// `(true, None)` when interior-disjoint, otherwise `(false, Some(w))` with
/// `w` interior to both.
pub fn regions_interior_disjoint(a: &Region, b: &Region) -> Result<(bool, Option<RatVec>)> {
    let w = a.overlap_witness(b)?;
    Ok((w.is_none(), w))
}

#[derive(Serialize, Deserialize)]
struct CellWire {
    halfspaces: Vec<HalfSpace>,
}

#[derive(Serialize, Deserialize)]
struct RegionWire {
    dim: usize,
    cells: Vec<CellWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame: Option<Parallelotope>,
    #[serde(default)]
    metadata: RegionMetadata,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratgeom::{int, rat};

    fn boxed(lo: &[Rat], hi: &[Rat]) -> ConvexCell {
        ConvexCell::from_box(&RatVec(lo.to_vec()), &RatVec(hi.to_vec())).unwrap()
    }

    #[test]
    fn cube_minus_corner_gives_n_boxes() {
        for n in 2..=4 {
            let alpha = rat(1, 3);
            let cube = ConvexCell::from_box(&RatVec::zeros(n), &RatVec::ones(n)).unwrap();
            let corner = ConvexCell::from_box(&RatVec::filled(n, &(int(1) - &alpha)), &RatVec::ones(n)).unwrap();
            let pieces = subtract_convex(&cube, &corner);
            assert_eq!(pieces.len(), n);
            let total = pieces.iter().fold(Rat::zero(), |a, p| a + p.volume());
            assert_eq!(total, int(1) - num_traits::pow(alpha, n));
            assert!(pieces.iter().all(|p| p.vertices().len() == 1 << n));
        }
    }

    #[test]
    fn cube_minus_itself_is_empty() {
        let cube = ConvexCell::from_box(&RatVec::zeros(3), &RatVec::ones(3)).unwrap();
        assert!(subtract_convex(&cube, &cube).is_empty());
    }

    #[test]
    fn slab_minus_touching_hole() {
        // [0,3/4]x[0,1] minus [1/4,3/4]^2: three pieces, area 1/2
        let b1 = boxed(&[int(0), int(0)], &[rat(3, 4), int(1)]);
        let hole = boxed(&[rat(1, 4), rat(1, 4)], &[rat(3, 4), rat(3, 4)]);
        let pieces = subtract_convex(&b1, &hole);
        assert_eq!(pieces.len(), 3);
        assert_eq!(pieces.iter().fold(Rat::zero(), |a, p| a + p.volume()), rat(1, 2));
    }

    #[test]
    fn disjoint_hole_leaves_region_alone() {
        let cube = ConvexCell::from_box(&RatVec::zeros(2), &RatVec::ones(2)).unwrap();
        let r = Region::new(2, vec![cube.clone()]).unwrap();
        let hole = cube.translate(&RatVec::from_ints(&[1, 0]));
        let out = r.subtract_convex(&hole);
        assert_eq!(out.cells.len(), 1);
        assert_eq!(out.volume(), int(1));
    }

    #[test]
    fn bounding_box_and_membership() {
        let cube = ConvexCell::from_box(&RatVec::zeros(2), &RatVec::ones(2)).unwrap();
        let r = Region::new(2, vec![cube]).unwrap();
        assert_eq!(r.bounding_box(), (RatVec::zeros(2), RatVec::ones(2)));
        assert!(r.contains_point(&RatVec::from_ints(&[1, 1])));
        assert!(!r.contains_point(&RatVec(vec![rat(3, 2), int(0)])));
    }

    #[test]
    fn interior_disjointness_with_witness() {
        let cube = ConvexCell::from_box(&RatVec::zeros(3), &RatVec::ones(3)).unwrap();
        let r = Region::new(3, vec![cube]).unwrap();
        let far = r.translate(&RatVec::from_ints(&[5, 0, 0]));
        assert_eq!(regions_interior_disjoint(&r, &far).unwrap(), (true, None));
        let (disjoint, w) = regions_interior_disjoint(&r, &r).unwrap();
        assert!(!disjoint);
        assert!(r.cells[0].contains_in_interior(&w.unwrap()));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let cube = ConvexCell::from_box(&RatVec::zeros(2), &RatVec(vec![rat(1, 3), int(1)])).unwrap();
        let r = Region::new(2, vec![cube]).unwrap();
        let text = r.to_json();
        let back = Region::from_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), text);
        assert!(Region::from_json("{\"dim\": 2").is_err());
    }

    #[test]
    fn overlapping_cells_rejected_on_load() {
        let cube = ConvexCell::from_box(&RatVec::zeros(2), &RatVec::ones(2)).unwrap();
        let r = Region::new(2, vec![cube.clone(), cube]).unwrap();
        assert!(Region::from_json(&r.to_json()).is_err());
    }
}
