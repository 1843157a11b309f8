//! Exact convex-polytope arithmetic: parallelotopes, cells in H- and
//! V-representation, intersections, convex differences, volumes, and
//! interior-disjointness via exact LP.

mod cell;
mod halfspace;
pub mod lp;
mod parallelotope;
mod region;

pub use cell::{
    affine_rank, check_dim, enumerate_vertices, interior_empty, interior_point, rank, ConvexCell,
    Cut, FACET_CAP, MAX_DIM, MIN_DIM,
};
pub use halfspace::HalfSpace;
pub use parallelotope::{Lattice, Parallelotope};
pub use region::{
    region_bounding_box, region_contains_point, region_subtract_convex, region_volume,
    regions_interior_disjoint, subtract_convex, Region, RegionMetadata,
};

use crate::error::Result;
use crate::ratgeom::{RatMatrix, RatVec};

pub fn parallelotope_of(v: &RatVec) -> Result<Parallelotope> {
    Parallelotope::of_vector(v)
}

pub fn cell_from_parallelotope(p: &Parallelotope) -> Result<ConvexCell> {
    p.to_cell()
}

pub fn affine_image(cell: &ConvexCell, m: &RatMatrix, shift: &RatVec) -> Result<ConvexCell> {
    cell.affine_image(m, shift)
}

pub fn intersect(a: &ConvexCell, b: &ConvexCell) -> Option<ConvexCell> {
    a.intersect(b)
}

pub fn cell_volume(c: &ConvexCell) -> crate::ratgeom::Rat {
    c.volume()
}
