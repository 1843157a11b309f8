use std::collections::HashSet;

use num_traits::{Signed, Zero};

use super::halfspace::HalfSpace;
use super::lp::{maximize, LpOutcome};
use crate::error::{Result, WavekitError};
use crate::ratgeom::{int, Rat, RatMatrix, RatVec};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 6;
pub const FACET_CAP: usize = 24;

/// A bounded convex polytope kept in both representations: canonical
/// (sorted, deduplicated, irredundant) halfspaces and its sorted vertices.
#[derive(Clone, Debug)]
pub struct ConvexCell {
    dim: usize,
    halfspaces: Vec<HalfSpace>,
    vertices: Vec<RatVec>,
}

impl PartialEq for ConvexCell {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.halfspaces == other.halfspaces
    }
}

impl Eq for ConvexCell {}

/// Result of intersecting a cell with one more halfspace.
#[derive(Clone, Debug)]
pub enum Cut {
    /// The halfspace is redundant.
    Unchanged,
    /// Nothing with nonempty interior is left.
    Empty,
    Cell(ConvexCell),
}

pub fn check_dim(dim: usize) -> Result<()> {
    if !(MIN_DIM..=MAX_DIM).contains(&dim) {
        return Err(WavekitError::Dimension(format!(
            "dimension must be in [{MIN_DIM}, {MAX_DIM}], got {dim}"
        )));
    }
    Ok(())
}

/// Rank of a list of vectors by exact elimination.
pub fn rank(vectors: &[RatVec]) -> usize {
    let Some(first) = vectors.first() else { return 0 };
    let n = first.dim();
    let mut rows: Vec<Vec<Rat>> = vectors.iter().map(|v| v.0.clone()).collect();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        for i in r + 1..rows.len() {
            if rows[i][c].is_zero() {
                continue;
            }
            let f = &rows[i][c] / &pivot;
            for j in c..n {
                let d = &f * &rows[r][j];
                rows[i][j] -= d;
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Dimension of the affine hull of a nonempty point set.
pub fn affine_rank(points: &[&RatVec]) -> usize {
    let Some((first, rest)) = points.split_first() else { return 0 };
    let diffs: Vec<RatVec> = rest.iter().map(|p| p.sub(first)).collect();
    rank(&diffs)
}

/// Solves a square system exactly; `None` when singular.
fn solve(rows: &[&RatVec], rhs: &[Rat]) -> Option<RatVec> {
    let n = rows.len();
    let mut a: Vec<Vec<Rat>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.0.clone();
            row.push(b.clone());
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        let pivot = a[c][c].clone();
        for i in 0..n {
            if i == c || a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] / &pivot;
            for j in c..=n {
                let d = &f * &a[c][j];
                a[i][j] -= d;
            }
        }
    }
    Some(RatVec((0..n).map(|i| &a[i][n] / &a[i][i]).collect()))
}

fn for_each_subset(m: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, f);
            cur.pop();
        }
    }
    rec(0, m, k, &mut Vec::with_capacity(k), f);
}

/// Brute-force vertex enumeration: every `n`-subset of constraints is solved
/// and feasible solutions are kept.
pub fn enumerate_vertices(dim: usize, halfspaces: &[HalfSpace]) -> Result<Vec<RatVec>> {
    check_dim(dim)?;
    if halfspaces.len() > FACET_CAP {
        return Err(WavekitError::ComplexityGuard(format!(
            "{} halfspaces exceed the facet cap of {FACET_CAP}",
            halfspaces.len()
        )));
    }
    let mut found: Vec<RatVec> = Vec::new();
    for_each_subset(halfspaces.len(), dim, &mut |idx| {
        let rows: Vec<&RatVec> = idx.iter().map(|&i| &halfspaces[i].normal).collect();
        let rhs: Vec<Rat> = idx.iter().map(|&i| halfspaces[i].offset.clone()).collect();
        if let Some(x) = solve(&rows, &rhs) {
            if halfspaces.iter().all(|h| h.contains(&x)) {
                found.push(x);
            }
        }
    });
    found.sort();
    found.dedup();
    Ok(found)
}

/// Interior point of `{x : a·x <= b}` maximizing the uniform slack, or
/// `None` when the interior is empty. `lower` is an optional coordinate-wise
/// lower bound known to hold on the whole set; it saves splitting free
/// variables.
pub fn interior_point(
    dim: usize,
    halfspaces: &[&HalfSpace],
    lower: Option<&RatVec>,
) -> Result<Option<RatVec>> {
    let split = lower.is_none();
    let nx = if split { 2 * dim } else { dim };
    let mut a = Vec::with_capacity(halfspaces.len());
    let mut b = Vec::with_capacity(halfspaces.len());
    for h in halfspaces {
        let mut row = Vec::with_capacity(nx + 1);
        row.extend(h.normal.iter().cloned());
        if split {
            row.extend(h.normal.iter().map(|v| -v));
        }
        row.push(int(1));
        a.push(row);
        b.push(match lower {
            Some(lo) => h.slack(lo),
            None => h.offset.clone(),
        });
    }
    let mut c = vec![Rat::zero(); nx + 1];
    c[nx] = int(1);
    match maximize(&c, &a, &b) {
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(WavekitError::Unbounded),
        LpOutcome::Optimal { value, point } => {
            if !value.is_positive() {
                return Ok(None);
            }
            let x = match lower {
                Some(lo) => RatVec((0..dim).map(|i| &point[i] + &lo[i]).collect()),
                None => RatVec((0..dim).map(|i| &point[i] - &point[dim + i]).collect()),
            };
            Ok(Some(x))
        }
    }
}

/// True iff the polyhedron `{x : a·x <= b}` has no interior point.
pub fn interior_empty(dim: usize, halfspaces: &[HalfSpace]) -> Result<bool> {
    let refs: Vec<&HalfSpace> = halfspaces.iter().collect();
    Ok(interior_point(dim, &refs, None)?.is_none())
}

fn is_bounded(dim: usize, halfspaces: &[HalfSpace]) -> bool {
    let a: Vec<Vec<Rat>> = halfspaces
        .iter()
        .map(|h| h.normal.iter().cloned().chain(h.normal.iter().map(|v| -v)).collect())
        .collect();
    let b: Vec<Rat> = halfspaces.iter().map(|h| h.offset.clone()).collect();
    (0..dim).all(|i| {
        [1, -1].iter().all(|&s| {
            let mut c = vec![Rat::zero(); 2 * dim];
            c[i] = int(s);
            c[dim + i] = int(-s);
            !matches!(maximize(&c, &a, &b), LpOutcome::Unbounded)
        })
    })
}

impl ConvexCell {
    /// Builds a cell from an H-representation, enumerating its vertices.
    /// Lower-dimensional results are returned as flagged degenerate cells.
    pub fn from_halfspaces(dim: usize, halfspaces: Vec<HalfSpace>) -> Result<Self> {
        check_dim(dim)?;
        if halfspaces.iter().any(|h| h.dim() != dim) {
            return Err(WavekitError::Dimension("halfspace dimension mismatch".into()));
        }
        let mut hs = halfspaces;
        hs.sort();
        hs.dedup();
        if !is_bounded(dim, &hs) {
            return Err(WavekitError::Unbounded);
        }
        let vertices = enumerate_vertices(dim, &hs)?;
        Ok(Self::from_parts(dim, hs, vertices))
    }

    /// Axis-aligned box `[lo, hi]`.
    pub fn from_box(lo: &RatVec, hi: &RatVec) -> Result<Self> {
        let dim = lo.dim();
        check_dim(dim)?;
        let mut hs = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            hs.push(HalfSpace::new(RatVec::unit(dim, i), hi[i].clone())?);
            hs.push(HalfSpace::new(RatVec::unit(dim, i).neg(), -&lo[i])?);
        }
        let mut vertices = Vec::with_capacity(1 << dim);
        for mask in 0..(1u32 << dim) {
            vertices.push(RatVec(
                (0..dim)
                    .map(|i| if mask >> i & 1 == 1 { hi[i].clone() } else { lo[i].clone() })
                    .collect(),
            ));
        }
        Ok(Self::from_parts(dim, hs, vertices))
    }

    /// Assembles a cell from consistent H- and V-data; drops halfspaces
    /// that are not facets when the cell is full-dimensional.
    pub(crate) fn from_parts(dim: usize, mut halfspaces: Vec<HalfSpace>, mut vertices: Vec<RatVec>) -> Self {
        vertices.sort();
        vertices.dedup();
        halfspaces.sort();
        halfspaces.dedup();
        let refs: Vec<&RatVec> = vertices.iter().collect();
        if affine_rank(&refs) == dim {
            halfspaces.retain(|h| {
                let tight: Vec<&RatVec> = vertices.iter().filter(|v| h.is_tight(v)).collect();
                tight.len() >= dim && affine_rank(&tight) == dim - 1
            });
        }
        ConvexCell {
            dim,
            halfspaces,
            vertices,
        }
    }

    /// Both representations already canonical (e.g. a bijective image).
    fn from_parts_trusted(dim: usize, mut halfspaces: Vec<HalfSpace>, mut vertices: Vec<RatVec>) -> Self {
        halfspaces.sort();
        vertices.sort();
        ConvexCell {
            dim,
            halfspaces,
            vertices,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[RatVec] {
        &self.vertices
    }

    pub fn is_full_dimensional(&self) -> bool {
        let refs: Vec<&RatVec> = self.vertices.iter().collect();
        !refs.is_empty() && affine_rank(&refs) == self.dim
    }

    /// Bit `h` of entry `v` is set when halfspace `h` is tight at vertex `v`.
    pub fn tight_masks(&self) -> Vec<u64> {
        assert!(self.halfspaces.len() <= 64, "too many halfspaces for incidence masks");
        self.vertices
            .iter()
            .map(|v| {
                self.halfspaces
                    .iter()
                    .enumerate()
                    .filter(|(_, h)| h.is_tight(v))
                    .fold(0u64, |m, (i, _)| m | 1 << i)
            })
            .collect()
    }

    /// Closed membership.
    pub fn contains(&self, x: &RatVec) -> bool {
        self.halfspaces.iter().all(|h| h.contains(x))
    }

    pub fn contains_in_interior(&self, x: &RatVec) -> bool {
        self.halfspaces.iter().all(|h| h.slack(x).is_positive())
    }

    pub fn bounding_box(&self) -> (RatVec, RatVec) {
        let mut lo = self.vertices[0].clone();
        let mut hi = self.vertices[0].clone();
        for v in &self.vertices[1..] {
            for i in 0..self.dim {
                if v[i] < lo[i] {
                    lo.0[i] = v[i].clone();
                }
                if v[i] > hi[i] {
                    hi.0[i] = v[i].clone();
                }
            }
        }
        (lo, hi)
    }

    /// Average of the vertices; interior when full-dimensional.
    pub fn centroid(&self) -> RatVec {
        let sum = self
            .vertices
            .iter()
            .fold(RatVec::zeros(self.dim), |acc, v| acc.add(v));
        sum.scale(&Rat::new(1.into(), (self.vertices.len() as i64).into()))
    }

    /// Intersects with one more halfspace by splitting crossing edges.
    pub fn cut(&self, h: &HalfSpace) -> Cut {
        let slacks: Vec<Rat> = self.vertices.iter().map(|v| h.slack(v)).collect();
        if slacks.iter().all(|s| !s.is_negative()) {
            return Cut::Unchanged;
        }
        if !slacks.iter().any(|s| s.is_positive()) {
            return Cut::Empty;
        }
        let masks = self.tight_masks();
        let mut vertices: Vec<RatVec> = self
            .vertices
            .iter()
            .zip(&slacks)
            .filter(|(_, s)| !s.is_negative())
            .map(|(v, _)| v.clone())
            .collect();
        let inside: Vec<usize> = (0..slacks.len()).filter(|&i| slacks[i].is_positive()).collect();
        let outside: Vec<usize> = (0..slacks.len()).filter(|&i| slacks[i].is_negative()).collect();
        for &i in &inside {
            for &j in &outside {
                let common = masks[i] & masks[j];
                // [vi, vj] is an edge iff no third vertex lies on every
                // constraint tight at both ends
                let is_edge = masks
                    .iter()
                    .enumerate()
                    .all(|(k, &m)| k == i || k == j || m & common != common);
                if is_edge {
                    let lambda = &slacks[i] / (&slacks[i] - &slacks[j]);
                    let dir = self.vertices[j].sub(&self.vertices[i]);
                    vertices.push(self.vertices[i].add(&dir.scale(&lambda)));
                }
            }
        }
        let mut halfspaces = self.halfspaces.clone();
        halfspaces.push(h.clone());
        Cut::Cell(Self::from_parts(self.dim, halfspaces, vertices))
    }

    /// Intersection; `None` when it has empty interior.
    pub fn intersect(&self, other: &ConvexCell) -> Option<ConvexCell> {
        let mut cur = self.clone();
        for h in &other.halfspaces {
            match cur.cut(h) {
                Cut::Unchanged => {}
                Cut::Empty => return None,
                Cut::Cell(c) => cur = c,
            }
        }
        Some(cur)
    }

    /// Image under `x ↦ M x + shift`.
    pub fn affine_image(&self, m: &RatMatrix, shift: &RatVec) -> Result<ConvexCell> {
        let inv_t = m.inverse()?.transpose();
        let halfspaces = self
            .halfspaces
            .iter()
            .map(|h| {
                let normal = inv_t.mul_vec(&h.normal);
                let offset = &h.offset + normal.dot(shift);
                HalfSpace::new(normal, offset)
            })
            .collect::<Result<Vec<_>>>()?;
        let vertices = self.vertices.iter().map(|v| m.mul_vec(v).add(shift)).collect();
        Ok(Self::from_parts_trusted(self.dim, halfspaces, vertices))
    }

    pub fn translate(&self, shift: &RatVec) -> ConvexCell {
        let halfspaces = self
            .halfspaces
            .iter()
            .map(|h| HalfSpace {
                normal: h.normal.clone(),
                offset: &h.offset + h.normal.dot(shift),
            })
            .collect();
        let vertices = self.vertices.iter().map(|v| v.add(shift)).collect();
        Self::from_parts_trusted(self.dim, halfspaces, vertices)
    }

    /// Simplices (as vertex indices) of a triangulation obtained by coning
    /// every facet not containing the first vertex, recursively.
    pub fn triangulate(&self) -> Vec<Vec<usize>> {
        if !self.is_full_dimensional() {
            return Vec::new();
        }
        let masks = self.tight_masks();
        let all: Vec<usize> = (0..self.vertices.len()).collect();
        self.triangulate_face(&all, self.dim, &masks)
    }

    fn triangulate_face(&self, face: &[usize], k: usize, masks: &[u64]) -> Vec<Vec<usize>> {
        if face.len() == k + 1 {
            return vec![face.to_vec()];
        }
        let apex = face[0];
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut out = Vec::new();
        for h in 0..self.halfspaces.len() {
            let sub: Vec<usize> = face.iter().copied().filter(|&v| masks[v] >> h & 1 == 1).collect();
            if sub.len() < k || sub.len() == face.len() || sub.contains(&apex) {
                continue;
            }
            let pts: Vec<&RatVec> = sub.iter().map(|&i| &self.vertices[i]).collect();
            if affine_rank(&pts) != k - 1 || !seen.insert(sub.clone()) {
                continue;
            }
            for mut s in self.triangulate_face(&sub, k - 1, masks) {
                s.push(apex);
                out.push(s);
            }
        }
        out
    }

    /// Exact volume; zero for degenerate cells.
    pub fn volume(&self) -> Rat {
        let n = self.dim;
        let factorial: i64 = (1..=n as i64).product();
        let total = self.triangulate().iter().fold(Rat::zero(), |acc, simplex| {
            let base = &self.vertices[simplex[0]];
            let cols: Vec<RatVec> = simplex[1..].iter().map(|&i| self.vertices[i].sub(base)).collect();
            let det = RatMatrix::from_columns(&cols).expect("simplex has n edges").det();
            acc + det.abs()
        });
        total / int(factorial)
    }

    /// Interior point of `self ∩ other`, if any. Cheap separation tests
    /// run before the exact LP.
    pub fn overlap_witness(&self, other: &ConvexCell) -> Result<Option<RatVec>> {
        let (lo_a, hi_a) = self.bounding_box();
        let (lo_b, hi_b) = other.bounding_box();
        for i in 0..self.dim {
            if hi_a[i] <= lo_b[i] || hi_b[i] <= lo_a[i] {
                return Ok(None);
            }
        }
        let separated = |a: &ConvexCell, b: &ConvexCell| {
            a.halfspaces
                .iter()
                .any(|h| b.vertices.iter().all(|v| !h.slack(v).is_positive()))
        };
        if separated(self, other) || separated(other, self) {
            return Ok(None);
        }
        let lower = RatVec(
            (0..self.dim)
                .map(|i| std::cmp::max(&lo_a[i], &lo_b[i]).clone())
                .collect(),
        );
        let hs: Vec<&HalfSpace> = self.halfspaces.iter().chain(&other.halfspaces).collect();
        interior_point(self.dim, &hs, Some(&lower))
    }

    /// Does the cell have empty interior? Decided by the slack LP.
    pub fn interior_empty(&self) -> Result<bool> {
        interior_empty(self.dim, &self.halfspaces)
    }
}
