use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::cell::ConvexCell;
use super::halfspace::HalfSpace;
use crate::error::{Result, WavekitError};
use crate::ratgeom::{cyclic_shift, Rat, RatMatrix, RatVec};

/// `{base + G u : u ∈ [0,1]^n}` for a nonsingular generator matrix `G`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parallelotope {
    pub base: RatVec,
    pub generators: RatMatrix,
}

impl Parallelotope {
    pub fn new(base: RatVec, generators: RatMatrix) -> Result<Self> {
        if base.dim() != generators.dim() {
            return Err(WavekitError::Dimension("base and generators disagree".into()));
        }
        if generators.det().is_zero() {
            return Err(WavekitError::Singular);
        }
        Ok(Parallelotope { base, generators })
    }

    /// `P[v]`: spanned by `v, Cv, ..., C^{n-1}v`, based at the origin.
    pub fn of_vector(v: &RatVec) -> Result<Self> {
        let mut cols = Vec::with_capacity(v.dim());
        let mut cur = v.clone();
        for _ in 0..v.dim() {
            let next = cyclic_shift(&cur);
            cols.push(cur);
            cur = next;
        }
        Self::new(RatVec::zeros(v.dim()), RatMatrix::from_columns(&cols)?)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn translate(&self, shift: &RatVec) -> Parallelotope {
        Parallelotope {
            base: self.base.add(shift),
            generators: self.generators.clone(),
        }
    }

    /// Image under `x ↦ M x + shift`.
    pub fn affine_image(&self, m: &RatMatrix, shift: &RatVec) -> Result<Parallelotope> {
        Self::new(m.mul_vec(&self.base).add(shift), m.mul(&self.generators))
    }

    /// Scaled about the origin.
    pub fn scaled(&self, s: &Rat) -> Result<Parallelotope> {
        Self::new(self.base.scale(s), self.generators.scale(s))
    }

    /// `base + G·1`, the vertex opposite the base.
    pub fn far_vertex(&self) -> RatVec {
        self.point_at(&RatVec::ones(self.dim()))
    }

    /// `base + G u` for frame coordinates `u`.
    pub fn point_at(&self, u: &RatVec) -> RatVec {
        self.base.add(&self.generators.mul_vec(u))
    }

    /// The sub-parallelotope `{base + G u : u ∈ [lo, 1]^n}`, a copy scaled
    /// by `1 - lo` sitting at the far vertex.
    pub fn corner(&self, lo: &Rat) -> Result<Parallelotope> {
        let n = self.dim();
        Self::new(
            self.point_at(&RatVec::filled(n, lo)),
            self.generators.scale(&(Rat::one() - lo)),
        )
    }

    pub fn vertices(&self) -> Vec<RatVec> {
        let n = self.dim();
        let mut out: Vec<RatVec> = (0..(1u32 << n))
            .map(|mask| {
                let u = RatVec(
                    (0..n)
                        .map(|i| if mask >> i & 1 == 1 { Rat::one() } else { Rat::zero() })
                        .collect(),
                );
                self.point_at(&u)
            })
            .collect();
        out.sort();
        out
    }

    pub fn volume(&self) -> Rat {
        self.generators.det().abs()
    }

    /// `2n` halfspaces from `0 <= u <= 1` pulled back through `G⁻¹`.
    pub fn to_cell(&self) -> Result<ConvexCell> {
        let inv = self.generators.inverse()?;
        let n = self.dim();
        let mut hs = Vec::with_capacity(2 * n);
        for i in 0..n {
            let row = inv.row(i);
            let at_base = row.dot(&self.base);
            hs.push(HalfSpace::new(row.neg(), -&at_base)?);
            hs.push(HalfSpace::new(row, at_base + Rat::one())?);
        }
        Ok(ConvexCell::from_parts(n, hs, self.vertices()))
    }
}

/// Lattice spanned by the columns of a nonsingular basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub basis: RatMatrix,
}

impl Lattice {
    pub fn new(basis: RatMatrix) -> Result<Self> {
        if basis.det().is_zero() {
            return Err(WavekitError::Singular);
        }
        Ok(Lattice { basis })
    }

    pub fn integer(n: usize) -> Self {
        Lattice {
            basis: RatMatrix::identity(n),
        }
    }

    pub fn covolume(&self) -> Rat {
        self.basis.det().abs()
    }
}
