//! Exact membership for dyadic sample points, with an `i128` fast path.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::polytope::{ConvexCell, HalfSpace, Region};
use crate::ratgeom::{Rat, RatVec};

/// Samples per batch; each batch owns an RNG stream.
pub const BATCH: usize = 1024;
/// Redraws allowed for one sample before it is given up on.
pub const MAX_REROLLS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Inside,
    Boundary,
    Outside,
}

/// A point `num / den` with a shared positive integer denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicPoint {
    pub num: Vec<i128>,
    pub den: i128,
}

impl DyadicPoint {
    pub fn to_rat(&self) -> RatVec {
        RatVec(
            self.num
                .iter()
                .map(|&x| Rat::new(BigInt::from(x), BigInt::from(self.den)))
                .collect(),
        )
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.num.iter().map(|&x| x as f64 / self.den as f64).collect()
    }

    /// The point shifted by an integer vector.
    pub fn shifted(&self, z: &[i64]) -> DyadicPoint {
        DyadicPoint {
            num: self
                .num
                .iter()
                .zip(z)
                .map(|(&x, &k)| x + k as i128 * self.den)
                .collect(),
            den: self.den,
        }
    }
}

#[derive(Clone, Debug)]
struct FastHalf {
    /// `normal`, `p`, `q` with `offset = p/q`, when they fit comfortably.
    small: Option<(Vec<i128>, i128, i128)>,
    exact: HalfSpace,
}

impl FastHalf {
    fn new(h: &HalfSpace) -> Self {
        const LIMIT: i128 = 1 << 40;
        let small = (|| {
            let normal: Vec<i128> = h
                .normal
                .iter()
                .map(|a| a.to_integer().to_i128().filter(|x| x.abs() < LIMIT))
                .collect::<Option<_>>()?;
            let p = h.offset.numer().to_i128().filter(|x| x.abs() < LIMIT * LIMIT)?;
            let q = h.offset.denom().to_i128().filter(|x| x.abs() < LIMIT)?;
            Some((normal, p, q))
        })();
        FastHalf {
            small,
            exact: h.clone(),
        }
    }

    /// Sign of the slack `offset − normal·x`.
    fn slack_sign(&self, x: &DyadicPoint) -> i32 {
        if let Some((normal, p, q)) = &self.small {
            let fast = (|| {
                let mut dot: i128 = 0;
                for (a, v) in normal.iter().zip(&x.num) {
                    dot = dot.checked_add(a.checked_mul(*v)?)?;
                }
                let lhs = q.checked_mul(dot)?;
                let rhs = p.checked_mul(x.den)?;
                Some(rhs.cmp(&lhs) as i32)
            })();
            if let Some(s) = fast {
                return s;
            }
        }
        let s = self.exact.slack(&x.to_rat());
        if s.is_positive() {
            1
        } else if s.is_zero() {
            0
        } else {
            -1
        }
    }
}

/// A cell prepared for repeated membership queries.
#[derive(Clone, Debug)]
pub struct FastCell {
    halves: Vec<FastHalf>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl FastCell {
    pub fn new(cell: &ConvexCell) -> Self {
        let (lo, hi) = cell.bounding_box();
        FastCell {
            halves: cell.halfspaces().iter().map(FastHalf::new).collect(),
            lo: lo.to_f64(),
            hi: hi.to_f64(),
        }
    }

    /// Loose float box test used only to skip exact work.
    pub fn may_contain(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(i, &v)| {
            let pad = 1e-9 * (1.0 + self.lo[i].abs().max(self.hi[i].abs()));
            v >= self.lo[i] - pad && v <= self.hi[i] + pad
        })
    }

    pub fn side(&self, x: &DyadicPoint) -> Side {
        let mut on = false;
        for h in &self.halves {
            match h.slack_sign(x) {
                s if s < 0 => return Side::Outside,
                0 => on = true,
                _ => {}
            }
        }
        if on {
            Side::Boundary
        } else {
            Side::Inside
        }
    }
}

pub fn fast_cells(region: &Region) -> Vec<FastCell> {
    region.cells.iter().map(FastCell::new).collect()
}

/// Number of cells holding `x` in their interior, or `None` when `x` lies on
/// some cell boundary.
pub fn interior_hits(cells: &[FastCell], x: &DyadicPoint, xf: &[f64]) -> Option<usize> {
    let mut hits = 0;
    for c in cells {
        if !c.may_contain(xf) {
            continue;
        }
        match c.side(x) {
            Side::Inside => hits += 1,
            Side::Boundary => return None,
            Side::Outside => {}
        }
    }
    Some(hits)
}

/// RNG for batch `index` of a run seeded with `seed`.
pub fn batch_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform point of `[0,1)^n` with denominator `2^32`.
pub fn unit_cube_point(rng: &mut impl Rng, n: usize) -> DyadicPoint {
    DyadicPoint {
        num: (0..n).map(|_| rng.gen::<u32>() as i128).collect(),
        den: 1 << 32,
    }
}

/// A box with dyadic corners `lo/2^8, hi/2^8` sampled on a `2^-40` grid.
#[derive(Clone, Debug)]
pub struct DyadicBox {
    lo: Vec<i128>,
    width: Vec<i128>,
}

impl DyadicBox {
    /// Smallest box with corners on the `2^-8` grid containing `[lo, hi]`.
    pub fn covering(lo: &RatVec, hi: &RatVec) -> Self {
        let scale = Rat::from_integer(BigInt::from(256));
        let l: Vec<i128> = lo
            .iter()
            .map(|x| (x * &scale).floor().to_integer().to_i128().expect("box fits"))
            .collect();
        let h: Vec<i128> = hi
            .iter()
            .map(|x| (x * &scale).ceil().to_integer().to_i128().expect("box fits"))
            .collect();
        DyadicBox {
            width: h.iter().zip(&l).map(|(h, l)| (h - l).max(1)).collect(),
            lo: l,
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> DyadicPoint {
        DyadicPoint {
            num: self
                .lo
                .iter()
                .zip(&self.width)
                .map(|(l, w)| (l << 32) + w * rng.gen::<u32>() as i128)
                .collect(),
            den: 1 << 40,
        }
    }

    pub fn corners(&self) -> (RatVec, RatVec) {
        let conv = |v: Vec<i128>| RatVec(v.into_iter().map(|x| Rat::new(x.into(), 256.into())).collect());
        let hi = self.lo.iter().zip(&self.width).map(|(l, w)| l + w).collect();
        (conv(self.lo.clone()), conv(hi))
    }
}
