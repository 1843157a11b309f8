use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Result, WavekitError};
use crate::ratgeom::{rat_serde, Rat, RatVec};

/// The constraint `normal · x <= offset`.
///
/// Normals are kept as primitive integer vectors (positive rescaling only),
/// so equal halfspaces compare equal and sort canonically by
/// `(normal, offset)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: RatVec,
    #[serde(with = "rat_serde")]
    pub offset: Rat,
}

impl HalfSpace {
    pub fn new(normal: RatVec, offset: Rat) -> Result<Self> {
        if normal.is_zero() {
            return Err(WavekitError::Parameter("halfspace normal must be nonzero".into()));
        }
        let lcm = normal.iter().fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
        let gcd = normal
            .iter()
            .map(|a| (a.numer() * (&lcm / a.denom())).abs())
            .fold(BigInt::zero(), |acc, a| acc.gcd(&a));
        let factor = Rat::new(lcm, gcd);
        Ok(HalfSpace {
            normal: normal.scale(&factor),
            offset: offset * factor,
        })
    }

    /// `offset - normal · x`; nonnegative inside.
    pub fn slack(&self, x: &RatVec) -> Rat {
        &self.offset - self.normal.dot(x)
    }

    pub fn contains(&self, x: &RatVec) -> bool {
        !self.slack(x).is_negative()
    }

    pub fn is_tight(&self, x: &RatVec) -> bool {
        self.slack(x).is_zero()
    }

    /// The closed complement side, `normal · x >= offset`.
    pub fn flipped(&self) -> HalfSpace {
        HalfSpace {
            normal: self.normal.neg(),
            offset: -&self.offset,
        }
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }
}
