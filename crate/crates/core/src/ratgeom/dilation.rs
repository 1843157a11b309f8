use num_traits::One;
use serde::{Deserialize, Serialize};

use super::matrix::{scalar_power_probe, RatMatrix};
use super::rat::{rat_serde, Rat};
use crate::error::{Result, WavekitError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DilationKind {
    PositiveScalar,
    NegativeScalar,
    Matrix,
}

/// A dilation `A` together with its transpose and the certified pair
/// `(power, scalar)` with `A^power = scalar·I`.
///
/// Regions tile under `transpose` (the adjoint acts on the frequency side).
/// For a negative scalar `-d·I` the certified pair is `(2, d²)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DilationSpec {
    pub kind: DilationKind,
    pub matrix: RatMatrix,
    pub transpose: RatMatrix,
    pub power: u32,
    #[serde(with = "rat_serde")]
    pub scalar: Rat,
}

impl DilationSpec {
    pub fn positive_scalar(n: usize, d: &Rat) -> Result<Self> {
        check_dilation_factor(d)?;
        let m = RatMatrix::scalar(n, d);
        Ok(DilationSpec {
            kind: DilationKind::PositiveScalar,
            transpose: m.clone(),
            matrix: m,
            power: 1,
            scalar: d.clone(),
        })
    }

    /// Dilation by `-d`, `d > 1`.
    pub fn negative_scalar(n: usize, d: &Rat) -> Result<Self> {
        check_dilation_factor(d)?;
        let m = RatMatrix::scalar(n, &-d);
        Ok(DilationSpec {
            kind: DilationKind::NegativeScalar,
            transpose: m.clone(),
            matrix: m,
            power: 2,
            scalar: d * d,
        })
    }

    /// General dilation matrix `A`; requires some `A^p = d·I` with `d > 1`.
    pub fn from_matrix(a: &RatMatrix, p_max: u32) -> Result<Self> {
        let (power, scalar) = scalar_power_probe(a, p_max).ok_or_else(|| {
            WavekitError::UnsupportedMatrix(format!(
                "no power A^p (p <= {p_max}) is a positive multiple of the identity"
            ))
        })?;
        if scalar <= Rat::one() {
            return Err(WavekitError::UnsupportedMatrix(format!(
                "A^{power} = {scalar}·I is not expansive"
            )));
        }
        let kind = match a.as_scalar() {
            Some(c) if c > Rat::one() => DilationKind::PositiveScalar,
            Some(c) if c < -Rat::one() => DilationKind::NegativeScalar,
            _ => DilationKind::Matrix,
        };
        Ok(DilationSpec {
            kind,
            matrix: a.clone(),
            transpose: a.transpose(),
            power,
            scalar,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_scalar(&self) -> bool {
        self.kind != DilationKind::Matrix
    }

    /// Re-checks the stored invariants exactly.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.transpose != self.matrix.transpose() {
            return Err(WavekitError::Parameter("transpose does not match matrix".into()));
        }
        if self.matrix.pow(self.power) != RatMatrix::scalar(n, &self.scalar) {
            return Err(WavekitError::Parameter(format!(
                "A^{} is not {}·I",
                self.power, self.scalar
            )));
        }
        check_dilation_factor(&self.scalar)
    }
}

fn check_dilation_factor(d: &Rat) -> Result<()> {
    if *d <= Rat::one() {
        return Err(WavekitError::Parameter(format!("dilation factor must exceed 1, got {d}")));
    }
    Ok(())
}
