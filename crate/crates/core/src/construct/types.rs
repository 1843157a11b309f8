use serde::{Deserialize, Serialize};

use crate::ratgeom::{rat_serde, Decision, Rat, RatMatrix, RatVec, SingularValues};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionKind {
    NotchedCube,
    NotchedParallelotope,
    NegScalar,
    Scalar,
    Matrix,
}

/// Parameters a region was built from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub dim: usize,
    pub kind: ConstructionKind,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rat")]
    pub d: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rat")]
    pub alpha: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_scalar: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<RatMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unimodular: Option<RatMatrix>,
}

impl ConstructionParams {
    pub fn new(dim: usize, kind: ConstructionKind) -> Self {
        ConstructionParams {
            dim,
            kind,
            d: None,
            alpha: None,
            k_scalar: None,
            matrix: None,
            q: None,
            unimodular: None,
        }
    }
}

/// Outcome of trying one exponent `q` in a satellite construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QAttempt {
    pub q: u32,
    pub k: RatVec,
    pub t: RatVec,
    /// Every vertex of the inner parallelotope lies in the outer one.
    pub hole_inside_frame: bool,
    /// Inner parallelotope and notch share no interior.
    pub hole_clear_of_notch: bool,
    /// Translated satellite shares no interior with the notched body.
    pub satellite_clear: bool,
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Advisory check of the singular-value hypothesis (`σ_min > √n`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub singular_values: SingularValues,
    pub threshold: f64,
    pub satisfied: Decision,
}

/// Audit trail of a construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionTrace {
    /// The notch ratio is `alpha = 1 / scalar^q`.
    pub q: u32,
    #[serde(with = "rat_serde")]
    pub alpha: Rat,
    pub w: RatVec,
    pub t: RatVec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<RatVec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attempts: Vec<QAttempt>,
    pub cell_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satellite_cell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<HypothesisReport>,
}

mod opt_rat {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::ratgeom::{format_rat, parse_rat, Rat};

    pub fn serialize<S: Serializer>(v: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_some(&format_rat(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rat>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| parse_rat(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}
