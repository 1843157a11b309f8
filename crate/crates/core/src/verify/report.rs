use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::ratgeom::{rat_serde, Rat, RatVec};

/// Most offenders kept in one report.
pub const MAX_OFFENDERS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

impl Verdict {
    /// Conjunction: any failure wins, then any indeterminate.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Indeterminate, _) | (_, Indeterminate) => Indeterminate,
            _ => Pass,
        }
    }

    /// Process exit code: 0 pass, 2 fail, 3 indeterminate.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 2,
            Verdict::Indeterminate => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportMode {
    Exact,
    MonteCarlo,
    Float,
}

/// A single violation: an offset or exponent and a point showing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Offender {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<RatVec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<RatVec>,
}

impl Offender {
    pub fn overlap_at_offset(offset: RatVec, witness: RatVec) -> Self {
        Offender {
            label: format!("overlap with translate by {offset}"),
            offset: Some(offset),
            exponent: None,
            count: None,
            witness: Some(witness),
        }
    }

    pub fn overlap_at_exponent(j: i64, witness: RatVec) -> Self {
        Offender {
            label: format!("overlap with dilate j = {j}"),
            offset: None,
            exponent: Some(j),
            count: None,
            witness: Some(witness),
        }
    }

    pub fn bad_count(count: usize, witness: RatVec) -> Self {
        Offender {
            label: format!("covered {count} times"),
            offset: None,
            exponent: None,
            count: Some(count),
            witness: Some(witness),
        }
    }

    pub fn uncovered(witness: Option<RatVec>) -> Self {
        Offender {
            label: "uncovered point".into(),
            offset: None,
            exponent: None,
            count: Some(0),
            witness,
        }
    }
}

/// Outcome of one tiling check. Reports merge as a monoid: counts add,
/// offender lists concatenate (capped), verdicts conjoin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilingReport {
    pub mode: ReportMode,
    pub verdict: Verdict,
    /// Region volume for translation; covered fundamental-domain volume
    /// for exact dilation.
    #[serde(with = "rat_serde")]
    pub volume: Rat,
    /// Volume the check compares against, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rat")]
    pub expected_volume: Option<Rat>,
    pub offenders: Vec<Offender>,
    pub samples_checked: u64,
    pub rerolled: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent_window: Option<(i64, i64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub elapsed_ms: f64,
}

impl TilingReport {
    /// Identity element for `merge`.
    pub fn empty(mode: ReportMode) -> Self {
        TilingReport {
            mode,
            verdict: Verdict::Pass,
            volume: Rat::zero(),
            expected_volume: None,
            offenders: Vec::new(),
            samples_checked: 0,
            rerolled: 0,
            seed: None,
            exponent_window: None,
            warnings: Vec::new(),
            elapsed_ms: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn fail_with(&mut self, offender: Offender) {
        self.verdict = Verdict::Fail;
        if self.offenders.len() < MAX_OFFENDERS {
            self.offenders.push(offender);
        }
    }

    pub fn merge(mut self, other: TilingReport) -> TilingReport {
        self.verdict = self.verdict.and(other.verdict);
        if self.volume.is_zero() {
            self.volume = other.volume;
        }
        if self.expected_volume.is_none() {
            self.expected_volume = other.expected_volume;
        }
        let room = MAX_OFFENDERS.saturating_sub(self.offenders.len());
        self.offenders.extend(other.offenders.into_iter().take(room));
        self.samples_checked += other.samples_checked;
        self.rerolled += other.rerolled;
        self.seed = self.seed.or(other.seed);
        self.exponent_window = self.exponent_window.or(other.exponent_window);
        for w in other.warnings {
            if !self.warnings.contains(&w) {
                self.warnings.push(w);
            }
        }
        self.elapsed_ms += other.elapsed_ms;
        self
    }
}

/// Both tiling conditions together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveletVerdict {
    pub translation: TilingReport,
    pub dilation: TilingReport,
    /// Sampled reports when both modes were requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation_mc: Option<TilingReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilation_mc: Option<TilingReport>,
    pub verdict: Verdict,
    pub is_wavelet_set: bool,
}

impl WaveletVerdict {
    pub fn new(
        translation: TilingReport,
        dilation: TilingReport,
        translation_mc: Option<TilingReport>,
        dilation_mc: Option<TilingReport>,
    ) -> Self {
        let mut verdict = translation.verdict.and(dilation.verdict);
        for r in translation_mc.iter().chain(&dilation_mc) {
            verdict = verdict.and(r.verdict);
        }
        WaveletVerdict {
            translation,
            dilation,
            translation_mc,
            dilation_mc,
            verdict,
            is_wavelet_set: verdict == Verdict::Pass,
        }
    }
}

mod opt_rat {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::ratgeom::{format_rat, parse_rat, Rat};

    pub fn serialize<S: Serializer>(r: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
        match r {
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
