//! Decides whether a region is a wavelet set: it must tile space under
//! integer translations and under the dilation `A*`. Exact checks use
//! rational volumes and LP certificates; sampled checks draw dyadic points
//! and test membership exactly.

mod dilation;
pub mod float;
mod report;
mod sample;
mod translation;

pub use dilation::{
    dilation_j_range, exponent_window, negative_dilation_identity, norm_band,
    satellite_notch_identity, verify_dilation_exact, verify_dilation_mc, NegDilationIdentity,
    NormBand,
};
pub use report::{Offender, ReportMode, TilingReport, Verdict, WaveletVerdict, MAX_OFFENDERS};
pub use translation::{
    translation_offsets, verify_translation_exact, verify_translation_lattice,
    verify_translation_mc,
};

use serde::{Deserialize, Serialize};

use crate::error::{Result, WavekitError};
use crate::polytope::Region;
use crate::ratgeom::DilationSpec;

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyMode {
    Exact,
    #[serde(rename = "mc")]
    MonteCarlo,
    Both,
    Float,
}

impl std::str::FromStr for VerifyMode {
    type Err = WavekitError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(VerifyMode::Exact),
            "mc" | "monte-carlo" => Ok(VerifyMode::MonteCarlo),
            "both" => Ok(VerifyMode::Both),
            "float" => Ok(VerifyMode::Float),
            other => Err(WavekitError::Mode(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub mode: VerifyMode,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            mode: VerifyMode::Exact,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            tolerance: float::DEFAULT_TOLERANCE,
        }
    }
}

impl VerifyOptions {
    pub fn with_mode(mode: VerifyMode) -> Self {
        VerifyOptions {
            mode,
            ..Default::default()
        }
    }
}

/// Both tiling checks in the requested mode.
pub fn verify_wavelet_set(region: &Region, d: &DilationSpec, options: &VerifyOptions) -> Result<WaveletVerdict> {
    let (samples, seed) = (options.samples, options.seed);
    match options.mode {
        VerifyMode::Exact => Ok(WaveletVerdict::new(
            verify_translation_exact(region)?,
            verify_dilation_exact(region, d, samples, seed)?,
            None,
            None,
        )),
        VerifyMode::MonteCarlo => Ok(WaveletVerdict::new(
            verify_translation_mc(region, samples, seed),
            verify_dilation_mc(region, d, samples, seed)?,
            None,
            None,
        )),
        VerifyMode::Both => Ok(WaveletVerdict::new(
            verify_translation_exact(region)?,
            verify_dilation_exact(region, d, samples, seed)?,
            Some(verify_translation_mc(region, samples, seed)),
            Some(verify_dilation_mc(region, d, samples, seed)?),
        )),
        VerifyMode::Float => float::verify_region_float(region, d, samples, seed, options.tolerance),
    }
}

/// Float-only constructions accept float mode alone.
pub fn verify_float_construction(
    c: &float::FloatConstruction,
    options: &VerifyOptions,
) -> Result<WaveletVerdict> {
    if options.mode != VerifyMode::Float {
        return Err(WavekitError::Mode(
            "a float construction has no exact data; use float mode".into(),
        ));
    }
    float::verify_construction_float(c, options.samples, options.seed, options.tolerance)
}
