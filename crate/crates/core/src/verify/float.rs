//! Floating-point verification for constructions whose parameters are not
//! rational. Every membership decision carries a tolerance; samples that
//! fall within it of a boundary are redrawn and counted.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dilation::{exponent_window, norm_band, NormBand};
use super::report::{Offender, ReportMode, TilingReport, Verdict, WaveletVerdict};
use super::sample::{batch_rng, BATCH, MAX_REROLLS};
use crate::error::{Result, WavekitError};
use crate::polytope::Region;
use crate::ratgeom::{from_f64, to_f64, DilationSpec, RatVec};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Fraction of redrawn samples above which the verdict is indeterminate.
const MARGINAL_LIMIT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tri {
    In,
    Out,
    Marginal,
}

impl Tri {
    fn from_slack(s: f64, tol: f64) -> Tri {
        if s > tol {
            Tri::In
        } else if s < -tol {
            Tri::Out
        } else {
            Tri::Marginal
        }
    }

    fn and(self, o: Tri) -> Tri {
        match (self, o) {
            (Tri::Out, _) | (_, Tri::Out) => Tri::Out,
            (Tri::In, Tri::In) => Tri::In,
            _ => Tri::Marginal,
        }
    }

    fn or(self, o: Tri) -> Tri {
        match (self, o) {
            (Tri::In, _) | (_, Tri::In) => Tri::In,
            (Tri::Out, Tri::Out) => Tri::Out,
            _ => Tri::Marginal,
        }
    }

    fn not(self) -> Tri {
        match self {
            Tri::In => Tri::Out,
            Tri::Out => Tri::In,
            Tri::Marginal => Tri::Marginal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FloatKind {
    NegScalar,
    Scalar,
}

/// A scalar-dilation construction described by its formulas, for real `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloatConstruction {
    pub kind: FloatKind,
    pub dim: usize,
    pub d: f64,
    #[serde(default)]
    pub k: i64,
}

/// Wire form: `{"float": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloatRegionFile {
    pub float: FloatConstruction,
}

impl FloatConstruction {
    pub fn validate(&self) -> Result<()> {
        crate::polytope::check_dim(self.dim)?;
        if !(self.d.is_finite() && self.d > 1.0) {
            return Err(WavekitError::Parameter(format!("d must exceed 1, got {}", self.d)));
        }
        if self.kind == FloatKind::Scalar && (self.d < 2.0 || self.k < 1 || self.k as f64 >= self.d) {
            return Err(WavekitError::Parameter(format!(
                "scalar construction needs d >= 2 and 1 <= k < d, got d = {}, k = {}",
                self.d, self.k
            )));
        }
        Ok(())
    }

    fn alpha(&self) -> f64 {
        match self.kind {
            FloatKind::NegScalar => 1.0 / self.d,
            FloatKind::Scalar => 1.0 / (self.d * self.d),
        }
    }

    fn t(&self) -> f64 {
        let d2 = self.d * self.d;
        match self.kind {
            FloatKind::NegScalar => -d2 / (d2 - 1.0),
            FloatKind::Scalar => self.d * (self.k as f64 - self.d) / (d2 - 1.0),
        }
    }

    /// Frame coordinates `(I − αC)(x − t·1)`.
    fn frame_coords(&self, x: &[f64]) -> Vec<f64> {
        let (a, t, n) = (self.alpha(), self.t(), self.dim);
        (0..n).map(|i| (x[i] - t) - a * (x[(i + n - 1) % n] - t)).collect()
    }

    fn in_box(u: &[f64], lo: f64, hi: f64, tol: f64) -> Tri {
        let slack = u.iter().map(|&v| (v - lo).min(hi - v)).fold(f64::INFINITY, f64::min);
        Tri::from_slack(slack, tol)
    }

    pub fn classify(&self, x: &[f64], tol: f64) -> Tri {
        let a = self.alpha();
        let u = self.frame_coords(x);
        let body = Self::in_box(&u, 0.0, 1.0, tol).and(Self::in_box(&u, 1.0 - a, 1.0, tol).not());
        match self.kind {
            FloatKind::NegScalar => body,
            FloatKind::Scalar => {
                let scaled: Vec<f64> = x.iter().map(|v| v * self.d).collect();
                let hole = Self::in_box(&self.frame_coords(&scaled), 0.0, 1.0, tol);
                let back: Vec<f64> = x.iter().map(|v| (v - self.k as f64) * self.d).collect();
                let satellite = Self::in_box(&self.frame_coords(&back), 0.0, 1.0, tol);
                body.and(hole.not()).or(satellite)
            }
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let t = self.t();
        let far = t + 1.0 / (1.0 - self.alpha());
        let (mut lo, mut hi) = (t, far);
        if self.kind == FloatKind::Scalar {
            let k = self.k as f64;
            lo = lo.min(t / self.d + k);
            hi = hi.max(far / self.d + k);
        }
        (vec![lo; self.dim], vec![hi; self.dim])
    }

    /// Half-width of an origin cube the region avoids.
    fn origin_clearance(&self) -> f64 {
        let a = self.alpha();
        let u0 = self.frame_coords(&vec![0.0; self.dim]);
        let (lo, hi, scale) = match self.kind {
            FloatKind::NegScalar => (1.0 - a, 1.0, 1.0),
            FloatKind::Scalar => (0.0, 1.0, self.d),
        };
        let u0: Vec<f64> = u0.iter().map(|v| v * scale).collect();
        let slack = u0.iter().map(|&v| (v - lo).min(hi - v)).fold(f64::INFINITY, f64::min);
        (slack / ((1.0 + a) * scale)).max(0.0)
    }

    fn factor(&self) -> f64 {
        match self.kind {
            FloatKind::NegScalar => -self.d,
            FloatKind::Scalar => self.d,
        }
    }
}

/// Region and dilation reduced to float callbacks.
trait Shape: Sync {
    fn dim(&self) -> usize;
    fn classify(&self, x: &[f64], tol: f64) -> Tri;
    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>);
    /// Points with `|x|_∞ <= clearance` are never sampled.
    fn clearance(&self) -> f64;
    /// `d` with `A*^p = d·I`.
    fn scalar(&self) -> f64;
    /// `(j, A*ʲx)` for every `j` that can bring `x` into the region.
    fn dilates(&self, x: &[f64]) -> Vec<(i64, Vec<f64>)>;

    /// Bounding box enlarged to hold the shell `ρ < |x|_∞ <= dρ`.
    fn dilation_box(&self) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = self.bounding_box();
        let shell = self.scalar() * self.clearance();
        (lo.iter().map(|v| v.min(-shell)).collect(), hi.iter().map(|v| v.max(shell)).collect())
    }
}

impl Shape for FloatConstruction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn classify(&self, x: &[f64], tol: f64) -> Tri {
        FloatConstruction::classify(self, x, tol)
    }

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        FloatConstruction::bounding_box(self)
    }

    fn clearance(&self) -> f64 {
        0.99 * self.origin_clearance()
    }

    fn scalar(&self) -> f64 {
        self.d
    }

    fn dilates(&self, x: &[f64]) -> Vec<(i64, Vec<f64>)> {
        let (lo, hi) = self.bounding_box();
        let r_hi = lo.iter().chain(&hi).fold(0.0f64, |m, v| m.max(v.abs()));
        let r_lo = self.clearance();
        let size = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let j_lo = ((r_lo / size).ln() / self.d.ln()).floor() as i64 - 1;
        let j_hi = ((r_hi / size).ln() / self.d.ln()).ceil() as i64 + 1;
        let f = self.factor();
        (j_lo..=j_hi)
            .map(|j| (j, x.iter().map(|v| v * f.powi(j as i32)).collect()))
            .collect()
    }
}

struct CellShape {
    dim: usize,
    /// Unit-normal halfspaces per cell.
    cells: Vec<Vec<(Vec<f64>, f64)>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    clearance: f64,
    scalar: f64,
    powers: Vec<(i64, Vec<Vec<f64>>)>,
}

impl CellShape {
    fn new(region: &Region, d: &DilationSpec) -> Result<Self> {
        let cells = region
            .cells
            .iter()
            .map(|c| {
                c.halfspaces()
                    .iter()
                    .map(|h| {
                        let a = h.normal.to_f64();
                        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                        (a.iter().map(|v| v / norm).collect(), to_f64(&h.offset) / norm)
                    })
                    .collect()
            })
            .collect();
        let (lo, hi) = region.bounding_box();
        let band = norm_band(&region.cells);
        if band.lo2 == num_traits::Zero::zero() {
            return Err(WavekitError::InfiniteRange("region touches the origin".into()));
        }
        let clearance = 0.99 * to_f64(&band.lo2).sqrt() / (region.dim as f64).sqrt();
        let rho = crate::ratgeom::from_f64(clearance).expect("finite clearance");
        let shell = &d.scalar * &rho;
        let hi2 = (0..region.dim)
            .map(|i| std::cmp::max(num_traits::Signed::abs(&lo[i]), num_traits::Signed::abs(&hi[i])))
            .map(|x| std::cmp::max(x, shell.clone()))
            .map(|x| &x * &x)
            .sum();
        let from = NormBand {
            lo2: &rho * &rho,
            hi2,
        };
        let window = exponent_window(d, &from, &band)?;
        let powers = (window.0..=window.1)
            .map(|j| Ok((j, d.transpose.powi(j)?.to_f64_rows())))
            .collect::<Result<_>>()?;
        Ok(CellShape {
            dim: region.dim,
            cells,
            lo: lo.to_f64(),
            hi: hi.to_f64(),
            clearance,
            scalar: to_f64(&d.scalar),
            powers,
        })
    }
}

impl Shape for CellShape {
    fn dim(&self) -> usize {
        self.dim
    }

    fn classify(&self, x: &[f64], tol: f64) -> Tri {
        self.cells.iter().fold(Tri::Out, |acc, cell| {
            let slack = cell
                .iter()
                .map(|(a, b)| b - a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            acc.or(Tri::from_slack(slack, tol))
        })
    }

    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        (self.lo.clone(), self.hi.clone())
    }

    fn clearance(&self) -> f64 {
        self.clearance
    }

    fn scalar(&self) -> f64 {
        self.scalar
    }

    fn dilates(&self, x: &[f64]) -> Vec<(i64, Vec<f64>)> {
        self.powers
            .iter()
            .map(|(j, m)| (*j, m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()))
            .collect()
    }
}

fn witness(x: &[f64]) -> RatVec {
    RatVec(x.iter().map(|&v| from_f64(v).expect("finite sample")).collect())
}

fn finish(mut report: TilingReport, seed: u64, start: Instant) -> TilingReport {
    report.seed = Some(seed);
    report
        .warnings
        .push("float mode: membership decided with a tolerance, not exactly".into());
    let total = (report.samples_checked + report.rerolled).max(1) as f64;
    if report.verdict == Verdict::Pass && report.rerolled as f64 / total > MARGINAL_LIMIT {
        report.verdict = Verdict::Indeterminate;
        report
            .warnings
            .push(format!("{} samples fell within tolerance of a boundary", report.rerolled));
    }
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    report
}

/// Runs `body` on `samples` draws split into seeded batches.
fn run_batches<F>(samples: usize, seed: u64, body: F) -> TilingReport
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, &mut TilingReport) + Sync,
{
    let batches = samples.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b as u64);
            let mut report = TilingReport::empty(ReportMode::Float);
            for _ in 0..BATCH.min(samples - b * BATCH) {
                body(&mut rng, &mut report);
            }
            report
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(TilingReport::empty(ReportMode::Float), TilingReport::merge)
}

/// Counts hits among candidate points; `None` when any is marginal.
fn count(shape: &dyn Shape, points: impl Iterator<Item = Vec<f64>>, tol: f64) -> Option<usize> {
    let mut hits = 0;
    for p in points {
        match shape.classify(&p, tol) {
            Tri::In => hits += 1,
            Tri::Marginal => return None,
            Tri::Out => {}
        }
    }
    Some(hits)
}

fn sample_until_decided(
    rng: &mut rand_chacha::ChaCha8Rng,
    report: &mut TilingReport,
    draw: impl Fn(&mut rand_chacha::ChaCha8Rng) -> Option<Vec<f64>>,
    hits: impl Fn(&[f64]) -> Option<usize>,
) {
    let mut rerolls = 0;
    loop {
        let Some(x) = draw(rng) else { continue };
        match hits(&x) {
            None if rerolls < MAX_REROLLS => {
                rerolls += 1;
                report.rerolled += 1;
                continue;
            }
            Some(h) if h != 1 => report.fail_with(Offender::bad_count(h, witness(&x))),
            _ => {}
        }
        report.samples_checked += 1;
        return;
    }
}

fn translation_float(shape: &dyn Shape, samples: usize, seed: u64, tol: f64) -> TilingReport {
    let start = Instant::now();
    let n = shape.dim();
    let (lo, hi) = shape.bounding_box();
    let report = run_batches(samples, seed, |rng, report| {
        sample_until_decided(
            rng,
            report,
            |rng| Some((0..n).map(|_| rng.gen::<f64>()).collect()),
            |x| {
                let mut offsets = vec![Vec::new()];
                for i in 0..n {
                    let (a, b) = ((lo[i] - x[i]).floor() as i64 - 1, (hi[i] - x[i]).ceil() as i64 + 1);
                    offsets = offsets
                        .into_iter()
                        .flat_map(|p: Vec<i64>| (a..=b).map(move |k| [p.clone(), vec![k]].concat()))
                        .collect();
                }
                count(
                    shape,
                    offsets.into_iter().map(|z| x.iter().zip(&z).map(|(v, &k)| v + k as f64).collect()),
                    tol,
                )
            },
        )
    });
    finish(report, seed, start)
}

fn dilation_float(shape: &dyn Shape, samples: usize, seed: u64, tol: f64) -> TilingReport {
    let start = Instant::now();
    let n = shape.dim();
    let (lo, hi) = shape.dilation_box();
    let rho = shape.clearance();
    let report = run_batches(samples, seed, |rng, report| {
        sample_until_decided(
            rng,
            report,
            |rng| {
                let x: Vec<f64> = (0..n).map(|i| lo[i] + (hi[i] - lo[i]) * rng.gen::<f64>()).collect();
                (x.iter().fold(0.0f64, |m, v| m.max(v.abs())) > rho).then_some(x)
            },
            |x| count(shape, shape.dilates(x).into_iter().map(|(_, y)| y), tol),
        )
    });
    finish(report, seed, start)
}

/// Float verification of a formula-described construction.
pub fn verify_construction_float(c: &FloatConstruction, samples: usize, seed: u64, tol: f64) -> Result<WaveletVerdict> {
    c.validate()?;
    Ok(WaveletVerdict::new(
        translation_float(c, samples, seed, tol),
        dilation_float(c, samples, seed, tol),
        None,
        None,
    ))
}

/// Float verification of an exact region, for comparison with exact mode.
pub fn verify_region_float(region: &Region, d: &DilationSpec, samples: usize, seed: u64, tol: f64) -> Result<WaveletVerdict> {
    let shape = CellShape::new(region, d)?;
    Ok(WaveletVerdict::new(
        translation_float(&shape, samples, seed, tol),
        dilation_float(&shape, samples, seed, tol),
        None,
        None,
    ))
}
