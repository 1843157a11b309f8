use std::time::Instant;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{Offender, ReportMode, TilingReport, Verdict};
use super::sample::{batch_rng, fast_cells, interior_hits, DyadicBox, FastCell, BATCH, MAX_REROLLS};
use crate::construct::ConstructionTrace;
use crate::error::{Result, WavekitError};
use crate::polytope::{subtract_convex, ConvexCell, Parallelotope, Region};
use crate::ratgeom::{int, rat_serde, to_f64, DilationKind, DilationSpec, Rat, RatMatrix, RatVec};

const LOG_GUARD: i64 = 100_000;
const WINDOW_GUARD: i64 = 4096;
const PIECE_GUARD: usize = 4096;

/// Bounds `lo2 <= |x|² <= hi2` on squared Euclidean norms over a set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormBand {
    pub lo2: Rat,
    pub hi2: Rat,
}

/// Squared distance from the origin to the halfspace, zero if it holds 0.
fn halfspace_clearance2(cell: &ConvexCell) -> Rat {
    cell.halfspaces()
        .iter()
        .filter(|h| h.offset.is_negative())
        .map(|h| &h.offset * &h.offset / h.normal.norm_sq())
        .max()
        .unwrap_or_else(Rat::zero)
}

/// `∞`-norm clearance of the origin: `min over cells of max over facets
/// with 0 outside of |b| / ‖a‖₁`.
fn sup_clearance(cells: &[ConvexCell]) -> Rat {
    cells
        .iter()
        .map(|c| {
            c.halfspaces()
                .iter()
                .filter(|h| h.offset.is_negative())
                .map(|h| -&h.offset / h.normal.iter().map(|a| a.abs()).sum::<Rat>())
                .max()
                .unwrap_or_else(Rat::zero)
        })
        .min()
        .unwrap_or_else(Rat::zero)
}

pub fn norm_band(cells: &[ConvexCell]) -> NormBand {
    let lo2 = cells.iter().map(halfspace_clearance2).min().unwrap_or_else(Rat::zero);
    let hi2 = cells
        .iter()
        .flat_map(|c| c.vertices().iter().map(RatVec::norm_sq))
        .max()
        .unwrap_or_else(Rat::zero);
    NormBand { lo2, hi2 }
}

/// Upper bound on the squared spectral norm.
fn op_norm_sq_bound(m: &RatMatrix) -> Rat {
    let n = m.dim();
    let frob: Rat = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m.get(i, j) * m.get(i, j)).sum();
    let col_max = (0..n).map(|j| m.col(j).iter().map(|a| a.abs()).sum::<Rat>()).max().unwrap();
    let row_max = (0..n).map(|i| m.row(i).iter().map(|a| a.abs()).sum::<Rat>()).max().unwrap();
    std::cmp::min(frob, col_max * row_max)
}

/// Largest `m` with `e^m <= x`.
fn floor_log(e: &Rat, x: &Rat) -> Result<i64> {
    let mut m = 0i64;
    let mut p = Rat::one();
    while &p > x {
        p /= e;
        m -= 1;
        if m < -LOG_GUARD {
            return Err(WavekitError::ComplexityGuard("exponent search ran away".into()));
        }
    }
    loop {
        let next = &p * e;
        if &next > x {
            return Ok(m);
        }
        p = next;
        m += 1;
        if m > LOG_GUARD {
            return Err(WavekitError::ComplexityGuard("exponent search ran away".into()));
        }
    }
}

/// Smallest `m` with `e^m >= x`.
fn ceil_log(e: &Rat, x: &Rat) -> Result<i64> {
    let f = floor_log(e, x)?;
    let p = num_traits::pow(e.clone(), f.unsigned_abs() as usize);
    let at_f = if f >= 0 { p } else { p.recip() };
    Ok(if &at_f == x { f } else { f + 1 })
}

/// Exponents `j` for which `A*ʲ` can move a point of `from` into `to`,
/// using `A*^p = d·I` and norm bounds for `A*^s`, `0 <= s < p`.
pub fn exponent_window(d: &DilationSpec, from: &NormBand, to: &NormBand) -> Result<(i64, i64)> {
    if from.lo2.is_zero() || to.lo2.is_zero() {
        return Err(WavekitError::InfiniteRange(
            "the set touches the origin, so infinitely many dilates can meet it".into(),
        ));
    }
    let e = &d.scalar * &d.scalar;
    let a = &d.transpose;
    let a_inv = a.inverse()?;
    let p = d.power as i64;
    let mut window: Option<(i64, i64)> = None;
    let mut fwd = RatMatrix::identity(d.dim());
    let mut back = RatMatrix::identity(d.dim());
    for s in 0..p {
        let upper = op_norm_sq_bound(&fwd);
        let lower = op_norm_sq_bound(&back).recip();
        let m_hi = floor_log(&e, &(&to.hi2 / (&lower * &from.lo2)))?;
        let m_lo = ceil_log(&e, &(&to.lo2 / (&upper * &from.hi2)))?;
        if m_lo <= m_hi {
            let (lo, hi) = (p * m_lo + s, p * m_hi + s);
            window = Some(match window {
                None => (lo, hi),
                Some((a, b)) => (a.min(lo), b.max(hi)),
            });
        }
        fwd = fwd.mul(a);
        back = back.mul(&a_inv);
    }
    let (lo, hi) = window.unwrap_or((0, 0));
    if hi - lo > WINDOW_GUARD {
        return Err(WavekitError::ComplexityGuard(format!("exponent window [{lo}, {hi}] too wide")));
    }
    Ok((lo, hi))
}

/// Exponents `j` outside of which `A*ʲ R` cannot meet `R`.
pub fn dilation_j_range(region: &Region, d: &DilationSpec) -> Result<(i64, i64)> {
    check_dims(region, d)?;
    let band = norm_band(&region.cells);
    let (lo, hi) = exponent_window(d, &band, &band)?;
    Ok((lo.min(0), hi.max(0)))
}

fn check_dims(region: &Region, d: &DilationSpec) -> Result<()> {
    if region.dim != d.dim() {
        return Err(WavekitError::Dimension(format!(
            "region has dimension {}, dilation {}",
            region.dim,
            d.dim()
        )));
    }
    Ok(())
}

fn dilate(region: &Region, d: &DilationSpec, j: i64) -> Result<Region> {
    region.affine_image(&d.transpose.powi(j)?, &RatVec::zeros(region.dim))
}

/// Packing part: `R` against `A*ʲ R` for `1 <= j <= j_max`.
fn dilation_overlaps(region: &Region, d: &DilationSpec, j_max: i64) -> Result<Vec<Offender>> {
    let found: Vec<Option<Offender>> = (1..=j_max)
        .into_par_iter()
        .map(|j| {
            let image = dilate(region, d, j)?;
            Ok(region
                .overlap_witness(&image)?
                .map(|w| Offender::overlap_at_exponent(j, w)))
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// A fundamental domain for the dilation built from the frame, as cells.
/// Prefers `K \ A*⁻¹K`; falls back to `K \ d⁻¹K` for `A*^p = d·I`.
fn fundamental_domain(frame: &Parallelotope, d: &DilationSpec) -> Result<Option<(Vec<ConvexCell>, Rat)>> {
    let n = d.dim();
    let outer = frame.to_cell()?;
    if !outer.contains_in_interior(&RatVec::zeros(n)) {
        return Ok(None);
    }
    let inner = frame.affine_image(&d.transpose.inverse()?, &RatVec::zeros(n))?.to_cell()?;
    let inner = if inner.vertices().iter().all(|v| outer.contains(v)) {
        inner
    } else {
        // convexity with 0 inside gives d⁻¹K ⊆ K
        frame.scaled(&d.scalar.recip())?.to_cell()?
    };
    let volume = outer.volume() - inner.volume();
    Ok(Some((subtract_convex(&outer, &inner), volume)))
}

fn boxes_overlap(a: &(RatVec, RatVec), b: &(RatVec, RatVec)) -> bool {
    (0..a.0.dim()).all(|i| a.0[i] < b.1[i] && b.0[i] < a.1[i])
}

struct Coverage {
    covered: Rat,
    target: Rat,
    uncovered: Option<RatVec>,
}

fn coverage(region: &Region, d: &DilationSpec, domain: &[ConvexCell], target: Rat) -> Result<Coverage> {
    let window = exponent_window(d, &norm_band(&region.cells), &norm_band(domain))?;
    let domain_boxes: Vec<_> = domain.iter().map(ConvexCell::bounding_box).collect();
    let pieces: Vec<Vec<ConvexCell>> = (window.0..=window.1)
        .into_par_iter()
        .map(|j| {
            let image = dilate(region, d, j)?;
            let mut out = Vec::new();
            for c in &image.cells {
                let cb = c.bounding_box();
                for (dc, db) in domain.iter().zip(&domain_boxes) {
                    if boxes_overlap(&cb, db) {
                        if let Some(piece) = c.intersect(dc) {
                            out.push(piece);
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let pieces: Vec<ConvexCell> = pieces.into_iter().flatten().collect();
    let covered: Rat = pieces.par_iter().map(ConvexCell::volume).reduce(Rat::zero, |a, b| a + b);
    let uncovered = if covered < target {
        let mut remaining = domain.to_vec();
        for p in &pieces {
            remaining = remaining.iter().flat_map(|r| subtract_convex(r, p)).collect();
            if remaining.is_empty() || remaining.len() > PIECE_GUARD {
                break;
            }
        }
        if remaining.len() > PIECE_GUARD {
            None
        } else {
            remaining.first().map(ConvexCell::centroid)
        }
    } else {
        None
    };
    Ok(Coverage {
        covered,
        target,
        uncovered,
    })
}

/// Exact dilation tiling: packing against every dilate in the window plus
/// exact coverage of a fundamental domain built from the frame. Without a
/// usable frame, coverage is sampled.
pub fn verify_dilation_exact(region: &Region, d: &DilationSpec, samples: usize, seed: u64) -> Result<TilingReport> {
    let start = Instant::now();
    check_dims(region, d)?;
    d.validate()?;
    let mut report = TilingReport::empty(ReportMode::Exact);
    let window = match dilation_j_range(region, d) {
        Ok(w) => w,
        Err(WavekitError::InfiniteRange(msg)) => {
            report.warnings.push(msg);
            for o in dilation_overlaps(region, d, 4 * d.power as i64)? {
                report.fail_with(o);
            }
            if report.offenders.is_empty() {
                report.verdict = Verdict::Indeterminate;
            }
            report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.exponent_window = Some(window);
    let j_max = window.1.max(-window.0);
    for o in dilation_overlaps(region, d, j_max)? {
        report.fail_with(o);
    }

    let domain = match &region.frame {
        Some(frame) => fundamental_domain(frame, d)?,
        None => None,
    };
    match domain {
        Some((cells, target)) => {
            let cov = coverage(region, d, &cells, target)?;
            report.volume = cov.covered.clone();
            report.expected_volume = Some(cov.target.clone());
            if cov.covered < cov.target {
                report.fail_with(Offender::uncovered(cov.uncovered));
            } else if cov.covered > cov.target && report.offenders.is_empty() {
                report.fail_with(Offender::uncovered(None));
                report.warnings.push("fundamental domain covered more than once".into());
            }
        }
        None => {
            report.warnings.push(
                "no usable outer parallelotope; dilation coverage was sampled, not proved".into(),
            );
            let mc = verify_dilation_mc(region, d, samples, seed)?;
            report.volume = region.volume();
            report = report.merge(TilingReport {
                mode: ReportMode::Exact,
                ..mc
            });
        }
    }
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Sampled dilation tiling: points outside a small origin box `|x|_∞ <= ρ`
/// must have exactly one dilate `A*ʲx` in the region. Samples come from the
/// bounding box enlarged to hold the shell `ρ < |x|_∞ <= dρ`.
pub fn verify_dilation_mc(region: &Region, d: &DilationSpec, samples: usize, seed: u64) -> Result<TilingReport> {
    let start = Instant::now();
    check_dims(region, d)?;
    let n = region.dim;
    let mut warnings = Vec::new();
    let (mut lo, mut hi) = region.bounding_box();
    let mut rho = sup_clearance(&region.cells);
    if rho.is_zero() {
        let extent = (0..n).map(|i| &hi[i] - &lo[i]).max().unwrap();
        rho = extent / int(1024);
        warnings.push("region touches the origin; dilation counts are truncated near 0".into());
    }
    // the shell ρ < |x|_∞ <= dρ meets every orbit of A*^p = d·I
    let shell = &d.scalar * &rho;
    for i in 0..n {
        lo.0[i] = std::cmp::min(lo[i].clone(), -&shell);
        hi.0[i] = std::cmp::max(hi[i].clone(), shell.clone());
    }
    let sample_box = DyadicBox::covering(&lo, &hi);
    let (blo, bhi) = sample_box.corners();
    let hi2: Rat = (0..n).map(|i| std::cmp::max(blo[i].abs(), bhi[i].abs())).map(|x| &x * &x).sum();
    let from = NormBand {
        lo2: &rho * &rho,
        hi2,
    };
    let mut to = norm_band(&region.cells);
    if to.lo2.is_zero() {
        to.lo2 = &rho * &rho / int(4);
    }
    let window = exponent_window(d, &from, &to)?;
    let pulled: Vec<(i64, Vec<FastCell>)> = (window.0..=window.1)
        .map(|j| Ok((j, fast_cells(&dilate(region, d, -j)?))))
        .collect::<Result<_>>()?;
    let rho_f = to_f64(&rho) * (1.0 + 1e-9);

    let batches = samples.div_ceil(BATCH);
    let reports: Vec<TilingReport> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b as u64);
            let mut report = TilingReport::empty(ReportMode::MonteCarlo);
            let todo = BATCH.min(samples - b * BATCH);
            for _ in 0..todo {
                let mut rerolls = 0;
                loop {
                    let x = sample_box.sample(&mut rng);
                    let xf = x.to_f64();
                    if xf.iter().all(|v| v.abs() <= rho_f) {
                        continue;
                    }
                    let mut hits = Some(0);
                    for (_, cells) in &pulled {
                        match (hits, interior_hits(cells, &x, &xf)) {
                            (Some(h), Some(k)) => hits = Some(h + k),
                            _ => {
                                hits = None;
                                break;
                            }
                        }
                    }
                    match hits {
                        None if rerolls < MAX_REROLLS => {
                            rerolls += 1;
                            report.rerolled += 1;
                            continue;
                        }
                        Some(h) if h != 1 => report.fail_with(Offender::bad_count(h, x.to_rat())),
                        _ => {}
                    }
                    report.samples_checked += 1;
                    break;
                }
            }
            report
        })
        .collect();
    let mut report = reports
        .into_iter()
        .fold(TilingReport::empty(ReportMode::MonteCarlo), TilingReport::merge);
    report.volume = region.volume();
    report.seed = Some(seed);
    report.exponent_window = Some(window);
    report.warnings.extend(warnings);
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Checks that the satellite, dilated by `A*^{1−pq}`, is exactly the notch
/// of the frame, by comparing vertex sets.
pub fn satellite_notch_identity(trace: &ConstructionTrace, d: &DilationSpec) -> Result<bool> {
    let Some(k) = &trace.k else {
        return Ok(false);
    };
    let n = d.dim();
    if crate::construct::w_vector(n, &trace.alpha)? != trace.w {
        return Ok(false);
    }
    let frame = Parallelotope::of_vector(&trace.w)?.translate(&trace.t);
    let notch = frame.corner(&(Rat::one() - &trace.alpha))?;
    let satellite = frame.affine_image(&d.transpose.inverse()?, k)?;
    let exponent = 1 - d.power as i64 * trace.q as i64;
    let dilated = satellite.affine_image(&d.transpose.powi(exponent)?, &RatVec::zeros(n))?;
    Ok(dilated.vertices() == notch.vertices())
}

/// The identity `W ⊔ (−1/d)W = K \ d⁻²K` for the negative-dilation region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegDilationIdentity {
    pub disjoint: bool,
    #[serde(with = "rat_serde")]
    pub union_volume: Rat,
    #[serde(with = "rat_serde")]
    pub shell_volume: Rat,
    #[serde(with = "rat_serde")]
    pub common_volume: Rat,
    pub holds: bool,
}

pub fn negative_dilation_identity(region: &Region, d: &DilationSpec) -> Result<NegDilationIdentity> {
    if d.kind != DilationKind::NegativeScalar {
        return Err(WavekitError::Parameter("identity applies to negative scalar dilations".into()));
    }
    let frame = region
        .frame
        .as_ref()
        .ok_or_else(|| WavekitError::Parameter("region has no outer parallelotope".into()))?;
    let n = region.dim;
    let flipped = dilate(region, d, -1)?;
    let disjoint = region.overlap_witness(&flipped)?.is_none();
    let outer = frame.to_cell()?;
    let inner = frame.scaled(&d.scalar.recip())?.to_cell()?;
    let shell = Region::new(n, subtract_convex(&outer, &inner))?;
    let union_volume = region.volume() + flipped.volume();
    let shell_volume = outer.volume() - inner.volume();
    let common_volume = region.intersection_volume(&shell) + flipped.intersection_volume(&shell);
    let holds = disjoint && union_volume == shell_volume && common_volume == shell_volume;
    Ok(NegDilationIdentity {
        disjoint,
        union_volume,
        shell_volume,
        common_volume,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratgeom::rat;

    #[test]
    fn logs() {
        let e = Rat::from(int(4));
        assert_eq!(floor_log(&e, &int(1)).unwrap(), 0);
        assert_eq!(floor_log(&e, &int(15)).unwrap(), 1);
        assert_eq!(floor_log(&e, &int(16)).unwrap(), 2);
        assert_eq!(floor_log(&e, &rat(1, 5)).unwrap(), -2);
        assert_eq!(ceil_log(&e, &int(16)).unwrap(), 2);
        assert_eq!(ceil_log(&e, &int(17)).unwrap(), 3);
        assert_eq!(ceil_log(&e, &rat(1, 5)).unwrap(), -1);
    }

    #[test]
    fn scalar_window_is_logarithmic() {
        let d = DilationSpec::positive_scalar(2, &int(2)).unwrap();
        let band = NormBand {
            lo2: int(1),
            hi2: int(64),
        };
        // |x| in [1, 8] and 2^j |x| in [1, 8] allows |j| <= 3
        assert_eq!(exponent_window(&d, &band, &band).unwrap(), (-3, 3));
        let touching = NormBand {
            lo2: int(0),
            hi2: int(1),
        };
        assert!(matches!(
            exponent_window(&d, &touching, &band),
            Err(WavekitError::InfiniteRange(_))
        ));
    }

    #[test]
    fn unit_cube_fails_dilation() {
        let cube = ConvexCell::from_box(&RatVec::zeros(2), &RatVec::ones(2)).unwrap();
        let r = Region::new(2, vec![cube]).unwrap();
        let d = DilationSpec::positive_scalar(2, &int(2)).unwrap();
        assert!(matches!(dilation_j_range(&r, &d), Err(WavekitError::InfiniteRange(_))));
        let rep = verify_dilation_exact(&r, &d, 1000, 42).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.offenders[0].witness.is_some());
        assert_eq!(verify_dilation_mc(&r, &d, 1000, 42).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn annulus_tiles_scalar_dilation() {
        // [-2,2]² \ [-1,1]² as four boxes tiles under dilation by 2
        let b = |l: [i64; 2], h: [i64; 2]| ConvexCell::from_box(&RatVec::from_ints(&l), &RatVec::from_ints(&h)).unwrap();
        let r = Region::new(2, vec![b([-2, -2], [2, -1]), b([-2, 1], [2, 2]), b([-2, -1], [-1, 1]), b([1, -1], [2, 1])])
            .unwrap()
            .with_frame(Parallelotope::new(RatVec::from_ints(&[-2, -2]), RatMatrix::scalar(2, &int(4))).unwrap());
        let d = DilationSpec::positive_scalar(2, &int(2)).unwrap();
        let rep = verify_dilation_exact(&r, &d, 1000, 42).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.volume, int(12));
        assert!(verify_dilation_mc(&r, &d, 4000, 42).unwrap().passed());
        // by 3 it leaves gaps
        let d3 = DilationSpec::positive_scalar(2, &int(3)).unwrap();
        let rep3 = verify_dilation_exact(&r, &d3, 1000, 42).unwrap();
        assert_eq!(rep3.verdict, Verdict::Fail);
        let w = rep3.offenders[0].witness.clone().unwrap();
        let mut scale = rat(1, 27);
        for _ in -3..=3 {
            assert!(!r.cells.iter().any(|c| c.contains_in_interior(&w.scale(&scale))));
            scale *= int(3);
        }
        assert_eq!(verify_dilation_mc(&r, &d3, 4000, 42).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn frameless_region_samples_coverage() {
        let b = |l: [i64; 2], h: [i64; 2]| ConvexCell::from_box(&RatVec::from_ints(&l), &RatVec::from_ints(&h)).unwrap();
        let r = Region::new(2, vec![b([-2, -2], [2, -1]), b([-2, 1], [2, 2]), b([-2, -1], [-1, 1]), b([1, -1], [2, 1])]).unwrap();
        let d = DilationSpec::positive_scalar(2, &int(2)).unwrap();
        let rep = verify_dilation_exact(&r, &d, 2000, 42).unwrap();
        assert!(rep.passed());
        assert!(rep.warnings.iter().any(|w| w.contains("sampled")));
    }
}
