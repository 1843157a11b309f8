use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use super::report::{Offender, ReportMode, TilingReport, Verdict};
use super::sample::{batch_rng, fast_cells, unit_cube_point, BATCH, MAX_REROLLS};
use crate::error::{Result, WavekitError};
use crate::polytope::{subtract_convex, ConvexCell, Lattice, Region};
use crate::ratgeom::{Rat, RatVec};

/// Candidate checks allowed before the exact translation test gives up.
const PAIR_GUARD: usize = 5_000_000;
/// Pieces allowed while searching for an uncovered witness.
const PIECE_GUARD: usize = 4096;

fn floor_i64(x: &Rat) -> i64 {
    x.floor().to_integer().to_i64().expect("offset range fits in i64")
}

fn ceil_i64(x: &Rat) -> i64 {
    x.ceil().to_integer().to_i64().expect("offset range fits in i64")
}

fn int_vec(z: &[i64]) -> RatVec {
    RatVec(z.iter().map(|&k| Rat::from_integer(BigInt::from(k))).collect())
}

/// All integer vectors in the product of inclusive ranges.
fn grid(ranges: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &(lo, hi) in ranges {
        let mut next = Vec::with_capacity(out.len() * (hi - lo + 1).max(0) as usize);
        for prefix in &out {
            for k in lo..=hi {
                let mut v = prefix.clone();
                v.push(k);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Nonzero `z` whose translate of the bounding box meets the bounding box.
pub fn translation_offsets(region: &Region) -> Vec<RatVec> {
    let (lo, hi) = region.bounding_box();
    let ranges: Vec<(i64, i64)> = (0..region.dim)
        .map(|i| {
            let w = floor_i64(&(&hi[i] - &lo[i]));
            (-w, w)
        })
        .collect();
    grid(&ranges)
        .into_iter()
        .filter(|z| z.iter().any(|&k| k != 0))
        .map(|z| int_vec(&z))
        .collect()
}

/// Integer `z` with `a` and `b + z` having overlapping open bounding boxes.
fn pair_offsets(a: &ConvexCell, b: &ConvexCell) -> Vec<Vec<i64>> {
    let (lo_a, hi_a) = a.bounding_box();
    let (lo_b, hi_b) = b.bounding_box();
    let ranges: Vec<(i64, i64)> = (0..a.dim())
        .map(|i| (floor_i64(&(&lo_a[i] - &hi_b[i])) + 1, ceil_i64(&(&hi_a[i] - &lo_b[i])) - 1))
        .collect();
    if ranges.iter().any(|(l, h)| l > h) {
        return Vec::new();
    }
    grid(&ranges)
}

fn lex_positive(z: &[i64]) -> bool {
    z.iter().find(|&&k| k != 0).is_some_and(|&k| k > 0)
}

/// Packing check: every `(cell i, cell j, z)` with `z ≠ 0` whose boxes can
/// overlap, up to the symmetry `(i, j, z) ~ (j, i, −z)`.
fn packing_offenders(region: &Region) -> Result<Vec<Offender>> {
    let cells = &region.cells;
    let mut jobs = Vec::new();
    for i in 0..cells.len() {
        for j in i..cells.len() {
            for z in pair_offsets(&cells[i], &cells[j]) {
                let nonzero = z.iter().any(|&k| k != 0);
                if (i < j && nonzero) || (i == j && lex_positive(&z)) {
                    jobs.push((i, j, z));
                }
            }
            if jobs.len() > PAIR_GUARD {
                return Err(WavekitError::ComplexityGuard(format!(
                    "more than {PAIR_GUARD} cell/offset pairs to check"
                )));
            }
        }
    }
    let found: Vec<Option<Offender>> = jobs
        .par_iter()
        .map(|(i, j, z)| {
            let shift = int_vec(z);
            let moved = cells[*j].translate(&shift);
            Ok(cells[*i]
                .overlap_witness(&moved)?
                .map(|w| Offender::overlap_at_offset(shift, w)))
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// A point of `[0,1)^n` covered by no translate of the region.
fn uncovered_witness(region: &Region) -> Option<RatVec> {
    let n = region.dim;
    let unit = ConvexCell::from_box(&RatVec::zeros(n), &RatVec::ones(n)).ok()?;
    let mut remaining = vec![unit.clone()];
    for c in &region.cells {
        for z in pair_offsets(&unit, c) {
            let piece = c.translate(&int_vec(&z));
            remaining = remaining.iter().flat_map(|r| subtract_convex(r, &piece)).collect();
            if remaining.is_empty() {
                return None;
            }
            if remaining.len() > PIECE_GUARD {
                return None;
            }
        }
    }
    remaining.first().map(ConvexCell::centroid)
}

/// Exact translation tiling by `ℤⁿ`: volume one plus packing.
pub fn verify_translation_exact(region: &Region) -> Result<TilingReport> {
    let start = Instant::now();
    let mut report = TilingReport::empty(ReportMode::Exact);
    report.volume = region.volume();
    report.expected_volume = Some(Rat::one());
    let overlaps = match packing_offenders(region) {
        Ok(o) => o,
        Err(WavekitError::ComplexityGuard(msg)) => {
            report.verdict = Verdict::Indeterminate;
            report.warnings.push(msg);
            report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    for o in overlaps {
        report.fail_with(o);
    }
    if report.volume != Rat::one() {
        report.warnings.push(format!("volume is {}, not 1", report.volume));
        if report.volume < Rat::one() {
            report.fail_with(Offender::uncovered(uncovered_witness(region)));
        } else if report.offenders.is_empty() {
            report.fail_with(Offender::uncovered(None));
        }
    }
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Sampled translation tiling: each point of `[0,1)^n` must have exactly
/// one integer translate in the region.
pub fn verify_translation_mc(region: &Region, samples: usize, seed: u64) -> TilingReport {
    let start = Instant::now();
    let n = region.dim;
    let cells = fast_cells(region);
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
                    let x = unit_cube_point(&mut rng, n);
                    let xf = x.to_f64();
                    let mut hits = 0usize;
                    let mut boundary = false;
                    'cells: for c in &cells {
                        let ranges: Vec<(i64, i64)> = (0..n)
                            .map(|i| ((c.lo[i] - xf[i]).floor() as i64 - 1, (c.hi[i] - xf[i]).ceil() as i64 + 1))
                            .collect();
                        for z in grid(&ranges) {
                            let y = x.shifted(&z);
                            let yf: Vec<f64> = xf.iter().zip(&z).map(|(a, &k)| a + k as f64).collect();
                            if !c.may_contain(&yf) {
                                continue;
                            }
                            match c.side(&y) {
                                super::sample::Side::Inside => hits += 1,
                                super::sample::Side::Boundary => {
                                    boundary = true;
                                    break 'cells;
                                }
                                super::sample::Side::Outside => {}
                            }
                        }
                    }
                    if boundary && rerolls < MAX_REROLLS {
                        rerolls += 1;
                        report.rerolled += 1;
                        continue;
                    }
                    report.samples_checked += 1;
                    if !boundary && hits != 1 {
                        report.fail_with(Offender::bad_count(hits, x.to_rat()));
                    }
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
    report.expected_volume = Some(Rat::one());
    report.seed = Some(seed);
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    report
}

/// Translation tiling by a general lattice, checked by pulling the region
/// back through the lattice basis.
pub fn verify_translation_lattice(
    region: &Region,
    lattice: &Lattice,
    exact: bool,
    samples: usize,
    seed: u64,
) -> Result<TilingReport> {
    let to_integer = lattice.basis.inverse()?;
    let pulled = region.affine_image(&to_integer, &RatVec::zeros(region.dim))?;
    let mut report = if exact {
        verify_translation_exact(&pulled)?
    } else {
        verify_translation_mc(&pulled, samples, seed)
    };
    // report witnesses in the original coordinates
    for o in &mut report.offenders {
        if let Some(w) = &o.witness {
            o.witness = Some(lattice.basis.mul_vec(w));
        }
        if let Some(z) = &o.offset {
            o.offset = Some(lattice.basis.mul_vec(z));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratgeom::{int, rat};

    fn boxes(n: usize, cells: &[(RatVec, RatVec)]) -> Region {
        Region::new(
            n,
            cells
                .iter()
                .map(|(l, h)| ConvexCell::from_box(l, h).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn unit_cube_offsets() {
        for n in 2..=3 {
            let r = boxes(n, &[(RatVec::zeros(n), RatVec::ones(n))]);
            assert_eq!(translation_offsets(&r).len(), 3usize.pow(n as u32) - 1);
            let rep = verify_translation_exact(&r).unwrap();
            assert!(rep.passed());
        }
    }

    #[test]
    fn shifted_box_tiles() {
        let r = boxes(2, &[(RatVec(vec![rat(-1, 3), rat(1, 2)]), RatVec(vec![rat(2, 3), rat(3, 2)]))]);
        assert!(verify_translation_exact(&r).unwrap().passed());
        assert!(verify_translation_mc(&r, 3000, 42).passed());
    }

    #[test]
    fn half_cube_fails_with_uncovered_witness() {
        let r = boxes(2, &[(RatVec::zeros(2), RatVec(vec![rat(1, 2), int(1)]))]);
        let rep = verify_translation_exact(&r).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        let w = rep.offenders[0].witness.clone().unwrap();
        assert!(w[0] > rat(1, 2));
        let mc = verify_translation_mc(&r, 2000, 42);
        assert_eq!(mc.verdict, Verdict::Fail);
        assert_eq!(mc.offenders[0].count, Some(0));
    }

    #[test]
    fn two_cubes_overlap() {
        let r = boxes(
            2,
            &[
                (RatVec::zeros(2), RatVec::ones(2)),
                (RatVec(vec![int(1), int(0)]), RatVec(vec![int(2), int(1)])),
            ],
        );
        let rep = verify_translation_exact(&r).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        let o = &rep.offenders[0];
        let w = o.witness.as_ref().unwrap();
        assert!(r.contains_point(w) && r.contains_point(&w.sub(o.offset.as_ref().unwrap())));
        let mc = verify_translation_mc(&r, 500, 1);
        assert_eq!(mc.offenders[0].count, Some(2));
    }

    #[test]
    fn mc_is_deterministic() {
        let r = boxes(2, &[(RatVec::zeros(2), RatVec(vec![rat(3, 4), int(1)]))]);
        let a = verify_translation_mc(&r, 3000, 9);
        let b = verify_translation_mc(&r, 3000, 9);
        assert_eq!(a.offenders, b.offenders);
        assert_eq!(a.samples_checked, 3000);
    }
}
