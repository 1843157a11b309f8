//! Builders for every region in the family: the notched cube and its
//! skewing lattice, the integer-tiling notched parallelotope, and the three
//! wavelet-set constructions (negative scalar, positive scalar with a
//! satellite, matrix with a search over `q`), plus unimodular images.

mod types;

use num_traits::{One, Signed};

pub use types::{
    ConstructionKind, ConstructionParams, ConstructionTrace, HypothesisReport, QAttempt,
};

use crate::error::{Result, WavekitError};
use crate::polytope::{subtract_convex, ConvexCell, Lattice, Parallelotope, Region, RegionMetadata};
use crate::ratgeom::{
    cyclic_matrix, int, nearest_integer_vector, rat, singular_values, DilationKind, DilationSpec,
    Rat, RatMatrix, RatVec, DEFAULT_P_MAX,
};

pub const DEFAULT_Q_MAX: u32 = 12;

/// How `build_matrix` picks the exponent `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QChoice {
    Fixed(u32),
    /// Try `q = 1, 2, ..., q_max` and take the first that is accepted.
    Search { q_max: u32 },
}

impl Default for QChoice {
    fn default() -> Self {
        QChoice::Search {
            q_max: DEFAULT_Q_MAX,
        }
    }
}

fn check_alpha(alpha: &Rat) -> Result<()> {
    if !alpha.is_positive() || *alpha >= Rat::one() {
        return Err(WavekitError::Parameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn check_construction_dim(n: usize) -> Result<()> {
    crate::polytope::check_dim(n)
}

/// Basis `I − αC` of the lattice under which the notched cube tiles.
pub fn stein_lattice(n: usize, alpha: &Rat) -> Result<Lattice> {
    check_construction_dim(n)?;
    check_alpha(alpha)?;
    Lattice::new(RatMatrix::identity(n).sub(&cyclic_matrix(n)?.scale(alpha)))
}

/// `w(α) = (1, α, ..., α^{n-1}) / (1 − α^n)`.
pub fn w_vector(n: usize, alpha: &Rat) -> Result<RatVec> {
    check_construction_dim(n)?;
    check_alpha(alpha)?;
    let denom = Rat::one() - num_traits::pow(alpha.clone(), n);
    let mut entries = Vec::with_capacity(n);
    let mut p = Rat::one();
    for _ in 0..n {
        entries.push(&p / &denom);
        p *= alpha;
    }
    Ok(RatVec(entries))
}

/// The unit cube with the corner cube `[1−α, 1]^n` removed, as `n` boxes.
pub fn notched_cube_region(n: usize, alpha: &Rat) -> Result<Region> {
    check_construction_dim(n)?;
    check_alpha(alpha)?;
    let cube = ConvexCell::from_box(&RatVec::zeros(n), &RatVec::ones(n))?;
    let corner = ConvexCell::from_box(&RatVec::filled(n, &(Rat::one() - alpha)), &RatVec::ones(n))?;
    let cells = subtract_convex(&cube, &corner);
    let mut params = ConstructionParams::new(n, ConstructionKind::NotchedCube);
    params.alpha = Some(alpha.clone());
    Ok(Region::new(n, cells)?
        .with_frame(Parallelotope::new(RatVec::zeros(n), RatMatrix::identity(n))?)
        .with_metadata(RegionMetadata {
            construction: Some(params),
            ..Default::default()
        }))
}

/// `N[w(α), α]`: the notched cube pushed through `(I − αC)⁻¹`, which maps
/// the Stein lattice onto `ℤⁿ`.
pub fn notched_parallelotope_region(n: usize, alpha: &Rat) -> Result<Region> {
    let cube = notched_cube_region(n, alpha)?;
    let skew = stein_lattice(n, alpha)?.basis.inverse()?;
    let mut region = cube.affine_image(&skew, &RatVec::zeros(n))?;
    let mut params = ConstructionParams::new(n, ConstructionKind::NotchedParallelotope);
    params.alpha = Some(alpha.clone());
    region.metadata = RegionMetadata {
        construction: Some(params),
        ..Default::default()
    };
    Ok(region)
}

/// Notch of a frame `τ_t P[w(α)]`: the copy scaled by `α` at the far vertex.
pub fn notch_of(frame: &Parallelotope, alpha: &Rat) -> Result<Parallelotope> {
    frame.corner(&(Rat::one() - alpha))
}

/// Wavelet set for dilation by `−d`: the notched parallelotope
/// `N[w(1/d), 1/d]` translated by `t·1`, `t = −d²/(d²−1)`.
pub fn build_negative_scalar(n: usize, d: &Rat) -> Result<(Region, ConstructionTrace)> {
    check_construction_dim(n)?;
    let dilation = DilationSpec::negative_scalar(n, d)?;
    let alpha = d.recip();
    let d2 = d * d;
    let t = RatVec::filled(n, &(-&d2 / (&d2 - Rat::one())));
    let mut region = notched_parallelotope_region(n, &alpha)?.translate(&t);
    let mut params = ConstructionParams::new(n, ConstructionKind::NegScalar);
    params.d = Some(d.clone());
    let trace = ConstructionTrace {
        q: 1,
        alpha: alpha.clone(),
        w: w_vector(n, &alpha)?,
        t,
        k: None,
        attempts: Vec::new(),
        cell_count: region.cells.len(),
        satellite_cell: None,
        hypothesis: None,
    };
    region.metadata = RegionMetadata {
        construction: Some(params),
        dilation: Some(dilation),
        trace: Some(trace.clone()),
    };
    Ok((region, trace))
}

/// One satellite construction attempt for a fixed `q` and integer `k`.
///
/// With `δ = scalar^q`, `α = 1/δ` and `t = (A*k − δ·1)/(δ − 1)`, the hole
/// `A*⁻¹ τ_t P[w(α)]` must sit inside `τ_t N[w(α), α]` (up to boundary) and
/// its translate by `k` must clear the notched body.
fn satellite_attempt(dilation: &DilationSpec, q: u32, k: &RatVec) -> Result<(QAttempt, Option<Region>)> {
    let n = dilation.dim();
    let delta = num_traits::pow(dilation.scalar.clone(), q as usize);
    let alpha = delta.recip();
    let astar = &dilation.transpose;
    let astar_inv = astar.inverse()?;
    let t = astar
        .mul_vec(k)
        .sub(&RatVec::filled(n, &delta))
        .scale(&(&delta - Rat::one()).recip());

    let body = notched_parallelotope_region(n, &alpha)?.translate(&t);
    let frame = body.frame.clone().expect("notched parallelotope carries its frame");
    let hole = frame.affine_image(&astar_inv, &RatVec::zeros(n))?.to_cell()?;
    let frame_cell = frame.to_cell()?;
    let notch = notch_of(&frame, &alpha)?.to_cell()?;

    let hole_inside_frame = hole.vertices().iter().all(|v| frame_cell.contains(v));
    let hole_clear_of_notch = hole.overlap_witness(&notch)?.is_none();
    let satellite = hole.translate(k);
    let mut satellite_clear = true;
    for c in &body.cells {
        if c.overlap_witness(&satellite)?.is_some() {
            satellite_clear = false;
            break;
        }
    }
    let accepted = hole_inside_frame && hole_clear_of_notch && satellite_clear;
    let reason = if accepted {
        None
    } else {
        let mut why = Vec::new();
        if !hole_inside_frame {
            why.push("inner parallelotope leaves the outer parallelotope");
        }
        if !hole_clear_of_notch {
            why.push("inner parallelotope meets the notch");
        }
        if !satellite_clear {
            why.push("satellite overlaps the notched body");
        }
        Some(why.join(", "))
    };
    let attempt = QAttempt {
        q,
        k: k.clone(),
        t: t.clone(),
        hole_inside_frame,
        hole_clear_of_notch,
        satellite_clear,
        accepted,
        reason,
    };
    if !accepted {
        return Ok((attempt, None));
    }
    let mut carved = body.subtract_convex(&hole);
    carved.cells.push(satellite);
    Ok((attempt, Some(carved)))
}

/// Wavelet set for dilation by `d >= 2`: the notched parallelotope
/// `τ_t N[w(1/d²), 1/d²]` with `(1/d) τ_t P` moved out by `k·1`,
/// `t = d(k−d)/(d²−1)`.
pub fn build_positive_scalar(n: usize, d: &Rat, k: i64) -> Result<(Region, ConstructionTrace)> {
    check_construction_dim(n)?;
    if *d < int(2) {
        return Err(WavekitError::Parameter(format!("scalar construction needs d >= 2, got {d}")));
    }
    if k < 1 || int(k) >= *d {
        return Err(WavekitError::Parameter(format!("k must satisfy 1 <= k < d, got k = {k}")));
    }
    let dilation = DilationSpec::positive_scalar(n, d)?;
    let k_vec = RatVec::filled(n, &int(k));
    let (attempt, region) = satellite_attempt(&dilation, 2, &k_vec)?;
    let Some(mut region) = region else {
        return Err(WavekitError::Certificate(format!(
            "hole containment failed for d = {d}, k = {k}: {}",
            attempt.reason.clone().unwrap_or_default()
        )));
    };
    let alpha = (d * d).recip();
    let mut params = ConstructionParams::new(n, ConstructionKind::Scalar);
    params.d = Some(d.clone());
    params.k_scalar = Some(k);
    let trace = ConstructionTrace {
        q: 2,
        w: w_vector(n, &alpha)?,
        alpha,
        t: attempt.t.clone(),
        k: Some(k_vec),
        cell_count: region.cells.len(),
        satellite_cell: Some(region.cells.len() - 1),
        attempts: vec![attempt],
        hypothesis: None,
    };
    region.metadata = RegionMetadata {
        construction: Some(params),
        dilation: Some(dilation),
        trace: Some(trace.clone()),
    };
    Ok((region, trace))
}

/// Wavelet set for dilation by a matrix `A` with `A^p = d·I`, `d > 1`.
///
/// For each candidate `q`, `k` is the nearest integer vector to
/// `A*⁻¹(d^q/2 · 1)` and the attempt is accepted on direct containment and
/// disjointness certificates. The singular-value hypothesis is only
/// recorded, never relied on.
pub fn build_matrix(a: &RatMatrix, choice: QChoice) -> Result<(Region, ConstructionTrace)> {
    let n = a.dim();
    check_construction_dim(n)?;
    let dilation = DilationSpec::from_matrix(a, DEFAULT_P_MAX)?;
    let sv = singular_values(a);
    let threshold = (n as f64).sqrt();
    let hypothesis = HypothesisReport {
        satisfied: sv.min_exceeds(threshold),
        singular_values: sv,
        threshold,
    };
    let candidates: Vec<u32> = match choice {
        QChoice::Fixed(q) if q >= 1 => vec![q],
        QChoice::Fixed(_) => return Err(WavekitError::Parameter("q must be at least 1".into())),
        QChoice::Search { q_max } => (1..=q_max).collect(),
    };
    let astar_inv = dilation.transpose.inverse()?;
    let mut attempts = Vec::new();
    for q in candidates.iter().copied() {
        let delta = num_traits::pow(dilation.scalar.clone(), q as usize);
        let target = astar_inv.mul_vec(&RatVec::filled(n, &(&delta * rat(1, 2))));
        let k = nearest_integer_vector(&target);
        let (attempt, region) = satellite_attempt(&dilation, q, &k)?;
        attempts.push(attempt);
        if let Some(mut region) = region {
            let alpha = delta.recip();
            let mut params = ConstructionParams::new(n, ConstructionKind::Matrix);
            params.d = Some(dilation.scalar.clone());
            params.matrix = Some(a.clone());
            params.q = match choice {
                QChoice::Fixed(q) => Some(q),
                QChoice::Search { .. } => None,
            };
            let trace = ConstructionTrace {
                q,
                w: w_vector(n, &alpha)?,
                alpha,
                t: attempts.last().unwrap().t.clone(),
                k: Some(k),
                cell_count: region.cells.len(),
                satellite_cell: Some(region.cells.len() - 1),
                attempts,
                hypothesis: Some(hypothesis),
            };
            region.metadata = RegionMetadata {
                construction: Some(params),
                dilation: Some(dilation),
                trace: Some(trace.clone()),
            };
            return Ok((region, trace));
        }
    }
    Err(WavekitError::NoConstruction {
        q_max: *candidates.last().unwrap_or(&0),
        attempts: attempts
            .iter()
            .map(|a| format!("q={}: {}", a.q, a.reason.clone().unwrap_or_default()))
            .collect(),
    })
}

/// Image `S(W)` under an integer matrix of determinant ±1. Only scalar
/// dilations commute with every such `S`, so matrix-kind regions are
/// rejected.
pub fn apply_unimodular(region: &Region, s: &RatMatrix) -> Result<Region> {
    if s.dim() != region.dim {
        return Err(WavekitError::Dimension("unimodular matrix has the wrong size".into()));
    }
    if !s.is_integral() || s.det().abs() != Rat::one() {
        return Err(WavekitError::Parameter(
            "S must be an integer matrix with determinant ±1".into(),
        ));
    }
    if let Some(d) = &region.metadata.dilation {
        if d.kind == DilationKind::Matrix {
            return Err(WavekitError::Unsupported(
                "unimodular images are only defined here for scalar dilations".into(),
            ));
        }
    }
    let mut image = region.affine_image(s, &RatVec::zeros(region.dim))?;
    if let Some(params) = image.metadata.construction.as_mut() {
        params.unimodular = Some(match &params.unimodular {
            Some(prev) => s.mul(prev),
            None => s.clone(),
        });
    }
    Ok(image)
}

/// `S` with 1 on the diagonal and −1 on the subdiagonal; it sends the
/// diagonal line onto the first coordinate axis.
pub fn subdiagonal_unimodular(n: usize) -> RatMatrix {
    let mut s = RatMatrix::identity(n);
    for i in 1..n {
        s.set(i, i - 1, int(-1));
    }
    s
}

/// `τ_t N[w(α), α]` on its own (no satellite surgery), with frame.
pub fn translated_notched_parallelotope(n: usize, alpha: &Rat, t: &RatVec) -> Result<Region> {
    Ok(notched_parallelotope_region(n, alpha)?.translate(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::region_volume;

    #[test]
    fn stein_lattice_basis() {
        let l = stein_lattice(2, &rat(1, 2)).unwrap();
        assert_eq!(l.basis.col(0), RatVec(vec![int(1), rat(-1, 2)]));
        assert_eq!(l.basis.col(1), RatVec(vec![rat(-1, 2), int(1)]));
        for n in 2..=5 {
            let alpha = rat(2, 5);
            let l = stein_lattice(n, &alpha).unwrap();
            assert_eq!(l.basis.det(), Rat::one() - num_traits::pow(alpha.clone(), n));
            let to_integer = l.basis.inverse().unwrap();
            assert_eq!(to_integer.mul(&l.basis), RatMatrix::identity(n));
        }
        assert!(stein_lattice(2, &int(1)).is_err());
        assert!(stein_lattice(2, &int(0)).is_err());
    }

    #[test]
    fn w_vectors() {
        assert_eq!(
            w_vector(3, &rat(1, 9)).unwrap(),
            RatVec(vec![rat(729, 728), rat(81, 728), rat(9, 728)])
        );
        assert_eq!(
            w_vector(3, &rat(1, 16)).unwrap(),
            RatVec(vec![rat(4096, 4095), rat(256, 4095), rat(16, 4095)])
        );
        for n in 2..=5 {
            for alpha in [rat(1, 2), rat(1, 3), rat(2, 3)] {
                let w = w_vector(n, &alpha).unwrap();
                assert_eq!(w.sum(), (Rat::one() - &alpha).recip());
            }
        }
    }

    #[test]
    fn notched_cube_volumes() {
        let r = notched_cube_region(2, &rat(1, 2)).unwrap();
        assert_eq!((r.cells.len(), r.volume()), (2, rat(3, 4)));
        let r = notched_cube_region(3, &rat(1, 2)).unwrap();
        assert_eq!((r.cells.len(), r.volume()), (3, rat(7, 8)));
    }

    #[test]
    fn notched_parallelotope_has_unit_volume() {
        for n in 2..=4 {
            for alpha in [rat(1, 2), rat(1, 4), rat(2, 3)] {
                let r = notched_parallelotope_region(n, &alpha).unwrap();
                assert_eq!(r.cells.len(), n);
                assert_eq!(region_volume(&r), int(1));
                let frame = r.frame.as_ref().unwrap();
                assert_eq!(frame.generators, stein_lattice(n, &alpha).unwrap().basis.inverse().unwrap());
                assert_eq!(frame.volume(), (Rat::one() - num_traits::pow(alpha.clone(), n)).recip());
            }
        }
    }

    #[test]
    fn notch_sits_at_far_vertex() {
        let alpha = rat(1, 3);
        let r = notched_parallelotope_region(2, &alpha).unwrap();
        let frame = r.frame.clone().unwrap();
        let notch = notch_of(&frame, &alpha).unwrap();
        // the notch is the frame scaled by α about the far vertex
        let far = frame.far_vertex();
        let expected = frame
            .translate(&far.neg())
            .scaled(&alpha)
            .unwrap()
            .translate(&far);
        assert_eq!(notch.vertices(), expected.vertices());
        assert_eq!(r.volume() + notch.volume(), frame.volume());
    }

    #[test]
    fn negative_scalar_landmarks() {
        let (r, trace) = build_negative_scalar(3, &int(2)).unwrap();
        assert_eq!(r.cells.len(), 3);
        assert_eq!(trace.t, RatVec::filled(3, &rat(-4, 3)));
        let frame = r.frame.clone().unwrap();
        assert_eq!(frame.base, RatVec::filled(3, &rat(-4, 3)));
        let notch = notch_of(&frame, &trace.alpha).unwrap();
        assert_eq!(notch.base, RatVec::filled(3, &rat(-1, 3)));
        assert_eq!(notch.far_vertex(), RatVec::filled(3, &rat(2, 3)));
        assert_eq!(r.volume(), int(1));
        // diagonal vertices of W itself
        let on_diag: Vec<&RatVec> = r
            .cells
            .iter()
            .flat_map(|c| c.vertices())
            .filter(|v| v.iter().all(|x| x == &v[0]))
            .collect();
        assert!(on_diag.contains(&&RatVec::filled(3, &rat(-4, 3))));
        assert!(on_diag.contains(&&RatVec::filled(3, &rat(-1, 3))));
    }

    #[test]
    fn negative_scalar_identities() {
        for d in [int(2), int(3), rat(3, 2), rat(7, 3)] {
            let t = -(&d * &d) / (&d * &d - Rat::one());
            assert_eq!(&t + &d / (&d - Rat::one()), -&t / &d);
            assert_eq!(&t + Rat::one(), -&t / &d - (&d - Rat::one()).recip());
        }
    }

    #[test]
    fn positive_scalar_parameters() {
        let (r, trace) = build_positive_scalar(2, &int(2), 1).unwrap();
        assert_eq!(trace.t, RatVec::filled(2, &rat(-2, 3)));
        assert_eq!(r.volume(), int(1));
        let (r3, _) = build_positive_scalar(3, &int(2), 1).unwrap();
        assert_eq!(r3.cells.len(), 8);
        let (r_d3, trace3) = build_positive_scalar(2, &int(3), 1).unwrap();
        assert_eq!(trace3.t, RatVec::filled(2, &rat(-3, 4)));
        // hole strictly interior: 4 pieces + 1 slab + satellite
        assert_eq!(r_d3.cells.len(), 6);
        assert!(build_positive_scalar(2, &rat(3, 2), 1).is_err());
        assert!(build_positive_scalar(2, &int(2), 2).is_err());
        assert!(build_positive_scalar(2, &int(3), 0).is_err());
    }

    #[test]
    fn hole_and_satellite_are_translates() {
        let (r, trace) = build_positive_scalar(3, &int(3), 2).unwrap();
        let frame = r.frame.clone().unwrap();
        let hole = frame.scaled(&rat(1, 3)).unwrap();
        let satellite = &r.cells[trace.satellite_cell.unwrap()];
        let shifted: Vec<RatVec> = hole.vertices().iter().map(|v| v.add(trace.k.as_ref().unwrap())).collect();
        assert_eq!(satellite.vertices(), shifted.as_slice());
    }

    #[test]
    fn origin_is_removed() {
        for (n, d, k) in [(2, 2, 1), (3, 3, 1), (3, 3, 2)] {
            let (r, _) = build_positive_scalar(n, &int(d), k).unwrap();
            let zero = RatVec::zeros(n);
            assert!(r.cells.iter().all(|c| !c.contains_in_interior(&zero)));
            let frame = r.frame.unwrap();
            assert!(frame.scaled(&rat(1, d)).unwrap().to_cell().unwrap().contains_in_interior(&zero));
        }
    }

    #[test]
    fn unimodular_checks() {
        let (r, _) = build_positive_scalar(2, &int(2), 1).unwrap();
        assert_eq!(apply_unimodular(&r, &RatMatrix::identity(2)).unwrap().cells, r.cells);
        let bad = RatMatrix::from_int_rows(&[&[2, 0], &[0, 1]]).unwrap();
        assert!(apply_unimodular(&r, &bad).is_err());
        let a = RatMatrix::from_int_rows(&[&[3, 0, 0], &[0, 3, 0], &[1, 0, -3]]).unwrap().transpose();
        let (rm, _) = build_matrix(&a, QChoice::default()).unwrap();
        assert!(matches!(
            apply_unimodular(&rm, &subdiagonal_unimodular(3)),
            Err(WavekitError::Unsupported(_))
        ));
    }

    #[test]
    fn matrix_traces() {
        let a1 = RatMatrix::from_int_rows(&[&[3, 0, 1], &[0, 3, 0], &[0, 0, -3]]).unwrap();
        let (r, trace) = build_matrix(&a1, QChoice::default()).unwrap();
        assert_eq!(trace.q, 1);
        assert_eq!(trace.k, Some(RatVec::from_ints(&[1, 1, -1])));
        assert_eq!(trace.t, RatVec(vec![rat(-3, 4), rat(-3, 4), rat(-5, 8)]));
        assert_eq!(r.volume(), int(1));

        let b = RatMatrix::from_int_rows(&[&[2, 0, 0], &[0, -2, 0], &[1, 0, -2]]).unwrap();
        assert!(matches!(
            build_matrix(&b, QChoice::Fixed(1)),
            Err(WavekitError::NoConstruction { .. })
        ));
        let (rb, t2) = build_matrix(&b, QChoice::default()).unwrap();
        let first = &t2.attempts[0];
        assert_eq!((first.q, first.accepted, first.hole_inside_frame), (1, false, false));
        assert_eq!(first.k, RatVec::from_ints(&[1, -1, -1]));
        assert_eq!(first.t, RatVec(vec![int(-1), rat(-2, 3), rat(-2, 3)]));
        assert_eq!(t2.q, 2);
        assert_eq!(t2.hypothesis.as_ref().unwrap().satisfied, crate::ratgeom::Decision::No);
        assert_eq!(t2.k, Some(RatVec::from_ints(&[6, -4, -4])));
        assert_eq!(t2.t, RatVec::filled(3, &rat(-8, 15)));
        assert_eq!(rb.volume(), int(1));
    }
}
