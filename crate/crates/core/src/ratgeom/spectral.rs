//! Float diagnostics (singular values, expansiveness) with exact guards.
//!
//! Singular values come from a floating-point eigensolve of `A·Aᵀ`. The
//! reported radius is certified by exact inertia counts: for every cluster
//! of estimates, the number of eigenvalues of `A·Aᵀ` inside the squared
//! interval is counted with an exact rational LDLᵀ factorisation of
//! `A·Aᵀ − x·I` (Sylvester's law of inertia).

use nalgebra::DMatrix;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::{scalar_power_probe, RatMatrix, DEFAULT_P_MAX};
use super::rat::{from_f64, int, Rat};

/// Three-valued answer for float-backed predicates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Yes,
    No,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularValues {
    /// Descending.
    pub values: Vec<f64>,
    /// Every true singular value lies within `radius` of its estimate.
    pub radius: f64,
    pub certified: bool,
}

impl SingularValues {
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Is the smallest singular value strictly above `threshold`?
    pub fn min_exceeds(&self, threshold: f64) -> Decision {
        if !self.certified {
            return Decision::Indeterminate;
        }
        let lo = self.min() - self.radius;
        let hi = self.min() + self.radius;
        if lo > threshold {
            Decision::Yes
        } else if hi < threshold {
            Decision::No
        } else {
            Decision::Indeterminate
        }
    }
}

pub fn gram(a: &RatMatrix) -> RatMatrix {
    a.mul(&a.transpose())
}

/// Number of eigenvalues of the symmetric matrix `m` strictly below `x`,
/// or `None` when a zero pivot shows up (then `x` may be an eigenvalue).
pub fn count_eigenvalues_below(m: &RatMatrix, x: &Rat) -> Option<usize> {
    let n = m.dim();
    let mut a = m.sub(&RatMatrix::scalar(n, x)).rows();
    let mut negatives = 0;
    for k in 0..n {
        let pivot = a[k][k].clone();
        if pivot.is_zero() {
            return None;
        }
        if pivot.is_negative() {
            negatives += 1;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &pivot;
            for j in k..n {
                let delta = &f * &a[k][j];
                a[i][j] -= delta;
            }
        }
    }
    Some(negatives)
}

fn float_matrix(m: &RatMatrix) -> DMatrix<f64> {
    let rows = m.to_f64_rows();
    let n = m.dim();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// Singular values of `a` with a certified error radius.
pub fn singular_values(a: &RatMatrix) -> SingularValues {
    let g = gram(a);
    let eig = nalgebra::SymmetricEigen::new(float_matrix(&g));
    let mut est: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    est.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let scale = est.last().copied().unwrap_or(1.0).max(1.0);

    let mut radius = 1e-12 * scale;
    while radius <= 1e-2 * scale {
        if let Some(r) = certify(&g, &est, radius) {
            let mut values = est.clone();
            values.reverse();
            return SingularValues {
                values,
                radius: r,
                certified: true,
            };
        }
        radius *= 10.0;
    }
    est.reverse();
    SingularValues {
        values: est,
        radius: f64::INFINITY,
        certified: false,
    }
}

/// Returns the certified radius when every cluster of `[s - r, s + r]`
/// intervals holds exactly as many eigenvalues as estimates.
fn certify(g: &RatMatrix, est: &[f64], r: f64) -> Option<f64> {
    // clusters of overlapping intervals, estimates ascending
    let mut clusters: Vec<(f64, f64, Vec<f64>)> = Vec::new();
    for &s in est {
        let lo = (s - r).max(0.0);
        let hi = s + r;
        match clusters.last_mut() {
            Some(last) if lo <= last.1 => {
                last.1 = hi;
                last.2.push(s);
            }
            _ => clusters.push((lo, hi, vec![s])),
        }
    }
    let mut radius: f64 = 0.0;
    for (lo, hi, members) in &clusters {
        let lo_sq = if *lo <= 0.0 {
            int(-1)
        } else {
            let l = from_f64(*lo)?;
            &l * &l
        };
        let h = from_f64(*hi)?;
        let hi_sq = &h * &h;
        let below_hi = count_eigenvalues_below(g, &hi_sq)?;
        let below_lo = count_eigenvalues_below(g, &lo_sq)?;
        if below_hi - below_lo != members.len() {
            return None;
        }
        for &s in members {
            radius = radius.max(s - lo).max(hi - s);
        }
    }
    Some(radius)
}

/// Smallest singular value strictly greater than `threshold`?
pub fn min_singular_exceeds(a: &RatMatrix, threshold: f64) -> Decision {
    singular_values(a).min_exceeds(threshold)
}

/// All eigenvalues strictly outside the unit circle?
///
/// Matrices with a power equal to `d·I` are decided exactly from `d`;
/// anything else goes through a float eigensolve with a relative guard.
pub fn expansive_check(a: &RatMatrix) -> Decision {
    if let Some((_, d)) = scalar_power_probe(a, DEFAULT_P_MAX) {
        return if d > int(1) { Decision::Yes } else { Decision::No };
    }
    let m = float_matrix(a);
    let guard = 1e-8 * m.norm().max(1.0);
    let moduli: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    if moduli.iter().all(|&x| x > 1.0 + guard) {
        Decision::Yes
    } else if moduli.iter().any(|&x| x < 1.0 - guard) {
        Decision::No
    } else {
        Decision::Indeterminate
    }
}

#[cfg(test)]
mod tests {
    use super::super::rat::rat;
    use super::*;

    fn mat1() -> RatMatrix {
        RatMatrix::from_int_rows(&[&[3, 0, 0], &[0, 3, 0], &[1, 0, -3]])
            .unwrap()
            .transpose()
    }

    fn mat_b() -> RatMatrix {
        RatMatrix::from_int_rows(&[&[2, 0, 1], &[0, -2, 0], &[0, 0, -2]])
            .unwrap()
            .transpose()
    }

    fn assert_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= tol, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn mat1_singular_values() {
        let sv = singular_values(&mat1());
        assert!(sv.certified);
        assert!(sv.radius < 1e-6);
        assert_close(&sv.values, &[3.54, 3.0, 2.54], 0.01);
        assert_eq!(sv.min_exceeds(3f64.sqrt()), Decision::Yes);
    }

    #[test]
    fn mat_b_singular_values() {
        let sv = singular_values(&mat_b());
        assert!(sv.certified);
        assert_close(&sv.values, &[2.56, 2.0, 1.56], 0.01);
        assert_eq!(min_singular_exceeds(&mat_b(), 3f64.sqrt()), Decision::No);
    }

    #[test]
    fn identity_singular_values() {
        let sv = singular_values(&RatMatrix::identity(4));
        assert!(sv.certified);
        assert_close(&sv.values, &[1.0; 4], 1e-9);
        // the threshold sits exactly on the value: the guard cannot decide
        assert_eq!(sv.min_exceeds(1.0), Decision::Indeterminate);
    }

    #[test]
    fn inertia_counts() {
        let m = RatMatrix::from_int_rows(&[&[2, 0], &[0, 5]]).unwrap();
        assert_eq!(count_eigenvalues_below(&m, &int(1)), Some(0));
        assert_eq!(count_eigenvalues_below(&m, &int(3)), Some(1));
        assert_eq!(count_eigenvalues_below(&m, &int(6)), Some(2));
        assert_eq!(count_eigenvalues_below(&m, &int(2)), None);
    }

    #[test]
    fn expansiveness() {
        assert_eq!(expansive_check(&RatMatrix::scalar(2, &int(2))), Decision::Yes);
        assert_eq!(expansive_check(&mat_b()), Decision::Yes);
        assert_eq!(expansive_check(&RatMatrix::identity(3)), Decision::No);
        assert_eq!(expansive_check(&RatMatrix::scalar(2, &rat(3, 2))), Decision::Yes);
        let shear = RatMatrix::from_int_rows(&[&[2, 1], &[0, 3]]).unwrap();
        assert_eq!(expansive_check(&shear), Decision::Yes);
        let contracting = RatMatrix::from_rows(vec![vec![rat(1, 2), int(1)], vec![int(0), int(3)]]).unwrap();
        assert_eq!(expansive_check(&contracting), Decision::No);
    }
}
