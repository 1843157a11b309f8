use num_traits::{One, Signed};
use proptest::prelude::*;

use wavekit::ratgeom::{
    count_eigenvalues_below, cyclic_matrix, from_f64, gram, int, nearest_integer_vector, rat,
    scalar_power_probe, singular_values, Rat, RatMatrix, RatVec,
};

fn alpha() -> impl Strategy<Value = Rat> {
    (2i64..=60).prop_flat_map(|q| (1..q).prop_map(move |p| rat(p, q)))
}

fn int_matrix(n: usize, bound: i64) -> impl Strategy<Value = RatMatrix> {
    proptest::collection::vec(-bound..=bound, n * n).prop_map(move |e| {
        RatMatrix::from_rows(e.chunks(n).map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn stein_basis_determinant_and_inverse(n in 2usize..=6, a in alpha()) {
        let m = RatMatrix::identity(n).sub(&cyclic_matrix(n).unwrap().scale(&a));
        prop_assert_eq!(m.det(), Rat::one() - num_traits::pow(a.clone(), n));
        let inv = m.inverse().unwrap();
        prop_assert_eq!(inv.mul(&m), RatMatrix::identity(n));
        prop_assert_eq!(m.mul(&inv), RatMatrix::identity(n));
    }
}

proptest! {
    #[test]
    fn cyclic_matrix_has_order_n(n in 2usize..=6) {
        let c = cyclic_matrix(n).unwrap();
        prop_assert_eq!(c.pow(n as u32), RatMatrix::identity(n));
        for k in 1..n as u32 {
            prop_assert_ne!(c.pow(k), RatMatrix::identity(n));
        }
    }

    #[test]
    fn probe_reconstructs_scalar_power(a in (2usize..=3).prop_flat_map(|n| int_matrix(n, 2))) {
        if let Some((p, d)) = scalar_power_probe(&a, 12) {
            prop_assert!(d.is_positive());
            prop_assert_eq!(a.pow(p), RatMatrix::scalar(a.dim(), &d));
        }
    }

    #[test]
    fn probe_finds_conjugated_scalars(d in 2i64..=5, s in 0usize..4, flip in any::<bool>()) {
        // S diag(±d) S⁻¹ squares to d²·I
        let shears = [
            RatMatrix::from_int_rows(&[&[1, 0], &[0, 1]]).unwrap(),
            RatMatrix::from_int_rows(&[&[1, 1], &[0, 1]]).unwrap(),
            RatMatrix::from_int_rows(&[&[2, 1], &[1, 1]]).unwrap(),
            RatMatrix::from_int_rows(&[&[1, 0], &[3, 1]]).unwrap(),
        ];
        let sign = if flip { -1 } else { 1 };
        let diag = RatMatrix::from_int_rows(&[&[d, 0], &[0, sign * d]]).unwrap();
        let a = shears[s].mul(&diag).mul(&shears[s].inverse().unwrap());
        let (p, c) = scalar_power_probe(&a, 12).unwrap();
        prop_assert_eq!(a.pow(p), RatMatrix::scalar(2, &c));
        prop_assert_eq!(p, if flip { 2 } else { 1 });
    }

    #[test]
    fn nearest_integer_is_nearest(v in proptest::collection::vec((-50i64..=50, 1i64..=8), 1..6)) {
        let x = RatVec(v.iter().map(|&(p, q)| rat(p, q)).collect());
        let k = nearest_integer_vector(&x);
        prop_assert!(k.is_integral());
        for i in 0..x.dim() {
            let best = (&x[i] - &k[i]).abs();
            prop_assert!(best <= rat(1, 2));
            for other in [&k[i] - int(1), &k[i] + int(1)] {
                prop_assert!(best <= (&x[i] - &other).abs());
            }
        }
        prop_assert_eq!(nearest_integer_vector(&k), k);
    }

    #[test]
    fn singular_values_are_bracketed(a in (2usize..=4).prop_flat_map(|n| int_matrix(n, 4))) {
        let sv = singular_values(&a);
        prop_assume!(sv.certified);
        let g = gram(&a);
        for &s in &sv.values {
            let hi = from_f64(s + sv.radius).unwrap();
            let below_hi = count_eigenvalues_below(&g, &(&hi * &hi));
            let lo = s - sv.radius;
            let below_lo = if lo <= 0.0 {
                Some(0)
            } else {
                let l = from_f64(lo).unwrap();
                count_eigenvalues_below(&g, &(&l * &l))
            };
            if let (Some(h), Some(l)) = (below_hi, below_lo) {
                prop_assert!(h > l, "no eigenvalue of AAᵀ within the radius of {}²", s);
            }
        }
    }

    #[test]
    fn rational_text_round_trips(p in -10_000i64..=10_000, q in 1i64..=10_000) {
        let r = rat(p, q);
        let text = wavekit::ratgeom::format_rat(&r);
        prop_assert_eq!(wavekit::ratgeom::parse_rat(&text).unwrap(), r);
    }
}
