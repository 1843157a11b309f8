use proptest::prelude::*;

use wavekit::construct::{apply_unimodular, build_negative_scalar, build_positive_scalar};
use wavekit::polytope::{ConvexCell, Region};
use wavekit::ratgeom::{int, rat, Rat, RatMatrix, RatVec};
use wavekit::verify::{verify_translation_exact, verify_wavelet_set, VerifyMode, VerifyOptions};

type Box2 = ((i64, i64), (i64, i64));

/// Boxes in quarter units: a guillotine split of the unit square, each piece
/// moved by an integer vector, then possibly damaged.
fn quarter_boxes() -> impl Strategy<Value = Vec<Box2>> {
    (
        1i64..4,
        proptest::option::of(1i64..4),
        proptest::collection::vec((-1i64..=1, -1i64..=1), 3),
        0u8..4,
        1i64..4,
    )
        .prop_map(|(x_cut, y_cut, moves, damage, nudge)| {
            let mut boxes: Vec<Box2> = vec![((0, 0), (x_cut, 4))];
            match y_cut {
                Some(y) => {
                    boxes.push(((x_cut, 0), (4, y)));
                    boxes.push(((x_cut, y), (4, 4)));
                }
                None => boxes.push(((x_cut, 0), (4, 4))),
            }
            for (b, &(dx, dy)) in boxes.iter_mut().zip(&moves) {
                b.0 .0 += 4 * dx;
                b.1 .0 += 4 * dx;
                b.0 .1 += 4 * dy;
                b.1 .1 += 4 * dy;
            }
            match damage {
                1 => {
                    boxes.pop();
                }
                2 => {
                    boxes[0].0 .0 += nudge;
                    boxes[0].1 .0 += nudge;
                }
                3 => {
                    let extra = ((boxes[0].0 .0 + 8, boxes[0].0 .1), (boxes[0].1 .0 + 8, boxes[0].1 .1));
                    boxes.push(extra);
                }
                _ => {}
            }
            boxes
        })
}

fn to_region(boxes: &[Box2]) -> Region {
    let q = |v: i64| rat(v, 4);
    let cells = boxes
        .iter()
        .map(|&((x0, y0), (x1, y1))| {
            ConvexCell::from_box(&RatVec(vec![q(x0), q(y0)]), &RatVec(vec![q(x1), q(y1)])).unwrap()
        })
        .collect();
    Region::new(2, cells).unwrap()
}

/// Every quarter square of the torus must be covered exactly once; with all
/// coordinates on the quarter grid its center decides the whole square.
fn grid_oracle(boxes: &[Box2]) -> bool {
    for i in 0..4 {
        for j in 0..4 {
            let (cx, cy) = (2 * i + 1, 2 * j + 1); // eighths
            let mut count = 0;
            for &((x0, y0), (x1, y1)) in boxes {
                for zx in -4..=4 {
                    for zy in -4..=4 {
                        let (px, py) = (cx + 8 * zx, cy + 8 * zy);
                        if 2 * x0 < px && px < 2 * x1 && 2 * y0 < py && py < 2 * y1 {
                            count += 1;
                        }
                    }
                }
            }
            if count != 1 {
                return false;
            }
        }
    }
    true
}

fn unimodular() -> impl Strategy<Value = RatMatrix> {
    prop_oneof![
        Just(RatMatrix::from_int_rows(&[&[1, 1], &[0, 1]]).unwrap()),
        Just(RatMatrix::from_int_rows(&[&[1, 0], &[-1, 1]]).unwrap()),
        Just(RatMatrix::from_int_rows(&[&[0, 1], &[1, 0]]).unwrap()),
        Just(RatMatrix::from_int_rows(&[&[2, 1], &[1, 1]]).unwrap()),
        Just(RatMatrix::from_int_rows(&[&[-1, 0], &[0, 1]]).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn exact_translation_matches_grid_oracle(boxes in quarter_boxes()) {
        let region = to_region(&boxes);
        prop_assume!(region.validate().is_ok());
        let report = verify_translation_exact(&region).unwrap();
        prop_assert_eq!(report.passed(), grid_oracle(&boxes), "boxes {:?}", boxes);
        if !report.passed() {
            prop_assert!(!report.offenders.is_empty());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unimodular_images_keep_verdicts(which in 0usize..4, s in unimodular()) {
        let region = match which {
            0 => build_positive_scalar(2, &int(2), 1).unwrap().0,
            1 => build_positive_scalar(2, &int(3), 2).unwrap().0,
            2 => build_negative_scalar(2, &int(2)).unwrap().0,
            _ => build_negative_scalar(2, &rat(3, 2)).unwrap().0,
        };
        let dil = region.metadata.dilation.clone().unwrap();
        let options = VerifyOptions::with_mode(VerifyMode::Exact);
        let before = verify_wavelet_set(&region, &dil, &options).unwrap();
        let image = apply_unimodular(&region, &s).unwrap();
        let after = verify_wavelet_set(&image, &dil, &options).unwrap();
        prop_assert_eq!(before.is_wavelet_set, after.is_wavelet_set);
        prop_assert_eq!(image.volume(), Rat::from(int(1)));
    }
}
