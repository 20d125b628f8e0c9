use proptest::prelude::*;

use functor_metric::entropy_dim::min_cover;
use functor_metric::functor_engine::{distance_matrix, dp_distance, BuiltinFunctor, Element, FunctorSpace};
use functor_metric::group_norms::{boolean_matching_norm, d1_group, graev_distance, norm_restricted, FinSupportFunction};
use functor_metric::hyperspace::{d1_hyperspace, d1_upper_mst};
use functor_metric::metric_core::{default_labels, hausdorff, DistanceSpace, PNorm};
use functor_metric::tight_span::{is_extremal, kuratowski, project_extremal, sup_distance};

const PS: [PNorm; 3] = [PNorm::ONE, PNorm::TWO, PNorm::Infinity];

fn le(a: f64, b: f64) -> bool {
    a <= b || a - b <= 1e-9 * (1.0 + b.abs())
}

/// Grid points in `[0,10]²`, optionally split into two `∞`-separated parts.
fn space(max: usize) -> impl Strategy<Value = DistanceSpace> {
    prop::collection::vec((0u8..=40, 0u8..=40, any::<bool>()), 1..=max).prop_flat_map(|pts| {
        (Just(pts), any::<bool>()).prop_map(|(pts, split)| {
            let n = pts.len();
            DistanceSpace::from_fn(default_labels(n), |i, j| {
                let (a, b) = (pts[i], pts[j]);
                if split && a.2 != b.2 {
                    f64::INFINITY
                } else {
                    ((a.0 as f64 - b.0 as f64).powi(2) + (a.1 as f64 - b.1 as f64).powi(2)).sqrt() / 4.0
                }
            })
            .unwrap()
        })
    })
}

fn subset(n: usize, mask: u16) -> Vec<usize> {
    let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
    if s.is_empty() {
        vec![0]
    } else {
        s
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hausdorff_is_a_distance_on_subsets(x in space(6), m in any::<[u16; 3]>()) {
        let n = x.len();
        let (a, b, c) = (subset(n, m[0]), subset(n, m[1]), subset(n, m[2]));
        prop_assert_eq!(hausdorff(&x, &a, &a).get(), 0.0);
        prop_assert_eq!(hausdorff(&x, &a, &b), hausdorff(&x, &b, &a));
        let (ab, bc, ac) = (hausdorff(&x, &a, &b).get(), hausdorff(&x, &b, &c).get(), hausdorff(&x, &a, &c).get());
        prop_assert!(le(ac, ab + bc));
    }

    #[test]
    fn functor_distance_is_antitone_in_p(x in space(3), fi in 0usize..4) {
        let f = [BuiltinFunctor::Power(2), BuiltinFunctor::CappedHyperspace(2), BuiltinFunctor::NonemptyPairs, BuiltinFunctor::SymDiffPairs][fi];
        let mats: Vec<Vec<Vec<f64>>> = PS.iter().map(|&p| distance_matrix(&f, &x, p).unwrap().1).collect();
        let k = mats[0].len();
        for (i, j) in (0..k).flat_map(|i| (0..k).map(move |j| (i, j))) {
            prop_assert!(le(mats[1][i][j], mats[0][i][j]));
            prop_assert!(le(mats[2][i][j], mats[1][i][j]));
            prop_assert_eq!(mats[0][i][j], mats[0][j][i]);
        }
    }

    #[test]
    fn singletons_embed_isometrically(x in space(4), i in 0usize..4, j in 0usize..4, pi in 0usize..3) {
        let (i, j) = (i % x.len(), j % x.len());
        let f = BuiltinFunctor::CappedHyperspace(2);
        let d = dp_distance(&f, &x, PS[pi], &Element::set([i]), &Element::set([j])).unwrap().0;
        prop_assert!(le(d.get(), x.d(i, j)) && le(x.d(i, j), d.get()));
    }

    #[test]
    fn chains_certify_distances(x in space(3), pi in 0usize..3) {
        let f = BuiltinFunctor::NonemptyPairs;
        let fs = FunctorSpace::new(&f, &x, PS[pi]).unwrap();
        let elems = fs.elements().to_vec();
        for a in &elems {
            for b in &elems {
                let (d, chain) = fs.distance(a, b).unwrap();
                match chain {
                    Some(c) => prop_assert!((c.validate(&f, &x, PS[pi], a, b).unwrap() - d.get()).abs() <= 1e-9),
                    None => prop_assert!(d.is_infinite()),
                }
            }
        }
    }

    #[test]
    fn group_d1_is_translation_invariant(x in space(4), m in 2u32..=4, seed in any::<[i64; 8]>()) {
        let n = x.len();
        let a = FinSupportFunction::new(m, seed[..n].to_vec()).unwrap();
        let b = FinSupportFunction::new(m, seed[4..4 + n].to_vec()).unwrap();
        let c = FinSupportFunction::delta(m, n, 0, 1);
        let d = d1_group(&x, &a, &b).unwrap().0;
        let shifted = d1_group(&x, &a.add(&c).unwrap(), &b.add(&c).unwrap()).unwrap().0;
        prop_assert_eq!(d, shifted);
        prop_assert!(le(d.get(), graev_distance(&x, &a, &b, 1).unwrap().get()));
    }

    #[test]
    fn boolean_matching_equals_d1(x in space(6), mask in any::<u8>()) {
        let n = x.len();
        let mut v: Vec<i64> = (0..n).map(|i| (mask >> i & 1) as i64).collect();
        if v.iter().sum::<i64>() % 2 == 1 {
            v[0] ^= 1;
        }
        let phi = FinSupportFunction::new(2, v).unwrap();
        let b = boolean_matching_norm(&x, &phi).unwrap().0;
        let d = d1_group(&x, &phi, &FinSupportFunction::zero(2, n)).unwrap().0;
        let r = norm_restricted(&x, &phi).unwrap();
        prop_assert!(b.approx_eq(d, 1e-9) && d.approx_eq(r, 1e-9));
    }

    #[test]
    fn hyperspace_d1_is_sandwiched(x in space(6), m in any::<[u16; 2]>()) {
        let (a, b) = (subset(x.len(), m[0]), subset(x.len(), m[1]));
        let d1 = d1_hyperspace(&x, &a, &b).unwrap().0.get();
        prop_assert!(le(hausdorff(&x, &a, &b).get(), d1));
        prop_assert!(le(d1, d1_upper_mst(&x, &a, &b).unwrap().get()));
    }

    #[test]
    fn kuratowski_images_are_extremal(x in space(6)) {
        let ks: Vec<Vec<f64>> = (0..x.len()).map(|i| kuratowski(&x, i).unwrap()).collect();
        for (i, k) in ks.iter().enumerate() {
            prop_assert!(is_extremal(&x, k, 1e-9).unwrap());
            let pr = project_extremal(&x, k, 1e-12, 200).unwrap();
            prop_assert!(sup_distance(&pr.values, k) <= 1e-12);
            for (j, l) in ks.iter().enumerate() {
                // Rounding in d(i,k) - d(j,k) can overshoot d(i,j) by an ulp on collinear points.
                let (s, d) = (sup_distance(k, l), x.d(i, j));
                prop_assert!(s >= d && le(s, d), "sup {} vs d {}", s, d);
            }
        }
    }

    #[test]
    fn cover_number_is_antitone(x in space(8), e in 0.1f64..5.0) {
        let (small, cert) = min_cover(&x, e).unwrap();
        let (large, _) = min_cover(&x, 2.0 * e).unwrap();
        prop_assert!(cert.validate(&x));
        prop_assert!(large <= small && small <= x.len());
    }
}
