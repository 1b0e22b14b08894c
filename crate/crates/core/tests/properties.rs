use deepmix_core::ensembles::{delta_haar, eref_moment, eref_second_moment};
use deepmix_core::projected::pe_delta;
use deepmix_core::tensor::Spectrum;
use deepmix_core::Limits;
use proptest::prelude::*;

fn spectrum() -> impl Strategy<Value = Spectrum> {
    prop::collection::vec(0.01f64..1.0, 1..6).prop_map(|w| {
        let total: f64 = w.iter().sum();
        Spectrum::new(w.iter().map(|x| x / total).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reference_moments_are_valid(s in spectrum(), d in 2usize..4, k in 1usize..4) {
        let m = eref_moment(&s, d, k, &Limits::default()).unwrap();
        prop_assert!(m.validate().is_ok());
    }

    #[test]
    fn second_moment_matches_closed_form(s in spectrum(), d in 2usize..5) {
        let lim = Limits::default();
        let group = eref_moment(&s, d, 2, &lim).unwrap();
        let closed = eref_second_moment(s.purity(), d).unwrap();
        prop_assert!(group.matrix().max_abs_diff(closed.matrix()).unwrap() < 1e-13);
    }

    #[test]
    fn distances_are_symmetric_and_bounded(s in spectrum(), t in spectrum(), k in 1usize..4) {
        let lim = Limits::default();
        let m1 = eref_moment(&s, 2, k, &lim).unwrap();
        let m2 = eref_moment(&t, 2, k, &lim).unwrap();
        let d12 = pe_delta(&m1, &m2).unwrap();
        prop_assert!((d12 - pe_delta(&m2, &m1).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&d12));
        let dh = delta_haar(&s, 2, k, &lim).unwrap();
        prop_assert!(dh >= -1e-12);
    }
}
