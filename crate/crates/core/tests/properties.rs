mod common;

use common::*;
use proptest::prelude::*;
use te_audit::stattest::{log_binom_cdf, sign_test};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn nb_agrees_with_rational_oracle(toy in toy_corpus()) {
        check_nb_matches_oracle(&toy)?;
    }

    #[test]
    fn nb_distributions_are_normalized(toy in toy_corpus()) {
        check_nb_normalization(&toy)?;
    }

    #[test]
    fn nb_scores_shift_by_token_likelihood(toy in toy_corpus()) {
        check_nb_monotone_and_order_free(&toy)?;
    }

    #[test]
    fn masking_is_idempotent(premises in prop::collection::vec(premise_text(), 0..10)) {
        check_mask_idempotent(&premises, "<unk>")?;
    }

    #[test]
    fn manifest_round_trips(labels in prop::collection::vec((0usize..3, 0usize..3), 0..40)) {
        check_manifest_round_trip(&labels)?;
    }

    #[test]
    fn report_round_trips(
        toy in toy_corpus(),
        test_rows in prop::collection::vec(
            (0usize..3, prop::collection::vec(prop::sample::select(&TOY_ALPHABET[..]), 1..6)),
            1..12,
        ),
        noise in -1e300f64..1e300,
    ) {
        check_report_round_trip(&toy, &test_rows, noise)?;
    }

    #[test]
    fn sign_test_symmetric(pairs in prop::collection::vec(any::<(bool, bool)>(), 0..200)) {
        let (a, b): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
        let ab = sign_test(&a, &b).unwrap();
        let ba = sign_test(&b, &a).unwrap();
        prop_assert_eq!((ab.n_plus, ab.n_minus, ab.n_tie), (ba.n_minus, ba.n_plus, ba.n_tie));
        prop_assert_eq!(ab.n_plus + ab.n_minus + ab.n_tie, a.len());
        prop_assert_eq!(ab.p_two_sided, ba.p_two_sided);
        prop_assert!((0.0..=1.0).contains(&ab.p_two_sided));
        prop_assert!(ab.log10_p <= 0.0 && ab.log10_p.is_finite());
        if ab.p_two_sided > 1e-300 {
            prop_assert!((ab.p_two_sided.log10() - ab.log10_p).abs() < 1e-9);
        }
    }

    #[test]
    fn log_cdf_non_decreasing(n in 0usize..3000) {
        let mut prev = f64::NEG_INFINITY;
        for k in (0..=n).step_by((n / 50).max(1)).chain([n]) {
            let v = log_binom_cdf(k, n).unwrap();
            prop_assert!(v >= prev && v <= 0.0);
            prev = v;
        }
    }
}

#[test]
fn sign_test_matches_rational_oracle_up_to_30() {
    let worst = sign_test_max_deviation(30);
    assert!(worst <= 1e-12, "max deviation {worst:e}");
}

#[test]
fn log_cdf_matches_rational_oracle_up_to_30() {
    let worst = log_cdf_max_deviation(30);
    assert!(worst <= 1e-12, "max deviation {worst:e}");
}

#[test]
fn sign_test_eight_two_against_oracle() {
    use num_traits::ToPrimitive;
    let exact = rational_sign_p(8, 2);
    assert_eq!(exact, num_rational::BigRational::new(112.into(), 1024.into()));
    let got = te_audit::stattest::from_counts(8, 2, 0).p_two_sided;
    assert!((got - exact.to_f64().unwrap()).abs() < 1e-13);
}
