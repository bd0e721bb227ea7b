use proptest::prelude::*;
use syk_core::spectrum::spectra_coincide;
use syk_core::{
    diagonalize, n_total, sample, CouplingScheme, Diagonalization, Normalization, ParitySector, SpectrumOptions,
};

fn arb_scheme() -> impl Strategy<Value = CouplingScheme> {
    prop_oneof![
        Just(CouplingScheme::BinarySparse),
        Just(CouplingScheme::UnarySparse),
        Just(CouplingScheme::GaussianSparse),
        Just(CouplingScheme::GaussianDense),
    ]
}

/// `(N, K)` with `K` valid for the scheme.
fn arb_cell(scheme: CouplingScheme) -> impl Strategy<Value = (u32, u64)> {
    prop_oneof![Just(8u32), Just(10), Just(12), Just(14)].prop_flat_map(move |n| {
        let total = n_total(n).unwrap();
        let k = match scheme {
            CouplingScheme::GaussianDense => Just(total).boxed(),
            CouplingScheme::BinarySparse => (2..=total / 2).prop_map(|h| 2 * h).boxed(),
            _ => (1..=total).boxed(),
        };
        (Just(n), k)
    })
}

fn arb_realization() -> impl Strategy<Value = (CouplingScheme, u32, u64, u64)> {
    arb_scheme().prop_flat_map(|s| (Just(s), arb_cell(s), any::<u64>())).prop_map(|(s, (n, k), seed)| (s, n, k, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unit_second_moment_and_zero_trace((scheme, n, k, seed) in arb_realization()) {
        let cs = sample(scheme, n, k, seed, Normalization::PerRealization).unwrap();
        let r = diagonalize(&cs, &SpectrumOptions::default()).unwrap();
        prop_assert_eq!(r.dimension(), 1usize << (n / 2));
        prop_assert!((r.second_moment() - 1.0).abs() < 1e-9);
        prop_assert!(r.eigenvalues.iter().sum::<f64>().abs() < 1e-9 * r.dimension() as f64);
        prop_assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sector_split_matches_full_diagonalization((scheme, n, k, seed) in arb_realization()) {
        let cs = sample(scheme, n, k, seed, Normalization::PerRealization).unwrap();
        let split = diagonalize(&cs, &SpectrumOptions::default()).unwrap();
        let full = diagonalize(&cs, &SpectrumOptions { mode: Diagonalization::Full, ..Default::default() }).unwrap();
        prop_assert!(spectra_coincide(&split.eigenvalues, &full.eigenvalues, 1e-10));
        let (e, o) = split.sector_eigenvalues.unwrap();
        prop_assert_eq!(e.len(), ParitySector::Even.dimension(n / 2));
        prop_assert_eq!(o.len(), ParitySector::Odd.dimension(n / 2));
    }

    #[test]
    fn sectors_coincide_when_n_is_2_mod_4(n in prop_oneof![Just(10u32), Just(14)], seed in any::<u64>(), half in 2u64..40) {
        let cs = sample(CouplingScheme::BinarySparse, n, 2 * half, seed, Normalization::PerRealization).unwrap();
        let (e, o) = diagonalize(&cs, &SpectrumOptions::default()).unwrap().sector_eigenvalues.unwrap();
        prop_assert!(spectra_coincide(&e, &o, 1e-9));
    }

    #[test]
    fn negated_couplings_negate_the_spectrum((scheme, n, k, seed) in arb_realization()) {
        let cs = sample(scheme, n, k, seed, Normalization::PerRealization).unwrap();
        let a = diagonalize(&cs, &SpectrumOptions::default()).unwrap().eigenvalues;
        let b = diagonalize(&cs.negated(), &SpectrumOptions::default()).unwrap().eigenvalues;
        let flipped: Vec<f64> = b.iter().rev().map(|x| -x).collect();
        prop_assert!(spectra_coincide(&a, &flipped, 1e-10));
    }
}

#[test]
fn expected_normalization_is_unit_on_average() {
    let m: f64 = (0..200)
        .map(|s| {
            let cs = sample(CouplingScheme::GaussianSparse, 10, 40, s, Normalization::Expected).unwrap();
            diagonalize(&cs, &SpectrumOptions::default()).unwrap().second_moment()
        })
        .sum::<f64>()
        / 200.0;
    // Σ J² / K has standard deviation sqrt(2/40)/sqrt(200) ≈ 0.016 over the ensemble
    assert!((m - 1.0).abs() < 0.06, "{m}");
}

#[test]
fn sparse_n16_spectra_are_least_degenerate() {
    let least = (0..20)
        .filter(|&s| {
            let cs = sample(CouplingScheme::BinarySparse, 16, 64, s, Normalization::PerRealization).unwrap();
            diagonalize(&cs, &SpectrumOptions::default()).unwrap().classify().unwrap() == syk_core::DegeneracyClass::LeastDegenerate
        })
        .count();
    assert!(least >= 18, "{least}");
}
