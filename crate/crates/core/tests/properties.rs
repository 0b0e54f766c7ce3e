use proptest::prelude::*;

use oppspec_core::analytics::{captured_opportunities, system_captured, transmission_efficiency};
use oppspec_core::occupancy::{fit_mixture, FitConfig};
use oppspec_core::rng::rng_from_seed;
use oppspec_core::sensing::qfunc::{q, q_inv};
use oppspec_core::{ChannelModel, DwellSamples, ExpMixture, State};

fn mixture() -> impl Strategy<Value = ExpMixture> {
    prop::collection::vec((0.01f64..1.0, 0.01f64..100.0), 1..6)
        .prop_map(|pairs| ExpMixture::from_pairs(&pairs).unwrap())
}

proptest! {
    #[test]
    fn mixtures_hold_invariants(m in mixture()) {
        let s: f64 = m.weights().iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-9);
        prop_assert!(m.weights().iter().all(|&w| w >= 0.0));
        prop_assert!(m.rates().windows(2).all(|r| r[0] < r[1]));
    }

    #[test]
    fn cdf_is_monotone_and_bounded(m in mixture(), a in 0.0f64..50.0, d in 0.0f64..50.0) {
        let (fa, fb) = (m.cdf(a), m.cdf(a + d));
        prop_assert!((0.0..=1.0).contains(&fa));
        prop_assert!(fb >= fa);
        prop_assert!((m.cdf(a) + m.ccdf(a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn q_inverse_round_trips(x in -5.0f64..8.0) {
        let p = q(x);
        prop_assert!((q_inv(p) - x).abs() < 1e-7 * (1.0 + x.abs()));
    }

    #[test]
    fn system_capture_grows_with_channels(z in prop::collection::vec(0.0f64..1.0, 1..8), extra in 0.0f64..1.0) {
        let before = system_captured(&z);
        let mut more = z.clone();
        more.push(extra);
        prop_assert!(system_captured(&more) >= before - 1e-15);
        prop_assert!((0.0..=1.0).contains(&before));
    }

    #[test]
    fn capture_falls_and_efficiency_rises_with_period(on in mixture(), off in mixture(), t in 1e-3f64..10.0) {
        let ch = ChannelModel::new(on, off);
        prop_assume!(ch.is_ok());
        let ch = ch.unwrap();
        prop_assert!(captured_opportunities(&ch, 2.0 * t) <= captured_opportunities(&ch, t) + 1e-12);
        prop_assert!(transmission_efficiency(2.0 * t, 0.02) > transmission_efficiency(t, 0.02));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fitted_mixtures_are_valid(m in mixture(), seed in any::<u64>(), k in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let v: Vec<f64> = (0..2000).map(|_| m.sample(&mut rng)).collect();
        let s = DwellSamples::new(v, State::On).unwrap();
        let out = fit_mixture(&s, &FitConfig::auto(k)).unwrap();
        let w: f64 = out.mixture.weights().iter().sum();
        prop_assert!((w - 1.0).abs() < 1e-9);
        prop_assert!(out.effective_k <= k);
        prop_assert!(out.log_likelihood <= 1e-12);
    }
}
