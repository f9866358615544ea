use hfuff::campaign::{assemble_budget, eotvos_ratio};
use hfuff::interferometer::{fringe_period, invert_probability, mid_fringe_alpha, mz_phase, FringeShape};
use hfuff::model::rb87_constants;
use hfuff::stats::{mean_and_error, weighted_mean};
use hfuff::systematics::{Channel, SystematicShift};
use hfuff::InterferometerConfig;
use proptest::prelude::*;

proptest! {
    #[test]
    fn probability_stays_in_unit_interval(c in 0.0f64..1.0, o in 0.0f64..1.0, phi in -1e3f64..1e3) {
        let c = c.min(2.0 * o.min(1.0 - o));
        let p = FringeShape::new(c, o).unwrap().probability(phi);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn inversion_recovers_gravity_on_the_rising_half(dphi in -1.5f64..1.5, order in 1u32..5) {
        let k = rb87_constants();
        let mut cfg = InterferometerConfig::nominal(&k);
        cfg.bragg_order = order;
        let shape = FringeShape::default();
        let alpha = mid_fringe_alpha(k.g_nominal, &cfg);
        let g = k.g_nominal + dphi / (order as f64 * cfg.k_eff * cfg.pulse_separation.powi(2));
        let p = shape.probability(mz_phase(g, alpha, &cfg));
        let back = invert_probability(p, alpha, &shape, &cfg);
        prop_assert!(((back - g) / g).abs() < 1e-12);
    }

    #[test]
    fn chirp_period_shifts_phase_by_two_pi(t in 0.05f64..0.3, order in 1u32..5) {
        let k = rb87_constants();
        let mut cfg = InterferometerConfig::nominal(&k);
        cfg.bragg_order = order;
        cfg.pulse_separation = t;
        let a = mid_fringe_alpha(k.g_nominal, &cfg);
        let d = mz_phase(k.g_nominal, a, &cfg) - mz_phase(k.g_nominal, a + fringe_period(&cfg), &cfg);
        prop_assert!((d - 2.0 * std::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn eotvos_ratio_is_antisymmetric(g in 9.0f64..10.0, d in -1e-3f64..1e-3) {
        let a = eotvos_ratio(g, g + d).unwrap();
        let b = eotvos_ratio(g + d, g).unwrap();
        prop_assert!((a + b).abs() <= 1e-15 * a.abs().max(1e-300));
    }

    #[test]
    fn budget_is_subtraction_and_quadrature(v in proptest::array::uniform4(-5.0f64..5.0), u in proptest::array::uniform4(0.0f64..5.0)) {
        let row = |ch, i: usize| SystematicShift::new(ch, v[i] * 1e-10, u[i] * 1e-10).unwrap();
        let b = assemble_budget(
            row(Channel::Statistical, 0),
            row(Channel::QuadraticZeeman, 1),
            row(Channel::AcStark, 2),
            row(Channel::Tide, 3),
        ).unwrap();
        let want = (v[0] - v[1] - v[2] - v[3]) * 1e-10;
        let rss = u.iter().map(|x| x * x).sum::<f64>().sqrt() * 1e-10;
        prop_assert!((b.corrected_value - want).abs() < 1e-24);
        prop_assert!((b.corrected_uncertainty - rss).abs() < 1e-24);
    }

    #[test]
    fn equal_weights_match_plain_mean(xs in proptest::collection::vec(-1.0f64..1.0, 2..50)) {
        let w = weighted_mean(&xs, &vec![0.5; xs.len()]).unwrap();
        let m = mean_and_error(&xs).unwrap();
        prop_assert!((w.value - m.value).abs() < 1e-14);
        prop_assert!((w.uncertainty - 0.5 / (xs.len() as f64).sqrt()).abs() < 1e-14);
    }
}
