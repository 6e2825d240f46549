use levy_mckean::chaos_lab::{theoretical_exponent, RateLaw};
use levy_mckean::levy_noise::{read_event_log, write_event_log, Atom, LevyModel, NoiseRealization, TimeGrid};
use levy_mckean::measure_metrics::{w1_sorted, w_beta, w_beta_exact_matching, EmpiricalMeasure};
use levy_mckean::rng::SeedLineage;
use proptest::prelude::*;

fn cloud(d: usize, n: usize) -> impl Strategy<Value = EmpiricalMeasure> {
    prop::collection::vec(-10.0f64..10.0, n * d).prop_map(move |p| EmpiricalMeasure::new(d, p).unwrap())
}

fn pair() -> impl Strategy<Value = (EmpiricalMeasure, EmpiricalMeasure, EmpiricalMeasure)> {
    (1usize..=3, 1usize..=6).prop_flat_map(|(d, n)| (cloud(d, n), cloud(d, n), cloud(d, n)))
}

proptest! {
    #[test]
    fn w_beta_is_a_metric_on_clouds((a, b, c) in pair(), bi in 0usize..3) {
        let beta = [0.5, 1.0, 2.0][bi];
        let ab = w_beta_exact_matching(&a, &b, beta).unwrap();
        let ba = w_beta_exact_matching(&b, &a, beta).unwrap();
        let ac = w_beta_exact_matching(&a, &c, beta).unwrap();
        let cb = w_beta_exact_matching(&c, &b, beta).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-9 * ab.max(1.0));
        prop_assert!(ab <= ac + cb + 1e-9 * (ac + cb).max(1.0));
        prop_assert_eq!(w_beta_exact_matching(&a, &a, beta).unwrap(), 0.0);
    }

    #[test]
    fn sorted_coupling_matches_assignment_on_the_line(xs in prop::collection::vec(-5.0f64..5.0, 1..20), shift in -3.0f64..3.0, seed in any::<u64>()) {
        let n = xs.len();
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x * 0.5 + shift + ((seed >> (i % 60)) & 7) as f64 * 0.1).collect();
        let a = EmpiricalMeasure::from_scalars(&xs).unwrap();
        let b = EmpiricalMeasure::from_scalars(&ys).unwrap();
        let exact = w_beta_exact_matching(&a, &b, 1.0).unwrap();
        let fast = w_beta(&a, &b, 1.0, 0).unwrap();
        prop_assert!((exact - fast).abs() <= 1e-9 * exact.max(1.0), "{} vs {} (n = {})", exact, fast, n);
    }

    #[test]
    fn w1_is_translation_equivariant(xs in prop::collection::vec(-5.0f64..5.0, 1..50), shift in -3.0f64..3.0) {
        let mut s = xs.clone();
        s.sort_by(f64::total_cmp);
        let t: Vec<f64> = s.iter().map(|x| x + shift).collect();
        prop_assert!((w1_sorted(&s, &t) - shift.abs()).abs() < 1e-9);
    }

    #[test]
    fn exponent_flips_across_the_critical_index(d in 3usize..8, below in 0.01f64..0.4, above in 0.01f64..0.4) {
        let critical = d as f64 / (d as f64 - 1.0);
        let lo = (critical - below * (critical - 1.0)).max(1.0);
        let hi = (critical + above * (2.0 - critical)).min(2.0);
        if lo < critical {
            let (e, _) = theoretical_exponent(d, lo, RateLaw::Thm2).unwrap();
            prop_assert!((e - (1.0 / lo - 1.0)).abs() < 1e-15);
        }
        if hi > critical {
            let (e, _) = theoretical_exponent(d, hi, RateLaw::Thm2).unwrap();
            prop_assert!((e + 1.0 / d as f64).abs() < 1e-15);
        }
        prop_assert!(theoretical_exponent(d, critical, RateLaw::Thm2).is_err());
    }

    #[test]
    fn annulus_mass_is_additive(alpha in 1.05f64..1.95, d in 1usize..4, a in 0.1f64..2.0, w1 in 0.1f64..5.0, w2 in 0.1f64..5.0) {
        let m = LevyModel::isotropic_stable(alpha, d).unwrap();
        let (b, c) = (a + w1, a + w1 + w2);
        let whole = m.annulus_mass(a, c);
        let parts = m.annulus_mass(a, b) + m.annulus_mass(b, c);
        prop_assert!((whole - parts).abs() <= 1e-10 * whole);
    }

    #[test]
    fn event_log_round_trips(seed in any::<u64>(), steps in 1usize..40, adapt in any::<bool>()) {
        let model = LevyModel::compound_poisson(vec![
            Atom { jump: vec![1.0, 0.5], rate: 3.0 },
            Atom { jump: vec![-2.0, 0.0], rate: 1.0 },
        ]).unwrap();
        let grid = TimeGrid::uniform(1.0, steps).unwrap();
        let noise = NoiseRealization::generate(&model, &grid, SeedLineage::new(seed, 1, 2), adapt).unwrap();
        let mut buf = Vec::new();
        write_event_log(&mut buf, &noise, None).unwrap();
        let (back, pos) = read_event_log(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(back, noise);
        prop_assert!(pos.is_none());
    }

    #[test]
    fn refined_grid_contains_jump_times(times in prop::collection::vec(0.0f64..1.0, 0..10), steps in 1usize..20) {
        let grid = TimeGrid::uniform(1.0, steps).unwrap();
        let fine = grid.refined_with(times.iter().copied());
        for t in &times {
            prop_assert!(fine.contains(*t));
        }
        for t in grid.nodes() {
            prop_assert!(fine.contains(*t));
        }
        prop_assert!(fine.nodes().windows(2).all(|w| w[0] < w[1]));
    }
}
