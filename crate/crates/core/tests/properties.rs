use std::sync::Arc;

use dsy::config::ExperimentConfig;
use dsy::criteria::{discretize_operator, operator_norm, pair_sequence, spectral_radius, GridSpec, Verdict};
use dsy::kernels::{g, BesselKernel, BetaSpec, BirthDeathKernel, Intensity, MatrixKernel};
use dsy::numerics::PowerIteration;
use dsy::report::fmt_float;
use dsy::sim::{simulate_frontier, zeta_to_depth, CascadeModel, GwConfig, InitialState, TreeShape};
use dsy::VertexId;
use proptest::prelude::*;

fn model(which: u8) -> CascadeModel {
    match which % 4 {
        0 => CascadeModel::yule(),
        1 => CascadeModel::generation_scaled(1.5).unwrap(),
        2 => CascadeModel::markov(Arc::new(BesselKernel::new()), InitialState::Stationary),
        _ => CascadeModel::yule().with_tree(TreeShape::GaltonWatson(GwConfig::new(vec![0.2, 0.3, 0.5]).unwrap())),
    }
}

/// Row-stochastic matrix from arbitrary positive weights.
fn stochastic(w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    w.iter().map(|r| {
        let s: f64 = r.iter().sum();
        r.iter().map(|x| x / s).collect()
    }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn zeta_nondecreasing(which in 0u8..4, seed in any::<u64>(), trial in 0u64..1000) {
        let z = zeta_to_depth(&model(which), 10, 200_000, seed, trial).unwrap();
        prop_assert!(z.zeta_n.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn power_of_two_scaling_is_exact(which in 0u8..4, k in -3i32..4, seed in any::<u64>()) {
        let c = 2f64.powi(k);
        let m = model(which);
        let a = zeta_to_depth(&m, 8, 200_000, seed, 0).unwrap();
        let b = zeta_to_depth(&m.with_scale(c), 8, 200_000, seed, 0).unwrap();
        for (x, y) in a.zeta_n.iter().zip(&b.zeta_n) {
            prop_assert_eq!((x / c).to_bits(), y.to_bits());
        }
        prop_assert_eq!(a.argmin_path, b.argmin_path);
    }

    #[test]
    fn frontier_is_reproducible(which in 0u8..4, seed in any::<u64>(), t in 0.1f64..3.0) {
        let m = model(which);
        let a = simulate_frontier(&m, t, 50_000, seed, 1, 100).unwrap();
        let b = simulate_frontier(&m, t, 50_000, seed, 1, 100).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.event_times.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(a.event_times.iter().all(|&s| s < t));
    }

    #[test]
    fn norm_dominates_radius(w in prop::collection::vec(prop::collection::vec(0.05f64..1.0, 4), 4), a in 0.01f64..10.0) {
        let k = MatrixKernel::new(vec![1.0, 2.0, 3.0, 4.0], stochastic(&w), Intensity::Identity).unwrap();
        let op = discretize_operator(&k, None, a).unwrap();
        let cfg = PowerIteration::default();
        let rho = spectral_radius(&op, cfg).unwrap();
        let norm = operator_norm(&op, cfg).unwrap();
        prop_assert!(rho <= norm * (1.0 + 1e-6), "{} > {}", rho, norm);
        // ρ(T_a) ≤ max g_a
        prop_assert!(rho <= g(a, 4.0) * (1.0 + 1e-6));
        let last = pair_sequence(&op, 30).unwrap().last().unwrap().nth_root;
        prop_assert!(last <= g(a, 4.0) * (1.0 + 1e-9));
    }

    #[test]
    fn birth_death_norm_falls_with_a(beta in 0.05f64..0.95, a in 0.01f64..50.0, f in 1.01f64..4.0) {
        let k = BirthDeathKernel::new(BetaSpec::Constant(beta), 30).unwrap();
        let cfg = PowerIteration::default();
        let lo = operator_norm(&discretize_operator(&k, None, a).unwrap(), cfg).unwrap();
        let hi = operator_norm(&discretize_operator(&k, None, a * f).unwrap(), cfg).unwrap();
        prop_assert!(hi <= lo * (1.0 + 1e-6));
    }

    #[test]
    fn verdict_is_ordered(v in -5.0f64..5.0, t in -5.0f64..5.0, m in 0.0f64..1.0) {
        match Verdict::compare(v, t, m) {
            Verdict::Passes => prop_assert!(v < t - m),
            Verdict::Fails => prop_assert!(v > t + m),
            Verdict::Inconclusive => prop_assert!((v - t).abs() <= m),
        }
    }

    #[test]
    fn grid_text_round_trip(lo in -1e3f64..1e3, w in 1e-3f64..1e3, n in 2usize..10_000) {
        let g = GridSpec::new(lo, lo + w, n).unwrap();
        let back: GridSpec = g.to_string().parse().unwrap();
        prop_assert_eq!(g, back);
        prop_assert_eq!(back.nodes().len(), n);
        prop_assert_eq!(back.nodes()[n - 1], lo + w);
    }

    #[test]
    fn csv_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let s = fmt_float(x);
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn vertex_ids_round_trip(path in prop::collection::vec(1u32..5, 0..12)) {
        let v = VertexId::from_path(&path).unwrap();
        let back: VertexId = v.to_string().parse().unwrap();
        prop_assert_eq!(v, back);
    }

    #[test]
    fn config_json_round_trip(seed in any::<u64>(), t in 0.0f64..100.0, n in 1u32..100, b in 0.0f64..2.0) {
        let mut c = ExperimentConfig { seed: Some(seed), ..Default::default() };
        c.run.t = t;
        c.run.n = n;
        c.run.b = b;
        let text = serde_json::to_string_pretty(&c.to_json()).unwrap();
        let mut back = ExperimentConfig::default();
        back.load(&text).unwrap();
        prop_assert_eq!(back, c);
    }
}
