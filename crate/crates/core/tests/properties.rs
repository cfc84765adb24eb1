use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;

use qwalk_core::experiment::{run_density, sample_counts, ImperfectionConfig};
use qwalk_core::linalg::{cis, Mat2, Vec2};
use qwalk_core::optics::{decompose, hwp, qwp, PlateSetting};
use qwalk_core::povm::{build_circuit, extract_povm, IterationPair};
use qwalk_core::walk::{
    evolve, position_distribution, run, translate, CoinLayer, CoinOp, CoinSchedule, WalkState,
};
use qwalk_core::Tolerances;

fn unitary(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Mat2 {
    let (c, s) = ((gamma / 2.0).cos(), (gamma / 2.0).sin());
    let m = Mat2::new(
        cis(-(beta + delta) / 2.0) * c,
        -cis(-(beta - delta) / 2.0) * s,
        cis((beta - delta) / 2.0) * s,
        cis((beta + delta) / 2.0) * c,
    );
    m.scale(cis(alpha))
}

fn arb_unitary() -> impl Strategy<Value = Mat2> {
    (0.0..6.3f64, 0.0..6.3f64, 0.0..3.15f64, 0.0..6.3f64).prop_map(|(a, b, g, d)| unitary(a, b, g, d))
}

fn arb_coin() -> impl Strategy<Value = CoinOp> {
    arb_unitary().prop_map(|m| CoinOp::new(m, 1e-12).unwrap())
}

fn arb_state() -> impl Strategy<Value = Vec2> {
    (0.0..3.15f64, 0.0..6.3f64).prop_map(|(t, p)| Vec2::new(Complex64::new((t / 2.0).cos(), 0.0), cis(p) * (t / 2.0).sin()))
}

fn arb_schedule() -> impl Strategy<Value = CoinSchedule> {
    let layer = prop::collection::btree_map(-6i64..=6, arb_coin(), 0..6);
    prop::collection::vec(layer, 0..7).prop_map(|steps: Vec<CoinLayer>| CoinSchedule::new(steps).unwrap())
}

fn arb_pairs() -> impl Strategy<Value = Vec<IterationPair>> {
    prop::collection::vec((arb_coin(), arb_coin()).prop_map(|(a, b)| IterationPair::new(a, b)), 1..5)
}

proptest! {
    #[test]
    fn norm_is_conserved(schedule in arb_schedule(), input in arb_state()) {
        let out = run(&schedule, input).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn support_is_light_cone(schedule in arb_schedule(), input in arb_state()) {
        let t = schedule.len() as i64;
        for x in run(&schedule, input).unwrap().positions() {
            prop_assert!(x.abs() <= t);
            prop_assert_eq!((x - t).rem_euclid(2), 0);
        }
    }

    #[test]
    fn evolution_is_linear(schedule in arb_schedule(), a in arb_state(), b in arb_state(), w in 0.0..6.3f64) {
        let tol = Tolerances::default();
        let (sa, sb) = (WalkState::at_origin(a), WalkState::at_origin(b));
        let z = cis(w) * 0.6;
        let mixed = sa.scale(z).superpose(&sb.scale(Complex64::new(0.8, 0.0)));
        let lhs = evolve(&schedule, &mixed, &tol).unwrap();
        let rhs = evolve(&schedule, &sa, &tol).unwrap().scale(z)
            .superpose(&evolve(&schedule, &sb, &tol).unwrap().scale(Complex64::new(0.8, 0.0)));
        prop_assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn translation_is_isometric(schedule in arb_schedule(), a in arb_state(), b in arb_state()) {
        let tol = Tolerances::default();
        let sa = evolve(&schedule, &WalkState::at_origin(a), &tol).unwrap();
        let sb = evolve(&schedule, &WalkState::at_origin(b), &tol).unwrap();
        prop_assert!((translate(&sa).distance(&translate(&sb)) - sa.distance(&sb)).abs() < 1e-12);
        prop_assert_eq!(translate(&sa).len(), sa.len());
    }

    #[test]
    fn extracted_povm_is_complete(schedule in arb_schedule()) {
        let povm = extract_povm(&schedule).unwrap();
        prop_assert!(povm.completeness_residual < 1e-10);
        povm.validate(&Tolerances::default()).unwrap();
    }

    #[test]
    fn peel_off_circuits_are_complete(pairs in arb_pairs(), input in arb_state()) {
        let schedule = build_circuit(&pairs).unwrap();
        let povm = extract_povm(&schedule).unwrap();
        prop_assert!(povm.completeness_residual < 1e-10);
        let walk = position_distribution(&run(&schedule, input).unwrap());
        for (port, p) in povm.probabilities(&input) {
            prop_assert!((walk.get(&port).copied().unwrap_or(0.0) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn decomposition_round_trips(u in arb_unitary()) {
        let coin = CoinOp::new(u, 1e-12).unwrap();
        let plates = decompose(&coin);
        prop_assert!(plates.len() <= 3);
        let product = plates.iter().fold(Mat2::IDENTITY, |acc, p| p.matrix() * acc);
        prop_assert!(product.phase_distance(&u) <= 1e-10);
    }

    #[test]
    fn decomposition_ignores_global_phase(u in arb_unitary(), phase in 0.0..6.3f64) {
        let a = decompose(&CoinOp::new(u, 1e-12).unwrap());
        let b = decompose(&CoinOp::new(u.scale(cis(phase)), 1e-12).unwrap());
        prop_assert_eq!(a.len(), b.len());
        let pa = a.iter().fold(Mat2::IDENTITY, |acc, p| p.matrix() * acc);
        let pb = b.iter().fold(Mat2::IDENTITY, |acc, p| p.matrix() * acc);
        prop_assert!(pa.phase_distance(&pb) < 1e-10);
    }

    #[test]
    fn density_is_normalized(input in arb_state(), v1 in 0.0..=1.0f64, v2 in 0.0..=1.0f64) {
        let schedule = qwalk_core::Scenario::Sic.schedule().unwrap();
        let mut cfg = ImperfectionConfig::ideal();
        cfg.visibilities.insert("1-2".into(), v1);
        cfg.visibilities.insert("3-4".into(), v2);
        let d = run_density(&schedule, input, &cfg).unwrap();
        prop_assert!((d.values().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(d.values().all(|&p| p >= 0.0));
    }

    #[test]
    fn sampling_is_seed_deterministic(seed in any::<u64>(), total in 1u64..100_000) {
        let dist = BTreeMap::from([(0, 0.2), (2, 0.3), (4, 0.5)]);
        let a = sample_counts(&dist, total, seed).unwrap();
        let b = sample_counts(&dist, total, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.counts.values().sum::<u64>(), total);
    }
}

#[test]
fn plate_matrices_are_unitary_on_grid() {
    for k in 0..=720 {
        let a = k as f64 * 0.5;
        assert!(hwp(a).unitarity_defect() < 1e-14);
        assert!(qwp(a).unitarity_defect() < 1e-14);
        assert!(hwp(a).matrix().phase_distance(hwp(a + 90.0).matrix()) < 1e-14);
        assert!(qwp(a).matrix().phase_distance(qwp(a + 180.0).matrix()) < 1e-14);
        let setting = PlateSetting::hwp(a);
        assert!(setting.angle_deg >= 0.0 && setting.angle_deg < 90.0);
        assert!(setting.matrix().phase_distance(hwp(a).matrix()) < 1e-13);
    }
}

#[test]
fn sampled_frequencies_converge() {
    let dist = BTreeMap::from([(0, 1.0 / 6.0), (2, 1.0 / 6.0), (4, 2.0 / 3.0)]);
    let n = 2_000_000;
    let t = sample_counts(&dist, n, 11).unwrap();
    for (port, p) in &dist {
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((t.probabilities[port] - p).abs() < 5.0 * sigma, "port {port}");
    }
}

#[test]
fn visibility_controls_fringe_contrast() {
    // split, swap both arms back to the origin, recombine on a splitter
    let r = 0.5f64.sqrt();
    let h = CoinOp::new(Mat2::real(r, r, r, -r), 1e-12).unwrap();
    let steps = vec![
        CoinLayer::from([(0, h)]),
        CoinLayer::from([(-1, CoinOp::NOT), (1, CoinOp::NOT)]),
        CoinLayer::from([(0, h)]),
    ];
    let schedule = CoinSchedule::new(steps).unwrap();
    assert_eq!(qwalk_core::optics::interferometers(&schedule).len(), 1);
    for v in [1.0, 0.998, 0.9, 0.5, 0.0] {
        let d = run_density(&schedule, Vec2::H, &ImperfectionConfig::uniform_visibility(v)).unwrap();
        assert!((d[&1] - (1.0 + v) / 2.0).abs() < 1e-12, "V={v}: {d:?}");
        assert!((d[&-1] - (1.0 - v) / 2.0).abs() < 1e-12);
    }
}
