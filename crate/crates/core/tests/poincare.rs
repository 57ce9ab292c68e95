use proptest::prelude::*;
use tippingscope::models::{PeriodicModel, Split};
use tippingscope::poincare::{
    find_fixed_points, period_map, period_map_derivative, second_differences, FixedPointCount, PoincareConfig,
    Stability,
};
use tippingscope::roots::linspace;

#[test]
fn fixed_points_are_fixed() {
    let cfg = PoincareConfig::default();
    let model = PeriodicModel::new(0.1, 0.05, 0.05).with_lambda(0.02);
    let set = find_fixed_points(&model, [-30.0, 30.0], 200, &cfg).unwrap();
    assert!(!set.is_empty());
    for p in &set.points {
        let tx = period_map(&model, p.x_star, &cfg.integrator).unwrap().finite().unwrap();
        assert!((tx - p.x_star).abs() < 1e-8);
        let stab = if p.multiplier < 1.0 {
            Stability::Attractive
        } else {
            Stability::Repulsive
        };
        assert_eq!(p.stability, stab);
    }
}

#[test]
fn count_follows_lambda_through_the_fold() {
    let cfg = PoincareConfig::default();
    let base = PeriodicModel::new(0.1, 0.05, 0.05).with_split(Split::ConcaveLinear);
    // λ₋ ≈ -0.005567 for this family
    let above = find_fixed_points(&base.with_lambda(0.0), [-30.0, 30.0], 200, &cfg).unwrap();
    let below = find_fixed_points(&base.with_lambda(-0.02), [-30.0, 30.0], 200, &cfg).unwrap();
    assert_eq!(above.count, FixedPointCount::Two);
    assert_eq!(below.count, FixedPointCount::Zero);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn period_map_is_increasing(x in -8.0f64..8.0, gap in 1e-4f64..1.0, lambda in -0.2f64..0.2, g in 0.005f64..0.5) {
        let cfg = PoincareConfig::default().integrator;
        let model = PeriodicModel::new(0.1, g, g).with_lambda(lambda);
        let a = period_map(&model, x, &cfg).unwrap().finite().unwrap();
        let b = period_map(&model, x + gap, &cfg).unwrap().finite().unwrap();
        prop_assert!(b > a);
        prop_assert!(period_map_derivative(&model, x, &cfg).unwrap() > 0.0);
    }

    #[test]
    fn splits_have_at_most_two_fixed_points(lambda in -0.3f64..0.3, gm in 0.005f64..0.5, gp in 0.005f64..0.5, plus in any::<bool>()) {
        let split = if plus { Split::LinearConvex } else { Split::ConcaveLinear };
        let model = PeriodicModel::new(0.1, gm, gp).with_split(split).with_lambda(lambda);
        let set = find_fixed_points(&model, [-30.0, 30.0], 200, &PoincareConfig::default()).unwrap();
        prop_assert!(set.len() <= 2);
        prop_assert!(!set.anomaly);
    }

    #[test]
    fn split_maps_have_one_signed_curvature(lambda in -0.2f64..0.2, g in 0.005f64..0.5) {
        let cfg = PoincareConfig::default().integrator;
        let grid = linspace(-6.0, 6.0, 60);
        let minus = PeriodicModel::new(0.1, g, g).with_split(Split::ConcaveLinear).with_lambda(lambda);
        let plus = PeriodicModel::new(0.1, g, g).with_split(Split::LinearConvex).with_lambda(lambda);
        prop_assert!(second_differences(&minus, &grid, &cfg).unwrap().iter().all(|&(_, d)| d <= 1e-8));
        prop_assert!(second_differences(&plus, &grid, &cfg).unwrap().iter().all(|&(_, d)| d >= -1e-8));
    }
}
