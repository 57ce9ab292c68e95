use proptest::prelude::*;
use tippingscope::models::PeriodicModel;
use tippingscope::odeint::{integrate, integrate_along, FnField, IntegratorConfig, Status};
use tippingscope::Error;

#[test]
fn riccati_escape_time() {
    let f = FnField::new(|_t: f64, x: f64| x * x, |_t: f64, x: f64| 2.0 * x);
    let cfg = IntegratorConfig::default().with_guard(1e6);
    let traj = integrate(&f, 0.0, 1.0, 2.0, &cfg).unwrap();
    match traj.status {
        Status::BlewUp { t_escape, .. } => assert!((t_escape - 1.0).abs() < 1e-3, "{t_escape}"),
        s => panic!("expected blow-up, got {s:?}"),
    }
}

#[test]
fn backward_escape_direction() {
    // x' = -x^2 backward from x = 1 escapes to +inf at t = -1
    let f = FnField::new(|_t: f64, x: f64| -x * x, |_t: f64, x: f64| -2.0 * x);
    let traj = integrate(&f, 0.0, 1.0, -3.0, &IntegratorConfig::default().with_guard(1e6)).unwrap();
    let Status::BlewUp { t_escape, direction } = traj.status else {
        panic!("no escape")
    };
    assert!((t_escape + 1.0).abs() < 1e-3);
    assert_eq!(direction.sign(), 1.0);
}

#[test]
fn rejects_bad_config() {
    let f = FnField::new(|_t: f64, x: f64| x, |_t: f64, _x: f64| 1.0);
    let cfg = IntegratorConfig {
        abs_tol: 0.0,
        ..Default::default()
    };
    assert!(matches!(
        integrate(&f, 0.0, 1.0, 1.0, &cfg),
        Err(Error::InvalidConfig(_))
    ));
    assert!(integrate(&f, 0.0, 1.0, 0.0, &IntegratorConfig::default()).is_err());
}

#[test]
fn quadrature_along_a_trajectory() {
    let f = FnField::new(|_t: f64, x: f64| -x, |_t: f64, _x: f64| -1.0);
    let traj = integrate(&f, 0.0, 1.0, 3.0, &IntegratorConfig::default()).unwrap();
    // ∫_0^3 e^{-t} dt
    let v = integrate_along(&traj, 0.0, 3.0, |_t, x| x).unwrap();
    assert!((v - (1.0 - (-3.0f64).exp())).abs() < 1e-10, "{v}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn linear_flow_matches_exponential(a in -1.0f64..1.0, x0 in -5.0f64..5.0, t1 in 0.1f64..6.0) {
        let f = FnField::new(move |_t: f64, x: f64| a * x, move |_t: f64, _x: f64| a);
        let traj = integrate(&f, 0.0, x0, t1, &IntegratorConfig::default()).unwrap();
        let exact = x0 * (a * t1).exp();
        prop_assert!((traj.x_last() - exact).abs() <= 1e-9 * (1.0 + exact.abs()));
        let mid = 0.37 * t1;
        prop_assert!((traj.sample(mid).unwrap() - x0 * (a * mid).exp()).abs() <= 1e-9 * (1.0 + x0.abs() * 3.0));
    }

    #[test]
    fn scalar_flow_preserves_order(x0 in -3.0f64..3.0, gap in 1e-3f64..2.0, lambda in -0.3f64..0.3) {
        let model = PeriodicModel::new(0.1, 0.05, 0.05).with_lambda(lambda);
        let cfg = IntegratorConfig::default();
        let lo = integrate(&model, 0.0, x0, 8.0, &cfg).unwrap();
        let hi = integrate(&model, 0.0, x0 + gap, 8.0, &cfg).unwrap();
        prop_assert!(hi.x_last() > lo.x_last());
    }

    #[test]
    fn forward_then_backward_returns(x0 in -2.0f64..2.0, lambda in -0.2f64..0.2) {
        let model = PeriodicModel::new(0.1, 0.05, 0.05).with_lambda(lambda);
        let cfg = IntegratorConfig::default();
        let fwd = integrate(&model, 0.0, x0, 3.0, &cfg).unwrap();
        let back = integrate(&model, 3.0, fwd.x_last(), 0.0, &cfg).unwrap();
        prop_assert!((back.x_last() - x0).abs() < 1e-8);
    }
}
