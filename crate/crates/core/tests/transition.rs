use tippingscope::models::{AlleePredationModel, DriverOrbit, TransitionModel};
use tippingscope::transition::{
    classify_run, finite_time_exponent, future_fold, past_limits, pullback_solution, repulsive_solution, RunClass,
    TransitionConfig, Which,
};
use tippingscope::Error;

fn model(rho: f64) -> TransitionModel {
    TransitionModel::new(AlleePredationModel::default(), DriverOrbit::default(), rho)
}

#[test]
fn past_equilibria_bracket_the_threshold() {
    let lim = past_limits(&model(0.2)).unwrap();
    assert_eq!(lim.lower(), 0.0);
    assert!(lim.middle() > 0.3 && lim.middle() < lim.upper());
}

#[test]
fn lower_solution_is_the_axis() {
    let cfg = TransitionConfig::default();
    let traj = pullback_solution(&model(0.25), Which::Lower, 500.0, &cfg).unwrap();
    assert!(traj.nodes().iter().all(|&(_, x)| x == 0.0));
}

#[test]
fn upper_solution_is_attractive_in_the_past() {
    let cfg = TransitionConfig::default();
    let m = model(0.1);
    let traj = pullback_solution(&m, Which::Upper, -500.0, &cfg).unwrap();
    let e = finite_time_exponent(&m, &traj, -5000.0, -500.0).unwrap();
    assert!(e < 0.0, "{e}");
}

#[test]
fn repulsive_solution_sits_between() {
    let cfg = TransitionConfig::default();
    let m = model(0.1);
    let mid = repulsive_solution(&m, 5e4, 0.0, &cfg).unwrap();
    let up = pullback_solution(&m, Which::Upper, 0.0, &cfg).unwrap();
    let x = mid.x_last();
    assert!(x > 0.0 && x < up.x_last(), "{x} vs {}", up.x_last());
}

#[test]
fn small_rho_tracks_large_rho_tips() {
    let cfg = TransitionConfig::default();
    assert_eq!(
        classify_run(&model(0.0), 1e5, 1e-3, &cfg).unwrap().class,
        RunClass::Tracking
    );
    let run = classify_run(&model(0.6), 1e5, 1e-3, &cfg).unwrap();
    assert_eq!(run.class, RunClass::Tipping);
    assert!(run.early_exit);
}

#[test]
fn horizon_inside_burn_in_is_rejected() {
    let cfg = TransitionConfig::default();
    assert!(matches!(
        classify_run(&model(0.1), -2.495e5, 1e-3, &cfg),
        Err(Error::Config(_))
    ));
}

#[test]
fn future_fold_value() {
    let rho = future_fold(&model(0.0), [0.0, 10.0], 1e-10).unwrap();
    assert!((rho - 0.3342647).abs() < 1e-6, "{rho}");
}
