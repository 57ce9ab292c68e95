//! Pullback-attractive solutions of the transition equation
//! `y' = h(ω̄(t), y) - ρ·Γ(t)·f(y)` and the tracking/tipping alternative.
//!
//! As `t → -∞` the equation approaches the autonomous past equation
//! `y' = h(0, y)`, whose outer equilibria `c_l = 0` and `c_u` are
//! attractive. Starting at those equilibria far in the past and integrating
//! forward approximates the locally pullback attractive solutions `l_ρ` and
//! `u_ρ`; tracking means they stay `ε`-apart up to the horizon.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{gamma, holling3, TransitionModel};
use crate::odeint::{
    integrate, integrate_along, integrate_observed, IntegratorConfig, ScalarField, Status, Trajectory,
};
use crate::poincare::Stability;
use crate::roots;

/// Where the pullback runs start, how long they settle, and how they are
/// integrated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionConfig {
    pub t_past: f64,
    pub burn_in: f64,
    /// Extra lead time of the certification rerun.
    pub certify_lead: f64,
    pub certify_tol: f64,
    pub integrator: IntegratorConfig,
}

impl Default for TransitionConfig {
    fn default() -> Self {
        Self {
            t_past: -2.5e5,
            burn_in: 1e3,
            certify_lead: 1e3,
            certify_tol: 1e-6,
            // the pulse Γ is only a few time units wide, so the step is capped
            integrator: IntegratorConfig::default().with_tolerances(1e-9, 1e-9).with_h_max(1.0),
        }
    }
}

impl TransitionConfig {
    /// The start time must be deep in the past regime: driver near `0` and
    /// pulse switched off.
    pub fn validate(&self, model: &TransitionModel) -> Result<()> {
        self.integrator.validate()?;
        let omega = model.driver.omega(self.t_past);
        let pulse = gamma(self.t_past).abs();
        if !(omega < 1e-3 && pulse < 1e-4) {
            return Err(Error::Config(format!(
                "t_past={} is not in the past regime (omega={omega:e}, gamma={pulse:e})",
                self.t_past
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PastLimits {
    /// Ascending equilibria of `y' = h(0, y)`.
    pub roots: Vec<f64>,
    pub stabilities: Vec<Stability>,
}

impl PastLimits {
    pub fn lower(&self) -> f64 {
        self.roots[0]
    }
    pub fn middle(&self) -> f64 {
        self.roots[1]
    }
    pub fn upper(&self) -> f64 {
        self.roots[2]
    }
}

/// Equilibria of `y ↦ frozen(y)` on `[-5, 60]`, with the root at the
/// invariant axis snapped to exactly zero.
fn equilibria<F: Fn(f64) -> f64>(f: F) -> Vec<f64> {
    roots::scan_roots(&f, -5.0, 60.0, 6501, 1e-13)
        .into_iter()
        .map(|r| if r.abs() < 1e-9 && f(0.0) == 0.0 { 0.0 } else { r })
        .collect()
}

/// The three equilibria of the past equation `y' = h(0, y)`.
pub fn past_limits(model: &TransitionModel) -> Result<PastLimits> {
    let slice = model.base.at_omega(0.0);
    let roots = equilibria(|y| slice.value(y));
    if roots.len() != 3 {
        return Err(Error::UnexpectedRootCount(roots.len()));
    }
    let stabilities = roots
        .iter()
        .map(|&r| Stability::from_exponent(slice.derivs(r)[1]))
        .collect();
    Ok(PastLimits { roots, stabilities })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    Lower,
    Upper,
}

fn diverged(x0: f64, status: Status) -> Result<()> {
    match status {
        Status::BlewUp { t_escape, direction } => Err(Error::Divergence {
            x0,
            t_escape,
            direction: direction.sign(),
        }),
        _ => Ok(()),
    }
}

/// Value at `t_check` of the run started at `(t_start, x0)`, streamed.
fn value_at(model: &TransitionModel, t_start: f64, x0: f64, t_check: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let out = integrate_observed(model, t_start, x0, t_check, cfg, |_| ControlFlow::Continue(()))?;
    diverged(x0, out.status)?;
    Ok(out.x_last)
}

/// Approximation of `l_ρ` or `u_ρ` on `[t_past, t_end]`, trustworthy after
/// `t_past + burn_in`.
///
/// A second run started `certify_lead` earlier must agree at
/// `min(0, t_end)` to `certify_tol`.
pub fn pullback_solution(
    model: &TransitionModel,
    which: Which,
    t_end: f64,
    cfg: &TransitionConfig,
) -> Result<Trajectory> {
    cfg.validate(model)?;
    if !(t_end > cfg.t_past + cfg.burn_in) {
        return Err(Error::Config(format!("t_end={t_end} is inside the burn-in window")));
    }
    let limits = past_limits(model)?;
    let x0 = match which {
        Which::Lower => limits.lower(),
        Which::Upper => limits.upper(),
    };
    let traj = integrate(model, cfg.t_past, x0, t_end, &cfg.integrator)?;
    diverged(x0, traj.status)?;
    let t_check = t_end.min(0.0);
    let early = value_at(model, cfg.t_past - cfg.certify_lead, x0, t_check, &cfg.integrator)?;
    let gap = (early - traj.sample(t_check)?).abs();
    if gap > cfg.certify_tol {
        return Err(Error::NotConverged(gap));
    }
    Ok(traj)
}

/// Solution through the middle equilibrium of the frozen equation at
/// `t_future`, integrated backward to `t_end`. Backward in time the
/// repulsive middle solution becomes attractive, so this approximates it.
pub fn repulsive_solution(
    model: &TransitionModel,
    t_future: f64,
    t_end: f64,
    cfg: &TransitionConfig,
) -> Result<Trajectory> {
    let roots = equilibria(model.frozen(t_future));
    if roots.len() != 3 {
        return Err(Error::UnexpectedRootCount(roots.len()));
    }
    let traj = integrate(model, t_future, roots[1], t_end, &cfg.integrator)?;
    diverged(roots[1], traj.status)?;
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunClass {
    Tracking,
    Tipping,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub rho: f64,
    pub class: RunClass,
    /// Upper and lower solutions when the run was decided.
    pub upper: f64,
    pub lower: f64,
    pub t_decided: f64,
    pub early_exit: bool,
}

/// Tracking iff `u_ρ(horizon) - l_ρ(horizon) ≥ ε`.
///
/// Below the Allee threshold `S` the right-hand side is strictly negative
/// for every `t` (the logistic factor is negative and the predation terms
/// are non-negative), so once the upper solution falls below
/// `min(ε, S)` it stays there and the run is decided as tipping
/// immediately.
pub fn classify_run(model: &TransitionModel, horizon: f64, epsilon: f64, cfg: &TransitionConfig) -> Result<RunOutcome> {
    cfg.validate(model)?;
    if !(horizon > cfg.t_past + cfg.burn_in) {
        return Err(Error::Config(format!("horizon={horizon} is inside the burn-in window")));
    }
    let limits = past_limits(model)?;
    let floor = epsilon.min(model.base.s);
    let settle = cfg.t_past + cfg.burn_in;
    let upper_out = integrate_observed(model, cfg.t_past, limits.upper(), horizon, &cfg.integrator, |seg| {
        if seg.t_end > settle && seg.x_end < floor && seg.x_end >= 0.0 {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    diverged(limits.upper(), upper_out.status)?;
    let early_exit = matches!(upper_out.status, Status::Stopped { .. });
    let t_decided = upper_out.t_last;
    let lower = value_at(model, cfg.t_past, limits.lower(), t_decided, &cfg.integrator)?;
    let class = if early_exit || upper_out.x_last - lower < epsilon {
        RunClass::Tipping
    } else {
        RunClass::Tracking
    };
    Ok(RunOutcome {
        rho: model.rho,
        class,
        upper: upper_out.x_last,
        lower,
        t_decided,
        early_exit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TippingReport {
    /// Probed values in ascending order.
    pub rho_values: Vec<f64>,
    pub classifications: Vec<RunClass>,
    pub bracket: [f64; 2],
    pub horizon: f64,
    pub epsilon: f64,
}

impl TippingReport {
    /// No probe classified Tracking lies above a probe classified Tipping.
    pub fn is_monotone(&self) -> bool {
        let first_tip = self.classifications.iter().position(|c| *c == RunClass::Tipping);
        match first_tip {
            Some(i) => self.classifications[i..].iter().all(|c| *c == RunClass::Tipping),
            None => true,
        }
    }
}

/// Bisection in `ρ` for the tipping point, starting from a tracking
/// `rho_lo` and a tipping `rho_hi`. Valid because `ρ ↦ u_ρ` is
/// nonincreasing.
pub fn locate_tipping(
    model: &TransitionModel,
    rho_lo: f64,
    rho_hi: f64,
    tol: f64,
    horizon: f64,
    epsilon: f64,
    cfg: &TransitionConfig,
) -> Result<TippingReport> {
    if !(rho_lo < rho_hi) {
        return Err(Error::BadBracket(format!(
            "need rho_lo < rho_hi, got [{rho_lo}, {rho_hi}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let mut probes = Vec::new();
    let mut run = |rho: f64| -> Result<RunClass> {
        let class = classify_run(&model.with_rho(rho), horizon, epsilon, cfg)?.class;
        probes.push((rho, class));
        Ok(class)
    };
    let (c_lo, c_hi) = (run(rho_lo)?, run(rho_hi)?);
    if c_lo != RunClass::Tracking || c_hi != RunClass::Tipping {
        return Err(Error::BadBracket(format!(
            "rho={rho_lo} gives {c_lo:?} and rho={rho_hi} gives {c_hi:?}"
        )));
    }
    let (mut lo, mut hi) = (rho_lo, rho_hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match run(mid)? {
            RunClass::Tracking => lo = mid,
            RunClass::Tipping => hi = mid,
        }
    }
    probes.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(TippingReport {
        rho_values: probes.iter().map(|p| p.0).collect(),
        classifications: probes.iter().map(|p| p.1).collect(),
        bracket: [lo, hi],
        horizon,
        epsilon,
    })
}

/// `(1/(t1-t0))·∫_{t0}^{t1} f_x(s, x(s)) ds` along a stored trajectory:
/// negative for attractive behaviour, positive for repulsive.
pub fn finite_time_exponent<F: ScalarField + ?Sized>(model: &F, traj: &Trajectory, t0: f64, t1: f64) -> Result<f64> {
    if t0 == t1 {
        return Err(Error::Config("empty averaging window".into()));
    }
    Ok(integrate_along(traj, t0, t1, |t, x| model.d1(t, x))? / (t1 - t0))
}

/// Perturbation strength beyond which the future equation
/// `y' = h(2π, y) - ρ·f(y)` (driver at `2π`, pulse settled at `1`) keeps
/// only the extinction equilibrium: the saddle-node of its upper pair.
pub fn future_fold(model: &TransitionModel, search: [f64; 2], tol: f64) -> Result<f64> {
    let slice = model.base.at_omega(std::f64::consts::TAU);
    let count = |rho: f64| equilibria(|y| slice.value(y) - rho * holling3(model.base.b, y)[0]).len();
    let [mut lo, mut hi] = search;
    if !(count(lo) == 3 && count(hi) < 3) {
        return Err(Error::BadBracket(format!(
            "future equation has {} equilibria at rho={lo} and {} at rho={hi}",
            count(lo),
            count(hi)
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count(mid) == 3 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{AlleePredationModel, DriverOrbit};
    use crate::odeint::FnField;

    fn model(rho: f64) -> TransitionModel {
        TransitionModel::new(AlleePredationModel::default(), DriverOrbit::default(), rho)
    }

    #[test]
    fn past_roots() {
        let p = past_limits(&model(0.0)).unwrap();
        assert_eq!(p.roots[0], 0.0);
        assert!(0.0 < p.roots[1] && p.roots[1] < p.roots[2] && p.roots[2] < 50.0);
        let slice = model(0.0).base.at_omega(0.0);
        assert!(slice.value(p.middle()).abs() < 1e-10);
        use Stability::*;
        assert_eq!(p.stabilities, vec![Attractive, Repulsive, Attractive]);
    }

    #[test]
    fn past_roots_without_predation() {
        let base = AlleePredationModel {
            d0: 0.0,
            d1: 0.0,
            ..Default::default()
        };
        let m = TransitionModel::new(base, DriverOrbit::default(), 0.0);
        let p = past_limits(&m).unwrap();
        assert_eq!(p.roots[0], 0.0);
        assert!((p.roots[1] - 0.3).abs() < 1e-10);
        assert!((p.roots[2] - 40.3).abs() < 1e-10);
    }

    #[test]
    fn degenerate_bracket() {
        let r = locate_tipping(&model(0.0), 0.3, 0.3, 1e-3, 1e3, 1e-3, &TransitionConfig::default());
        assert!(matches!(r, Err(Error::BadBracket(_))));
    }

    #[test]
    fn exponent_of_linear_decay() {
        let f = FnField::new(|_, x| -x, |_, _| -1.0);
        let traj = integrate(&f, 0.0, 1.0, 5.0, &IntegratorConfig::default()).unwrap();
        let e = finite_time_exponent(&f, &traj, 0.5, 4.0).unwrap();
        assert!((e + 1.0).abs() < 1e-9);
    }

    #[test]
    fn shallow_start_is_rejected() {
        let cfg = TransitionConfig {
            t_past: -100.0,
            ..TransitionConfig::default()
        };
        assert!(matches!(cfg.validate(&model(0.0)), Err(Error::Config(_))));
    }
}
