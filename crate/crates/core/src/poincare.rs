//! Period (Poincaré) maps of 2π-periodic scalar equations and their fixed
//! points.
//!
//! A fixed point of `T(x) = x(2π; 0, x)` is the initial value of a periodic
//! solution, so counting fixed points counts periodic orbits. Multipliers
//! come from the variational equation, `T'(x) = exp ∫₀^{2π} f_x(s, x(s)) ds`.

use std::cell::RefCell;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{PeriodicModel, Split};
use crate::odeint::{integrate, integrate_along, Direction, FnField, IntegratorConfig, ScalarField, Status};
use crate::roots;

/// A scalar field that is periodic in time.
pub trait PeriodicField: ScalarField {
    fn period(&self) -> f64 {
        TAU
    }

    /// Upper bound on the number of fixed points guaranteed by the shape of
    /// the field, if any. Exceeding it flags an anomaly.
    fn max_fixed_points(&self) -> Option<usize> {
        None
    }
}

impl PeriodicField for PeriodicModel {
    fn max_fixed_points(&self) -> Option<usize> {
        match self.split {
            Split::Full => None,
            Split::ConcaveLinear | Split::LinearConvex => Some(2),
        }
    }
}

impl<F, D> PeriodicField for FnField<F, D>
where
    F: Fn(f64, f64) -> f64 + Sync,
    D: Fn(f64, f64) -> f64 + Sync,
{
}

impl<P: PeriodicField + ?Sized> PeriodicField for &P {
    fn period(&self) -> f64 {
        (**self).period()
    }
    fn max_fixed_points(&self) -> Option<usize> {
        (**self).max_fixed_points()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Attractive,
    Repulsive,
    Neutral,
}

impl Stability {
    /// Classify a period-map multiplier.
    pub fn from_multiplier(m: f64, mult_tol: f64) -> Self {
        if m < 1.0 - mult_tol {
            Stability::Attractive
        } else if m > 1.0 + mult_tol {
            Stability::Repulsive
        } else {
            Stability::Neutral
        }
    }

    /// Classify a continuous-time exponent (sign of `f_x` at an equilibrium).
    pub fn from_exponent(e: f64) -> Self {
        if e < 0.0 {
            Stability::Attractive
        } else if e > 0.0 {
            Stability::Repulsive
        } else {
            Stability::Neutral
        }
    }
}

/// Value of the period map: either a state or an escape to `±∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MapValue {
    Finite(f64),
    Diverged { t_escape: f64, direction: Direction },
}

impl MapValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            MapValue::Finite(x) => Some(x),
            MapValue::Diverged { .. } => None,
        }
    }
}

/// Tolerances for fixed-point work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareConfig {
    pub integrator: IntegratorConfig,
    /// Bisection tolerance on fixed points.
    pub fp_tol: f64,
    /// Half-width of the neutral band around multiplier 1.
    pub mult_tol: f64,
}

impl Default for PoincareConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            fp_tol: 1e-10,
            mult_tol: 1e-6,
        }
    }
}

/// `T(x0)`, the solution at one period from `(0, x0)`.
pub fn period_map<P: PeriodicField + ?Sized>(model: &P, x0: f64, cfg: &IntegratorConfig) -> Result<MapValue> {
    let traj = integrate(model, 0.0, x0, model.period(), cfg)?;
    Ok(match traj.status {
        Status::BlewUp { t_escape, direction } => MapValue::Diverged { t_escape, direction },
        _ => MapValue::Finite(traj.x_last()),
    })
}

/// `T'(x0) = exp ∫₀^{2π} f_x(s, x(s)) ds`, integrated along the dense solution.
pub fn period_map_derivative<P: PeriodicField + ?Sized>(model: &P, x0: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let period = model.period();
    let traj = integrate(model, 0.0, x0, period, cfg)?;
    if let Status::BlewUp { t_escape, direction } = traj.status {
        return Err(Error::Divergence {
            x0,
            t_escape,
            direction: direction.sign(),
        });
    }
    let expo = integrate_along(&traj, 0.0, period, |t, x| model.d1(t, x))?;
    Ok(expo.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub x_star: f64,
    pub multiplier: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointCount {
    Zero,
    One,
    Two,
    More,
}

impl FixedPointCount {
    pub fn from_len(n: usize) -> Self {
        match n {
            0 => FixedPointCount::Zero,
            1 => FixedPointCount::One,
            2 => FixedPointCount::Two,
            _ => FixedPointCount::More,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSet {
    /// Ascending in `x_star`.
    pub points: Vec<FixedPoint>,
    pub scan_window: [f64; 2],
    pub count: FixedPointCount,
    /// More fixed points than the field's shape allows.
    pub anomaly: bool,
}

impl FixedPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `G(x) = T(x) - x`, with escapes mapped to `±∞`.
fn displacement<P: PeriodicField + ?Sized>(model: &P, x: f64, cfg: &IntegratorConfig) -> Result<f64> {
    Ok(match period_map(model, x, cfg)? {
        MapValue::Finite(y) => y - x,
        MapValue::Diverged { direction, .. } => direction.sign() * f64::INFINITY,
    })
}

/// Fixed points of the period map in `window`, found by scanning
/// `G(x) = T(x) - x` on `n_scan` uniform points.
///
/// Every sign change is bisected to `fp_tol`. Interior extrema of `G` that
/// point towards zero without crossing it on the grid are refined by golden
/// section, which catches pairs of roots closer together than the grid
/// spacing (the situation near a saddle-node). A touching extremum within
/// `fp_tol` of zero is reported as a single Neutral point.
pub fn find_fixed_points<P: PeriodicField + ?Sized>(
    model: &P,
    window: [f64; 2],
    n_scan: usize,
    cfg: &PoincareConfig,
) -> Result<FixedPointSet> {
    let [lo, hi] = window;
    if n_scan < 16 {
        return Err(Error::Config(format!("n_scan must be at least 16, got {n_scan}")));
    }
    if !(lo < hi) {
        return Err(Error::Config(format!("empty scan window [{lo}, {hi}]")));
    }
    let ic = &cfg.integrator;
    let grid = roots::linspace(lo, hi, n_scan);
    let vals: Vec<f64> = grid
        .par_iter()
        .map(|&x| displacement(model, x, ic))
        .collect::<Result<_>>()?;

    // bisection errors are rare (step underflow); treat them as fatal
    let err = RefCell::new(None);
    let g = |x: f64| match displacement(model, x, ic) {
        Ok(v) => v,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let g = &g;

    let mut xs = Vec::new();
    for i in 0..grid.len() {
        if vals[i] == 0.0 {
            xs.push(grid[i]);
            continue;
        }
        if i + 1 < grid.len() && vals[i + 1] != 0.0 && vals[i].signum() != vals[i + 1].signum() {
            if let Some(r) = roots::bisect(g, grid[i], grid[i + 1], cfg.fp_tol) {
                xs.push(r);
            }
        }
    }

    for i in 1..grid.len().saturating_sub(1) {
        let (a, m, b) = (vals[i - 1], vals[i], vals[i + 1]);
        if !m.is_finite() || m == 0.0 {
            continue;
        }
        // extremum pointing towards zero with no crossing around it
        let towards = if m < 0.0 { m >= a && m >= b } else { m <= a && m <= b };
        if !towards || a.signum() != m.signum() || b.signum() != m.signum() {
            continue;
        }
        let s = m.signum();
        let (xe, ge) = roots::golden_max(|x| -s * g(x), grid[i - 1], grid[i + 1], cfg.fp_tol * 0.1);
        let ge = -s * ge;
        if ge.signum() == s && ge.abs() > cfg.fp_tol {
            continue;
        }
        if ge.abs() <= cfg.fp_tol {
            xs.push(xe);
            continue;
        }
        if let Some(r) = roots::bisect(g, grid[i - 1], xe, cfg.fp_tol) {
            xs.push(r);
        }
        if let Some(r) = roots::bisect(g, xe, grid[i + 1], cfg.fp_tol) {
            xs.push(r);
        }
    }
    if let Some(e) = err.into_inner() {
        return Err(e);
    }

    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|b, a| (*b - *a).abs() <= 10.0 * cfg.fp_tol);

    if xs.is_empty() {
        // |G| smallest at an edge: roots may lie just outside the window
        let best = vals
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i);
        if let Some(i) = best {
            let edge_ward =
                (i == 0 && vals[0].abs() < vals[1].abs()) || (i == grid.len() - 1 && vals[i].abs() < vals[i - 1].abs());
            if edge_ward {
                return Err(Error::WindowTooSmall { lo, hi });
            }
        }
    }

    let points = xs
        .par_iter()
        .map(|&x| {
            let multiplier = period_map_derivative(model, x, ic)?;
            Ok(FixedPoint {
                x_star: x,
                multiplier,
                stability: Stability::from_multiplier(multiplier, cfg.mult_tol),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let anomaly = model.max_fixed_points().is_some_and(|m| points.len() > m);
    Ok(FixedPointSet {
        count: FixedPointCount::from_len(points.len()),
        points,
        scan_window: window,
        anomaly,
    })
}

/// Second differences `T(x-h) - 2T(x) + T(x+h)` on the interior of `grid`,
/// skipping points whose neighbourhood escapes.
pub fn second_differences<P: PeriodicField + ?Sized>(
    model: &P,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, f64)>> {
    let vals: Vec<Option<f64>> = grid
        .par_iter()
        .map(|&x| Ok(period_map(model, x, cfg)?.finite()))
        .collect::<Result<_>>()?;
    Ok((1..grid.len().saturating_sub(1))
        .filter_map(|i| match (vals[i - 1], vals[i], vals[i + 1]) {
            (Some(a), Some(b), Some(c)) => Some((grid[i], a - 2.0 * b + c)),
            _ => None,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const D: f64 = 0.1;

    fn mu() -> f64 {
        D / (D * D + 1.0).sqrt()
    }

    fn cfg() -> PoincareConfig {
        PoincareConfig::default()
    }

    #[test]
    fn linear_autonomous_map() {
        let lam = 0.7;
        let f = FnField::new(move |_, x| -x + lam, |_, _| -1.0);
        let ic = IntegratorConfig::default();
        let t = period_map(&f, lam, &ic).unwrap().finite().unwrap();
        assert!((t - lam).abs() < 1e-10);
        let t = period_map(&f, 2.0, &ic).unwrap().finite().unwrap();
        assert!((t - (lam + (2.0 - lam) * (-TAU).exp())).abs() < 1e-10);
        let m = period_map_derivative(&f, 1.3, &ic).unwrap();
        assert!((m - (-TAU).exp()).abs() < 1e-10);
    }

    #[test]
    fn identity_and_growth() {
        let ic = IntegratorConfig::default();
        let zero = FnField::new(|_, _| 0.0, |_, _| 0.0);
        assert_eq!(period_map(&zero, 1.25, &ic).unwrap(), MapValue::Finite(1.25));
        let grow = FnField::new(|_, x| x, |_, _| 1.0);
        let m = period_map_derivative(&grow, 0.5, &ic).unwrap();
        assert!((m / TAU.exp() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        // the difference quotient amplifies map errors by 1/h
        let ic = IntegratorConfig::default().with_tolerances(1e-13, 1e-13);
        let model = PeriodicModel::new(D, 0.05, 0.05).with_lambda(0.02);
        for &x in &[-1.5, -0.2, 0.4, 1.1] {
            let h = 1e-6;
            let tp = period_map(&model, x + h, &ic).unwrap().finite().unwrap();
            let tm = period_map(&model, x - h, &ic).unwrap().finite().unwrap();
            let fd = (tp - tm) / (2.0 * h);
            let an = period_map_derivative(&model, x, &ic).unwrap();
            assert!((fd - an).abs() < 1e-5, "x={x}: fd {fd} vs {an}");
        }
    }

    #[test]
    fn fig2_counts() {
        let minus = |g| {
            PeriodicModel::new(D, g, 0.0)
                .with_split(Split::ConcaveLinear)
                .with_lambda(-mu())
        };
        let plus = |g| {
            PeriodicModel::new(D, 0.0, g)
                .with_split(Split::LinearConvex)
                .with_lambda(mu())
        };
        let w = [-30.0, 30.0];
        let s = find_fixed_points(&minus(0.005), w, 200, &cfg()).unwrap();
        assert_eq!(s.count, FixedPointCount::Two);
        assert_eq!(s.points[0].stability, Stability::Repulsive);
        assert_eq!(s.points[1].stability, Stability::Attractive);
        let s = find_fixed_points(&minus(0.05), w, 200, &cfg()).unwrap();
        assert_eq!(s.count, FixedPointCount::Zero);
        let s = find_fixed_points(&plus(0.005), w, 200, &cfg()).unwrap();
        assert_eq!(s.count, FixedPointCount::Two);
        assert_eq!(s.points[0].stability, Stability::Attractive);
        assert_eq!(s.points[1].stability, Stability::Repulsive);
        for p in &s.points {
            let t = period_map(&plus(0.005), p.x_star, &cfg().integrator)
                .unwrap()
                .finite()
                .unwrap();
            assert!((t - p.x_star).abs() < 1e-9);
        }
    }

    #[test]
    fn window_too_small_is_reported() {
        let lam = 5.0;
        let f = FnField::new(move |_, x| -x + lam, |_, _| -1.0);
        let r = find_fixed_points(&f, [-1.0, 1.0], 16, &cfg());
        assert!(matches!(r, Err(Error::WindowTooSmall { .. })));
    }

    #[test]
    fn tangency_pair_below_grid_spacing() {
        // G(x) = (x - 0.3)² - 1e-6 style near-tangency through an autonomous field
        // x' = a(x - c)² - e, whose period map has two close fixed points at c ± √(e/a)
        let f = FnField::new(
            |_, x: f64| 0.05 * ((x - 0.31) * (x - 0.31) - 1e-6),
            |_, x| 0.1 * (x - 0.31),
        );
        let s = find_fixed_points(&f, [-2.0, 2.0], 16, &cfg()).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.points[0].x_star - 0.309).abs() < 1e-8);
        assert!((s.points[1].x_star - 0.311).abs() < 1e-8);
    }
}
