//! Concrete equations: the cosine-forced cubic family, the Allee model with
//! Holling type III predation, its transition variant, the heteroclinic
//! driver `ω' = 1 - cos ω`, and the decomposition `f = c + d·x + g` around a
//! pivot curve.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::odeint::ScalarField;
use crate::roots;

/// Which part of the nonlinearity `g` is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Full,
    /// `g⁻ = min(0, g)`
    ConcaveLinear,
    /// `g⁺ = max(0, g)`
    LinearConvex,
}

/// `x' = d·x + cos(t + s) + g(x) + λ` with the piecewise cubic
/// `g(x) = -g₊x³` for `x ≤ 0` and `-g₋x³` for `x ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicModel {
    pub d: f64,
    pub g_minus: f64,
    pub g_plus: f64,
    pub lambda: f64,
    pub phase: f64,
    pub split: Split,
}

impl PeriodicModel {
    pub fn new(d: f64, g_minus: f64, g_plus: f64) -> Self {
        Self {
            d,
            g_minus,
            g_plus,
            lambda: 0.0,
            phase: 0.0,
            split: Split::Full,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.split = split;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    /// Cubic coefficient active at `x` after the split is applied.
    fn coefficient(&self, x: f64) -> f64 {
        match (self.split, x >= 0.0) {
            (Split::Full, true) | (Split::ConcaveLinear, true) => self.g_minus,
            (Split::Full, false) | (Split::LinearConvex, false) => self.g_plus,
            _ => 0.0,
        }
    }

    /// `[g, g', g'', g''']` of the (split) nonlinearity.
    pub fn g_derivs(&self, x: f64) -> [f64; 4] {
        let a = self.coefficient(x);
        [-a * x * x * x, -3.0 * a * x * x, -6.0 * a * x, -6.0 * a]
    }

    pub fn forcing(&self, t: f64) -> f64 {
        (t + self.phase).cos()
    }
}

impl ScalarField for PeriodicModel {
    fn rhs(&self, t: f64, x: f64) -> f64 {
        self.d * x + self.forcing(t) + self.g_derivs(x)[0] + self.lambda
    }
    fn d1(&self, _t: f64, x: f64) -> f64 {
        self.d + self.g_derivs(x)[1]
    }
    fn d2(&self, _t: f64, x: f64) -> Option<f64> {
        Some(self.g_derivs(x)[2])
    }
    fn d3(&self, _t: f64, x: f64) -> Option<f64> {
        Some(self.g_derivs(x)[3])
    }
}

/// `y ↦ r·y·(1 - y/K)·(y - S)/K - Δ·y²/(b + y²)` at frozen `(K, Δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlleeSlice {
    pub r: f64,
    pub s: f64,
    pub b: f64,
    pub k: f64,
    pub delta: f64,
}

/// `[f, f', f'', f''']` of the Holling type III response `y²/(b + y²)`.
pub fn holling3(b: f64, y: f64) -> [f64; 4] {
    let y2 = y * y;
    let q = b + y2;
    [
        y2 / q,
        2.0 * b * y / (q * q),
        2.0 * b * (b - 3.0 * y2) / (q * q * q),
        24.0 * b * y * (y2 - b) / (q * q * q * q),
    ]
}

impl AlleeSlice {
    /// `[P, P', P'', P''']` of the cubic growth term.
    pub fn growth(&self, y: f64) -> [f64; 4] {
        let (r, s, k) = (self.r, self.s, self.k);
        let rk = r / k;
        let q = 1.0 + s / k;
        [
            rk * (-y * y * y / k + q * y * y - s * y),
            rk * (-3.0 * y * y / k + 2.0 * q * y - s),
            rk * (-6.0 * y / k + 2.0 * q),
            -6.0 * r / (k * k),
        ]
    }

    /// `[h, h_y, h_yy, h_yyy]`.
    pub fn derivs(&self, y: f64) -> [f64; 4] {
        let p = self.growth(y);
        let f = holling3(self.b, y);
        [
            p[0] - self.delta * f[0],
            p[1] - self.delta * f[1],
            p[2] - self.delta * f[2],
            p[3] - self.delta * f[3],
        ]
    }

    pub fn value(&self, y: f64) -> f64 {
        self.derivs(y)[0]
    }
}

/// Allee growth with predation whose capacity and predator density are
/// driven by an angle: `K̃(ω) = K0 + K1 cos ω`, `Δ̃(ω) = D0 + D1 sin ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlleePredationModel {
    pub r: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub b: f64,
    #[serde(rename = "K0")]
    pub k0: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "D0")]
    pub d0: f64,
    #[serde(rename = "D1")]
    pub d1: f64,
}

impl Default for AlleePredationModel {
    fn default() -> Self {
        Self {
            r: 3.0,
            s: 0.3,
            b: 620.0,
            k0: 39.3,
            k1: 1.0,
            d0: 39.2,
            d1: 1.0,
        }
    }
}

impl AlleePredationModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.k0 > self.k1.abs()) {
            return Err(Error::Config("need K0 > |K1|".into()));
        }
        if !(self.d0 >= self.d1.abs()) {
            return Err(Error::Config("need D0 >= |D1|".into()));
        }
        if !(self.b > 0.0 && self.r > 0.0) {
            return Err(Error::Config("need r > 0 and b > 0".into()));
        }
        Ok(())
    }

    pub fn capacity(&self, omega: f64) -> f64 {
        self.k0 + self.k1 * omega.cos()
    }

    pub fn predation(&self, omega: f64) -> f64 {
        self.d0 + self.d1 * omega.sin()
    }

    pub fn at_omega(&self, omega: f64) -> AlleeSlice {
        self.at(self.capacity(omega), self.predation(omega))
    }

    pub fn at(&self, k: f64, delta: f64) -> AlleeSlice {
        AlleeSlice {
            r: self.r,
            s: self.s,
            b: self.b,
            k,
            delta,
        }
    }

    /// `[h, h_y, h_yy, h_yyy]` at `(ω, y)`.
    pub fn h(&self, omega: f64, y: f64) -> [f64; 4] {
        self.at_omega(omega).derivs(y)
    }

    /// `∂h_yy/∂ω`, for the implicit-function derivative of the inflection curve.
    pub fn h_yy_omega(&self, omega: f64, y: f64) -> f64 {
        let k = self.capacity(omega);
        let (r, s) = (self.r, self.s);
        let dk = -self.k1 * omega.sin();
        let ddelta = self.d1 * omega.cos();
        // P'' = -6ry/K² + 2r/K + 2rS/K²
        let dp2_dk = 12.0 * r * y / k.powi(3) - 2.0 * r / (k * k) - 4.0 * r * s / k.powi(3);
        dp2_dk * dk - holling3(self.b, y)[2] * ddelta
    }

    /// The unique `y ∈ (0, y_max]` with `h_yy(ω, y) = 0`.
    pub fn inflection_point(&self, omega: f64, y_max: f64) -> Result<f64> {
        inflection_point(self, omega, y_max)
    }
}

/// A scalar right-hand side `h(ω, y)` parametrised by a phase angle.
pub trait DrivenField: Sync {
    /// `[h, h_y, h_yy, h_yyy]` at `(ω, y)`.
    fn derivs(&self, omega: f64, y: f64) -> [f64; 4];
}

impl DrivenField for AlleePredationModel {
    fn derivs(&self, omega: f64, y: f64) -> [f64; 4] {
        self.h(omega, y)
    }
}

/// The unique `y ∈ (0, y_max]` with `h_yy(ω, y) = 0`, located by a
/// 2001-point scan and bisection. Zero or several roots give `NoBracket`.
pub fn inflection_point<H: DrivenField + ?Sized>(field: &H, omega: f64, y_max: f64) -> Result<f64> {
    let hyy = |y: f64| field.derivs(omega, y)[2];
    let roots = roots::scan_roots(hyy, 0.0, y_max, 2001, 1e-13);
    match roots.as_slice() {
        [r] if *r > 0.0 => Ok(*r),
        _ => Err(Error::NoBracket { omega, y_max }),
    }
}

/// Solution of `ω' = 1 - cos ω` through `(t_ref, ω_ref)`, `0 < ω_ref < 2π`.
///
/// The separable equation integrates to `-cot(ω/2) = t + C`, which gives a
/// heteroclinic orbit from `0` (at `t = -∞`) to `2π` (at `t = +∞`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriverOrbit {
    pub t_ref: f64,
    pub omega_ref: f64,
    shift: f64,
}

impl Default for DriverOrbit {
    fn default() -> Self {
        Self::new(-2e5, 1e-5).expect("default anchor is valid")
    }
}

impl DriverOrbit {
    pub fn new(t_ref: f64, omega_ref: f64) -> Result<Self> {
        if !(omega_ref > 0.0 && omega_ref < TAU) || !t_ref.is_finite() {
            return Err(Error::InvalidAnchor(omega_ref));
        }
        let shift = -1.0 / (0.5 * omega_ref).tan() - t_ref;
        Ok(Self {
            t_ref,
            omega_ref,
            shift,
        })
    }

    pub fn omega(&self, t: f64) -> f64 {
        if t == self.t_ref {
            return self.omega_ref;
        }
        // arccot(z) on (0, π) is atan2(1, z)
        2.0 * 1f64.atan2(-(t + self.shift))
    }

    /// `ω̄'(t) = 1 - cos ω̄(t)`, evaluated without cancellation.
    pub fn omega_dot(&self, t: f64) -> f64 {
        let half = 0.5 * self.omega(t);
        2.0 * half.sin().powi(2)
    }
}

/// `Γ(t) = 15 arctan(t+10)/π − 14 arctan(t−10)/π + 1/2`: a positive pulse
/// rising from 0 to a peak slightly above 14 near `t ≈ 0.174`, then settling
/// at 1.
pub fn gamma(t: f64) -> f64 {
    15.0 * (t + 10.0).atan() / PI - 14.0 * (t - 10.0).atan() / PI + 0.5
}

/// Allee model along the driver, with predation raised by `ρ·Γ(t)·f(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionModel {
    pub base: AlleePredationModel,
    pub driver: DriverOrbit,
    pub rho: f64,
    pub clamp_negative: bool,
}

impl TransitionModel {
    pub fn new(base: AlleePredationModel, driver: DriverOrbit, rho: f64) -> Self {
        Self {
            base,
            driver,
            rho,
            clamp_negative: true,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    /// Extra predation `[f, f', f'', f''']`, zero for `y < 0` when clamped.
    fn perturbation(&self, y: f64) -> [f64; 4] {
        if self.clamp_negative && y < 0.0 {
            [0.0; 4]
        } else {
            holling3(self.base.b, y)
        }
    }

    fn derivs(&self, t: f64, y: f64) -> [f64; 4] {
        let h = self.base.h(self.driver.omega(t), y);
        if self.rho == 0.0 {
            return h;
        }
        let w = self.rho * gamma(t);
        let p = self.perturbation(y);
        [h[0] - w * p[0], h[1] - w * p[1], h[2] - w * p[2], h[3] - w * p[3]]
    }

    /// The frozen right-hand side `y ↦ h(ω̄(t), y) - ρΓ(t)f(y)` at time `t`.
    pub fn frozen(&self, t: f64) -> impl Fn(f64) -> f64 + '_ {
        move |y| self.derivs(t, y)[0]
    }
}

impl ScalarField for TransitionModel {
    fn rhs(&self, t: f64, y: f64) -> f64 {
        self.derivs(t, y)[0]
    }
    fn d1(&self, t: f64, y: f64) -> f64 {
        self.derivs(t, y)[1]
    }
    fn d2(&self, t: f64, y: f64) -> Option<f64> {
        Some(self.derivs(t, y)[2])
    }
    fn d3(&self, t: f64, y: f64) -> Option<f64> {
        Some(self.derivs(t, y)[3])
    }
}

/// A time-dependent curve `x = p(t)` used to recentre a field.
pub trait Pivot: Sync {
    fn value(&self, t: f64) -> f64;

    /// `p'(t)`; central differences with step `1e-4` unless overridden.
    fn derivative(&self, t: f64) -> f64 {
        let h = 1e-4;
        (self.value(t + h) - self.value(t - h)) / (2.0 * h)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPivot;

impl Pivot for ZeroPivot {
    fn value(&self, _t: f64) -> f64 {
        0.0
    }
    fn derivative(&self, _t: f64) -> f64 {
        0.0
    }
}

/// Pivot given by a closure; its derivative is finite-differenced.
#[derive(Clone, Copy)]
pub struct FnPivot<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> Pivot for FnPivot<F> {
    fn value(&self, t: f64) -> f64 {
        (self.0)(t)
    }
}

/// The inflection curve `t ↦ 𝔟(ω̄(t))` of the Allee model, with the
/// derivative from the implicit function theorem:
/// `d/dt 𝔟(ω̄(t)) = -(h_yyω / h_yyy)·(1 - cos ω̄(t))`.
#[derive(Debug, Clone, Copy)]
pub struct InflectionPivot {
    pub model: AlleePredationModel,
    pub driver: DriverOrbit,
    pub y_max: f64,
}

impl InflectionPivot {
    pub fn new(model: AlleePredationModel, driver: DriverOrbit) -> Self {
        Self {
            model,
            driver,
            y_max: 50.0,
        }
    }
}

impl Pivot for InflectionPivot {
    fn value(&self, t: f64) -> f64 {
        self.model
            .inflection_point(self.driver.omega(t), self.y_max)
            .unwrap_or(f64::NAN)
    }

    fn derivative(&self, t: f64) -> f64 {
        let omega = self.driver.omega(t);
        let y = self.value(t);
        let dot = -self.model.h_yy_omega(omega, y) / self.model.h(omega, y)[3];
        dot * self.driver.omega_dot(t)
    }
}

/// `f(t, x + p(t)) - p'(t) = c(t) + d(t)·x + g(t, x)` with
/// `g(t, 0) = g_x(t, 0) = 0`. The variant selects `g`, `min(0, g)` or
/// `max(0, g)`; `λ` is added to the right-hand side.
#[derive(Clone)]
pub struct Decomposition<F, P> {
    pub field: F,
    pub pivot: P,
    pub variant: Split,
    pub lambda: f64,
}

const FD_STEP: f64 = 1e-4;

/// Make the decomposition of `field` around `pivot`.
pub fn make_decomposition<F: ScalarField, P: Pivot>(field: F, pivot: P) -> Decomposition<F, P> {
    Decomposition {
        field,
        pivot,
        variant: Split::Full,
        lambda: 0.0,
    }
}

/// `(g⁻, g⁺)` versions of a full decomposition; `g = g⁻ + g⁺` pointwise.
pub fn split_g<F: ScalarField + Clone, P: Pivot + Clone>(
    dec: &Decomposition<F, P>,
) -> Result<(Decomposition<F, P>, Decomposition<F, P>)> {
    if dec.variant != Split::Full {
        return Err(Error::Config("split_g needs a Full decomposition".into()));
    }
    let mut lo = dec.clone();
    lo.variant = Split::ConcaveLinear;
    let mut hi = dec.clone();
    hi.variant = Split::LinearConvex;
    Ok((lo, hi))
}

impl<F: ScalarField, P: Pivot> Decomposition<F, P> {
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn c(&self, t: f64) -> f64 {
        self.field.rhs(t, self.pivot.value(t)) - self.pivot.derivative(t)
    }

    pub fn d(&self, t: f64) -> f64 {
        self.field.d1(t, self.pivot.value(t))
    }

    /// Unsplit `[g, g_x, g_xx, g_xxx]`.
    pub fn g_full(&self, t: f64, x: f64) -> [f64; 4] {
        let p = self.pivot.value(t);
        let y = x + p;
        let c = self.c(t);
        let d = self.d(t);
        let g = self.field.rhs(t, y) - c - d * x - self.pivot.derivative(t);
        let gx = self.field.d1(t, y) - d;
        let gxx = self
            .field
            .d2(t, y)
            .unwrap_or_else(|| (self.field.d1(t, y + FD_STEP) - self.field.d1(t, y - FD_STEP)) / (2.0 * FD_STEP));
        let gxxx = self.field.d3(t, y).unwrap_or_else(|| {
            (self.field.d1(t, y + FD_STEP) - 2.0 * self.field.d1(t, y) + self.field.d1(t, y - FD_STEP))
                / (FD_STEP * FD_STEP)
        });
        [g, gx, gxx, gxxx]
    }

    /// `[g, g_x, g_xx, g_xxx]` after applying the variant.
    pub fn g(&self, t: f64, x: f64) -> [f64; 4] {
        let full = self.g_full(t, x);
        let keep = match self.variant {
            Split::Full => true,
            Split::ConcaveLinear => full[0] < 0.0,
            Split::LinearConvex => full[0] > 0.0,
        };
        if keep {
            full
        } else {
            [0.0; 4]
        }
    }
}

impl<F: ScalarField, P: Pivot> ScalarField for Decomposition<F, P> {
    fn rhs(&self, t: f64, x: f64) -> f64 {
        self.c(t) + self.d(t) * x + self.g(t, x)[0] + self.lambda
    }
    fn d1(&self, t: f64, x: f64) -> f64 {
        self.d(t) + self.g(t, x)[1]
    }
    fn d2(&self, t: f64, x: f64) -> Option<f64> {
        Some(self.g(t, x)[2])
    }
    fn d3(&self, t: f64, x: f64) -> Option<f64> {
        Some(self.g(t, x)[3])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odeint::FnField;

    #[test]
    fn driver_reproduces_anchor() {
        let drv = DriverOrbit::new(0.0, PI).unwrap();
        assert_eq!(drv.omega(0.0), PI);
        assert!(drv.omega(1e6) > TAU - 1e-5);
        assert!(drv.omega(-1e6) < 1e-5);
        let def = DriverOrbit::default();
        assert!((def.omega(-2e5) - 1e-5).abs() < 1e-12);
        assert!((def.omega(-2e5 + 1e-3) - 1e-5).abs() < 1e-12);
    }

    #[test]
    fn driver_rejects_bad_anchor() {
        assert!(matches!(DriverOrbit::new(0.0, 0.0), Err(Error::InvalidAnchor(_))));
        assert!(matches!(DriverOrbit::new(0.0, TAU), Err(Error::InvalidAnchor(_))));
    }

    #[test]
    fn driver_solves_its_ode() {
        let drv = DriverOrbit::new(0.0, PI).unwrap();
        for &t in &[-50.0, -3.0, -0.4, 0.0, 0.7, 2.0, 9.0, 120.0] {
            let h = 1e-5;
            let fd = (drv.omega(t + h) - drv.omega(t - h)) / (2.0 * h);
            let ode = 1.0 - drv.omega(t).cos();
            assert!((fd - ode).abs() < 1e-10, "t={t}: {fd} vs {ode}");
        }
    }

    #[test]
    fn gamma_limits_and_peak() {
        assert!(gamma(-1e6) < 1e-4);
        assert!((gamma(1e6) - 1.0).abs() < 1e-4);
        let (mut best_t, mut best) = (0.0, f64::MIN);
        for i in 0..=20000 {
            let t = -5.0 + 10.0 * i as f64 / 20000.0;
            if gamma(t) > best {
                best = gamma(t);
                best_t = t;
            }
        }
        assert!((0.1..=0.25).contains(&best_t), "argmax {best_t}");
        assert!(best > 14.0 && best < 14.1, "max {best}");
    }

    #[test]
    fn periodic_split_matches_min_max_of_g() {
        let m = PeriodicModel::new(0.1, 0.05, 0.02);
        for i in -20..=20 {
            let x = 0.37 * i as f64;
            let g = m.g_derivs(x)[0];
            let lo = m.with_split(Split::ConcaveLinear).g_derivs(x)[0];
            let hi = m.with_split(Split::LinearConvex).g_derivs(x)[0];
            assert_eq!(lo, g.min(0.0));
            assert_eq!(hi, g.max(0.0));
            assert_eq!(lo + hi, g);
        }
        let z = m.g_derivs(0.0);
        assert_eq!(z[..3], [0.0, 0.0, 0.0]);
    }

    #[test]
    fn holling_derivatives_match_differences() {
        let b = 620.0;
        for &y in &[0.5, 3.0, 14.0, 25.0, 40.0] {
            let h = 1e-4;
            let f = |y| holling3(b, y);
            for k in 0..3 {
                let fd = (f(y + h)[k] - f(y - h)[k]) / (2.0 * h);
                let an = f(y)[k + 1];
                assert!((fd - an).abs() < 1e-8 * (1.0 + an.abs()), "k={k} y={y}");
            }
        }
    }

    #[test]
    fn allee_slice_derivatives_match_differences() {
        let m = AlleePredationModel::default();
        let s = m.at_omega(0.9);
        for &y in &[0.2, 2.0, 8.0, 19.0, 33.0] {
            let h = 1e-4;
            for k in 0..3 {
                let fd = (s.derivs(y + h)[k] - s.derivs(y - h)[k]) / (2.0 * h);
                let an = s.derivs(y)[k + 1];
                assert!((fd - an).abs() < 1e-7 * (1.0 + an.abs()), "k={k} y={y}");
            }
        }
    }

    #[test]
    fn inflection_pivot_derivative_matches_differences() {
        let pivot = InflectionPivot::new(AlleePredationModel::default(), DriverOrbit::new(0.0, PI).unwrap());
        for &t in &[-3.0, -0.5, 0.0, 0.8, 4.0] {
            let h = 1e-4;
            let fd = (pivot.value(t + h) - pivot.value(t - h)) / (2.0 * h);
            assert!((fd - pivot.derivative(t)).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn cubic_with_zero_pivot() {
        let f = FnField::new(|_, x: f64| x * x * x, |_, x| 3.0 * x * x);
        let dec = make_decomposition(f, ZeroPivot);
        for &t in &[0.0, 1.5] {
            assert_eq!(dec.c(t), 0.0);
            assert_eq!(dec.d(t), 0.0);
            for &x in &[-2.0, 0.5, 3.0] {
                assert!((dec.g(t, x)[0] - x * x * x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn periodic_model_is_already_decomposed() {
        let m = PeriodicModel::new(0.1, 0.05, 0.02).with_lambda(0.3).with_phase(0.4);
        let dec = make_decomposition(m, ZeroPivot);
        for &t in &[0.0, 1.0, 4.0] {
            assert!((dec.c(t) - ((t + 0.4).cos() + 0.3)).abs() < 1e-14);
            assert!((dec.d(t) - 0.1).abs() < 1e-14);
            for &x in &[-3.0, -0.1, 0.0, 2.0] {
                assert!((dec.g(t, x)[0] - m.g_derivs(x)[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn split_of_cubic_and_of_zero() {
        let f = FnField::new(|_, x: f64| -x * x * x, |_, x| -3.0 * x * x);
        let dec = make_decomposition(f, ZeroPivot);
        let (lo, hi) = split_g(&dec).unwrap();
        for &x in &[-2.0, -0.5, 0.0, 0.5, 2.0] {
            let g = -x * x * x;
            assert_eq!(lo.g(0.0, x)[0], if x >= 0.0 { g } else { 0.0 });
            assert_eq!(hi.g(0.0, x)[0], if x <= 0.0 { g } else { 0.0 });
        }
        assert!(split_g(&lo).is_err());

        let zero = make_decomposition(FnField::new(|_, _| 0.0, |_, _| 0.0), ZeroPivot);
        let (lo, hi) = split_g(&zero).unwrap();
        assert_eq!(lo.g(0.0, 1.0)[0], 0.0);
        assert_eq!(hi.g(0.0, -1.0)[0], 0.0);
    }

    #[test]
    fn transition_with_zero_rho_is_the_base_model() {
        let base = AlleePredationModel::default();
        let drv = DriverOrbit::default();
        let m = TransitionModel::new(base, drv, 0.0);
        for &t in &[-1e5, -3.0, 0.0, 2.0, 1e4] {
            for &y in &[-1.0, 0.0, 3.0, 30.0] {
                assert_eq!(m.rhs(t, y), base.h(drv.omega(t), y)[0]);
            }
        }
    }

    #[test]
    fn clamp_removes_perturbation_below_zero() {
        let m = TransitionModel::new(AlleePredationModel::default(), DriverOrbit::default(), 0.5);
        let base = m.base.h(m.driver.omega(0.0), -2.0)[0];
        assert_eq!(m.rhs(0.0, -2.0), base);
        assert!(m.rhs(0.0, 2.0) < m.base.h(m.driver.omega(0.0), 2.0)[0]);
        assert_eq!(m.rhs(0.0, 0.0), 0.0);
    }
}
