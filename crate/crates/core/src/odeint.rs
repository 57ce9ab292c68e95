//! Adaptive Dormand-Prince 5(4) integration of scalar nonautonomous ODEs
//! `x' = f(t, x)` with native dense output and a blow-up guard.
//!
//! The solver is deliberately one-dimensional: every model in this crate is
//! a scalar equation whose time dependence is carried by closed-form driver
//! functions, so there is no need for a vector state.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A time-dependent scalar vector field together with its partial
/// derivatives in the state variable.
pub trait ScalarField: Sync {
    fn rhs(&self, t: f64, x: f64) -> f64;

    /// `∂f/∂x`.
    fn d1(&self, t: f64, x: f64) -> f64;

    /// `∂²f/∂x²`, when the model provides it.
    fn d2(&self, _t: f64, _x: f64) -> Option<f64> {
        None
    }

    /// `∂³f/∂x³`, when the model provides it.
    fn d3(&self, _t: f64, _x: f64) -> Option<f64> {
        None
    }
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn rhs(&self, t: f64, x: f64) -> f64 {
        (**self).rhs(t, x)
    }
    fn d1(&self, t: f64, x: f64) -> f64 {
        (**self).d1(t, x)
    }
    fn d2(&self, t: f64, x: f64) -> Option<f64> {
        (**self).d2(t, x)
    }
    fn d3(&self, t: f64, x: f64) -> Option<f64> {
        (**self).d3(t, x)
    }
}

/// Closure-backed field, mostly useful for analytic test problems.
#[derive(Clone, Copy)]
pub struct FnField<F, D> {
    rhs: F,
    d1: D,
}

impl<F, D> FnField<F, D>
where
    F: Fn(f64, f64) -> f64 + Sync,
    D: Fn(f64, f64) -> f64 + Sync,
{
    pub fn new(rhs: F, d1: D) -> Self {
        Self { rhs, d1 }
    }
}

impl<F, D> ScalarField for FnField<F, D>
where
    F: Fn(f64, f64) -> f64 + Sync,
    D: Fn(f64, f64) -> f64 + Sync,
{
    fn rhs(&self, t: f64, x: f64) -> f64 {
        (self.rhs)(t, x)
    }
    fn d1(&self, t: f64, x: f64) -> f64 {
        (self.d1)(t, x)
    }
}

/// Tolerances, step bounds and the escape threshold used to declare blow-up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// `|x|` beyond this value counts as escape to `±∞`.
    pub x_guard: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            h_init: 1e-2,
            h_min: 1e-12,
            h_max: f64::INFINITY,
            x_guard: 1e7,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    pub fn with_guard(mut self, x_guard: f64) -> Self {
        self.x_guard = x_guard;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.abs_tol > 0.0) {
            return bad("abs_tol must be positive");
        }
        if !(self.rel_tol > 0.0) {
            return bad("rel_tol must be positive");
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return bad("need 0 < h_min <= h_init <= h_max");
        }
        if !(self.x_guard > 0.0) {
            return bad("x_guard must be positive");
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Stages {
    k: [f64; 7],
    x_new: f64,
    err: f64,
}

fn checked<F: ScalarField + ?Sized>(f: &F, t: f64, x: f64) -> Result<f64> {
    let v = f.rhs(t, x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteEvaluation { t, x })
    }
}

fn dp_stages<F: ScalarField + ?Sized>(f: &F, t: f64, x: f64, k1: f64, h: f64) -> Result<Stages> {
    let k2 = checked(f, t + C2 * h, x + h * A21 * k1)?;
    let k3 = checked(f, t + C3 * h, x + h * (A31 * k1 + A32 * k2))?;
    let k4 = checked(f, t + C4 * h, x + h * (A41 * k1 + A42 * k2 + A43 * k3))?;
    let k5 = checked(f, t + C5 * h, x + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))?;
    let k6 = checked(f, t + h, x + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))?;
    let x_new = x + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
    let k7 = checked(f, t + h, x_new)?;
    let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    Ok(Stages {
        k: [k1, k2, k3, k4, k5, k6, k7],
        x_new,
        err,
    })
}

/// One Dormand-Prince step from `(t, x)` with step `h`.
///
/// Returns the fifth-order estimate and the difference between the fifth-
/// and fourth-order solutions.
pub fn step_embedded<F: ScalarField + ?Sized>(f: &F, t: f64, x: f64, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0) || !t.is_finite() || !x.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "step_embedded needs h > 0 and finite inputs (t={t}, x={x}, h={h})"
        )));
    }
    let k1 = checked(f, t, x)?;
    let s = dp_stages(f, t, x, k1, h)?;
    Ok((s.x_new, s.err))
}

/// One accepted step with its fifth-order continuous extension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub x_start: f64,
    pub x_end: f64,
    coeffs: [f64; 5],
}

impl Segment {
    fn new(t: f64, x: f64, h: f64, s: &Stages) -> Self {
        let [k1, _, k3, k4, k5, k6, k7] = s.k;
        let ydiff = s.x_new - x;
        let bspl = h * k1 - ydiff;
        Self {
            t_start: t,
            t_end: t + h,
            x_start: x,
            x_end: s.x_new,
            coeffs: [
                x,
                ydiff,
                bspl,
                ydiff - h * k7 - bspl,
                h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
            ],
        }
    }

    pub fn lo(&self) -> f64 {
        self.t_start.min(self.t_end)
    }

    pub fn hi(&self) -> f64 {
        self.t_start.max(self.t_end)
    }

    /// Dense value at `t`; node times return the stored states exactly.
    pub fn eval(&self, t: f64) -> f64 {
        if t == self.t_start {
            return self.x_start;
        }
        if t == self.t_end {
            return self.x_end;
        }
        let theta = (t - self.t_start) / (self.t_end - self.t_start);
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = self.coeffs;
        r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    PlusInfinity,
    MinusInfinity,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::PlusInfinity => 1.0,
            Direction::MinusInfinity => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Status {
    Completed,
    /// `|x|` first exceeded the guard at `t_escape`.
    BlewUp {
        t_escape: f64,
        direction: Direction,
    },
    /// The step observer asked to stop at `t`.
    Stopped {
        t: f64,
    },
}

/// Result of a streamed integration: where it ended and why.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub t_last: f64,
    pub x_last: f64,
    pub steps: usize,
}

/// Dense solution of a scalar initial value problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub t0: f64,
    pub x0: f64,
    pub status: Status,
    segments: Vec<Segment>,
}

impl Trajectory {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Covered interval `[lo, hi]` regardless of integration direction.
    pub fn span(&self) -> (f64, f64) {
        match (self.segments.first(), self.segments.last()) {
            (Some(a), Some(b)) => (a.lo().min(b.lo()), a.hi().max(b.hi())),
            _ => (self.t0, self.t0),
        }
    }

    pub fn t_last(&self) -> f64 {
        self.segments.last().map_or(self.t0, |s| s.t_end)
    }

    pub fn x_last(&self) -> f64 {
        self.segments.last().map_or(self.x0, |s| s.x_end)
    }

    pub fn is_completed(&self) -> bool {
        matches!(self.status, Status::Completed)
    }

    /// Interpolated state at `t`.
    pub fn sample(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.span();
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        if self.segments.is_empty() {
            return Ok(self.x0);
        }
        let forward = self.segments[0].t_end > self.segments[0].t_start;
        // segments are ordered along the integration direction
        let idx = if forward {
            self.segments.partition_point(|s| s.t_end < t)
        } else {
            self.segments.partition_point(|s| s.t_end > t)
        };
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        Ok(seg.eval(t))
    }

    /// Stored node times and states, in integration order.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        out.push((self.t0, self.x0));
        out.extend(self.segments.iter().map(|s| (s.t_end, s.x_end)));
        out
    }
}

const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FACC1: f64 = 5.0; // max shrink 1/0.2
const FACC2: f64 = 0.1; // max growth 1/10

/// Integrate `x' = f(t, x)` from `(t0, x0)` to `t1` and keep the dense output.
pub fn integrate<F: ScalarField + ?Sized>(
    f: &F,
    t0: f64,
    x0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let mut segments = Vec::new();
    let outcome = integrate_observed(f, t0, x0, t1, cfg, |seg| {
        segments.push(*seg);
        ControlFlow::Continue(())
    })?;
    Ok(Trajectory {
        t0,
        x0,
        status: outcome.status,
        segments,
    })
}

/// Streaming variant of [`integrate`]: every accepted step is handed to
/// `observer`, which may stop the run early. Nothing is stored.
pub fn integrate_observed<F, O>(
    f: &F,
    t0: f64,
    x0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    mut observer: O,
) -> Result<Outcome>
where
    F: ScalarField + ?Sized,
    O: FnMut(&Segment) -> ControlFlow<()>,
{
    cfg.validate()?;
    if t1 == t0 || !t0.is_finite() || !t1.is_finite() || !x0.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "need finite t0 != t1 and finite x0 (t0={t0}, t1={t1}, x0={x0})"
        )));
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();

    let mut t = t0;
    let mut x = x0;
    let mut k1 = checked(f, t, x)?;
    let mut h = cfg.h_init.min(cfg.h_max).min(span);
    let mut facold = 1e-4_f64;
    let mut last_rejected = false;
    let mut steps = 0usize;

    if x.abs() > cfg.x_guard {
        return Ok(Outcome {
            status: Status::BlewUp {
                t_escape: t,
                direction: escape_direction(x),
            },
            t_last: t,
            x_last: x,
            steps,
        });
    }

    loop {
        let remaining = (t1 - t).abs();
        let mut last = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last = true;
        }
        let hs = dir * h;
        if t + hs == t {
            return Err(Error::StepUnderflow { t, h_min: cfg.h_min });
        }

        let trial = dp_stages(f, t, x, k1, hs);
        let (stages, err) = match trial {
            Ok(s) => {
                let sk = cfg.abs_tol + cfg.rel_tol * x.abs().max(s.x_new.abs());
                let e = (s.err / sk).abs();
                (Some(s), e)
            }
            Err(Error::NonFiniteEvaluation { .. }) => (None, f64::INFINITY),
            Err(e) => return Err(e),
        };

        if err <= 1.0 {
            let s = stages.expect("accepted step has stages");
            let fac11 = err.powf(EXPO1);
            let mut fac = fac11 / facold.powf(BETA);
            facold = err.max(1e-4);
            fac = (fac / SAFE).clamp(FACC2, FACC1);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;

            let t_new = if last { t1 } else { t + hs };
            let mut seg = Segment::new(t, x, hs, &s);
            seg.t_end = t_new;
            steps += 1;

            if s.x_new.abs() > cfg.x_guard || !s.x_new.is_finite() {
                let t_escape = locate_escape(&seg, cfg.x_guard);
                let _ = observer(&seg);
                return Ok(Outcome {
                    status: Status::BlewUp {
                        t_escape,
                        direction: escape_direction(s.x_new),
                    },
                    t_last: t_new,
                    x_last: s.x_new,
                    steps,
                });
            }
            let flow = observer(&seg);
            t = t_new;
            x = s.x_new;
            k1 = s.k[6];
            if flow.is_break() {
                return Ok(Outcome {
                    status: Status::Stopped { t },
                    t_last: t,
                    x_last: x,
                    steps,
                });
            }
            if last {
                return Ok(Outcome {
                    status: Status::Completed,
                    t_last: t,
                    x_last: x,
                    steps,
                });
            }
            h = h_new.min(cfg.h_max);
        } else {
            let shrink = if err.is_finite() {
                (err.powf(EXPO1) / SAFE).min(FACC1)
            } else {
                FACC1
            };
            h /= shrink;
            last_rejected = true;
            if h < cfg.h_min {
                return Err(Error::StepUnderflow { t, h_min: cfg.h_min });
            }
        }
    }
}

fn escape_direction(x: f64) -> Direction {
    if x > 0.0 {
        Direction::PlusInfinity
    } else {
        Direction::MinusInfinity
    }
}

/// First time inside `seg` at which the dense solution leaves `[-guard, guard]`.
fn locate_escape(seg: &Segment, guard: f64) -> f64 {
    if seg.x_start.abs() > guard {
        return seg.t_start;
    }
    let mut a = seg.t_start;
    let mut b = seg.t_end;
    let outside = |t: f64| {
        let v = seg.eval(t);
        !v.is_finite() || v.abs() > guard
    };
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if outside(m) {
            b = m;
        } else {
            a = m;
        }
    }
    b
}

/// Five-point Gauss-Legendre rule on `[-1, 1]`.
pub(crate) const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
pub(crate) const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// `∫ g(t, x(t)) dt` over `[a, b]` along the dense solution, with a
/// Gauss-Legendre rule on every step piece. `a` and `b` may be in any order.
pub fn integrate_along<G: Fn(f64, f64) -> f64>(traj: &Trajectory, a: f64, b: f64, g: G) -> Result<f64> {
    let (lo, hi) = (a.min(b), a.max(b));
    let (tlo, thi) = traj.span();
    if lo < tlo || hi > thi {
        return Err(Error::OutOfRange {
            t: if lo < tlo { lo } else { hi },
            lo: tlo,
            hi: thi,
        });
    }
    let mut total = 0.0;
    for seg in traj.segments() {
        let s_lo = seg.lo().max(lo);
        let s_hi = seg.hi().min(hi);
        if s_hi <= s_lo {
            continue;
        }
        total += gauss_piece(seg, s_lo, s_hi, &g);
    }
    Ok(if b >= a { total } else { -total })
}

pub(crate) fn gauss_piece<G: Fn(f64, f64) -> f64>(seg: &Segment, lo: f64, hi: f64, g: &G) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS.iter())
        .map(|(&n, &w)| {
            let t = mid + half * n;
            w * g(t, seg.eval(t))
        })
        .sum::<f64>()
        * half
}
