//! Special parameter values of the concave-linear and linear-convex
//! families (`λ₋`, `λ⁺`, `μ₋`, `μ⁺`), the order case they fall into, the
//! bounded solution of the linear part, and shape diagnostics of the Allee
//! model: inflection curve, root/concavity region map and the d-concavity
//! band.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{inflection_point, AlleePredationModel, Decomposition, DrivenField, PeriodicModel, Pivot, Split};
use crate::odeint::{integrate, FnField, IntegratorConfig, ScalarField, Status, Trajectory};
use crate::poincare::{find_fixed_points, PoincareConfig};
use crate::{quad, roots};

/// Required decay of `exp(-∫ d)` over the truncation horizon.
pub const KERNEL_DECAY: f64 = 1e-12;

/// Horizon after which `exp(-d̄·horizon) < 1e-13`.
pub fn horizon_for(d_mean: f64) -> f64 {
    30.0 / d_mean
}

/// Bounded solution of `x' = d(t)·x + c(t) + λ` at one time, with the
/// pieces it was assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSolution {
    pub value: f64,
    /// `∫ K(s)·c(s) ds` with `K(s) = exp(-∫_t^s d)`.
    pub weighted_forcing: f64,
    /// `∫ K(s) ds`.
    pub kernel_mass: f64,
    /// Bound on the error from cutting the improper integral at the horizon.
    pub truncation_bound: f64,
}

struct Weights {
    forcing: f64,
    mass: f64,
    kernel_end: f64,
    d_mean: f64,
}

fn kernel_exponent<D: Fn(f64) -> f64 + Sync>(d: &D, t: f64, horizon: f64) -> Result<Trajectory> {
    let field = FnField::new(|s: f64, _x: f64| d(s), |_, _| 0.0);
    let cfg = IntegratorConfig::default()
        .with_tolerances(1e-13, 1e-13)
        .with_guard(f64::MAX);
    let traj = integrate(&field, t, 0.0, t + horizon, &cfg)?;
    debug_assert!(matches!(traj.status, Status::Completed));
    Ok(traj)
}

fn weights<C, D>(c: &C, d: &D, t: f64, horizon: f64) -> Result<Weights>
where
    C: Fn(f64) -> f64 + Sync,
    D: Fn(f64) -> f64 + Sync,
{
    if !(horizon > 0.0) {
        return Err(Error::Config(format!("horizon must be positive, got {horizon}")));
    }
    let expo = kernel_exponent(d, t, horizon)?;
    let total = expo.x_last();
    let kernel_end = (-total).exp();
    if !(total > 0.0) || kernel_end > KERNEL_DECAY {
        return Err(Error::NonDecayingKernel { achieved: kernel_end });
    }
    let kernel = |s: f64| (-expo.sample(s).unwrap_or(f64::NAN)).exp();
    let pieces = horizon.ceil().max(8.0) as usize;
    let q = |g: &dyn Fn(f64) -> f64| quad::integrate(g, t, t + horizon, pieces, 1e-15, 1e-13, 200_000).value;
    let forcing = q(&|s| kernel(s) * c(s));
    let mass = q(&kernel);
    Ok(Weights {
        forcing,
        mass,
        kernel_end,
        d_mean: total / horizon,
    })
}

/// `b_λ(t) = -∫_t^{t+horizon} exp(-∫_t^s d)·(c(s) + λ) ds`, the unique
/// bounded solution of the linear equation when `d` has positive mean.
///
/// The forcing and unit parts are integrated separately so the result is
/// affine in `λ` to rounding.
pub fn bounded_linear_solution<C, D>(c: C, d: D, lambda: f64, t: f64, horizon: f64) -> Result<LinearSolution>
where
    C: Fn(f64) -> f64 + Sync,
    D: Fn(f64) -> f64 + Sync,
{
    let w = weights(&c, &d, t, horizon)?;
    let sup = roots::linspace(t, t + horizon, 1001)
        .into_iter()
        .map(|s| (c(s) + lambda).abs())
        .fold(0.0, f64::max);
    Ok(LinearSolution {
        value: -(w.forcing + lambda * w.mass),
        weighted_forcing: w.forcing,
        kernel_mass: w.mass,
        truncation_bound: w.kernel_end * sup / w.d_mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MuMethod {
    Quadrature,
    ClosedFormCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuPair {
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub method: MuMethod,
}

/// `μ± = ∓d/√(d²+1)` for `c = cos`, `d` constant.
pub fn mu_closed_form_cosine(d: f64) -> MuPair {
    let m = d / (d * d + 1.0).sqrt();
    MuPair {
        mu_minus: m,
        mu_plus: -m,
        method: MuMethod::ClosedFormCosine,
    }
}

/// `μ₋ = -min_ω R(ω)` and `μ⁺ = -max_ω R(ω)` where `R(ω)` is the
/// kernel-weighted mean of `c(ω + ·)`. The extrema on the grid are refined
/// by golden section to `1e-8` in `ω`.
pub fn compute_mu<C, D>(c: C, d: D, omega_grid: &[f64], horizon: f64) -> Result<MuPair>
where
    C: Fn(f64) -> f64 + Sync,
    D: Fn(f64) -> f64 + Sync,
{
    if omega_grid.len() < 3 {
        return Err(Error::Config("omega grid needs at least 3 points".into()));
    }
    let ratio = |omega: f64| -> Result<f64> {
        let w = weights(&c, &d, omega, horizon)?;
        Ok(w.forcing / w.mass)
    };
    let vals: Vec<f64> = omega_grid.par_iter().map(|&w| ratio(w)).collect::<Result<_>>()?;
    let n = vals.len();
    let refine = |sign: f64| -> Result<f64> {
        let (i, _) = vals
            .iter()
            .enumerate()
            .max_by(|a, b| (sign * a.1).total_cmp(&(sign * b.1)))
            .expect("grid is non-empty");
        let lo = omega_grid[i.saturating_sub(1)];
        let hi = omega_grid[(i + 1).min(n - 1)];
        let err = std::cell::RefCell::new(None);
        let (_, best) = roots::golden_max(
            |w| match ratio(w) {
                Ok(r) => sign * r,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    f64::NEG_INFINITY
                }
            },
            lo,
            hi,
            1e-8,
        );
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        Ok(sign * best.max(sign * vals[i]))
    };
    let max = refine(1.0)?;
    let min = refine(-1.0)?;
    Ok(MuPair {
        mu_minus: -min,
        mu_plus: -max,
        method: MuMethod::Quadrature,
    })
}

/// Grid of `n` angles covering one period `[0, 2π)`.
pub fn omega_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| std::f64::consts::TAU * i as f64 / n as f64).collect()
}

/// `μ` for the cosine-forced family by quadrature on an `n`-point grid.
pub fn mu_cosine(d: f64, n: usize) -> Result<MuPair> {
    compute_mu(f64::cos, move |_| d, &omega_grid(n), horizon_for(d))
}

/// Window and grid used whenever fixed points are counted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub window: [f64; 2],
    pub n_scan: usize,
    pub poincare: PoincareConfig,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            window: [-30.0, 30.0],
            n_scan: 200,
            poincare: PoincareConfig::default(),
        }
    }
}

/// Number of fixed points of the period map of `model`.
pub fn fixed_point_count(model: &PeriodicModel, scan: &ScanSettings) -> Result<usize> {
    Ok(find_fixed_points(model, scan.window, scan.n_scan, &scan.poincare)?.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaPair {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub bracket_width: f64,
}

/// Bisect `λ` on `[lo, hi]` for the boundary between `count = 0` and
/// `count > 0`; `rising` says which side has fixed points.
fn count_boundary(
    model: &PeriodicModel,
    search: [f64; 2],
    tol: f64,
    rising: bool,
    scan: &ScanSettings,
) -> Result<(f64, f64)> {
    let has = |l: f64| -> Result<bool> { Ok(fixed_point_count(&model.with_lambda(l), scan)? > 0) };
    let [mut lo, mut hi] = search;
    let (at_lo, at_hi) = (has(lo)?, has(hi)?);
    if at_lo == at_hi || at_lo == rising {
        let name = if rising { "T-" } else { "T+" };
        return Err(Error::BadBracket(format!(
            "{name}: fixed points at lambda={lo}: {at_lo}, at lambda={hi}: {at_hi}"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if has(mid)? == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((0.5 * (lo + hi), hi - lo))
}

/// `λ₋` (saddle-node of the concave-linear family) and `λ⁺` (of the
/// linear-convex family) for the cubic model with parameters of `base`.
pub fn find_lambda_pair(base: &PeriodicModel, search: [f64; 2], tol: f64, scan: &ScanSettings) -> Result<LambdaPair> {
    if !(search[0] < search[1]) {
        return Err(Error::BadBracket(format!("empty search interval {search:?}")));
    }
    let minus = base.with_split(Split::ConcaveLinear);
    let plus = base.with_split(Split::LinearConvex);
    let (lm, wm) = count_boundary(&minus, search, tol, true, scan)?;
    let (lp, wp) = count_boundary(&plus, search, tol, false, scan)?;
    Ok(LambdaPair {
        lambda_minus: lm,
        lambda_plus: lp,
        bracket_width: wm.max(wp),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    O1,
    O2,
    O3,
    O4,
    O5,
}

/// Fixed-point counts that decided the order case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderEvidence {
    pub minus_at_mu_plus: usize,
    pub plus_at_mu_minus: usize,
    pub minus_at_zero: Option<usize>,
    pub plus_at_zero: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderCase {
    pub case: Order,
    pub evidence: OrderEvidence,
    pub mu: MuPair,
}

/// Relative order of `λ₋, λ⁺, μ₋, μ⁺` read off fixed-point counts:
/// `T⁻` at `μ⁺` and `T⁺` at `μ₋`, then `T⁻`, `T⁺` at `λ = 0` when both
/// of the first counts vanish.
pub fn classify_order(base: &PeriodicModel, mu: &MuPair, scan: &ScanSettings) -> Result<OrderCase> {
    let minus = base.with_split(Split::ConcaveLinear);
    let plus = base.with_split(Split::LinearConvex);
    let mut ev = OrderEvidence {
        minus_at_mu_plus: fixed_point_count(&minus.with_lambda(mu.mu_plus), scan)?,
        plus_at_mu_minus: fixed_point_count(&plus.with_lambda(mu.mu_minus), scan)?,
        minus_at_zero: None,
        plus_at_zero: None,
    };
    let case = match (ev.minus_at_mu_plus, ev.plus_at_mu_minus) {
        (2, 2) => Some(Order::O1),
        (0, 2) => Some(Order::O2),
        (2, 0) => Some(Order::O3),
        (0, 0) => {
            let m0 = fixed_point_count(&minus.with_lambda(0.0), scan)?;
            let p0 = fixed_point_count(&plus.with_lambda(0.0), scan)?;
            ev.minus_at_zero = Some(m0);
            ev.plus_at_zero = Some(p0);
            match (m0, p0) {
                (2, 2) => Some(Order::O4),
                (0, 0) => Some(Order::O5),
                _ => None,
            }
        }
        _ => None,
    };
    match case {
        Some(case) => Ok(OrderCase {
            case,
            evidence: ev,
            mu: *mu,
        }),
        None => Err(Error::Ambiguous(format!("{ev:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflectionSample {
    pub omega: f64,
    pub y: f64,
    pub h_y: f64,
    pub h_yyy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflectionCurve {
    pub samples: Vec<InflectionSample>,
    /// Angles where `h_yy(ω, ·)` had no unique root in `(0, y_max]`.
    pub failures: Vec<f64>,
}

/// The curve `ω ↦ 𝔟(ω)` where `h_yy(ω, 𝔟(ω)) = 0`, with `h_y` and `h_yyy`
/// along it.
pub fn inflection_curve<H: DrivenField>(field: &H, omega_grid: &[f64], y_max: f64) -> InflectionCurve {
    let results: Vec<_> = omega_grid
        .par_iter()
        .map(|&omega| {
            inflection_point(field, omega, y_max).map(|y| {
                let h = field.derivs(omega, y);
                InflectionSample {
                    omega,
                    y,
                    h_y: h[1],
                    h_yyy: h[3],
                }
            })
        })
        .collect();
    let mut curve = InflectionCurve {
        samples: Vec::new(),
        failures: Vec::new(),
    };
    for (r, &omega) in results.into_iter().zip(omega_grid) {
        match r {
            Ok(s) => curve.samples.push(s),
            Err(_) => curve.failures.push(omega),
        }
    }
    curve
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegionClass {
    pub n_roots: usize,
    pub concave_convex: bool,
    pub d_concave: bool,
    /// An extremum of `h` on the grid sits within `1e-9` of zero.
    pub near_degenerate: bool,
}

/// Points used by [`classify_region`] unless told otherwise.
pub const REGION_GRID: usize = 6001;

/// Root count and concavity structure of `y ↦ h(y)` on `probe`, given
/// `[h, h_y, h_yy, h_yyy]`.
pub fn classify_region<H: Fn(f64) -> [f64; 4]>(h: H, probe: [f64; 2], n_grid: usize) -> RegionClass {
    let grid = roots::linspace(probe[0], probe[1], n_grid.max(3));
    let vals: Vec<[f64; 4]> = grid.iter().map(|&y| h(y)).collect();
    let h0: Vec<f64> = vals.iter().map(|v| v[0]).collect();
    let mut n_roots = 0;
    for i in 0..h0.len() {
        let crossing = i + 1 < h0.len() && h0[i + 1] != 0.0 && h0[i].signum() != h0[i + 1].signum();
        if h0[i] == 0.0 || crossing {
            n_roots += 1;
        }
    }
    let near_degenerate = (1..h0.len() - 1).any(|i| {
        let ext = (h0[i] >= h0[i - 1] && h0[i] >= h0[i + 1]) || (h0[i] <= h0[i - 1] && h0[i] <= h0[i + 1]);
        ext && h0[i] != 0.0 && h0[i].abs() < 1e-9
    });
    let hyy: Vec<f64> = vals.iter().map(|v| v[2]).collect();
    let first = hyy.iter().copied().find(|v| *v != 0.0).unwrap_or(0.0);
    let concave_convex = roots::sign_changes(&hyy) == 1 && first > 0.0;
    let d_concave = vals.iter().all(|v| v[3] <= 0.0);
    RegionClass {
        n_roots,
        concave_convex,
        d_concave,
        near_degenerate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub k: f64,
    pub delta: f64,
    pub class: RegionClass,
}

/// Region classes on a `(K, Δ)` grid, `Δ` varying slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub k_values: Vec<f64>,
    pub delta_values: Vec<f64>,
    pub cells: Vec<RegionCell>,
}

impl RegionMap {
    /// Class of the cell whose centre is nearest to `(k, delta)`.
    pub fn class_at(&self, k: f64, delta: f64) -> RegionClass {
        let nearest = |vals: &[f64], x: f64| {
            vals.iter()
                .enumerate()
                .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
                .map(|(i, _)| i)
                .unwrap_or(0)
        };
        let i = nearest(&self.k_values, k);
        let j = nearest(&self.delta_values, delta);
        self.cells[j * self.k_values.len() + i].class
    }
}

/// Classify every `(K, Δ)` pair of an `nk × nd` grid over the given ranges,
/// keeping `r`, `S`, `b` from `model`.
pub fn region_map(
    model: &AlleePredationModel,
    k_range: [f64; 2],
    delta_range: [f64; 2],
    nk: usize,
    nd: usize,
    probe: [f64; 2],
) -> RegionMap {
    let k_values = roots::linspace(k_range[0], k_range[1], nk);
    let delta_values = roots::linspace(delta_range[0], delta_range[1], nd);
    let cells = (0..nk * nd)
        .into_par_iter()
        .map(|idx| {
            let (k, delta) = (k_values[idx % nk], delta_values[idx / nk]);
            let slice = model.at(k, delta);
            RegionCell {
                k,
                delta,
                class: classify_region(|y| slice.derivs(y), probe, REGION_GRID),
            }
        })
        .collect();
    RegionMap {
        k_values,
        delta_values,
        cells,
    }
}

/// Per-angle edges of the d-concavity band and of its strict version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DConcavityBand {
    pub omega_grid: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub alpha_star: Vec<f64>,
    pub beta_star: Vec<f64>,
}

impl DConcavityBand {
    /// Whether `x` lies in the strict band at grid index `i`.
    pub fn strictly_contains(&self, i: usize, x: f64) -> bool {
        self.alpha_star[i] <= x && x <= self.beta_star[i]
    }

    pub fn contains(&self, i: usize, x: f64) -> bool {
        self.alpha[i] <= x && x <= self.beta[i]
    }
}

/// Flat-zero margin for the strict band.
const STRICT_MARGIN: f64 = 1e-12;

/// Outward scan from `0` in direction `sign`; returns `(edge, strict_edge)`.
fn band_edges<G: Fn(f64) -> f64>(gxxx: G, sign: f64, x_max: f64, n_steps: usize) -> (f64, f64) {
    let x = |k: usize| sign * x_max * k as f64 / n_steps as f64;
    let mut strict = None;
    let mut prev = gxxx(0.0);
    for k in 1..=n_steps {
        let v = gxxx(x(k));
        if v > 0.0 {
            let root = roots::bisect(&gxxx, x(k - 1), x(k), 1e-12).unwrap_or(x(k - 1));
            return (root, strict.unwrap_or(root));
        }
        if strict.is_none() && v.abs() <= STRICT_MARGIN && prev.abs() <= STRICT_MARGIN {
            strict = Some(x(k - 1));
        }
        prev = v;
    }
    let edge = sign * x_max;
    (edge, strict.unwrap_or(edge))
}

/// d-concavity band of a nonlinearity given through `g_xxx(ω, x)`: the
/// largest interval around `0` on which `g_x(ω, ·)` is concave, capped at
/// `±x_max`, and its strict counterpart which also excludes runs where
/// `g_xxx` is flat zero.
pub fn dconcavity_band<G: Fn(f64, f64) -> f64 + Sync>(
    gxxx: G,
    omega_grid: &[f64],
    x_max: f64,
    n_steps: usize,
) -> DConcavityBand {
    let edges: Vec<_> = omega_grid
        .par_iter()
        .map(|&w| {
            let (a, a_s) = band_edges(|x| gxxx(w, x), -1.0, x_max, n_steps);
            let (b, b_s) = band_edges(|x| gxxx(w, x), 1.0, x_max, n_steps);
            (a, a_s, b, b_s)
        })
        .collect();
    DConcavityBand {
        omega_grid: omega_grid.to_vec(),
        alpha: edges.iter().map(|e| e.0).collect(),
        alpha_star: edges.iter().map(|e| e.1).collect(),
        beta: edges.iter().map(|e| e.2).collect(),
        beta_star: edges.iter().map(|e| e.3).collect(),
    }
}

/// Band of a decomposition, reading `ω` as the time argument.
pub fn dconcavity_band_of<F: ScalarField, P: Pivot>(
    dec: &Decomposition<F, P>,
    omega_grid: &[f64],
    x_max: f64,
) -> DConcavityBand {
    dconcavity_band(|w, x| dec.g(w, x)[3], omega_grid, x_max, 2000)
}
