//! Concave-convex cubic regression splines for per-capita growth data.
//!
//! The basis functions `C_i` are double antiderivatives of piecewise-linear
//! hats `M_i`: hats supported on `[0, a]` give convex `C_i` with slope 1 on
//! `[a, b]`, negative hats on `[a, b]` give concave `C_i` vanishing on
//! `[0, a]`, and `C₀(x) = x` carries the linear trend. Any combination with
//! non-negative coefficients on `C₁…` is convex then concave.

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;

/// One cubic piece `c0 + c1·u + c2·u² + c3·u³` with `u = x - t_k`.
type Cubic = [f64; 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineBasis {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub n: usize,
    pub knots: Vec<f64>,
    /// `hats[i][k] = M_i(t_k)` for `i ≥ 1`; row 0 is all zeros.
    hats: Vec<Vec<f64>>,
    /// `pieces[i][k]` is `C_i` on `[t_k, t_{k+1}]`.
    pieces: Vec<Vec<Cubic>>,
}

impl SplineBasis {
    pub fn len(&self) -> usize {
        self.m + self.n + 3
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `M_i(x)` by linear interpolation of the knot values.
    pub fn hat(&self, i: usize, x: f64) -> Result<f64> {
        let k = self.interval(x)?;
        let (t0, t1) = (self.knots[k], self.knots[k + 1]);
        let w = (x - t0) / (t1 - t0);
        Ok(self.hats[i][k] * (1.0 - w) + self.hats[i][k + 1] * w)
    }

    fn interval(&self, x: f64) -> Result<usize> {
        if !(x >= 0.0 && x <= self.b) {
            return Err(Error::OutOfDomain { x, b: self.b });
        }
        let k = self.knots.partition_point(|&t| t <= x);
        Ok(k.saturating_sub(1).min(self.knots.len() - 2))
    }

    /// `[C_i(x), C_i'(x), C_i''(x)]`.
    pub fn eval(&self, i: usize, x: f64) -> Result<[f64; 3]> {
        let k = self.interval(x)?;
        let u = x - self.knots[k];
        let [c0, c1, c2, c3] = self.pieces[i][k];
        Ok([
            c0 + u * (c1 + u * (c2 + u * c3)),
            c1 + u * (2.0 * c2 + 3.0 * u * c3),
            2.0 * c2 + 6.0 * u * c3,
        ])
    }

    /// Row `(C_0(x), …, C_{m+n+2}(x))` of the design matrix.
    pub fn row(&self, x: f64) -> Result<Vec<f64>> {
        (0..self.len()).map(|i| Ok(self.eval(i, x)?[0])).collect()
    }
}

/// Basis on `[0, b]` with `m` interior knots in `(0, a)` and `n` in `(a, b)`.
pub fn build_basis(a: f64, b: f64, m: usize, n: usize) -> Result<SplineBasis> {
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::InvalidGeometry(format!("need 0 < a < b, got a={a}, b={b}")));
    }
    let h = a / (m + 1) as f64;
    let ht = (b - a) / (n + 1) as f64;
    let mut knots: Vec<f64> = (0..=m + 1).map(|i| if i == m + 1 { a } else { i as f64 * h }).collect();
    knots.extend((1..=n + 1).map(|j| if j == n + 1 { b } else { a + j as f64 * ht }));
    let nk = knots.len();
    let size = m + n + 3;
    debug_assert_eq!(nk, size);

    let mut hats = vec![vec![0.0; nk]; size];
    hats[1][0] = 2.0 / h;
    for i in 2..=m + 1 {
        hats[i][i - 1] = 1.0 / h;
    }
    for (i, hat) in hats.iter_mut().enumerate().take(m + n + 2).skip(m + 2) {
        hat[i] = -1.0 / ht;
    }
    hats[m + n + 2][nk - 1] = -2.0 / ht;

    let mut pieces = Vec::with_capacity(size);
    pieces.push(knots[..nk - 1].iter().map(|&t| [t, 1.0, 0.0, 0.0]).collect());
    for hat in hats.iter().skip(1) {
        pieces.push(double_integral(&knots, hat));
    }
    Ok(SplineBasis {
        a,
        b,
        m,
        n,
        knots,
        hats,
        pieces,
    })
}

/// Exact `∫₀^x ∫₀^y M` of the piecewise-linear `M` with knot values `vals`.
fn double_integral(knots: &[f64], vals: &[f64]) -> Vec<Cubic> {
    let (mut c, mut dc) = (0.0, 0.0);
    let mut out = Vec::with_capacity(knots.len() - 1);
    for k in 0..knots.len() - 1 {
        let len = knots[k + 1] - knots[k];
        let (m0, m1) = (vals[k], vals[k + 1]);
        let slope = (m1 - m0) / len;
        out.push([c, dc, 0.5 * m0, slope / 6.0]);
        c += dc * len + 0.5 * m0 * len * len + slope * len * len * len / 6.0;
        dc += 0.5 * (m0 + m1) * len;
    }
    out
}

/// Growth-rate observations `(x_j, y_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthDataset {
    pub points: Vec<(f64, f64)>,
    /// Raw generation pairs the points were computed from, if any.
    pub provenance: Option<Vec<(f64, f64)>>,
    /// Rows dropped because the next generation was extinct.
    pub excluded_rows: usize,
}

impl GrowthDataset {
    pub fn direct(points: Vec<(f64, f64)>) -> Self {
        Self {
            points,
            provenance: None,
            excluded_rows: 0,
        }
    }
}

/// `(P_t, P_{t+1})` pairs to `(P_t, P_t·ln(P_{t+1}/P_t))`, dropping rows
/// with an extinct next generation.
pub fn ingest_generations(rows: &[(f64, f64)]) -> Result<GrowthDataset> {
    let mut points = Vec::with_capacity(rows.len());
    let mut kept = Vec::with_capacity(rows.len());
    let mut excluded = 0;
    for (row, &(p, next)) in rows.iter().enumerate() {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::NonPositiveCurrentGeneration { row, value: p });
        }
        if next == 0.0 {
            excluded += 1;
            continue;
        }
        if !(next > 0.0) || !next.is_finite() {
            return Err(Error::Config(format!(
                "row {row}: next generation {next} is not a population size"
            )));
        }
        points.push((p, p * (next / p).ln()));
        kept.push((p, next));
    }
    Ok(GrowthDataset {
        points,
        provenance: Some(kept),
        excluded_rows: excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsvMode {
    /// Columns `p_t,p_t1`.
    Generations,
    /// Columns `x,y`.
    Direct,
}

#[derive(Deserialize)]
struct GenerationRow {
    p_t: f64,
    p_t1: f64,
}

#[derive(Deserialize)]
struct DirectRow {
    x: f64,
    y: f64,
}

/// Parse a headed CSV in either column layout.
pub fn read_dataset<R: Read>(reader: R, mode: CsvMode) -> Result<GrowthDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    match mode {
        CsvMode::Generations => {
            let rows = rdr
                .deserialize::<GenerationRow>()
                .map(|r| r.map(|r| (r.p_t, r.p_t1)))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            ingest_generations(&rows)
        }
        CsvMode::Direct => {
            let points = rdr
                .deserialize::<DirectRow>()
                .map(|r| r.map(|r| (r.x, r.y)))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if let Some((row, &(x, _))) = points.iter().enumerate().find(|(_, p)| !(p.0 >= 0.0)) {
                return Err(Error::Config(format!("row {row}: population size {x} is negative")));
            }
            Ok(GrowthDataset::direct(points))
        }
    }
}

pub fn read_dataset_file(path: &Path, mode: CsvMode) -> Result<GrowthDataset> {
    read_dataset(std::fs::File::open(path)?, mode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineFit {
    pub basis: SplineBasis,
    pub alpha: Vec<f64>,
    pub sse: f64,
    /// Indices `i ≥ 1` held at the lower bound.
    pub active_set: Vec<usize>,
    pub lb: f64,
}

impl SplineFit {
    /// `[θ(x), θ'(x), θ''(x)]`.
    pub fn eval(&self, x: f64) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (i, &a) in self.alpha.iter().enumerate() {
            let c = self.basis.eval(i, x)?;
            for j in 0..3 {
                out[j] += a * c[j];
            }
        }
        Ok(out)
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?[0])
    }
}

/// `θ(x) = Σ α_i C_i(x)` for arbitrary coefficients.
pub fn eval_spline(basis: &SplineBasis, alpha: &[f64], x: f64) -> Result<[f64; 3]> {
    if alpha.len() != basis.len() {
        return Err(Error::Config(format!(
            "expected {} coefficients, got {}",
            basis.len(),
            alpha.len()
        )));
    }
    let mut out = [0.0; 3];
    for (i, &a) in alpha.iter().enumerate() {
        let c = basis.eval(i, x)?;
        for j in 0..3 {
            out[j] += a * c[j];
        }
    }
    Ok(out)
}

/// Least-squares solve restricted to the columns in `cols`.
fn solve_subset(a: &DMatrix<f64>, y: &DVector<f64>, cols: &[usize]) -> DVector<f64> {
    let sub = a.select_columns(cols);
    let svd = sub.svd(true, true);
    svd.solve(y, 1e-14).expect("SVD with both factors computed")
}

/// `min ‖y - Aβ‖` subject to `β_i ≥ 0` for `i ∈ bounded`, the others
/// free, by the Lawson-Hanson active-set method.
fn bvls(a: &DMatrix<f64>, y: &DVector<f64>, bounded: &[bool]) -> DVector<f64> {
    let p = a.ncols();
    let mut beta = DVector::zeros(p);
    let mut passive: Vec<bool> = bounded.iter().map(|b| !b).collect();
    let scale = a.norm() * y.norm().max(1.0);
    let tol = 10.0 * f64::EPSILON * scale;

    let solve = |passive: &[bool]| -> (Vec<usize>, DVector<f64>) {
        let cols: Vec<usize> = (0..p).filter(|&j| passive[j]).collect();
        let z = if cols.is_empty() {
            DVector::zeros(0)
        } else {
            solve_subset(a, y, &cols)
        };
        (cols, z)
    };

    if passive.iter().any(|&f| f) {
        let (cols, z) = solve(&passive);
        for (k, &j) in cols.iter().enumerate() {
            beta[j] = z[k];
        }
    }
    for _outer in 0..(3 * p + 10) {
        let w = a.transpose() * (y - a * &beta);
        let candidate = (0..p)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        for _inner in 0..(3 * p + 10) {
            let (cols, z) = solve(&passive);
            let infeasible: Vec<usize> = (0..cols.len()).filter(|&k| bounded[cols[k]] && z[k] <= 0.0).collect();
            if infeasible.is_empty() {
                beta.fill(0.0);
                for (k, &c) in cols.iter().enumerate() {
                    beta[c] = z[k];
                }
                break;
            }
            let (step, hit) = infeasible
                .iter()
                .map(|&k| {
                    let c = cols[k];
                    (beta[c] / (beta[c] - z[k]), c)
                })
                .fold((f64::INFINITY, usize::MAX), |acc, v| if v.0 < acc.0 { v } else { acc });
            for (k, &c) in cols.iter().enumerate() {
                beta[c] += step * (z[k] - beta[c]);
            }
            for &c in &cols {
                if bounded[c] && (c == hit || beta[c] <= 0.0) {
                    passive[c] = false;
                    beta[c] = 0.0;
                }
            }
        }
    }
    beta
}

/// Bounded least-squares fit of `θ` to `data` with `α_i ≥ lb` for
/// `i ≥ 1` and `α₀` free.
///
/// Rows are put in a canonical order first, so permuting the data does not
/// change a single bit of the result.
pub fn fit(basis: &SplineBasis, data: &GrowthDataset, lb: f64) -> Result<SplineFit> {
    if !lb.is_finite() {
        return Err(Error::Config(format!("lower bound must be finite, got {lb}")));
    }
    let mut pts = data.points.clone();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    let p = basis.len();
    let rows: Vec<Vec<f64>> = pts.iter().map(|&(x, _)| basis.row(x)).collect::<Result<_>>()?;
    let a = DMatrix::from_fn(pts.len(), p, |r, c| rows[r][c]);
    let y = DVector::from_iterator(pts.len(), pts.iter().map(|q| q.1));

    let rank = if pts.len() < p {
        pts.len()
    } else {
        let sv = a.clone().svd(false, false).singular_values;
        let smax = sv.max();
        let cut = smax * f64::EPSILON * pts.len().max(p) as f64;
        sv.iter().filter(|&&s| s > cut).count()
    };
    if rank < p {
        return Err(Error::RankDeficient { rank, cols: p });
    }

    // shift the bounded coefficients so the bound becomes zero
    let shift = DVector::from_fn(p, |i, _| if i == 0 { 0.0 } else { lb });
    let y_shift = &y - &a * &shift;
    let bounded: Vec<bool> = (0..p).map(|i| i > 0).collect();
    let beta = bvls(&a, &y_shift, &bounded);
    let alpha: Vec<f64> = (0..p).map(|i| beta[i] + shift[i]).collect();
    let active_set: Vec<usize> = (1..p).filter(|&i| beta[i] == 0.0).collect();
    let resid = &y - &a * DVector::from_column_slice(&alpha);
    Ok(SplineFit {
        basis: basis.clone(),
        alpha,
        sse: resid.norm_squared(),
        active_set,
        lb,
    })
}

/// Roots of `θ` in `(0, b]`, from a 1000-interval scan and bisection.
pub fn spline_roots(fit: &SplineFit) -> Vec<f64> {
    let b = fit.basis.b;
    let theta = |x: f64| fit.value(x).unwrap_or(f64::NAN);
    let grid = roots::linspace(0.0, b, 1001);
    let vals: Vec<f64> = grid.iter().map(|&x| theta(x)).collect();
    let mut out = Vec::new();
    for i in 1..grid.len() {
        if vals[i] == 0.0 {
            out.push(grid[i]);
            continue;
        }
        if i + 1 < grid.len() && vals[i + 1] != 0.0 && vals[i].signum() != vals[i + 1].signum() {
            if let Some(r) = roots::bisect(theta, grid[i], grid[i + 1], 1e-10) {
                out.push(r);
            }
        }
    }
    out
}

/// Middle of the three roots `0 < r₁ < r₂` of a strong-Allee growth curve.
pub fn allee_threshold(roots: &[f64]) -> Option<f64> {
    match roots {
        [r1, _r2] => Some(*r1),
        _ => None,
    }
}
