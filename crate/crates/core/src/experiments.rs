//! Monte Carlo campaigns: score covariance, LAN expansion, maximum likelihood
//! and efficient-rate sweeps, and the singular diagonal-rate experiment.
//!
//! Replication `r` at sample size `n` always draws its path from the substream
//! `substream_seed(master_seed, n, r)`, so different campaigns built from the
//! same configuration see the same data. Results are collected in replication
//! order, which makes every report independent of the worker count.

use nalgebra::{Matrix2, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fgn_model::{Hurst, Theta};
use crate::fisher::{j_matrix, limit_matrix, DEGENERACY_TOLERANCE};
use crate::likelihood::{
    first_order_with, localise, loglik_with, remainder, score_from, ModelCache, Observation,
};
use crate::rate_matrix::{example, RateKind, SamplingScheme};
use crate::simulate::{rng_for, substream_seed, Method, Sampler};
use crate::toeplitz::ToeplitzModel;

/// Smallest replication count a campaign accepts.
pub const MIN_REPS: usize = 100;

/// Monte Carlo campaign description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub theta0: Theta,
    pub scheme: SamplingScheme,
    pub reps: usize,
    #[serde(default)]
    pub u_list: Vec<[f64; 2]>,
    pub rate_kind: RateKind,
    pub master_seed: u64,
    #[serde(default)]
    pub method: Method,
}

impl CampaignConfig {
    /// Rejects small campaigns, invalid schemes and localisations leaving the
    /// parameter space anywhere on the grid.
    pub fn validate(&self) -> Result<()> {
        if self.reps < MIN_REPS {
            return Err(Error::Config(format!("reps must be at least {MIN_REPS}, got {}", self.reps)));
        }
        self.scheme.validate()?;
        for &n in &self.scheme.n_grid {
            if n < 2 {
                return Err(Error::Config(format!("sample sizes must be at least 2, got {n}")));
            }
            let delta = self.scheme.delta(n)?;
            let phi = example(self.rate_kind, n, delta, self.theta0.sigma())?;
            for &u in &self.u_list {
                if !(u[0].is_finite() && u[1].is_finite()) {
                    return Err(Error::Config(format!("localisation vector {u:?} is not finite")));
                }
                localise(self.theta0, u, &phi)?;
            }
        }
        Ok(())
    }
}

/// Runs `f` on a dedicated pool of `workers` threads (0 picks the default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Simulates `reps` paths at `(theta0, n, delta)` and maps each through `f`,
/// returning results in replication order.
fn replicate<T, F>(cfg: &CampaignConfig, n: usize, delta: f64, reps: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Observation) -> Result<T> + Sync,
{
    let sampler = Sampler::new(cfg.theta0.hurst, n, cfg.method, true)?;
    (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(substream_seed(cfg.master_seed, n, r));
            f(&sampler.draw(cfg.theta0, delta, &mut rng)?)
        })
        .collect()
}

/// Empirical 2x2 covariance with jackknife standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovEstimate {
    pub cov: [[f64; 2]; 2],
    pub se: [[f64; 2]; 2],
    pub count: usize,
}

impl CovEstimate {
    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.cov[0][0], self.cov[0][1], self.cov[1][0], self.cov[1][1])
    }

    pub fn det(&self) -> f64 {
        self.matrix().determinant()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.matrix()).eigenvalues.min()
    }
}

/// Unbiased covariance of `(x, y)` with its leave-one-out jackknife error.
fn cov_entry(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len();
    let m = n as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let prods: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let s: f64 = prods.iter().sum();
    let cov = s / (m - 1.0);
    // leave-one-out: sum_{j != i} (x_j - xbar_{-i})(y_j - ybar_{-i}) = s - p_i n/(n-1)
    let loo: Vec<f64> = prods.iter().map(|p| (s - p * m / (m - 1.0)) / (m - 2.0)).collect();
    let mean = loo.iter().sum::<f64>() / m;
    let var = (m - 1.0) / m * loo.iter().map(|c| (c - mean).powi(2)).sum::<f64>();
    (cov, var.sqrt())
}

pub fn covariance(pairs: &[[f64; 2]]) -> CovEstimate {
    let x: Vec<f64> = pairs.iter().map(|p| p[0]).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p[1]).collect();
    let (c00, s00) = cov_entry(&x, &x);
    let (c01, s01) = cov_entry(&x, &y);
    let (c11, s11) = cov_entry(&y, &y);
    CovEstimate { cov: [[c00, c01], [c01, c11]], se: [[s00, s01], [s01, s11]], count: pairs.len() }
}

fn to_array(m: &Matrix2<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn rel_err(est: &[[f64; 2]; 2], target: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = (est[i][j] - target[i][j]).abs() / target[i][j].abs();
        }
    }
    out
}

/// Linear-interpolation sample quantile of sorted data.
fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = p * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

pub fn quantile(v: &[f64], p: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    quantile_sorted(&s, p)
}

pub fn median(v: &[f64]) -> f64 {
    quantile(v, 0.5)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Exact finite-`n` covariance of `(A_n, B_n)`:
/// `[[2, -d log|T| / n], [., tr((T^{-1} dT)^2) / (2n)]]`.
pub fn finite_n_j(model: &ToeplitzModel) -> Result<Matrix2<f64>> {
    let d = model.logdet_derivatives()?;
    let n = model.n() as f64;
    let ab = -d.dh / n;
    Ok(Matrix2::new(2.0, ab, ab, d.trace_sq() / (2.0 * n)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreCovRow {
    pub n: usize,
    pub delta: f64,
    pub estimate: CovEstimate,
    /// `J(H)`.
    pub target: [[f64; 2]; 2],
    /// Exact covariance at this `n`.
    pub finite_n: [[f64; 2]; 2],
    /// `(estimate - target) / se`.
    pub z: [[f64; 2]; 2],
    #[serde(skip)]
    pub samples: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreCovReport {
    pub theta0: Theta,
    pub reps: usize,
    pub rows: Vec<ScoreCovRow>,
}

/// Empirical covariance of `(A_n, B_n)` at the true parameter on every grid size.
pub fn mc_score_cov(cfg: &CampaignConfig) -> Result<ScoreCovReport> {
    cfg.validate()?;
    let target = j_matrix(cfg.theta0.hurst)?;
    let mut rows = Vec::new();
    for &n in &cfg.scheme.n_grid {
        let delta = cfg.scheme.delta(n)?;
        let model = ToeplitzModel::new(cfg.theta0.hurst, n)?;
        let samples = replicate(cfg, n, delta, cfg.reps, |obs| {
            let f = first_order_with(&model, cfg.theta0, obs)?;
            Ok([f.a, f.b])
        })?;
        let estimate = covariance(&samples);
        let t = to_array(&target);
        let mut z = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                z[i][j] = (estimate.cov[i][j] - t[i][j]) / estimate.se[i][j];
            }
        }
        rows.push(ScoreCovRow {
            n,
            delta,
            estimate,
            target: t,
            finite_n: to_array(&finite_n_j(&model)?),
            z,
            samples,
        });
    }
    Ok(ScoreCovReport { theta0: cfg.theta0, reps: cfg.reps, rows })
}

/// Thresholds used by the LAN campaign, recorded with every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LanTolerances {
    pub cov_rel: f64,
    pub final_median: f64,
}

pub const LAN_TOLERANCES: LanTolerances = LanTolerances { cov_rel: 0.05, final_median: 0.05 };

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemainderSummary {
    pub u: [f64; 2],
    pub median_abs: f64,
    pub q90_abs: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanRow {
    pub family: String,
    pub n: usize,
    pub delta: f64,
    pub zeta: CovEstimate,
    /// `I(theta0) = M J M^T`.
    pub target: [[f64; 2]; 2],
    pub rel_err: [[f64; 2]; 2],
    /// `M_n J_n M_n^T` at this `n`.
    pub finite_n: [[f64; 2]; 2],
    pub nondegenerate: bool,
    pub remainders: Vec<RemainderSummary>,
    #[serde(skip)]
    pub zeta_samples: Vec<[f64; 2]>,
    /// `r_n` per replication, one vector per entry of `u_list`.
    #[serde(skip)]
    pub r_samples: Vec<Vec<f64>>,
}

/// Median `|r_n|` along the grid for one family and one `u`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trend {
    pub family: String,
    pub u: [f64; 2],
    pub medians: Vec<f64>,
    pub strictly_decreasing: bool,
    pub final_median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanReport {
    pub theta0: Theta,
    pub reps: usize,
    pub tolerances: LanTolerances,
    pub rows: Vec<LanRow>,
    pub trends: Vec<Trend>,
}

impl LanReport {
    pub fn rows_for<'a>(&'a self, family: &'a str) -> impl Iterator<Item = &'a LanRow> + 'a {
        self.rows.iter().filter(move |r| r.family == family)
    }
}

/// LAN campaign for `cfg.rate_kind`.
pub fn mc_lan(cfg: &CampaignConfig) -> Result<LanReport> {
    mc_lan_families(cfg, &[cfg.rate_kind])
}

/// LAN campaign evaluating several rate-matrix families on shared paths.
pub fn mc_lan_families(cfg: &CampaignConfig, families: &[RateKind]) -> Result<LanReport> {
    for &kind in families {
        CampaignConfig { rate_kind: kind, ..cfg.clone() }.validate()?;
    }
    let sigma = cfg.theta0.sigma();
    let j = j_matrix(cfg.theta0.hurst)?;
    let cache = ModelCache::new();
    let mut rows = Vec::new();
    for &n in &cfg.scheme.n_grid {
        let delta = cfg.scheme.delta(n)?;
        let model0 = cache.get(cfg.theta0.hurst, n)?;
        let jn = finite_n_j(&model0)?;
        let phis = families
            .iter()
            .map(|&k| example(k, n, delta, sigma))
            .collect::<Result<Vec<_>>>()?;
        let infos: Vec<Matrix2<f64>> = families
            .iter()
            .map(|k| {
                let m = limit_matrix(&k.limits(sigma));
                m * j * m.transpose()
            })
            .collect();
        // models for every alternative, built once per n
        let mut alternatives = Vec::new();
        for phi in &phis {
            let mut per_u = Vec::new();
            for &u in &cfg.u_list {
                let theta1 = localise(cfg.theta0, u, phi)?;
                per_u.push((theta1, cache.get(theta1.hurst, n)?));
            }
            alternatives.push(per_u);
        }
        let per_rep = replicate(cfg, n, delta, cfg.reps, |obs| {
            let f = first_order_with(&model0, cfg.theta0, obs)?;
            let score = score_from(f.a, f.b, cfg.theta0, obs);
            let mut out = Vec::with_capacity(families.len());
            for ((phi, info), alts) in phis.iter().zip(&infos).zip(&alternatives) {
                let zeta = phi.apply_transpose(score);
                let mut rs = Vec::with_capacity(alts.len());
                for (&u, (theta1, model1)) in cfg.u_list.iter().zip(alts) {
                    let log_z = if u == [0.0, 0.0] {
                        0.0
                    } else {
                        loglik_with(model1, *theta1, obs)? - f.loglik
                    };
                    rs.push(remainder(log_z, zeta, info, u));
                }
                out.push((zeta, rs));
            }
            Ok(out)
        })?;
        for (fi, kind) in families.iter().enumerate() {
            let zeta_samples: Vec<[f64; 2]> = per_rep.iter().map(|r| r[fi].0).collect();
            let r_samples: Vec<Vec<f64>> = (0..cfg.u_list.len())
                .map(|ui| per_rep.iter().map(|r| r[fi].1[ui]).collect())
                .collect();
            let remainders = cfg
                .u_list
                .iter()
                .zip(&r_samples)
                .map(|(&u, rs)| {
                    let abs: Vec<f64> = rs.iter().map(|v| v.abs()).collect();
                    RemainderSummary {
                        u,
                        median_abs: median(&abs),
                        q90_abs: quantile(&abs, 0.9),
                        mean: mean(rs),
                    }
                })
                .collect();
            let zeta = covariance(&zeta_samples);
            let target = to_array(&infos[fi]);
            let mn = phis[fi].score_map(sigma);
            let limits = kind.limits(sigma);
            let scale = limits.scale().max(1.0);
            rows.push(LanRow {
                family: kind.name().to_string(),
                n,
                delta,
                rel_err: rel_err(&zeta.cov, &target),
                zeta,
                target,
                finite_n: to_array(&(mn * jn * mn.transpose())),
                nondegenerate: limits.determinant().abs() > DEGENERACY_TOLERANCE * scale * scale,
                remainders,
                zeta_samples,
                r_samples,
            });
        }
    }
    let mut trends = Vec::new();
    for kind in families {
        for (ui, &u) in cfg.u_list.iter().enumerate() {
            let medians: Vec<f64> = rows
                .iter()
                .filter(|r| r.family == kind.name())
                .map(|r| r.remainders[ui].median_abs)
                .collect();
            trends.push(Trend {
                family: kind.name().to_string(),
                u,
                strictly_decreasing: medians.windows(2).all(|w| w[1] < w[0]),
                final_median: *medians.last().unwrap_or(&f64::NAN),
                medians,
            });
        }
    }
    Ok(LanReport { theta0: cfg.theta0, reps: cfg.reps, tolerances: LAN_TOLERANCES, rows, trends })
}

pub const H_LO: f64 = 0.01;
pub const H_HI: f64 = 0.99;
pub const COARSE_GRID: usize = 64;
pub const GOLDEN_TOL: f64 = 1e-6;
pub const GOLDEN_MAX_ITER: usize = 200;
pub const BOUNDARY_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub h_hat: f64,
    pub sigma_hat: f64,
    pub converged: bool,
    pub at_boundary: bool,
    pub loglik_at_opt: f64,
    pub iterations: usize,
}

/// Profile log-likelihood `max_sigma l_n(H, sigma)` and its maximiser.
pub fn profile_loglik(model: &ToeplitzModel, obs: &Observation) -> Result<(f64, f64)> {
    let n = obs.n() as f64;
    let q = model.quad_inv(obs.x())?;
    if !(q > 0.0) {
        return Err(Error::Parameter("profile likelihood is undefined for zero data".into()));
    }
    let h = model.hurst().get();
    let value = -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + 1.0) - 0.5 * n * (q / n).ln()
        - 0.5 * model.logdet();
    let sigma = (q / (n * obs.delta().powf(2.0 * h))).sqrt();
    Ok((value, sigma))
}

/// Maximum likelihood estimate of `(H, sigma)`.
pub fn mle_fit(obs: &Observation) -> Result<MleResult> {
    mle_fit_with(obs, &ModelCache::new())
}

fn coarse_grid() -> Vec<f64> {
    (0..COARSE_GRID)
        .map(|i| H_LO + (H_HI - H_LO) * i as f64 / (COARSE_GRID - 1) as f64)
        .collect()
}

/// As [`mle_fit`], taking coarse-grid models from `cache`. Points visited by
/// the golden-section search are data dependent and never cached.
pub fn mle_fit_with(obs: &Observation, cache: &ModelCache) -> Result<MleResult> {
    let n = obs.n();
    if n < 16 {
        return Err(Error::Parameter(format!("maximum likelihood needs n >= 16, got {n}")));
    }
    let grid = coarse_grid();
    let mut best: Option<(usize, f64, f64)> = None;
    let mut last_err = None;
    for (i, &h) in grid.iter().enumerate() {
        let eval = cache.get(Hurst::new(h)?, n).and_then(|m| profile_loglik(&m, obs));
        match eval {
            Ok((v, s)) => {
                if best.is_none_or(|(_, bv, _)| v > bv) {
                    best = Some((i, v, s));
                }
            }
            Err(e) if e.is_validation() => return Err(e),
            Err(e) => last_err = Some(e),
        }
    }
    let Some((ib, mut fbest, mut sbest)) = best else {
        return Err(last_err.unwrap_or_else(|| Error::NonConvergence("empty profile grid".into())));
    };
    let mut hbest = grid[ib];
    let eval = |h: f64| -> (f64, f64) {
        Hurst::new(h)
            .and_then(|hh| ToeplitzModel::new(hh, n))
            .and_then(|m| profile_loglik(&m, obs))
            .unwrap_or((f64::NEG_INFINITY, f64::NAN))
    };
    let (mut a, mut b) = (grid[ib.saturating_sub(1)], grid[(ib + 1).min(COARSE_GRID - 1)]);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    let mut iterations = 0;
    while b - a > GOLDEN_TOL && iterations < GOLDEN_MAX_ITER {
        iterations += 1;
        if fc.0 >= fd.0 {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = eval(d);
        }
    }
    let converged = b - a <= GOLDEN_TOL;
    for (h, (v, s)) in [(c, fc), (d, fd)] {
        if v > fbest {
            (hbest, fbest, sbest) = (h, v, s);
        }
    }
    Ok(MleResult {
        h_hat: hbest,
        sigma_hat: sbest,
        converged,
        at_boundary: hbest - H_LO < BOUNDARY_TOL || H_HI - hbest < BOUNDARY_TOL,
        loglik_at_opt: fbest,
        iterations,
    })
}

/// Asymptotic lower bounds `(v_H, v_sigma)` for `n MSE(H)` and
/// `(n / log^2 Delta) MSE(sigma) / sigma^2`; both equal `2 / det J(H)`.
pub fn efficiency_bounds(theta: Theta) -> Result<(f64, f64)> {
    let j = j_matrix(theta.hurst)?;
    let s = theta.sigma();
    let e_ab = j[(0, 1)];
    let e_bb = j[(1, 1)];
    let i_h = Matrix2::new(e_bb, -e_ab / s, -e_ab / s, 2.0 / (s * s));
    let v_h = i_h.try_inverse().ok_or_else(|| Error::NonConvergence("singular bound".into()))?[(0, 0)];
    let v_s = j.try_inverse().ok_or_else(|| Error::NonConvergence("singular J".into()))?[(1, 1)];
    Ok((v_h, v_s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateTolerances {
    pub slope_lo: f64,
    pub slope_hi: f64,
    pub flat_band: f64,
    pub bound_slack: f64,
}

pub const RATE_TOLERANCES: RateTolerances =
    RateTolerances { slope_lo: -0.60, slope_hi: -0.40, flat_band: 0.15, bound_slack: 0.8 };

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub delta: f64,
    pub rmse_h: f64,
    pub rmse_sigma: f64,
    /// `n MSE(H)`.
    pub scaled_mse_h: f64,
    /// `(n / log^2 Delta) MSE(sigma)`.
    pub scaled_mse_sigma: f64,
    /// `log RMSE(sigma) - log(|log Delta| / sqrt n)`.
    pub log_sigma_ratio: f64,
    pub nonconverged: usize,
    pub at_boundary: usize,
    #[serde(skip)]
    pub fits: Vec<MleResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub theta0: Theta,
    pub reps: usize,
    pub tolerances: RateTolerances,
    pub rows: Vec<RateRow>,
    /// Least-squares slope of `log RMSE(H)` against `log n`.
    pub slope_h: f64,
    pub slope_sigma: f64,
    /// Largest deviation of `log_sigma_ratio` from its mean.
    pub sigma_flatness: f64,
    pub v_h: f64,
    /// Bound for `(n / log^2 Delta) MSE(sigma)`: `sigma^2 v_sigma`.
    pub v_sigma: f64,
}

impl RateReport {
    pub fn last(&self) -> &RateRow {
        self.rows.last().expect("rate report has rows")
    }
}

fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Maximum likelihood on every grid size; RMSE, rates and efficiency bounds.
pub fn rate_sweep(cfg: &CampaignConfig) -> Result<RateReport> {
    cfg.validate()?;
    let theta0 = cfg.theta0;
    let mut rows = Vec::new();
    for &n in &cfg.scheme.n_grid {
        let delta = cfg.scheme.delta(n)?;
        let cache = ModelCache::new();
        let fits = replicate(cfg, n, delta, cfg.reps, |obs| mle_fit_with(obs, &cache))?;
        let m = fits.len() as f64;
        let mse_h = fits.iter().map(|f| (f.h_hat - theta0.h()).powi(2)).sum::<f64>() / m;
        let mse_s = fits.iter().map(|f| (f.sigma_hat - theta0.sigma()).powi(2)).sum::<f64>() / m;
        let ld = delta.ln();
        let nf = n as f64;
        rows.push(RateRow {
            n,
            delta,
            rmse_h: mse_h.sqrt(),
            rmse_sigma: mse_s.sqrt(),
            scaled_mse_h: nf * mse_h,
            scaled_mse_sigma: nf / (ld * ld) * mse_s,
            log_sigma_ratio: mse_s.sqrt().ln() - (ld.abs() / nf.sqrt()).ln(),
            nonconverged: fits.iter().filter(|f| !f.converged).count(),
            at_boundary: fits.iter().filter(|f| f.at_boundary).count(),
            fits,
        });
    }
    let logn: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let lh: Vec<f64> = rows.iter().map(|r| r.rmse_h.ln()).collect();
    let ls: Vec<f64> = rows.iter().map(|r| r.rmse_sigma.ln()).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.log_sigma_ratio).collect();
    let mr = mean(&ratios);
    let (v_h, v_s) = efficiency_bounds(theta0)?;
    Ok(RateReport {
        theta0,
        reps: cfg.reps,
        tolerances: RATE_TOLERANCES,
        slope_h: if rows.len() > 1 { ols_slope(&logn, &lh) } else { f64::NAN },
        slope_sigma: if rows.len() > 1 { ols_slope(&logn, &ls) } else { f64::NAN },
        sigma_flatness: ratios.iter().map(|r| (r - mr).abs()).fold(0.0, f64::max),
        v_h,
        v_sigma: theta0.sigma().powi(2) * v_s,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KawaiRow {
    pub n: usize,
    pub delta: f64,
    pub zeta: CovEstimate,
    pub rel_err: [[f64; 2]; 2],
    pub det: f64,
    pub min_eigenvalue: f64,
    /// `M_n J_n M_n^T` at this `n`.
    pub finite_n: [[f64; 2]; 2],
    #[serde(skip)]
    pub zeta_samples: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KawaiReport {
    pub theta0: Theta,
    pub reps: usize,
    /// `[[2, 2/sigma], [2/sigma, 2/sigma^2]]`.
    pub target: [[f64; 2]; 2],
    pub rows: Vec<KawaiRow>,
    pub det_decreasing: bool,
    pub tolerance: f64,
}

/// Singular information limit of the diagonal rate matrix.
pub fn kawai_limit(sigma: f64) -> [[f64; 2]; 2] {
    [[2.0, 2.0 / sigma], [2.0 / sigma, 2.0 / (sigma * sigma)]]
}

/// Normalised score under the diagonal rate matrix, whatever `cfg.rate_kind` says.
pub fn kawai_singular(cfg: &CampaignConfig) -> Result<KawaiReport> {
    let cfg = CampaignConfig { rate_kind: RateKind::Diagonal, ..cfg.clone() };
    cfg.validate()?;
    let sigma = cfg.theta0.sigma();
    let target = kawai_limit(sigma);
    let mut rows = Vec::new();
    for &n in &cfg.scheme.n_grid {
        let delta = cfg.scheme.delta(n)?;
        let model = ToeplitzModel::new(cfg.theta0.hurst, n)?;
        let phi = example(RateKind::Diagonal, n, delta, sigma)?;
        let zeta_samples = replicate(&cfg, n, delta, cfg.reps, |obs| {
            let f = first_order_with(&model, cfg.theta0, obs)?;
            Ok(phi.apply_transpose(score_from(f.a, f.b, cfg.theta0, obs)))
        })?;
        let zeta = covariance(&zeta_samples);
        let mn = phi.score_map(sigma);
        rows.push(KawaiRow {
            n,
            delta,
            rel_err: rel_err(&zeta.cov, &target),
            det: zeta.det(),
            min_eigenvalue: zeta.min_eigenvalue(),
            finite_n: to_array(&(mn * finite_n_j(&model)? * mn.transpose())),
            zeta,
            zeta_samples,
        });
    }
    let det_decreasing = rows.windows(2).all(|w| w[1].det < w[0].det);
    Ok(KawaiReport { theta0: cfg.theta0, reps: cfg.reps, target, rows, det_decreasing, tolerance: 0.10 })
}
