//! Spectral integrals of `d_H log f_H` and the Fisher matrices built on them.
//!
//! Integrals over `(0, pi]` use composite Gauss-Legendre on dyadic panels
//! `[pi 2^{-j-1}, pi 2^{-j}]`; the integrands are smooth on each panel even
//! though `d_H log f_H` has a logarithmic singularity at the origin. The
//! last sliver `(0, pi 2^{-J}]` is integrated from the leading-order behaviour
//! `f_H ~ C_H lambda^{1-2H}`, `d_H log f_H ~ d_H log C_H - 2 log lambda`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::LazyLock;

use nalgebra::Matrix2;
use parking_lot::RwLock;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fgn_model::{dlog_c, dlogf_dh, log_c, spectral_density, Hurst, SpectralTruncation, Theta};
use crate::rate_matrix::LimitTuple;

/// Gauss-Legendre points per dyadic panel used by [`j_matrix`] and friends.
pub const DEFAULT_NODES: usize = 16;
/// Number of dyadic panels.
pub const PANELS: usize = 60;
/// Largest accepted difference between the `nodes` and `2 * nodes` rules.
pub const QUAD_TOLERANCE: f64 = 1e-6;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_m.
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        nodes[m - 1 - i] = -x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// `int g` over `side * (eps, pi]` with `eps = pi 2^{-PANELS}`, where
/// `side = +1` or `-1`.
fn integrate_panels(nodes: usize, side: f64, g: &mut dyn FnMut(f64) -> Result<f64>) -> Result<f64> {
    let (x, w) = gauss_legendre(nodes);
    let mut total = 0.0;
    // Smallest panels first.
    for j in (0..PANELS).rev() {
        let hi = PI * 0.5f64.powi(j as i32);
        let lo = 0.5 * hi;
        let (mid, half) = (0.5 * (hi + lo), 0.5 * (hi - lo));
        let mut panel = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            panel += wi * g(side * (mid + half * xi))?;
        }
        total += half * panel;
    }
    Ok(total)
}

fn sliver() -> f64 {
    PI * 0.5f64.powi(PANELS as i32)
}

/// `(1/pi) int_0^pi cos(k lambda) f_H(lambda) d lambda`, which should
/// reproduce the autocovariance `gamma_H(k)`.
pub fn spectral_moment(h: Hurst, k: u32, nodes: usize) -> Result<f64> {
    let trunc = SpectralTruncation::default();
    let mut g = |l: f64| Ok((k as f64 * l).cos() * spectral_density(h, l, trunc)?);
    let body = integrate_panels(nodes, 1.0, &mut g)?;
    let eps = sliver();
    let two_h = 2.0 * h.get();
    let rest = log_c(h).exp() * eps.powf(2.0 - two_h) / (2.0 - two_h);
    Ok((body + rest) / PI)
}

/// `(1/2pi) int d_H log f_H` and `(1/4pi) int (d_H log f_H)^2` over `[-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralIntegrals {
    pub hurst: f64,
    pub i1: f64,
    pub i2: f64,
    pub quad_error: f64,
}

impl SpectralIntegrals {
    /// `E[AB] = -i1`.
    pub fn e_ab(&self) -> f64 {
        -self.i1
    }

    /// `E[B^2] = i2`.
    pub fn e_bb(&self) -> f64 {
        self.i2
    }
}

/// `(int g, int g^2)` over one half-line `side * (0, pi]`.
fn half_integrals(h: Hurst, nodes: usize, side: f64) -> Result<(f64, f64)> {
    let trunc = SpectralTruncation::default();
    let s1 = integrate_panels(nodes, side, &mut |l| dlogf_dh(h, l, trunc))?;
    let s2 = integrate_panels(nodes, side, &mut |l| dlogf_dh(h, l, trunc).map(|v| v * v))?;
    let eps = sliver();
    let c = dlog_c(h);
    let le = eps.ln();
    let r1 = c * eps - 2.0 * (eps * le - eps);
    let r2 = c * c * eps - 4.0 * c * (eps * le - eps) + 4.0 * eps * (le * le - 2.0 * le + 2.0);
    Ok((s1 + r1, s2 + r2))
}

fn integrals_at(h: Hurst, nodes: usize) -> Result<(f64, f64)> {
    let (s1, s2) = half_integrals(h, nodes, 1.0)?;
    // The integrand is even: the full-circle integral is twice the half-line one.
    Ok((s1 / PI, s2 / (2.0 * PI)))
}

/// Integrals on the negative half-line only, for symmetry diagnostics.
pub fn negative_half_integrals(h: Hurst, nodes: usize) -> Result<(f64, f64)> {
    half_integrals(h, nodes, -1.0)
}

/// Integrals on the positive half-line only.
pub fn positive_half_integrals(h: Hurst, nodes: usize) -> Result<(f64, f64)> {
    half_integrals(h, nodes, 1.0)
}

static CACHE: LazyLock<RwLock<HashMap<(u64, usize), SpectralIntegrals>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

/// Spectral integrals at resolution `nodes`, checked against the rule with
/// `2 * nodes` points per panel. The finer value is returned.
pub fn spectral_integrals(h: Hurst, nodes: usize) -> Result<SpectralIntegrals> {
    if nodes == 0 {
        return Err(Error::Parameter("quadrature needs at least one node per panel".into()));
    }
    let key = (h.get().to_bits(), nodes);
    if let Some(hit) = CACHE.read().get(&key) {
        return Ok(*hit);
    }
    let (c1, c2) = integrals_at(h, nodes)?;
    let (f1, f2) = integrals_at(h, 2 * nodes)?;
    let quad_error = (f1 - c1).abs().max((f2 - c2).abs());
    if !(quad_error <= QUAD_TOLERANCE) {
        return Err(Error::NonConvergence(format!(
            "spectral integrals at H = {} changed by {quad_error:e} under refinement",
            h.get()
        )));
    }
    let out = SpectralIntegrals { hurst: h.get(), i1: f1, i2: f2, quad_error };
    CACHE.write().insert(key, out);
    Ok(out)
}

/// Limiting covariance of `(A_n, B_n)`: `[[2, -i1], [-i1, i2]]`.
pub fn j_matrix(h: Hurst) -> Result<Matrix2<f64>> {
    let s = spectral_integrals(h, DEFAULT_NODES)?;
    Ok(Matrix2::new(2.0, -s.i1, -s.i1, s.i2))
}

/// Fisher matrix of the fixed-interval (large-sample) experiment.
pub fn i_large_sample(theta: Theta) -> Result<Matrix2<f64>> {
    let s = spectral_integrals(theta.hurst, DEFAULT_NODES)?;
    let sig = theta.sigma();
    Ok(Matrix2::new(s.i2, s.i1 / sig, s.i1 / sig, 2.0 / (sig * sig)))
}

/// `J(H)`, the high-frequency information `M J M^T` and the limit matrix `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherPair {
    pub j: Matrix2<f64>,
    pub i_hf: Matrix2<f64>,
    pub m: Matrix2<f64>,
}

/// Threshold below which `alpha gamma_hat - alpha_hat gamma` counts as zero.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// `M = [[gamma, -alpha], [gamma_hat, -alpha_hat]]`.
pub fn limit_matrix(limits: &LimitTuple) -> Matrix2<f64> {
    Matrix2::new(limits.gamma, -limits.alpha, limits.gamma_hat, -limits.alpha_hat)
}

/// High-frequency Fisher information `I = M J(H) M^T`.
pub fn i_high_frequency(theta: Theta, limits: &LimitTuple) -> Result<FisherPair> {
    let det = limits.determinant();
    let scale = limits.scale().max(1.0);
    if !(det.abs() > DEGENERACY_TOLERANCE * scale * scale) {
        return Err(Error::DegenerateLimits(det));
    }
    let j = j_matrix(theta.hurst)?;
    let m = limit_matrix(limits);
    let i_hf = m * j * m.transpose();
    Ok(FisherPair { j, i_hf, m })
}
