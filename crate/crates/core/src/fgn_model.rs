//! Scalar building blocks of the fractional Gaussian noise model.
//!
//! Everything here is expressed for unit-scale increments `B^H_{k+1} - B^H_k`:
//! the lag-`k` autocovariance, the spectral density on `[-pi, pi]` and their
//! derivatives with respect to the Hurst exponent.
//!
//! The spectral density is normalised so that
//! `gamma_H(k) = (1/2pi) * int_{-pi}^{pi} e^{ik lambda} f_H(lambda) d lambda`,
//! i.e. `f_{1/2} == 1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};

/// Hurst exponent, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Hurst(f64);

impl Hurst {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h < 1.0 {
            Ok(Self(h))
        } else {
            Err(Error::Domain(format!("Hurst exponent must lie in (0, 1), got {h}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Hurst {
    type Error = Error;
    fn try_from(h: f64) -> Result<Self> {
        Hurst::new(h)
    }
}

impl From<Hurst> for f64 {
    fn from(h: Hurst) -> f64 {
        h.0
    }
}

/// The parameter pair `(H, sigma)` on `(0,1) x (0,inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTheta")]
pub struct Theta {
    pub hurst: Hurst,
    sigma: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTheta {
    hurst: f64,
    sigma: f64,
}

impl TryFrom<RawTheta> for Theta {
    type Error = Error;
    fn try_from(r: RawTheta) -> Result<Self> {
        Theta::new(r.hurst, r.sigma)
    }
}

impl Theta {
    pub fn new(hurst: f64, sigma: f64) -> Result<Self> {
        let hurst = Hurst::new(hurst)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be positive and finite, got {sigma}")));
        }
        Ok(Self { hurst, sigma })
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.hurst.get()
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `theta + shift`, rejecting shifts that leave the parameter space.
    pub fn shifted(&self, dh: f64, dsigma: f64) -> Result<Self> {
        let (h, s) = (self.h() + dh, self.sigma + dsigma);
        Theta::new(h, s).map_err(|_| Error::OutOfDomain { hurst: h, sigma: s })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    None,
    IntegralCorrection,
}

/// Truncation of the aliasing sum over `k in Z` in the spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralTruncation {
    terms: usize,
    pub tail: TailMode,
}

impl SpectralTruncation {
    pub fn new(terms: usize, tail: TailMode) -> Result<Self> {
        if terms == 0 {
            return Err(Error::Parameter("spectral truncation needs at least one term".into()));
        }
        Ok(Self { terms, tail })
    }

    pub fn terms(&self) -> usize {
        self.terms
    }
}

impl Default for SpectralTruncation {
    fn default() -> Self {
        Self { terms: 200, tail: TailMode::IntegralCorrection }
    }
}

/// `(|m|^{2H}, log|m|)` with the convention that both vanish at `m = 0`
/// (the correct limit of `|m|^{2H} log^p |m|`).
#[inline]
fn pow_log(m: i64, two_h: f64) -> (f64, f64) {
    if m == 0 {
        (0.0, 0.0)
    } else {
        let a = m.unsigned_abs() as f64;
        (a.powf(two_h), a.ln())
    }
}

/// Second difference `sum_j w_j |k+j|^{2H} log^p |k+j|` over `j = -1, 0, 1`
/// with weights `(1, -2, 1)`.
#[inline]
fn second_difference(h: Hurst, k: i64, p: i32) -> f64 {
    let two_h = 2.0 * h.get();
    let term = |m: i64| {
        let (pw, lg) = pow_log(m, two_h);
        if p == 0 {
            if m == 0 {
                0.0
            } else {
                pw
            }
        } else {
            pw * lg.powi(p)
        }
    };
    let k = k.abs();
    term(k + 1) - 2.0 * term(k) + term(k - 1)
}

/// Autocovariance `gamma_H(k) = (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2`.
pub fn autocov(h: Hurst, k: i64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    0.5 * second_difference(h, k, 0)
}

/// `d gamma_H(k) / dH`.
pub fn autocov_dh(h: Hurst, k: i64) -> f64 {
    second_difference(h, k, 1)
}

/// `d^2 gamma_H(k) / dH^2`.
pub fn autocov_d2h(h: Hurst, k: i64) -> f64 {
    2.0 * second_difference(h, k, 2)
}

/// `log C_H` for the normalisation `C_H = Gamma(2H+1) sin(pi H)`.
pub fn log_c(h: Hurst) -> f64 {
    let h = h.get();
    ln_gamma(2.0 * h + 1.0) + (PI * h).sin().ln()
}

/// `d log C_H / dH = 2 psi(2H+1) + pi cot(pi H)`.
pub fn dlog_c(h: Hurst) -> f64 {
    let h = h.get();
    2.0 * digamma(2.0 * h + 1.0) + PI / (PI * h).tan()
}

/// `(sum_k |lambda + 2k pi|^{-2H-1}, sum_k log|lambda + 2k pi| |lambda + 2k pi|^{-2H-1})`.
fn aliased_sums(h: Hurst, lambda: f64, trunc: SpectralTruncation) -> (f64, f64) {
    let h = h.get();
    let lambda = lambda.abs();
    let expo = -2.0 * h - 1.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    // Accumulate from the far tail inwards so that small terms are added first.
    for k in (1..=trunc.terms).rev() {
        let shift = 2.0 * PI * k as f64;
        for y in [shift + lambda, shift - lambda] {
            let w = y.powf(expo);
            s0 += w;
            s1 += y.ln() * w;
        }
    }
    if trunc.tail == TailMode::IntegralCorrection {
        // Euler-Maclaurin tail: sum_{k > K} g(k) ~ int_K^inf g - g(K)/2 - g'(K)/12,
        // for g(x) = y^{-s} and g(x) = log(y) y^{-s} with y = 2 pi x +- lambda.
        let base = 2.0 * PI * trunc.terms as f64;
        let s = 2.0 * h + 1.0;
        for y in [base + lambda, base - lambda] {
            let (ly, p) = (y.ln(), y.powf(-s));
            s0 += y * p / (2.0 * h * 2.0 * PI) - 0.5 * p + 2.0 * PI * s * p / y / 12.0;
            s1 += y * p * (ly / (2.0 * h) + 1.0 / (4.0 * h * h)) / (2.0 * PI) - 0.5 * ly * p
                - 2.0 * PI * p / y * (1.0 - s * ly) / 12.0;
        }
    }
    let w = lambda.powf(expo);
    (s0 + w, s1 + lambda.ln() * w)
}

fn check_frequency(h: Hurst, lambda: f64) -> Result<()> {
    if !(lambda.abs() <= PI) {
        return Err(Error::Domain(format!("frequency must lie in [-pi, pi], got {lambda}")));
    }
    if lambda == 0.0 {
        return Err(Error::Singularity { hurst: h.get(), lambda });
    }
    Ok(())
}

/// Spectral density `f_H(lambda) = C_H 2(1 - cos lambda) sum_k |lambda + 2k pi|^{-2H-1}`.
///
/// `lambda = 0` is rejected for every `H`: quadratures in this crate never
/// place a node there.
pub fn spectral_density(h: Hurst, lambda: f64, trunc: SpectralTruncation) -> Result<f64> {
    check_frequency(h, lambda)?;
    let (s0, _) = aliased_sums(h, lambda, trunc);
    let half_sin = (0.5 * lambda).sin();
    Ok(log_c(h).exp() * 4.0 * half_sin * half_sin * s0)
}

/// `d log f_H(lambda) / dH`.
pub fn dlogf_dh(h: Hurst, lambda: f64, trunc: SpectralTruncation) -> Result<f64> {
    check_frequency(h, lambda)?;
    let (s0, s1) = aliased_sums(h, lambda, trunc);
    Ok(dlog_c(h) - 2.0 * s1 / s0)
}
