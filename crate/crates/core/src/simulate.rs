//! Exact fGn sampling by circulant embedding or dense Cholesky, with seeded substreams.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fgn_model::{autocov, Hurst, Theta};
use crate::likelihood::Observation;
use crate::toeplitz::{chol, ToeplitzSpec, CONDITIONING_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Circulant,
    Cholesky,
}

/// One path request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub theta: Theta,
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
    #[serde(default)]
    pub method: Method,
    /// Use Cholesky when the circulant embedding is not nonnegative definite.
    #[serde(default)]
    pub cholesky_fallback: bool,
}

impl SimConfig {
    pub fn new(theta: Theta, n: usize, delta: f64, seed: u64) -> Self {
        Self { theta, n, delta, seed, method: Method::Circulant, cholesky_fallback: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Parameter(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Parameter(format!("delta must be positive, got {}", self.delta)));
        }
        Ok(())
    }
}

/// Relative size below which a negative embedding eigenvalue is treated as rounding.
const EIGEN_TOLERANCE: f64 = 1e-10;

enum Engine {
    Circulant { sqrt_eig: Vec<f64>, fft: Arc<dyn Fft<f64>> },
    Cholesky { lower: DMatrix<f64> },
}

/// Reusable generator of unit-scale fGn paths of length `n` at a fixed `H`.
pub struct Sampler {
    hurst: Hurst,
    n: usize,
    engine: Engine,
}

/// Smallest power of two `>= 2(n - 1)`.
pub fn embedding_size(n: usize) -> usize {
    (2 * (n - 1)).next_power_of_two().max(2)
}

impl Sampler {
    pub fn new(hurst: Hurst, n: usize, method: Method, cholesky_fallback: bool) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!("n must be at least 2, got {n}")));
        }
        match method {
            Method::Cholesky => Self::cholesky(hurst, n),
            Method::Circulant => match Self::circulant(hurst, n) {
                Err(Error::NegativeEigenvalue { .. }) if cholesky_fallback => Self::cholesky(hurst, n),
                other => other,
            },
        }
    }

    fn circulant(hurst: Hurst, n: usize) -> Result<Self> {
        let m = embedding_size(n);
        let half = m / 2;
        let mut c: Vec<Complex64> = (0..m)
            .map(|j| {
                let k = if j <= half { j } else { m - j };
                Complex64::new(autocov(hurst, k as i64), 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut c);
        let top = c.iter().map(|z| z.re).fold(0.0, f64::max);
        let mut sqrt_eig = Vec::with_capacity(m);
        for z in &c {
            let lam = z.re;
            if lam < -EIGEN_TOLERANCE * top {
                return Err(Error::NegativeEigenvalue { hurst: hurst.get(), n, value: lam });
            }
            sqrt_eig.push((lam.max(0.0) / m as f64).sqrt());
        }
        Ok(Self { hurst, n, engine: Engine::Circulant { sqrt_eig, fft } })
    }

    fn cholesky(hurst: Hurst, n: usize) -> Result<Self> {
        let lower = chol(&ToeplitzSpec::build(hurst, n)?)?.lower;
        Ok(Self { hurst, n, engine: Engine::Cholesky { lower } })
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn method(&self) -> Method {
        match self.engine {
            Engine::Circulant { .. } => Method::Circulant,
            Engine::Cholesky { .. } => Method::Cholesky,
        }
    }

    /// A path with covariance `T_n(H)`.
    pub fn draw_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.engine {
            Engine::Circulant { sqrt_eig, fft } => {
                let mut w: Vec<Complex64> = sqrt_eig
                    .iter()
                    .map(|s| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut w);
                w[..self.n].iter().map(|z| z.re).collect()
            }
            Engine::Cholesky { lower } => {
                let z = DVector::from_fn(self.n, |_, _| rng.sample::<f64, _>(StandardNormal));
                (lower * z).iter().copied().collect()
            }
        }
    }

    /// A path with covariance `sigma^2 Delta^{2H} T_n(H)`.
    pub fn draw<R: Rng + ?Sized>(&self, theta: Theta, delta: f64, rng: &mut R) -> Result<Observation> {
        if theta.hurst != self.hurst {
            return Err(Error::Parameter(format!(
                "sampler built for H = {} asked for H = {}",
                self.hurst.get(),
                theta.h()
            )));
        }
        let s = path_scale(theta, delta);
        Observation::new(self.draw_unit(rng).into_iter().map(|z| s * z).collect(), delta)
    }
}

/// `sigma Delta^H`.
pub fn path_scale(theta: Theta, delta: f64) -> f64 {
    theta.sigma() * delta.powf(theta.h())
}

/// Generator for one seed.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replication `rep` at sample size `n` under `master`.
pub fn substream_seed(master: u64, n: usize, rep: u64) -> u64 {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut h = mix(master.wrapping_add(GOLDEN));
    h = mix(h ^ (n as u64).wrapping_add(GOLDEN));
    mix(h ^ rep.wrapping_add(GOLDEN))
}

/// One path for `cfg`.
pub fn sample(cfg: &SimConfig) -> Result<Observation> {
    cfg.validate()?;
    let sampler = Sampler::new(cfg.theta.hurst, cfg.n, cfg.method, cfg.cholesky_fallback)?;
    sampler.draw(cfg.theta, cfg.delta, &mut rng_for(cfg.seed))
}

/// `L^{-1} x / (sigma Delta^H)` with `T_n(H) = L L^T`, computed from the
/// Durbin one-step innovations.
pub fn whiten(obs: &Observation, theta: Theta) -> Result<Vec<f64>> {
    let n = obs.n();
    let spec = ToeplitzSpec::build(theta.hurst, n)?;
    let row = spec.row0();
    let inv_s = 1.0 / path_scale(theta, obs.delta());
    let x: Vec<f64> = obs.x().iter().map(|v| v * inv_s).collect();
    let mut out = Vec::with_capacity(n);
    let mut v = row[0];
    out.push(x[0] / v.sqrt());
    let mut a: Vec<f64> = Vec::with_capacity(n);
    let mut next: Vec<f64> = Vec::with_capacity(n);
    for k in 1..n {
        let acc: f64 = a.iter().zip(row[1..k].iter().rev()).map(|(aj, rj)| aj * rj).sum();
        let kappa = (row[k] - acc) / v;
        next.clear();
        next.extend(a.iter().zip(a.iter().rev()).map(|(aj, ar)| aj - kappa * ar));
        next.push(kappa);
        std::mem::swap(&mut a, &mut next);
        v *= 1.0 - kappa * kappa;
        if !(v > CONDITIONING_FLOOR) {
            return Err(Error::Conditioning {
                hurst: theta.h(),
                n,
                detail: format!("prediction variance {v:e} at order {k}"),
            });
        }
        let pred: f64 = a.iter().zip(x[..k].iter().rev()).map(|(aj, xj)| aj * xj).sum();
        out.push((x[k] - pred) / v.sqrt());
    }
    Ok(out)
}
