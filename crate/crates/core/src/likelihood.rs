//! High-frequency fGn log-likelihood, score statistics and local likelihood ratios.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Matrix2;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fgn_model::{Hurst, Theta};
use crate::rate_matrix::RateMatrix;
use crate::toeplitz::ToeplitzModel;

/// Observed increments `x` sampled at interval `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    x: Vec<f64>,
    delta: f64,
}

impl Observation {
    pub fn new(x: Vec<f64>, delta: f64) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::Parameter(format!("an observation needs n >= 2, got {}", x.len())));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Parameter(format!("sampling interval must be positive, got {delta}")));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("observation contains a non-finite value {v}")));
        }
        Ok(Self { x, delta })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Same data multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.x.iter().map(|v| v * factor).collect(), self.delta)
    }
}

/// Log-likelihood and the normalised statistics `A, B, C, D, E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreStats {
    pub loglik: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

/// `(loglik, A, B)` without the second-order quadratic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrder {
    pub loglik: f64,
    pub a: f64,
    pub b: f64,
}

/// Toeplitz models keyed by `(H, n)`, shared between threads.
#[derive(Default)]
pub struct ModelCache {
    models: RwLock<HashMap<(u64, usize), Arc<ToeplitzModel>>>,
}

impl ModelCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, hurst: Hurst, n: usize) -> Result<Arc<ToeplitzModel>> {
        let key = (hurst.get().to_bits(), n);
        if let Some(m) = self.models.read().get(&key) {
            return Ok(Arc::clone(m));
        }
        // Build outside the lock; a racing writer simply wins.
        let model = Arc::new(ToeplitzModel::new(hurst, n)?);
        Ok(Arc::clone(self.models.write().entry(key).or_insert(model)))
    }

    pub fn len(&self) -> usize {
        self.models.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.models.write().clear();
    }
}

fn check_model(model: &ToeplitzModel, theta: Theta, obs: &Observation) -> Result<()> {
    if model.n() != obs.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), got: obs.n() });
    }
    if model.hurst() != theta.hurst {
        return Err(Error::Parameter(format!(
            "model built for H = {} used at H = {}",
            model.hurst().get(),
            theta.h()
        )));
    }
    Ok(())
}

/// `sigma^2 Delta^{2H}`.
fn variance_scale(theta: Theta, delta: f64) -> f64 {
    theta.sigma().powi(2) * delta.powf(2.0 * theta.h())
}

fn loglik_from(theta: Theta, obs: &Observation, logdet: f64, q0: f64) -> f64 {
    let n = obs.n() as f64;
    -0.5 * n * (2.0 * PI).ln() - n * theta.h() * obs.delta().ln() - n * theta.sigma().ln()
        - 0.5 * logdet
        - q0 / (2.0 * variance_scale(theta, obs.delta()))
}

/// Log-likelihood using a prebuilt model for `theta.hurst`.
pub fn loglik_with(model: &ToeplitzModel, theta: Theta, obs: &Observation) -> Result<f64> {
    check_model(model, theta, obs)?;
    Ok(loglik_from(theta, obs, model.logdet(), model.quad_inv(obs.x())?))
}

/// `(loglik, A, B)` using a prebuilt model.
pub fn first_order_with(model: &ToeplitzModel, theta: Theta, obs: &Observation) -> Result<FirstOrder> {
    check_model(model, theta, obs)?;
    let (q0, q1) = model.quad_first(obs.x())?;
    let ld = model.logdet_derivatives()?;
    let n = obs.n() as f64;
    let scale = variance_scale(theta, obs.delta());
    Ok(FirstOrder {
        loglik: loglik_from(theta, obs, model.logdet(), q0),
        a: n.sqrt() * (q0 / (n * scale) - 1.0),
        b: (0.5 * ld.dh + q1 / (2.0 * scale)) / n.sqrt(),
    })
}

/// All statistics using a prebuilt model.
pub fn stats_with(model: &ToeplitzModel, theta: Theta, obs: &Observation) -> Result<ScoreStats> {
    check_model(model, theta, obs)?;
    let q = model.quad_forms(obs.x())?;
    let ld = model.logdet_derivatives()?;
    let n = obs.n() as f64;
    let scale = variance_scale(theta, obs.delta());
    let c = q.q0 / (n * scale);
    Ok(ScoreStats {
        loglik: loglik_from(theta, obs, model.logdet(), q.q0),
        a: n.sqrt() * (c - 1.0),
        b: (0.5 * ld.dh + q.q1 / (2.0 * scale)) / n.sqrt(),
        c,
        d: q.q1 / (n * scale),
        e: (0.5 * ld.d2h + q.q2 / (2.0 * scale)) / n,
    })
}

/// Score `(d_H l, d_sigma l)` composed from `A` and `B`.
pub fn score_from(a: f64, b: f64, theta: Theta, obs: &Observation) -> [f64; 2] {
    let rn = (obs.n() as f64).sqrt();
    [a * rn * obs.delta().ln() - b * rn, a * rn / theta.sigma()]
}

/// `log Z_n(u) - <u, zeta> + <I u, u> / 2`.
pub fn remainder(log_z: f64, zeta: [f64; 2], info: &Matrix2<f64>, u: [f64; 2]) -> f64 {
    let iu = [info[(0, 0)] * u[0] + info[(0, 1)] * u[1], info[(1, 0)] * u[0] + info[(1, 1)] * u[1]];
    log_z - (u[0] * zeta[0] + u[1] * zeta[1]) + 0.5 * (iu[0] * u[0] + iu[1] * u[1])
}

fn check_rate(phi: &RateMatrix, obs: &Observation) -> Result<()> {
    if phi.n != obs.n() {
        return Err(Error::DimensionMismatch { expected: obs.n(), got: phi.n });
    }
    if (phi.delta - obs.delta()).abs() > 1e-12 * obs.delta() {
        return Err(Error::Parameter(format!(
            "rate matrix built for delta = {} but data has delta = {}",
            phi.delta,
            obs.delta()
        )));
    }
    Ok(())
}

/// `theta0 + phi u`, rejecting alternatives outside the parameter space.
pub fn localise(theta0: Theta, u: [f64; 2], phi: &RateMatrix) -> Result<Theta> {
    let s = phi.apply(u);
    theta0.shifted(s[0], s[1])
}

/// Likelihood evaluator that reuses Toeplitz models across calls.
#[derive(Default)]
pub struct Likelihood {
    cache: ModelCache,
}

impl Likelihood {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cache(&self) -> &ModelCache {
        &self.cache
    }

    pub fn model(&self, hurst: Hurst, n: usize) -> Result<Arc<ToeplitzModel>> {
        self.cache.get(hurst, n)
    }

    pub fn loglik(&self, theta: Theta, obs: &Observation) -> Result<f64> {
        loglik_with(&*self.model(theta.hurst, obs.n())?, theta, obs)
    }

    pub fn first_order(&self, theta: Theta, obs: &Observation) -> Result<FirstOrder> {
        first_order_with(&*self.model(theta.hurst, obs.n())?, theta, obs)
    }

    pub fn stats(&self, theta: Theta, obs: &Observation) -> Result<ScoreStats> {
        stats_with(&*self.model(theta.hurst, obs.n())?, theta, obs)
    }

    pub fn score(&self, theta: Theta, obs: &Observation) -> Result<[f64; 2]> {
        let f = self.first_order(theta, obs)?;
        Ok(score_from(f.a, f.b, theta, obs))
    }

    /// `l_n(theta0 + phi u) - l_n(theta0)`.
    pub fn local_logratio(
        &self,
        theta0: Theta,
        u: [f64; 2],
        phi: &RateMatrix,
        obs: &Observation,
    ) -> Result<f64> {
        check_rate(phi, obs)?;
        let theta1 = localise(theta0, u, phi)?;
        Ok(self.loglik(theta1, obs)? - self.loglik(theta0, obs)?)
    }

    /// Normalised score `phi^T grad l_n(theta0)`.
    pub fn zeta(&self, theta0: Theta, phi: &RateMatrix, obs: &Observation) -> Result<[f64; 2]> {
        check_rate(phi, obs)?;
        Ok(phi.apply_transpose(self.score(theta0, obs)?))
    }

    /// LAN remainder `r_n(theta0, u)` against the limiting information `info`.
    pub fn lan_remainder(
        &self,
        theta0: Theta,
        u: [f64; 2],
        phi: &RateMatrix,
        info: &Matrix2<f64>,
        obs: &Observation,
    ) -> Result<f64> {
        let log_z = self.local_logratio(theta0, u, phi, obs)?;
        let zeta = self.zeta(theta0, phi, obs)?;
        Ok(remainder(log_z, zeta, info, u))
    }
}

/// Log-likelihood, building the Toeplitz model on the fly.
pub fn loglik(theta: Theta, obs: &Observation) -> Result<f64> {
    loglik_with(&ToeplitzModel::new(theta.hurst, obs.n())?, theta, obs)
}

/// Statistics, building the Toeplitz model on the fly.
pub fn stats(theta: Theta, obs: &Observation) -> Result<ScoreStats> {
    stats_with(&ToeplitzModel::new(theta.hurst, obs.n())?, theta, obs)
}

/// Score, building the Toeplitz model on the fly.
pub fn score(theta: Theta, obs: &Observation) -> Result<[f64; 2]> {
    let f = first_order_with(&ToeplitzModel::new(theta.hurst, obs.n())?, theta, obs)?;
    Ok(score_from(f.a, f.b, theta, obs))
}

pub fn local_logratio(theta0: Theta, u: [f64; 2], phi: &RateMatrix, obs: &Observation) -> Result<f64> {
    Likelihood::new().local_logratio(theta0, u, phi, obs)
}

pub fn lan_remainder(
    theta0: Theta,
    u: [f64; 2],
    phi: &RateMatrix,
    info: &Matrix2<f64>,
    obs: &Observation,
) -> Result<f64> {
    Likelihood::new().lan_remainder(theta0, u, phi, info, obs)
}

/// Squared Euclidean norm.
#[cfg(test)]
pub(crate) fn sq_norm(x: &[f64]) -> f64 {
    crate::toeplitz::dot(x, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate_matrix::{example, RateKind};
    use crate::toeplitz::{dense, dh_logdet, dh_quad_inv, ToeplitzSpec};
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn th(h: f64, s: f64) -> Theta {
        Theta::new(h, s).unwrap()
    }

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    /// Generic multivariate normal log-density with covariance `sigma^2 Delta^{2H} T`.
    fn dense_loglik(theta: Theta, obs: &Observation) -> f64 {
        let spec = ToeplitzSpec::build(theta.hurst, obs.n()).unwrap();
        let cov: DMatrix<f64> = dense::matrix(spec.row0()) * variance_scale(theta, obs.delta());
        let ch = cov.cholesky().unwrap();
        let x = DVector::from_column_slice(obs.x());
        let y = ch.solve(&x);
        let logdet = 2.0 * ch.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        -0.5 * obs.n() as f64 * (2.0 * PI).ln() - 0.5 * logdet - 0.5 * x.dot(&y)
    }

    #[test]
    fn observation_validation() {
        assert!(Observation::new(vec![1.0], 1.0).is_err());
        assert!(Observation::new(vec![1.0, 2.0], 0.0).is_err());
        assert!(Observation::new(vec![1.0, f64::NAN], 1.0).is_err());
        assert_eq!(Observation::new(vec![1.0, 2.0], 0.5).unwrap().n(), 2);
    }

    #[test]
    fn white_noise_loglik() {
        let x = noise(50, 1);
        let obs = Observation::new(x.clone(), 1.0).unwrap();
        let l = loglik(th(0.5, 1.0), &obs).unwrap();
        let want = -25.0 * (2.0 * PI).ln() - 0.5 * sq_norm(&x);
        assert!((l - want).abs() < 1e-10);
    }

    #[test]
    fn zero_data_loglik() {
        let obs = Observation::new(vec![0.0; 4], 1.0).unwrap();
        let l = loglik(th(0.5, 2.0), &obs).unwrap();
        assert!((l - (-2.0 * (2.0 * PI).ln() - 4.0 * 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn matches_dense_density() {
        let obs = Observation::new(noise(128, 2), 0.01).unwrap();
        let theta = th(0.7, 1.5);
        let l = loglik(theta, &obs).unwrap();
        assert!((l - dense_loglik(theta, &obs)).abs() < 1e-8, "{l} vs {}", dense_loglik(theta, &obs));
    }

    #[test]
    fn stats_at_white_noise_match_dense() {
        let x = noise(64, 3);
        let obs = Observation::new(x.clone(), 1.0).unwrap();
        let s = stats(th(0.5, 1.0), &obs).unwrap();
        let n = 64.0f64;
        assert_relative_eq!(s.c, sq_norm(&x) / n, max_relative = 1e-12);
        let spec = ToeplitzSpec::build(Hurst::new(0.5).unwrap(), 64).unwrap();
        let dt = dense::matrix(spec.drow0());
        let xv = DVector::from_column_slice(&x);
        let d = -xv.dot(&(&dt * &xv)) / n;
        assert_relative_eq!(s.d, d, max_relative = 1e-10);
        // the log-determinant derivative vanishes at H = 1/2
        assert_relative_eq!(s.b, 0.5 * n.sqrt() * d, max_relative = 1e-9);
        assert_eq!(s.a, n.sqrt() * (s.c - 1.0));
    }

    #[test]
    fn stats_match_dense_generic() {
        let obs = Observation::new(noise(96, 4), 0.2).unwrap();
        let theta = th(0.35, 0.8);
        let s = stats(theta, &obs).unwrap();
        let spec = ToeplitzSpec::build(theta.hurst, 96).unwrap();
        let q = dense::quad_forms(&spec, obs.x()).unwrap();
        let ld = dense::logdet_derivatives(&spec).unwrap();
        let (n, scale) = (96.0f64, variance_scale(theta, 0.2));
        assert_relative_eq!(s.c, q.q0 / (n * scale), max_relative = 1e-10);
        assert_relative_eq!(s.d, q.q1 / (n * scale), max_relative = 1e-9);
        assert_relative_eq!(s.e, (0.5 * ld.d2h + q.q2 / (2.0 * scale)) / n, max_relative = 1e-8);
    }

    #[test]
    fn zero_data_stats() {
        let obs = Observation::new(vec![0.0; 16], 0.5).unwrap();
        let s = stats(th(0.3, 1.0), &obs).unwrap();
        assert_eq!(s.c, 0.0);
        assert_eq!(s.a, -4.0);
    }

    #[test]
    fn two_expressions_for_b_agree() {
        let obs = Observation::new(noise(80, 5), 0.1).unwrap();
        let theta = th(0.62, 1.3);
        let s = stats(theta, &obs).unwrap();
        let spec = ToeplitzSpec::build(theta.hurst, 80).unwrap();
        let scale = variance_scale(theta, 0.1);
        let composed = (0.5 * dh_logdet(&spec).unwrap()
            + dh_quad_inv(&spec, obs.x()).unwrap() / (2.0 * scale))
            / 80f64.sqrt();
        assert!((s.b - composed).abs() < 1e-10);
        let fo = first_order_with(&ToeplitzModel::new(theta.hurst, 80).unwrap(), theta, &obs).unwrap();
        assert!((fo.b - s.b).abs() < 1e-10);
        assert_eq!(fo.a, s.a);
    }

    #[test]
    fn score_matches_finite_differences() {
        let obs = Observation::new(noise(128, 6), 0.05).unwrap();
        let theta = th(0.6, 1.2);
        let g = score(theta, &obs).unwrap();
        let h = 1e-5;
        let fd_h = (loglik(th(0.6 + h, 1.2), &obs).unwrap() - loglik(th(0.6 - h, 1.2), &obs).unwrap())
            / (2.0 * h);
        let fd_s = (loglik(th(0.6, 1.2 + h), &obs).unwrap() - loglik(th(0.6, 1.2 - h), &obs).unwrap())
            / (2.0 * h);
        assert_relative_eq!(g[0], fd_h, max_relative = 1e-5);
        assert_relative_eq!(g[1], fd_s, max_relative = 1e-5);
    }

    #[test]
    fn second_order_statistic_matches_finite_differences() {
        // d^2_H l = -n E_n + terms from the Delta^{-2H} factor
        let obs = Observation::new(noise(64, 7), 0.3).unwrap();
        let theta = th(0.45, 1.0);
        let s = stats(theta, &obs).unwrap();
        let h = 1e-4;
        let l = |hh: f64| loglik(th(hh, 1.0), &obs).unwrap();
        let fd2 = (l(0.45 + h) - 2.0 * l(0.45) + l(0.45 - h)) / (h * h);
        let (n, ld) = (64.0f64, 0.3f64.ln());
        let q0s = n * s.c;
        let q1s = n * s.d;
        // l = const - nH ld - logdet/2 - Delta^{-2H} q(H) / (2 sigma^2)
        let want = -n * s.e + 2.0 * ld * q1s - 2.0 * ld * ld * q0s;
        assert_relative_eq!(fd2, want, max_relative = 1e-4);
    }

    #[test]
    fn sigma_score_vanishes_at_unit_c() {
        let x = noise(32, 8);
        let theta = th(0.7, 1.0);
        let c = stats(theta, &Observation::new(x.clone(), 1.0).unwrap()).unwrap().c;
        let obs = Observation::new(x.iter().map(|v| v / c.sqrt()).collect(), 1.0).unwrap();
        let g = score(theta, &obs).unwrap();
        assert!(g[1].abs() < 1e-10);
    }

    #[test]
    fn unit_interval_reduces_to_large_sample_score() {
        let obs = Observation::new(noise(40, 9), 1.0).unwrap();
        let theta = th(0.3, 2.0);
        let s = stats(theta, &obs).unwrap();
        let g = score(theta, &obs).unwrap();
        let rn = 40f64.sqrt();
        assert_relative_eq!(g[0], -s.b * rn, max_relative = 1e-12);
        assert_relative_eq!(g[1], s.a * rn / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn scale_equivariance() {
        let obs = Observation::new(noise(100, 10), 0.04).unwrap();
        let theta = th(0.8, 1.7);
        let s1 = stats(theta, &obs).unwrap();
        let f = 1.0 / (1.7 * 0.04f64.powf(0.8));
        let unit = Observation::new(obs.x().iter().map(|v| v * f).collect(), 1.0).unwrap();
        let s2 = stats(th(0.8, 1.0), &unit).unwrap();
        for (a, b) in [(s1.a, s2.a), (s1.b, s2.b), (s1.c, s2.c), (s1.d, s2.d), (s1.e, s2.e)] {
            assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn local_ratio_properties() {
        let n = 64;
        let delta = 0.125;
        let obs = Observation::new(noise(n, 11), delta).unwrap();
        let theta0 = th(0.7, 1.0);
        let phi = example(RateKind::LowerTri, n, delta, 1.0).unwrap();
        let lik = Likelihood::new();
        assert_eq!(lik.local_logratio(theta0, [0.0, 0.0], &phi, &obs).unwrap(), 0.0);
        let u = [0.8, -0.4];
        let fwd = lik.local_logratio(theta0, u, &phi, &obs).unwrap();
        let theta1 = localise(theta0, u, &phi).unwrap();
        let back = lik.loglik(theta0, &obs).unwrap() - lik.loglik(theta1, &obs).unwrap();
        assert_eq!(fwd + back, 0.0);
        let dense = dense_loglik(theta1, &obs) - dense_loglik(theta0, &obs);
        assert!((fwd - dense).abs() < 1e-8);
        assert!(lik.cache().len() >= 2);
    }

    #[test]
    fn localisation_out_of_domain_is_rejected() {
        let n = 16;
        let obs = Observation::new(noise(n, 12), 0.25).unwrap();
        let phi = example(RateKind::LowerTri, n, 0.25, 1.0).unwrap();
        let err = local_logratio(th(0.9, 1.0), [10.0, 0.0], &phi, &obs).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { .. }));
        let wrong = example(RateKind::LowerTri, 32, 0.25, 1.0).unwrap();
        assert!(local_logratio(th(0.5, 1.0), [0.1, 0.0], &wrong, &obs).is_err());
    }

    #[test]
    fn remainder_is_zero_at_origin() {
        let n = 64;
        let obs = Observation::new(noise(n, 13), 0.125).unwrap();
        let phi = example(RateKind::Symmetric, n, 0.125, 1.0).unwrap();
        let info = Matrix2::new(8.0, 1.0, 1.0, 3.0);
        assert_eq!(lan_remainder(th(0.7, 1.0), [0.0, 0.0], &phi, &info, &obs).unwrap(), 0.0);
    }

    #[test]
    fn remainder_vanishes_for_exact_quadratic() {
        // l(theta) = g.(theta - theta0) - (theta - theta0)^T K (theta - theta0) / 2,
        // K = phi^{-T} I phi^{-1}, so log Z(u) = <phi^T g, u> - u^T I u / 2.
        let phi = example(RateKind::ShiftedPair { gamma: 1.0, gamma_hat: -1.0 }, 1024, 1.0 / 32.0, 1.3)
            .unwrap();
        let info = Matrix2::new(5.0, -1.2, -1.2, 2.5);
        let pinv = phi.inverse().unwrap();
        let k = pinv.transpose() * info * pinv;
        let g = [3.1, -0.7];
        for u in [[1.0, 0.0], [0.3, -2.0], [-1.5, 0.25]] {
            let s = phi.apply(u);
            let ks = [k[(0, 0)] * s[0] + k[(0, 1)] * s[1], k[(1, 0)] * s[0] + k[(1, 1)] * s[1]];
            let log_z = g[0] * s[0] + g[1] * s[1] - 0.5 * (ks[0] * s[0] + ks[1] * s[1]);
            let r = remainder(log_z, phi.apply_transpose(g), &info, u);
            assert!(r.abs() < 1e-10, "{r}");
        }
    }

    #[test]
    fn cache_shares_models() {
        let cache = ModelCache::new();
        let h = Hurst::new(0.4).unwrap();
        let a = cache.get(h, 32).unwrap();
        let b = cache.get(h, 32).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        cache.get(h, 33).unwrap();
        assert_eq!(cache.len(), 2);
        cache.clear();
        assert!(cache.is_empty());
    }

    #[test]
    fn model_mismatch_is_rejected() {
        let model = ToeplitzModel::new(Hurst::new(0.4).unwrap(), 8).unwrap();
        let obs = Observation::new(vec![1.0; 8], 1.0).unwrap();
        assert!(loglik_with(&model, th(0.5, 1.0), &obs).is_err());
        let short = Observation::new(vec![1.0; 4], 1.0).unwrap();
        assert!(loglik_with(&model, th(0.4, 1.0), &short).is_err());
    }
}
