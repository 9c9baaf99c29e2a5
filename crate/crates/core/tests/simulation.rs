use fgn_lan::experiments::{median, mle_fit_with};
use fgn_lan::fgn_model::{Hurst, Theta};
use fgn_lan::likelihood::ModelCache;
use fgn_lan::simulate::{rng_for, substream_seed, Method, Sampler};

const PATHS: usize = 10_000;
const N: usize = 512;
/// Asymptotic Kolmogorov critical value at level 0.001.
const KS_CRIT: f64 = 1.9495;

fn lag_autocov(x: &[f64], k: usize) -> f64 {
    x.iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / x.len() as f64
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

fn autocov_samples(h: f64, method: Method, master: u64) -> Vec<[f64; 5]> {
    let sampler = Sampler::new(Hurst::new(h).unwrap(), N, method, false).unwrap();
    (0..PATHS as u64)
        .map(|r| {
            let x = sampler.draw_unit(&mut rng_for(substream_seed(master, N, r)));
            std::array::from_fn(|k| lag_autocov(&x, k))
        })
        .collect()
}

fn methods_agree(h: f64) {
    let circ = autocov_samples(h, Method::Circulant, 101);
    let chol = autocov_samples(h, Method::Cholesky, 202);
    let crit = KS_CRIT * (2.0 / PATHS as f64).sqrt();
    for k in 0..5 {
        let d = ks_two_sample(circ.iter().map(|v| v[k]).collect(), chol.iter().map(|v| v[k]).collect());
        assert!(d < crit, "H = {h}, lag {k}: KS statistic {d} >= {crit}");
    }
}

#[test]
fn circulant_and_cholesky_agree_antipersistent() {
    methods_agree(0.3);
}

#[test]
fn circulant_and_cholesky_agree_persistent() {
    methods_agree(0.8);
}

#[test]
fn ks_statistic_basics() {
    assert_eq!(ks_two_sample(vec![1.0, 2.0], vec![1.0, 2.0]), 0.0);
    assert_eq!(ks_two_sample(vec![0.0, 1.0], vec![2.0, 3.0]), 1.0);
    assert_eq!(ks_two_sample(vec![0.0, 2.0], vec![1.0, 3.0]), 0.5);
}

#[test]
fn mle_is_centred_on_white_noise() {
    let theta = Theta::new(0.5, 1.0).unwrap();
    let n = 4096;
    let sampler = Sampler::new(theta.hurst, n, Method::Circulant, false).unwrap();
    let cache = ModelCache::new();
    let h_hat: Vec<f64> = (0..500u64)
        .map(|r| {
            let obs = sampler.draw(theta, 1.0, &mut rng_for(substream_seed(5, n, r))).unwrap();
            let fit = mle_fit_with(&obs, &cache).unwrap();
            assert!(fit.sigma_hat > 0.0 && fit.h_hat > 0.01 && fit.h_hat < 0.99);
            fit.h_hat
        })
        .collect();
    let m = median(&h_hat);
    assert!((m - 0.5).abs() < 0.02, "median h_hat {m}");
}
