use fgn_lan::fgn_model::{autocov, Hurst, Theta};
use fgn_lan::fisher::{i_high_frequency, j_matrix, limit_matrix};
use fgn_lan::likelihood::{stats, Observation};
use fgn_lan::rate_matrix::LimitTuple;
use fgn_lan::simulate::{rng_for, Method, Sampler};
use fgn_lan::toeplitz::{chol, dense, ToeplitzModel, ToeplitzSpec};
use nalgebra::{DVector, Matrix2};
use proptest::prelude::*;
use rand::Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn autocovariance_sign_and_unit_variance(h in 0.02..0.98f64, k in 1i64..500) {
        let hu = Hurst::new(h).unwrap();
        prop_assert_eq!(autocov(hu, 0), 1.0);
        let g = autocov(hu, k);
        if h < 0.5 - 1e-9 {
            prop_assert!(g < 0.0);
        } else if h > 0.5 + 1e-9 {
            prop_assert!(g > 0.0);
        }
    }

    #[test]
    fn toeplitz_is_symmetric_positive_definite(h in 0.05..0.95f64, n in 2usize..96) {
        let spec = ToeplitzSpec::build(Hurst::new(h).unwrap(), n).unwrap();
        let t = dense::matrix(spec.row0());
        prop_assert_eq!(&t, &t.transpose());
        let eig = t.symmetric_eigenvalues();
        prop_assert!(eig.min() > 0.0);
    }

    #[test]
    fn levinson_logdet_matches_cholesky(h in 0.05..0.95f64, n in 2usize..160) {
        let spec = ToeplitzSpec::build(Hurst::new(h).unwrap(), n).unwrap();
        let fast = ToeplitzModel::from_spec(spec.clone()).unwrap().logdet();
        let slow = chol(&spec).unwrap().logdet;
        prop_assert!((fast - slow).abs() <= 1e-7 * slow.abs().max(1.0), "{fast} vs {slow}");
    }

    #[test]
    fn whitening_identity(h in 0.05..0.95f64, n in 2usize..120, seed in any::<u64>()) {
        let spec = ToeplitzSpec::build(Hurst::new(h).unwrap(), n).unwrap();
        let l = chol(&spec).unwrap().lower;
        let mut rng = rng_for(seed);
        let z = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        let x = &l * &z;
        let q = ToeplitzModel::from_spec(spec).unwrap().quad_inv(x.as_slice()).unwrap();
        prop_assert!(rel(q, z.norm_squared()) < 1e-9);
    }

    #[test]
    fn statistics_are_scale_equivariant(
        h in 0.1..0.9f64,
        sigma in 0.2..5.0f64,
        delta in 1e-3..1.0f64,
        n in 4usize..64,
        seed in any::<u64>(),
    ) {
        let sampler = Sampler::new(Hurst::new(h).unwrap(), n, Method::Circulant, false).unwrap();
        let x = sampler.draw_unit(&mut rng_for(seed));
        let s = sigma * delta.powf(h);
        let scaled: Vec<f64> = x.iter().map(|v| v * s).collect();
        let a = stats(Theta::new(h, sigma).unwrap(), &Observation::new(scaled, delta).unwrap()).unwrap();
        let b = stats(Theta::new(h, 1.0).unwrap(), &Observation::new(x, 1.0).unwrap()).unwrap();
        for (p, q) in [(a.a, b.a), (a.b, b.b), (a.c, b.c), (a.d, b.d), (a.e, b.e)] {
            prop_assert!((p - q).abs() <= 1e-9 * q.abs().max(1.0), "{p} vs {q}");
        }
    }

    #[test]
    fn samples_are_self_similar(h in 0.05..0.95f64, sigma in 0.1..10.0f64, delta in 1e-4..1.0f64, seed in any::<u64>()) {
        let sampler = Sampler::new(Hurst::new(h).unwrap(), 33, Method::Circulant, false).unwrap();
        let unit = sampler.draw_unit(&mut rng_for(seed));
        let obs = sampler.draw(Theta::new(h, sigma).unwrap(), delta, &mut rng_for(seed)).unwrap();
        let s = sigma * delta.powf(h);
        for (a, b) in obs.x().iter().zip(&unit) {
            prop_assert_eq!(*a, s * b);
        }
    }

    #[test]
    fn information_determinant_factorises(
        h in 0.05..0.95f64,
        a in -3.0..3.0f64,
        ah in -3.0..3.0f64,
        g in -3.0..3.0f64,
        gh in -3.0..3.0f64,
    ) {
        let limits = LimitTuple::new(a, ah, g, gh);
        prop_assume!(limits.determinant().abs() > 1e-3);
        let theta = Theta::new(h, 1.0).unwrap();
        let p = i_high_frequency(theta, &limits).unwrap();
        let want = limits.determinant().powi(2) * p.j.determinant();
        prop_assert!(rel(p.i_hf.determinant(), want) < 1e-12);
    }

    #[test]
    fn row_scaling_is_a_quadratic_form(h in 0.05..0.95f64, r1 in 0.1..4.0f64, r2 in 0.1..4.0f64) {
        let limits = LimitTuple::new(1.0, 0.3, -0.4, 2.0);
        let m = limit_matrix(&limits);
        let d = Matrix2::new(r1, 0.0, 0.0, r2);
        let scaled = LimitTuple::new(r1 * limits.alpha, r2 * limits.alpha_hat, r1 * limits.gamma, r2 * limits.gamma_hat);
        let theta = Theta::new(h, 1.0).unwrap();
        let direct = i_high_frequency(theta, &scaled).unwrap().i_hf;
        let j = j_matrix(theta.hurst).unwrap();
        let law = (d * m) * j * (d * m).transpose();
        prop_assert!((direct - law).amax() <= 1e-12 * law.amax());
    }
}
