//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the verdicts are printed even when
//! everything passes. `FGN_LAN_ACCEPTANCE=1,4,8` restricts the run to the
//! listed criteria; the exit status is non-zero if any selected criterion fails.

use std::fmt::Write as _;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use fgn_lan::experiments::{
    kawai_singular, mc_lan_families, mc_score_cov, rate_sweep, with_workers, CampaignConfig, LAN_TOLERANCES,
    RATE_TOLERANCES,
};
use fgn_lan::fgn_model::{autocov, autocov_d2h, autocov_dh, Hurst, Theta};
use fgn_lan::fisher::{i_high_frequency, j_matrix, spectral_integrals, spectral_moment, DEFAULT_NODES};
use fgn_lan::likelihood::{loglik, score, stats, Observation};
use fgn_lan::rate_matrix::{LimitTuple, RateKind, SamplingScheme};
use fgn_lan::simulate::{rng_for, Method, Sampler};
use fgn_lan::toeplitz::{chol, d2h_logdet, dense, dh_logdet, ToeplitzModel, ToeplitzSpec};
use rand::Rng;

type Outcome = (bool, String);

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn hu(h: f64) -> Hurst {
    Hurst::new(h).unwrap()
}

fn th(h: f64, s: f64) -> Theta {
    Theta::new(h, s).unwrap()
}

fn unit_path(h: f64, n: usize, seed: u64) -> Vec<f64> {
    Sampler::new(hu(h), n, Method::Circulant, false).unwrap().draw_unit(&mut rng_for(seed))
}

fn campaign(theta0: Theta, grid: Vec<usize>, reps: usize, kind: RateKind, seed: u64) -> CampaignConfig {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CampaignConfig {
        theta0,
        scheme: SamplingScheme::power(1.0, 0.5, grid).unwrap(),
        reps,
        u_list: vec![[1.0, 0.0], [0.0, 1.0], [h, h]],
        rate_kind: kind,
        master_seed: seed,
        method: Method::Circulant,
    }
}

const FAMILIES: [RateKind; 4] = [
    RateKind::Symmetric,
    RateKind::ShiftedPair { gamma: 1.0, gamma_hat: -1.0 },
    RateKind::LowerTri,
    RateKind::UpperTri,
];

fn white_noise_reduction() -> Outcome {
    let mut worst = 0.0f64;
    for (n, seed) in [(2, 1), (17, 2), (256, 3), (1000, 4)] {
        let spec = ToeplitzSpec::build(hu(0.5), n).unwrap();
        assert!(spec.row0()[0] == 1.0 && spec.row0()[1..].iter().all(|&v| v == 0.0));
        let model = ToeplitzModel::from_spec(spec.clone()).unwrap();
        worst = worst.max(model.logdet().abs());
        let x = unit_path(0.5, n, seed);
        let obs = Observation::new(x.clone(), 1.0).unwrap();
        let theta = th(0.5, 1.0);
        let nf = n as f64;
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        let want = -0.5 * nf * (2.0 * std::f64::consts::PI).ln() - 0.5 * norm2;
        worst = worst.max(rel(loglik(theta, &obs).unwrap(), want));
        // with T = I and d_H gamma(0) = 0: B = -(1 / 2 sqrt n) x' (d_H T) x
        let dt = dense::matrix(spec.drow0());
        let xv = nalgebra::DVector::from_column_slice(&x);
        let b = -0.5 * xv.dot(&(&dt * &xv)) / nf.sqrt();
        let a = nf.sqrt() * (norm2 / nf - 1.0);
        let st = stats(theta, &obs).unwrap();
        worst = worst.max((st.a - a).abs()).max((st.b - b).abs());
        let g = score(theta, &obs).unwrap();
        worst = worst.max((g[0] + b * nf.sqrt()).abs() / nf).max((g[1] - a * nf.sqrt()).abs() / nf);
    }
    (worst < 1e-10, format!("largest deviation {worst:.2e} (tolerance 1e-10)"))
}

fn oracle_equivalence() -> Outcome {
    let mut worst_ld = 0.0f64;
    let mut worst_q = 0.0f64;
    for h in [0.2, 0.5, 0.8] {
        for n in [64, 256, 1024] {
            let spec = ToeplitzSpec::build(hu(h), n).unwrap();
            let slow = chol(&spec).unwrap().logdet;
            let fast = ToeplitzModel::from_spec(spec).unwrap().logdet();
            worst_ld = worst_ld.max((fast - slow).abs() / slow.abs().max(1.0));
        }
        for n in [8, 32, 128] {
            let spec = ToeplitzSpec::build(hu(h), n).unwrap();
            let x = unit_path(0.6, n, n as u64);
            let fast = ToeplitzModel::from_spec(spec.clone()).unwrap().quad_forms(&x).unwrap();
            let slow = dense::quad_forms(&spec, &x).unwrap();
            for (p, q) in [(fast.q0, slow.q0), (fast.q1, slow.q1), (fast.q2, slow.q2)] {
                worst_q = worst_q.max(rel(p, q));
            }
        }
    }
    (
        worst_ld < 1e-7 && worst_q < 1e-9,
        format!("logdet rel. {worst_ld:.2e} (1e-7), quadratic forms rel. {worst_q:.2e} (1e-9)"),
    )
}

fn derivative_correctness() -> Outcome {
    let mut rng = rng_for(20_240_601);
    let (mut first, mut second) = (0.0f64, 0.0f64);
    let n = 96;
    for p in 0..5 {
        let h = rng.random_range(0.15..0.85);
        let sigma = rng.random_range(0.5..3.0);
        let (e1, e2) = (1e-5, 1e-3);
        for k in [1i64, 2, 5, 40] {
            let fd1 = (autocov(hu(h + e1), k) - autocov(hu(h - e1), k)) / (2.0 * e1);
            let fd2 = (autocov(hu(h + e2), k) - 2.0 * autocov(hu(h), k) + autocov(hu(h - e2), k)) / (e2 * e2);
            first = first.max(rel(autocov_dh(hu(h), k), fd1));
            second = second.max(rel(autocov_d2h(hu(h), k), fd2));
        }
        let ld = |h: f64| ToeplitzModel::new(hu(h), n).unwrap().logdet();
        let spec = ToeplitzSpec::build(hu(h), n).unwrap();
        first = first.max(rel(dh_logdet(&spec).unwrap(), (ld(h + e1) - ld(h - e1)) / (2.0 * e1)));
        second = second.max(rel(d2h_logdet(&spec).unwrap(), (ld(h + e2) - 2.0 * ld(h) + ld(h - e2)) / (e2 * e2)));

        let delta: f64 = 0.05;
        let x: Vec<f64> = unit_path(h, n, p).iter().map(|v| v * sigma * delta.powf(h)).collect();
        let obs = Observation::new(x, delta).unwrap();
        let l = |h: f64, s: f64| loglik(th(h, s), &obs).unwrap();
        let g = score(th(h, sigma), &obs).unwrap();
        first = first.max(rel(g[0], (l(h + e1, sigma) - l(h - e1, sigma)) / (2.0 * e1)));
        first = first.max(rel(g[1], (l(h, sigma + e1) - l(h, sigma - e1)) / (2.0 * e1)));
    }
    (
        first < 1e-5 && second < 1e-4,
        format!("first order rel. {first:.2e} (1e-5), second order rel. {second:.2e} (1e-4)"),
    )
}

fn spectral_identities() -> Outcome {
    let (mut inv, mut conv) = (0.0f64, 0.0f64);
    for h in [0.2, 0.35, 0.5, 0.65, 0.8] {
        for k in 0..=8 {
            let m = spectral_moment(hu(h), k, DEFAULT_NODES).unwrap();
            inv = inv.max((m - autocov(hu(h), k as i64)).abs());
            let m2 = spectral_moment(hu(h), k, 2 * DEFAULT_NODES).unwrap();
            conv = conv.max((m2 - m).abs());
        }
        conv = conv.max(spectral_integrals(hu(h), DEFAULT_NODES).unwrap().quad_error);
    }
    (
        inv < 1e-6 && conv < 1e-7,
        format!("inversion error {inv:.2e} (1e-6), node-doubling change {conv:.2e} (1e-7)"),
    )
}

fn score_covariance() -> Outcome {
    let mut ok = true;
    let mut msg = String::new();
    for h in [0.3, 0.7] {
        let cfg = campaign(th(h, 1.0), vec![2048], 10_000, RateKind::LowerTri, 55);
        let cfg = CampaignConfig { u_list: vec![], ..cfg };
        let rep = mc_score_cov(&cfg).unwrap();
        let row = &rep.rows[0];
        let z = row.z;
        let pass = z[0][0].abs() <= 3.0 && z[0][1].abs() <= 3.0 && z[1][1].abs() <= 3.0;
        ok &= pass;
        let c = row.estimate.cov;
        let _ = write!(
            msg,
            "H={h}: cov=[{:.4}, {:.4}, {:.4}] target=[2, {:.4}, {:.4}] z=[{:.2}, {:.2}, {:.2}]; ",
            c[0][0], c[0][1], c[1][1], row.target[0][1], row.target[1][1], z[0][0], z[0][1], z[1][1]
        );
    }
    (ok, msg.trim_end_matches("; ").to_string())
}

fn chi_square_law() -> Outcome {
    let cfg = campaign(th(0.7, 1.0), vec![256], 100_000, RateKind::LowerTri, 66);
    let cfg = CampaignConfig { u_list: vec![], ..cfg };
    let v = mc_score_cov(&cfg).unwrap().rows[0].estimate.cov[0][0];
    ((v - 2.0).abs() <= 0.06, format!("Var(A_n) = {v:.4} (2 +/- 0.06)"))
}

fn lan_expansion() -> Outcome {
    let cfg = campaign(th(0.7, 1.0), vec![256, 1024, 8192], 5000, RateKind::LowerTri, 77);
    let rep = mc_lan_families(&cfg, &FAMILIES).unwrap();
    let mut ok = true;
    let mut msg = String::new();
    for kind in FAMILIES {
        let last = rep.rows_for(kind.name()).last().unwrap();
        let worst = last.rel_err.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let cov_ok = worst <= LAN_TOLERANCES.cov_rel;
        ok &= cov_ok;
        let _ = write!(msg, "\n    {}: cov(zeta) max rel. err {worst:.3} at n=8192 ({})", kind.name(), verdict(cov_ok));
        for t in rep.trends.iter().filter(|t| t.family == kind.name()) {
            let trend_ok = t.strictly_decreasing && t.final_median < LAN_TOLERANCES.final_median;
            ok &= trend_ok;
            let meds: Vec<String> = t.medians.iter().map(|m| format!("{m:.4}")).collect();
            let _ = write!(
                msg,
                "\n    {} u=({:.3}, {:.3}): median |r_n| {} ({})",
                kind.name(),
                t.u[0],
                t.u[1],
                meds.join(" -> "),
                verdict(trend_ok)
            );
        }
    }
    (ok, msg)
}

fn nondegeneracy_identity() -> Outcome {
    let mut worst = 0.0f64;
    let mut rng = rng_for(88);
    let mut tuples: Vec<(f64, LimitTuple)> = FAMILIES.iter().map(|k| (0.7, k.limits(1.0))).collect();
    while tuples.len() < FAMILIES.len() + 20 {
        let l = LimitTuple::new(
            rng.random_range(0.0..3.0),
            rng.random_range(0.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        );
        if l.determinant().abs() > 1e-2 {
            tuples.push((rng.random_range(0.05..0.95), l));
        }
    }
    for (h, l) in tuples {
        let p = i_high_frequency(th(h, 1.0), &l).unwrap();
        let j = j_matrix(hu(h)).unwrap();
        worst = worst.max(rel(p.i_hf.determinant(), l.determinant().powi(2) * j.determinant()));
    }
    (worst < 1e-12, format!("largest rel. deviation {worst:.2e} over 24 tuples (1e-12)"))
}

fn kawai_limit() -> Outcome {
    let cfg = campaign(th(0.7, 1.0), vec![256, 1024, 8192], 5000, RateKind::Diagonal, 99);
    let rep = kawai_singular(&cfg).unwrap();
    let last = rep.rows.last().unwrap();
    let worst = last.rel_err.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let dets: Vec<String> = rep.rows.iter().map(|r| format!("{:.4}", r.det)).collect();
    let c = last.zeta.cov;
    (
        worst <= rep.tolerance && rep.det_decreasing,
        format!(
            "cov(zeta) at n=8192 = [{:.4}, {:.4}, {:.4}], max rel. err {worst:.3} ({}); det {} ({})",
            c[0][0],
            c[0][1],
            c[1][1],
            rep.tolerance,
            dets.join(" -> "),
            if rep.det_decreasing { "decreasing" } else { "not decreasing" }
        ),
    )
}

fn efficient_rates() -> Outcome {
    let grid: Vec<usize> = (9..=13).map(|k| 1 << k).collect();
    let cfg = campaign(th(0.7, 1.0), grid, 1000, RateKind::LowerTri, 1010);
    let rep = rate_sweep(&cfg).unwrap();
    let t = RATE_TOLERANCES;
    let last = rep.last();
    let slope_ok = rep.slope_h >= t.slope_lo && rep.slope_h <= t.slope_hi;
    let flat_ok = rep.sigma_flatness <= t.flat_band;
    let h_ok = last.scaled_mse_h >= t.bound_slack * rep.v_h;
    let s_ok = last.scaled_mse_sigma >= t.bound_slack * rep.v_sigma;
    let nonconv: usize = rep.rows.iter().map(|r| r.nonconverged).sum();
    (
        slope_ok && flat_ok && h_ok && s_ok,
        format!(
            "slope(H) {:.3} ({}); sigma flatness {:.3} ({}); n MSE(H) / v_H {:.3} ({}); scaled MSE(sigma) / v_sigma {:.3} ({}); {nonconv} non-converged fits",
            rep.slope_h,
            verdict(slope_ok),
            rep.sigma_flatness,
            verdict(flat_ok),
            last.scaled_mse_h / rep.v_h,
            verdict(h_ok),
            last.scaled_mse_sigma / rep.v_sigma,
            verdict(s_ok)
        ),
    )
}

fn cli_round_trip(dir: &Path, args: &[&str]) -> std::result::Result<usize, String> {
    let bin = env!("CARGO_BIN_EXE_fgn-lan");
    let (a, b) = (dir.join(format!("{}-a", args[0])), dir.join(format!("{}-b", args[0])));
    let run = |extra: Vec<&str>| {
        let st = Command::new(bin).args(extra).output().map_err(|e| e.to_string())?;
        if st.status.success() {
            Ok(())
        } else {
            Err(String::from_utf8_lossy(&st.stderr).into_owned())
        }
    };
    let mut first: Vec<&str> = args.to_vec();
    first.extend(["--workers", "1", "--out", a.to_str().unwrap()]);
    run(first)?;
    let manifest = a.join("run-manifest.json");
    run(vec![args[0], "--config", manifest.to_str().unwrap(), "--workers", "4", "--out", b.to_str().unwrap()])?;
    let mut count = 0;
    for entry in std::fs::read_dir(&a).map_err(|e| e.to_string())? {
        let name = entry.map_err(|e| e.to_string())?.file_name();
        if name == "run-manifest.json" {
            continue;
        }
        let x = std::fs::read(a.join(&name)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.join(&name)).map_err(|e| format!("{name:?} missing: {e}"))?;
        if x != y {
            return Err(format!("{name:?} differs"));
        }
        count += 1;
    }
    Ok(count)
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 4] = [
        &["lan-verify", "--n", "64,256", "--reps", "300", "--kind", "symmetric,shifted_pair,lower_tri,upper_tri", "--plots"],
        &["mle-sweep", "--n", "64,128", "--reps", "100"],
        &["kawai", "--n", "64,256", "--reps", "200"],
        &["simulate", "--n", "300", "--seed", "42"],
    ];
    let mut files = 0;
    for args in runs {
        match cli_round_trip(dir.path(), args) {
            Ok(k) => files += k,
            Err(e) => return (false, format!("{}: {e}", args[0])),
        }
    }
    // the library path: the same campaign on pools of different size
    let cfg = campaign(th(0.6, 1.3), vec![128, 512], 200, RateKind::UpperTri, 5);
    let one = with_workers(1, || mc_lan_families(&cfg, &FAMILIES)).unwrap().unwrap();
    let four = with_workers(4, || mc_lan_families(&cfg, &FAMILIES)).unwrap().unwrap();
    let same = one == four;
    (same, format!("{files} output files byte-identical across worker counts; library reports identical: {same}"))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "white-noise reduction", white_noise_reduction),
        (2, "oracle equivalence", oracle_equivalence),
        (3, "derivative correctness", derivative_correctness),
        (4, "spectral identities", spectral_identities),
        (5, "(A_n, B_n) covariance", score_covariance),
        (6, "exact chi-square law", chi_square_law),
        (7, "LAN expansion", lan_expansion),
        (8, "nondegeneracy identity", nondegeneracy_identity),
        (9, "singular diagonal limit", kawai_limit),
        (10, "efficient rates", efficient_rates),
        (11, "reproducibility", reproducibility),
    ];
    // `cargo test -- --list` and friends expect no work
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let only: Option<Vec<u32>> = std::env::var("FGN_LAN_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = f();
        println!("criterion {id:>2} ({name}): {} [{:.1}s] {detail}", verdict(ok), start.elapsed().as_secs_f64());
        if !ok {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria PASS");
    } else {
        println!("acceptance: FAIL for criteria {failed:?}");
        std::process::exit(1);
    }
}
