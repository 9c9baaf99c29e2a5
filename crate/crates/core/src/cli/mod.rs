//! `fgn-lan` command line: settings resolution, dispatch and output files.
//!
//! Each subcommand reads an optional JSON section (`--config`), overlays its
//! flags, fills defaults and writes versioned CSV tables plus a
//! `run-manifest.json` into the output directory. The manifest carries the
//! resolved section under the subcommand's name, so it can be passed back with
//! `--config` to reproduce the run.

pub mod config;
pub mod output;
pub mod plot;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{
    kawai_singular, mc_lan_families, mc_score_cov, rate_sweep, with_workers, CampaignConfig,
    RateReport, LAN_TOLERANCES, RATE_TOLERANCES,
};
use crate::fgn_model::{Hurst, Theta};
use crate::fisher::{i_high_frequency, i_large_sample, j_matrix, limit_matrix, spectral_integrals};
use crate::likelihood::{score_from, stats, Observation};
use crate::rate_matrix::{check_conditions, RateKind, SamplingScheme};
use crate::simulate::{sample, SimConfig};
use config::{single, ConfigFile, Settings, Sub};
use output::{num, write_atomic, Artifact, Table};
use plot::{line_chart, Series};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "FGN_LAN_OUT";
pub const MANIFEST: &str = "run-manifest.json";

#[derive(Debug, Parser)]
#[command(name = "fgn-lan", version, about = "Exact likelihood inference and LAN checks for high-frequency fractional Gaussian noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct ModelFlags {
    /// Hurst index (comma-separated list where several are accepted)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    hurst: Option<Vec<f64>>,
    /// Scale parameter sigma
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct SchemeFlags {
    /// Sample sizes, comma-separated
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Constant c in delta_n = c n^(-tau)
    #[arg(long, allow_negative_numbers = true)]
    delta_c: Option<f64>,
    /// Exponent tau in delta_n = c n^(-tau)
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct SeedFlags {
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Path generator: circulant or cholesky
    #[arg(long, value_parser = parse_method)]
    method: Option<crate::simulate::Method>,
}

#[derive(Debug, Args, Default)]
pub struct KindFlags {
    /// Rate-matrix families: symmetric, shifted_pair, lower_tri, upper_tri, diagonal
    #[arg(long, value_delimiter = ',')]
    kind: Option<Vec<String>>,
    /// gamma of the shifted_pair family
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// gamma_hat of the shifted_pair family
    #[arg(long, allow_negative_numbers = true)]
    gamma_hat: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct RunFlags {
    /// JSON configuration (a previous run-manifest.json works too)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: $FGN_LAN_OUT or ./fgn-lan-out]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core); results do not depend on it
    #[arg(long)]
    workers: Option<usize>,
    /// Print the resolved configuration and exit
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    model: ModelFlags,
    #[command(flatten)]
    scheme: SchemeFlags,
    /// Sampling interval (overrides c n^(-tau))
    #[arg(long)]
    delta: Option<f64>,
    #[command(flatten)]
    seed: SeedFlags,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Debug, Args)]
pub struct LoglikArgs {
    #[command(flatten)]
    model: ModelFlags,
    #[command(flatten)]
    scheme: SchemeFlags,
    #[arg(long)]
    delta: Option<f64>,
    #[command(flatten)]
    seed: SeedFlags,
    /// CSV written by `simulate`; without it a path is simulated from --seed
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Debug, Args)]
pub struct FisherArgs {
    #[command(flatten)]
    model: ModelFlags,
    #[command(flatten)]
    kind: KindFlags,
    /// Gauss-Legendre nodes per panel
    #[arg(long)]
    nodes: Option<usize>,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Debug, Args)]
pub struct RateCheckArgs {
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    #[command(flatten)]
    scheme: SchemeFlags,
    #[command(flatten)]
    kind: KindFlags,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Debug, Args)]
pub struct CampaignArgs {
    #[command(flatten)]
    model: ModelFlags,
    #[command(flatten)]
    scheme: SchemeFlags,
    /// Replications per sample size
    #[arg(long)]
    reps: Option<usize>,
    #[command(flatten)]
    seed: SeedFlags,
    /// Also write SVG charts
    #[arg(long)]
    plots: bool,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Debug, Args)]
pub struct LanArgs {
    #[command(flatten)]
    campaign: CampaignArgs,
    #[command(flatten)]
    kind: KindFlags,
    /// Localisation vectors, e.g. "1,0;0,1"
    #[arg(long, value_parser = parse_u_list, allow_hyphen_values = true)]
    u: Option<UList>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one fGn path
    Simulate(SimulateArgs),
    /// Log-likelihood, statistics A..E and score of one path
    Loglik(LoglikArgs),
    /// Spectral integrals, J(H) and Fisher information matrices
    Fisher(FisherArgs),
    /// Check the six rate-matrix conditions along a sampling scheme
    RateCheck(RateCheckArgs),
    /// Monte Carlo check of the LAN expansion
    LanVerify(LanArgs),
    /// Maximum likelihood fits over a grid of sample sizes
    MleSweep(CampaignArgs),
    /// Estimation rates and efficiency bounds
    Efficiency(CampaignArgs),
    /// Normalised score under the diagonal rate matrix
    Kawai(CampaignArgs),
}

fn parse_method(s: &str) -> std::result::Result<crate::simulate::Method, String> {
    serde_json::from_value(json!(s)).map_err(|_| format!("unknown method '{s}' (circulant, cholesky)"))
}

/// Semicolon-separated localisation vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct UList(pub Vec<[f64; 2]>);

fn parse_u_list(s: &str) -> std::result::Result<UList, String> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let v: Vec<f64> = p
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|e| format!("bad number '{x}': {e}")))
                .collect::<std::result::Result<_, _>>()?;
            match v.as_slice() {
                [a, b] => Ok([*a, *b]),
                _ => Err(format!("'{p}' is not a pair")),
            }
        })
        .collect::<std::result::Result<_, _>>()
        .map(UList)
}

impl ModelFlags {
    fn apply(&self, s: &mut Settings) {
        s.hurst = self.hurst.clone();
        s.sigma = self.sigma;
    }
}

impl SchemeFlags {
    fn apply(&self, s: &mut Settings) {
        s.n = self.n.clone();
        s.delta_c = self.delta_c;
        s.tau = self.tau;
    }
}

impl SeedFlags {
    fn apply(&self, s: &mut Settings) {
        s.seed = self.seed;
        s.method = self.method;
    }
}

impl KindFlags {
    fn apply(&self, s: &mut Settings) {
        s.kind = self.kind.clone();
        s.gamma = self.gamma;
        s.gamma_hat = self.gamma_hat;
    }
}

impl CampaignArgs {
    fn apply(&self, s: &mut Settings) {
        self.model.apply(s);
        self.scheme.apply(s);
        self.seed.apply(s);
        s.reps = self.reps;
        s.plots = self.plots.then_some(true);
    }
}

impl Command {
    fn split(&self) -> (Sub, Settings, &RunFlags) {
        let mut s = Settings::default();
        let (sub, run) = match self {
            Command::Simulate(a) => {
                a.model.apply(&mut s);
                a.scheme.apply(&mut s);
                a.seed.apply(&mut s);
                s.delta = a.delta;
                (Sub::Simulate, &a.run)
            }
            Command::Loglik(a) => {
                a.model.apply(&mut s);
                a.scheme.apply(&mut s);
                a.seed.apply(&mut s);
                s.delta = a.delta;
                s.input = a.input.clone();
                (Sub::Loglik, &a.run)
            }
            Command::Fisher(a) => {
                a.model.apply(&mut s);
                a.kind.apply(&mut s);
                s.nodes = a.nodes;
                (Sub::Fisher, &a.run)
            }
            Command::RateCheck(a) => {
                s.sigma = a.sigma;
                a.scheme.apply(&mut s);
                a.kind.apply(&mut s);
                (Sub::RateCheck, &a.run)
            }
            Command::LanVerify(a) => {
                a.campaign.apply(&mut s);
                a.kind.apply(&mut s);
                s.u = a.u.clone().map(|l| l.0);
                (Sub::LanVerify, &a.campaign.run)
            }
            Command::MleSweep(a) => {
                a.apply(&mut s);
                (Sub::MleSweep, &a.run)
            }
            Command::Efficiency(a) => {
                a.apply(&mut s);
                (Sub::Efficiency, &a.run)
            }
            Command::Kawai(a) => {
                a.apply(&mut s);
                (Sub::Kawai, &a.run)
            }
        };
        (sub, s, run)
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code: 0 success, 1 invalid input, 2 runtime failure.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

/// Resolved settings for `cmd`: config section, then flags, then defaults.
pub fn resolve(cmd: &Command) -> Result<(Sub, Settings)> {
    let (sub, flags, run) = cmd.split();
    let file = match &run.config {
        Some(p) => ConfigFile::load(p)?.section(sub),
        None => Settings::default(),
    };
    Ok((sub, sub.resolve(file.overlay(flags))?))
}

fn out_dir(run: &RunFlags) -> PathBuf {
    run.out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("fgn-lan-out"))
}

pub fn execute(cli: &Cli) -> Result<()> {
    let (sub, settings) = resolve(&cli.command)?;
    let (_, _, run) = cli.command.split();
    let section = json!({ sub.name(): settings });
    if run.dry_run {
        println!("{}", serde_json::to_string_pretty(&section)?);
        return Ok(());
    }
    let dir = out_dir(run);
    std::fs::create_dir_all(&dir)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
    let workers = run.workers.unwrap_or(0);
    let artifacts = with_workers(workers, || produce(sub, &settings))??;
    for a in &artifacts {
        write_atomic(&dir, &a.name, &a.bytes)?;
    }
    let mut manifest = section;
    manifest["manifest"] = json!({
        "tool": "fgn-lan",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": sub.name(),
        "seed": settings.seed,
        "workers": workers,
        "artifacts": artifacts.iter().map(|a| a.name.clone()).collect::<Vec<_>>(),
    });
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_atomic(&dir, MANIFEST, text.as_bytes())?;
    eprintln!("wrote {} file(s) to {}", artifacts.len() + 1, dir.display());
    Ok(())
}

/// Computes every output of one subcommand in memory.
pub fn produce(sub: Sub, s: &Settings) -> Result<Vec<Artifact>> {
    match sub {
        Sub::Simulate => simulate_cmd(s),
        Sub::Loglik => loglik_cmd(s),
        Sub::Fisher => fisher_cmd(s),
        Sub::RateCheck => rate_check_cmd(s),
        Sub::LanVerify => lan_cmd(s),
        Sub::MleSweep => mle_cmd(s),
        Sub::Efficiency => efficiency_cmd(s),
        Sub::Kawai => kawai_cmd(s),
    }
}

fn req<T: Clone>(v: &Option<T>, key: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Config(format!("missing '{key}'")))
}

fn theta_of(s: &Settings) -> Result<Theta> {
    Theta::new(single(&req(&s.hurst, "hurst")?, "hurst")?, req(&s.sigma, "sigma")?)
}

fn scheme_of(s: &Settings) -> Result<SamplingScheme> {
    SamplingScheme::power(req(&s.delta_c, "delta_c")?, req(&s.tau, "tau")?, req(&s.n, "n")?)
}

fn kinds_of(s: &Settings) -> Result<Vec<RateKind>> {
    let (g, gh) = (req(&s.gamma, "gamma")?, req(&s.gamma_hat, "gamma_hat")?);
    s.kind.as_deref().unwrap_or_default().iter().map(|k| RateKind::parse(k, g, gh)).collect()
}

fn campaign_of(s: &Settings, kind: RateKind) -> Result<CampaignConfig> {
    let cfg = CampaignConfig {
        theta0: theta_of(s)?,
        scheme: scheme_of(s)?,
        reps: req(&s.reps, "reps")?,
        u_list: s.u.clone().unwrap_or_default(),
        rate_kind: kind,
        master_seed: req(&s.seed, "seed")?,
        method: req(&s.method, "method")?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn simulate_cmd(s: &Settings) -> Result<Vec<Artifact>> {
    let n = single(&req(&s.n, "n")?, "n")?;
    let delta = req(&s.delta, "delta")?;
    let cfg = SimConfig {
        theta: theta_of(s)?,
        n,
        delta,
        seed: req(&s.seed, "seed")?,
        method: req(&s.method, "method")?,
        cholesky_fallback: false,
    };
    let obs = sample(&cfg)?;
    let mut t = Table::new("simulate.csv", &["index", "delta", "x"]);
    for (i, x) in obs.x().iter().enumerate() {
        t.push(vec![i.to_string(), num(delta), num(*x)]);
    }
    Ok(vec![t.into_artifact()?])
}

fn read_path(path: &Path) -> Result<Observation> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Config(format!("cannot read input {}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("{} has no '{name}' column", path.display())))
    };
    let (ix, id) = (col("x")?, col("delta")?);
    let mut x = Vec::new();
    let mut delta: Option<f64> = None;
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Config(format!("unparsable row in {}", path.display())))
        };
        let d = parse(id)?;
        if delta.is_some_and(|d0| d0 != d) {
            return Err(Error::Config(format!("{} mixes sampling intervals", path.display())));
        }
        delta = Some(d);
        x.push(parse(ix)?);
    }
    Observation::new(x, delta.unwrap_or(f64::NAN))
}

fn loglik_cmd(s: &Settings) -> Result<Vec<Artifact>> {
    let theta = theta_of(s)?;
    let obs = match &s.input {
        Some(p) => read_path(p)?,
        None => {
            let cfg = SimConfig {
                theta,
                n: single(&req(&s.n, "n")?, "n")?,
                delta: req(&s.delta, "delta")?,
                seed: req(&s.seed, "seed")?,
                method: req(&s.method, "method")?,
                cholesky_fallback: false,
            };
            sample(&cfg)?
        }
    };
    let st = stats(theta, &obs)?;
    let g = score_from(st.a, st.b, theta, &obs);
    let mut t = Table::new(
        "loglik.csv",
        &["H", "sigma", "n", "delta", "loglik", "A", "B", "C", "D", "E", "score_H", "score_sigma"],
    );
    t.push(vec![
        num(theta.h()),
        num(theta.sigma()),
        obs.n().to_string(),
        num(obs.delta()),
        num(st.loglik),
        num(st.a),
        num(st.b),
        num(st.c),
        num(st.d),
        num(st.e),
        num(g[0]),
        num(g[1]),
    ]);
    println!("loglik = {} (n = {}, delta = {})", st.loglik, obs.n(), obs.delta());
    Ok(vec![t.into_artifact()?])
}

fn fisher_cmd(s: &Settings) -> Result<Vec<Artifact>> {
    let nodes = req(&s.nodes, "nodes")?;
    let sigma = req(&s.sigma, "sigma")?;
    let kinds = kinds_of(s)?;
    let mut j = Table::new("fisher.csv", &["H", "i1", "i2", "J11", "J12", "J22", "quad_error"]);
    let mut large = Table::new("fisher_large_sample.csv", &["H", "sigma", "I11", "I12", "I22"]);
    let mut hf = Table::new(
        "fisher_information.csv",
        &["H", "sigma", "family", "I11", "I12", "I22", "det_I", "limit_det", "degenerate"],
    );
    for &h in &req(&s.hurst, "hurst")? {
        let hu = Hurst::new(h)?;
        let si = spectral_integrals(hu, nodes)?;
        j.push(vec![
            num(h),
            num(si.i1),
            num(si.i2),
            num(2.0),
            num(si.e_ab()),
            num(si.e_bb()),
            num(si.quad_error),
        ]);
        println!("H = {h}: J = [[2, {}], [{}, {}]]", si.e_ab(), si.e_ab(), si.e_bb());
        let theta = Theta::new(h, sigma)?;
        let il = i_large_sample(theta)?;
        large.push(vec![num(h), num(sigma), num(il[(0, 0)]), num(il[(0, 1)]), num(il[(1, 1)])]);
        for k in &kinds {
            let limits = k.limits(sigma);
            // a degenerate family still has a (singular) information matrix
            let (i, degenerate) = match i_high_frequency(theta, &limits) {
                Ok(p) => (p.i_hf, false),
                Err(Error::DegenerateLimits(_)) => {
                    let m = limit_matrix(&limits);
                    (m * j_matrix(hu)? * m.transpose(), true)
                }
                Err(e) => return Err(e),
            };
            hf.push(vec![
                num(h),
                num(sigma),
                k.name().into(),
                num(i[(0, 0)]),
                num(i[(0, 1)]),
                num(i[(1, 1)]),
                num(i.determinant()),
                num(limits.determinant()),
                degenerate.to_string(),
            ]);
        }
    }
    let mut out = vec![j.into_artifact()?, large.into_artifact()?];
    if !hf.is_empty() {
        out.push(hf.into_artifact()?);
    }
    Ok(out)
}

fn rate_check_cmd(s: &Settings) -> Result<Vec<Artifact>> {
    let sigma = req(&s.sigma, "sigma")?;
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let scheme = scheme_of(s)?;
    let mut t = Table::new("rate_check.csv", &["family", "condition", "name", "verdict", "value", "detail"]);
    for kind in kinds_of(s)? {
        let rep = check_conditions(kind, &scheme, sigma);
        for v in &rep.verdicts {
            let verdict = if v.passed { "PASS" } else { "FAIL" };
            println!("{} condition {} ({}): {verdict}", rep.family, v.index, v.name);
            t.push(vec![
                rep.family.clone(),
                v.index.to_string(),
                v.name.into(),
                verdict.into(),
                num(v.value),
                v.detail.clone(),
            ]);
        }
    }
    Ok(vec![t.into_artifact()?])
}

fn u_label(u: [f64; 2]) -> String {
    format!("({}, {})", u[0], u[1])
}

fn lan_cmd(s: &Settings) -> Result<Vec<Artifact>> {
    let kinds = kinds_of(s)?;
    let first = *kinds.first().ok_or_else(|| Error::Config("'kind' is empty".into()))?;
    let cfg = campaign_of(s, first)?;
    let lan = mc_lan_families(&cfg, &kinds)?;
    let sc = mc_score_cov(&cfg)?;

    let mut summary = Table::new(
        "lan_summary.csv",
        &[
            "family", "n", "delta", "reps", "cov11", "cov12", "cov22", "se11", "se12", "se22", "I11", "I12",
            "I22", "rel11", "rel12", "rel22", "finite_n11", "finite_n12", "finite_n22", "nondegenerate",
            "cov_tolerance",
        ],
    );
    let mut rem = Table::new(
        "lan_remainders.csv",
        &["family", "n", "u_index", "u1", "u2", "median_abs_r", "q90_abs_r", "mean_r"],
    );
    let mut samples = Table::new("lan_samples.csv", &["family", "n", "rep", "statistic", "value"]);
    for row in &lan.rows {
        let (c, e, t, r, f) = (&row.zeta.cov, &row.zeta.se, &row.target, &row.rel_err, &row.finite_n);
        summary.push(vec![
            row.family.clone(),
            row.n.to_string(),
            num(row.delta),
            row.zeta.count.to_string(),
            num(c[0][0]),
            num(c[0][1]),
            num(c[1][1]),
            num(e[0][0]),
            num(e[0][1]),
            num(e[1][1]),
            num(t[0][0]),
            num(t[0][1]),
            num(t[1][1]),
            num(r[0][0]),
            num(r[0][1]),
            num(r[1][1]),
            num(f[0][0]),
            num(f[0][1]),
            num(f[1][1]),
            row.nondegenerate.to_string(),
            num(LAN_TOLERANCES.cov_rel),
        ]);
        for (ui, rs) in row.remainders.iter().enumerate() {
            rem.push(vec![
                row.family.clone(),
                row.n.to_string(),
                ui.to_string(),
                num(rs.u[0]),
                num(rs.u[1]),
                num(rs.median_abs),
                num(rs.q90_abs),
                num(rs.mean),
            ]);
        }
        for (rep, z) in row.zeta_samples.iter().enumerate() {
            for (name, v) in [("zeta1", z[0]), ("zeta2", z[1])] {
                samples.push(vec![row.family.clone(), row.n.to_string(), rep.to_string(), name.into(), num(v)]);
            }
        }
        for (ui, rs) in row.r_samples.iter().enumerate() {
            let name = format!("r_u{ui}");
            for (rep, v) in rs.iter().enumerate() {
                samples.push(vec![row.family.clone(), row.n.to_string(), rep.to_string(), name.clone(), num(*v)]);
            }
        }
    }
    let mut trend = Table::new(
        "lan_trend.csv",
        &["family", "u1", "u2", "medians", "strictly_decreasing", "final_median", "final_tolerance", "rule"],
    );
    for tr in &lan.trends {
        let meds: Vec<String> = tr.medians.iter().map(|m| num(*m)).collect();
        println!(
            "{} u = {}: median |r_n| {} -> {}",
            tr.family,
            u_label(tr.u),
            meds.join(" "),
            if tr.strictly_decreasing { "decreasing" } else { "not decreasing" }
        );
        trend.push(vec![
            tr.family.clone(),
            num(tr.u[0]),
            num(tr.u[1]),
            meds.join(";"),
            tr.strictly_decreasing.to_string(),
            num(tr.final_median),
            num(LAN_TOLERANCES.final_median),
            "median |r_n| strictly decreasing along the grid (one reading of r_n -> 0)".into(),
        ]);
    }
    let (score_tab, score_samples) = score_cov_tables(&sc)?;
    let mut out = vec![
        summary.into_artifact()?,
        rem.into_artifact()?,
        trend.into_artifact()?,
        samples.into_artifact()?,
        score_tab,
        score_samples,
    ];
    if s.plots == Some(true) {
        let series: Vec<Series> = lan
            .trends
            .iter()
            .map(|tr| Series {
                name: format!("{} u={}", tr.family, u_label(tr.u)),
                points: cfg.scheme.n_grid.iter().zip(&tr.medians).map(|(&n, &m)| (n as f64, m)).collect(),
            })
            .collect();
        let svg = line_chart("LAN remainder decay", "n", "median |r_n|", &series, true, true);
        out.push(Artifact { name: "lan_remainder_decay.svg".into(), bytes: svg.into_bytes() });
    }
    Ok(out)
}

fn score_cov_tables(sc: &crate::experiments::ScoreCovReport) -> Result<(Artifact, Artifact)> {
    let mut t = Table::new(
        "score_cov.csv",
        &[
            "n", "delta", "reps", "cov11", "cov12", "cov22", "se11", "se12", "se22", "J11", "J12", "J22", "z11",
            "z12", "z22", "finite_n12", "finite_n22",
        ],
    );
    let mut samples = Table::new("score_cov_samples.csv", &["n", "rep", "statistic", "value"]);
    for row in &sc.rows {
        let (c, e, j, z) = (&row.estimate.cov, &row.estimate.se, &row.target, &row.z);
        t.push(vec![
            row.n.to_string(),
            num(row.delta),
            row.estimate.count.to_string(),
            num(c[0][0]),
            num(c[0][1]),
            num(c[1][1]),
            num(e[0][0]),
            num(e[0][1]),
            num(e[1][1]),
            num(j[0][0]),
            num(j[0][1]),
            num(j[1][1]),
            num(z[0][0]),
            num(z[0][1]),
            num(z[1][1]),
            num(row.finite_n[0][1]),
            num(row.finite_n[1][1]),
        ]);
        for (rep, ab) in row.samples.iter().enumerate() {
            for (name, v) in [("A", ab[0]), ("B", ab[1])] {
                samples.push(vec![row.n.to_string(), rep.to_string(), name.into(), num(v)]);
            }
        }
    }
    Ok((t.into_artifact()?, samples.into_artifact()?))
}

fn fits_table(rep: &RateReport) -> Result<Artifact> {
    let mut t = Table::new("mle_fits.csv", &["n", "rep", "statistic", "value"]);
    for row in &rep.rows {
        for (r, f) in row.fits.iter().enumerate() {
            for (name, v) in [
                ("h_hat", num(f.h_hat)),
                ("sigma_hat", num(f.sigma_hat)),
                ("loglik", num(f.loglik_at_opt)),
                ("converged", u8::from(f.converged).to_string()),
                ("at_boundary", u8::from(f.at_boundary).to_string()),
            ] {
                t.push(vec![row.n.to_string(), r.to_string(), name.into(), v]);
            }
        }
    }
    t.into_artifact()
}

fn mle_cmd(s: &Settings) -> Result<Vec<Artifact>> {
    let cfg = campaign_of(s, RateKind::LowerTri)?;
    let rep = rate_sweep(&cfg)?;
    let mut t = Table::new(
        "mle_summary.csv",
        &["n", "delta", "reps", "mean_h", "sd_h", "median_h", "mean_sigma", "sd_sigma", "median_sigma", "nonconverged", "at_boundary"],
    );
    for row in &rep.rows {
        let hs: Vec<f64> = row.fits.iter().map(|f| f.h_hat).collect();
        let ss: Vec<f64> = row.fits.iter().map(|f| f.sigma_hat).collect();
        let (mh, sh) = mean_sd(&hs);
        let (ms, sd) = mean_sd(&ss);
        println!("n = {}: mean h_hat = {mh}, mean sigma_hat = {ms}", row.n);
        t.push(vec![
            row.n.to_string(),
            num(row.delta),
            row.fits.len().to_string(),
            num(mh),
            num(sh),
            num(crate::experiments::median(&hs)),
            num(ms),
            num(sd),
            num(crate::experiments::median(&ss)),
            row.nonconverged.to_string(),
            row.at_boundary.to_string(),
        ]);
    }
    let mut out = vec![t.into_artifact()?, fits_table(&rep)?];
    if s.plots == Some(true) {
        out.push(rmse_chart(&rep));
    }
    Ok(out)
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0);
    (m, var.sqrt())
}

fn rmse_chart(rep: &RateReport) -> Artifact {
    let pts = |f: &dyn Fn(&crate::experiments::RateRow) -> f64| -> Vec<(f64, f64)> {
        rep.rows.iter().map(|r| (r.n as f64, f(r))).collect()
    };
    let series = [
        Series { name: "RMSE(h_hat)".into(), points: pts(&|r| r.rmse_h) },
        Series { name: "RMSE(sigma_hat)".into(), points: pts(&|r| r.rmse_sigma) },
        Series { name: "|log delta|/sqrt n".into(), points: pts(&|r| r.delta.ln().abs() / (r.n as f64).sqrt()) },
        Series { name: "1/sqrt n".into(), points: pts(&|r| 1.0 / (r.n as f64).sqrt()) },
    ];
    let svg = line_chart("Estimation error against n", "n", "RMSE", &series, true, true);
    Artifact { name: "rmse_vs_n.svg".into(), bytes: svg.into_bytes() }
}

fn efficiency_cmd(s: &Settings) -> Result<Vec<Artifact>> {
    let cfg = campaign_of(s, RateKind::LowerTri)?;
    let rep = rate_sweep(&cfg)?;
    let mut t = Table::new(
        "efficiency.csv",
        &[
            "n", "delta", "reps", "rmse_h", "rmse_sigma", "n_mse_h", "scaled_mse_sigma", "log_sigma_ratio",
            "nonconverged", "at_boundary",
        ],
    );
    for row in &rep.rows {
        t.push(vec![
            row.n.to_string(),
            num(row.delta),
            row.fits.len().to_string(),
            num(row.rmse_h),
            num(row.rmse_sigma),
            num(row.scaled_mse_h),
            num(row.scaled_mse_sigma),
            num(row.log_sigma_ratio),
            row.nonconverged.to_string(),
            row.at_boundary.to_string(),
        ]);
    }
    let tol = RATE_TOLERANCES;
    let last = rep.last();
    let checks = [
        ("slope_h", rep.slope_h, format!("[{}, {}]", tol.slope_lo, tol.slope_hi), rep.slope_h >= tol.slope_lo && rep.slope_h <= tol.slope_hi),
        ("slope_sigma", rep.slope_sigma, String::new(), true),
        ("sigma_flatness", rep.sigma_flatness, format!("<= {}", tol.flat_band), rep.sigma_flatness <= tol.flat_band),
        ("v_h", rep.v_h, String::new(), true),
        ("v_sigma", rep.v_sigma, String::new(), true),
        (
            "n_mse_h_over_v_h",
            last.scaled_mse_h / rep.v_h,
            format!(">= {}", tol.bound_slack),
            last.scaled_mse_h >= tol.bound_slack * rep.v_h,
        ),
        (
            "scaled_mse_sigma_over_v_sigma",
            last.scaled_mse_sigma / rep.v_sigma,
            format!(">= {}", tol.bound_slack),
            last.scaled_mse_sigma >= tol.bound_slack * rep.v_sigma,
        ),
    ];
    let mut sum = Table::new("efficiency_summary.csv", &["quantity", "value", "tolerance", "verdict"]);
    for (name, v, tolerance, ok) in checks {
        let verdict = if tolerance.is_empty() { "-" } else if ok { "PASS" } else { "FAIL" };
        println!("{name} = {v} {tolerance} {verdict}");
        sum.push(vec![name.into(), num(v), tolerance, verdict.into()]);
    }
    let mut out = vec![t.into_artifact()?, sum.into_artifact()?, fits_table(&rep)?];
    if s.plots == Some(true) {
        out.push(rmse_chart(&rep));
    }
    Ok(out)
}

fn kawai_cmd(s: &Settings) -> Result<Vec<Artifact>> {
    let cfg = campaign_of(s, RateKind::Diagonal)?;
    let rep = kawai_singular(&cfg)?;
    let mut t = Table::new(
        "kawai.csv",
        &[
            "n", "delta", "reps", "cov11", "cov12", "cov22", "se11", "se12", "se22", "limit11", "limit12",
            "limit22", "rel11", "rel12", "rel22", "det", "min_eigenvalue", "finite_n11", "finite_n12",
            "finite_n22", "tolerance",
        ],
    );
    let mut samples = Table::new("kawai_samples.csv", &["n", "rep", "statistic", "value"]);
    for row in &rep.rows {
        let (c, e, r, f) = (&row.zeta.cov, &row.zeta.se, &row.rel_err, &row.finite_n);
        println!("n = {}: cov(zeta) = {:?}, det = {}", row.n, c, row.det);
        t.push(vec![
            row.n.to_string(),
            num(row.delta),
            row.zeta.count.to_string(),
            num(c[0][0]),
            num(c[0][1]),
            num(c[1][1]),
            num(e[0][0]),
            num(e[0][1]),
            num(e[1][1]),
            num(rep.target[0][0]),
            num(rep.target[0][1]),
            num(rep.target[1][1]),
            num(r[0][0]),
            num(r[0][1]),
            num(r[1][1]),
            num(row.det),
            num(row.min_eigenvalue),
            num(f[0][0]),
            num(f[0][1]),
            num(f[1][1]),
            num(rep.tolerance),
        ]);
        for (rep_i, z) in row.zeta_samples.iter().enumerate() {
            for (name, v) in [("zeta1", z[0]), ("zeta2", z[1])] {
                samples.push(vec![row.n.to_string(), rep_i.to_string(), name.into(), num(v)]);
            }
        }
    }
    println!("determinant decreasing along the grid: {}", rep.det_decreasing);
    let mut out = vec![t.into_artifact()?, samples.into_artifact()?];
    if s.plots == Some(true) {
        let series = [Series {
            name: "det cov(zeta)".into(),
            points: rep.rows.iter().map(|r| (r.n as f64, r.det)).collect(),
        }];
        let svg = line_chart("Diagonal rate: determinant of cov(zeta_n)", "n", "det", &series, true, true);
        out.push(Artifact { name: "kawai_det.svg".into(), bytes: svg.into_bytes() });
    }
    Ok(out)
}
