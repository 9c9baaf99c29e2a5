//! Flat per-subcommand settings, their JSON file form and default resolution.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::Method;

/// Every key a subcommand section may carry. Unset keys are omitted when
/// serialised, so a resolved section lists exactly what a run used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hurst: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plots: Option<bool>,
}

macro_rules! overlay {
    ($base:expr, $over:expr, $($f:ident),*) => {
        Settings { $($f: $over.$f.or($base.$f)),* }
    };
}

impl Settings {
    /// `over` wins wherever it sets a key.
    pub fn overlay(self, over: Settings) -> Settings {
        overlay!(
            self, over, hurst, sigma, n, delta, delta_c, tau, reps, seed, method, kind, gamma,
            gamma_hat, u, nodes, input, plots
        )
    }

    pub fn keys(&self) -> Vec<String> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(m)) => m.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sub {
    Simulate,
    Loglik,
    Fisher,
    RateCheck,
    LanVerify,
    MleSweep,
    Efficiency,
    Kawai,
}

pub const ALL_KINDS: [&str; 5] = ["symmetric", "shifted_pair", "lower_tri", "upper_tri", "diagonal"];

impl Sub {
    pub fn name(self) -> &'static str {
        match self {
            Sub::Simulate => "simulate",
            Sub::Loglik => "loglik",
            Sub::Fisher => "fisher",
            Sub::RateCheck => "rate-check",
            Sub::LanVerify => "lan-verify",
            Sub::MleSweep => "mle-sweep",
            Sub::Efficiency => "efficiency",
            Sub::Kawai => "kawai",
        }
    }

    /// Keys accepted in this subcommand's section.
    pub fn keys(self) -> &'static [&'static str] {
        const SIM: &[&str] = &["hurst", "sigma", "n", "delta", "delta_c", "tau", "seed", "method"];
        const LOGLIK: &[&str] =
            &["hurst", "sigma", "n", "delta", "delta_c", "tau", "seed", "method", "input"];
        const FISHER: &[&str] = &["hurst", "sigma", "kind", "gamma", "gamma_hat", "nodes"];
        const RATE: &[&str] = &["sigma", "n", "delta_c", "tau", "kind", "gamma", "gamma_hat"];
        const LAN: &[&str] = &[
            "hurst", "sigma", "n", "delta_c", "tau", "reps", "seed", "method", "kind", "gamma",
            "gamma_hat", "u", "plots",
        ];
        const MC: &[&str] = &["hurst", "sigma", "n", "delta_c", "tau", "reps", "seed", "method", "plots"];
        match self {
            Sub::Simulate => SIM,
            Sub::Loglik => LOGLIK,
            Sub::Fisher => FISHER,
            Sub::RateCheck => RATE,
            Sub::LanVerify => LAN,
            Sub::MleSweep | Sub::Efficiency | Sub::Kawai => MC,
        }
    }

    /// Checks keys against this subcommand and fills every default.
    pub fn resolve(self, s: Settings) -> Result<Settings> {
        let allowed = self.keys();
        if let Some(bad) = s.keys().into_iter().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!(
                "'{bad}' does not apply to {} (accepted: {})",
                self.name(),
                allowed.join(", ")
            )));
        }
        let has = |k: &str| allowed.contains(&k);
        let mut r = s;
        let default_n: Vec<usize> = match self {
            Sub::Simulate | Sub::Loglik => vec![1024],
            Sub::RateCheck => (4..=20).map(|k| 1usize << k).collect(),
            Sub::LanVerify | Sub::Kawai => vec![256, 1024, 8192],
            Sub::MleSweep | Sub::Efficiency => (9..=13).map(|k| 1usize << k).collect(),
            Sub::Fisher => Vec::new(),
        };
        if has("hurst") {
            r.hurst.get_or_insert_with(|| vec![0.7]);
        }
        if has("sigma") {
            r.sigma.get_or_insert(1.0);
        }
        if has("n") {
            r.n.get_or_insert(default_n);
        }
        if has("delta_c") {
            r.delta_c.get_or_insert(1.0);
        }
        if has("tau") {
            r.tau.get_or_insert(0.5);
        }
        if has("reps") {
            r.reps.get_or_insert(1000);
        }
        if has("seed") {
            r.seed.get_or_insert(1);
        }
        if has("method") {
            r.method.get_or_insert(Method::Circulant);
        }
        if has("kind") {
            match self {
                Sub::RateCheck => {
                    r.kind.get_or_insert_with(|| ALL_KINDS.iter().map(|s| s.to_string()).collect());
                }
                Sub::LanVerify => {
                    r.kind.get_or_insert_with(|| vec!["lower_tri".into()]);
                }
                _ => {}
            }
            r.gamma.get_or_insert(1.0);
            r.gamma_hat.get_or_insert(-1.0);
        }
        if has("u") {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            r.u.get_or_insert_with(|| vec![[1.0, 0.0], [0.0, 1.0], [h, h]]);
        }
        if has("nodes") {
            r.nodes.get_or_insert(crate::fisher::DEFAULT_NODES);
        }
        if has("plots") {
            r.plots.get_or_insert(false);
        }
        if has("delta") && r.delta.is_none() {
            let n = single(r.n.as_deref().unwrap_or_default(), "n")?;
            r.delta = Some(r.delta_c.unwrap_or(1.0) * (n as f64).powf(-r.tau.unwrap_or(0.5)));
        }
        Ok(r)
    }
}

pub fn single<T: Copy>(v: &[T], key: &str) -> Result<T> {
    match v {
        [x] => Ok(*x),
        _ => Err(Error::Config(format!("'{key}' takes exactly one value here, got {}", v.len()))),
    }
}

/// A configuration document: one optional section per subcommand. The
/// `manifest` key written by a run is accepted and ignored, so a manifest can
/// be fed back as configuration.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub simulate: Option<Settings>,
    #[serde(default)]
    pub loglik: Option<Settings>,
    #[serde(default)]
    pub fisher: Option<Settings>,
    #[serde(default, rename = "rate-check")]
    pub rate_check: Option<Settings>,
    #[serde(default, rename = "lan-verify")]
    pub lan_verify: Option<Settings>,
    #[serde(default, rename = "mle-sweep")]
    pub mle_sweep: Option<Settings>,
    #[serde(default)]
    pub efficiency: Option<Settings>,
    #[serde(default)]
    pub kawai: Option<Settings>,
    #[serde(default)]
    pub manifest: Option<serde_json::Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))
    }

    pub fn section(&self, sub: Sub) -> Settings {
        let s = match sub {
            Sub::Simulate => &self.simulate,
            Sub::Loglik => &self.loglik,
            Sub::Fisher => &self.fisher,
            Sub::RateCheck => &self.rate_check,
            Sub::LanVerify => &self.lan_verify,
            Sub::MleSweep => &self.mle_sweep,
            Sub::Efficiency => &self.efficiency,
            Sub::Kawai => &self.kawai,
        };
        s.clone().unwrap_or_default()
    }
}
