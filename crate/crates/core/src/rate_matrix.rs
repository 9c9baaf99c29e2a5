//! Rate matrices `phi_n = [[alpha_n, alpha_hat_n], [beta_n, beta_hat_n]]` and
//! the six conditions under which they localise the fGn experiment.

use std::fmt;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The families of rate matrix known to the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RateKind {
    /// `[[1/(sqrt n log D), 1/sqrt n], [1/sqrt n, -sigma log D / sqrt n]]`.
    Symmetric,
    /// `(1/sqrt n) [[1, 1], [sigma (gamma - log D), sigma (gamma_hat - log D)]]`.
    ShiftedPair { gamma: f64, gamma_hat: f64 },
    /// `(1/sqrt n) [[1, 0], [-sigma log D, 1]]`.
    LowerTri,
    /// `(1/sqrt n) [[1/log D, 1], [0, -sigma log D]]`.
    UpperTri,
    /// `diag(1/(sqrt n log D), 1/sqrt n)`, whose Fisher limit is singular.
    Diagonal,
}

impl RateKind {
    pub fn name(&self) -> &'static str {
        match self {
            RateKind::Symmetric => "symmetric",
            RateKind::ShiftedPair { .. } => "shifted_pair",
            RateKind::LowerTri => "lower_tri",
            RateKind::UpperTri => "upper_tri",
            RateKind::Diagonal => "diagonal",
        }
    }

    /// Parses a family name; `shifted_pair` takes its two shifts separately.
    pub fn parse(name: &str, gamma: f64, gamma_hat: f64) -> Result<Self> {
        Ok(match name {
            "symmetric" => RateKind::Symmetric,
            "shifted_pair" => RateKind::ShiftedPair { gamma, gamma_hat },
            "lower_tri" => RateKind::LowerTri,
            "upper_tri" => RateKind::UpperTri,
            "diagonal" | "kawai" => RateKind::Diagonal,
            other => return Err(Error::Parameter(format!("unknown rate-matrix kind '{other}'"))),
        })
    }

    /// Closed-form limits `(alpha, alpha_hat, gamma, gamma_hat)`.
    pub fn limits(&self, sigma: f64) -> LimitTuple {
        match *self {
            RateKind::Symmetric => LimitTuple::new(0.0, 1.0, 1.0 + 1.0 / sigma, 0.0),
            RateKind::ShiftedPair { gamma, gamma_hat } => LimitTuple::new(1.0, 1.0, gamma, gamma_hat),
            RateKind::LowerTri => LimitTuple::new(1.0, 0.0, 0.0, 1.0 / sigma),
            RateKind::UpperTri => LimitTuple::new(0.0, 1.0, 1.0, 0.0),
            RateKind::Diagonal => LimitTuple::new(0.0, 0.0, 1.0, 1.0 / sigma),
        }
    }
}

impl fmt::Display for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateKind::ShiftedPair { gamma, gamma_hat } => {
                write!(f, "shifted_pair(gamma={gamma}, gamma_hat={gamma_hat})")
            }
            other => f.write_str(other.name()),
        }
    }
}

/// `phi_n` at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateMatrix {
    pub a: f64,
    pub a_hat: f64,
    pub b: f64,
    pub b_hat: f64,
    pub n: usize,
    pub delta: f64,
}

impl RateMatrix {
    pub fn new(a: f64, a_hat: f64, b: f64, b_hat: f64, n: usize, delta: f64) -> Self {
        Self { a, a_hat, b, b_hat, n, delta }
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.a, self.a_hat, self.b, self.b_hat)
    }

    pub fn det(&self) -> f64 {
        self.a * self.b_hat - self.a_hat * self.b
    }

    /// `phi_n u`: the shift `(dH, dsigma)` of a localised alternative.
    pub fn apply(&self, u: [f64; 2]) -> [f64; 2] {
        [self.a * u[0] + self.a_hat * u[1], self.b * u[0] + self.b_hat * u[1]]
    }

    /// `phi_n^T v`.
    pub fn apply_transpose(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.a_hat * v[0] + self.b_hat * v[1]]
    }

    /// Exact `phi_n^{-1}`.
    pub fn inverse(&self) -> Result<Matrix2<f64>> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Parameter(format!("rate matrix is singular (det = {det})")));
        }
        Ok(Matrix2::new(self.b_hat, -self.a_hat, -self.b, self.a) / det)
    }

    /// `(gamma_n, gamma_hat_n) = (alpha_n, alpha_hat_n) sqrt n log D + (beta_n, beta_hat_n) sqrt n / sigma`.
    pub fn gamma_n(&self, sigma: f64) -> (f64, f64) {
        let rn = (self.n as f64).sqrt();
        let ld = self.delta.ln();
        (
            self.a * rn * ld + self.b * rn / sigma,
            self.a_hat * rn * ld + self.b_hat * rn / sigma,
        )
    }

    /// `(alpha_n sqrt n, alpha_hat_n sqrt n)`.
    pub fn alpha_scaled(&self) -> (f64, f64) {
        let rn = (self.n as f64).sqrt();
        (self.a * rn, self.a_hat * rn)
    }

    /// Finite-`n` analogue of the limit matrix: `[[gamma_n, -alpha_n sqrt n], [gamma_hat_n, -alpha_hat_n sqrt n]]`,
    /// so that `phi_n^T grad l_n = M_n (A_n, B_n)^T`.
    pub fn score_map(&self, sigma: f64) -> Matrix2<f64> {
        let (g, gh) = self.gamma_n(sigma);
        let (al, alh) = self.alpha_scaled();
        Matrix2::new(g, -al, gh, -alh)
    }
}

/// `gamma_n` for the given rate matrix.
pub fn gamma_n(rm: &RateMatrix, sigma: f64) -> (f64, f64) {
    rm.gamma_n(sigma)
}

/// One of the literal rate-matrix families at `(n, delta, sigma)`.
pub fn example(kind: RateKind, n: usize, delta: f64, sigma: f64) -> Result<RateMatrix> {
    if n < 2 {
        return Err(Error::Parameter(format!("rate matrices need n >= 2, got {n}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("sampling interval must lie in (0, 1), got {delta}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    let rn = (n as f64).sqrt();
    let ld = delta.ln();
    let (a, a_hat, b, b_hat) = match kind {
        RateKind::Symmetric => (1.0 / (rn * ld), 1.0 / rn, 1.0 / rn, -sigma * ld / rn),
        RateKind::ShiftedPair { gamma, gamma_hat } => {
            if gamma == gamma_hat {
                return Err(Error::Parameter("shifted_pair needs gamma != gamma_hat".into()));
            }
            (1.0 / rn, 1.0 / rn, sigma * (gamma - ld) / rn, sigma * (gamma_hat - ld) / rn)
        }
        RateKind::LowerTri => (1.0 / rn, 0.0, -sigma * ld / rn, 1.0 / rn),
        RateKind::UpperTri => (1.0 / (rn * ld), 1.0 / rn, 0.0, -sigma * ld / rn),
        RateKind::Diagonal => (1.0 / (rn * ld), 0.0, 0.0, 1.0 / rn),
    };
    Ok(RateMatrix::new(a, a_hat, b, b_hat, n, delta))
}

/// `(alpha, alpha_hat, gamma, gamma_hat)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitTuple {
    pub alpha: f64,
    pub alpha_hat: f64,
    pub gamma: f64,
    pub gamma_hat: f64,
}

impl LimitTuple {
    pub fn new(alpha: f64, alpha_hat: f64, gamma: f64, gamma_hat: f64) -> Self {
        Self { alpha, alpha_hat, gamma, gamma_hat }
    }

    /// `alpha gamma_hat - alpha_hat gamma`.
    pub fn determinant(&self) -> f64 {
        self.alpha * self.gamma_hat - self.alpha_hat * self.gamma
    }

    pub fn nondegenerate(&self) -> bool {
        self.determinant().abs() > LIMIT_TOLERANCE
    }

    pub(crate) fn scale(&self) -> f64 {
        [self.alpha, self.alpha_hat, self.gamma, self.gamma_hat]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// How the sampling interval depends on `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum DeltaRule {
    /// `delta_n = c n^{-tau}`.
    Power { c: f64, tau: f64 },
    /// Explicit `(n, delta_n)` pairs.
    Table { entries: Vec<(usize, f64)> },
}

impl DeltaRule {
    pub fn delta(&self, n: usize) -> Result<f64> {
        match self {
            DeltaRule::Power { c, tau } => Ok(c * (n as f64).powf(-tau)),
            DeltaRule::Table { entries } => entries
                .iter()
                .find(|(m, _)| *m == n)
                .map(|(_, d)| *d)
                .ok_or_else(|| Error::Parameter(format!("no sampling interval tabulated for n = {n}"))),
        }
    }
}

/// A sampling rule plus the sizes it is evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingScheme {
    pub rule: DeltaRule,
    pub n_grid: Vec<usize>,
}

impl SamplingScheme {
    pub fn power(c: f64, tau: f64, n_grid: Vec<usize>) -> Result<Self> {
        let s = Self { rule: DeltaRule::Power { c, tau }, n_grid };
        s.validate()?;
        Ok(s)
    }

    /// Checks `c > 0`, `tau in (0, 1]` (so that `inf n delta_n > 0`), and a
    /// strictly increasing grid.
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::Config("sampling scheme has an empty n grid".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n grid must be strictly increasing".into()));
        }
        match &self.rule {
            DeltaRule::Power { c, tau } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::Config(format!("delta rule needs c > 0, got {c}")));
                }
                if !(*tau > 0.0 && *tau <= 1.0) {
                    return Err(Error::Config(format!("delta rule needs tau in (0, 1], got {tau}")));
                }
            }
            DeltaRule::Table { entries } => {
                for &n in &self.n_grid {
                    let d = self.rule.delta(n)?;
                    if !(d > 0.0) {
                        return Err(Error::Config(format!("delta_{n} = {d} is not positive")));
                    }
                }
                if entries.iter().any(|(n, d)| !(*n as f64 * d > 0.0)) {
                    return Err(Error::Config("tabulated n * delta_n must stay positive".into()));
                }
            }
        }
        Ok(())
    }

    pub fn delta(&self, n: usize) -> Result<f64> {
        self.rule.delta(n)
    }
}

/// Relative Cauchy tolerance on the extrapolated limits.
pub const CAUCHY_TOLERANCE: f64 = 1e-3;
/// Limits within this distance of zero count as zero in conditions 2, 3 and 6.
pub const LIMIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionVerdict {
    pub index: u8,
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub family: String,
    pub verdicts: Vec<ConditionVerdict>,
    pub limits: LimitTuple,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, index: u8) -> &ConditionVerdict {
        &self.verdicts[index as usize - 1]
    }
}

/// Limit of a sequence sampled at points `t_i = 1 / log delta_{n_i}`: every
/// entry of the families above is a polynomial in `t`, so a quadratic through
/// the last three samples evaluated at `t = 0` recovers the limit. Returns
/// the estimate and the change relative to the window one step earlier.
fn extrapolate(t: &[f64], s: &[f64]) -> (f64, f64) {
    fn at_zero(t: &[f64], s: &[f64]) -> f64 {
        let distinct = t.windows(2).all(|w| (w[0] - w[1]).abs() > 1e-12 * w[0].abs().max(1e-300));
        if !distinct {
            return *s.last().unwrap();
        }
        let mut acc = 0.0;
        for i in 0..t.len() {
            let mut li = 1.0;
            for j in 0..t.len() {
                if i != j {
                    li *= (0.0 - t[j]) / (t[i] - t[j]);
                }
            }
            acc += li * s[i];
        }
        acc
    }
    let k = t.len();
    if k < 4 {
        return (*s.last().unwrap(), f64::INFINITY);
    }
    let last = at_zero(&t[k - 3..], &s[k - 3..]);
    let prev = at_zero(&t[k - 4..k - 1], &s[k - 4..k - 1]);
    (last, (last - prev).abs())
}

/// Checks conditions 1-6 for an arbitrary family `phi_n(n, delta_n)`.
pub fn check_family<F>(family: &str, phi: F, scheme: &SamplingScheme, sigma: f64) -> ConditionReport
where
    F: Fn(usize, f64) -> Result<RateMatrix>,
{
    let mut mats = Vec::with_capacity(scheme.n_grid.len());
    let mut build_error = None;
    for &n in &scheme.n_grid {
        match scheme.delta(n).and_then(|d| phi(n, d)) {
            Ok(m) => mats.push(m),
            Err(e) => {
                build_error = Some(format!("n = {n}: {e}"));
                break;
            }
        }
    }

    let mut verdicts = Vec::with_capacity(6);
    let det_ok = build_error.is_none()
        && mats.iter().all(|m| {
            let scale = m.a.abs().max(m.a_hat.abs()).max(m.b.abs()).max(m.b_hat.abs());
            m.det().is_finite() && m.det().abs() > 1e-14 * scale * scale
        });
    let min_det = mats.iter().map(|m| m.det().abs()).fold(f64::INFINITY, f64::min);
    verdicts.push(ConditionVerdict {
        index: 1,
        name: "det(phi_n) != 0",
        passed: det_ok,
        value: min_det,
        detail: build_error.clone().unwrap_or_else(|| format!("min |det| over grid = {min_det:e}")),
    });

    let t: Vec<f64> = mats.iter().map(|m| 1.0 / m.delta.ln()).collect();
    let seqs: [(u8, &'static str, Vec<f64>); 4] = [
        (2, "alpha_n sqrt(n) -> alpha >= 0", mats.iter().map(|m| m.alpha_scaled().0).collect()),
        (3, "alpha_hat_n sqrt(n) -> alpha_hat >= 0", mats.iter().map(|m| m.alpha_scaled().1).collect()),
        (4, "gamma_n -> gamma", mats.iter().map(|m| m.gamma_n(sigma).0).collect()),
        (5, "gamma_hat_n -> gamma_hat", mats.iter().map(|m| m.gamma_n(sigma).1).collect()),
    ];
    let mut limits = [f64::NAN; 4];
    for (slot, (index, name, s)) in seqs.into_iter().enumerate() {
        if s.is_empty() {
            verdicts.push(ConditionVerdict {
                index,
                name,
                passed: false,
                value: f64::NAN,
                detail: "no rate matrices evaluated".into(),
            });
            continue;
        }
        let (limit, change) = extrapolate(&t, &s);
        let converged = change <= CAUCHY_TOLERANCE * limit.abs().max(1.0) && limit.is_finite();
        let sign_ok = index > 3 || limit >= -LIMIT_TOLERANCE;
        let limit = if limit.abs() <= LIMIT_TOLERANCE { 0.0 } else { limit };
        limits[slot] = limit;
        verdicts.push(ConditionVerdict {
            index,
            name,
            passed: converged && sign_ok && build_error.is_none(),
            value: limit,
            detail: format!(
                "last = {:.6e}, extrapolated = {limit:.6e}, window change = {change:.3e}",
                s.last().unwrap()
            ),
        });
    }
    let lim = LimitTuple::new(limits[0], limits[1], limits[2], limits[3]);
    let det = lim.determinant();
    verdicts.push(ConditionVerdict {
        index: 6,
        name: "alpha gamma_hat - alpha_hat gamma != 0",
        passed: det.is_finite() && det.abs() > LIMIT_TOLERANCE,
        value: det,
        detail: format!("alpha gamma_hat - alpha_hat gamma = {det:.6e}"),
    });
    ConditionReport { family: family.to_string(), verdicts, limits: lim }
}

/// Checks conditions 1-6 for one of the built-in families.
pub fn check_conditions(kind: RateKind, scheme: &SamplingScheme, sigma: f64) -> ConditionReport {
    check_family(&kind.to_string(), |n, d| example(kind, n, d, sigma), scheme, sigma)
}

/// Solves `phi_n u = shift` for `u`.
pub fn localisation_of(rm: &RateMatrix, shift: [f64; 2]) -> Result<[f64; 2]> {
    let u = rm.inverse()? * Vector2::new(shift[0], shift[1]);
    Ok([u[0], u[1]])
}
