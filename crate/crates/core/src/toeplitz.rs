//! Covariance matrix `T_n(H)` of unit-scale fGn and the linear algebra on it.
//!
//! Two routes are provided. The fast route runs the Durbin recursion once per
//! `(H, n)` and applies `T_n(H)^{-1}` through the Gohberg-Semencul formula with
//! FFT-based triangular Toeplitz products, so a quadratic form costs
//! `O(n log n)` after an `O(n^2)` setup. Log-determinant derivatives come from
//! running the same recursion on second-order jets. The dense route in
//! [`dense`] (Cholesky, explicit traces) is `O(n^3)` and exists to check the
//! fast one.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::fgn_model::{autocov, autocov_d2h, autocov_dh, Hurst};

/// Durbin prediction variances at or below this value abort the recursion.
pub const CONDITIONING_FLOOR: f64 = 1e-14;

/// First rows of `T_n(H)`, `dT_n/dH` and `d^2T_n/dH^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSpec {
    hurst: Hurst,
    row0: Vec<f64>,
    drow0: Vec<f64>,
    d2row0: Vec<f64>,
}

impl ToeplitzSpec {
    pub fn build(hurst: Hurst, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("Toeplitz dimension must be positive".into()));
        }
        let lags = 0..n as i64;
        Ok(Self {
            hurst,
            row0: lags.clone().map(|k| autocov(hurst, k)).collect(),
            drow0: lags.clone().map(|k| autocov_dh(hurst, k)).collect(),
            d2row0: lags.map(|k| autocov_d2h(hurst, k)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.row0.len()
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn row0(&self) -> &[f64] {
        &self.row0
    }

    pub fn drow0(&self) -> &[f64] {
        &self.drow0
    }

    pub fn d2row0(&self) -> &[f64] {
        &self.d2row0
    }

    fn conditioning(&self, detail: String) -> Error {
        Error::Conditioning { hurst: self.hurst.get(), n: self.n(), detail }
    }
}

/// Arithmetic needed by the Durbin recursion.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn value(self) -> f64;
    fn ln(self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn value(self) -> f64 {
        self
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
}

/// Truncated Taylor jet `(f, f', f'')` in one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn new(v: f64, d1: f64, d2: f64) -> Self {
        Self { v, d1, d2 }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d1, -self.d2)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let q = self.v / o.v;
        let q1 = (self.d1 - q * o.d1) / o.v;
        let q2 = (self.d2 - 2.0 * q1 * o.d1 - q * o.d2) / o.v;
        Jet::new(q, q1, q2)
    }
}

impl Scalar for Jet {
    fn zero() -> Self {
        Jet::new(0.0, 0.0, 0.0)
    }
    fn one() -> Self {
        Jet::new(1.0, 0.0, 0.0)
    }
    fn value(self) -> f64 {
        self.v
    }
    fn ln(self) -> Self {
        let r = self.d1 / self.v;
        Jet::new(self.v.ln(), r, self.d2 / self.v - r * r)
    }
}

/// Output of the Durbin recursion on a symmetric positive definite Toeplitz
/// matrix with first row `r`.
#[derive(Debug, Clone)]
pub struct Durbin<S> {
    /// Order-`(n-1)` one-step predictor `a_1..a_{n-1}`.
    pub predictor: Vec<S>,
    /// Prediction-error variance of the order-`(n-1)` predictor.
    pub innovation: S,
    /// `log |T| = sum_k log v_k`.
    pub logdet: S,
}

/// Runs the Durbin recursion. Fails when a prediction variance falls to
/// [`CONDITIONING_FLOOR`] or below.
pub fn durbin<S: Scalar>(row: &[S]) -> std::result::Result<Durbin<S>, String> {
    let n = row.len();
    let mut v = row[0];
    if !(v.value() > CONDITIONING_FLOOR) {
        return Err(format!("lag-0 variance {} is not positive", v.value()));
    }
    let mut logdet = v.ln();
    let mut a: Vec<S> = Vec::with_capacity(n);
    let mut next: Vec<S> = Vec::with_capacity(n);
    for k in 1..n {
        // kappa = (r_k - sum_{j=1}^{k-1} a_j r_{k-j}) / v
        let acc = a
            .iter()
            .zip(row[1..k].iter().rev())
            .fold(S::zero(), |acc, (&aj, &rj)| acc + aj * rj);
        let kappa = (row[k] - acc) / v;
        next.clear();
        next.extend(a.iter().zip(a.iter().rev()).map(|(&aj, &ar)| aj - kappa * ar));
        next.push(kappa);
        std::mem::swap(&mut a, &mut next);
        v = v * (S::one() - kappa * kappa);
        if !(v.value() > CONDITIONING_FLOOR) {
            return Err(format!("prediction variance {:e} at order {k}", v.value()));
        }
        logdet = logdet + v.ln();
    }
    Ok(Durbin { predictor: a, innovation: v, logdet })
}

/// Dot product with independent partial sums, so the loop is not bound by
/// floating-point add latency.
fn dot_unrolled(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// [`durbin`] for plain `f64`, keeping the predictor in both orders so that
/// every inner loop runs forward.
pub fn durbin_f64(row: &[f64]) -> std::result::Result<Durbin<f64>, String> {
    let n = row.len();
    let mut v = row[0];
    if !(v > CONDITIONING_FLOOR) {
        return Err(format!("lag-0 variance {v} is not positive"));
    }
    let mut logdet = v.ln();
    // a[j] = a_{j+1}; ar[i] = a_{k-1-i} for the current order k - 1
    let mut a: Vec<f64> = Vec::with_capacity(n);
    let mut ar: Vec<f64> = Vec::with_capacity(n);
    let mut next_r: Vec<f64> = Vec::with_capacity(n);
    for k in 1..n {
        let kappa = (row[k] - dot_unrolled(&ar, &row[1..k])) / v;
        next_r.clear();
        next_r.push(kappa);
        next_r.extend(ar.iter().zip(&a).map(|(r, f)| r - kappa * f));
        for (f, r) in a.iter_mut().zip(&ar) {
            *f -= kappa * r;
        }
        a.push(kappa);
        std::mem::swap(&mut ar, &mut next_r);
        v *= 1.0 - kappa * kappa;
        if !(v > CONDITIONING_FLOOR) {
            return Err(format!("prediction variance {v:e} at order {k}"));
        }
        logdet += v.ln();
    }
    Ok(Durbin { predictor: a, innovation: v, logdet })
}

/// `log |T_n(H)|` from the Durbin prediction variances.
pub fn levinson_logdet(spec: &ToeplitzSpec) -> Result<f64> {
    durbin_f64(spec.row0()).map(|d| d.logdet).map_err(|e| spec.conditioning(e))
}

/// `log|T|` and its first two `H`-derivatives, plus `tr(T^{-1} d^2T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogdetDerivatives {
    pub logdet: f64,
    pub dh: f64,
    pub d2h: f64,
    pub trace_inv_d2: f64,
}

impl LogdetDerivatives {
    /// `tr((T^{-1} dT)^2) = tr(T^{-1} d^2T) - d^2 log|T|`.
    pub fn trace_sq(&self) -> f64 {
        self.trace_inv_d2 - self.d2h
    }
}

fn logdet_derivatives(spec: &ToeplitzSpec) -> Result<LogdetDerivatives> {
    let along_h: Vec<Jet> = (0..spec.n())
        .map(|k| Jet::new(spec.row0[k], spec.drow0[k], spec.d2row0[k]))
        .collect();
    let jet = durbin(&along_h).map_err(|e| spec.conditioning(e))?.logdet;
    // d/de log|T + e d^2T| at e = 0 is tr(T^{-1} d^2T).
    let along_d2: Vec<Jet> =
        (0..spec.n()).map(|k| Jet::new(spec.row0[k], spec.d2row0[k], 0.0)).collect();
    let trace_inv_d2 = durbin(&along_d2).map_err(|e| spec.conditioning(e))?.logdet.d1;
    Ok(LogdetDerivatives { logdet: jet.v, dh: jet.d1, d2h: jet.d2, trace_inv_d2 })
}

fn fft_size(n: usize) -> usize {
    (2 * n).next_power_of_two()
}

fn planned(m: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(m), planner.plan_fft_inverse(m))
}

fn spectrum_of(column: &[f64], m: usize, fft: &dyn Fft<f64>) -> Vec<Complex<f64>> {
    let mut buf = vec![Complex::new(0.0, 0.0); m];
    for (b, &c) in buf.iter_mut().zip(column) {
        b.re = c;
    }
    fft.process(&mut buf);
    buf
}

/// Symmetric Toeplitz matrix-vector product by circulant embedding.
pub struct ToeplitzOperator {
    n: usize,
    spectrum: Vec<Complex<f64>>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl ToeplitzOperator {
    pub fn new(row: &[f64]) -> Self {
        let n = row.len();
        let m = fft_size(n);
        let (fft, ifft) = planned(m);
        let mut column = vec![0.0; m];
        column[..n].copy_from_slice(row);
        for k in 1..n {
            column[m - k] = row[k];
        }
        let spectrum = spectrum_of(&column, m, fft.as_ref());
        Self { n, spectrum, fft, ifft }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.spectrum.len();
        let mut buf = vec![Complex::new(0.0, 0.0); m];
        for (b, &xi) in buf.iter_mut().zip(x) {
            b.re = xi;
        }
        self.fft.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.ifft.process(&mut buf);
        let scale = 1.0 / m as f64;
        buf[..self.n].iter().map(|c| c.re * scale).collect()
    }
}

/// `T^{-1}` in Gohberg-Semencul form,
/// `T^{-1} = (L(b) L(b)^T - L(c) L(c)^T) / v` with `b = (1, -a_1, .., -a_{n-1})`
/// and `c = (0, -a_{n-1}, .., -a_1)`, where `L(.)` is lower-triangular Toeplitz.
pub struct ToeplitzInverse {
    n: usize,
    inv_var: f64,
    b_hat: Vec<Complex<f64>>,
    c_hat: Vec<Complex<f64>>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl ToeplitzInverse {
    pub fn from_durbin(d: &Durbin<f64>) -> Self {
        let n = d.predictor.len() + 1;
        let m = fft_size(n);
        let (fft, ifft) = planned(m);
        let mut b = Vec::with_capacity(n);
        b.push(1.0);
        b.extend(d.predictor.iter().map(|a| -a));
        let mut c = Vec::with_capacity(n);
        c.push(0.0);
        c.extend(d.predictor.iter().rev().map(|a| -a));
        Self {
            n,
            inv_var: 1.0 / d.innovation,
            b_hat: spectrum_of(&b, m, fft.as_ref()),
            c_hat: spectrum_of(&c, m, fft.as_ref()),
            fft,
            ifft,
        }
    }

    fn m(&self) -> usize {
        self.b_hat.len()
    }

    /// Spectrum of the reversed, zero-padded input.
    fn reversed_spectrum(&self, x: &[f64]) -> Vec<Complex<f64>> {
        let mut buf = vec![Complex::new(0.0, 0.0); self.m()];
        for (b, &xi) in buf.iter_mut().zip(x.iter().rev()) {
            b.re = xi;
        }
        self.fft.process(&mut buf);
        buf
    }

    /// `(J L(b) J x, J L(c) J x) = (L(b)^T x, L(c)^T x)`, still reversed.
    fn transposed_products(&self, x: &[f64]) -> (Vec<Complex<f64>>, Vec<Complex<f64>>) {
        let xr = self.reversed_spectrum(x);
        let mut p: Vec<_> = xr.iter().zip(&self.b_hat).map(|(u, b)| u * b).collect();
        let mut q: Vec<_> = xr.iter().zip(&self.c_hat).map(|(u, c)| u * c).collect();
        self.ifft.process(&mut p);
        self.ifft.process(&mut q);
        (p, q)
    }

    /// `x^T T^{-1} x`.
    pub fn quad(&self, x: &[f64]) -> f64 {
        let (p, q) = self.transposed_products(x);
        let scale = 1.0 / self.m() as f64;
        let pp: f64 = p[..self.n].iter().map(|z| (z.re * scale).powi(2)).sum();
        let qq: f64 = q[..self.n].iter().map(|z| (z.re * scale).powi(2)).sum();
        (pp - qq) * self.inv_var
    }

    /// `T^{-1} x`.
    pub fn solve(&self, x: &[f64]) -> Vec<f64> {
        let m = self.m();
        let n = self.n;
        let scale = 1.0 / m as f64;
        let (p, q) = self.transposed_products(x);
        // p, q hold J L^T x; feed them back in forward order: L(b) (L(b)^T x).
        let mut pf = vec![Complex::new(0.0, 0.0); m];
        let mut qf = vec![Complex::new(0.0, 0.0); m];
        for i in 0..n {
            pf[i].re = p[n - 1 - i].re * scale;
            qf[i].re = q[n - 1 - i].re * scale;
        }
        self.fft.process(&mut pf);
        self.fft.process(&mut qf);
        let mut out: Vec<_> = pf
            .iter()
            .zip(&qf)
            .zip(self.b_hat.iter().zip(&self.c_hat))
            .map(|((u, w), (b, c))| u * b - w * c)
            .collect();
        self.ifft.process(&mut out);
        out[..n].iter().map(|z| z.re * scale * self.inv_var).collect()
    }
}

/// Quadratic forms `x^T T^{-1} x`, `x^T d(T^{-1}) x`, `x^T d^2(T^{-1}) x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadForms {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
}

struct DerivativeParts {
    logdet: LogdetDerivatives,
    d_op: ToeplitzOperator,
    d2_op: ToeplitzOperator,
}

/// Everything needed to evaluate likelihood quantities at one `(H, n)`.
/// Derivative machinery is built lazily on first use.
pub struct ToeplitzModel {
    spec: ToeplitzSpec,
    logdet: f64,
    inverse: ToeplitzInverse,
    derivatives: OnceLock<DerivativeParts>,
}

impl ToeplitzModel {
    pub fn new(hurst: Hurst, n: usize) -> Result<Self> {
        Self::from_spec(ToeplitzSpec::build(hurst, n)?)
    }

    pub fn from_spec(spec: ToeplitzSpec) -> Result<Self> {
        let d = durbin_f64(spec.row0()).map_err(|e| spec.conditioning(e))?;
        let inverse = ToeplitzInverse::from_durbin(&d);
        Ok(Self { logdet: d.logdet, inverse, spec, derivatives: OnceLock::new() })
    }

    pub fn spec(&self) -> &ToeplitzSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn hurst(&self) -> Hurst {
        self.spec.hurst
    }

    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    pub fn inverse(&self) -> &ToeplitzInverse {
        &self.inverse
    }

    fn parts(&self) -> Result<&DerivativeParts> {
        if let Some(p) = self.derivatives.get() {
            return Ok(p);
        }
        let parts = DerivativeParts {
            logdet: logdet_derivatives(&self.spec)?,
            d_op: ToeplitzOperator::new(self.spec.drow0()),
            d2_op: ToeplitzOperator::new(self.spec.d2row0()),
        };
        Ok(self.derivatives.get_or_init(|| parts))
    }

    pub fn logdet_derivatives(&self) -> Result<LogdetDerivatives> {
        self.parts().map(|p| p.logdet)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: x.len() });
        }
        Ok(())
    }

    pub fn quad_inv(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        Ok(self.inverse.quad(x))
    }

    pub fn solve(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        Ok(self.inverse.solve(x))
    }

    /// `(x^T T^{-1} x, x^T d(T^{-1}) x)` using `d(T^{-1}) = -T^{-1} dT T^{-1}`.
    pub fn quad_first(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.check_len(x)?;
        let parts = self.parts()?;
        let y = self.inverse.solve(x);
        let q0 = dot(x, &y);
        let g = parts.d_op.apply(&y);
        Ok((q0, -dot(&y, &g)))
    }

    /// All three quadratic forms, with
    /// `d^2(T^{-1}) = 2 T^{-1} dT T^{-1} dT T^{-1} - T^{-1} d^2T T^{-1}`.
    pub fn quad_forms(&self, x: &[f64]) -> Result<QuadForms> {
        self.check_len(x)?;
        let parts = self.parts()?;
        let y = self.inverse.solve(x);
        let q0 = dot(x, &y);
        let g = parts.d_op.apply(&y);
        let q1 = -dot(&y, &g);
        let z = self.inverse.solve(&g);
        let q2 = 2.0 * dot(&g, &z) - dot(&y, &parts.d2_op.apply(&y));
        Ok(QuadForms { q0, q1, q2 })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `x^T T^{-1} x`.
pub fn quad_inv(spec: &ToeplitzSpec, x: &[f64]) -> Result<f64> {
    ToeplitzModel::from_spec(spec.clone())?.quad_inv(x)
}

/// `x^T d_H(T^{-1}) x`.
pub fn dh_quad_inv(spec: &ToeplitzSpec, x: &[f64]) -> Result<f64> {
    ToeplitzModel::from_spec(spec.clone())?.quad_first(x).map(|q| q.1)
}

/// `x^T d^2_H(T^{-1}) x`.
pub fn d2h_quad_inv(spec: &ToeplitzSpec, x: &[f64]) -> Result<f64> {
    ToeplitzModel::from_spec(spec.clone())?.quad_forms(x).map(|q| q.q2)
}

/// `d_H log|T| = tr(T^{-1} d_H T)`.
pub fn dh_logdet(spec: &ToeplitzSpec) -> Result<f64> {
    logdet_derivatives(spec).map(|d| d.dh)
}

/// `d^2_H log|T| = tr(T^{-1} d^2_H T) - tr(T^{-1} d_H T T^{-1} d_H T)`.
pub fn d2h_logdet(spec: &ToeplitzSpec) -> Result<f64> {
    logdet_derivatives(spec).map(|d| d.d2h)
}

/// Lower Cholesky factor of `T_n(H)` with its log-determinant.
#[derive(Debug, Clone)]
pub struct CholFactor {
    pub lower: DMatrix<f64>,
    pub logdet: f64,
}

/// Dense Cholesky factorisation of `T_n(H)`.
pub fn chol(spec: &ToeplitzSpec) -> Result<CholFactor> {
    dense::chol_of(&dense::matrix(spec.row0()), spec)
}

/// `O(n^3)` reference implementations on explicit matrices.
pub mod dense {
    use super::*;

    /// The symmetric Toeplitz matrix with first row `row`.
    pub fn matrix(row: &[f64]) -> DMatrix<f64> {
        let n = row.len();
        DMatrix::from_fn(n, n, |i, j| row[i.abs_diff(j)])
    }

    pub(super) fn chol_of(t: &DMatrix<f64>, spec: &ToeplitzSpec) -> Result<CholFactor> {
        let c = t
            .clone()
            .cholesky()
            .ok_or_else(|| spec.conditioning("Cholesky factorisation failed".into()))?;
        let lower = c.unpack();
        let logdet = 2.0 * lower.diagonal().iter().map(|d| d.ln()).sum::<f64>();
        Ok(CholFactor { lower, logdet })
    }

    /// `(T^{-1}, T^{-1} dT, T^{-1} d^2T)` via Cholesky solves.
    fn solved(spec: &ToeplitzSpec) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
        let t = matrix(spec.row0());
        let c = t.cholesky().ok_or_else(|| spec.conditioning("Cholesky factorisation failed".into()))?;
        let inv = c.inverse();
        let a = c.solve(&matrix(spec.drow0()));
        let b = c.solve(&matrix(spec.d2row0()));
        Ok((inv, a, b))
    }

    fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        let n = a.nrows();
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| a[(i, j)] * b[(j, i)]).sum()
    }

    /// Dense evaluation of [`LogdetDerivatives`].
    pub fn logdet_derivatives(spec: &ToeplitzSpec) -> Result<LogdetDerivatives> {
        let (_, a, b) = solved(spec)?;
        let logdet = chol(spec)?.logdet;
        let dh = a.trace();
        let trace_inv_d2 = b.trace();
        let d2h = trace_inv_d2 - trace_product(&a, &a);
        Ok(LogdetDerivatives { logdet, dh, d2h, trace_inv_d2 })
    }

    /// Dense evaluation of [`QuadForms`].
    pub fn quad_forms(spec: &ToeplitzSpec, x: &[f64]) -> Result<QuadForms> {
        let (inv, _, _) = solved(spec)?;
        let dt = matrix(spec.drow0());
        let d2t = matrix(spec.d2row0());
        let dinv = -(&inv * &dt * &inv);
        let d2inv = 2.0 * (&inv * &dt * &inv * &dt * &inv) - &inv * &d2t * &inv;
        let xv = nalgebra::DVector::from_column_slice(x);
        Ok(QuadForms {
            q0: xv.dot(&(&inv * &xv)),
            q1: xv.dot(&(&dinv * &xv)),
            q2: xv.dot(&(&d2inv * &xv)),
        })
    }
}
