//! Admissible target determinants `v(mu) = f(mu) / mu`.
//!
//! `f` is the sine transform of a finite sine series on `[0, pi]`:
//! `f(mu) = int_0^pi g(t) sin(mu t) dt` with `g(t) = scale * sum_k a_k sin(k t)`.
//! Each term has the closed form
//! `int_0^pi sin(k t) sin(mu t) dt = (-1)^(k+1) k sin(pi mu) / (k^2 - mu^2)`,
//! so `f` is odd, entire, of exponential type `pi`, and vanishes at every
//! integer beyond the last coefficient.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this distance from a removable point the sinc factor switches to its series.
const SERIES_RADIUS: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct TargetDeterminant {
    sine_coeffs: Vec<Complex64>,
    m: u32,
    scale: f64,
}

impl TargetDeterminant {
    pub fn new(sine_coeffs: Vec<Complex64>, m: u32, scale: f64) -> Result<Self> {
        if sine_coeffs.is_empty() {
            return Err(Error::InvalidTarget("sine_coeffs must not be empty".into()));
        }
        if let Some(k) = sine_coeffs
            .iter()
            .position(|a| !(a.re.is_finite() && a.im.is_finite()))
        {
            return Err(Error::InvalidTarget(format!(
                "sine_coeffs[{k}] is not finite"
            )));
        }
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::InvalidTarget(format!(
                "scale must be finite and non-negative, got {scale}"
            )));
        }
        Ok(Self {
            sine_coeffs,
            m,
            scale,
        })
    }

    /// Real coefficients, unit scale.
    pub fn from_real(coeffs: &[f64], m: u32) -> Result<Self> {
        Self::new(
            coeffs.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
            m,
            1.0,
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let file: TargetFile = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        file.try_into()
    }

    pub fn to_file(&self) -> TargetFile {
        TargetFile {
            sine_coeffs: self.sine_coeffs.iter().map(|a| [a.re, a.im]).collect(),
            m: self.m,
            scale: self.scale,
        }
    }

    /// Number of sine coefficients `K`.
    pub fn len(&self) -> usize {
        self.sine_coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn sine_coeffs(&self) -> &[Complex64] {
        &self.sine_coeffs
    }

    /// `scale * a_k`, k = 1..K.
    pub fn effective_coeffs(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.sine_coeffs
            .iter()
            .enumerate()
            .map(move |(i, a)| (i + 1, a * self.scale))
    }

    /// True when `f` vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.effective_coeffs().all(|(_, a)| a.norm() == 0.0)
    }

    /// True when every effective coefficient is real (then `v` is real on the real axis).
    pub fn is_real(&self) -> bool {
        self.effective_coeffs().all(|(_, a)| a.im == 0.0)
    }

    /// `sum_k |a_k| k`, the numerator of the strip tail bound.
    pub fn weighted_l1(&self) -> f64 {
        self.effective_coeffs()
            .map(|(k, a)| a.norm() * k as f64)
            .sum()
    }

    pub fn eval_f(&self, mu: Complex64) -> Complex64 {
        self.effective_coeffs()
            .filter(|(_, a)| a.norm() != 0.0)
            .map(|(k, a)| a * sine_term(k, mu))
            .sum()
    }

    /// `f(mu) / mu`, continuous at 0 where it equals `f'(0)`.
    pub fn eval_v(&self, mu: Complex64) -> Complex64 {
        self.effective_coeffs()
            .filter(|(_, a)| a.norm() != 0.0)
            .map(|(k, a)| a * sine_term_over_mu(k, mu))
            .sum()
    }

    /// `f'(mu)`, used for Newton steps on `v` and for the v(0) limit checks.
    pub fn eval_f_prime(&self, mu: Complex64) -> Complex64 {
        let d = 1e-5 * (1.0 + mu.norm());
        (self.eval_f(mu + d) - self.eval_f(mu - d)) / (2.0 * d)
    }

    /// Check `|v| < 1/10` and `|f| < 1` on `|Im mu| <= 1, Re mu >= n`.
    ///
    /// The strip is sampled on `Re mu in [n, n+40]`, `Im mu in [-1, 1]` with step
    /// 0.05. Beyond `n + 40` the bound
    /// `|f(mu)| <= cosh(pi) * sum_k k |a_k| / (Re mu^2 - 1 - K^2)` is used.
    pub fn sup_bound_check(&self, n: usize) -> SupBoundReport {
        const STEP: f64 = 0.05;
        const WIDTH: f64 = 40.0;
        let re_steps = (WIDTH / STEP).round() as usize;
        let im_steps = (2.0 / STEP).round() as usize;
        let mut max_v: f64 = 0.0;
        let mut max_f: f64 = 0.0;
        let mut argmax_v = Complex64::new(n as f64, 0.0);
        let mut argmax_f = argmax_v;
        let mut violation = None;
        if !self.is_zero() {
            for i in 0..=re_steps {
                let re = n as f64 + i as f64 * STEP;
                for j in 0..=im_steps {
                    let im = -1.0 + j as f64 * STEP;
                    let mu = Complex64::new(re, im);
                    let fv = self.eval_f(mu).norm();
                    let vv = fv / mu.norm();
                    if vv > max_v {
                        max_v = vv;
                        argmax_v = mu;
                    }
                    if fv > max_f {
                        max_f = fv;
                        argmax_f = mu;
                    }
                    if violation.is_none() && (vv >= 0.1 || fv >= 1.0) {
                        violation = Some(mu);
                    }
                }
            }
        }
        let x_tail = n as f64 + WIDTH;
        let k = self.len() as f64;
        let denom = x_tail * x_tail - 1.0 - k * k;
        let numer = PI.cosh() * self.weighted_l1();
        let tail_f = if numer == 0.0 {
            0.0
        } else if denom > 0.0 {
            numer / denom
        } else {
            f64::INFINITY
        };
        let tail_v = tail_f / x_tail;
        let pass = violation.is_none() && tail_f < 1.0 && tail_v < 0.1;
        SupBoundReport {
            n,
            pass,
            max_v,
            max_f,
            argmax_v,
            argmax_f,
            tail_f,
            tail_v,
            violation,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupBoundReport {
    pub n: usize,
    pub pass: bool,
    pub max_v: f64,
    pub max_f: f64,
    pub argmax_v: Complex64,
    pub argmax_f: Complex64,
    pub tail_f: f64,
    pub tail_v: f64,
    /// First sample where a bound failed.
    pub violation: Option<Complex64>,
}

/// JSON form: `{"sine_coeffs": [[re, im], ...], "m": int, "scale": float}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetFile {
    pub sine_coeffs: Vec<[f64; 2]>,
    #[serde(default)]
    pub m: u32,
    #[serde(default = "unit_scale")]
    pub scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

impl TryFrom<TargetFile> for TargetDeterminant {
    type Error = Error;

    fn try_from(f: TargetFile) -> Result<Self> {
        TargetDeterminant::new(
            f.sine_coeffs
                .iter()
                .map(|a| Complex64::new(a[0], a[1]))
                .collect(),
            f.m,
            f.scale,
        )
    }
}

fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        let z2 = z * z;
        Complex64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// `int_0^pi sin(k t) sin(mu t) dt`.
pub fn sine_term(k: usize, mu: Complex64) -> Complex64 {
    if mu.re < 0.0 {
        return -sine_term(k, -mu);
    }
    let kf = k as f64;
    let delta = mu - kf;
    if delta.norm() < 0.5 {
        // sin(pi mu) = (-1)^k sin(pi delta), k^2 - mu^2 = -delta (2k + delta)
        kf * PI * sinc(PI * delta) / (2.0 * kf + delta)
    } else {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign * kf * (PI * mu).sin() / (kf * kf - mu * mu)
    }
}

/// `sine_term(k, mu) / mu`, finite at `mu = 0`.
pub fn sine_term_over_mu(k: usize, mu: Complex64) -> Complex64 {
    if mu.re < 0.0 {
        return sine_term_over_mu(k, -mu);
    }
    let kf = k as f64;
    if (mu - kf).norm() < 0.5 {
        sine_term(k, mu) / mu
    } else {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign * kf * PI * sinc(PI * mu) / (kf * kf - mu * mu)
    }
}
