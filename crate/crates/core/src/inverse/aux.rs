//! Auxiliary Dirichlet spectrum and norming data built from a target.
//!
//! The Dirichlet characteristic function of the reconstruction is
//! `s(mu) = (sin(pi mu) / mu) * prod_{n<=N} (mu_n^2 - mu^2) / (n^2 - mu^2)`,
//! whose zeros are `mu_1 < ... < mu_N` (clustered near `N + 1/2`) followed by
//! the integers above `N`. At each zero, `c_n` solves `z^2 - v(mu_n) z - 1 = 0`
//! and `w_n = c_n / (mu_n s'(mu_n))`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::target::TargetDeterminant;

pub const N_FLOOR: usize = 2;
pub const N_MAX_DEFAULT: usize = 256;

/// Below this distance from `0, 1, ..., N` the removable form is evaluated by a Cauchy integral.
const REMOVABLE_RADIUS: f64 = 1e-3;
const CAUCHY_RADIUS: f64 = 1e-2;
const CAUCHY_POINTS: usize = 32;

/// Smallest `N` in `[2, n_max]` passing the strip bounds.
pub fn choose_n(t: &TargetDeterminant, n_max: usize) -> Result<usize> {
    let mut best: Option<(f64, f64)> = None;
    for n in N_FLOOR..=n_max.max(N_FLOOR) {
        let r = t.sup_bound_check(n);
        if r.pass {
            return Ok(n);
        }
        best = Some((r.max_v, r.max_f));
    }
    let (max_v, max_f) = best.unwrap_or((f64::NAN, f64::NAN));
    Err(Error::TargetTooLarge {
        n_max,
        max_v,
        max_f,
    })
}

/// `mu_n = N + 0.4 + 0.2 n / (N + 1)` for `n <= N`, `mu_n = n` above.
pub fn build_mu_sequence(n_aux: usize, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|n| {
            if n <= n_aux {
                n_aux as f64 + 0.4 + 0.2 * n as f64 / (n_aux as f64 + 1.0)
            } else {
                n as f64
            }
        })
        .collect()
}

/// Closed-form Dirichlet characteristic function for a perturbed head `mu_1..mu_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SFunction {
    head: Vec<f64>,
}

impl SFunction {
    pub fn new(head: Vec<f64>) -> Self {
        Self { head }
    }

    pub fn from_sequence(n_aux: usize, mu_seq: &[f64]) -> Self {
        Self::new(mu_seq[..n_aux.min(mu_seq.len())].to_vec())
    }

    pub fn n_aux(&self) -> usize {
        self.head.len()
    }

    /// The perturbed nodes `mu_1..mu_N`.
    pub fn head(&self) -> &[f64] {
        &self.head
    }

    /// `R(lambda) = prod_n (mu_n^2 - lambda) / (n^2 - lambda)` at an integer node `k > N`.
    pub fn ratio_at_integer(&self, k: usize) -> f64 {
        let l = (k * k) as f64;
        self.head
            .iter()
            .enumerate()
            .map(|(j, m)| (m * m - l) / (((j + 1) * (j + 1)) as f64 - l))
            .product()
    }

    /// `Q/P - 1` at `lambda = k^2`, where `Q/P = 1 / R`, computed without cancellation.
    pub fn inverse_ratio_minus_one(&self, k: usize) -> f64 {
        let l = (k * k) as f64;
        let log: f64 = self
            .head
            .iter()
            .enumerate()
            .map(|(j, m)| {
                let jj = ((j + 1) * (j + 1)) as f64;
                ((jj - m * m) / (m * m - l)).ln_1p()
            })
            .sum();
        log.exp_m1()
    }

    /// `s(mu)` and `ds/dmu`.
    pub fn eval(&self, mu: Complex64) -> (Complex64, Complex64) {
        if mu.re < 0.0 {
            let (s, d) = self.eval(-mu);
            return (s, -d);
        }
        let p = mu.re.round();
        if p <= self.n_aux() as f64 && (mu - p).norm() < REMOVABLE_RADIUS {
            return self.eval_cauchy(mu, Complex64::new(p, 0.0));
        }
        self.eval_direct(mu)
    }

    fn eval_direct(&self, mu: Complex64) -> (Complex64, Complex64) {
        let z = PI * mu;
        let (sz, cz) = (z.sin(), z.cos());
        let s0 = sz / mu;
        let s0p = (z * cz - sz) / (mu * mu);
        let mu2 = mu * mu;
        let n = self.head.len();
        let mut r = Vec::with_capacity(n);
        let mut rp = Vec::with_capacity(n);
        for (j, m) in self.head.iter().enumerate() {
            let a = m * m;
            let b = ((j + 1) * (j + 1)) as f64;
            let den = b - mu2;
            r.push((a - mu2) / den);
            rp.push(2.0 * mu * (a - b) / (den * den));
        }
        // R' = sum_j r_j' prod_{k != j} r_k via prefix and suffix products
        let one = Complex64::new(1.0, 0.0);
        let mut prefix = vec![one; n + 1];
        for j in 0..n {
            prefix[j + 1] = prefix[j] * r[j];
        }
        let mut suffix = one;
        let mut dr = Complex64::new(0.0, 0.0);
        for j in (0..n).rev() {
            dr += rp[j] * prefix[j] * suffix;
            suffix *= r[j];
        }
        let big_r = prefix[n];
        (s0 * big_r, s0p * big_r + s0 * dr)
    }

    fn eval_cauchy(&self, mu: Complex64, center: Complex64) -> (Complex64, Complex64) {
        let mut s = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for j in 0..CAUCHY_POINTS {
            let e = Complex64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / CAUCHY_POINTS as f64);
            let zeta = center + e * CAUCHY_RADIUS;
            let (fz, _) = self.eval_direct(zeta);
            // dzeta = i rho e dphi; the 1/(2 pi i) cancels the i
            let weight = e * CAUCHY_RADIUS / CAUCHY_POINTS as f64;
            let inv = 1.0 / (zeta - mu);
            s += fz * inv * weight;
            d += fz * inv * inv * weight;
        }
        (s, d)
    }
}

/// `c_n` with `c_n - 1/c_n = v_n`, chosen in the disk of radius 1/2 around `(-1)^n`.
pub fn select_root(n: usize, v: Complex64) -> Result<Complex64> {
    let center = if n % 2 == 0 { 1.0 } else { -1.0 };
    let root = (v * v + 4.0).sqrt();
    let preferred = (v + root * center) * 0.5;
    let other = (v - root * center) * 0.5;
    for c in [preferred, other] {
        if (c - center).norm() < 0.5 {
            return Ok(c);
        }
    }
    Err(Error::RootSelection {
        n,
        c: preferred,
        center,
    })
}

pub fn select_roots(t: &TargetDeterminant, mu_seq: &[f64]) -> Result<Vec<Complex64>> {
    mu_seq
        .iter()
        .enumerate()
        .map(|(i, &m)| select_root(i + 1, t.eval_v(Complex64::new(m, 0.0))))
        .collect()
}

/// `w_n = c_n / (mu_n sdot_n)`; every `Re w_n` must be positive.
pub fn build_w(mu_seq: &[f64], c_seq: &[Complex64], sdot: &[Complex64]) -> Result<Vec<Complex64>> {
    if mu_seq.len() != c_seq.len() || mu_seq.len() != sdot.len() {
        return Err(Error::Dimension(format!(
            "mu ({}), c ({}) and sdot ({}) must have equal length",
            mu_seq.len(),
            c_seq.len(),
            sdot.len()
        )));
    }
    let w: Vec<Complex64> = (0..mu_seq.len())
        .map(|i| c_seq[i] / (mu_seq[i] * sdot[i]))
        .collect();
    check_weights(&w)?;
    Ok(w)
}

fn check_weights(w: &[Complex64]) -> Result<()> {
    match w.iter().position(|x| !(x.re > 0.0)) {
        Some(i) => Err(Error::NonPositiveWeight {
            n: i + 1,
            re: w[i].re,
        }),
        None => Ok(()),
    }
}

/// Everything the kernel assembly needs, for `n = 1..=M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxSpectrum {
    pub n_aux: usize,
    pub mu_seq: Vec<f64>,
    pub c_seq: Vec<Complex64>,
    pub w_seq: Vec<Complex64>,
    pub sdot: Vec<Complex64>,
    pub v_at_mu: Vec<Complex64>,
}

impl AuxSpectrum {
    /// Build the data for the first `count` indices. The zero target uses the
    /// unperturbed sequence (`N = 0`), for which every `w_n` is exactly `1/pi`.
    pub fn build(t: &TargetDeterminant, count: usize, n_max: usize) -> Result<Self> {
        let n_aux = if t.is_zero() { 0 } else { choose_n(t, n_max)? };
        Self::build_with_n(t, n_aux, count)
    }

    pub fn build_with_n(t: &TargetDeterminant, n_aux: usize, count: usize) -> Result<Self> {
        if count <= n_aux {
            return Err(Error::Truncation(format!(
                "truncation M = {count} must exceed N = {n_aux}"
            )));
        }
        let mu_seq = build_mu_sequence(n_aux, count);
        let sfun = SFunction::from_sequence(n_aux, &mu_seq);
        let v_at_mu: Vec<Complex64> = mu_seq
            .iter()
            .map(|&m| t.eval_v(Complex64::new(m, 0.0)))
            .collect();
        let c_seq = v_at_mu
            .iter()
            .enumerate()
            .map(|(i, &v)| select_root(i + 1, v))
            .collect::<Result<Vec<_>>>()?;
        let mut sdot = Vec::with_capacity(count);
        let mut w_seq = Vec::with_capacity(count);
        for (i, &m) in mu_seq.iter().enumerate() {
            let n = i + 1;
            if n <= n_aux {
                let (_, d) = sfun.eval(Complex64::new(m, 0.0));
                sdot.push(d);
                w_seq.push(c_seq[i] / (m * d));
            } else {
                // sin(pi mu)/mu has derivative (-1)^n pi/n at the integer n
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let r = sfun.ratio_at_integer(n);
                sdot.push(Complex64::new(sign * PI / n as f64 * r, 0.0));
                w_seq.push(c_seq[i] * sign / (PI * r));
            }
        }
        check_weights(&w_seq)?;
        Ok(Self {
            n_aux,
            mu_seq,
            c_seq,
            w_seq,
            sdot,
            v_at_mu,
        })
    }

    pub fn len(&self) -> usize {
        self.mu_seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu_seq.is_empty()
    }

    pub fn s_function(&self) -> SFunction {
        SFunction::from_sequence(self.n_aux, &self.mu_seq)
    }

    pub fn min_re_w(&self) -> f64 {
        self.w_seq.iter().map(|w| w.re).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `pi * prod_n (mu_n^2 - mu^2) / n^2` over `n <= L`, with the tail
    /// `prod_{n>L} (1 - mu^2/n^2)` from the first two terms of its logarithm.
    fn infinite_product(head: &[f64], mu: Complex64, l: usize) -> Complex64 {
        let mu2 = mu * mu;
        let mut p = Complex64::new(PI, 0.0);
        for n in 1..=l {
            let nn = (n * n) as f64;
            let m2 = if n <= head.len() { head[n - 1] * head[n - 1] } else { nn };
            p *= (m2 - mu2) / nn;
        }
        let lf = l as f64;
        let zeta2_tail = 1.0 / lf - 0.5 / (lf * lf) + 1.0 / (6.0 * lf * lf * lf);
        let zeta4_tail = 1.0 / (3.0 * lf * lf * lf);
        p * (-(mu2 * zeta2_tail) - mu2 * mu2 * zeta4_tail * 0.5).exp()
    }

    #[test]
    fn mu_sequence_examples() {
        let s = build_mu_sequence(3, 6);
        let expected = [3.45, 3.5, 3.55, 4.0, 5.0, 6.0];
        for (a, b) in s.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        let s = build_mu_sequence(2, 4);
        assert!((s[0] - 2.4667).abs() < 5e-5 && (s[1] - 2.5333).abs() < 5e-5);
        assert_eq!(&s[2..], &[3.0, 4.0]);
        for n in 1..30 {
            let s = build_mu_sequence(n, n + 5);
            assert!(s.windows(2).all(|w| w[1] > w[0]));
            assert!(s[..n].iter().all(|m| (m - (n as f64 + 0.5)).abs() < 0.1));
        }
    }

    #[test]
    fn unperturbed_s_function() {
        let f = SFunction::new(vec![]);
        for n in 1..8 {
            let (s, d) = f.eval(c64(n as f64, 0.0));
            assert!(s.norm() < 1e-14);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((d - sign * PI / n as f64).norm() < 1e-12);
        }
        let (s, _) = f.eval(c64(0.0, 0.0));
        assert!((s - PI).norm() < 1e-12);
    }

    #[test]
    fn closed_form_matches_infinite_product() {
        let head = build_mu_sequence(3, 3);
        let f = SFunction::new(head.clone());
        for mu in [c64(10.0, 0.0), c64(2.3, 0.4), c64(0.7, -0.2), c64(3.4, 0.0)] {
            let (s, _) = f.eval(mu);
            let p = infinite_product(&head, mu, 200_000);
            // the oracle itself carries about L * eps of relative rounding
            assert!((s - p).norm() < 1e-10 * p.norm().max(1.0), "mu = {mu}: {s} vs {p}");
        }
    }

    #[test]
    fn derivative_and_removable_points() {
        let f = SFunction::new(build_mu_sequence(3, 3));
        for mu in [c64(0.0, 0.0), c64(1.0, 0.0), c64(2.0 + 3e-4, 1e-4), c64(3.0, 0.0), c64(5.5, 0.3)] {
            let (s, d) = f.eval(mu);
            let h = 1e-5;
            let fd = (f.eval(mu + h).0 - f.eval(mu - h).0) / (2.0 * h);
            assert!((d - fd).norm() < 1e-7 * d.norm().max(1.0), "mu = {mu}");
            assert!(s.re.is_finite() && s.im.is_finite());
        }
        // evenness of s and oddness of its derivative
        let (a, da) = f.eval(c64(1.7, 0.2));
        let (b, db) = f.eval(c64(-1.7, -0.2));
        assert!((a - b).norm() < 1e-14 && (da + db).norm() < 1e-14);
    }

    #[test]
    fn sign_pattern_of_derivative_at_nodes() {
        for n_aux in [2, 3, 5] {
            let seq = build_mu_sequence(n_aux, 12);
            let f = SFunction::from_sequence(n_aux, &seq);
            for (i, &m) in seq.iter().enumerate() {
                let n = i + 1;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let (_, d) = f.eval(c64(m, 0.0));
                assert!(sign * d.re > 0.0, "N = {n_aux}, n = {n}");
            }
        }
    }

    #[test]
    fn root_selection() {
        assert_eq!(select_root(2, c64(0.0, 0.0)).unwrap(), c64(1.0, 0.0));
        assert_eq!(select_root(3, c64(0.0, 0.0)).unwrap(), c64(-1.0, 0.0));
        let c = select_root(4, c64(0.1, 0.0)).unwrap();
        assert!((c.re - 1.051249).abs() < 1e-6);
        assert!((c - 1.0 / c - 0.1).norm() < 1e-14);
        for n in 1..10 {
            let v = c64(0.07 * (n as f64).sin(), 0.05 * (n as f64).cos());
            let c = select_root(n, v).unwrap();
            let center = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((c - center).norm() < 0.5);
            assert!((c - 1.0 / c - v).norm() < 1e-14);
            // the two roots multiply to -1
            assert!((c * (v - c) + 1.0).norm() < 1e-14);
        }
        assert!(matches!(
            select_root(1, c64(0.0, 3.0)),
            Err(Error::RootSelection { .. })
        ));
    }

    #[test]
    fn weights() {
        let t = TargetDeterminant::new(vec![c64(1.0, 0.0)], 0, 0.0).unwrap();
        let aux = AuxSpectrum::build(&t, 64, N_MAX_DEFAULT).unwrap();
        assert_eq!(aux.n_aux, 0);
        assert!(aux.w_seq.iter().all(|w| (w - 1.0 / PI).norm() < 1e-12));

        let aux = AuxSpectrum::build_with_n(&t, 3, 20).unwrap();
        assert!(aux.w_seq.iter().all(|w| w.im == 0.0 && w.re > 0.0));

        let small = TargetDeterminant::from_real(&[0.01], 0).unwrap();
        assert_eq!(choose_n(&small, N_MAX_DEFAULT).unwrap(), 2);
        let aux = AuxSpectrum::build(&small, 64, N_MAX_DEFAULT).unwrap();
        assert!(aux.min_re_w() > 0.0);
        for (c, v) in aux.c_seq.iter().zip(&aux.v_at_mu) {
            assert!((c - 1.0 / c - v).norm() < 1e-14);
        }

        assert!(matches!(
            build_w(&[1.0], &[c64(-1.0, 0.0)], &[c64(1.0, 0.0)]),
            Err(Error::NonPositiveWeight { n: 1, .. })
        ));
    }

    #[test]
    fn choose_n_sweep() {
        let zero = TargetDeterminant::new(vec![c64(1.0, 0.0)], 0, 0.0).unwrap();
        assert_eq!(choose_n(&zero, N_MAX_DEFAULT).unwrap(), N_FLOOR);
        let big = TargetDeterminant::from_real(&[5.0], 0).unwrap();
        let n = choose_n(&big, N_MAX_DEFAULT).unwrap();
        assert!(big.sup_bound_check(n).pass);
        assert!(!big.sup_bound_check(n - 1).pass);
        assert!(matches!(
            choose_n(&big, 3),
            Err(Error::TargetTooLarge { n_max: 3, .. })
        ));
    }
}
