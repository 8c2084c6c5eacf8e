//! The kernel
//! `F(x, t) = sum_n [2 w_n sin(mu_n x) sin(mu_n t) - (2/pi) sin(nx) sin(nt)]`
//! on the triangle `0 <= t <= x <= pi`.
//!
//! Terms with `n <= M` are summed directly. For `n > M` (where `mu_n = n` and
//! `c_n = (-1)^n`) the coefficient is `(2/pi) e(n^2)` with
//! `e(lambda) = prod_k (k^2 - lambda)/(mu_k^2 - lambda) - 1`, and
//! `sin(nx) sin(nt) = [cos n(x-t) - cos n(x+t)] / 2`, so the tail is
//! `(1/pi) [D(x-t) - D(x+t)]` with `D(y) = sum_{n>M} e(n^2) cos(ny)`.
//! In the default analytic mode `e` is split as
//! `e1/lambda + e2/lambda^2 + r(lambda)`; the first two parts are summed in
//! closed form (Bernoulli polynomials) and `r = O(n^-6)` directly.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inverse::aux::{AuxSpectrum, SFunction};
use crate::linalg::row_start;
use crate::potential::spacing;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMode {
    /// Sum the series tail through closed forms.
    #[default]
    Analytic,
    /// Drop everything beyond `M`; fails if the neglected tail exceeds `tail_tol`.
    Truncate,
}

#[derive(Debug, Clone, PartialEq)]
struct Tail {
    m: usize,
    e1: f64,
    e2: f64,
    /// `r(n^2)` for `n = m+1 ..= m + r.len()`.
    r: Vec<f64>,
}

impl Tail {
    fn new(sfun: &SFunction, m: usize) -> Self {
        let head = sfun.head();
        let (mut s1, mut s2) = (0.0, 0.0);
        for (k, mu) in head.iter().enumerate() {
            let kk = ((k + 1) * (k + 1)) as f64;
            let mm = mu * mu;
            s1 += mm - kk;
            s2 += mm * mm - kk * kk;
        }
        let e1 = s1;
        let e2 = 0.5 * s2 + 0.5 * s1 * s1;
        let l = (20 * m).max(40 * (head.len() + 1));
        let r = (m + 1..=l)
            .map(|n| {
                let lam = (n * n) as f64;
                sfun.inverse_ratio_minus_one(n) - e1 / lam - e2 / (lam * lam)
            })
            .collect();
        Self { m, e1, e2, r }
    }

    fn last_index(&self) -> usize {
        self.m + self.r.len()
    }

    /// `D(y)` for `0 <= y <= 2 pi`.
    fn d(&self, y: f64) -> f64 {
        let (mut p2, mut p4) = (0.0, 0.0);
        for n in 1..=self.m {
            let nf = n as f64;
            let c = (nf * y).cos();
            let n2 = nf * nf;
            p2 += c / n2;
            p4 += c / (n2 * n2);
        }
        let y2 = y * y;
        let c2 = PI * PI / 6.0 - PI * y / 2.0 + y2 / 4.0;
        let c4 = PI.powi(4) / 90.0 - PI * PI * y2 / 12.0 + PI * y2 * y / 12.0 - y2 * y2 / 48.0;
        let mut acc = self.e1 * (c2 - p2) + self.e2 * (c4 - p4);
        for (i, r) in self.r.iter().enumerate() {
            acc += r * (((self.m + 1 + i) as f64) * y).cos();
        }
        acc
    }

    /// Bound on `(2/pi) sum_{n > L} |r(n^2)|` assuming `n^-6` decay.
    fn remainder_bound(&self) -> f64 {
        let l = self.last_index() as f64;
        let rl = self.r.last().map(|r| r.abs()).unwrap_or(0.0);
        2.0 / PI * rl * l / 5.0
    }
}

/// Pointwise evaluator of the truncated-plus-tail series for `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct FSeries {
    /// `(mu_n, 2 w_n)` for `n <= N`.
    perturbed: Vec<(f64, Complex64)>,
    /// Coefficient of `sin(nx) sin(nt)` for `n = 1..=M`.
    integer: Vec<Complex64>,
    tail: Option<Tail>,
    tail_bound: f64,
}

impl FSeries {
    pub fn new(aux: &AuxSpectrum, truncation_m: usize, mode: TailMode) -> Result<Self> {
        let n_aux = aux.n_aux;
        if truncation_m > aux.len() {
            return Err(Error::Truncation(format!(
                "truncation M = {truncation_m} exceeds the {} available spectral terms",
                aux.len()
            )));
        }
        if truncation_m <= n_aux && n_aux > 0 {
            return Err(Error::Truncation(format!(
                "truncation M = {truncation_m} must exceed N = {n_aux}"
            )));
        }
        let perturbed = (0..n_aux)
            .map(|i| (aux.mu_seq[i], aux.w_seq[i] * 2.0))
            .collect();
        let integer = (0..truncation_m)
            .map(|i| {
                if i < n_aux {
                    Complex64::new(-2.0 / PI, 0.0)
                } else {
                    aux.w_seq[i] * 2.0 - 2.0 / PI
                }
            })
            .collect();
        let sfun = aux.s_function();
        let (tail, tail_bound) = if n_aux == 0 {
            (None, 0.0)
        } else {
            let t = Tail::new(&sfun, truncation_m);
            match mode {
                TailMode::Analytic => {
                    let b = t.remainder_bound();
                    (Some(t), b)
                }
                TailMode::Truncate => {
                    let l = t.last_index();
                    let partial: f64 = (truncation_m + 1..=l)
                        .map(|n| sfun.inverse_ratio_minus_one(n).abs())
                        .sum();
                    let beyond = sfun.inverse_ratio_minus_one(l).abs() * l as f64;
                    (None, 2.0 / PI * (partial + beyond))
                }
            }
        };
        Ok(Self {
            perturbed,
            integer,
            tail,
            tail_bound,
        })
    }

    pub fn truncation_m(&self) -> usize {
        self.integer.len()
    }

    /// Bound on the part of the series not represented.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `F` carries `-(kink/2) |x - t|` from the analytic tail; zero when truncated.
    pub fn kink(&self) -> f64 {
        self.tail.as_ref().map_or(0.0, |t| t.e1)
    }

    pub fn eval(&self, x: f64, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(mu, a) in &self.perturbed {
            acc += a * ((mu * x).sin() * (mu * t).sin());
        }
        for (i, b) in self.integer.iter().enumerate() {
            let n = (i + 1) as f64;
            acc += b * ((n * x).sin() * (n * t).sin());
        }
        if let Some(tail) = &self.tail {
            acc += (tail.d((x - t).abs()) - tail.d(x + t)) / PI;
        }
        acc
    }

    /// `F` at every grid pair `t_j <= x_i`, packed by rows.
    pub fn assemble(&self, n_points: usize) -> Vec<Complex64> {
        let h = spacing(n_points);
        let np = self.perturbed.len();
        let m = self.integer.len();
        // sine tables, one contiguous row per grid node
        let mut sp = vec![0.0; n_points * np];
        let mut si = vec![0.0; n_points * m];
        for i in 0..n_points {
            let x = i as f64 * h;
            for (k, &(mu, _)) in self.perturbed.iter().enumerate() {
                sp[i * np + k] = (mu * x).sin();
            }
            for k in 0..m {
                si[i * m + k] = (((k + 1) * i) as f64 * h).sin();
            }
        }
        let d_grid: Vec<f64> = match &self.tail {
            Some(tail) => (0..2 * n_points - 1)
                .map(|k| tail.d(k as f64 * h))
                .collect(),
            None => Vec::new(),
        };
        let mut out = vec![Complex64::new(0.0, 0.0); row_start(n_points)];
        let mut scaled_p = vec![Complex64::new(0.0, 0.0); np];
        let mut scaled_i = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..n_points {
            for k in 0..np {
                scaled_p[k] = self.perturbed[k].1 * sp[i * np + k];
            }
            for k in 0..m {
                scaled_i[k] = self.integer[k] * si[i * m + k];
            }
            let row = row_start(i);
            for j in 0..=i {
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, s) in scaled_p.iter().zip(&sp[j * np..(j + 1) * np]) {
                    acc += a * s;
                }
                for (a, s) in scaled_i.iter().zip(&si[j * m..(j + 1) * m]) {
                    acc += a * s;
                }
                if !d_grid.is_empty() {
                    acc += (d_grid[i - j] - d_grid[i + j]) / PI;
                }
                out[row + j] = acc;
            }
        }
        out
    }
}

/// Discretized `F` and `K` on the shared uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSet {
    n_points: usize,
    truncation_m: usize,
    tail_bound: f64,
    kink: f64,
    f_vals: Vec<Complex64>,
    k_vals: Vec<Complex64>,
}

impl KernelSet {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn h(&self) -> f64 {
        spacing(self.n_points)
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn truncation_m(&self) -> usize {
        self.truncation_m
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Coefficient of the `-(kink/2) |x - t|` term in `F`.
    pub fn kink(&self) -> f64 {
        self.kink
    }

    pub fn with_kink(mut self, kink: f64) -> Self {
        self.kink = kink;
        self
    }

    /// `F(x_i, t_j)` for any order of the indices.
    pub fn f(&self, i: usize, j: usize) -> Complex64 {
        let (a, b) = if j <= i { (i, j) } else { (j, i) };
        self.f_vals[row_start(a) + b]
    }

    /// `K(x_i, t_j)`, `j <= i`; zero until the Gelfand-Levitan solve has run.
    pub fn k(&self, i: usize, j: usize) -> Complex64 {
        assert!(j <= i, "K is stored for t <= x only");
        self.k_vals
            .get(row_start(i) + j)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn f_packed(&self) -> &[Complex64] {
        &self.f_vals
    }

    pub fn k_packed(&self) -> &[Complex64] {
        &self.k_vals
    }

    pub fn has_k(&self) -> bool {
        !self.k_vals.is_empty()
    }

    pub(crate) fn set_k(&mut self, k: Vec<Complex64>) {
        self.k_vals = k;
    }

    pub fn max_abs_f(&self) -> f64 {
        self.f_vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn from_packed(n_points: usize, f_vals: Vec<Complex64>, truncation_m: usize) -> Result<Self> {
        if f_vals.len() != row_start(n_points) {
            return Err(Error::Dimension(format!(
                "packed F has {} entries, expected {}",
                f_vals.len(),
                row_start(n_points)
            )));
        }
        Ok(Self {
            n_points,
            truncation_m,
            tail_bound: 0.0,
            kink: 0.0,
            f_vals,
            k_vals: Vec::new(),
        })
    }
}

/// Assemble `F` on a grid of `n_points`; rejects a neglected tail above `tail_tol`.
pub fn assemble_f(
    aux: &AuxSpectrum,
    n_points: usize,
    truncation_m: usize,
    mode: TailMode,
    tail_tol: f64,
) -> Result<KernelSet> {
    if n_points < crate::potential::MIN_POINTS {
        return Err(Error::InvalidGrid(format!(
            "grid_points = {n_points} but at least {} are required",
            crate::potential::MIN_POINTS
        )));
    }
    let series = FSeries::new(aux, truncation_m, mode)?;
    let f_vals = series.assemble(n_points);
    let max_f = f_vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    // rounding floor of the direct sums
    let rounding = 64.0 * f64::EPSILON * (1.0 + max_f) * truncation_m as f64;
    let tail_bound = series.tail_bound() + rounding;
    if series.tail_bound() > tail_tol {
        return Err(Error::TailTooLarge {
            bound: series.tail_bound(),
            tol: tail_tol,
        });
    }
    Ok(KernelSet {
        n_points,
        truncation_m,
        tail_bound,
        kink: series.kink(),
        f_vals,
        k_vals: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inverse::aux::N_MAX_DEFAULT;
    use crate::target::TargetDeterminant;

    fn small_target() -> TargetDeterminant {
        TargetDeterminant::from_real(&[0.01], 0).unwrap()
    }

    /// Partial sum of the defining series up to `n_max` terms. Beyond it the
    /// coefficients behave like `(2/pi) e1 / n^2` with `e1 = sum (mu_k^2 - k^2)`,
    /// whose sum is `~ e1 / (pi n_max)` on the diagonal and `O(n_max^-2)` elsewhere.
    fn brute_force(aux: &AuxSpectrum, x: f64, t: f64, n_max: usize) -> Complex64 {
        let sfun = aux.s_function();
        let e1: f64 = (0..aux.n_aux)
            .map(|k| aux.mu_seq[k].powi(2) - ((k + 1) * (k + 1)) as f64)
            .sum();
        let mut acc = if x == t {
            Complex64::new(e1 / (PI * n_max as f64), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
        for n in 1..=n_max {
            let nf = n as f64;
            let (mu, w) = if n <= aux.len() {
                (aux.mu_seq[n - 1], aux.w_seq[n - 1])
            } else {
                (nf, Complex64::new(1.0 / (PI * sfun.ratio_at_integer(n)), 0.0))
            };
            acc += w * 2.0 * (mu * x).sin() * (mu * t).sin() - 2.0 / PI * (nf * x).sin() * (nf * t).sin();
        }
        acc
    }

    #[test]
    fn zero_target_gives_identically_zero_kernel() {
        let zero = TargetDeterminant::new(vec![Complex64::new(1.0, 0.0)], 0, 0.0).unwrap();
        let aux = AuxSpectrum::build(&zero, 64, N_MAX_DEFAULT).unwrap();
        let ks = assemble_f(&aux, 129, 64, TailMode::Analytic, 1e-6).unwrap();
        assert_eq!(ks.max_abs_f(), 0.0);
    }

    #[test]
    fn analytic_tail_matches_long_partial_sums() {
        let aux = AuxSpectrum::build(&small_target(), 64, N_MAX_DEFAULT).unwrap();
        let series = FSeries::new(&aux, 64, TailMode::Analytic).unwrap();
        for &(x, t) in &[(1.0, 0.5), (2.9, 2.9), (3.0, 0.1), (PI, 1.3)] {
            let a = series.eval(x, t);
            let b = brute_force(&aux, x, t, 200_000);
            assert!((a - b).norm() < 1e-9, "({x}, {t}): {a} vs {b}");
        }
    }

    #[test]
    fn grid_assembly_matches_pointwise_and_is_symmetric() {
        let aux = AuxSpectrum::build(&small_target(), 64, N_MAX_DEFAULT).unwrap();
        let ks = assemble_f(&aux, 65, 64, TailMode::Analytic, 1e-6).unwrap();
        let series = FSeries::new(&aux, 64, TailMode::Analytic).unwrap();
        let mut asym: f64 = 0.0;
        for i in 0..65 {
            for j in 0..65 {
                let direct = series.eval(ks.x(i), ks.x(j));
                let mirrored = series.eval(ks.x(j), ks.x(i));
                asym = asym.max((direct - mirrored).norm());
                assert!((ks.f(i, j) - direct).norm() < 1e-12);
            }
        }
        assert!(asym <= 1e-12);
        assert!(ks.kink() != 0.0);
        assert!(ks.f(10, 0).norm() < 1e-15 && ks.f(0, 0).norm() < 1e-15);
    }

    #[test]
    fn truncated_series_respects_reported_bound() {
        let aux = AuxSpectrum::build(&small_target(), 128, N_MAX_DEFAULT).unwrap();
        let loose = 1.0;
        let a = assemble_f(&aux, 65, 64, TailMode::Truncate, loose).unwrap();
        let b = assemble_f(&aux, 65, 128, TailMode::Truncate, loose).unwrap();
        let change = (0..65)
            .flat_map(|i| (0..=i).map(move |j| (i, j)))
            .map(|(i, j)| (a.f(i, j) - b.f(i, j)).norm())
            .fold(0.0, f64::max);
        assert!((a.max_abs_f() - b.max_abs_f()).abs() <= a.tail_bound());
        assert!(change <= a.tail_bound());
        assert!(matches!(
            assemble_f(&aux, 65, 64, TailMode::Truncate, 1e-6),
            Err(Error::TailTooLarge { .. })
        ));
        // analytic mode: doubling M moves F only at rounding level
        let c = assemble_f(&aux, 65, 64, TailMode::Analytic, 1e-6).unwrap();
        let d = assemble_f(&aux, 65, 128, TailMode::Analytic, 1e-6).unwrap();
        assert!((c.max_abs_f() - d.max_abs_f()).abs() <= c.tail_bound());
    }

    #[test]
    fn truncation_below_n_rejected() {
        let big = TargetDeterminant::from_real(&[5.0], 0).unwrap();
        let aux = AuxSpectrum::build(&big, 40, N_MAX_DEFAULT).unwrap();
        assert!(aux.n_aux > 2);
        assert!(matches!(
            FSeries::new(&aux, aux.n_aux, TailMode::Analytic),
            Err(Error::Truncation(_))
        ));
    }
}
