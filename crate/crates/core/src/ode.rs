//! Fundamental system of `u'' - q(x) u + mu^2 u = 0` on `[0, pi]`.
//!
//! `c` and `s` satisfy `c(0) = s'(0) = 1`, `c'(0) = s(0) = 0`. Both columns of
//! the 2x2 transfer matrix are advanced on the potential's uniform grid by the
//! fourth-order Magnus scheme with two Gauss-Legendre nodes per step. Each step
//! is the exact exponential of a traceless matrix, so `c s' - c' s = 1` holds to
//! rounding, and the scheme is time-symmetric, so a potential with
//! `q(pi - x) = q(x)` yields `c(pi) = s'(pi)` to rounding as well. `q` at the
//! Gauss nodes comes from cubic interpolation of the samples.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::PotentialGrid;

const OVERFLOW_LIMIT: f64 = 1e150;
/// Gauss-Legendre nodes on `[0, 1]`.
const GAUSS_LO: f64 = 0.5 - 0.288_675_134_594_812_9;
const GAUSS_HI: f64 = 0.5 + 0.288_675_134_594_812_9;
const SQRT3_OVER_12: f64 = 0.144_337_567_297_406_43;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Magnus steps per grid interval.
    pub substeps: usize,
    /// Reject records whose Wronskian defect exceeds this (relative to solution size).
    pub wronskian_tol: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            substeps: 1,
            wronskian_tol: Some(1e-8),
        }
    }
}

/// `c, c', s, s'` at every grid node for one spectral parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRecord {
    pub mu: Complex64,
    pub h: f64,
    pub c: Vec<Complex64>,
    pub c_prime: Vec<Complex64>,
    pub s: Vec<Complex64>,
    pub s_prime: Vec<Complex64>,
}

impl SolutionRecord {
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// `max_i |c s' - c' s - 1|`.
    pub fn wronskian_defect(&self) -> f64 {
        (0..self.len())
            .map(|i| (self.c[i] * self.s_prime[i] - self.c_prime[i] * self.s[i] - 1.0).norm())
            .fold(0.0, f64::max)
    }

    fn growth(&self) -> f64 {
        (0..self.len())
            .map(|i| (self.c[i] * self.s_prime[i]).norm() + (self.c_prime[i] * self.s[i]).norm())
            .fold(1.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoints {
    pub c: Complex64,
    pub c_prime: Complex64,
    pub s: Complex64,
    pub s_prime: Complex64,
}

impl Endpoints {
    fn from_state(y: &[Complex64; 4]) -> Self {
        Self {
            c: y[0],
            c_prime: y[1],
            s: y[2],
            s_prime: y[3],
        }
    }

    fn as_array(&self) -> [Complex64; 4] {
        [self.c, self.c_prime, self.s, self.s_prime]
    }

    fn from_array(a: [Complex64; 4]) -> Self {
        Self::from_state(&a)
    }
}

/// Endpoint values from an `h` / `2h` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RichardsonEndpoints {
    pub fine: Endpoints,
    pub coarse: Endpoints,
    pub extrapolated: Endpoints,
    /// Estimated error of `fine`: `max |fine - coarse| / 15`.
    pub error_estimate: f64,
}

/// One Magnus step of length `k` with `q` sampled at the two Gauss nodes.
/// `y = [c, c', s, s']` is multiplied by `exp(Omega)`, where
/// `Omega = [[a, k], [g, -a]]`, `a = sqrt(3) k^2 (q1 - q2) / 12`,
/// `g = k (q1 + q2) / 2 - k mu^2`.
#[inline]
fn magnus_step(y: &mut [Complex64; 4], q1: Complex64, q2: Complex64, mu2: Complex64, k: f64) {
    let a = (q1 - q2) * (SQRT3_OVER_12 * k * k);
    let g = ((q1 + q2) * 0.5 - mu2) * k;
    let w2 = a * a + g * k;
    let (ch, shc) = if w2.norm() < 1e-6 {
        (
            1.0 + w2 * (0.5 + w2 / 24.0),
            1.0 + w2 * (1.0 / 6.0 + w2 / 120.0),
        )
    } else {
        let w = w2.sqrt();
        (w.cosh(), w.sinh() / w)
    };
    let m00 = ch + shc * a;
    let m01 = shc * k;
    let m10 = shc * g;
    let m11 = ch - shc * a;
    let (u, up, v, vp) = (y[0], y[1], y[2], y[3]);
    y[0] = m00 * u + m01 * up;
    y[1] = m10 * u + m11 * up;
    y[2] = m00 * v + m01 * vp;
    y[3] = m10 * v + m11 * vp;
}

/// Advance from `x = 0` over macro-intervals of `stride` grid cells.
/// Calls `visit(node_index, state)` at every macro node, including 0.
fn propagate(
    q: &PotentialGrid,
    mu: Complex64,
    stride: usize,
    substeps: usize,
    mut visit: impl FnMut(usize, &[Complex64; 4]),
) -> Result<[Complex64; 4]> {
    let n = q.n_points();
    let mu2 = mu * mu;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut y = [one, zero, zero, one];
    visit(0, &y);
    let substeps = substeps.max(1);
    let dp = stride as f64 / substeps as f64;
    let k = q.h() * dp;
    let mut node = 0;
    while node + stride < n {
        for j in 0..substeps {
            let p0 = node as f64 + j as f64 * dp;
            let q1 = q.interp(p0 + GAUSS_LO * dp);
            let q2 = q.interp(p0 + GAUSS_HI * dp);
            magnus_step(&mut y, q1, q2, mu2, k);
        }
        node += stride;
        if y.iter().any(|v| !(v.norm() <= OVERFLOW_LIMIT)) {
            return Err(Error::IntegrationOverflow { index: node, mu });
        }
        visit(node, &y);
    }
    Ok(y)
}

fn check_mu(mu: Complex64) -> Result<()> {
    if mu.re.is_finite() && mu.im.is_finite() {
        Ok(())
    } else {
        Err(Error::IntegrationOverflow { index: 0, mu })
    }
}

/// Fundamental system on the whole grid.
pub fn solve_fundamental(
    q: &PotentialGrid,
    mu: Complex64,
    opts: &SolverOptions,
) -> Result<SolutionRecord> {
    check_mu(mu)?;
    let n = q.n_points();
    let mut rec = SolutionRecord {
        mu,
        h: q.h(),
        c: Vec::with_capacity(n),
        c_prime: Vec::with_capacity(n),
        s: Vec::with_capacity(n),
        s_prime: Vec::with_capacity(n),
    };
    let m = opts.substeps;
    propagate(q, mu, 1, m, |_, y| {
        rec.c.push(y[0]);
        rec.c_prime.push(y[1]);
        rec.s.push(y[2]);
        rec.s_prime.push(y[3]);
    })?;
    if let Some(tol) = opts.wronskian_tol {
        let defect = rec.wronskian_defect();
        if defect > tol * rec.growth() {
            return Err(Error::WronskianViolation { defect, tol, mu });
        }
    }
    Ok(rec)
}

/// The four values at `x = pi`.
pub fn eval_at_pi(rec: &SolutionRecord) -> Endpoints {
    let last = rec.len() - 1;
    Endpoints {
        c: rec.c[last],
        c_prime: rec.c_prime[last],
        s: rec.s[last],
        s_prime: rec.s_prime[last],
    }
}

/// Endpoint values without storing the interior of the solution.
pub fn endpoints(q: &PotentialGrid, mu: Complex64, opts: &SolverOptions) -> Result<Endpoints> {
    check_mu(mu)?;
    let m = opts.substeps;
    let y = propagate(q, mu, 1, m, |_, _| {})?;
    Ok(Endpoints::from_state(&y))
}

/// Endpoint values on the grid and on every other node, with the
/// fourth-order extrapolation `fine + (fine - coarse) / 15`.
pub fn endpoints_richardson(
    q: &PotentialGrid,
    mu: Complex64,
    opts: &SolverOptions,
) -> Result<RichardsonEndpoints> {
    check_mu(mu)?;
    let intervals = q.n_points() - 1;
    if intervals % 2 != 0 {
        return Err(Error::InvalidGrid(format!(
            "Richardson pair needs an even number of intervals, got {intervals}"
        )));
    }
    let m = opts.substeps;
    let fine = propagate(q, mu, 1, m, |_, _| {})?;
    let coarse = propagate(q, mu, 2, m, |_, _| {})?;
    let mut extrap = [Complex64::new(0.0, 0.0); 4];
    let mut err: f64 = 0.0;
    for j in 0..4 {
        let d = (fine[j] - coarse[j]) / 15.0;
        extrap[j] = fine[j] + d;
        err = err.max(d.norm());
    }
    Ok(RichardsonEndpoints {
        fine: Endpoints::from_state(&fine),
        coarse: Endpoints::from_state(&coarse),
        extrapolated: Endpoints::from_array(extrap),
        error_estimate: err,
    })
}

impl RichardsonEndpoints {
    pub fn pick(&self, extrapolate: bool) -> Endpoints {
        if extrapolate {
            self.extrapolated
        } else {
            self.fine
        }
    }

    pub fn max_component_gap(&self) -> f64 {
        let f = self.fine.as_array();
        let c = self.coarse.as_array();
        (0..4).map(|j| (f[j] - c[j]).norm()).fold(0.0, f64::max)
    }
}

/// Cumulative integral `I[i] = int_0^{x_i} f` with a fourth-order local rule.
pub(crate) fn cumulative_integral(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let c = h / 24.0;
    for i in 0..n - 1 {
        let piece = if i == 0 {
            (f[0] * 9.0 + f[1] * 19.0 - f[2] * 5.0 + f[3]) * c
        } else if i == n - 2 {
            (f[n - 1] * 9.0 + f[n - 2] * 19.0 - f[n - 3] * 5.0 + f[n - 4]) * c
        } else {
            ((f[i] + f[i + 1]) * 13.0 - f[i - 1] - f[i + 2]) * c
        };
        out[i + 1] = out[i] + piece;
    }
    out
}

/// Particular solution of `u'' - q u + mu^2 u = rhs` with `u(0) = u'(0) = 0`,
/// by variation of parameters: `u(x) = int_0^x [s(x) c(t) - c(x) s(t)] rhs(t) dt`.
pub fn solve_inhomogeneous(
    q: &PotentialGrid,
    mu: Complex64,
    rhs: &[Complex64],
    opts: &SolverOptions,
) -> Result<Vec<Complex64>> {
    if rhs.len() != q.n_points() {
        return Err(Error::Dimension(format!(
            "rhs has {} samples, grid has {}",
            rhs.len(),
            q.n_points()
        )));
    }
    let rec = solve_fundamental(q, mu, opts)?;
    Ok(particular_solution(&rec, rhs))
}

pub(crate) fn particular_solution(rec: &SolutionRecord, rhs: &[Complex64]) -> Vec<Complex64> {
    let cr: Vec<Complex64> = rec.c.iter().zip(rhs).map(|(c, r)| c * r).collect();
    let sr: Vec<Complex64> = rec.s.iter().zip(rhs).map(|(s, r)| s * r).collect();
    let ic = cumulative_integral(&cr, rec.h);
    let is = cumulative_integral(&sr, rec.h);
    (0..rec.len())
        .map(|i| rec.s[i] * ic[i] - rec.c[i] * is[i])
        .collect()
}
