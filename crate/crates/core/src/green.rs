//! Green function of `u'' - q u + mu^2 u = -f` under the degenerate conditions
//! `u'(0) + (-1)^theta u'(pi) = 0`, `u(0) - (-1)^theta u(pi) = 0`.
//!
//! `G = Phi / (2 Delta) + g` with `g(x, xi) = -sgn(x - xi) W(x, xi) / 2`,
//! `W(x, xi) = s(x) c(xi) - c(x) s(xi)`, and, writing `C, C', S, S'` for the
//! endpoint values at `pi` and `sigma = (-1)^theta`,
//! `Phi = 2 sigma W(x, xi) - (C + S')[s(x)c(xi) + c(x)s(xi)] + 2[C' s(x)s(xi) + S c(x)c(xi)]`.
//! `G` is the kernel of the resolvent `(A - lambda)^{-1}`, `A = -d^2/dx^2 + q`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{eval_at_pi, solve_fundamental, Endpoints, SolutionRecord, SolverOptions};
use crate::potential::PotentialGrid;
use crate::spectral::{degenerate_floor, BoundaryTheta};

/// Fundamental solutions at one spectral parameter, sampled on a sub-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenData {
    pub mu: Complex64,
    pub theta: BoundaryTheta,
    pub ends: Endpoints,
    pub delta: Complex64,
    pub h: f64,
    pub c: Vec<Complex64>,
    pub c_prime: Vec<Complex64>,
    pub s: Vec<Complex64>,
    pub s_prime: Vec<Complex64>,
}

impl GreenData {
    /// Solve on the grid of `q` and keep every `stride`-th node. Fails near an
    /// eigenvalue and for an identically vanishing determinant.
    pub fn new(q: &PotentialGrid, theta: BoundaryTheta, mu: Complex64, stride: usize) -> Result<Self> {
        let rec = solve_fundamental(q, mu, &SolverOptions::default())?;
        let ends = eval_at_pi(&rec);
        let delta = ends.c - ends.s_prime;
        let floor = degenerate_floor(q);
        if delta.norm() < floor {
            return Err(classify_small_determinant(q, mu, delta, floor)?);
        }
        Self::from_record(&rec, theta, stride)
    }

    /// Sample an existing solution; no determinant check.
    pub fn from_record(rec: &SolutionRecord, theta: BoundaryTheta, stride: usize) -> Result<Self> {
        let n = rec.len();
        if stride == 0 || (n - 1) % stride != 0 {
            return Err(Error::InvalidGrid(format!(
                "stride {stride} does not divide the {} grid intervals",
                n - 1
            )));
        }
        let ends = eval_at_pi(rec);
        let pick = |v: &[Complex64]| v.iter().step_by(stride).copied().collect::<Vec<_>>();
        Ok(Self {
            mu: rec.mu,
            theta,
            ends,
            delta: ends.c - ends.s_prime,
            h: rec.h * stride as f64,
            c: pick(&rec.c),
            c_prime: pick(&rec.c_prime),
            s: pick(&rec.s),
            s_prime: pick(&rec.s_prime),
        })
    }

    pub fn n_points(&self) -> usize {
        self.c.len()
    }

    /// `Phi(x_i, xi_j)`; `dx` differentiates in `x`.
    pub fn phi(&self, i: usize, j: usize, dx: bool) -> Complex64 {
        let (cx, sx) = if dx {
            (self.c_prime[i], self.s_prime[i])
        } else {
            (self.c[i], self.s[i])
        };
        phi(self.theta, &self.ends, cx, sx, self.c[j], self.s[j])
    }

    /// `g(x_i, xi_j)` or its `x`-derivative.
    pub fn g(&self, i: usize, j: usize, dx: bool) -> Complex64 {
        let (cx, sx) = if dx {
            (self.c_prime[i], self.s_prime[i])
        } else {
            (self.c[i], self.s[i])
        };
        let w = sx * self.c[j] - cx * self.s[j];
        // on the diagonal w vanishes, and the derivative is taken from x < xi
        if i > j {
            -0.5 * w
        } else {
            0.5 * w
        }
    }

    pub fn green(&self, i: usize, j: usize) -> Complex64 {
        self.phi(i, j, false) / (2.0 * self.delta) + self.g(i, j, false)
    }

    /// `d/dx G(x_i, xi_j)`, from the side `x < xi` when `i == j`.
    pub fn green_dx(&self, i: usize, j: usize) -> Complex64 {
        self.phi(i, j, true) / (2.0 * self.delta) + self.g(i, j, true)
    }

    /// Row-major `n x n` matrix of `G(x_i, xi_j)`.
    pub fn green_matrix(&self) -> Vec<Complex64> {
        let n = self.n_points();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.green(i, j));
            }
        }
        out
    }
}

/// Near-eigenvalue versus identically zero determinant, by probing elsewhere.
fn classify_small_determinant(
    q: &PotentialGrid,
    mu: Complex64,
    delta: Complex64,
    floor: f64,
) -> Result<Error> {
    let opts = SolverOptions::default();
    let mut max_abs = delta.norm();
    for probe in [mu + 0.731, mu + Complex64::new(0.0, 0.613), mu * 1.37 + 1.9] {
        let e = eval_at_pi(&solve_fundamental(q, probe, &opts)?);
        max_abs = max_abs.max((e.c - e.s_prime).norm());
    }
    if max_abs < floor {
        Ok(Error::DegenerateDeterminant { max_abs, floor })
    } else {
        Ok(Error::NearEigenvalue {
            mu,
            abs: delta.norm(),
            floor,
        })
    }
}

/// Combined form of `Phi` for either `theta`.
pub fn phi(
    theta: BoundaryTheta,
    e: &Endpoints,
    cx: Complex64,
    sx: Complex64,
    cxi: Complex64,
    sxi: Complex64,
) -> Complex64 {
    let sigma = theta.sigma();
    2.0 * sigma * (sx * cxi - cx * sxi) - (e.c + e.s_prime) * (sx * cxi + cx * sxi)
        + 2.0 * (e.c_prime * sx * sxi + e.s * cx * cxi)
}

/// `Phi` for `theta = 0` before like terms are combined; equals [`phi`] only
/// through the Wronskian identity `C S' - C' S = 1`.
pub fn phi_bracket_form(
    e: &Endpoints,
    cx: Complex64,
    sx: Complex64,
    cxi: Complex64,
    sxi: Complex64,
) -> Complex64 {
    let (c, cp, s, sp) = (e.c, e.c_prime, e.s, e.s_prime);
    let first = -cxi * s - sxi * (-1.0 - c);
    let second = cxi * (-1.0 + sp) - sxi * cp;
    sx * (cp * first - (1.0 - c) * second) - cx * ((1.0 + sp) * first + s * second)
}

/// Sampled Green function with the data needed for derived checks.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenSample {
    pub mu: Complex64,
    pub theta: BoundaryTheta,
    pub n_points: usize,
    pub h: f64,
    /// Row-major `G(x_i, xi_j)`.
    pub values: Vec<Complex64>,
    pub data: GreenData,
}

impl GreenSample {
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.n_points + j]
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// `max |G|` over the grid, the scale for boundary residuals.
    pub fn scale(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest residuals of the two boundary conditions in `x` over all `xi_j`
    /// strictly inside `(0, pi)`: `(derivative condition, value condition)`.
    pub fn bc_residuals(&self) -> (f64, f64) {
        let n = self.n_points;
        let sigma = self.theta.sigma();
        let (mut d, mut v) = (0.0f64, 0.0f64);
        for j in 1..n - 1 {
            let r1 = self.data.green_dx(0, j) + sigma * self.data.green_dx(n - 1, j);
            let r2 = self.at(0, j) - sigma * self.at(n - 1, j);
            d = d.max(r1.norm());
            v = v.max(r2.norm());
        }
        (d, v)
    }

    /// Jump of `dG/dx` across `x = xi_j` from one-sided second-order differences.
    pub fn derivative_jump(&self, j: usize) -> Complex64 {
        let h = self.h;
        let right = (-3.0 * self.at(j, j) + 4.0 * self.at(j + 1, j) - self.at(j + 2, j)) / (2.0 * h);
        let left = (3.0 * self.at(j, j) - 4.0 * self.at(j - 1, j) + self.at(j - 2, j)) / (2.0 * h);
        right - left
    }
}

/// `G` on every `stride`-th node of the grid of `q`.
pub fn green_function(
    q: &PotentialGrid,
    theta: BoundaryTheta,
    mu: Complex64,
    stride: usize,
) -> Result<GreenSample> {
    let data = GreenData::new(q, theta, mu, stride)?;
    let values = data.green_matrix();
    Ok(GreenSample {
        mu,
        theta,
        n_points: data.n_points(),
        h: data.h,
        values,
        data,
    })
}

/// `max |mu Phi / 2 - [sin mu(x - xi) + sin mu(pi - x - xi)]|` over the sampled
/// pairs: the distance from the large-`mu` leading term.
pub fn leading_term_defect(data: &GreenData, pairs: &[(usize, usize)]) -> f64 {
    let mu = data.mu;
    pairs
        .iter()
        .map(|&(i, j)| {
            let (x, xi) = (i as f64 * data.h, j as f64 * data.h);
            let lead = (mu * (x - xi)).sin() + (mu * (std::f64::consts::PI - x - xi)).sin();
            (mu * data.phi(i, j, false) * 0.5 - lead).norm()
        })
        .fold(0.0, f64::max)
}

/// Composite Simpson weights for an odd number of nodes, trapezoid otherwise.
pub fn quadrature_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n < 2 {
        return vec![0.0; n];
    }
    if n % 2 == 1 && n >= 3 {
        for (k, wk) in w.iter_mut().enumerate() {
            *wk = if k == 0 || k == n - 1 {
                h / 3.0
            } else if k % 2 == 1 {
                4.0 * h / 3.0
            } else {
                2.0 * h / 3.0
            };
        }
    } else {
        w[0] = h / 2.0;
        w[n - 1] = h / 2.0;
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    LikelyComplete,
    LikelyIncomplete,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub epsilon: f64,
    /// `max_{x in [0, eps]} |q(x) - q(pi - x)|`.
    pub symmetry_defect_eps: f64,
    /// The same over `[0, pi]`.
    pub symmetry_defect_all: f64,
    /// Smallest `k <= 4` with `q^(k)(0) != (-1)^k q^(k)(pi)`.
    pub mismatch_k_parity: Option<u32>,
    /// Smallest `k <= 4` with `q^(k)(0) != -q^(k)(pi)`.
    pub mismatch_k_negated: Option<u32>,
    pub verdict: Verdict,
}

/// Finite-difference weights for the `k`-th derivative at `z` from `nodes`.
fn fd_weights(z: f64, nodes: &[f64], k: usize) -> Vec<f64> {
    // Fornberg's recursion
    let n = nodes.len();
    let mut c = vec![vec![0.0; k + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(k);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for m in (1..=mn).rev() {
                    c[i][m] = c1 * (m as f64 * c[i - 1][m - 1] - c5 * c[i - 1][m]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for m in (1..=mn).rev() {
                c[j][m] = (c4 * c[j][m] - m as f64 * c[j][m - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[k]).collect()
}

/// Symmetry defects and endpoint-derivative comparisons behind the completeness
/// criteria; both readings of the sign in the derivative criterion are reported.
pub fn completeness_heuristic(q: &PotentialGrid, epsilon: f64, tol: f64) -> CompletenessReport {
    let n = q.n_points();
    let v = q.values();
    let scale = 1.0 + q.max_abs();
    let mut d_eps = 0.0f64;
    let mut d_all = 0.0f64;
    for i in 0..n {
        let d = (v[i] - v[n - 1 - i]).norm();
        d_all = d_all.max(d);
        if q.x(i) <= epsilon + 1e-12 {
            d_eps = d_eps.max(d);
        }
    }
    // one-sided stencils of 9 nodes with spacing about pi/256
    let stride = ((n - 1) / 256).max(1).min((n - 1) / 8);
    let hh = q.h() * stride as f64;
    let nodes: Vec<f64> = (0..9).map(|j| j as f64 * hh).collect();
    let deriv = |k: usize, from_right: bool| -> Complex64 {
        let w = fd_weights(0.0, &nodes, k);
        let sum: Complex64 = (0..9)
            .map(|j| {
                let idx = if from_right { n - 1 - j * stride } else { j * stride };
                v[idx] * w[j]
            })
            .sum();
        // derivative in x at pi is (-1)^k times the derivative in pi - x
        if from_right && k % 2 == 1 {
            -sum
        } else {
            sum
        }
    };
    let mut k_parity = None;
    let mut k_negated = None;
    for k in 0..=4u32 {
        let a = deriv(k as usize, false);
        let b = deriv(k as usize, true);
        let thr = tol * scale * 10f64.powi(k as i32);
        let parity = if k % 2 == 0 { b } else { -b };
        if k_parity.is_none() && (a - parity).norm() > thr {
            k_parity = Some(k);
        }
        if k_negated.is_none() && (a + b).norm() > thr {
            k_negated = Some(k);
        }
    }
    let verdict = if d_eps <= tol * scale {
        Verdict::LikelyIncomplete
    } else {
        match (k_parity, k_negated) {
            (Some(_), Some(_)) => Verdict::LikelyComplete,
            _ => Verdict::Inconclusive,
        }
    };
    CompletenessReport {
        epsilon,
        symmetry_defect_eps: d_eps,
        symmetry_defect_all: d_all,
        mismatch_k_parity: k_parity,
        mismatch_k_negated: k_negated,
        verdict,
    }
}
