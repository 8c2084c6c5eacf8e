//! Riesz projections `P_n = -(1/2 pi i) \oint G d lambda` onto root subspaces.
//!
//! The contour is a circle in the `lambda`-plane around one eigenvalue, sampled
//! with the trapezoid rule, which converges geometrically for the periodic
//! integrand. The function `g` in `G` is entire in `lambda`, so the kernel of
//! `P_n` is smooth.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::green::{quadrature_weights, GreenData};
use crate::ode::{solve_fundamental, SolverOptions};
use crate::potential::PotentialGrid;
use crate::spectral::{degenerate_floor, BoundaryTheta, SpectralPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionOptions {
    /// Quadrature points on the circle; the check uses twice as many.
    pub contour_points: usize,
    /// Kernel nodes are every `stride`-th node of the potential grid.
    pub stride: usize,
    /// Largest accepted change of the kernel when the points are doubled,
    /// relative to `max(1, max |P|)`.
    pub doubling_tol: f64,
    /// How many times the radius may be halved.
    pub max_shrink: u32,
    /// Singular values below `rank_floor * sigma_max` do not count toward rank.
    pub rank_floor: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            contour_points: 256,
            stride: 8,
            doubling_tol: 1e-6,
            max_shrink: 6,
            rank_floor: 1e-6,
        }
    }
}

impl ProjectionOptions {
    pub fn validate(&self) -> Result<()> {
        if self.contour_points < 8 {
            return Err(Error::Config("contour_points must be at least 8".into()));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride must be positive".into()));
        }
        for (name, v) in [("doubling_tol", self.doubling_tol), ("rank_floor", self.rank_floor)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Kernel of a projection sampled on a uniform grid over `[0, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionKernel {
    pub center: SpectralPoint,
    pub contour_radius: f64,
    pub contour_points: usize,
    /// Largest kernel change observed when the contour points were doubled.
    pub doubling_change: f64,
    pub n_points: usize,
    pub h: f64,
    /// Row-major `P(x_i, xi_j)`.
    pub values: Vec<Complex64>,
}

/// `lambda`-radius: half the distance to the nearest other eigenvalue.
pub fn default_radius(center: &SpectralPoint, others: &[SpectralPoint]) -> f64 {
    others
        .iter()
        .map(|o| (o.lambda - center.lambda).norm())
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min)
        .min(2.0)
        * 0.5
}

/// Projection onto the root subspace of `center`, with the contour radius
/// chosen from the neighbouring eigenvalues `others` (which may include `center`).
pub fn spectral_projection(
    q: &PotentialGrid,
    theta: BoundaryTheta,
    center: &SpectralPoint,
    others: &[SpectralPoint],
    opts: &ProjectionOptions,
) -> Result<ProjectionKernel> {
    opts.validate()?;
    let n_grid = q.n_points();
    if (n_grid - 1) % opts.stride != 0 {
        return Err(Error::InvalidGrid(format!(
            "stride {} does not divide the {} grid intervals",
            opts.stride,
            n_grid - 1
        )));
    }
    let mut radius = default_radius(center, others);
    let mut last_change = f64::INFINITY;
    for _ in 0..=opts.max_shrink {
        let attempt = contour_integral(q, theta, center, radius, opts)?;
        if attempt.doubling_change < opts.doubling_tol {
            return Ok(attempt);
        }
        last_change = attempt.doubling_change;
        radius *= 0.5;
    }
    Err(Error::ContourResolution {
        change: last_change,
        radius: radius * 2.0,
    })
}

fn contour_integral(
    q: &PotentialGrid,
    theta: BoundaryTheta,
    center: &SpectralPoint,
    radius: f64,
    opts: &ProjectionOptions,
) -> Result<ProjectionKernel> {
    let k = opts.contour_points;
    let floor = degenerate_floor(q);
    let solver = SolverOptions::default();
    let n = (q.n_points() - 1) / opts.stride + 1;
    let mut coarse = vec![Complex64::new(0.0, 0.0); n * n];
    let mut fine = vec![Complex64::new(0.0, 0.0); n * n];
    let mut deltas = Vec::with_capacity(2 * k);
    let mut h = 0.0;
    for m in 0..2 * k {
        let phase = Complex64::from_polar(1.0, PI * m as f64 / k as f64);
        let lambda = center.lambda + radius * phase;
        let rec = solve_fundamental(q, lambda.sqrt(), &solver)?;
        let data = GreenData::from_record(&rec, theta, opts.stride)?;
        if data.delta.norm() < floor {
            return Err(Error::NearEigenvalue {
                mu: rec.mu,
                abs: data.delta.norm(),
                floor,
            });
        }
        deltas.push(data.delta);
        h = data.h;
        // -(1/2 pi i) * (i r e^{i phi}) * (2 pi / K) = -(r/K) e^{i phi}
        let wf = -radius * phase / (2 * k) as f64;
        let on_coarse = m % 2 == 0;
        for i in 0..n {
            for j in 0..n {
                let v = data.green(i, j);
                fine[i * n + j] += wf * v;
                if on_coarse {
                    coarse[i * n + j] += 2.0 * wf * v;
                }
            }
        }
    }
    let winding = winding_of(&deltas);
    if winding != center.multiplicity as i64 {
        return Err(Error::Enclosure {
            count: winding,
            expected: center.multiplicity as i64,
        });
    }
    let scale = fine.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let change = fine
        .iter()
        .zip(&coarse)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale;
    Ok(ProjectionKernel {
        center: *center,
        contour_radius: radius,
        contour_points: k,
        doubling_change: change,
        n_points: n,
        h,
        values: fine,
    })
}

/// Winding number of a closed sampled curve; the samples must resolve the phase.
fn winding_of(values: &[Complex64]) -> i64 {
    let m = values.len();
    let total: f64 = (0..m)
        .map(|i| (values[(i + 1) % m] / values[i]).arg())
        .sum();
    (total / (2.0 * PI)).round() as i64
}

impl ProjectionKernel {
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.n_points + j]
    }

    pub fn weights(&self) -> Vec<f64> {
        quadrature_weights(self.n_points, self.h)
    }

    /// `int P(x, x) dx`; equals the algebraic multiplicity for a projection.
    pub fn trace(&self) -> Complex64 {
        self.weights()
            .iter()
            .enumerate()
            .map(|(i, w)| self.at(i, i) * *w)
            .sum()
    }

    /// Kernel of `self o other`.
    pub fn compose(&self, other: &ProjectionKernel) -> Result<Vec<Complex64>> {
        compose_kernels(&self.values, &other.values, self.n_points, &self.weights())
    }

    /// `W^{1/2} P W^{1/2}`: the discrete operator on `L^2(0, pi)`.
    pub fn weighted(&self) -> DMatrix<Complex64> {
        weighted_matrix(&self.values, self.n_points, &self.weights())
    }

    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(&self.weighted())
    }

    /// Operator norm on `L^2(0, pi)`.
    pub fn norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `floor * sigma_max`.
    pub fn rank(&self, floor: f64) -> usize {
        let sv = self.singular_values();
        let top = sv.first().copied().unwrap_or(0.0);
        sv.iter().filter(|s| **s > floor * top).count()
    }

    /// `||P o P - P|| / ||P||`.
    pub fn idempotence_defect(&self) -> Result<f64> {
        let pp = self.compose(self)?;
        let diff: Vec<Complex64> = pp.iter().zip(&self.values).map(|(a, b)| a - b).collect();
        Ok(kernel_norm(&diff, self.n_points, &self.weights()) / self.norm())
    }

    /// `||self o other|| / (||self|| ||other||)`.
    pub fn product_ratio(&self, other: &ProjectionKernel) -> Result<f64> {
        let prod = self.compose(other)?;
        Ok(kernel_norm(&prod, self.n_points, &self.weights()) / (self.norm() * other.norm()))
    }
}

pub fn compose_kernels(a: &[Complex64], b: &[Complex64], n: usize, w: &[f64]) -> Result<Vec<Complex64>> {
    if a.len() != n * n || b.len() != n * n || w.len() != n {
        return Err(Error::Dimension(format!(
            "kernels of {} and {} entries with {} weights",
            a.len(),
            b.len(),
            w.len()
        )));
    }
    let am = DMatrix::from_fn(n, n, |i, k| a[i * n + k] * w[k]);
    let bm = DMatrix::from_fn(n, n, |k, j| b[k * n + j]);
    let c = am * bm;
    Ok((0..n * n).map(|idx| c[(idx / n, idx % n)]).collect())
}

pub fn weighted_matrix(values: &[Complex64], n: usize, w: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |i, j| values[i * n + j] * (w[i] * w[j]).sqrt())
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn kernel_norm(values: &[Complex64], n: usize, w: &[f64]) -> f64 {
    singular_values(&weighted_matrix(values, n, w))
        .first()
        .copied()
        .unwrap_or(0.0)
}

/// Projections for each point, with radii set by all of `points`.
pub fn projections(
    q: &PotentialGrid,
    theta: BoundaryTheta,
    points: &[SpectralPoint],
    opts: &ProjectionOptions,
) -> Result<Vec<ProjectionKernel>> {
    points
        .iter()
        .map(|p| spectral_projection(q, theta, p, points, opts))
        .collect()
}
