//! Complex potentials sampled on the uniform grid `x_i = i*pi/(n-1)`.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 9;
pub const DEFAULT_POINTS: usize = 2049;

/// Names accepted by [`PotentialGrid::builtin`].
pub const BUILTIN_NAMES: [&str; 5] = ["zero", "linear", "cos2x", "asym-bump", "x-plus-i-sinx"];

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGrid {
    values: Vec<Complex64>,
}

impl PotentialGrid {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.len() < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "n_points = {} but at least {MIN_POINTS} are required",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidGrid(format!("non-finite value at index {i}")));
        }
        Ok(Self { values })
    }

    pub fn from_fn(n_points: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let h = spacing(n_points);
        Self::new((0..n_points).map(|i| f(i as f64 * h)).collect())
    }

    pub fn from_real_fn(n_points: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(n_points, |x| Complex64::new(f(x), 0.0))
    }

    pub fn zero(n_points: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n_points])
    }

    /// The named test potentials: `zero`, `linear` (q = x), `cos2x`,
    /// `asym-bump` (a Gaussian bump centred at pi/3) and `x-plus-i-sinx`.
    pub fn builtin(name: &str, n_points: usize) -> Result<Self> {
        match name {
            "zero" => Self::zero(n_points),
            "linear" => Self::from_real_fn(n_points, |x| x),
            "cos2x" => Self::from_real_fn(n_points, |x| (2.0 * x).cos()),
            "asym-bump" => Self::from_real_fn(n_points, |x| {
                2.0 * (-10.0 * (x - PI / 3.0).powi(2)).exp()
            }),
            "x-plus-i-sinx" => Self::from_fn(n_points, |x| Complex64::new(x, x.sin())),
            other => Err(Error::InvalidGrid(format!(
                "unknown built-in potential '{other}' (expected one of {})",
                BUILTIN_NAMES.join(", ")
            ))),
        }
    }

    /// Resample scattered `(x, q)` samples onto the grid by linear interpolation.
    /// Samples must cover `[0, pi]` and be strictly increasing in `x`.
    pub fn from_samples(samples: &[(f64, Complex64)], n_points: usize) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidGrid("samples: need at least 2 points".into()));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidGrid(format!(
                    "samples: x values must be strictly increasing (index {})",
                    i + 1
                )));
            }
        }
        let tol = 1e-12;
        let (x_first, x_last) = (samples[0].0, samples[samples.len() - 1].0);
        if x_first > tol || x_last < PI - tol {
            return Err(Error::InvalidGrid(format!(
                "samples: x range [{x_first}, {x_last}] does not cover [0, pi]"
            )));
        }
        let h = spacing(n_points);
        let mut seg = 0;
        let values = (0..n_points)
            .map(|i| {
                let x = (i as f64 * h).min(x_last);
                while seg + 2 < samples.len() && samples[seg + 1].0 < x {
                    seg += 1;
                }
                let (x0, q0) = samples[seg];
                let (x1, q1) = samples[seg + 1];
                let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
                q0 + (q1 - q0) * t
            })
            .collect();
        Self::new(values)
    }

    pub fn load(path: &Path, n_points: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let file: PotentialFile = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        file.into_grid(n_points)
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    pub fn h(&self) -> f64 {
        spacing(self.values.len())
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_points()).map(|i| self.x(i)).collect()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Trapezoid approximation of the L1 norm on `[0, pi]`.
    pub fn l1_norm(&self) -> f64 {
        let n = self.values.len();
        let inner: f64 = self.values[1..n - 1].iter().map(|v| v.norm()).sum();
        self.h() * (inner + 0.5 * (self.values[0].norm() + self.values[n - 1].norm()))
    }

    /// Cubic Lagrange interpolation at a fractional grid position `p` (in units of h).
    /// Uses the four nodes around `p`, shifted inward at the ends.
    pub fn interp(&self, p: f64) -> Complex64 {
        let n = self.values.len();
        let i = (p.floor().max(0.0) as usize).min(n - 2);
        let start = i.saturating_sub(1).min(n - 4);
        let t = p - start as f64;
        let w = cubic_weights(t);
        let v = &self.values[start..start + 4];
        v[0] * w[0] + v[1] * w[1] + v[2] * w[2] + v[3] * w[3]
    }

    /// Every `stride`-th sample, keeping both endpoints.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        let n = self.values.len();
        if stride == 0 || (n - 1) % stride != 0 {
            return Err(Error::InvalidGrid(format!(
                "stride {stride} does not divide {} intervals",
                n - 1
            )));
        }
        Self::new(self.values.iter().step_by(stride).copied().collect())
    }
}

/// Lagrange weights for nodes 0,1,2,3 evaluated at `t`.
pub(crate) fn cubic_weights(t: f64) -> [f64; 4] {
    let (a, b, c, d) = (t, t - 1.0, t - 2.0, t - 3.0);
    [
        -b * c * d / 6.0,
        a * c * d / 2.0,
        -a * b * d / 2.0,
        a * b * c / 6.0,
    ]
}

pub fn spacing(n_points: usize) -> f64 {
    PI / (n_points.max(2) - 1) as f64
}

/// On-disk potential description.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PotentialFile {
    Builtin { builtin: String },
    Samples { samples: Vec<[f64; 3]> },
}

impl PotentialFile {
    pub fn into_grid(self, n_points: usize) -> Result<PotentialGrid> {
        match self {
            PotentialFile::Builtin { builtin } => PotentialGrid::builtin(&builtin, n_points),
            PotentialFile::Samples { samples } => {
                let pts: Vec<(f64, Complex64)> = samples
                    .iter()
                    .map(|s| (s[0], Complex64::new(s[1], s[2])))
                    .collect();
                PotentialGrid::from_samples(&pts, n_points)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_zero_is_zero() {
        let q = PotentialGrid::builtin("zero", 33).unwrap();
        assert!(q.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn rejects_small_or_nonfinite_grids() {
        assert!(PotentialGrid::zero(8).is_err());
        let mut v = vec![Complex64::new(0.0, 0.0); 9];
        v[4] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(PotentialGrid::new(v), Err(Error::InvalidGrid(_))));
        assert!(PotentialGrid::builtin("nope", 33).is_err());
    }

    #[test]
    fn resampling_linear_samples_is_within_interpolation_bound() {
        let xs: Vec<(f64, Complex64)> = (0..9)
            .map(|i| {
                let x = i as f64 * PI / 8.0;
                (x, Complex64::new(x, 0.0))
            })
            .collect();
        let q = PotentialGrid::from_samples(&xs, 129).unwrap();
        let err = (0..129)
            .map(|i| (q.values()[i] - q.x(i)).norm())
            .fold(0.0, f64::max);
        assert!(err <= q.h() * PI, "err = {err}");
    }

    #[test]
    fn cubic_interp_exact_on_cubics() {
        let q = PotentialGrid::from_real_fn(17, |x| x * x * x - 2.0 * x + 1.0).unwrap();
        for &p in &[0.0, 0.3, 1.5, 7.25, 14.9, 15.5, 16.0] {
            let x = p * q.h();
            let exact = x * x * x - 2.0 * x + 1.0;
            assert!((q.interp(p).re - exact).abs() < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn l1_norm_of_constant() {
        let q = PotentialGrid::from_real_fn(65, |_| 2.0).unwrap();
        assert!((q.l1_norm() - 2.0 * PI).abs() < 1e-12);
    }
}
