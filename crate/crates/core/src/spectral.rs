//! Characteristic determinants and complex eigenvalue localization.
//!
//! For the degenerate conditions `u(0) - sigma u(pi) = 0`, `u'(0) + sigma u'(pi) = 0`
//! with `sigma = (-1)^theta`, the characteristic function reduces to
//! `Delta(mu) = c(pi, mu) - s'(pi, mu)` for both values of `theta`. The Dirichlet
//! problem has characteristic function `s(pi, mu)`.
//!
//! Zeros are counted by the argument principle: the phase of the determinant is
//! tracked along the boundary of a rectangle, bisecting any boundary segment
//! over which it turns by more than `pi/4`. Rectangles are bisected until each
//! holds a single zero, which is then polished by Newton's method.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{endpoints, endpoints_richardson, Endpoints, SolverOptions};
use crate::potential::PotentialGrid;

const MAX_PHASE_STEP: f64 = PI / 4.0;
/// Newton stops once a step is below this fraction of `refine_tol * max(1, |mu|)`.
const NEWTON_STEP_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum BoundaryTheta {
    Zero,
    One,
}

impl BoundaryTheta {
    pub fn new(theta: u8) -> Result<Self> {
        match theta {
            0 => Ok(BoundaryTheta::Zero),
            1 => Ok(BoundaryTheta::One),
            t => Err(Error::Config(format!("theta must be 0 or 1, got {t}"))),
        }
    }

    pub fn value(self) -> u8 {
        match self {
            BoundaryTheta::Zero => 0,
            BoundaryTheta::One => 1,
        }
    }

    /// `(-1)^theta`.
    pub fn sigma(self) -> f64 {
        match self {
            BoundaryTheta::Zero => 1.0,
            BoundaryTheta::One => -1.0,
        }
    }
}

impl TryFrom<u8> for BoundaryTheta {
    type Error = Error;
    fn try_from(t: u8) -> Result<Self> {
        Self::new(t)
    }
}

impl From<BoundaryTheta> for u8 {
    fn from(t: BoundaryTheta) -> u8 {
        t.value()
    }
}

/// Which entire function's zeros are sought.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Determinant {
    /// `Delta(mu) = c(pi, mu) - s'(pi, mu)`.
    #[serde(alias = "delta")]
    Characteristic,
    /// `s(pi, mu)`.
    Dirichlet,
}

impl Determinant {
    fn from_endpoints(self, e: &Endpoints) -> Complex64 {
        match self {
            Determinant::Characteristic => e.c - e.s_prime,
            Determinant::Dirichlet => e.s,
        }
    }
}

/// A zero of a determinant, represented by `mu` with `Re mu >= 0`
/// (and `Im mu >= 0` on the imaginary axis). `multiplicity` counts in `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub mu: Complex64,
    pub lambda: Complex64,
    pub multiplicity: u32,
}

impl SpectralPoint {
    /// Canonical representative of a `mu`-plane zero of multiplicity `mu_mult`.
    /// At `mu = 0` the determinant is even, so a `mu`-zero of order `2m` is a
    /// `lambda`-zero of order `m`.
    pub fn from_mu(mu: Complex64, mu_mult: u32, zero_tol: f64) -> Self {
        let mut mu = if mu.re < 0.0 || (mu.re == 0.0 && mu.im < 0.0) {
            -mu
        } else {
            mu
        };
        let multiplicity = if mu.norm() <= zero_tol {
            mu = Complex64::new(0.0, 0.0);
            (mu_mult / 2).max(1)
        } else {
            mu_mult.max(1)
        };
        Self {
            mu,
            lambda: mu * mu,
            multiplicity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    #[serde(default = "default_refine_tol")]
    pub refine_tol: f64,
}

pub fn default_refine_tol() -> f64 {
    1e-9
}

impl SearchRegion {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let r = Self {
            re_min,
            re_max,
            im_min,
            im_max,
            refine_tol: default_refine_tol(),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn with_refine_tol(mut self, tol: f64) -> Result<Self> {
        self.refine_tol = tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.re_min, self.re_max, self.im_min, self.im_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRegion("bounds must be finite".into()));
        }
        if !(self.re_min < self.re_max && self.im_min < self.im_max) {
            return Err(Error::InvalidRegion(format!(
                "need re_min < re_max and im_min < im_max, got [{}, {}] x [{}, {}]",
                self.re_min, self.re_max, self.im_min, self.im_max
            )));
        }
        if !(self.refine_tol > 0.0 && self.refine_tol.is_finite()) {
            return Err(Error::InvalidRegion(format!(
                "refine_tol must be positive, got {}",
                self.refine_tol
            )));
        }
        Ok(())
    }

    pub fn contains(&self, mu: Complex64, slack: f64) -> bool {
        mu.re >= self.re_min - slack
            && mu.re <= self.re_max + slack
            && mu.im >= self.im_min - slack
            && mu.im <= self.im_max + slack
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    /// Split the longer side at `fraction` of its length.
    fn split(&self, fraction: f64) -> (Self, Self) {
        let (mut a, mut b) = (*self, *self);
        if self.width() >= self.height() {
            let cut = self.re_min + fraction * self.width();
            a.re_max = cut;
            b.re_min = cut;
        } else {
            let cut = self.im_min + fraction * self.height();
            a.im_max = cut;
            b.im_min = cut;
        }
        (a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub solver: SolverOptions,
    /// Use the `h`/`2h` extrapolated endpoint values.
    pub extrapolate: bool,
    /// `None` selects `1e-10 * (1 + ||q||_1)`.
    pub degenerate_floor: Option<f64>,
    pub max_newton_iter: usize,
    /// Initial spacing of boundary samples before adaptive refinement.
    pub boundary_spacing: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            extrapolate: false,
            degenerate_floor: None,
            max_newton_iter: 60,
            boundary_spacing: 0.05,
        }
    }
}

impl SpectralOptions {
    pub fn floor_for(&self, q: &PotentialGrid) -> f64 {
        self.degenerate_floor.unwrap_or_else(|| degenerate_floor(q))
    }
}

pub fn degenerate_floor(q: &PotentialGrid) -> f64 {
    1e-10 * (1.0 + q.l1_norm())
}

/// `Delta(mu) = c(pi, mu) - s'(pi, mu)`. `theta` does not enter the determinant.
pub fn char_det(q: &PotentialGrid, _theta: BoundaryTheta, mu: Complex64) -> Result<Complex64> {
    evaluate(Determinant::Characteristic, q, mu, &SpectralOptions::default())
}

/// `s(pi, mu)`.
pub fn dirichlet_det(q: &PotentialGrid, mu: Complex64) -> Result<Complex64> {
    evaluate(Determinant::Dirichlet, q, mu, &SpectralOptions::default())
}

pub fn evaluate(
    det: Determinant,
    q: &PotentialGrid,
    mu: Complex64,
    opts: &SpectralOptions,
) -> Result<Complex64> {
    let e = if opts.extrapolate {
        endpoints_richardson(q, mu, &opts.solver)?.extrapolated
    } else {
        endpoints(q, mu, &opts.solver)?
    };
    Ok(det.from_endpoints(&e))
}

/// Determinant values at each `mu`, in order.
pub fn scan(
    det: Determinant,
    q: &PotentialGrid,
    mus: &[Complex64],
    opts: &SpectralOptions,
) -> Result<Vec<Complex64>> {
    mus.iter().map(|&mu| evaluate(det, q, mu, opts)).collect()
}

/// Winding number of `f` around the closed polygon through `vertices`.
///
/// Each edge is first sampled with spacing at most `spacing`; any segment across
/// which the phase of `f` turns by `pi/4` or more is bisected. A segment shorter
/// than `min_len` that still needs refinement, or an exact zero on the contour,
/// yields `BoundaryTooClose`. If `max |f|` over the initial samples is below
/// `floor`, the function is declared identically zero.
pub fn winding_number(
    f: &mut impl FnMut(Complex64) -> Result<Complex64>,
    vertices: &[Complex64],
    spacing: f64,
    min_len: f64,
    floor: f64,
) -> Result<i64> {
    let nv = vertices.len();
    let mut points = Vec::new();
    for i in 0..nv {
        let (a, b) = (vertices[i], vertices[(i + 1) % nv]);
        let pieces = ((b - a).norm() / spacing).ceil().max(1.0) as usize;
        for j in 0..pieces {
            points.push(a + (b - a) * (j as f64 / pieces as f64));
        }
    }
    let values = points.iter().map(|&z| f(z)).collect::<Result<Vec<_>>>()?;
    let max_abs = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max_abs < floor || max_abs == 0.0 {
        return Err(Error::DegenerateDeterminant { max_abs, floor });
    }
    let mut total = 0.0;
    let np = points.len();
    for i in 0..np {
        let j = (i + 1) % np;
        total += segment_phase(f, points[i], points[j], values[i], values[j], min_len)?;
    }
    let turns = total / (2.0 * PI);
    Ok(turns.round() as i64)
}

fn segment_phase(
    f: &mut impl FnMut(Complex64) -> Result<Complex64>,
    a: Complex64,
    b: Complex64,
    fa: Complex64,
    fb: Complex64,
    min_len: f64,
) -> Result<f64> {
    let mut stack = vec![(a, b, fa, fb)];
    let mut total = 0.0;
    while let Some((a, b, fa, fb)) = stack.pop() {
        if fa.norm() == 0.0 {
            return Err(Error::BoundaryTooClose { near: a });
        }
        if fb.norm() == 0.0 {
            return Err(Error::BoundaryTooClose { near: b });
        }
        let d = (fb / fa).arg();
        if d.abs() < MAX_PHASE_STEP {
            total += d;
            continue;
        }
        if (b - a).norm() < min_len {
            return Err(Error::BoundaryTooClose { near: 0.5 * (a + b) });
        }
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        // second half pushed first so the first half is processed first
        stack.push((m, b, fm, fb));
        stack.push((a, m, fa, fm));
    }
    Ok(total)
}

/// Zero count from trapezoid quadrature of `f'/f` along the rectangle boundary,
/// with `f'` by central differences. Independent of the phase-tracking count;
/// reliable only when no zero is near the boundary.
pub fn winding_log_derivative(
    f: &mut impl FnMut(Complex64) -> Result<Complex64>,
    region: &SearchRegion,
    points_per_edge: usize,
) -> Result<f64> {
    let corners = region.corners();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        let (a, b) = (corners[i], corners[(i + 1) % 4]);
        let dz = (b - a) / points_per_edge as f64;
        for j in 0..=points_per_edge {
            let w = if j == 0 || j == points_per_edge { 0.5 } else { 1.0 };
            let z = a + dz * j as f64;
            let step = 1e-5 * (1.0 + z.norm());
            let fp = (f(z + step)? - f(z - step)?) / (2.0 * step);
            acc += fp / f(z)? * dz * w;
        }
    }
    Ok((acc / Complex64::new(0.0, 2.0 * PI)).re)
}

fn rectangle_winding(
    f: &mut impl FnMut(Complex64) -> Result<Complex64>,
    region: &SearchRegion,
    opts: &SpectralOptions,
    floor: f64,
) -> Result<i64> {
    winding_number(
        f,
        &region.corners(),
        opts.boundary_spacing,
        region.refine_tol,
        floor,
    )
}

/// Winding number of the determinant around the region boundary.
pub fn count_zeros(
    det: Determinant,
    q: &PotentialGrid,
    region: &SearchRegion,
    opts: &SpectralOptions,
) -> Result<i64> {
    region.validate()?;
    let mut f = |mu| evaluate(det, q, mu, opts);
    rectangle_winding(&mut f, region, opts, opts.floor_for(q))
}

/// Newton iteration on `mu` with central-difference derivative and the
/// multiplicity-corrected step `m f / f'`.
fn newton(
    f: &mut impl FnMut(Complex64) -> Result<Complex64>,
    seed: Complex64,
    mult: u32,
    refine_tol: f64,
    max_iter: usize,
) -> Result<Complex64> {
    let mut z = seed;
    let mut last_abs = f64::INFINITY;
    for _ in 0..max_iter {
        let fz = f(z)?;
        last_abs = fz.norm();
        if last_abs == 0.0 {
            return Ok(z);
        }
        let d = 1e-5 * (1.0 + z.norm());
        let fp = (f(z + d)? - f(z - d)?) / (2.0 * d);
        if fp.norm() == 0.0 || !fp.re.is_finite() || !fp.im.is_finite() {
            break;
        }
        let step = fz / fp * mult as f64;
        z -= step;
        if !(z.re.is_finite() && z.im.is_finite()) {
            break;
        }
        if step.norm() <= NEWTON_STEP_FRACTION * refine_tol * z.norm().max(1.0) {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence {
        last: z,
        iterations: max_iter,
        residual: last_abs,
    })
}

fn multiplicity_on_circle(
    f: &mut impl FnMut(Complex64) -> Result<Complex64>,
    center: Complex64,
    radius: f64,
) -> Result<i64> {
    let vertices: Vec<Complex64> = (0..16)
        .map(|j| center + Complex64::from_polar(radius, 2.0 * PI * j as f64 / 16.0))
        .collect();
    winding_number(f, &vertices, f64::INFINITY, radius * 1e-3, 0.0)
}

/// Newton polish from `seed` with the default tolerance `1e-9`.
pub fn refine_zero(
    det: Determinant,
    q: &PotentialGrid,
    theta: BoundaryTheta,
    seed: Complex64,
) -> Result<SpectralPoint> {
    refine_zero_with(det, q, theta, seed, default_refine_tol(), &SpectralOptions::default())
}

/// Newton polish from `seed`; the multiplicity is the winding number on a circle
/// of radius `10 * refine_tol * max(1, |mu|)` around the converged point.
pub fn refine_zero_with(
    det: Determinant,
    q: &PotentialGrid,
    _theta: BoundaryTheta,
    seed: Complex64,
    refine_tol: f64,
    opts: &SpectralOptions,
) -> Result<SpectralPoint> {
    let mut f = |mu| evaluate(det, q, mu, opts);
    let mut z = newton(&mut f, seed, 1, refine_tol, opts.max_newton_iter)?;
    let radius = 10.0 * refine_tol * z.norm().max(1.0);
    let mut mult = multiplicity_on_circle(&mut f, z, radius)?;
    if mult > 1 {
        // Plain Newton converges only linearly to a multiple zero; repolish.
        z = newton(&mut f, z, mult as u32, refine_tol, opts.max_newton_iter)?;
        mult = multiplicity_on_circle(&mut f, z, radius)?;
    }
    if mult < 1 {
        return Err(Error::NoConvergence {
            last: z,
            iterations: opts.max_newton_iter,
            residual: f(z)?.norm(),
        });
    }
    Ok(SpectralPoint::from_mu(z, mult as u32, radius))
}

/// All zeros in `region`, with default options.
pub fn find_zeros(
    det: Determinant,
    q: &PotentialGrid,
    theta: BoundaryTheta,
    region: &SearchRegion,
) -> Result<Vec<SpectralPoint>> {
    find_zeros_with(det, q, theta, region, &SpectralOptions::default())
}

/// `mu`-plane zeros inside `region` with their `mu`-multiplicities, in the order found.
pub fn locate_zeros(
    det: Determinant,
    q: &PotentialGrid,
    region: &SearchRegion,
    opts: &SpectralOptions,
) -> Result<Vec<(Complex64, u32)>> {
    region.validate()?;
    let floor = opts.floor_for(q);
    let tol = region.refine_tol;
    let cluster = (1e3 * tol).max(1e-6);
    let mut f = |mu| evaluate(det, q, mu, opts);
    let total = rectangle_winding(&mut f, region, opts, floor)?;
    let mut found = Vec::new();
    let mut work = vec![(*region, total)];
    while let Some((bx, w)) = work.pop() {
        if w == 0 {
            continue;
        }
        if w < 0 {
            return Err(Error::Enclosure {
                count: w,
                expected: 0,
            });
        }
        let diameter = bx.width().hypot(bx.height());
        if diameter <= cluster {
            let z = newton(&mut f, bx.center(), w as u32, tol, opts.max_newton_iter)
                .unwrap_or_else(|_| bx.center());
            found.push((z, w as u32));
            continue;
        }
        if w == 1 {
            if let Ok(z) = newton(&mut f, bx.center(), 1, tol, opts.max_newton_iter) {
                if bx.contains(z, tol) {
                    found.push((z, 1));
                    continue;
                }
            }
        }
        let mut split = None;
        let mut last_err = None;
        for fraction in [0.5, 0.47, 0.53, 0.44, 0.56, 0.41, 0.59] {
            let (a, b) = bx.split(fraction);
            let wa = rectangle_winding(&mut f, &a, opts, 0.0);
            let wb = rectangle_winding(&mut f, &b, opts, 0.0);
            match (wa, wb) {
                (Ok(wa), Ok(wb)) => {
                    split = Some((a, wa, b, wb));
                    break;
                }
                (Err(e @ Error::BoundaryTooClose { .. }), _)
                | (_, Err(e @ Error::BoundaryTooClose { .. })) => last_err = Some(e),
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
        let (a, wa, b, wb) = match split {
            Some(s) => s,
            None => return Err(last_err.expect("at least one split attempted")),
        };
        if wa + wb != w {
            return Err(Error::Enclosure {
                count: wa + wb,
                expected: w,
            });
        }
        work.push((b, wb));
        work.push((a, wa));
    }
    Ok(found)
}

/// All zeros in `region` as canonical spectral points, sorted by `|lambda|`
/// then `arg lambda`. Zeros at `mu` and `-mu` (same `lambda`) are reported once.
pub fn find_zeros_with(
    det: Determinant,
    q: &PotentialGrid,
    _theta: BoundaryTheta,
    region: &SearchRegion,
    opts: &SpectralOptions,
) -> Result<Vec<SpectralPoint>> {
    let tol = region.refine_tol;
    let zero_tol = (1e3 * tol).max(1e-6);
    let raw = locate_zeros(det, q, region, opts)?;
    let mut points: Vec<SpectralPoint> = Vec::new();
    for (mu, m) in raw {
        let p = SpectralPoint::from_mu(mu, m, zero_tol);
        let dup = points
            .iter()
            .any(|o| (o.mu - p.mu).norm() <= zero_tol * p.mu.norm().max(1.0));
        if !dup {
            points.push(p);
        }
    }
    points.sort_by(|a, b| {
        a.lambda
            .norm()
            .total_cmp(&b.lambda.norm())
            .then(a.lambda.arg().total_cmp(&b.lambda.arg()))
    });
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_potential_determinants() {
        let q = PotentialGrid::zero(1025).unwrap();
        for mu in [c64(0.3, 0.0), c64(2.5, 1.0), c64(7.0, -0.5)] {
            assert!(char_det(&q, BoundaryTheta::Zero, mu).unwrap().norm() < 1e-12);
        }
        assert!(dirichlet_det(&q, c64(3.0, 0.0)).unwrap().norm() < 1e-10);
        assert!((dirichlet_det(&q, c64(0.5, 0.0)).unwrap() - 2.0).norm() < 1e-10);
    }

    #[test]
    fn symmetric_potential_annihilates_delta() {
        let q = PotentialGrid::builtin("cos2x", 2049).unwrap();
        for mu in [c64(0.7, 0.0), c64(1.3, 0.4)] {
            assert!(char_det(&q, BoundaryTheta::One, mu).unwrap().norm() <= 1e-7);
        }
    }

    #[test]
    fn linear_potential_delta_resolution_independent() {
        let opts = SpectralOptions::default();
        let a = PotentialGrid::builtin("linear", 2049).unwrap();
        let b = PotentialGrid::builtin("linear", 4097).unwrap();
        let da = evaluate(Determinant::Characteristic, &a, c64(1.0, 0.0), &opts).unwrap();
        let db = evaluate(Determinant::Characteristic, &b, c64(1.0, 0.0), &opts).unwrap();
        assert!(da.norm() > 1e-3);
        assert!((da - db).norm() < 1e-8, "{da} vs {db}");
    }

    #[test]
    fn dirichlet_first_zero_for_linear_potential() {
        let q = PotentialGrid::builtin("linear", 2049).unwrap();
        let s = |x: f64| dirichlet_det(&q, c64(x, 0.0)).unwrap().re;
        // bracket by sign change along the real axis, then bisect
        let mut lo = 0.5;
        while s(lo) * s(lo + 0.05) > 0.0 {
            lo += 0.05;
        }
        let (mut a, mut b) = (lo, lo + 0.05);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if s(a) * s(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        let guess = (1.0 + PI / 2.0).sqrt();
        assert!((a - guess).abs() < 0.05, "{a} vs {guess}");
        let p = refine_zero(Determinant::Dirichlet, &q, BoundaryTheta::Zero, c64(guess, 0.0))
            .unwrap();
        assert!((p.mu - a).norm() < 1e-9);
        assert_eq!(p.multiplicity, 1);
    }

    #[test]
    fn dirichlet_zeros_of_free_problem() {
        let q = PotentialGrid::zero(1025).unwrap();
        let region = SearchRegion::new(0.5, 4.5, -1.0, 1.0).unwrap();
        let opts = SpectralOptions::default();
        assert_eq!(
            count_zeros(Determinant::Dirichlet, &q, &region, &opts).unwrap(),
            4
        );
        let z = find_zeros(Determinant::Dirichlet, &q, BoundaryTheta::Zero, &region).unwrap();
        assert_eq!(z.len(), 4);
        for (i, p) in z.iter().enumerate() {
            assert!((p.mu - (i + 1) as f64).norm() < 1e-9, "{:?}", p);
            assert_eq!(p.multiplicity, 1);
            assert_eq!(p.lambda, p.mu * p.mu);
        }
    }

    #[test]
    fn refine_zero_free_dirichlet_seeds() {
        let q = PotentialGrid::zero(1025).unwrap();
        let p = refine_zero(Determinant::Dirichlet, &q, BoundaryTheta::Zero, c64(2.2, 0.0))
            .unwrap();
        assert!((p.mu - 2.0).norm() < 1e-10);
        let p = refine_zero(Determinant::Dirichlet, &q, BoundaryTheta::Zero, c64(0.6, 0.3))
            .unwrap();
        assert!((p.mu - 1.0).norm() < 1e-9);
    }

    #[test]
    fn degenerate_determinant_is_reported() {
        let region = SearchRegion::new(0.5, 4.5, -1.0, 1.0).unwrap();
        for name in ["zero", "cos2x"] {
            let q = PotentialGrid::builtin(name, 1025).unwrap();
            let err = find_zeros(Determinant::Characteristic, &q, BoundaryTheta::Zero, &region)
                .unwrap_err();
            assert!(
                matches!(err, Error::DegenerateDeterminant { .. }),
                "{name}: {err:?}"
            );
        }
    }

    #[test]
    fn zero_on_boundary_is_reported() {
        let q = PotentialGrid::zero(513).unwrap();
        let region = SearchRegion::new(0.5, 2.0, -1.0, 1.0).unwrap();
        let err = count_zeros(Determinant::Dirichlet, &q, &region, &SpectralOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::BoundaryTooClose { .. }), "{err:?}");
    }

    #[test]
    fn invalid_regions_rejected() {
        assert!(SearchRegion::new(1.0, 0.0, -1.0, 1.0).is_err());
        assert!(SearchRegion::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(SearchRegion::new(0.0, f64::NAN, -1.0, 1.0).is_err());
        let r = SearchRegion::new(0.0, 1.0, -1.0, 1.0).unwrap();
        assert!(r.with_refine_tol(0.0).is_err());
        assert!(BoundaryTheta::new(2).is_err());
    }

    #[test]
    fn evenness_of_both_determinants() {
        let q = PotentialGrid::builtin("x-plus-i-sinx", 1025).unwrap();
        let opts = SpectralOptions::default();
        for mu in [c64(0.4, 0.1), c64(3.3, -0.8), c64(9.1, 1.7)] {
            for det in [Determinant::Characteristic, Determinant::Dirichlet] {
                let a = evaluate(det, &q, mu, &opts).unwrap();
                let b = evaluate(det, &q, -mu, &opts).unwrap();
                assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn phase_winding_agrees_with_log_derivative_quadrature() {
        let q = PotentialGrid::builtin("asym-bump", 513).unwrap();
        let opts = SpectralOptions::default();
        let region = SearchRegion::new(0.25, 6.25, -1.7, 1.3).unwrap();
        let mut f = |mu| evaluate(Determinant::Characteristic, &q, mu, &opts);
        let n = count_zeros(Determinant::Characteristic, &q, &region, &opts).unwrap();
        let quad = winding_log_derivative(&mut f, &region, 2000).unwrap();
        assert!((quad - n as f64).abs() < 0.25, "{quad} vs {n}");
        assert!(n > 0);
    }

    #[test]
    fn partition_counts_add_up() {
        let q = PotentialGrid::builtin("x-plus-i-sinx", 513).unwrap();
        let opts = SpectralOptions::default();
        let det = Determinant::Characteristic;
        let region = SearchRegion::new(0.3, 7.3, -2.1, 1.9).unwrap();
        let total = count_zeros(det, &q, &region, &opts).unwrap();
        let mut sum = 0;
        for (a, b) in [(0.3, 2.9), (2.9, 5.1), (5.1, 7.3)] {
            for (c, d) in [(-2.1, -0.05), (-0.05, 1.9)] {
                sum += count_zeros(det, &q, &SearchRegion::new(a, b, c, d).unwrap(), &opts)
                    .unwrap();
            }
        }
        assert_eq!(sum, total);
        let pts = find_zeros_with(det, &q, BoundaryTheta::Zero, &region, &opts).unwrap();
        let m: u32 = pts.iter().map(|p| p.multiplicity).sum();
        assert_eq!(m as i64, total);
    }

    #[test]
    fn linear_potential_zeros_match_newton_from_many_seeds() {
        let q = PotentialGrid::builtin("linear", 1025).unwrap();
        let opts = SpectralOptions::default();
        let det = Determinant::Characteristic;
        let region = SearchRegion::new(0.0, 6.0, -2.0, 2.0).unwrap();
        let raw = locate_zeros(det, &q, &region, &opts).unwrap();
        assert!(!raw.is_empty());
        let mut f = |mu| evaluate(det, &q, mu, &opts);
        // 64 seeds on an 8 x 8 lattice inside the region
        let mut seeded = Vec::new();
        for i in 0..8 {
            for j in 0..8 {
                let seed = c64(0.375 + 0.75 * i as f64, -1.75 + 0.5 * j as f64);
                if let Ok(z) = newton(&mut f, seed, 1, 1e-10, 80) {
                    if region.contains(z, 0.0) {
                        seeded.push(z);
                    }
                }
            }
        }
        for (z, _) in &raw {
            let best = seeded
                .iter()
                .map(|s| (s - z).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-7, "zero {z} not reproduced by seeded Newton ({best})");
        }
        for s in &seeded {
            let best = raw
                .iter()
                .map(|(z, _)| (s - z).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-7, "seeded zero {s} missed by the search");
        }
        for (z, _) in &raw {
            let p = refine_zero(det, &q, BoundaryTheta::Zero, *z).unwrap();
            let zc = SpectralPoint::from_mu(*z, 1, 1e-6).mu;
            assert!((p.mu - zc).norm() < 1e-8);
        }
    }

    #[test]
    fn dirichlet_zeros_approach_integers() {
        let q = PotentialGrid::builtin("linear", 2049).unwrap();
        let zeros: Vec<f64> = (1..=20)
            .map(|n| {
                let seed = ((n * n) as f64 + PI / 2.0).sqrt();
                let p = refine_zero(Determinant::Dirichlet, &q, BoundaryTheta::Zero, c64(seed, 0.0))
                    .unwrap();
                assert!(p.mu.im.abs() < 1e-8);
                p.mu.re
            })
            .collect();
        let c = (15..=20)
            .map(|n| n as f64 * (zeros[n - 1] - n as f64).abs())
            .fold(0.0, f64::max);
        for n in 1..=20 {
            let dev = (zeros[n - 1] - n as f64).abs();
            assert!(dev <= 1.25 * c / n as f64, "n = {n}: {dev} vs C = {c}");
        }
    }

    #[test]
    fn paley_wiener_growth_on_a_vertical_line() {
        let q = PotentialGrid::builtin("linear", 1025).unwrap();
        let opts = SpectralOptions::default();
        let bound = |im: f64| {
            (0..40)
                .map(|j| {
                    let mu = c64(0.5 + 0.25 * j as f64, im);
                    (mu * evaluate(Determinant::Characteristic, &q, mu, &opts).unwrap()).norm()
                })
                .fold(0.0, f64::max)
        };
        let base = bound(0.0).max(1e-3);
        for im in [0.5, 1.0, 2.0, 3.0] {
            assert!(bound(im) <= 4.0 * base * (PI * im).exp());
        }
    }

    #[test]
    fn canonical_points() {
        let p = SpectralPoint::from_mu(c64(-2.0, 0.5), 1, 1e-6);
        assert_eq!(p.mu, c64(2.0, -0.5));
        let p = SpectralPoint::from_mu(c64(0.0, -1.0), 1, 1e-6);
        assert_eq!(p.mu, c64(0.0, 1.0));
        let p = SpectralPoint::from_mu(c64(1e-9, 0.0), 2, 1e-6);
        assert_eq!(p.multiplicity, 1);
        assert_eq!(p.lambda, c64(0.0, 0.0));
    }
}
