//! Dense kernels for complex-symmetric systems stored as packed lower triangles.
//!
//! Row `i` of a packed lower triangle occupies `[i(i+1)/2, i(i+1)/2 + i]`.

use nalgebra::ComplexField;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalars the Gelfand-Levitan solver runs on: `f64` for real data, `Complex64` otherwise.
pub trait Scalar: ComplexField<RealField = f64> + Copy {
    fn to_c64(self) -> Complex64;
    fn from_c64(z: Complex64) -> Self;
}

impl Scalar for f64 {
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z.re
    }
}

impl Scalar for Complex64 {
    fn to_c64(self) -> Complex64 {
        self
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
}

#[inline]
pub fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

pub fn packed_len(n: usize) -> usize {
    row_start(n)
}

/// Four independent partial sums so the loop can vectorize; the order is fixed.
#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut s = [T::zero(); 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        s[0] += x[0] * y[0];
        s[1] += x[1] * y[1];
        s[2] += x[2] * y[2];
        s[3] += x[3] * y[3];
    }
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        s[0] += *x * *y;
    }
    (s[0] + s[1]) + (s[2] + s[3])
}

/// `B = L D L^T` for a symmetric (not Hermitian) matrix, without pivoting.
/// Every leading block of the factors is the factorization of the matching
/// leading block of `B`.
#[derive(Debug, Clone)]
pub struct Ldlt<T: Scalar> {
    n: usize,
    /// Strict lower part of `L` in packed rows; the diagonal slot holds `D`.
    packed: Vec<T>,
}

impl<T: Scalar> Ldlt<T> {
    /// Factor the matrix whose packed lower triangle is `b` (consumed in place).
    pub fn factor(n: usize, mut b: Vec<T>) -> Result<Self> {
        if b.len() != packed_len(n) {
            return Err(Error::Dimension(format!(
                "packed matrix has {} entries, expected {}",
                b.len(),
                packed_len(n)
            )));
        }
        let mut work = vec![T::zero(); n];
        for i in 0..n {
            let ri = row_start(i);
            // work[j] = L_ij D_j
            for j in 0..i {
                let rj = row_start(j);
                let s = dot(&work[..j], &b[rj..rj + j]);
                work[j] = b[ri + j] - s;
            }
            let mut d = b[ri + i];
            for j in 0..i {
                let dj = b[row_start(j) + j];
                let lij = work[j] / dj;
                d -= work[j] * lij;
                b[ri + j] = lij;
            }
            if d.modulus() == 0.0 || !d.modulus().is_finite() {
                return Err(Error::SingularSystem { row: i });
            }
            b[ri + i] = d;
        }
        Ok(Self { n, packed: b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self, i: usize) -> T {
        self.packed[row_start(i) + i]
    }

    #[inline]
    fn l_row(&self, i: usize) -> &[T] {
        let r = row_start(i);
        &self.packed[r..r + i]
    }

    /// Solve `L^T z = e_m` within the leading `(m+1)`-block; `z[m] = 1`.
    pub fn solve_lt_unit(&self, m: usize, z: &mut [T]) {
        z[..=m].iter_mut().for_each(|v| *v = T::zero());
        z[m] = T::one();
        for k in (1..=m).rev() {
            let zk = z[k];
            if zk.modulus() == 0.0 {
                continue;
            }
            for (zr, l) in z[..k].iter_mut().zip(self.l_row(k)) {
                *zr -= *l * zk;
            }
        }
    }

    /// Columns `B_b^{-1} e_j` of the inverse of the leading block of size
    /// `b = m + 1`, for each `j` in `cols` (all `<= m`). One sweep over `L`
    /// serves every column.
    pub fn inverse_columns(&self, m: usize, cols: &[usize], out: &mut [Vec<T>]) {
        for (&j, z) in cols.iter().zip(out.iter_mut()) {
            z[..=m].iter_mut().for_each(|v| *v = T::zero());
            // L y = e_j has y zero before index j
            z[j] = T::one();
            for k in j + 1..=m {
                let row = self.l_row(k);
                let s = dot(&row[j..k], &z[j..k]);
                z[k] = -s;
            }
            for k in j..=m {
                z[k] /= self.d(k);
            }
        }
        let count = cols.len();
        for k in (1..=m).rev() {
            let row = self.l_row(k);
            for z in out[..count].iter_mut() {
                let zk = z[k];
                if zk.modulus() == 0.0 {
                    continue;
                }
                for (zr, l) in z[..k].iter_mut().zip(row) {
                    *zr -= *l * zk;
                }
            }
        }
    }

    /// Solve `B_m x = b` with `B_m` the leading `m x m` block.
    pub fn solve_leading(&self, m: usize, b: &[T]) -> Vec<T> {
        let mut x: Vec<T> = b[..m].to_vec();
        for i in 0..m {
            let s = dot(self.l_row(i), &x[..i]);
            x[i] -= s;
        }
        for (i, xi) in x.iter_mut().enumerate() {
            *xi /= self.d(i);
        }
        for k in (1..m).rev() {
            let xk = x[k];
            for (xr, l) in x[..k].iter_mut().zip(self.l_row(k)) {
                *xr -= *l * xk;
            }
        }
        x
    }

    /// Hager-Higham estimate of `||B_m^{-1}||_1` (symmetric `B`, so
    /// `B^{-H} y = conj(B^{-1} conj(y))`).
    pub fn inverse_norm1_estimate(&self, m: usize) -> f64 {
        if m == 0 {
            return 0.0;
        }
        let mut x = vec![T::from_real(1.0 / m as f64); m];
        let mut est = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve_leading(m, &x);
            est = y.iter().map(|v| v.modulus()).sum::<f64>();
            let xi: Vec<T> = y
                .iter()
                .map(|v| {
                    let a = v.modulus();
                    if a == 0.0 {
                        T::one()
                    } else {
                        *v / T::from_real(a)
                    }
                })
                .collect();
            let conj_xi: Vec<T> = xi.iter().map(|v| v.conjugate()).collect();
            let z: Vec<T> = self
                .solve_leading(m, &conj_xi)
                .into_iter()
                .map(|v| v.conjugate())
                .collect();
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.modulus()))
                .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
            let ztx: f64 = z
                .iter()
                .zip(&x)
                .map(|(a, b)| (a.conjugate() * *b).real())
                .sum();
            if zmax <= ztx || j == last_j {
                break;
            }
            last_j = j;
            x.iter_mut().for_each(|v| *v = T::zero());
            x[j] = T::one();
        }
        est
    }

    /// Estimate of the smallest singular value of `B_m` by inverse power
    /// iteration on `B_m^H B_m`.
    pub fn min_singular_estimate(&self, m: usize, iterations: usize) -> f64 {
        if m == 0 {
            return f64::INFINITY;
        }
        let mut x: Vec<T> = (0..m)
            .map(|i| T::from_real(1.0 + 0.5 * ((i as f64) * 0.7).sin()))
            .collect();
        let mut inv_norm = 0.0;
        for _ in 0..iterations {
            let norm = x.iter().map(|v| v.modulus_squared()).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= T::from_real(norm));
            let y = self.solve_leading(m, &x);
            let cy: Vec<T> = y.iter().map(|v| v.conjugate()).collect();
            let z: Vec<T> = self
                .solve_leading(m, &cy)
                .into_iter()
                .map(|v| v.conjugate())
                .collect();
            // ||B^{-1} x||^2 approximates the top eigenvalue of (B^H B)^{-1}
            inv_norm = y.iter().map(|v| v.modulus_squared()).sum::<f64>().sqrt();
            x = z;
        }
        if inv_norm == 0.0 {
            f64::INFINITY
        } else {
            1.0 / inv_norm
        }
    }
}

/// `||B_m||_1` of a symmetric matrix in packed lower storage.
pub fn packed_norm1<T: Scalar>(packed: &[T], m: usize) -> f64 {
    let mut col = vec![0.0; m];
    for i in 0..m {
        let r = row_start(i);
        for j in 0..=i {
            let a = packed[r + j].modulus();
            col[j] += a;
            if j != i {
                col[i] += a;
            }
        }
    }
    col.into_iter().fold(0.0, f64::max)
}
