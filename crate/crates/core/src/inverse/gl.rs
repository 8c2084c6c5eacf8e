//! Nystrom solution of `K(x,t) + F(x,t) + int_0^x K(x,s) F(s,t) ds = 0`.
//!
//! Row `x_i` is discretized with the fourth-order Gregory rule over the
//! unknowns `K(x_i, t_1..t_i)` (`K(x, 0) = 0` because `F(., 0) = 0`). `F` has a
//! `|x - t|` kink on the diagonal; its Euler-Maclaurin term is a constant
//! diagonal shift for every equation whose kink is interior. With the left-end
//! weights folded in symmetrically, one `L D L^T` factorization of
//! `B = (1 + shift) I + h G^{1/2} F G^{1/2}` serves every row, and the
//! row-dependent right-end weights become a rank-three correction built from
//! three columns of the inverse of a leading block.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inverse::kernel::KernelSet;
use crate::linalg::{packed_len, packed_norm1, row_start, Ldlt, Scalar};
use crate::potential::PotentialGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlOptions {
    pub cond_max: f64,
    /// Number of `x` positions at which the condition number is estimated.
    pub cond_samples: usize,
}

impl Default for GlOptions {
    fn default() -> Self {
        Self {
            cond_max: 1e8,
            cond_samples: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSample {
    pub x: f64,
    pub cond: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlStats {
    pub condition: Vec<ConditionSample>,
    /// `||g||` for the discrete homogeneous system `(I + F) g = 0` on `[0, pi]`.
    pub homogeneous_probe: f64,
    /// Estimated smallest singular value of the full discrete operator.
    pub min_singular_value: f64,
}

/// Solve for `K` in place and return conditioning diagnostics.
pub fn solve_gelfand_levitan(ks: &mut KernelSet, opts: &GlOptions) -> Result<GlStats> {
    let real = ks.f_packed().iter().all(|v| v.im == 0.0);
    let (k, stats) = if real {
        solve_typed::<f64>(ks, opts)?
    } else {
        solve_typed::<Complex64>(ks, opts)?
    };
    ks.set_k(k);
    Ok(stats)
}

/// Left-end Gregory weight (relative to `h`) at node `l >= 1`.
fn left_weight(l: usize) -> f64 {
    match l {
        1 => 7.0 / 6.0,
        2 => 23.0 / 24.0,
        _ => 1.0,
    }
}

/// Weight at node `l` for the row ending at node `i`, minus [`left_weight`].
fn right_correction(l: usize, i: usize) -> f64 {
    if i == 1 {
        return 0.5 - left_weight(1);
    }
    match i - l {
        0 => -0.625,
        1 => 1.0 / 6.0,
        2 => -1.0 / 24.0,
        _ => 0.0,
    }
}

/// Gaussian elimination with partial pivoting for the `<= 3` correction system.
fn solve_small<T: Scalar>(a: &mut [[T; 3]; 3], b: &mut [T; 3], n: usize) -> Option<()> {
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| a[x][col].modulus().total_cmp(&a[y][col].modulus()))?;
        if a[p][col].modulus() == 0.0 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    for col in (0..n).rev() {
        let mut v = b[col];
        for c in col + 1..n {
            v -= a[col][c] * b[c];
        }
        b[col] = v / a[col][col];
    }
    Some(())
}

fn solve_typed<T: Scalar>(ks: &KernelSet, opts: &GlOptions) -> Result<(Vec<Complex64>, GlStats)> {
    let n = ks.n_points();
    let h = ks.h();
    let nu = n - 1;
    let shift = -ks.kink() * h * h / 12.0;
    let diag = T::from_real(1.0 + shift);
    // B index a is grid node a + 1
    let sq: Vec<f64> = (0..nu).map(|a| left_weight(a + 1).sqrt()).collect();
    let mut b: Vec<T> = Vec::with_capacity(packed_len(nu));
    for a in 0..nu {
        for c in 0..=a {
            let mut v = T::from_c64(ks.f(a + 1, c + 1)) * T::from_real(h * sq[a] * sq[c]);
            if a == c {
                v += diag;
            }
            b.push(v);
        }
    }
    // block norms must be taken before the factorization overwrites `b`
    let count = opts.cond_samples.max(1).min(nu);
    let sizes: Vec<usize> = (1..=count)
        .map(|j| (((j * nu) as f64 / count as f64).round() as usize).clamp(1, nu))
        .collect();
    let norms: Vec<f64> = sizes.iter().map(|&m| packed_norm1(&b, m)).collect();
    let fac = Ldlt::factor(nu, b)?;
    let mut condition = Vec::with_capacity(count);
    for (&m, &norm) in sizes.iter().zip(&norms) {
        let cond = norm * fac.inverse_norm1_estimate(m);
        let x = m as f64 * h;
        if !(cond <= opts.cond_max) {
            return Err(Error::IllConditioned {
                x,
                cond,
                cond_max: opts.cond_max,
            });
        }
        condition.push(ConditionSample { x, cond });
    }

    let mut k = vec![Complex64::new(0.0, 0.0); row_start(n)];
    let mut z = vec![vec![T::zero(); nu]; 3];
    let mut v = vec![T::zero(); nu];
    let inv_h = T::from_real(1.0 / h);
    for i in 1..n {
        let m = i - 1;
        let first = m.saturating_sub(2);
        let cols: Vec<usize> = (first..=m).collect();
        let nj = cols.len();
        fac.inverse_columns(m, &cols, &mut z);
        let zm = &z[nj - 1];
        let coef: Vec<T> = cols
            .iter()
            .map(|&a| T::from_real(right_correction(a + 1, i) / left_weight(a + 1)))
            .collect();
        // the end correction of equation i-1 reads F(t_{i-2}, t_{i-1}) on the
        // s > t branch of the kink
        let branch = if nj == 3 {
            T::from_real(-ks.kink() * h * h / 24.0 * sq[m - 1] / sq[m - 2])
        } else {
            T::zero()
        };
        let rhs_scale = -inv_h / T::from_real(sq[m]);
        // rhs = -(e_m - diag Z_m) / (h sq_m)
        for a in 0..=m {
            v[a] = -(diag * zm[a]) * rhs_scale;
        }
        v[m] += rhs_scale;
        let mut small = [[T::zero(); 3]; 3];
        let mut sv = [T::zero(); 3];
        for (p, &ap) in cols.iter().enumerate() {
            sv[p] = v[ap];
            for q in 0..nj {
                let delta = if p == q { T::one() } else { T::zero() };
                let mut e = delta + coef[q] * (delta - diag * z[q][ap]);
                if q == nj - 1 {
                    e -= T::from_real(shift) * zm[ap];
                }
                if q == 0 && nj == 3 {
                    e += branch * z[1][ap];
                }
                small[p][q] = e;
            }
        }
        solve_small(&mut small, &mut sv, nj).ok_or(Error::SingularSystem { row: m })?;
        // v = rhs - sum_j c_j (e_j - diag Z_j) v_j + shift Z_m v_m - branch Z_{m-1} v_{m-2}
        for (q, &aq) in cols.iter().enumerate() {
            let cv = coef[q] * sv[q];
            for a in 0..=m {
                v[a] += cv * diag * z[q][a];
            }
            v[aq] -= cv;
        }
        let sm = T::from_real(shift) * sv[nj - 1];
        let sb = branch * sv[0];
        for a in 0..=m {
            v[a] += sm * zm[a] - sb * z[1][a];
        }
        let row = row_start(i);
        for a in 0..=m {
            k[row + a + 1] = (v[a] / T::from_real(sq[a])).to_c64();
        }
    }

    let zero_rhs = vec![T::zero(); nu];
    let g = fac.solve_leading(nu, &zero_rhs);
    let homogeneous_probe = g.iter().map(|v| v.modulus_squared()).sum::<f64>().sqrt();
    let min_singular_value = fac.min_singular_estimate(nu, 30);
    Ok((
        k,
        GlStats {
            condition,
            homogeneous_probe,
            min_singular_value,
        },
    ))
}

/// `q(x) = 2 d/dx K(x, x)` by five-point fourth-order differences.
pub fn extract_potential(ks: &KernelSet) -> Result<PotentialGrid> {
    if !ks.has_k() {
        return Err(Error::Dimension("K has not been computed".into()));
    }
    let n = ks.n_points();
    let d: Vec<Complex64> = (0..n).map(|i| ks.k(i, i)).collect();
    let c = 2.0 / (12.0 * ks.h());
    let q = (0..n)
        .map(|i| {
            let s = if i == 0 {
                -25.0 * d[0] + 48.0 * d[1] - 36.0 * d[2] + 16.0 * d[3] - 3.0 * d[4]
            } else if i == 1 {
                -3.0 * d[0] - 10.0 * d[1] + 18.0 * d[2] - 6.0 * d[3] + d[4]
            } else if i == n - 2 {
                3.0 * d[n - 1] + 10.0 * d[n - 2] - 18.0 * d[n - 3] + 6.0 * d[n - 4] - d[n - 5]
            } else if i == n - 1 {
                25.0 * d[n - 1] - 48.0 * d[n - 2] + 36.0 * d[n - 3] - 16.0 * d[n - 4]
                    + 3.0 * d[n - 5]
            } else {
                d[i - 2] - 8.0 * d[i - 1] + 8.0 * d[i + 1] - d[i + 2]
            };
            s * c
        })
        .collect();
    PotentialGrid::new(q)
}
