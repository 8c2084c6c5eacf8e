//! Forward checks of a reconstructed potential against its target.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::inverse::aux::AuxSpectrum;
use crate::inverse::gl::{ConditionSample, GlStats};
use crate::ode::{endpoints, SolverOptions};
use crate::potential::PotentialGrid;
use crate::spectral::{refine_zero_with, BoundaryTheta, Determinant, SpectralOptions};
use crate::target::TargetDeterminant;

/// Check points closer than this to an auxiliary node are skipped.
const NODE_EXCLUSION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRow {
    pub mu: f64,
    /// `Delta_hat(mu) - v(mu)`.
    pub residual: Complex64,
    /// `s_hat(pi, mu) - s(mu)`.
    pub dirichlet_residual: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletRow {
    pub n: usize,
    pub mu_target: f64,
    pub mu_hat: Complex64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CRow {
    pub n: usize,
    pub c_target: Complex64,
    /// `c_hat(pi, mu_n)`.
    pub c_hat: Complex64,
    pub error: f64,
    /// `|c_hat(pi) s_hat'(pi) - 1|` at the reconstructed Dirichlet zero.
    pub product_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionReport {
    pub grid_points: usize,
    pub truncation_m: usize,
    pub n_aux: usize,
    /// Smoothness index carried by the target (reported, not enforced).
    pub smoothness_m: u32,
    pub q_hat_max_abs: f64,
    pub min_re_w: f64,
    pub tail_bound: f64,
    pub max_residual: f64,
    pub max_dirichlet_residual: f64,
    pub max_dirichlet_error: f64,
    pub max_c_error: f64,
    pub residual_table: Vec<ResidualRow>,
    pub dirichlet_match: Vec<DirichletRow>,
    pub c_match: Vec<CRow>,
    pub condition_stats: Vec<ConditionSample>,
    pub homogeneous_probe: Option<f64>,
    pub min_singular_value: Option<f64>,
}

impl ReconstructionReport {
    pub fn attach_gl_stats(&mut self, gl: &GlStats, tail_bound: f64) {
        self.condition_stats = gl.condition.clone();
        self.homogeneous_probe = Some(gl.homogeneous_probe);
        self.min_singular_value = Some(gl.min_singular_value);
        self.tail_bound = tail_bound;
    }
}

/// Quarter-integer points below `M`, skipping integers and the auxiliary nodes.
pub fn check_grid(aux: &AuxSpectrum) -> Vec<f64> {
    let m = aux.len();
    (1..4 * m)
        .filter(|j| j % 4 != 0)
        .map(|j| j as f64 / 4.0)
        .filter(|mu| {
            aux.mu_seq[..aux.n_aux]
                .iter()
                .all(|node| (mu - node).abs() > NODE_EXCLUSION)
        })
        .collect()
}

pub fn verify_reconstruction(
    t: &TargetDeterminant,
    aux: &AuxSpectrum,
    q_hat: &PotentialGrid,
) -> Result<ReconstructionReport> {
    let solver = SolverOptions::default();
    let sfun = aux.s_function();
    let mut residual_table = Vec::new();
    for mu in check_grid(aux) {
        let z = Complex64::new(mu, 0.0);
        let e = endpoints(q_hat, z, &solver)?;
        residual_table.push(ResidualRow {
            mu,
            residual: (e.c - e.s_prime) - t.eval_v(z),
            dirichlet_residual: e.s - sfun.eval(z).0,
        });
    }

    let opts = SpectralOptions::default();
    let count = (aux.n_aux + 8).min(aux.len());
    let mut dirichlet_match = Vec::with_capacity(count);
    let mut c_match = Vec::with_capacity(count);
    for i in 0..count {
        let mu_n = aux.mu_seq[i];
        let p = refine_zero_with(
            Determinant::Dirichlet,
            q_hat,
            BoundaryTheta::Zero,
            Complex64::new(mu_n, 0.0),
            1e-12,
            &opts,
        )?;
        dirichlet_match.push(DirichletRow {
            n: i + 1,
            mu_target: mu_n,
            mu_hat: p.mu,
            error: (p.mu - mu_n).norm(),
        });
        let at_node = endpoints(q_hat, Complex64::new(mu_n, 0.0), &solver)?;
        let at_zero = endpoints(q_hat, p.mu, &solver)?;
        c_match.push(CRow {
            n: i + 1,
            c_target: aux.c_seq[i],
            c_hat: at_node.c,
            error: (at_node.c - aux.c_seq[i]).norm(),
            product_defect: (at_zero.c * at_zero.s_prime - 1.0).norm(),
        });
    }

    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
    Ok(ReconstructionReport {
        grid_points: q_hat.n_points(),
        truncation_m: aux.len(),
        n_aux: aux.n_aux,
        smoothness_m: t.m(),
        q_hat_max_abs: q_hat.max_abs(),
        min_re_w: aux.min_re_w(),
        tail_bound: 0.0,
        max_residual: max(&mut residual_table.iter().map(|r| r.residual.norm())),
        max_dirichlet_residual: max(
            &mut residual_table.iter().map(|r| r.dirichlet_residual.norm()),
        ),
        max_dirichlet_error: max(&mut dirichlet_match.iter().map(|r| r.error)),
        max_c_error: max(&mut c_match.iter().map(|r| r.error)),
        residual_table,
        dirichlet_match,
        c_match,
        condition_stats: Vec::new(),
        homogeneous_probe: None,
        min_singular_value: None,
    })
}
