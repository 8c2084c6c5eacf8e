//! Reconstruction of a potential whose characteristic determinant is a given target.
//!
//! Pipeline: auxiliary spectrum and weights ([`aux`]), the kernel `F`
//! ([`kernel`]), the Gelfand-Levitan solve and `q = 2 dK(x,x)/dx` ([`gl`]), and
//! forward verification ([`verify`]).

pub mod aux;
pub mod gl;
pub mod kernel;
pub mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{PotentialGrid, DEFAULT_POINTS};
use crate::target::TargetDeterminant;

pub use aux::{build_mu_sequence, choose_n, select_roots, AuxSpectrum, SFunction};
pub use gl::{extract_potential, solve_gelfand_levitan, GlOptions, GlStats};
pub use kernel::{assemble_f, FSeries, KernelSet, TailMode};
pub use verify::{verify_reconstruction, ReconstructionReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InverseConfig {
    pub grid_points: usize,
    pub truncation_m: usize,
    pub tail_mode: TailMode,
    pub tail_tol: f64,
    pub cond_max: f64,
    pub n_max: usize,
}

impl Default for InverseConfig {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_POINTS,
            truncation_m: 64,
            tail_mode: TailMode::Analytic,
            tail_tol: 1e-6,
            cond_max: 1e8,
            n_max: aux::N_MAX_DEFAULT,
        }
    }
}

impl InverseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < crate::potential::MIN_POINTS || (self.grid_points - 1) % 2 != 0 {
            return Err(Error::Config(format!(
                "grid_points must be odd and at least {}, got {}",
                crate::potential::MIN_POINTS,
                self.grid_points
            )));
        }
        if self.truncation_m == 0 {
            return Err(Error::Config("truncation_M must be positive".into()));
        }
        for (name, v) in [("tail_tol", self.tail_tol), ("cond_max", self.cond_max)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub aux: AuxSpectrum,
    pub kernels: KernelSet,
    pub q_hat: PotentialGrid,
    pub gl: GlStats,
}

/// Index of the last nonzero effective sine coefficient (0 for the zero target).
fn band_limit(t: &TargetDeterminant) -> usize {
    t.effective_coeffs()
        .filter(|(_, a)| a.norm() != 0.0)
        .map(|(k, _)| k)
        .max()
        .unwrap_or(0)
}

/// Auxiliary data for `cfg`, shared by reconstruction and re-verification.
pub fn build_aux(t: &TargetDeterminant, cfg: &InverseConfig) -> Result<AuxSpectrum> {
    cfg.validate()?;
    let k = band_limit(t);
    if cfg.truncation_m < k {
        return Err(Error::Truncation(format!(
            "truncation_M = {} is below the target's last sine index {k}",
            cfg.truncation_m
        )));
    }
    AuxSpectrum::build(t, cfg.truncation_m, cfg.n_max)
}

pub fn reconstruct(t: &TargetDeterminant, cfg: &InverseConfig) -> Result<Reconstruction> {
    let aux = build_aux(t, cfg)?;
    let mut kernels = assemble_f(
        &aux,
        cfg.grid_points,
        cfg.truncation_m,
        cfg.tail_mode,
        cfg.tail_tol,
    )?;
    let gl = solve_gelfand_levitan(
        &mut kernels,
        &GlOptions {
            cond_max: cfg.cond_max,
            ..GlOptions::default()
        },
    )?;
    let q_hat = extract_potential(&kernels)?;
    Ok(Reconstruction {
        aux,
        kernels,
        q_hat,
        gl,
    })
}

/// Reconstruct and verify.
pub fn run_pipeline(
    t: &TargetDeterminant,
    cfg: &InverseConfig,
) -> Result<(Reconstruction, ReconstructionReport)> {
    let rec = reconstruct(t, cfg)?;
    let mut report = verify_reconstruction(t, &rec.aux, &rec.q_hat)?;
    report.attach_gl_stats(&rec.gl, rec.kernels.tail_bound());
    Ok((rec, report))
}
