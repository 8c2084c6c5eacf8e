//! Batch driver: `degensl <command> --config <json> [--out <dir>]`.
//!
//! Every run writes `report.json` with the command, a status, flags, the error
//! (if any) and the command's result. Exit codes: 0 success, 2 invalid input,
//! 3 numerical failure. Relative paths in the config resolve against the
//! config file's directory.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::green::{completeness_heuristic, green_function};
use crate::inverse::{build_aux, run_pipeline, verify_reconstruction, InverseConfig, TailMode};
use crate::io::{read_potential_csv, write_csv, write_json, write_potential_csv, Cell};
use crate::ode::{endpoints, solve_fundamental, SolverOptions};
use crate::potential::{PotentialFile, PotentialGrid, DEFAULT_POINTS};
use crate::projection::{spectral_projection, ProjectionOptions};
use crate::spectral::{
    count_zeros, degenerate_floor, find_zeros, scan, BoundaryTheta, Determinant, SearchRegion,
    SpectralOptions,
};
use crate::target::{TargetDeterminant, TargetFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Forward,
    DetScan,
    Eig,
    Inverse,
    Verify,
    Green,
    Projections,
    Diag,
}

#[derive(Debug, Parser)]
#[command(name = "degensl", version, about = "Spectral tools for Sturm-Liouville operators with degenerate boundary conditions")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PotentialSource {
    Path { path: String },
    Inline(PotentialFile),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TargetSource {
    Path { path: String },
    Inline(TargetFile),
}

/// Rectangular `mu` grid, `n_re x n_im` points, real part varying fastest.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanGrid {
    pub re_min: f64,
    pub re_max: f64,
    #[serde(default)]
    pub im_min: f64,
    #[serde(default)]
    pub im_max: f64,
    pub n_re: usize,
    #[serde(default = "one")]
    pub n_im: usize,
}

fn one() -> usize {
    1
}

impl ScanGrid {
    pub fn points(&self) -> Result<Vec<Complex64>> {
        let ok = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|v| v.is_finite());
        if !ok || self.n_re == 0 || self.n_im == 0 {
            return Err(Error::Config("scan bounds must be finite and counts positive".into()));
        }
        let step = |lo: f64, hi: f64, n: usize, k: usize| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        };
        Ok((0..self.n_im)
            .flat_map(|b| {
                (0..self.n_re).map(move |a| {
                    Complex64::new(
                        step(self.re_min, self.re_max, self.n_re, a),
                        step(self.im_min, self.im_max, self.n_im, b),
                    )
                })
            })
            .collect())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Option<PotentialSource>,
    #[serde(default = "default_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub theta: u8,
    #[serde(default = "default_determinant")]
    pub determinant: Determinant,
    /// Spectral parameters for `forward` (all) and `green` (exactly one).
    pub mu: Option<Vec<[f64; 2]>>,
    pub scan: Option<ScanGrid>,
    pub region: Option<SearchRegion>,
    pub target: Option<TargetSource>,
    #[serde(default = "default_truncation", alias = "truncation_M")]
    pub truncation_m: usize,
    #[serde(default = "default_tail_mode")]
    pub tail_mode: TailMode,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    #[serde(default = "default_cond_max")]
    pub cond_max: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// `inverse` fails when the largest residual exceeds this.
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    /// Reconstruction read by `verify` (default `<out>/q_hat.csv`).
    pub q_hat: Option<String>,
    /// `report.json` of the `inverse` run that `verify` compares against
    /// (default: next to `q_hat`, if present).
    pub reference_report: Option<String>,
    #[serde(default = "default_round_trip_tol")]
    pub round_trip_tol: f64,
    #[serde(default = "default_stride")]
    pub green_stride: usize,
    /// Number of eigenvalues (smallest `|lambda|` first) for `projections`.
    pub count: Option<usize>,
    #[serde(default)]
    pub projection: ProjectionOptions,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_heuristic_tol")]
    pub heuristic_tol: f64,
}

fn default_points() -> usize {
    DEFAULT_POINTS
}
fn default_determinant() -> Determinant {
    Determinant::Characteristic
}
fn default_truncation() -> usize {
    InverseConfig::default().truncation_m
}
fn default_tail_mode() -> TailMode {
    InverseConfig::default().tail_mode
}
fn default_tail_tol() -> f64 {
    InverseConfig::default().tail_tol
}
fn default_cond_max() -> f64 {
    InverseConfig::default().cond_max
}
fn default_n_max() -> usize {
    InverseConfig::default().n_max
}
fn default_residual_tol() -> f64 {
    1e-3
}
fn default_round_trip_tol() -> f64 {
    1e-12
}
fn default_stride() -> usize {
    8
}
fn default_epsilon() -> f64 {
    0.5
}
fn default_heuristic_tol() -> f64 {
    1e-6
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn theta(&self) -> Result<BoundaryTheta> {
        BoundaryTheta::new(self.theta)
    }

    pub fn inverse_config(&self) -> InverseConfig {
        InverseConfig {
            grid_points: self.grid_points,
            truncation_m: self.truncation_m,
            tail_mode: self.tail_mode,
            tail_tol: self.tail_tol,
            cond_max: self.cond_max,
            n_max: self.n_max,
        }
    }

    /// Command-specific required fields and positivity of tolerances.
    pub fn validate(&self, command: Command) -> Result<()> {
        self.theta()?;
        let missing = |name: &str| Err(Error::Config(format!("`{name}` is required for this command")));
        let needs_potential = !matches!(command, Command::Inverse | Command::Verify);
        if needs_potential && self.potential.is_none() {
            return missing("potential");
        }
        match command {
            Command::Forward | Command::Green if self.mu.as_ref().map_or(true, |m| m.is_empty()) => {
                return missing("mu")
            }
            Command::DetScan if self.scan.is_none() => return missing("scan"),
            Command::Eig | Command::Projections if self.region.is_none() => return missing("region"),
            Command::Inverse | Command::Verify if self.target.is_none() => return missing("target"),
            _ => {}
        }
        if command == Command::Green && self.mu.as_ref().map_or(0, |m| m.len()) != 1 {
            return Err(Error::Config("`green` takes exactly one `mu`".into()));
        }
        for (name, v) in [
            ("residual_tol", self.residual_tol),
            ("round_trip_tol", self.round_trip_tol),
            ("epsilon", self.epsilon),
            ("heuristic_tol", self.heuristic_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(r) = &self.region {
            r.validate()?;
        }
        self.projection.validate()?;
        if matches!(command, Command::Inverse | Command::Verify) {
            self.inverse_config().validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        Self {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct Envelope {
    command: Command,
    status: &'static str,
    flags: Vec<String>,
    error: Option<ErrorInfo>,
    result: Value,
}

/// Result of a command that ran to completion; `failure` marks a completed run
/// whose output misses a configured tolerance.
struct Outcome {
    result: Value,
    flags: Vec<String>,
    failure: Option<ErrorInfo>,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Self {
            result,
            flags: Vec::new(),
            failure: None,
        }
    }
}

struct Context<'a> {
    cfg: &'a RunConfig,
    base: PathBuf,
    out: &'a Path,
}

impl Context<'_> {
    fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn potential(&self) -> Result<PotentialGrid> {
        let src = self
            .cfg
            .potential
            .clone()
            .ok_or_else(|| Error::Config("`potential` is required".into()))?;
        let file = match src {
            PotentialSource::Inline(f) => f,
            PotentialSource::Path { path } => {
                let path = self.resolve(&path);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| {
                    Error::Parse(format!(
                        "{}: expected {{\"builtin\": name}} or {{\"samples\": [[x, re, im], ...]}}: {e}",
                        path.display()
                    ))
                })?
            }
        };
        file.into_grid(self.cfg.grid_points)
    }

    fn target(&self) -> Result<TargetDeterminant> {
        match self.cfg.target.clone() {
            Some(TargetSource::Inline(f)) => f.try_into(),
            Some(TargetSource::Path { path }) => TargetDeterminant::load(&self.resolve(&path)),
            None => Err(Error::Config("`target` is required".into())),
        }
    }

    fn mus(&self) -> Vec<Complex64> {
        self.cfg
            .mu
            .iter()
            .flatten()
            .map(|m| Complex64::new(m[0], m[1]))
            .collect()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Parse arguments, run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli.command, &cli.config, &cli.out),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn run(command: Command, config: &Path, out: &Path) -> i32 {
    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return EXIT_VALIDATION;
    }
    let loaded = RunConfig::load(config).and_then(|cfg| cfg.validate(command).map(|_| cfg));
    let outcome = loaded.and_then(|cfg| {
        let ctx = Context {
            cfg: &cfg,
            base: config.parent().map(Path::to_path_buf).unwrap_or_default(),
            out,
        };
        dispatch(command, &ctx)
    });
    let (envelope, code) = match outcome {
        Ok(o) => {
            let code = if o.failure.is_some() { EXIT_NUMERICAL } else { EXIT_OK };
            let status = if o.failure.is_some() { "failed" } else { "ok" };
            (
                Envelope {
                    command,
                    status,
                    flags: o.flags,
                    error: o.failure,
                    result: o.result,
                },
                code,
            )
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERICAL };
            (
                Envelope {
                    command,
                    status: "error",
                    flags: Vec::new(),
                    error: Some((&e).into()),
                    result: Value::Null,
                },
                code,
            )
        }
    };
    if let Err(e) = write_json(&out.join("report.json"), &envelope) {
        eprintln!("error: {e}");
        return EXIT_VALIDATION;
    }
    code
}

fn dispatch(command: Command, ctx: &Context) -> Result<Outcome> {
    match command {
        Command::Forward => forward(ctx),
        Command::DetScan => det_scan(ctx),
        Command::Eig => eig(ctx),
        Command::Inverse => inverse(ctx),
        Command::Verify => verify(ctx),
        Command::Green => green(ctx),
        Command::Projections => projections_cmd(ctx),
        Command::Diag => diag(ctx),
    }
}

fn c2(v: Complex64) -> [Cell; 2] {
    [v.re.into(), v.im.into()]
}

fn forward(ctx: &Context) -> Result<Outcome> {
    let q = ctx.potential()?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let mut worst = 0.0f64;
    for mu in ctx.mus() {
        let rec = solve_fundamental(&q, mu, &SolverOptions::default())?;
        let defect = rec.wronskian_defect();
        worst = worst.max(defect);
        let e = crate::ode::eval_at_pi(&rec);
        let delta = e.c - e.s_prime;
        let mut row = Vec::new();
        for v in [mu, e.c, e.c_prime, e.s, e.s_prime, delta] {
            row.extend(c2(v));
        }
        row.push(defect.into());
        rows.push(row);
        points.push(json!({
            "mu": mu, "c": e.c, "c_prime": e.c_prime, "s": e.s, "s_prime": e.s_prime,
            "delta": delta, "wronskian_defect": defect,
        }));
    }
    write_csv(
        &ctx.path("forward.csv"),
        &[
            "mu_re", "mu_im", "c_re", "c_im", "cp_re", "cp_im", "s_re", "s_im", "sp_re", "sp_im",
            "delta_re", "delta_im", "wronskian_defect",
        ],
        &rows,
    )?;
    Ok(Outcome::ok(json!({
        "grid_points": q.n_points(),
        "max_wronskian_defect": worst,
        "points": points,
    })))
}

fn det_scan(ctx: &Context) -> Result<Outcome> {
    let q = ctx.potential()?;
    let mus = ctx.cfg.scan.expect("validated").points()?;
    let vals = scan(ctx.cfg.determinant, &q, &mus, &SpectralOptions::default())?;
    let rows: Vec<Vec<Cell>> = mus
        .iter()
        .zip(&vals)
        .map(|(m, d)| [c2(*m), c2(*d)].concat())
        .collect();
    write_csv(&ctx.path("det_scan.csv"), &["mu_re", "mu_im", "delta_re", "delta_im"], &rows)?;
    let max_abs = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = degenerate_floor(&q);
    let degenerate = max_abs < floor;
    let mut out = Outcome::ok(json!({
        "determinant": ctx.cfg.determinant,
        "points": mus.len(),
        "max_abs": max_abs,
        "floor": floor,
        "degenerate": degenerate,
    }));
    if degenerate {
        out.flags.push("degenerate determinant".into());
    }
    Ok(out)
}

fn eig(ctx: &Context) -> Result<Outcome> {
    let q = ctx.potential()?;
    let theta = ctx.cfg.theta()?;
    let region = ctx.cfg.region.expect("validated");
    let det = ctx.cfg.determinant;
    let points = find_zeros(det, &q, theta, &region)?;
    let count = count_zeros(det, &q, &region, &SpectralOptions::default())?;
    write_json(&ctx.path("eigs.json"), &points)?;
    Ok(Outcome::ok(json!({
        "determinant": det,
        "theta": theta,
        "region": region,
        "winding_count": count,
        "points": points,
    })))
}

fn residual_rows(report: &crate::inverse::ReconstructionReport) -> Vec<Vec<Cell>> {
    report
        .residual_table
        .iter()
        .map(|r| {
            let mut row = vec![Cell::from(r.mu)];
            row.extend(c2(r.residual));
            row.extend(c2(r.dirichlet_residual));
            row
        })
        .collect()
}

const RESIDUAL_HEADER: [&str; 5] = ["mu", "residual_re", "residual_im", "dirichlet_re", "dirichlet_im"];

fn inverse(ctx: &Context) -> Result<Outcome> {
    let t = ctx.target()?;
    let (rec, report) = run_pipeline(&t, &ctx.cfg.inverse_config())?;
    write_potential_csv(&ctx.path("q_hat.csv"), &rec.q_hat)?;
    write_csv(&ctx.path("residuals.csv"), &RESIDUAL_HEADER, &residual_rows(&report))?;
    let mut out = Outcome::ok(serde_json::to_value(&report)?);
    if report.max_residual > ctx.cfg.residual_tol {
        out.failure = Some(ErrorInfo {
            kind: "residual-tolerance".into(),
            message: format!(
                "max residual {:.3e} exceeds residual_tol {:.3e}",
                report.max_residual, ctx.cfg.residual_tol
            ),
        });
    }
    Ok(out)
}

fn verify(ctx: &Context) -> Result<Outcome> {
    let t = ctx.target()?;
    let q_path = match &ctx.cfg.q_hat {
        Some(p) => ctx.resolve(p),
        None => ctx.path("q_hat.csv"),
    };
    let q_hat = read_potential_csv(&q_path)?;
    let mut cfg = ctx.cfg.inverse_config();
    cfg.grid_points = q_hat.n_points();
    let aux = build_aux(&t, &cfg)?;
    let report = verify_reconstruction(&t, &aux, &q_hat)?;
    write_csv(&ctx.path("residuals.csv"), &RESIDUAL_HEADER, &residual_rows(&report))?;

    let reference = match &ctx.cfg.reference_report {
        Some(p) => Some(ctx.resolve(p)),
        None => q_path
            .parent()
            .map(|d| d.join("report.json"))
            .filter(|p| p.exists() && p != &ctx.path("report.json")),
    };
    let mut out = Outcome::ok(serde_json::to_value(&report)?);
    if let Some(path) = reference {
        let diff = compare_residuals(&path, &report)?;
        out.result["round_trip"] = json!({ "reference": path.display().to_string(), "max_difference": diff });
        if diff > ctx.cfg.round_trip_tol {
            out.failure = Some(ErrorInfo {
                kind: "round-trip".into(),
                message: format!(
                    "residuals differ from the reference by {diff:.3e} > {:.3e}",
                    ctx.cfg.round_trip_tol
                ),
            });
        }
    }
    if report.max_residual > ctx.cfg.residual_tol {
        out.flags.push("residual above tolerance".into());
    }
    Ok(out)
}

/// Largest difference between our residual table and the one in a previous report.
fn compare_residuals(path: &Path, report: &crate::inverse::ReconstructionReport) -> Result<f64> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text)?;
    let table = doc["result"]["residual_table"]
        .as_array()
        .ok_or_else(|| Error::Parse(format!("{}: no result.residual_table", path.display())))?;
    if table.len() != report.residual_table.len() {
        return Err(Error::Dimension(format!(
            "reference has {} residual rows, this run {}",
            table.len(),
            report.residual_table.len()
        )));
    }
    let mut worst = 0.0f64;
    for (row, ours) in table.iter().zip(&report.residual_table) {
        let r: RefRow = serde_json::from_value(row.clone())?;
        if r.mu != ours.mu {
            return Err(Error::Dimension(format!("check point {} vs {}", r.mu, ours.mu)));
        }
        worst = worst
            .max((r.residual - ours.residual).norm())
            .max((r.dirichlet_residual - ours.dirichlet_residual).norm());
    }
    Ok(worst)
}

#[derive(Deserialize)]
struct RefRow {
    mu: f64,
    residual: Complex64,
    dirichlet_residual: Complex64,
}

fn green(ctx: &Context) -> Result<Outcome> {
    let q = ctx.potential()?;
    let theta = ctx.cfg.theta()?;
    let mu = ctx.mus()[0];
    let g = green_function(&q, theta, mu, ctx.cfg.green_stride)?;
    let n = g.n_points;
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![Cell::from(g.x(i)), Cell::from(g.x(j))];
            row.extend(c2(g.at(i, j)));
            rows.push(row);
        }
    }
    write_csv(&ctx.path("green.csv"), &["x", "xi", "g_re", "g_im"], &rows)?;
    let (bc_derivative, bc_value) = g.bc_residuals();
    let jump_error = (2..n - 2)
        .map(|j| (g.derivative_jump(j) + 1.0).norm())
        .fold(0.0, f64::max);
    Ok(Outcome::ok(json!({
        "mu": mu,
        "theta": theta,
        "n_points": n,
        "h": g.h,
        "delta": g.data.delta,
        "scale": g.scale(),
        "bc_residual_derivative": bc_derivative,
        "bc_residual_value": bc_value,
        "max_jump_error": jump_error,
    })))
}

fn projections_cmd(ctx: &Context) -> Result<Outcome> {
    let q = ctx.potential()?;
    let theta = ctx.cfg.theta()?;
    let region = ctx.cfg.region.expect("validated");
    let mut points = find_zeros(Determinant::Characteristic, &q, theta, &region)?;
    let all = points.clone();
    if let Some(k) = ctx.cfg.count {
        points.truncate(k);
    }
    let opts = ctx.cfg.projection;
    // radii come from every eigenvalue found, not only the ones projected
    let kernels = points
        .iter()
        .map(|p| spectral_projection(&q, theta, p, &all, &opts))
        .collect::<Result<Vec<_>>>()?;
    write_json(&ctx.path("eigs.json"), &points)?;
    let mut rows = Vec::new();
    let mut details = Vec::new();
    for (k, p) in kernels.iter().enumerate() {
        let norm = p.norm();
        rows.push(vec![
            Cell::from(k + 1),
            p.center.lambda.re.into(),
            p.center.lambda.im.into(),
            p.center.multiplicity.into(),
            norm.into(),
        ]);
        details.push(json!({
            "n": k + 1,
            "lambda": p.center.lambda,
            "multiplicity": p.center.multiplicity,
            "norm": norm,
            "trace": p.trace(),
            "idempotence_defect": p.idempotence_defect()?,
            "rank": p.rank(opts.rank_floor),
            "contour_radius": p.contour_radius,
            "doubling_change": p.doubling_change,
        }));
    }
    let mut max_product = 0.0f64;
    for (a, pa) in kernels.iter().enumerate() {
        for pb in kernels.iter().skip(a + 1) {
            max_product = max_product.max(pa.product_ratio(pb)?).max(pb.product_ratio(pa)?);
        }
    }
    write_csv(
        &ctx.path("proj_norms.csv"),
        &["n", "re_lambda", "im_lambda", "multiplicity", "proj_norm"],
        &rows,
    )?;
    Ok(Outcome::ok(json!({
        "theta": theta,
        "projections": details,
        "max_pairwise_product": max_product,
    })))
}

fn diag(ctx: &Context) -> Result<Outcome> {
    let q = ctx.potential()?;
    let heuristic = completeness_heuristic(&q, ctx.cfg.epsilon, ctx.cfg.heuristic_tol);
    let grid = ctx.cfg.scan.unwrap_or(ScanGrid {
        re_min: 0.0,
        re_max: 10.0,
        im_min: -1.0,
        im_max: 1.0,
        n_re: 25,
        n_im: 4,
    });
    let mus = grid.points()?;
    let mut max_abs = 0.0f64;
    for mu in &mus {
        let e = endpoints(&q, *mu, &SolverOptions::default())?;
        max_abs = max_abs.max((e.c - e.s_prime).norm());
    }
    let floor = degenerate_floor(&q);
    let mut out = Outcome::ok(json!({
        "completeness": heuristic,
        "max_abs_delta": max_abs,
        "floor": floor,
        "degenerate": max_abs < floor,
    }));
    if max_abs < floor {
        out.flags.push("degenerate determinant".into());
    }
    Ok(out)
}
