//! End-to-end acceptance checks; prints one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use degensl::green::{leading_term_defect, phi_bracket_form, green_function, GreenData};
use degensl::inverse::{run_pipeline, InverseConfig};
use degensl::ode::{endpoints, solve_fundamental, SolverOptions};
use degensl::potential::PotentialGrid;
use degensl::projection::{spectral_projection, ProjectionOptions};
use degensl::spectral::{
    count_zeros, degenerate_floor, find_zeros, BoundaryTheta, Determinant, SearchRegion, SpectralOptions,
};
use degensl::target::TargetDeterminant;

type Outcome = Result<String, String>;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn delta(q: &PotentialGrid, mu: Complex64) -> Complex64 {
    let e = endpoints(q, mu, &SolverOptions::default()).unwrap();
    e.c - e.s_prime
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    if t.elapsed() <= limit {
        Ok(())
    } else {
        Err(format!("took {:.1?}, limit {limit:?}", t.elapsed()))
    }
}

fn wronskian() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for name in ["zero", "linear", "cos2x", "asym-bump", "x-plus-i-sinx"] {
        let q = PotentialGrid::builtin(name, 2049).unwrap();
        for k in 0..20 {
            let mu = c64(-19.0 + 2.0 * k as f64, 2.0 * (k as f64).sin());
            let rec = solve_fundamental(&q, mu, &SolverOptions::default()).map_err(|e| e.to_string())?;
            worst = worst.max(rec.wronskian_defect());
        }
    }
    within(t, Duration::from_secs(10))?;
    check(worst <= 1e-8, format!("max |cs' - c's - 1| = {worst:.2e}"))
}

fn degeneracy() -> Outcome {
    let t = Instant::now();
    let grid: Vec<Complex64> = (0..10)
        .flat_map(|a| (0..10).map(move |b| c64(a as f64 + 0.5, -1.0 + 2.0 * b as f64 / 9.0)))
        .collect();
    let max_on = |name: &str| {
        let q = PotentialGrid::builtin(name, 2049).unwrap();
        let m = grid.iter().map(|mu| delta(&q, *mu).norm()).fold(0.0, f64::max);
        (m, m < degenerate_floor(&q))
    };
    let (z, zf) = max_on("zero");
    let (c, cf) = max_on("cos2x");
    let (l, lf) = max_on("linear");
    within(t, Duration::from_secs(10))?;
    check(
        z <= 1e-7 && c <= 1e-7 && zf && cf && l > 1e-2 && !lf,
        format!("max|Delta|: zero {z:.1e}, cos2x {c:.1e} (flagged {zf}/{cf}), linear {l:.2e}"),
    )
}

fn dirichlet_free() -> Outcome {
    let t = Instant::now();
    let q = PotentialGrid::zero(2049).unwrap();
    let region = SearchRegion::new(0.5, 10.5, -1.0, 1.0).unwrap();
    let pts = find_zeros(Determinant::Dirichlet, &q, BoundaryTheta::Zero, &region).map_err(|e| e.to_string())?;
    let count = count_zeros(Determinant::Dirichlet, &q, &region, &SpectralOptions::default())
        .map_err(|e| e.to_string())?;
    let err = pts
        .iter()
        .enumerate()
        .map(|(k, p)| (p.mu - (k + 1) as f64).norm())
        .fold(0.0, f64::max);
    let simple = pts.iter().all(|p| p.multiplicity == 1);
    within(t, Duration::from_secs(30))?;
    check(
        pts.len() == 10 && count == 10 && simple && err <= 1e-7,
        format!("{} zeros, winding {count}, max |mu_n - n| = {err:.1e}", pts.len()),
    )
}

fn paley_wiener() -> Outcome {
    let q = PotentialGrid::builtin("linear", 2049).unwrap();
    let step = 0.05;
    let vals: Vec<f64> = (0..=4000)
        .map(|k| {
            let mu = k as f64 * step;
            (mu * delta(&q, c64(mu, 0.0))).norm()
        })
        .collect();
    let sup = |a: usize, b: usize| vals[a..=b].iter().cloned().fold(0.0, f64::max);
    let (head, tail) = (sup(0, 2000), sup(2000, 4000));
    // trapezoid integral of |mu Delta|^2
    let l2 = |a: usize, b: usize| {
        (a..b)
            .map(|k| 0.5 * step * (vals[k].powi(2) + vals[k + 1].powi(2)))
            .sum::<f64>()
    };
    let rel_tail = l2(3000, 4000) / l2(0, 4000);
    let mut parity = 0.0f64;
    for k in 0..20 {
        let mu = c64(0.5 + 0.9 * k as f64, 0.3 * (k as f64).sin());
        parity = parity.max((delta(&q, mu) - delta(&q, -mu)).norm());
    }
    check(
        head.is_finite() && tail <= head && rel_tail < 0.01 && parity <= 1e-10,
        format!(
            "sup|mu Delta| {head:.3} on [0,100], {tail:.3e} on [100,200]; L2 tail share {rel_tail:.2e}; parity {parity:.1e}"
        ),
    )
}

fn zero_target() -> Outcome {
    let t = TargetDeterminant::new(vec![c64(1.0, 0.0)], 0, 0.0).unwrap();
    let (rec, _) = run_pipeline(&t, &InverseConfig::default()).map_err(|e| e.to_string())?;
    let q = rec.q_hat.max_abs();
    let w = rec
        .aux
        .w_seq
        .iter()
        .map(|w| (w - 1.0 / PI).norm())
        .fold(0.0, f64::max);
    check(q <= 1e-8 && w <= 1e-12, format!("||q_hat|| = {q:.1e}, max |w_n - 1/pi| = {w:.1e}"))
}

fn round_trip() -> Outcome {
    let start = Instant::now();
    let t = TargetDeterminant::from_real(&[0.01], 0).unwrap();
    let base = InverseConfig {
        grid_points: 2049,
        truncation_m: 64,
        ..InverseConfig::default()
    };
    let (rec, rep) = run_pipeline(&t, &base).map_err(|e| e.to_string())?;
    let fine = InverseConfig {
        grid_points: 4097,
        truncation_m: 128,
        ..base
    };
    let (_, rep2) = run_pipeline(&t, &fine).map_err(|e| e.to_string())?;
    let probe = rep.homogeneous_probe.unwrap_or(f64::INFINITY);
    let dir10 = rep
        .dirichlet_match
        .iter()
        .filter(|r| r.n <= 10)
        .map(|r| r.error)
        .fold(0.0, f64::max);
    let ratio = rep.max_residual / rep2.max_residual;
    within(start, Duration::from_secs(300))?;
    check(
        rec.aux.min_re_w() > 0.0 && probe <= 1e-10 && rep.max_residual <= 1e-3 && ratio >= 2.0 && dir10 <= 1e-5,
        format!(
            "min Re w {:.3}, probe {probe:.1e}, residual {:.2e} -> {:.2e} (x{ratio:.1}), Dirichlet n<=10 {dir10:.1e}",
            rec.aux.min_re_w(),
            rep.max_residual,
            rep2.max_residual
        ),
    )
}

fn green() -> Outcome {
    let start = Instant::now();
    let q = PotentialGrid::builtin("linear", 2049).unwrap();
    let g = green_function(&q, BoundaryTheta::Zero, c64(0.5, 0.5), 8).map_err(|e| e.to_string())?;
    let (bd, bv) = g.bc_residuals();
    let bc = bd.max(bv) / g.scale();
    let jump = (2..g.n_points - 2)
        .map(|j| (g.derivative_jump(j) + 1.0).norm())
        .fold(0.0, f64::max);

    // 50 pseudo-random (x, xi, mu) triples
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut uniform = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut forms = 0.0f64;
    for _ in 0..50 {
        let mu = c64(40.0 * uniform() - 20.0, 4.0 * uniform() - 2.0);
        let rec = solve_fundamental(&q, mu, &SolverOptions::default()).map_err(|e| e.to_string())?;
        let d = GreenData::from_record(&rec, BoundaryTheta::Zero, 1).map_err(|e| e.to_string())?;
        let (i, j) = ((uniform() * 2048.0) as usize, (uniform() * 2048.0) as usize);
        let e = &d.ends;
        let scale = (1.0 + e.c.norm() + e.c_prime.norm() + e.s.norm() + e.s_prime.norm()).powi(2)
            * (1.0 + d.c[i].norm() + d.s[i].norm())
            * (1.0 + d.c[j].norm() + d.s[j].norm());
        let diff = (d.phi(i, j, false) - phi_bracket_form(e, d.c[i], d.s[i], d.c[j], d.s[j])).norm();
        forms = forms.max(diff / scale);
    }

    let rec = solve_fundamental(&q, c64(40.0, 0.0), &SolverOptions::default()).map_err(|e| e.to_string())?;
    let d = GreenData::from_record(&rec, BoundaryTheta::Zero, 1).map_err(|e| e.to_string())?;
    let pairs: Vec<(usize, usize)> = (0..=64)
        .flat_map(|a| (0..=64).map(move |b| (a * 32, b * 32)))
        .collect();
    let lead = leading_term_defect(&d, &pairs);
    within(start, Duration::from_secs(60))?;
    check(
        bc <= 1e-6 && jump <= 10.0 * g.h && forms <= 1e-12 && lead <= 0.1,
        format!(
            "BC {bc:.1e} of scale, jump error {jump:.1e} (10h = {:.1e}), forms differ {forms:.1e}, leading term at mu=40 {lead:.3}",
            10.0 * g.h
        ),
    )
}

fn projections() -> Outcome {
    let start = Instant::now();
    let q = PotentialGrid::builtin("linear", 2049).unwrap();
    let region = SearchRegion::new(-0.3, 6.3, -2.3, 2.7).unwrap();
    let pts = find_zeros(Determinant::Characteristic, &q, BoundaryTheta::Zero, &region).map_err(|e| e.to_string())?;
    if pts.len() < 5 {
        return Err(format!("only {} eigenvalues found", pts.len()));
    }
    let opts = ProjectionOptions::default();
    let ps = pts[..5]
        .iter()
        .map(|p| spectral_projection(&q, BoundaryTheta::Zero, p, &pts, &opts))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let (mut tr, mut idem, mut prod, mut min_norm) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for (a, p) in ps.iter().enumerate() {
        tr = tr.max((p.trace() - p.center.multiplicity as f64).norm());
        idem = idem.max(p.idempotence_defect().map_err(|e| e.to_string())?);
        min_norm = min_norm.min(p.norm());
        for (b, r) in ps.iter().enumerate() {
            if a != b {
                prod = prod.max(p.product_ratio(r).map_err(|e| e.to_string())?);
            }
        }
    }
    within(start, Duration::from_secs(120))?;
    check(
        tr <= 1e-3 && idem <= 1e-3 && prod <= 1e-3 && min_norm >= 1.0 - 1e-3,
        format!("trace {tr:.1e}, idempotence {idem:.1e}, products {prod:.1e}, min norm {min_norm:.4}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("inverse.json");
    std::fs::write(
        &cfg,
        r#"{"target": {"sine_coeffs": [[0.01, 0]], "m": 0}, "grid_points": 2049, "truncation_M": 64}"#,
    )
    .map_err(|e| e.to_string())?;
    let run = |out: &Path| {
        Command::new(env!("CARGO_BIN_EXE_degensl"))
            .arg("inverse")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .map(|s| s.code())
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let codes = (run(&a).map_err(|e| e.to_string())?, run(&b).map_err(|e| e.to_string())?);
    if codes != (Some(0), Some(0)) {
        return Err(format!("exit codes {codes:?}"));
    }
    let mut names: Vec<String> = std::fs::read_dir(&a)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in &names {
        if std::fs::read(a.join(name)).ok() != std::fs::read(b.join(name)).ok() {
            return Err(format!("{name} differs"));
        }
    }
    check(names.len() >= 3, format!("{} artifacts byte-identical: {}", names.len(), names.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Wronskian invariant", wronskian),
        ("degeneracy dichotomy", degeneracy),
        ("free Dirichlet spectrum", dirichlet_free),
        ("Paley-Wiener behaviour of Delta", paley_wiener),
        ("inverse fixed point", zero_target),
        ("inverse round trip", round_trip),
        ("Green function", green),
        ("spectral projections", projections),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {}. {name}: {d} [{secs:.1}s]", k + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {}. {name}: {d} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
