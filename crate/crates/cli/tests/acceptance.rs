//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use tfim_rfs_core::scaling::{
    a1, collapse_quality, data_collapse, find_peak, fit_finite_size, fit_thermo, optimal_nu,
    DEFAULT_BRACKET, DEFAULT_WINDOW,
};
use tfim_rfs_core::{
    build_rdm, correlators_finite, correlators_thermo, elliptic_e, elliptic_k,
    log_divergence_coefficient, rfs_closed_form, rfs_oracle, ChainSpec64, CorrelatorSet64,
    CorrelatorTag,
};

const CRITICAL_FINITE_TOL: f64 = 5e-4;
const CRITICAL_THERMO_TOL: f64 = 1e-12;
const CRITICAL_RUNTIME: Duration = Duration::from_secs(1);
const ORACLE_DELTA: f64 = 1e-4;
const ORACLE_TOL: f64 = 1e-3;
const SLOPE_TOL: f64 = 0.02;
const Z_MINUS_TOL: f64 = 1e-3;
const FINITE_SIZE_TOL: f64 = 0.05;
const FINITE_SIZE_RUNTIME: Duration = Duration::from_secs(60);
const A2_TOL: f64 = 0.05;
const COLLAPSE_QUALITY_MAX: f64 = 0.05;
const NU_WINDOW: (f64, f64) = (0.9, 1.1);
const NU_SEARCH: (f64, f64) = (0.5, 2.0);
const TRACE_TOL: f64 = 1e-14;
const DERIVATIVE_TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-12;
const FD_TOL: f64 = 1e-7;
const FD_STEP: f64 = 1e-5;
const LEGENDRE_TOL: f64 = 1e-10;
const FORM_TOL: f64 = 1e-10;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn finite(n: usize, lambda: f64) -> CorrelatorSet64 {
    correlators_finite(&ChainSpec64::new(n, lambda).unwrap())
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn critical_values() -> [f64; 4] {
    [
        2.0 / PI,
        2.0 / PI,
        -2.0 / (3.0 * PI),
        16.0 / (3.0 * PI * PI),
    ]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let c = finite(1 << 14, 1.0);
    let t = correlators_thermo(1.0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let expected = critical_values();
    let finite_err = c
        .values()
        .iter()
        .zip(expected)
        .map(|(v, e)| (v - e).abs())
        .fold(0.0, f64::max);
    let thermo_err = t
        .values()
        .iter()
        .zip(expected)
        .map(|(v, e)| (v - e).abs())
        .fold(0.0, f64::max);
    check(
        finite_err <= CRITICAL_FINITE_TOL && thermo_err <= CRITICAL_THERMO_TOL && elapsed < CRITICAL_RUNTIME,
        format!(
            "N=2^14 max error {finite_err:.3e} (tol {CRITICAL_FINITE_TOL:e}), thermo max error {thermo_err:.3e} (tol {CRITICAL_THERMO_TOL:e}), {elapsed:?}"
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut worst: (f64, usize, f64) = (0.0, 0, 0.0);
    for lambda in [0.3, 0.7, 0.95, 1.0, 1.05, 1.5] {
        for n in [64, 512, 4096] {
            let spec = ChainSpec64::new(n, lambda).unwrap();
            let oracle = rfs_oracle(&spec, ORACLE_DELTA).map_err(|e| e.to_string())?;
            let d = oracle
                .discrepancy
                .ok_or_else(|| format!("no closed form at N={n}, λ={lambda}"))?;
            if d > worst.0 {
                worst = (d, n, lambda);
            }
        }
    }
    check(
        worst.0 <= ORACLE_TOL,
        format!(
            "worst relative discrepancy {:.3e} at N={}, λ={} (tol {ORACLE_TOL:e}), {:?}",
            worst.0,
            worst.1,
            worst.2,
            start.elapsed()
        ),
    )
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_3() -> Outcome {
    let sizes: Vec<usize> = (10..=16).map(|p| 1 << p).collect();
    let ln_n: Vec<f64> = sizes.iter().map(|n| (*n as f64).ln()).collect();
    let sets: Vec<CorrelatorSet64> = sizes.iter().map(|n| finite(*n, 1.0)).collect();
    let mut parts = Vec::new();
    let mut ok = true;
    for tag in CorrelatorTag::ALL {
        let ys: Vec<f64> = sets.iter().map(|c| c.derivative(tag)).collect();
        let s = slope(&ln_n, &ys);
        let expected: f64 = log_divergence_coefficient(tag);
        let rel = (s - expected) / expected;
        ok &= rel.abs() <= SLOPE_TOL;
        parts.push(format!("{} {s:.5} ({:+.2}%)", tag.name(), 100.0 * rel));
    }
    check(
        ok,
        format!("{} (tol ±{}%)", parts.join(", "), 100.0 * SLOPE_TOL),
    )
}

fn criterion_4() -> Outcome {
    let rho = build_rdm(&finite(1 << 14, 1.0)).map_err(|e| e.to_string())?;
    let err = (rho.d_z_minus - 1.0 / (3.0 * PI)).abs();
    check(
        err <= Z_MINUS_TOL,
        format!(
            "dz₋/dλ = {:.6} vs 1/(3π) = {:.6}, error {err:.3e} (tol {Z_MINUS_TOL:e})",
            rho.d_z_minus,
            1.0 / (3.0 * PI)
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let peaks = (9..=14)
        .map(|p| find_peak(1 << p, DEFAULT_BRACKET))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let fit = fit_finite_size(&peaks).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let dev = (fit.slope - a1().sqrt()) / a1().sqrt();
    check(
        dev.abs() <= FINITE_SIZE_TOL && elapsed <= FINITE_SIZE_RUNTIME,
        format!(
            "slope {:.5} vs √A₁ {:.5} ({:+.2}%, tol ±{}%), r² {:.7}, {elapsed:?}",
            fit.slope,
            a1().sqrt(),
            100.0 * dev,
            100.0 * FINITE_SIZE_TOL,
            fit.r_squared
        ),
    )
}

fn criterion_6() -> Outcome {
    let lambdas: Vec<f64> = (2..=5).map(|k| 1.0 - 10f64.powi(-k)).collect();
    let fit = fit_thermo(&lambdas).map_err(|e| e.to_string())?;
    let a2 = fit.param("a2").unwrap();
    let dev = (a2 - a1()) / a1();
    check(
        dev.abs() <= A2_TOL,
        format!(
            "A₂ {a2:.5} vs A₁ {:.5} ({:+.2}%, tol ±{}%), r² {:.7}",
            a1(),
            100.0 * dev,
            100.0 * A2_TOL,
            fit.r_squared
        ),
    )
}

fn criterion_7() -> Outcome {
    let curve =
        data_collapse(&[512, 1024, 2048, 4096], 1.0, DEFAULT_WINDOW).map_err(|e| e.to_string())?;
    let q = collapse_quality(&curve).map_err(|e| e.to_string())?;
    let (nu, q_best) = optimal_nu(&curve, NU_SEARCH).map_err(|e| e.to_string())?;
    check(
        q <= COLLAPSE_QUALITY_MAX && (NU_WINDOW.0..=NU_WINDOW.1).contains(&nu),
        format!(
            "quality at ν=1 {q:.4} (max {COLLAPSE_QUALITY_MAX}), argmin ν {nu:.4} (quality {q_best:.4}) in [{}, {}]",
            NU_WINDOW.0, NU_WINDOW.1
        ),
    )
}

fn central(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn property_rdm() -> Result<String, String> {
    let mut worst_trace: f64 = 0.0;
    let mut worst_dtrace: f64 = 0.0;
    let mut worst_eig = f64::INFINITY;
    let mut worst_form: f64 = 0.0;
    for n in [4, 6, 64, 1024, 8192] {
        for i in 0..=300 {
            let lambda = 0.01 * i as f64;
            let rho = build_rdm(&finite(n, lambda)).map_err(|e| e.to_string())?;
            worst_trace = worst_trace.max((rho.trace() - 1.0).abs());
            worst_dtrace = worst_dtrace.max(rho.derivative_trace().abs());
            worst_eig = rho.eigenvalues().into_iter().fold(worst_eig, f64::min);
            if lambda >= 1e-2 {
                let v = rfs_closed_form(&rho).map_err(|e| format!("N={n}, λ={lambda}: {e}"))?;
                worst_form = worst_form.max(v.form_mismatch.unwrap_or(f64::INFINITY));
            }
        }
    }
    if worst_trace <= TRACE_TOL
        && worst_dtrace <= DERIVATIVE_TRACE_TOL
        && worst_eig >= -PSD_TOL
        && worst_form <= FORM_TOL
    {
        Ok(format!(
            "trace {worst_trace:.1e}, d-trace {worst_dtrace:.1e}, min eigenvalue {worst_eig:.1e}, form mismatch {worst_form:.1e}"
        ))
    } else {
        Err(format!(
            "trace {worst_trace:.1e} (tol {TRACE_TOL:e}), d-trace {worst_dtrace:.1e} (tol {DERIVATIVE_TRACE_TOL:e}), min eigenvalue {worst_eig:.1e} (tol −{PSD_TOL:e}), form mismatch {worst_form:.1e} (tol {FORM_TOL:e})"
        ))
    }
}

fn property_derivatives() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for n in [64, 1024] {
        for lambda in [0.2, 0.8, 1.0, 1.3] {
            let c = finite(n, lambda);
            for tag in CorrelatorTag::ALL {
                let f = |l: f64| finite(n, l).value(tag);
                let fd =
                    (4.0 * central(&f, lambda, FD_STEP / 2.0) - central(&f, lambda, FD_STEP)) / 3.0;
                worst = worst.max((c.derivative(tag) - fd).abs());
            }
        }
    }
    let text = format!("derivative vs finite difference {worst:.1e} (tol {FD_TOL:e})");
    if worst <= FD_TOL {
        Ok(text)
    } else {
        Err(text)
    }
}

fn property_legendre() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for k in [0.1f64, 0.5, 0.9] {
        let kc = (1.0 - k * k).sqrt();
        let (kk, ek) = (elliptic_k(k).unwrap(), elliptic_e(k).unwrap());
        let (kkc, ekc) = (elliptic_k(kc).unwrap(), elliptic_e(kc).unwrap());
        worst = worst.max((ek * kkc + ekc * kk - kk * kkc - PI / 2.0).abs());
    }
    let text = format!("Legendre {worst:.1e} (tol {LEGENDRE_TOL:e})");
    if worst <= LEGENDRE_TOL {
        Ok(text)
    } else {
        Err(text)
    }
}

fn run_cli(args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_tfim-rfs"))
        .args(args)
        .env("TFIM_RFS_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(out.stdout)
}

fn csv_values(bytes: &[u8]) -> Result<Vec<Vec<String>>, String> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(bytes)
        .records()
        .map(|r| {
            r.map(|r| r.iter().map(str::to_string).collect())
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn property_output() -> Result<String, String> {
    let args = ["sweep", "--sizes", "12,52,252", "--steps", "31", "--verify"];
    let a = run_cli(&args, "1")?;
    let b = run_cli(&args, "4")?;
    let c = run_cli(&args, "4")?;
    if a != b || b != c {
        return Err("CSV output differs between runs".into());
    }
    let json_args: Vec<&str> = args.iter().copied().chain(["--format", "json"]).collect();
    let j1 = run_cli(&json_args, "2")?;
    if j1 != run_cli(&json_args, "3")? {
        return Err("JSON output differs between runs".into());
    }
    let json: serde_json::Value = serde_json::from_slice(&j1).map_err(|e| e.to_string())?;
    let rows = csv_values(&a)?;
    let header: Vec<String> = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(&a[..])
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_string)
        .collect();
    let json_rows = json["rows"].as_array().ok_or("JSON rows missing")?;
    if json_rows.len() != rows.len() {
        return Err("row counts differ between CSV and JSON".into());
    }
    let mut compared = 0usize;
    for (row, jrow) in rows.iter().zip(json_rows) {
        for (name, cell) in header.iter().zip(row) {
            let j = &jrow[name.as_str()];
            let same = match (cell.parse::<f64>(), j.as_f64()) {
                (Ok(x), Some(y)) => x.to_bits() == y.to_bits(),
                _ => {
                    j.as_str().map(str::to_string) == Some(cell.clone())
                        || (cell.is_empty() && j.is_null())
                }
            };
            if !same {
                return Err(format!("CSV/JSON mismatch in column {name}: {cell} vs {j}"));
            }
            compared += 1;
        }
    }
    Ok(format!(
        "byte-identical reruns across thread counts, {compared} CSV/JSON cells bit-equal"
    ))
}

fn criterion_8() -> Outcome {
    let parts = [
        property_rdm(),
        property_derivatives(),
        property_legendre(),
        property_output(),
    ];
    let ok = parts.iter().all(Result::is_ok);
    let text = parts
        .into_iter()
        .map(|p| p.unwrap_or_else(|e| format!("FAILED: {e}")))
        .collect::<Vec<_>>()
        .join("; ");
    check(ok, text)
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("critical-point correlators", criterion_1),
        ("oracle equivalence", criterion_2),
        ("log-divergence coefficients", criterion_3),
        ("constant derivative of z-", criterion_4),
        ("finite-size slope", criterion_5),
        ("thermodynamic coefficient", criterion_6),
        ("data collapse", criterion_7),
        ("property suite", criterion_8),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
