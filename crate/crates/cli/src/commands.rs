use rayon::prelude::*;
use tfim_rfs_core::scaling::{
    collapse_from_peaks, collapse_quality, find_peak, fit_finite_size, fit_thermo, optimal_nu,
    CollapseCurve, PeakRecord, ScalingFit, DEFAULT_BRACKET,
};
use tfim_rfs_core::{
    build_rdm, correlators_finite, correlators_thermo, rfs_closed_form, rfs_oracle, ChainSpec64,
    CorrelatorSet64, Error, RfsValue64,
};

use crate::config::{Command, RunConfig, MIN_SCALING_SIZES};
use crate::error::CliError;
use crate::table::{Cell, Table};

/// Exponent range searched for the best collapse.
pub const NU_SEARCH_RANGE: (f64, f64) = (0.5, 2.0);

/// Couplings used by the thermodynamic fits: 1 ∓ 10⁻ᵏ for k = 2..=5.
pub fn thermo_fit_couplings(sign: f64) -> Vec<f64> {
    (2..=5).map(|k| 1.0 + sign * 10f64.powi(-k)).collect()
}

pub fn execute(cfg: &RunConfig) -> Result<Table, CliError> {
    match cfg.command {
        Command::Correlators => Ok(correlators(cfg)),
        Command::Rfs => Ok(rfs(cfg)),
        Command::Sweep => Ok(sweep(cfg)),
        Command::Peak => Ok(peak(cfg)),
        Command::Scaling => scaling(cfg),
        Command::Collapse => collapse(cfg),
        Command::Thermo => thermo(cfg),
    }
}

fn grid(cfg: &RunConfig) -> Vec<(usize, f64)> {
    let lambdas = cfg.lambda_range.points();
    cfg.sizes
        .iter()
        .flat_map(|n| lambdas.iter().map(move |l| (*n, *l)))
        .collect()
}

/// Short machine-readable tag for a per-row failure.
fn status(err: &Error) -> &'static str {
    match err {
        Error::SingularBlock { .. } => "singular_block",
        Error::DivergentDerivative { .. } => "divergent",
        Error::NoInteriorMaximum { .. } => "no_interior_maximum",
        Error::InconsistentRdm(_) => "inconsistent_rdm",
        Error::Domain(_) => "domain_error",
        Error::Fit(_) => "fit_error",
        Error::EmptyOverlap => "empty_overlap",
    }
}

fn correlator_cells(c: &CorrelatorSet64) -> Vec<Cell> {
    c.values()
        .into_iter()
        .chain(c.derivatives())
        .map(Cell::from)
        .collect()
}

const CORRELATOR_COLUMNS: [&str; 8] = ["sz", "xx", "yy", "zz", "d_sz", "d_xx", "d_yy", "d_zz"];

fn correlators(cfg: &RunConfig) -> Table {
    let mut table = Table::new(
        ["n_sites", "lambda"]
            .into_iter()
            .chain(CORRELATOR_COLUMNS)
            .collect(),
    );
    let rows: Vec<Vec<Cell>> = grid(cfg)
        .into_par_iter()
        .map(|(n, lambda)| {
            let spec = ChainSpec64::new(n, lambda).expect("validated size and coupling");
            let mut row = vec![n.into(), lambda.into()];
            row.extend(correlator_cells(&correlators_finite(&spec)));
            row
        })
        .collect();
    rows.into_iter().for_each(|r| table.push(r));
    table
}

struct Point {
    closed: Result<RfsValue64, Error>,
    oracle: Option<Result<RfsValue64, Error>>,
}

fn evaluate(n: usize, lambda: f64, cfg: &RunConfig) -> Point {
    let spec = ChainSpec64::new(n, lambda).expect("validated size and coupling");
    let closed = build_rdm(&correlators_finite(&spec)).and_then(|rho| rfs_closed_form(&rho));
    let oracle = cfg.verify.then(|| rfs_oracle(&spec, cfg.delta));
    Point { closed, oracle }
}

fn point_status(p: &Point) -> &'static str {
    match (&p.closed, &p.oracle) {
        (Err(e), _) => status(e),
        (Ok(_), Some(Err(e))) => status(e),
        _ => "ok",
    }
}

fn oracle_cells(p: &Point) -> [Cell; 2] {
    match &p.oracle {
        Some(Ok(v)) => [v.chi.into(), v.discrepancy.into()],
        _ => [Cell::Missing, Cell::Missing],
    }
}

fn max_discrepancy(points: &[Point]) -> Option<f64> {
    points
        .iter()
        .filter_map(|p| p.oracle.as_ref()?.as_ref().ok()?.discrepancy)
        .reduce(f64::max)
}

fn rfs(cfg: &RunConfig) -> Table {
    let mut columns = vec![
        "n_sites",
        "lambda",
        "chi",
        "chi_block1",
        "chi_block2",
        "form_mismatch",
    ];
    if cfg.verify {
        columns.extend(["chi_oracle", "discrepancy"]);
    }
    columns.push("status");
    let mut table = Table::new(columns);
    let cells = grid(cfg);
    let points: Vec<Point> = cells
        .par_iter()
        .map(|(n, l)| evaluate(*n, *l, cfg))
        .collect();
    for ((n, lambda), p) in cells.iter().zip(&points) {
        let closed = p.closed.as_ref().ok();
        let mut row: Vec<Cell> = vec![
            (*n).into(),
            (*lambda).into(),
            closed.map(|v| v.chi).into(),
            closed.and_then(|v| v.chi_block1).into(),
            closed.and_then(|v| v.chi_block2).into(),
            closed.and_then(|v| v.form_mismatch).into(),
        ];
        if cfg.verify {
            row.extend(oracle_cells(p));
        }
        row.push(point_status(p).into());
        table.push(row);
    }
    if cfg.verify {
        table.meta("oracle_delta", cfg.delta);
        table.meta("max_discrepancy", max_discrepancy(&points));
    }
    table
}

fn sweep(cfg: &RunConfig) -> Table {
    let mut columns = vec!["n_sites", "lambda", "chi"];
    if cfg.verify {
        columns.extend(["chi_oracle", "discrepancy"]);
    }
    columns.push("status");
    let mut table = Table::new(columns);
    let cells = grid(cfg);
    let points: Vec<Point> = cells
        .par_iter()
        .map(|(n, l)| evaluate(*n, *l, cfg))
        .collect();
    for ((n, lambda), p) in cells.iter().zip(&points) {
        let mut row: Vec<Cell> = vec![
            (*n).into(),
            (*lambda).into(),
            p.closed.as_ref().ok().map(|v| v.chi).into(),
        ];
        if cfg.verify {
            row.extend(oracle_cells(p));
        }
        row.push(point_status(p).into());
        table.push(row);
    }
    if cfg.verify {
        table.meta("oracle_delta", cfg.delta);
        table.meta("max_discrepancy", max_discrepancy(&points));
    }
    table
}

fn peaks(cfg: &RunConfig, bracket: (f64, f64)) -> Vec<(usize, Result<PeakRecord, Error>)> {
    cfg.sizes
        .par_iter()
        .map(|n| (*n, find_peak(*n, bracket)))
        .collect()
}

fn bracket(cfg: &RunConfig) -> (f64, f64) {
    (cfg.lambda_range.min, cfg.lambda_range.max)
}

fn peak_table(found: &[(usize, Result<PeakRecord, Error>)], with_sqrt: bool) -> Table {
    let mut columns = vec!["n_sites", "lambda_m", "chi_m"];
    if with_sqrt {
        columns.push("sqrt_chi_m");
    }
    columns.extend(["chi_at_critical", "status"]);
    let mut table = Table::new(columns);
    for (n, result) in found {
        let rec = result.as_ref().ok();
        let mut row: Vec<Cell> = vec![
            (*n).into(),
            rec.map(|p| p.lambda_m).into(),
            rec.map(|p| p.chi_m).into(),
        ];
        if with_sqrt {
            row.push(rec.map(|p| p.chi_m.sqrt()).into());
        }
        row.push(rec.map(|p| p.chi_at_critical).into());
        row.push(result.as_ref().err().map_or("ok", status).into());
        table.push(row);
    }
    table
}

fn peak(cfg: &RunConfig) -> Table {
    let mut table = peak_table(&peaks(cfg, bracket(cfg)), false);
    table.meta("bracket_lo", cfg.lambda_range.min);
    table.meta("bracket_hi", cfg.lambda_range.max);
    table
}

fn fit_metadata(table: &mut Table, suffix: &str, fit: &ScalingFit) {
    table.meta(format!("model{suffix}"), fit.model.name());
    table.meta(format!("slope{suffix}"), fit.slope);
    table.meta(format!("intercept{suffix}"), fit.intercept);
    table.meta(format!("r_squared{suffix}"), fit.r_squared);
    for (key, value) in &fit.params {
        table.meta(format!("{key}{suffix}"), *value);
    }
    let flags: Vec<&str> = fit.flags.iter().map(|f| f.name()).collect();
    table.meta(format!("flags{suffix}"), flags.join(";"));
}

fn scaling(cfg: &RunConfig) -> Result<Table, CliError> {
    let found = peaks(cfg, bracket(cfg));
    let mut table = peak_table(&found, true);
    let survivors: Vec<PeakRecord> = found
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok().copied())
        .collect();
    if survivors.len() < MIN_SCALING_SIZES {
        let failed: Vec<String> = found
            .iter()
            .filter_map(|(n, r)| r.as_ref().err().map(|e| format!("N={n}: {e}")))
            .collect();
        return Err(CliError::Numeric(Error::Fit(format!(
            "only {} of {} peak searches succeeded ({})",
            survivors.len(),
            found.len(),
            failed.join("; ")
        ))));
    }
    let fit = fit_finite_size(&survivors)?;
    fit_metadata(&mut table, "", &fit);
    if let Some(dev) = fit.param("relative_deviation") {
        table.meta("percent_deviation", 100.0 * dev);
    }
    Ok(table)
}

fn collapse(cfg: &RunConfig) -> Result<Table, CliError> {
    let found = peaks(cfg, DEFAULT_BRACKET);
    let records = found
        .into_iter()
        .map(|(_, r)| r)
        .collect::<Result<Vec<_>, _>>()?;
    let window = (cfg.lambda_range.min, cfg.lambda_range.max);
    let parts = records
        .par_iter()
        .map(|p| {
            collapse_from_peaks(
                std::slice::from_ref(p),
                cfg.nu,
                window,
                cfg.lambda_range.steps,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let curve = CollapseCurve {
        points: parts.into_iter().flat_map(|c| c.points).collect(),
        nu: cfg.nu,
        peaks: records.clone(),
    };
    let quality = collapse_quality(&curve)?;

    let mut table = Table::new(vec!["n_sites", "lambda", "x", "y"]);
    for p in &curve.points {
        let lambda_m = records
            .iter()
            .find(|r| r.n_sites == p.n_sites)
            .map(|r| r.lambda_m)
            .expect("every point has a peak");
        table.push(vec![
            p.n_sites.into(),
            (lambda_m + p.offset).into(),
            p.x.into(),
            p.y.into(),
        ]);
    }
    table.meta("nu", cfg.nu);
    table.meta("quality", quality);
    table.meta(
        "nu_optimal",
        optimal_nu(&curve, NU_SEARCH_RANGE).ok().map(|(nu, _)| nu),
    );
    for r in &records {
        table.meta(format!("lambda_m_{}", r.n_sites), r.lambda_m);
        table.meta(format!("chi_m_{}", r.n_sites), r.chi_m);
    }
    Ok(table)
}

fn thermo(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut table = Table::new(
        ["lambda"]
            .into_iter()
            .chain(CORRELATOR_COLUMNS)
            .chain(["chi", "status"])
            .collect(),
    );
    let lambdas = cfg.lambda_range.points();
    let rows = lambdas
        .par_iter()
        .map(|lambda| -> Result<Vec<Cell>, Error> {
            let c = correlators_thermo(*lambda)?;
            let chi = build_rdm(&c).and_then(|rho| rfs_closed_form(&rho));
            let mut row = vec![Cell::from(*lambda)];
            row.extend(correlator_cells(&c));
            row.push(chi.as_ref().ok().map(|v| v.chi).into());
            row.push(chi.as_ref().err().map_or("ok", status).into());
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;
    rows.into_iter().for_each(|r| table.push(r));

    for (suffix, sign) in [("_below", -1.0), ("_above", 1.0)] {
        let fit = fit_thermo(&thermo_fit_couplings(sign))?;
        fit_metadata(&mut table, suffix, &fit);
    }
    Ok(table)
}
