//! Table and figure-data files for an [`AnalysisReport`].
//!
//! Every table is written twice: as comma-separated values and as an
//! aligned text table. Per group `g` in {G0, G1}:
//!
//! | file                      | content                                           |
//! |---------------------------|---------------------------------------------------|
//! | `ols_{g}.csv/.txt`        | capability coefficients, stderr, t, p; RMSE, R²   |
//! | `aic_{g}.csv/.txt`        | p rows × q columns; `*` best, `!` inadmissible    |
//! | `arimax_{g}.csv/.txt`     | β, φ, θ, σ² with stderr; order, loglik, AIC       |
//! | `correlogram_{g}.csv`     | lag, residual ACF, PACF, ±band                    |
//! | `predictions_{g}.csv`     | trial, observed, one-step prediction              |
//!
//! plus `rmse.csv/.txt` (fit group rows × evaluated group columns, `†` on
//! cross-validated cells), `trust_series.csv`, `ols_residuals.csv` and
//! `report.json`. Files contain no timestamps, so identical inputs give
//! identical bytes. Each file is written to a temporary name and renamed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use trustgrid_core::{ExogSelector, Group, TrustSeries};
use trustgrid_stats::aic::MIN_ROOT_MODULUS;

use crate::analysis::{AnalysisReport, GroupAnalysis, RmseMatrix};
use crate::error::PipelineError;

pub const ERROR_FILE: &str = "ERROR.txt";
pub const DAGGER: char = '†';

/// Writes `contents` to `dir/name` via a temporary file in the same
/// directory.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, PipelineError> {
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let file_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| PipelineError::File { path, source }
    };
    fs::write(&tmp, contents).map_err(file_err(&tmp))?;
    fs::rename(&tmp, &path).map_err(file_err(&path))?;
    Ok(path)
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

fn fixed(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        "-".into()
    }
}

/// Left-aligned first column, right-aligned rest.
fn text_table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let width: Vec<usize> = (0..cols)
        .map(|j| {
            rows.iter()
                .map(|r| r.get(j).map_or(0, |c| c.chars().count()))
                .chain([header[j].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (j, c) in cells.iter().enumerate() {
            let pad = width[j] - c.chars().count();
            if j == 0 {
                s.push_str(c);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str("  ");
                s.push_str(&" ".repeat(pad));
                s.push_str(c);
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    out.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * (cols - 1)));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
    }
    out
}

fn csv(header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",") + "\n";
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// A rendered table in both formats.
pub struct Table {
    pub name: String,
    pub csv: String,
    pub text: String,
}

pub fn ols_table(g: &GroupAnalysis) -> Option<Table> {
    let fit = g.ols.as_ref()?;
    let header = strings(&["term", "estimate", "std_error", "t_value", "p_value"]);
    let names = TrustSeries::exog_names(ExogSelector::Capability);
    let row = |i: usize, f: fn(f64) -> String| -> Vec<String> {
        vec![
            names[i].clone(),
            f(fit.coefficients[i]),
            f(fit.stderr[i]),
            f(fit.t_values[i]),
            f(fit.p_values[i]),
        ]
    };
    let csv_rows: Vec<Vec<String>> = (0..names.len()).map(|i| row(i, num)).collect();
    let txt_rows: Vec<Vec<String>> = (0..names.len()).map(|i| row(i, fixed)).collect();
    let mut text = format!(
        "Group {} linear regression of trust on capability\n\n",
        g.group
    );
    text.push_str(&text_table(&header, &txt_rows));
    let _ = writeln!(
        text,
        "\nRMSE {}  R^2 {}  residual df {}",
        fixed(fit.rmse),
        fixed(fit.r_squared),
        fit.df_resid
    );
    let mut csv_text = csv(&header, &csv_rows);
    let _ = writeln!(csv_text, "rmse,{},,,", num(fit.rmse));
    let _ = writeln!(csv_text, "r_squared,{},,,", num(fit.r_squared));
    Some(Table {
        name: format!("ols_{}", g.group),
        csv: csv_text,
        text,
    })
}

pub fn aic_table(g: &GroupAnalysis) -> Option<Table> {
    let grid = g.aic.as_ref()?;
    let mut header = vec![r"p\q".to_string()];
    header.extend(grid.q_values.iter().map(|q| q.to_string()));
    let mut csv_rows = Vec::new();
    let mut txt_rows = Vec::new();
    for (i, p) in grid.p_values.iter().enumerate() {
        let mut c = vec![p.to_string()];
        let mut t = vec![p.to_string()];
        for cell in &grid.cells[i] {
            let aic = cell.aic();
            c.push(aic.map_or(String::new(), num));
            let mark = if grid.best == Some(cell.order) {
                "*"
            } else if aic.is_some() && !cell.admissible() {
                "!"
            } else {
                " "
            };
            t.push(aic.map_or("-".into(), |a| format!("{a:.2}{mark}")));
        }
        csv_rows.push(c);
        txt_rows.push(t);
    }
    let mut text = format!(
        "Group {} AIC of ARIMA(p,{},q) model orders\n\n",
        g.group, grid.d
    );
    text.push_str(&text_table(&header, &txt_rows));
    let best = grid.best.map_or("none".to_string(), |o| o.to_string());
    let _ = writeln!(
        text,
        "\n* selected order {best}; ! a root within modulus {MIN_ROOT_MODULUS} of the unit circle, not selectable"
    );
    Some(Table {
        name: format!("aic_{}", g.group),
        csv: csv(&header, &csv_rows),
        text,
    })
}

pub fn arimax_table(g: &GroupAnalysis, exog: ExogSelector) -> Option<Table> {
    let fit = g.arimax.as_ref()?;
    let header = strings(&["term", "estimate", "std_error"]);
    let mut terms: Vec<(String, f64, f64)> = Vec::new();
    let names = TrustSeries::exog_names(exog);
    for (i, b) in fit.beta.iter().enumerate() {
        terms.push((
            names.get(i).cloned().unwrap_or_else(|| format!("x{i}")),
            *b,
            fit.beta_stderr[i],
        ));
    }
    for (i, v) in fit.phi.iter().enumerate() {
        terms.push((format!("ar{}", i + 1), *v, fit.phi_stderr[i]));
    }
    for (i, v) in fit.theta.iter().enumerate() {
        terms.push((format!("ma{}", i + 1), *v, fit.theta_stderr[i]));
    }
    terms.push(("sigma2".into(), fit.sigma2, f64::NAN));
    let csv_rows: Vec<Vec<String>> = terms
        .iter()
        .map(|(n, v, s)| vec![n.clone(), num(*v), num(*s)])
        .collect();
    let txt_rows: Vec<Vec<String>> = terms
        .iter()
        .map(|(n, v, s)| vec![n.clone(), fixed(*v), fixed(*s)])
        .collect();
    let mut text = format!("Group {} ARIMAX{} coefficients\n\n", g.group, fit.order);
    text.push_str(&text_table(&header, &txt_rows));
    let _ = writeln!(
        text,
        "\nlog likelihood {}  AIC {}  one-step RMSE {}  observations {}",
        fixed(fit.loglik),
        fixed(fit.aic),
        fixed(fit.one_step_rmse),
        fit.n_obs
    );
    let mut csv_text = csv(&header, &csv_rows);
    let _ = writeln!(
        csv_text,
        "order,{},",
        fit.order.to_string().replace(',', " ")
    );
    let _ = writeln!(csv_text, "loglik,{},", num(fit.loglik));
    let _ = writeln!(csv_text, "aic,{},", num(fit.aic));
    Some(Table {
        name: format!("arimax_{}", g.group),
        csv: csv_text,
        text,
    })
}

pub fn rmse_table(report: &AnalysisReport) -> Table {
    let mut header = vec!["fit\\eval".to_string()];
    header.extend(Group::ALL.iter().map(|g| g.to_string()));
    let cell = |fit: Group, eval: Group, f: fn(f64) -> String| {
        let v = report.rmse.get(fit, eval).map_or_else(|| f(f64::NAN), f);
        if RmseMatrix::is_cross(fit, eval) {
            format!("{v}{DAGGER}")
        } else {
            v
        }
    };
    let rows = |f: fn(f64) -> String| -> Vec<Vec<String>> {
        Group::ALL
            .iter()
            .map(|&fit| {
                std::iter::once(fit.to_string())
                    .chain(Group::ALL.iter().map(|&e| cell(fit, e, f)))
                    .collect()
            })
            .collect()
    };
    let mut text = "One-step prediction RMSE of each group's ARIMAX model\n\n".to_string();
    text.push_str(&text_table(&header, &rows(fixed)));
    let _ = writeln!(
        text,
        "\n{DAGGER} cross-validated on the other group's series"
    );
    for g in &report.groups {
        let _ = writeln!(
            text,
            "{} OLS RMSE {}",
            g.group,
            g.ols.as_ref().map_or("-".into(), |o| fixed(o.rmse))
        );
    }
    Table {
        name: "rmse".into(),
        csv: csv(&header, &rows(num)),
        text,
    }
}

fn trust_series_csv(report: &AnalysisReport) -> String {
    let [g0, g1] = &report.groups;
    let header = strings(&["trial", "G0", "G0_capability", "G1", "G1_capability"]);
    let rows: Vec<Vec<String>> = (0..g0.series.len().max(g1.series.len()))
        .map(|t| {
            let col = |g: &GroupAnalysis| {
                (
                    g.series.values.get(t).map_or(String::new(), |v| num(*v)),
                    g.series
                        .capability
                        .get(t)
                        .map_or(String::new(), |c| c.color().name().to_string()),
                )
            };
            let (a, ac) = col(g0);
            let (b, bc) = col(g1);
            vec![(t + 1).to_string(), a, ac, b, bc]
        })
        .collect();
    csv(&header, &rows)
}

fn residuals_csv(report: &AnalysisReport) -> String {
    let [g0, g1] = &report.groups;
    let r = |g: &GroupAnalysis| {
        g.ols
            .as_ref()
            .map(|o| o.residuals.clone())
            .unwrap_or_default()
    };
    let (r0, r1) = (r(g0), r(g1));
    let rows: Vec<Vec<String>> = (0..r0.len().max(r1.len()))
        .map(|t| {
            let get = |v: &Vec<f64>| v.get(t).map_or(String::new(), |x| num(*x));
            vec![(t + 1).to_string(), get(&r0), get(&r1)]
        })
        .collect();
    csv(&strings(&["trial", "G0", "G1"]), &rows)
}

fn correlogram_csv(g: &GroupAnalysis) -> Option<String> {
    let d = g.diagnostics.as_ref()?;
    let rows: Vec<Vec<String>> = d
        .acf
        .values
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let p = d.pacf.values.get(i).map_or(String::new(), |v| num(*v));
            vec![i.to_string(), num(*a), p, num(d.acf.band)]
        })
        .collect();
    Some(csv(&strings(&["lag", "acf", "pacf", "band"]), &rows))
}

fn predictions_csv(g: &GroupAnalysis) -> Option<String> {
    let f = g.forecast.as_ref()?;
    let rows: Vec<Vec<String>> = f
        .predicted
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let t = f.start + i;
            vec![(t + 1).to_string(), num(g.series.values[t]), num(*p)]
        })
        .collect();
    Some(csv(&strings(&["trial", "observed", "predicted"]), &rows))
}

/// Writes all tables and figure data into `dir`. An incomplete report
/// writes only [`ERROR_FILE`] and fails.
pub fn render_tables(report: &AnalysisReport, dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(dir).map_err(|source| PipelineError::File {
        path: dir.to_path_buf(),
        source,
    })?;
    let missing = report.missing();
    if !missing.is_empty() {
        let mut text = "Report is incomplete; no tables were written.\n\n".to_string();
        for m in &missing {
            let _ = writeln!(text, "missing: {m}");
        }
        write_atomic(dir, ERROR_FILE, text.as_bytes())?;
        return Err(PipelineError::IncompleteReport(missing.join("; ")));
    }
    let stale = dir.join(ERROR_FILE);
    if stale.exists() {
        fs::remove_file(&stale).map_err(|source| PipelineError::File {
            path: stale,
            source,
        })?;
    }

    let mut tables = Vec::new();
    for g in &report.groups {
        tables.extend(ols_table(g));
        tables.extend(aic_table(g));
        tables.extend(arimax_table(g, report.config.exog));
    }
    tables.push(rmse_table(report));

    let mut written = Vec::new();
    for t in &tables {
        written.push(write_atomic(
            dir,
            &format!("{}.csv", t.name),
            t.csv.as_bytes(),
        )?);
        written.push(write_atomic(
            dir,
            &format!("{}.txt", t.name),
            t.text.as_bytes(),
        )?);
    }
    written.push(write_atomic(
        dir,
        "trust_series.csv",
        trust_series_csv(report).as_bytes(),
    )?);
    written.push(write_atomic(
        dir,
        "ols_residuals.csv",
        residuals_csv(report).as_bytes(),
    )?);
    for g in &report.groups {
        if let Some(c) = correlogram_csv(g) {
            written.push(write_atomic(
                dir,
                &format!("correlogram_{}.csv", g.group),
                c.as_bytes(),
            )?);
        }
        if let Some(p) = predictions_csv(g) {
            written.push(write_atomic(
                dir,
                &format!("predictions_{}.csv", g.group),
                p.as_bytes(),
            )?);
        }
    }
    let json = serde_json::to_vec_pretty(report)?;
    written.push(write_atomic(dir, "report.json", &json)?);
    Ok(written)
}
