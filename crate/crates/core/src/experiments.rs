//! Sweep harnesses for the three numerical experiments, written as CSV.
//!
//! Cells are solved in parallel and emitted in grid order, so a given config
//! always produces byte-identical output.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::lambda_threshold;
use crate::equilibrium::no_info_solution;
use crate::error::{Error, Result};
use crate::game::{asymmetric_game, equicorrelated_cov, symmetric_game, validate_game, GameSpec};
use crate::objectives::{blended_f, conformism_f, evaluate, full_info_value, social_welfare_f, FMatrix};
use crate::sdp::{build_sdp, pct_gap, solve, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Fig1,
    Fig2,
    Fig3,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fig1 => "fig1",
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
        }
    }
}

/// Sweep configuration. Omitted grids take the default experiment values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: Experiment,
    #[serde(default = "default_players")]
    pub n: usize,
    /// Pairwise state correlation (fig1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corr: Option<Vec<f64>>,
    /// Asymmetry level (fig1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    /// State variance (fig2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    /// Common off-diagonal payoff coefficient (fig2, fig3).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
    /// Blending weight (fig3).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    /// State variance for fig3.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diag: Option<f64>,
    /// State covariance for fig2 and fig3.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offdiag: Option<f64>,
    /// Seeds per fig1 cell, `first_seed .. first_seed + seeds`.
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub first_seed: u64,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_players() -> usize {
    4
}

fn default_seeds() -> usize {
    20
}

/// `start, start + step, …, end` computed in integer hundredths.
fn hundredths(start: i64, end: i64, step: i64) -> Vec<f64> {
    (start..=end).step_by(step as usize).map(|k| k as f64 / 100.0).collect()
}

impl SweepConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            n: default_players(),
            corr: None,
            c: None,
            v: None,
            h: None,
            lambda: None,
            diag: None,
            offdiag: None,
            seeds: default_seeds(),
            first_seed: 0,
            solver: SolverOptions::default(),
            out: None,
        }
    }

    pub fn corr_grid(&self) -> Vec<f64> {
        self.corr.clone().unwrap_or_else(|| hundredths(50, 100, 5))
    }

    pub fn c_grid(&self) -> Vec<f64> {
        self.c.clone().unwrap_or_else(|| hundredths(0, 100, 20))
    }

    pub fn v_grid(&self) -> Vec<f64> {
        self.v.clone().unwrap_or_else(|| hundredths(40, 48, 2))
    }

    pub fn h_grid(&self) -> Vec<f64> {
        self.h.clone().unwrap_or_else(|| match self.experiment {
            Experiment::Fig3 => vec![0.25, 0.5, 0.75, -0.1, -0.2, -0.3],
            _ => vec![-0.3, -0.2, -0.1, 0.2, 0.4, 0.6, 0.8],
        })
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        self.lambda.clone().unwrap_or_else(|| hundredths(0, 100, 5))
    }

    pub fn diag_value(&self) -> f64 {
        self.diag.unwrap_or(4.0)
    }

    pub fn offdiag_value(&self) -> f64 {
        self.offdiag.unwrap_or(match self.experiment {
            Experiment::Fig2 => 0.2,
            _ => 1.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        self.solver.validate()?;
        let grid = |name: &str, g: Vec<f64>, ok: &dyn Fn(f64) -> bool| -> Result<()> {
            if g.is_empty() {
                return Err(Error::Parameter(format!("grid '{name}' is empty")));
            }
            match g.iter().find(|&&x| !x.is_finite() || !ok(x)) {
                Some(x) => Err(Error::Parameter(format!("grid '{name}' has invalid value {x}"))),
                None => Ok(()),
            }
        };
        let n = self.n as f64;
        match self.experiment {
            Experiment::Fig1 => {
                if self.seeds == 0 {
                    return bad("seeds must be at least 1".into());
                }
                grid("corr", self.corr_grid(), &|x| x > -1.0 / (n - 1.0) && x <= 1.0)?;
                grid("c", self.c_grid(), &|x| (0.0..=1.0).contains(&x))?;
            }
            Experiment::Fig2 => {
                let off = self.offdiag_value();
                grid("v", self.v_grid(), &|x| equicorrelated_cov(self.n, x, off).psd)?;
                grid("h", self.h_grid(), &|x| x > -1.0 / (n - 1.0) && x < 1.0)?;
            }
            Experiment::Fig3 => {
                if !equicorrelated_cov(self.n, self.diag_value(), self.offdiag_value()).psd {
                    return bad("diag/offdiag do not form a covariance matrix".into());
                }
                grid("h", self.h_grid(), &|x| x > -1.0 / (n - 1.0) && x < 1.0)?;
                grid("lambda", self.lambda_grid(), &|x| (0.0..=1.0).contains(&x))?;
            }
        }
        Ok(())
    }
}

/// `%.12g`-style formatting: 12 significant digits, shortest of fixed or
/// exponent form, trailing zeros trimmed. Locale independent.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    const DIGITS: i32 = 12;
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_g).unwrap_or_default()
}

/// A CSV record with a series key used by the gnuplot layout.
pub trait CsvRow {
    fn header() -> &'static [&'static str];
    fn cells(&self) -> Vec<String>;
    fn series(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Comma separated with a header line.
    Csv,
    /// Whitespace separated, `#` header, series split into blank-line blocks.
    Gnuplot,
}

pub fn render<R: CsvRow>(rows: &[R], layout: Layout) -> String {
    let mut out = String::new();
    match layout {
        Layout::Csv => {
            out.push_str(&R::header().join(","));
            out.push('\n');
            for r in rows {
                out.push_str(&r.cells().join(","));
                out.push('\n');
            }
        }
        Layout::Gnuplot => {
            out.push_str("# ");
            out.push_str(&R::header().join(" "));
            out.push('\n');
            let mut current: Option<String> = None;
            for r in rows {
                let key = r.series();
                if current.as_ref().is_some_and(|c| *c != key) {
                    out.push_str("\n\n");
                }
                if current.as_ref() != Some(&key) {
                    out.push_str(&format!("# series {key}\n"));
                    current = Some(key);
                }
                let cells: Vec<String> =
                    r.cells().into_iter().map(|c| if c.is_empty() { "?".into() } else { c }).collect();
                out.push_str(&cells.join(" "));
                out.push('\n');
            }
        }
    }
    out
}

/// Outcome of one solve inside a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSolve {
    pub optimal: f64,
    pub status: String,
}

fn solve_cell(g: &GameSpec, f: &FMatrix, opts: &SolverOptions) -> CellSolve {
    let attempt = || -> Result<CellSolve> {
        let r = solve(&build_sdp(g, f)?, opts)?;
        Ok(CellSolve { optimal: r.objective, status: r.status.as_str().into() })
    };
    attempt().unwrap_or_else(|e| CellSolve { optimal: f64::NAN, status: format!("error: {e}").replace(',', ";") })
}

fn checked_game(g: Result<GameSpec>) -> Result<GameSpec> {
    let g = g?;
    let report = validate_game(&g)?;
    if !report.ok {
        return Err(Error::Parameter(report.messages.join("; ")));
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig1Row {
    pub corr: f64,
    pub c: f64,
    pub seed: u64,
    pub optimal: f64,
    pub full_info: f64,
    pub pct_gap: f64,
    pub status: String,
}

impl CsvRow for Fig1Row {
    fn header() -> &'static [&'static str] {
        &["corr", "c", "seed", "optimal", "full_info", "pct_gap", "status"]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            fmt_g(self.corr),
            fmt_g(self.c),
            self.seed.to_string(),
            fmt_g(self.optimal),
            fmt_g(self.full_info),
            fmt_g(self.pct_gap),
            self.status.clone(),
        ]
    }

    fn series(&self) -> String {
        format!("c={}", fmt_g(self.c))
    }
}

/// Asymmetric games with unit-variance equicorrelated states; welfare objective.
pub fn run_fig1(cfg: &SweepConfig) -> Result<Vec<Fig1Row>> {
    cfg.validate()?;
    let cells: Vec<(f64, f64, u64)> = cfg
        .corr_grid()
        .into_iter()
        .flat_map(|corr| {
            cfg.c_grid().into_iter().flat_map(move |c| {
                (cfg.first_seed..cfg.first_seed + cfg.seeds as u64).map(move |s| (corr, c, s))
            })
        })
        .collect();
    cells
        .into_par_iter()
        .map(|(corr, c, seed)| {
            let g = checked_game(asymmetric_game(cfg.n, c, seed, equicorrelated_cov(cfg.n, 1.0, corr).cov))?;
            let f = social_welfare_f(&g)?;
            let full_info = full_info_value(&f, &g)?;
            let cell = solve_cell(&g, &f, &cfg.solver);
            let eps = 10.0 * cfg.solver.tol * (1.0 + full_info.abs());
            Ok(Fig1Row {
                corr,
                c,
                seed,
                optimal: cell.optimal,
                full_info,
                pct_gap: pct_gap(cell.optimal, full_info, eps),
                status: cell.status,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig1Mean {
    pub corr: f64,
    pub c: f64,
    pub mean_pct_gap: f64,
    pub cells: usize,
    pub converged: usize,
}

impl CsvRow for Fig1Mean {
    fn header() -> &'static [&'static str] {
        &["corr", "c", "mean_pct_gap", "cells", "converged"]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            fmt_g(self.corr),
            fmt_g(self.c),
            fmt_g(self.mean_pct_gap),
            self.cells.to_string(),
            self.converged.to_string(),
        ]
    }

    fn series(&self) -> String {
        format!("c={}", fmt_g(self.c))
    }
}

/// Seed-averaged gap per `(corr, c)`, in first-appearance order.
pub fn fig1_means(rows: &[Fig1Row]) -> Vec<Fig1Mean> {
    let mut out: Vec<Fig1Mean> = Vec::new();
    for r in rows {
        let idx = match out.iter().position(|m| m.corr == r.corr && m.c == r.c) {
            Some(i) => i,
            None => {
                out.push(Fig1Mean { corr: r.corr, c: r.c, mean_pct_gap: 0.0, cells: 0, converged: 0 });
                out.len() - 1
            }
        };
        let m = &mut out[idx];
        m.mean_pct_gap += r.pct_gap;
        m.cells += 1;
        m.converged += usize::from(r.status == "converged");
    }
    for m in &mut out {
        m.mean_pct_gap /= m.cells as f64;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2Row {
    pub v: f64,
    pub h: f64,
    pub optimal: f64,
    pub full_info: f64,
    pub no_info: f64,
    pub status: String,
}

impl CsvRow for Fig2Row {
    fn header() -> &'static [&'static str] {
        &["v", "h", "optimal", "full_info", "no_info", "status"]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            fmt_g(self.v),
            fmt_g(self.h),
            fmt_g(self.optimal),
            fmt_g(self.full_info),
            fmt_g(self.no_info),
            self.status.clone(),
        ]
    }

    fn series(&self) -> String {
        format!("h={}", fmt_g(self.h))
    }
}

/// Symmetric games with state variance `v` and fixed covariance; welfare objective.
pub fn run_fig2(cfg: &SweepConfig) -> Result<Vec<Fig2Row>> {
    cfg.validate()?;
    let off = cfg.offdiag_value();
    let cells: Vec<(f64, f64)> =
        cfg.h_grid().into_iter().flat_map(|h| cfg.v_grid().into_iter().map(move |v| (v, h))).collect();
    cells
        .into_par_iter()
        .map(|(v, h)| {
            let g = checked_game(symmetric_game(cfg.n, h, equicorrelated_cov(cfg.n, v, off).cov))?;
            let f = social_welfare_f(&g)?;
            let full_info = full_info_value(&f, &g)?;
            let no_info = evaluate(&f, &no_info_solution(&g)?)?;
            let cell = solve_cell(&g, &f, &cfg.solver);
            Ok(Fig2Row { v, h, optimal: cell.optimal, full_info, no_info, status: cell.status })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig3Row {
    pub h: f64,
    pub lambda: f64,
    pub optimal: f64,
    pub full_info: f64,
    pub no_info: f64,
    /// Defined for `0 < h < 1` only.
    pub lambda_threshold: Option<f64>,
    /// Weight at which full and no disclosure give equal value.
    pub crossover_lambda: Option<f64>,
    pub status: String,
}

impl CsvRow for Fig3Row {
    fn header() -> &'static [&'static str] {
        &["h", "lambda", "optimal", "full_info", "no_info", "lambda_threshold", "crossover_lambda", "status"]
    }

    fn cells(&self) -> Vec<String> {
        vec![
            fmt_g(self.h),
            fmt_g(self.lambda),
            fmt_g(self.optimal),
            fmt_g(self.full_info),
            fmt_g(self.no_info),
            fmt_opt(self.lambda_threshold),
            fmt_opt(self.crossover_lambda),
            self.status.clone(),
        ]
    }

    fn series(&self) -> String {
        format!("h={}", fmt_g(self.h))
    }
}

/// `λ` where `(1-λ)·d_welfare + λ·d_conformism = 0`, with `d` the full minus
/// no disclosure value of each objective; `None` outside `[0, 1]`.
pub fn crossover_lambda(g: &GameSpec) -> Result<Option<f64>> {
    let none = no_info_solution(g)?;
    let gap = |f: &FMatrix| -> Result<f64> { Ok(full_info_value(f, g)? - evaluate(f, &none)?) };
    let d_sw = gap(&social_welfare_f(g)?)?;
    let d_ssd = gap(&conformism_f(g.n)?)?;
    let den = d_sw - d_ssd;
    if den.abs() <= 1e-15 * (d_sw.abs() + d_ssd.abs()).max(f64::MIN_POSITIVE) {
        return Ok(None);
    }
    let lam = d_sw / den;
    Ok((0.0..=1.0).contains(&lam).then_some(lam))
}

/// Blended objective on symmetric games with a fixed equicorrelated prior.
pub fn run_fig3(cfg: &SweepConfig) -> Result<Vec<Fig3Row>> {
    cfg.validate()?;
    let sigma = equicorrelated_cov(cfg.n, cfg.diag_value(), cfg.offdiag_value()).cov;
    let cells: Vec<(f64, f64)> = cfg
        .h_grid()
        .into_iter()
        .flat_map(|h| cfg.lambda_grid().into_iter().map(move |l| (h, l)))
        .collect();
    cells
        .into_par_iter()
        .map(|(h, lambda)| {
            let g = checked_game(symmetric_game(cfg.n, h, sigma.clone()))?;
            let f = blended_f(&g, lambda)?;
            let full_info = full_info_value(&f, &g)?;
            let no_info = evaluate(&f, &no_info_solution(&g)?)?;
            let cell = solve_cell(&g, &f, &cfg.solver);
            Ok(Fig3Row {
                h,
                lambda,
                optimal: cell.optimal,
                full_info,
                no_info,
                lambda_threshold: lambda_threshold(h).ok(),
                crossover_lambda: crossover_lambda(&g)?,
                status: cell.status,
            })
        })
        .collect()
}

/// Runs the configured sweep and renders it.
pub fn run_sweep(cfg: &SweepConfig, layout: Layout) -> Result<String> {
    Ok(match cfg.experiment {
        Experiment::Fig1 => render(&run_fig1(cfg)?, layout),
        Experiment::Fig2 => render(&run_fig2(cfg)?, layout),
        Experiment::Fig3 => render(&run_fig3(cfg)?, layout),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(-2.5), "-2.5");
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g(123456.789), "123456.789");
        assert_eq!(fmt_g(1e-7), "1e-07");
        assert_eq!(fmt_g(-1.5e15), "-1.5e+15");
        assert_eq!(fmt_g(0.0001), "0.0001");
        assert_eq!(fmt_g(0.1 + 0.2), "0.3");
        assert_eq!(fmt_g(f64::INFINITY), "inf");
        assert_eq!(fmt_g(999999999999.5), "1e+12");
    }

    #[test]
    fn default_grids() {
        let cfg = SweepConfig::new(Experiment::Fig1);
        assert_eq!(cfg.corr_grid().len(), 11);
        assert_eq!(cfg.corr_grid()[1], 0.55);
        assert_eq!(cfg.c_grid(), vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
        let cfg = SweepConfig::new(Experiment::Fig2);
        assert_eq!(cfg.v_grid(), vec![0.4, 0.42, 0.44, 0.46, 0.48]);
        assert_eq!(cfg.offdiag_value(), 0.2);
        let cfg = SweepConfig::new(Experiment::Fig3);
        assert_eq!(cfg.lambda_grid().len(), 21);
        assert_eq!((cfg.diag_value(), cfg.offdiag_value()), (4.0, 1.0));
    }

    #[test]
    fn config_json_and_validation() {
        let cfg: SweepConfig = serde_json::from_str(r#"{"experiment":"fig1","corr":[1.0],"c":[0.0],"seeds":2}"#).unwrap();
        assert!(cfg.validate().is_ok());
        let empty: SweepConfig = serde_json::from_str(r#"{"experiment":"fig2","v":[]}"#).unwrap();
        assert!(empty.validate().is_err());
        let zero: SweepConfig = serde_json::from_str(r#"{"experiment":"fig1","seeds":0}"#).unwrap();
        assert!(zero.validate().is_err());
        assert!(serde_json::from_str::<SweepConfig>(r#"{"experiment":"fig4"}"#).is_err());
        assert!(serde_json::from_str::<SweepConfig>(r#"{"experiment":"fig1","bogus":1}"#).is_err());
    }

    #[test]
    fn gnuplot_blocks() {
        let rows = vec![
            Fig2Row { v: 0.4, h: 0.2, optimal: 1.0, full_info: 1.0, no_info: 0.0, status: "converged".into() },
            Fig2Row { v: 0.42, h: 0.2, optimal: 1.0, full_info: 1.0, no_info: 0.0, status: "converged".into() },
            Fig2Row { v: 0.4, h: 0.4, optimal: 1.0, full_info: 1.0, no_info: 0.0, status: "converged".into() },
        ];
        let text = render(&rows, Layout::Gnuplot);
        assert_eq!(text.matches("\n\n\n").count(), 1);
        assert!(text.starts_with("# v h optimal"));
        let csv = render(&rows, Layout::Csv);
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().nth(1).unwrap(), "0.4,0.2,1,1,0,converged");
    }

    #[test]
    fn crossover_is_where_values_meet() {
        let g = symmetric_game(4, 0.5, equicorrelated_cov(4, 4.0, 1.0).cov).unwrap();
        let lam = crossover_lambda(&g).unwrap().unwrap();
        let f = blended_f(&g, lam).unwrap();
        let none = evaluate(&f, &no_info_solution(&g).unwrap()).unwrap();
        assert!((full_info_value(&f, &g).unwrap() - none).abs() < 1e-9);
    }

    #[test]
    fn small_sweeps_run() {
        let mut cfg = SweepConfig::new(Experiment::Fig3);
        cfg.h = Some(vec![0.5, -0.2]);
        cfg.lambda = Some(vec![0.0, 1.0]);
        let rows = run_fig3(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].lambda_threshold, Some(1.0 / 3.0));
        assert_eq!(rows[2].lambda_threshold, None);
        assert!(rows.iter().all(|r| r.status == "converged"));
        assert_eq!(render(&rows, Layout::Csv), render(&run_fig3(&cfg).unwrap(), Layout::Csv));
    }
}
