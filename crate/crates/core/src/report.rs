//! Result records and output emission.
//!
//! A scenario run produces one [`ResultManifest`]: the fully resolved
//! configuration, every resolved constant, one row per game or check, and
//! optional parameter-sweep series. Emission is a pure function of the
//! manifest, so re-emitting writes byte-identical files. `results.csv`
//! contains nothing non-deterministic; the wall clock lives only in the
//! manifest.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::KvMap;
use crate::error::Result;

/// Floats are printed with 9 significant digits everywhere.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

/// One game or check outcome. For measurement-style checks (mutual
/// information, density ratios, total-variation distances), `lhs` carries
/// the measured value and `rhs` the reference or bound, with zero counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub game: String,
    pub definition: String,
    pub prior: String,
    pub mechanism: String,
    pub attacker: String,
    pub sideinfo: String,
    pub relation: String,
    pub epsilon: f64,
    pub delta: f64,
    pub xi: f64,
    pub trials: u64,
    pub lhs_successes: u64,
    pub lhs: f64,
    pub lhs_lo: f64,
    pub lhs_hi: f64,
    pub rhs_successes: u64,
    pub rhs: f64,
    pub rhs_lo: f64,
    pub rhs_hi: f64,
    pub verdict: String,
    pub expected: String,
    pub met: bool,
}

pub const CSV_HEADER: &str = "scenario,game,definition,prior,mechanism,attacker,sideinfo,relation,epsilon,delta,xi,trials,lhs_successes,lhs,lhs_lo,lhs_hi,rhs_successes,rhs,rhs_lo,rhs_hi,verdict,expected,met";

impl ResultRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.game,
            self.definition,
            self.prior,
            self.mechanism,
            self.attacker,
            self.sideinfo,
            self.relation,
            fmt_float(self.epsilon),
            fmt_float(self.delta),
            fmt_float(self.xi),
            self.trials,
            self.lhs_successes,
            fmt_float(self.lhs),
            fmt_float(self.lhs_lo),
            fmt_float(self.lhs_hi),
            self.rhs_successes,
            fmt_float(self.rhs),
            fmt_float(self.rhs_lo),
            fmt_float(self.rhs_hi),
            self.verdict,
            self.expected,
            self.met
        )
    }
}

/// A plot-ready two-column series produced by a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFile {
    /// File stem: written as `series-<name>.csv`.
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

impl SeriesFile {
    fn to_csv(&self) -> String {
        let mut out = format!("{},{}\n", self.x_label, self.y_label);
        for (x, y) in &self.points {
            out.push_str(&format!("{},{}\n", fmt_float(*x), fmt_float(*y)));
        }
        out
    }
}

/// Everything a scenario run resolved and measured.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultManifest {
    pub artifact_version: String,
    pub wall_clock_ms: u128,
    /// The resolved run configuration (scenario, seed, trials, workers,
    /// label, and every scenario parameter as a `set.` entry). Feeding this
    /// back through `--config` reproduces identical counts.
    pub config: KvMap,
    /// Resolved constants the definitions leave as knobs (gamma_hat, xi,
    /// eps_hat, c_delta, derived bounds).
    pub resolved: KvMap,
    pub rows: Vec<ResultRow>,
    pub series: Vec<SeriesFile>,
}

impl ResultManifest {
    pub fn all_met(&self) -> bool {
        self.rows.iter().all(|r| r.met)
    }

    /// The manifest text: same grammar as config files.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("manifest.version = 1\n");
        out.push_str(&format!("manifest.artifact = reconlab {}\n", self.artifact_version));
        out.push_str(&format!("manifest.wall_clock_ms = {}\n", self.wall_clock_ms));
        for (k, v) in &self.config {
            out.push_str(&format!("config.{k} = {v}\n"));
        }
        for (k, v) in &self.resolved {
            out.push_str(&format!("param.{k} = {v}\n"));
        }
        for row in &self.rows {
            let g = &row.game;
            out.push_str(&format!("result.{g}.definition = {}\n", row.definition));
            out.push_str(&format!("result.{g}.trials = {}\n", row.trials));
            out.push_str(&format!("result.{g}.lhs_successes = {}\n", row.lhs_successes));
            out.push_str(&format!("result.{g}.lhs = {}\n", fmt_float(row.lhs)));
            out.push_str(&format!(
                "result.{g}.lhs_ci = {} {}\n",
                fmt_float(row.lhs_lo),
                fmt_float(row.lhs_hi)
            ));
            out.push_str(&format!("result.{g}.rhs_successes = {}\n", row.rhs_successes));
            out.push_str(&format!("result.{g}.rhs = {}\n", fmt_float(row.rhs)));
            out.push_str(&format!(
                "result.{g}.rhs_ci = {} {}\n",
                fmt_float(row.rhs_lo),
                fmt_float(row.rhs_hi)
            ));
            out.push_str(&format!("result.{g}.verdict = {}\n", row.verdict));
            out.push_str(&format!("result.{g}.expected = {}\n", row.expected));
            out.push_str(&format!("result.{g}.met = {}\n", row.met));
        }
        out.push_str(&format!("expectations.met = {}\n", self.all_met()));
        out
    }

    pub fn results_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        out
    }

    /// Write manifest, results.csv, and any series files under `dir`.
    /// Returns the written paths.
    pub fn emit(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let manifest_path = dir.join("manifest");
        fs::write(&manifest_path, self.to_text())?;
        written.push(manifest_path);
        let csv_path = dir.join("results.csv");
        fs::write(&csv_path, self.results_csv())?;
        written.push(csv_path);
        for series in &self.series {
            let path = dir.join(format!("series-{}.csv", series.name));
            fs::write(&path, series.to_csv())?;
            written.push(path);
        }
        Ok(written)
    }
}
