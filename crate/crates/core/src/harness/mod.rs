//! Randomized property suites, the projection-field scan and report output.
//!
//! A suite runs `trials` independent trials. Trial `i` draws its instance
//! from the stream `derive_rng(seed, i)`; an instance that turns out
//! degenerate (near-parallel flats, an axis too close to the projection
//! direction, ...) is redrawn from the same stream, up to 100 times, after
//! which the trial is recorded as skipped. Records are assembled in trial
//! order, so reports do not depend on scheduling.

mod report;
mod scan;
mod suites;

use std::collections::BTreeMap;
use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;

use crate::error::{GeomError, Result};
use crate::sampling::derive_rng;

pub use report::{report_csv, scan_csv, scan_json, suite_csv, suite_json, svg_shadow};
pub use scan::{scan_projection_field, AxisReport, ScanOptions, ScanReport, ShadowRecord};
pub use suites::{suite_defaults, SuiteDefaults};

/// Identifiers accepted by [`verify`].
pub const LEMMA_IDS: [&str; 7] = [
    "lemma-3.2",
    "lemma-3.3",
    "lemma-3.4-planarity",
    "lemma-3.4-contrapositive",
    "lemma-3.5",
    "cor-2.2-consistency",
    "thm-4-ellipsoid-criterion",
];

pub const MAX_ATTEMPTS: usize = 100;
/// Largest tolerated fraction of skipped trials.
pub const MAX_SKIPPED_FRACTION: f64 = 0.05;
/// Smallest angle between flats or lines that instance generators accept.
pub const ANGLE_FLOOR_DEG: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Pass,
    Fail,
    Skipped,
}

impl TrialStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrialStatus::Pass => "pass",
            TrialStatus::Fail => "fail",
            TrialStatus::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub lemma_id: String,
    pub trial: usize,
    pub seed: u64,
    pub status: TrialStatus,
    /// Why a trial failed or was skipped.
    pub note: Option<String>,
    pub attempts: usize,
    pub params: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, f64>,
    pub runtime_secs: f64,
}

/// Configuration of one `verify` run.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub trials: usize,
    pub dim: Option<usize>,
    pub seed: u64,
    /// Overrides the suite's main threshold.
    pub tol: Option<f64>,
    /// Direction count for suites that scan several shadows.
    pub dirs: Option<usize>,
    /// Replace one side of the checked identity by a deliberately wrong
    /// value; every trial should then fail.
    pub plant_violation: bool,
}

impl SuiteConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            dim: None,
            seed,
            tol: None,
            dirs: None,
            plant_violation: false,
        }
    }
}

/// Suite-level assertion evaluated over all records.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteCheck {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub lemma_id: String,
    pub config: SuiteConfig,
    /// Thresholds in force, by name.
    pub thresholds: BTreeMap<String, f64>,
    pub records: Vec<TrialRecord>,
    pub checks: Vec<SuiteCheck>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl SuiteReport {
    pub fn skipped_fraction(&self) -> f64 {
        self.skipped as f64 / self.records.len().max(1) as f64
    }

    /// No failures, few enough skips and every suite-level check holds.
    pub fn ok(&self) -> bool {
        self.failed == 0
            && self.skipped_fraction() <= MAX_SKIPPED_FRACTION
            && self.checks.iter().all(|c| c.passed)
    }

    pub fn max_residual(&self, key: &str) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.residuals.get(key).copied())
            .fold(None, |acc, x| Some(acc.map_or(x, |a: f64| a.max(x))))
    }

    pub fn min_residual(&self, key: &str) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.residuals.get(key).copied())
            .fold(None, |acc, x| Some(acc.map_or(x, |a: f64| a.min(x))))
    }
}

/// Outcome of one instance draw.
pub(crate) enum Attempt {
    Done(Outcome),
    /// The drawn instance is outside the suite's validity range.
    Degenerate(String),
}

pub(crate) struct Outcome {
    pub pass: bool,
    pub note: Option<String>,
    pub params: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, f64>,
}

pub(crate) fn run_trials<F>(lemma_id: &str, cfg: &SuiteConfig, trial: F) -> Vec<TrialRecord>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<Attempt> + Sync,
{
    (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let start = Instant::now();
            let mut rng = derive_rng(cfg.seed, i as u64);
            let mut attempts = 0;
            let mut last_reason = String::new();
            let mut record = TrialRecord {
                lemma_id: lemma_id.to_string(),
                trial: i,
                seed: cfg.seed,
                status: TrialStatus::Skipped,
                note: None,
                attempts: 0,
                params: BTreeMap::new(),
                residuals: BTreeMap::new(),
                runtime_secs: 0.0,
            };
            while attempts < MAX_ATTEMPTS {
                attempts += 1;
                match trial(i, &mut rng) {
                    Ok(Attempt::Done(o)) => {
                        record.status = if o.pass {
                            TrialStatus::Pass
                        } else {
                            TrialStatus::Fail
                        };
                        record.note = o.note;
                        record.params = o.params;
                        record.residuals = o.residuals;
                        break;
                    }
                    Ok(Attempt::Degenerate(reason)) => last_reason = reason,
                    Err(e) => {
                        record.status = TrialStatus::Fail;
                        record.note = Some(format!("error: {e}"));
                        break;
                    }
                }
            }
            if record.status == TrialStatus::Skipped {
                record.note = Some(format!("skipped: degenerate ({last_reason})"));
            }
            record.attempts = attempts;
            record.runtime_secs = start.elapsed().as_secs_f64();
            record
        })
        .collect()
}

/// Runs the suite `lemma_id`.
pub fn verify(lemma_id: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    if cfg.trials == 0 {
        return Err(GeomError::InvalidArgument("trials must be at least 1".into()));
    }
    suites::run(lemma_id, cfg)
}

pub(crate) fn finish_report(
    lemma_id: &str,
    cfg: &SuiteConfig,
    thresholds: BTreeMap<String, f64>,
    records: Vec<TrialRecord>,
    checks: Vec<SuiteCheck>,
) -> SuiteReport {
    let count = |s: TrialStatus| records.iter().filter(|r| r.status == s).count();
    SuiteReport {
        lemma_id: lemma_id.to_string(),
        config: cfg.clone(),
        thresholds,
        passed: count(TrialStatus::Pass),
        failed: count(TrialStatus::Fail),
        skipped: count(TrialStatus::Skipped),
        records,
        checks,
    }
}
