//! Check reports: per-condition residual summaries and their JSON form.

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::Result;

/// Default residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default sample count.
pub const DEFAULT_SAMPLES: usize = 64;
/// Default seed.
pub const DEFAULT_SEED: u64 = 0xD1CE;

/// Sampling parameters shared by every check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { samples: DEFAULT_SAMPLES, seed: DEFAULT_SEED, tol: DEFAULT_TOL }
    }
}

impl Settings {
    pub fn new(samples: usize, seed: u64, tol: f64) -> Self {
        Settings { samples, seed, tol }
    }

    pub fn with_samples(self, samples: usize) -> Self {
        Settings { samples, ..self }
    }

    pub fn with_tol(self, tol: f64) -> Self {
        Settings { tol, ..self }
    }

    /// A derived seed for an independent sampling stream.
    pub fn stream(&self, salt: u64) -> u64 {
        self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

fn null_as_infinity<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub id: String,
    pub paper_tag: String,
    /// Non-finite values serialize as `null`.
    #[serde(deserialize_with = "null_as_infinity")]
    pub max_residual: f64,
    pub verdict: Verdict,
    pub samples: usize,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckEntry {
    pub fn new(id: impl Into<String>, tag: impl Into<String>, max_residual: f64, samples: usize, tol: f64) -> Self {
        let verdict = if max_residual <= tol { Verdict::Pass } else { Verdict::Fail };
        CheckEntry { id: id.into(), paper_tag: tag.into(), max_residual, verdict, samples, tolerance: tol, note: None }
    }

    /// A failing entry for a condition that could not be evaluated.
    pub fn error(id: impl Into<String>, tag: impl Into<String>, err: &crate::Error, tol: f64) -> Self {
        CheckEntry::new(id, tag, f64::INFINITY, 0, tol).with_note(err.to_string())
    }

    /// Entry from a pass/fail predicate (residual 0 or 1).
    pub fn boolean(id: impl Into<String>, tag: impl Into<String>, ok: bool, samples: usize, tol: f64) -> Self {
        CheckEntry::new(id, tag, if ok { 0.0 } else { 1.0 }, samples, tol)
    }

    pub fn from_eval(id: impl Into<String>, tag: impl Into<String>, eval: Evaluated, tol: f64) -> Self {
        let e = CheckEntry::new(id, tag, eval.max, eval.samples, tol);
        match eval.error {
            Some(msg) => e.with_note(msg),
            None => e,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// The maximum of a per-sample residual, and the first evaluation error.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub max: f64,
    pub samples: usize,
    pub error: Option<String>,
}

impl Evaluated {
    pub fn merge(self, o: Evaluated) -> Evaluated {
        Evaluated { max: self.max.max(o.max), samples: self.samples.max(o.samples), error: self.error.or(o.error) }
    }
}

/// Evaluates `f` at every item in parallel and reduces in index order.
///
/// An error or NaN at any item makes the maximum infinite.
pub fn max_residual_over<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<f64> + Sync) -> Evaluated {
    let vals: Vec<Result<f64>> = items.par_iter().map(&f).collect();
    let mut max: f64 = 0.0;
    let mut error = None;
    for v in vals {
        match v {
            Ok(r) if r.is_nan() => max = f64::INFINITY,
            Ok(r) => max = max.max(r),
            Err(e) => {
                max = f64::INFINITY;
                error.get_or_insert_with(|| e.to_string());
            }
        }
    }
    Evaluated { max, samples: items.len(), error }
}

/// An evaluation whose sampling itself failed.
pub fn failed_eval(err: &crate::Error) -> Evaluated {
    Evaluated { max: f64::INFINITY, samples: 0, error: Some(err.to_string()) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
    pub entries: Vec<CheckEntry>,
    pub elapsed_ms: u64,
}

impl CheckReport {
    pub fn new(suite: impl Into<String>, settings: &Settings) -> Self {
        CheckReport {
            suite: suite.into(),
            seed: settings.seed,
            samples: settings.samples,
            tolerance: settings.tol,
            entries: Vec::new(),
            elapsed_ms: 0,
        }
    }

    pub fn push(&mut self, e: CheckEntry) {
        self.entries.push(e);
    }

    pub fn extend(&mut self, es: impl IntoIterator<Item = CheckEntry>) {
        self.entries.extend(es);
    }

    /// Sorts entries by id; reports are compared in this form.
    pub fn finish(mut self) -> Self {
        self.entries.sort_by(|a, b| a.id.cmp(&b.id));
        self
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(CheckEntry::passed)
    }

    pub fn entry(&self, id: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.passed())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| crate::Error::Definition(format!("report JSON: {e}")))
    }
}
