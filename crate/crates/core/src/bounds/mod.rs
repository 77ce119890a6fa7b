//! Both sides of the counting inequalities, the Parseval expansion and its
//! tails, the Borel-Cantelli series, the badness functional, and the
//! non-Salem witness, as structured reports.

mod battery;
mod diophantine;
mod parseval;
mod schedule;
mod series;
mod theorems;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use battery::{run_battery, BatteryCase, BatteryConfig, BatteryOutcome, LinearFormCase, ParsevalCase};
pub use diophantine::{badness, badness_window, non_salem_witness, WITNESS_SLACK};
pub use parseval::{profile_constant, tail_bound_t, verify_parseval, TailBound, PARSEVAL_TOLERANCE};
pub use schedule::{tau_epsilon, tau_prime, Lemma6Schedule, TAU_PRIME_WEIGHT};
pub use series::{
    borel_cantelli_scan, closed_form_exponent, Classification, ScanMode, SeriesReport, INCONCLUSIVE_BAND,
};
pub use theorems::{theorem3_lower, theorem3_upper, theorem5_lower, theorem5_upper, Budget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violated,
    Skipped,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Violated => "violated",
            Verdict::Skipped => "skipped",
        }
    }
}

/// One evaluated inequality: both sides, the tail, and the verdict under the
/// configured constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    /// The `delta^n (1 + S)` part (or its lower-bound analogue).
    pub rhs_main: f64,
    /// The `K^{-N}` or `T` part.
    pub tail: f64,
    /// `lhs / rhs_main` when `rhs_main > 0`.
    pub ratio: Option<f64>,
    pub params: BTreeMap<String, Value>,
    pub verdict: Verdict,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs_main: f64, tail: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs_main,
            tail,
            ratio: (rhs_main > 0.0).then(|| lhs / rhs_main),
            params: BTreeMap::new(),
            verdict: Verdict::Consistent,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn with_verdict(mut self, verdict: Verdict) -> Self {
        self.verdict = verdict;
        self
    }

    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }

    /// Canonical key used to order battery output.
    pub fn sort_key(&self) -> String {
        format!("{}|{}", self.name, Value::Object(self.params.clone().into_iter().collect()))
    }
}

/// Writes reports as RFC-4180 CSV with columns
/// `name,params,lhs,rhs_main,tail,ratio,verdict`.
pub fn reports_to_csv<W: std::io::Write>(reports: &[BoundReport], w: W) -> crate::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["name", "params", "lhs", "rhs_main", "tail", "ratio", "verdict"])?;
    for r in reports {
        let params = serde_json::to_string(&r.params)?;
        wr.write_record([
            r.name.clone(),
            params,
            r.lhs.to_string(),
            r.rhs_main.to_string(),
            r.tail.to_string(),
            r.ratio.map(|x| x.to_string()).unwrap_or_default(),
            r.verdict.as_str().to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
