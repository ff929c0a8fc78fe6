//! Verification outcomes and the flat report schema shared by the CLI and the
//! acceptance suite.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSpec;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    ReportOnly,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::ReportOnly => "report-only",
        })
    }
}

/// Everything needed to rebuild and re-evaluate one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub check: String,
    pub p: u32,
    pub m: u32,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub encodings: BTreeMap<String, String>,
    pub detail: String,
}

impl Witness {
    pub fn new(check: &str, field: &FieldSpec, n: Option<usize>, seed: Option<u64>) -> Self {
        Witness {
            check: check.to_string(),
            p: field.characteristic(),
            m: field.degree(),
            n,
            seed,
            encodings: BTreeMap::new(),
            detail: String::new(),
        }
    }

    pub fn put(&mut self, key: &str, value: impl Into<String>) {
        self.encodings.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.encodings
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Parse(format!("witness for {} lacks {key:?}", self.check)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

/// Outcome of checking one inequality or identity over a batch of instances.
///
/// `worst_ratio` is the largest observed `lhs / bound` (or error measure). A
/// failing report carries the first failing instance as its witness;
/// otherwise the witness, if any, is the instance attaining `worst_ratio`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub instances: Vec<String>,
    pub verdict: Verdict,
    pub worst_ratio: f64,
    pub checked: u64,
    pub metrics: Vec<Metric>,
    pub witness: Option<Witness>,
    #[serde(skip)]
    failed: bool,
    #[serde(skip)]
    worst_witness: Option<Witness>,
}

impl LemmaReport {
    pub fn new(lemma: &str) -> Self {
        LemmaReport {
            lemma: lemma.to_string(),
            instances: Vec::new(),
            verdict: Verdict::Pass,
            worst_ratio: 0.0,
            checked: 0,
            metrics: Vec::new(),
            witness: None,
            failed: false,
            worst_witness: None,
        }
    }

    /// Records one instance. `witness` is built only when the instance
    /// becomes the worst seen or the first failure.
    pub fn observe(&mut self, ratio: f64, holds: bool, witness: impl FnOnce() -> Witness) {
        let first = self.checked == 0;
        self.checked += 1;
        let new_failure = !holds && !self.failed;
        let new_worst = first || ratio > self.worst_ratio;
        if new_worst {
            self.worst_ratio = ratio;
        }
        if !(new_failure || (new_worst && !self.failed)) {
            return;
        }
        let w = witness();
        if new_failure {
            self.failed = true;
            self.witness = Some(w);
        } else {
            self.worst_witness = Some(w);
        }
    }

    pub fn has_failed(&self) -> bool {
        self.failed
    }

    /// Settles the verdict: any failure means `Fail`; otherwise `Pass` when
    /// the bound is asserted and `ReportOnly` when it is not.
    pub fn finish(&mut self, asserted: bool) {
        self.verdict = if self.failed {
            Verdict::Fail
        } else if asserted {
            Verdict::Pass
        } else {
            Verdict::ReportOnly
        };
        if !self.failed {
            self.witness = self.worst_witness.take();
        }
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.push(Metric { name: name.to_string(), value });
    }

    pub fn metric_value(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }

    pub fn rows(&self, ctx: &RowContext) -> Vec<ReportRow> {
        let mut rows = vec![
            ctx.row("checked", self.checked as f64, self.verdict),
            ctx.row("worst_ratio", self.worst_ratio, self.verdict),
        ];
        rows.extend(self.metrics.iter().map(|m| ctx.row(&m.name, m.value, self.verdict)));
        rows
    }
}

/// One line of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub command: String,
    pub p: Option<u32>,
    pub m: Option<u32>,
    pub n: Option<usize>,
    pub exponent_p: Option<String>,
    pub exponent_q: Option<String>,
    pub strategy: Option<String>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub metric_name: String,
    pub metric_value: f64,
    pub verdict: Verdict,
}

/// The columns shared by every row of one run.
#[derive(Clone, Debug, Default)]
pub struct RowContext {
    pub command: String,
    pub p: Option<u32>,
    pub m: Option<u32>,
    pub n: Option<usize>,
    pub exponent_p: Option<String>,
    pub exponent_q: Option<String>,
    pub strategy: Option<String>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
}

impl RowContext {
    pub fn new(command: &str) -> Self {
        RowContext { command: command.to_string(), ..Default::default() }
    }

    pub fn row(&self, metric: &str, value: f64, verdict: Verdict) -> ReportRow {
        ReportRow {
            command: self.command.clone(),
            p: self.p,
            m: self.m,
            n: self.n,
            exponent_p: self.exponent_p.clone(),
            exponent_q: self.exponent_q.clone(),
            strategy: self.strategy.clone(),
            seed: self.seed,
            budget: self.budget,
            metric_name: metric.to_string(),
            metric_value: value,
            verdict,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Parse(format!("unknown format {other:?}"))),
        }
    }
}

/// Rows plus an optional witness.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub witness: Option<Witness>,
}

impl Report {
    pub fn verdict(&self) -> Verdict {
        if self.rows.iter().any(|r| r.verdict == Verdict::Fail) {
            Verdict::Fail
        } else if self.rows.iter().all(|r| r.verdict == Verdict::ReportOnly) && !self.rows.is_empty() {
            Verdict::ReportOnly
        } else {
            Verdict::Pass
        }
    }

    pub fn extend(&mut self, report: &LemmaReport, ctx: &RowContext) {
        let failing_before = self.verdict() == Verdict::Fail;
        self.rows.extend(report.rows(ctx));
        if let Some(w) = &report.witness {
            if self.witness.is_none() || (report.verdict == Verdict::Fail && !failing_before) {
                self.witness = Some(w.clone());
            }
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record([
                "command",
                "p",
                "m",
                "n",
                "exponent_p",
                "exponent_q",
                "strategy",
                "seed",
                "budget",
                "metric_name",
                "metric_value",
                "verdict",
            ])
            .map_err(|e| Error::Parse(e.to_string()))?;
        }
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::Parse(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => Ok(self.to_json()),
        }
    }
}
