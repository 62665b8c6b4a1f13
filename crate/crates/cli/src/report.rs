//! Report records and their JSON, CSV and text renderings.
//!
//! Computed numbers are carried as decimal strings so a report reads the same
//! whatever arithmetic produced it.

use std::fmt::Write as _;

use kgamma::certifier::{Certificate, ClaimId, GridSpec, VerdictCounts, Witness};
use kgamma::identities::{IdentityInputs, IdentityOutcome};
use kgamma::{Backend, Error, EvalResult};
use serde::{Deserialize, Serialize};

use crate::args::{Format, Function};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

/// Echo of the validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub selectors: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub order: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rmax: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub include_r0: bool,
    pub backend: Backend,
    pub target_digits: u32,
    pub working_digits: u32,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueRecord {
    pub value: String,
    pub abs_error_bound: String,
    pub backend: Backend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub function: Function,
    pub x: f64,
    pub k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    pub value: String,
    pub abs_error_bound: String,
    pub backend: Backend,
    pub digits_requested: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRecord {
    pub identity_id: String,
    pub inputs: IdentityInputs,
    pub lhs: ValueRecord,
    pub rhs: ValueRecord,
    pub residual: String,
    pub threshold: String,
    pub pass: bool,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub x: f64,
    pub value: String,
    pub error_bound: String,
    pub margin: String,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub claim_id: String,
    pub statement: String,
    pub k: f64,
    pub m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    pub grid: GridSpec,
    pub verdict: String,
    pub witnesses: Vec<WitnessRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weakest: Option<WitnessRecord>,
    pub stats: VerdictCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub error_kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Evaluation(EvalRecord),
    Identity(IdentityRecord),
    Certificate(CertificateRecord),
    Error(ErrorRecord),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub indeterminate: usize,
}

/// Verdict totals for one (claim, k, m) combination of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Combination {
    pub claim_id: String,
    pub k: f64,
    pub m: u32,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub timestamp: String,
    pub config: Option<RunConfig>,
    pub results: Vec<Record>,
    pub summary: Summary,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub combinations: Vec<Combination>,
}

pub fn fmt_bound(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn value_record(r: &EvalResult, digits: u32) -> ValueRecord {
    ValueRecord {
        value: r.value.to_decimal(digits),
        abs_error_bound: fmt_bound(r.abs_error_bound),
        backend: r.backend,
    }
}

pub fn identity_record(o: &IdentityOutcome, digits: u32) -> IdentityRecord {
    IdentityRecord {
        identity_id: o.identity_id.name().to_string(),
        inputs: o.inputs,
        lhs: value_record(&o.lhs, digits),
        rhs: value_record(&o.rhs, digits),
        residual: o.residual.to_decimal(digits),
        threshold: fmt_bound(o.threshold),
        pass: o.pass,
        verdict: if o.pass { "PASS" } else { "FAIL" }.to_string(),
    }
}

fn witness_record(w: &Witness, digits: u32) -> WitnessRecord {
    WitnessRecord {
        x: w.x,
        value: w.value.to_decimal(digits),
        error_bound: fmt_bound(w.error_bound),
        margin: fmt_bound(w.margin),
        verdict: w.verdict.name().to_string(),
    }
}

pub fn certificate_record(c: &Certificate, digits: u32) -> CertificateRecord {
    CertificateRecord {
        claim_id: c.claim_id.id().to_string(),
        statement: c.claim_id.statement().to_string(),
        k: c.params.k,
        m: c.params.m,
        order: c.order,
        grid: c.grid.clone(),
        verdict: c.verdict.name().to_string(),
        witnesses: c
            .witnesses
            .iter()
            .map(|w| witness_record(w, digits))
            .collect(),
        weakest: c.weakest.as_ref().map(|w| witness_record(w, digits)),
        stats: c.stats,
    }
}

pub fn error_record(e: &Error) -> ErrorRecord {
    let kind = match e {
        Error::Domain { .. } => "domain",
        Error::Order { .. } => "order",
        Error::Overflow { .. } => "overflow",
        Error::Convergence { .. } => "convergence",
        Error::Stencil { .. } => "stencil",
        Error::GridDomain { .. } => "grid_domain",
        Error::Config(_) => "usage",
    };
    ErrorRecord {
        error_kind: kind.to_string(),
        message: e.to_string(),
    }
}

impl Record {
    pub fn verdict(&self) -> Option<&str> {
        match self {
            Record::Identity(r) => Some(&r.verdict),
            Record::Certificate(r) => Some(&r.verdict),
            Record::Evaluation(_) | Record::Error(_) => None,
        }
    }
}

fn inputs_text(i: &IdentityInputs) -> String {
    let mut parts = Vec::new();
    if let Some(r) = i.r {
        parts.push(format!("r={r}"));
    }
    if let Some(n) = i.n {
        parts.push(format!("n={n}"));
    }
    if let Some(x) = i.x {
        parts.push(format!("x={x}"));
    }
    if let Some(t) = i.t {
        parts.push(format!("t={t}"));
    }
    if let Some(k) = i.k {
        parts.push(format!("k={k}"));
    }
    if let Some(m) = i.m {
        parts.push(format!("m={m}"));
    }
    parts.join(", ")
}

pub fn summarize(results: &[Record]) -> Summary {
    let mut s = Summary::default();
    for r in results {
        match r.verdict() {
            Some("PASS") => s.pass += 1,
            Some("FAIL") => s.fail += 1,
            Some(_) => s.indeterminate += 1,
            None => {}
        }
    }
    s
}

/// 3 if any record is an error, else 1 on any FAIL, 2 on any INDETERMINATE, 0.
pub fn exit_code(results: &[Record], summary: &Summary) -> i32 {
    if results.iter().any(|r| matches!(r, Record::Error(_))) {
        EXIT_USAGE
    } else if summary.fail > 0 {
        EXIT_FAIL
    } else if summary.indeterminate > 0 {
        EXIT_INDETERMINATE
    } else {
        EXIT_PASS
    }
}

impl Report {
    pub fn new(
        config: Option<RunConfig>,
        results: Vec<Record>,
        combinations: Vec<Combination>,
    ) -> Self {
        let summary = summarize(&results);
        let exit_code = exit_code(&results, &summary);
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config,
            results,
            summary,
            exit_code,
            combinations,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => self.to_csv(),
            Format::Text => self.to_text(),
        }
    }

    /// One row per evaluation, identity, certificate and witness.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "kind",
            "id",
            "k",
            "m",
            "order",
            "x",
            "value",
            "error_bound",
            "threshold",
            "verdict",
        ])
        .expect("in-memory write");
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.results {
            match r {
                Record::Evaluation(e) => w.write_record([
                    "evaluation".to_string(),
                    e.function.name().to_string(),
                    e.k.to_string(),
                    opt(e.m.map(|v| v.to_string())),
                    opt(e.order.map(|v| v.to_string())),
                    e.x.to_string(),
                    e.value.clone(),
                    e.abs_error_bound.clone(),
                    String::new(),
                    String::new(),
                ]),
                Record::Identity(i) => {
                    let order = i.inputs.r.or(i.inputs.n);
                    let x = i.inputs.x.or(i.inputs.t);
                    w.write_record([
                        "identity".to_string(),
                        i.identity_id.clone(),
                        opt(i.inputs.k.map(|v| v.to_string())),
                        opt(i.inputs.m.map(|v| v.to_string())),
                        opt(order.map(|v| v.to_string())),
                        opt(x.map(|v| v.to_string())),
                        i.residual.clone(),
                        String::new(),
                        i.threshold.clone(),
                        i.verdict.clone(),
                    ])
                }
                Record::Certificate(c) => {
                    let order = opt(c.order.map(|v| v.to_string()));
                    let weakest = c.weakest.as_ref();
                    w.write_record([
                        "certificate".to_string(),
                        c.claim_id.clone(),
                        c.k.to_string(),
                        c.m.to_string(),
                        order.clone(),
                        opt(weakest.map(|w| w.x.to_string())),
                        opt(weakest.map(|w| w.value.clone())),
                        opt(weakest.map(|w| w.error_bound.clone())),
                        String::new(),
                        c.verdict.clone(),
                    ])
                    .expect("in-memory write");
                    for wit in &c.witnesses {
                        w.write_record([
                            "witness".to_string(),
                            c.claim_id.clone(),
                            c.k.to_string(),
                            c.m.to_string(),
                            order.clone(),
                            wit.x.to_string(),
                            wit.value.clone(),
                            wit.error_bound.clone(),
                            String::new(),
                            wit.verdict.clone(),
                        ])
                        .expect("in-memory write");
                    }
                    Ok(())
                }
                Record::Error(e) => w.write_record([
                    "error",
                    &e.error_kind,
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    &e.message,
                ]),
            }
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.results {
            match r {
                Record::Evaluation(e) => {
                    let m = e.m.map(|m| format!(", m={m}")).unwrap_or_default();
                    let order = e.order.map(|r| format!(", r={r}")).unwrap_or_default();
                    let _ = writeln!(
                        s,
                        "{}(x={}, k={}{m}{order}) = {} ± {} [{}]",
                        e.function.name(),
                        e.x,
                        e.k,
                        e.value,
                        e.abs_error_bound,
                        e.backend
                    );
                }
                Record::Identity(i) => {
                    let _ = writeln!(
                        s,
                        "{}({}): residual {} (threshold {}) {}",
                        i.identity_id,
                        inputs_text(&i.inputs),
                        i.residual,
                        i.threshold,
                        i.verdict
                    );
                }
                Record::Certificate(c) => {
                    let lemma = c.claim_id == ClaimId::Lemma3.id();
                    let params = match c.order {
                        Some(n) if lemma => format!("n={n}"),
                        Some(r) => format!("k={} m={} r={r}", c.k, c.m),
                        None => format!("k={} m={}", c.k, c.m),
                    };
                    let _ = writeln!(
                        s,
                        "{} {}: {} ({} pass, {} fail, {} indeterminate, {} retried)",
                        c.claim_id,
                        params,
                        c.verdict,
                        c.stats.pass,
                        c.stats.fail,
                        c.stats.indeterminate,
                        c.stats.retried
                    );
                    let var = if lemma { "t" } else { "x" };
                    for w in c.witnesses.iter().take(5) {
                        let _ = writeln!(
                            s,
                            "    {var}={} value={} bound={} {}",
                            w.x, w.value, w.error_bound, w.verdict
                        );
                    }
                    if c.witnesses.len() > 5 {
                        let _ = writeln!(s, "    ... {} more witnesses", c.witnesses.len() - 5);
                    }
                }
                Record::Error(e) => {
                    let _ = writeln!(s, "error ({}): {}", e.error_kind, e.message);
                }
            }
        }
        let _ = writeln!(
            s,
            "summary: {} pass, {} fail, {} indeterminate; exit {}",
            self.summary.pass, self.summary.fail, self.summary.indeterminate, self.exit_code
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cert(verdict: &str) -> Record {
        Record::Certificate(CertificateRecord {
            claim_id: "COR2".into(),
            statement: String::new(),
            k: 1.0,
            m: 2,
            order: None,
            grid: GridSpec::default(),
            verdict: verdict.into(),
            witnesses: Vec::new(),
            weakest: None,
            stats: VerdictCounts::default(),
        })
    }

    #[test]
    fn exit_codes_follow_summary() {
        let r = Report::new(None, vec![cert("PASS"), cert("PASS")], Vec::new());
        assert_eq!(r.exit_code, EXIT_PASS);
        let r = Report::new(None, vec![cert("PASS"), cert("INDETERMINATE")], Vec::new());
        assert_eq!(r.exit_code, EXIT_INDETERMINATE);
        let r = Report::new(
            None,
            vec![cert("FAIL"), cert("INDETERMINATE"), cert("PASS")],
            Vec::new(),
        );
        assert_eq!(r.exit_code, EXIT_FAIL);
        assert_eq!(
            r.summary,
            Summary {
                pass: 1,
                fail: 1,
                indeterminate: 1
            }
        );
        let err = Record::Error(ErrorRecord {
            error_kind: "domain".into(),
            message: String::new(),
        });
        let r = Report::new(None, vec![cert("FAIL"), err], Vec::new());
        assert_eq!(r.exit_code, EXIT_USAGE);
    }

    #[test]
    fn bound_formatting() {
        assert_eq!(fmt_bound(1.5e-30), "1.500000e-30");
        assert_eq!(fmt_bound(f64::INFINITY), "inf");
        assert_eq!(fmt_bound(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn json_round_trip() {
        let r = Report::new(None, vec![cert("FAIL")], Vec::new());
        let s = r.render(Format::Json);
        let back: Report = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
