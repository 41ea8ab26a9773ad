//! Tabulated experiment output and its CSV/JSON encodings.
//!
//! Every batch driver in this crate produces a flat, plottable table with
//! one fixed schema:
//!
//! ```text
//! theorem,r,alpha,beta,x,n,backend,value,target,normalized
//! ```
//!
//! `theorem` labels the experiment family, `backend` names the evaluation
//! strategy that produced the row, `value` is the measured quantity on the
//! extended real line (infinite values appear as the literal `inf`, never
//! as an overflowed float), `target` is the comparison level when the
//! family has one, and `normalized` is the family's reduction of the row —
//! a ratio against the target for convergence series, a log-domain
//! magnitude for tail and witness series, a fitted slope in summary rows.
//! Absent fields are empty in CSV and `null` in JSON.  Writers emit rows
//! in the order given, so identical inputs produce byte-identical output.

use crate::observable::ExtendedReal;

/// One output row in the fixed schema.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    /// Experiment family label (e.g. `3.1`, `3.3a`, `diagnostics`).
    pub theorem: String,
    /// Map parameter the row was computed at.
    pub r: f64,
    /// Singularity power, when the family has one.
    pub alpha: Option<f64>,
    /// Display form of the singularity or expansion (may be empty).
    pub beta: String,
    /// Observation point.
    pub x: f64,
    /// Depth, iterate count, or index of the row.
    pub n: u64,
    /// Evaluation strategy that produced the value.
    pub backend: String,
    /// Measured quantity; infinities are symbolic, not overflowed floats.
    pub value: ExtendedReal,
    /// Comparison level, when the family defines one.
    pub target: Option<f64>,
    /// Family-specific reduction (ratio, log magnitude, or fitted slope).
    pub normalized: Option<f64>,
}

impl SeriesRow {
    /// A row with the always-present fields set and the optional ones
    /// empty.
    #[must_use]
    pub fn new(theorem: &str, r: f64, x: f64, n: u64, backend: &str, value: ExtendedReal) -> Self {
        SeriesRow {
            theorem: theorem.to_owned(),
            r,
            alpha: None,
            beta: String::new(),
            x,
            n,
            backend: backend.to_owned(),
            value,
            target: None,
            normalized: None,
        }
    }

    /// Sets the singularity power.
    #[must_use]
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    /// Sets the singularity / expansion display string.
    #[must_use]
    pub fn with_beta(mut self, beta: &str) -> Self {
        self.beta = beta.to_owned();
        self
    }

    /// Sets the comparison level.
    #[must_use]
    pub fn with_target(mut self, target: f64) -> Self {
        self.target = Some(target);
        self
    }

    /// Sets the family-specific reduction.
    #[must_use]
    pub fn with_normalized(mut self, normalized: f64) -> Self {
        self.normalized = Some(normalized);
        self
    }
}

/// The fixed CSV header.
pub const CSV_HEADER: &str = "theorem,r,alpha,beta,x,n,backend,value,target,normalized";

fn fmt_f64(v: f64) -> String {
    // `{:?}` is the shortest round-trip form and spells infinity `inf`.
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn fmt_value(v: &ExtendedReal) -> String {
    match v {
        ExtendedReal::PosInf => "inf".to_owned(),
        ExtendedReal::Finite(x) => fmt_f64(*x),
    }
}

/// Renders rows as CSV with the fixed header.
#[must_use]
pub fn to_csv(rows: &[SeriesRow]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(CSV_HEADER.split(','))
        .expect("in-memory write cannot fail");
    for row in rows {
        writer
            .write_record([
                row.theorem.as_str(),
                &fmt_f64(row.r),
                &fmt_opt(row.alpha),
                row.beta.as_str(),
                &fmt_f64(row.x),
                &row.n.to_string(),
                row.backend.as_str(),
                &fmt_value(&row.value),
                &fmt_opt(row.target),
                &fmt_opt(row.normalized),
            ])
            .expect("in-memory write cannot fail");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush cannot fail"))
        .expect("csv output is UTF-8")
}

fn json_number(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v)
        .map_or_else(|| serde_json::Value::String("inf".to_owned()), serde_json::Value::Number)
}

fn json_opt(v: Option<f64>) -> serde_json::Value {
    v.map_or(serde_json::Value::Null, json_number)
}

/// Renders rows as a JSON array of objects mirroring the CSV schema;
/// infinite values become the string `"inf"`, absent fields `null`.
#[must_use]
pub fn to_json(rows: &[SeriesRow]) -> String {
    let array: Vec<serde_json::Value> = rows
        .iter()
        .map(|row| {
            serde_json::json!({
                "theorem": row.theorem,
                "r": json_number(row.r),
                "alpha": json_opt(row.alpha),
                "beta": row.beta,
                "x": json_number(row.x),
                "n": row.n,
                "backend": row.backend,
                "value": match &row.value {
                    ExtendedReal::PosInf => serde_json::Value::String("inf".to_owned()),
                    ExtendedReal::Finite(v) => json_number(*v),
                },
                "target": json_opt(row.target),
                "normalized": json_opt(row.normalized),
            })
        })
        .collect();
    serde_json::to_string_pretty(&array).expect("row serialization cannot fail")
}
