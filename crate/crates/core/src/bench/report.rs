//! Report rows and their CSV and JSON renderings.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::rational_text;
use crate::Rational;

/// How a number was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    LowerBound,
    UpperBound,
    /// A search stopped before certifying optimality.
    NonCertified,
    MonteCarlo,
    /// The computation hit a cap; the value cell holds the reason.
    Budget,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Exact => "exact",
            Provenance::LowerBound => "lower-bound",
            Provenance::UpperBound => "upper-bound",
            Provenance::NonCertified => "non-certified",
            Provenance::MonteCarlo => "monte-carlo",
            Provenance::Budget => "budget",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub instance: String,
    pub quantity: String,
    pub value: String,
    pub provenance: Provenance,
    /// Standard error, for Monte Carlo values.
    pub sigma: String,
}

impl Row {
    pub fn new(
        experiment: &str,
        instance: impl Into<String>,
        quantity: impl Into<String>,
        value: impl Into<String>,
        provenance: Provenance,
    ) -> Self {
        Row {
            experiment: experiment.to_string(),
            instance: instance.into(),
            quantity: quantity.into(),
            value: value.into(),
            provenance,
            sigma: String::new(),
        }
    }

    pub fn exact(experiment: &str, instance: impl Into<String>, quantity: impl Into<String>, v: &Rational) -> Self {
        Row::new(experiment, instance, quantity, rational_text(v), Provenance::Exact)
    }

    pub fn count(
        experiment: &str,
        instance: impl Into<String>,
        quantity: impl Into<String>,
        v: impl fmt::Display,
    ) -> Self {
        Row::new(experiment, instance, quantity, v.to_string(), Provenance::Exact)
    }

    pub fn monte_carlo(
        experiment: &str,
        instance: impl Into<String>,
        quantity: impl Into<String>,
        v: f64,
        sigma: f64,
    ) -> Self {
        Row {
            sigma: significant(sigma),
            ..Row::new(experiment, instance, quantity, significant(v), Provenance::MonteCarlo)
        }
    }
}

/// `x` with six significant digits.
pub fn significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = 5 - x.abs().log10().floor() as i32;
    format!("{:.*}", digits.max(0) as usize, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

pub fn render(rows: &[Row], format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| Error::Defect(e.to_string()))?;
            }
            if rows.is_empty() {
                w.write_record(["experiment", "instance", "quantity", "value", "provenance", "sigma"])
                    .map_err(|e| Error::Defect(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Defect(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Defect(e.to_string()))
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                rows: &'a [Row],
            }
            let mut s = serde_json::to_string_pretty(&Doc { rows }).map_err(|e| Error::Defect(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}
