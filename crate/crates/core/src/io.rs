//! Text formats: headerless CSV for rate matrices, JSON for solutions.

use crate::error::{Error, Result};
use crate::model::{Allocation, PfSolution, RateMatrix, Weights};

/// Parses `U` lines of `S` comma-separated decimal rates. Blank lines are ignored.
pub fn parse_rate_csv(text: &str) -> Result<RateMatrix> {
    let mut rows = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|field| {
                field.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!("line {}: cannot parse {:?} as a rate", line_no + 1, field.trim()))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("rate matrix file is empty".into()));
    }
    RateMatrix::new(&rows)
}

pub fn format_rate_csv(rates: &RateMatrix) -> String {
    let mut out = String::new();
    for row in rates.to_rows() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn solution_to_json(solution: &PfSolution) -> String {
    serde_json::to_string_pretty(solution).expect("solution serializes")
}

/// Reads an allocation from either a bare `U x S` array or an object with
/// an `"allocation"` key (such as a serialized [`PfSolution`]).
pub fn parse_allocation_json(text: &str) -> Result<Allocation> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("allocation JSON: {e}")))?;
    let table = match value {
        serde_json::Value::Object(mut map) => map
            .remove("allocation")
            .ok_or_else(|| Error::Parse("allocation JSON has no \"allocation\" key".into()))?,
        other => other,
    };
    let rows: Vec<Vec<f64>> = serde_json::from_value(table)
        .map_err(|e| Error::Parse(format!("allocation must be an array of rows: {e}")))?;
    Allocation::new(&rows)
}

/// Reads weights from a JSON array, or an object with a `"weights"` key.
pub fn parse_weights_json(text: &str) -> Result<Weights> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("weights JSON: {e}")))?;
    let list = match value {
        serde_json::Value::Object(mut map) => map
            .remove("weights")
            .ok_or_else(|| Error::Parse("weights JSON has no \"weights\" key".into()))?,
        other => other,
    };
    let values: Vec<f64> = serde_json::from_value(list)
        .map_err(|e| Error::Parse(format!("weights must be an array of numbers: {e}")))?;
    Weights::new(values)
}
