//! Line-delimited file formats shared by the command-line tool.
//!
//! Observation files start with a header line naming the format, version and
//! factor columns, followed by one JSON record per observation:
//!
//! ```text
//! {"format":"charconv-observations","version":1,"columns":["s_self","s_other","conf_mass"]}
//! {"rows":[[0.3742,1.0,0.784],[0.3536,0.7919,-0.98]],"chosen":0}
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::{ScoredMove, ScoredMoveSpace};
use crate::estimate::{EstimateError, FitResult, Observation};

pub const OBSERVATION_FORMAT: &str = "charconv-observations";
pub const OBSERVATION_VERSION: u32 = 1;
pub const FACTOR_COLUMNS: [&str; 3] = ["s_self", "s_other", "conf_mass"];

#[derive(Debug, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl FormatError {
    fn new(line: usize, message: impl ToString) -> Self {
        Self {
            line,
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservationHeader {
    format: String,
    version: u32,
    columns: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservationRecord {
    rows: Vec<[f64; 3]>,
    chosen: usize,
}

pub fn write_observations(observations: &[Observation]) -> String {
    let header = ObservationHeader {
        format: OBSERVATION_FORMAT.into(),
        version: OBSERVATION_VERSION,
        columns: FACTOR_COLUMNS.map(String::from).to_vec(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for o in observations {
        let record = ObservationRecord {
            rows: o.factors().iter().map(|f| f.as_array()).collect(),
            chosen: o.chosen(),
        };
        out.push_str(&serde_json::to_string(&record).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn read_observations(text: &str) -> Result<Vec<Observation>, FormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (i, first) = lines
        .next()
        .ok_or_else(|| FormatError::new(1, "missing header line"))?;
    let header: ObservationHeader = serde_json::from_str(first).map_err(|e| FormatError::new(i + 1, e))?;
    if header.format != OBSERVATION_FORMAT {
        return Err(FormatError::new(
            i + 1,
            format!("unknown format `{}`", header.format),
        ));
    }
    if header.version != OBSERVATION_VERSION {
        return Err(FormatError::new(
            i + 1,
            format!("unsupported version {}", header.version),
        ));
    }
    if header.columns != FACTOR_COLUMNS {
        return Err(FormatError::new(
            i + 1,
            format!("columns must be {FACTOR_COLUMNS:?}, got {:?}", header.columns),
        ));
    }
    lines
        .map(|(i, line)| {
            let record: ObservationRecord =
                serde_json::from_str(line).map_err(|e| FormatError::new(i + 1, e))?;
            let factors = record.rows.into_iter().map(Into::into).collect();
            Observation::new(factors, record.chosen).map_err(|e: EstimateError| FormatError::new(i + 1, e))
        })
        .collect()
}

/// One JSON line per scored move, in move order.
pub fn write_scored_space(space: &ScoredMoveSpace) -> String {
    let mut out = String::new();
    for entry in space.entries() {
        out.push_str(&serde_json::to_string(entry).expect("scored move serializes"));
        out.push('\n');
    }
    out
}

pub fn read_scored_space(text: &str) -> Result<ScoredMoveSpace, FormatError> {
    let mut moves = Vec::new();
    let mut factors = Vec::new();
    let mut scores = Vec::new();
    let mut probabilities = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let entry: ScoredMove = serde_json::from_str(line).map_err(|e| FormatError::new(i + 1, e))?;
        moves.push(entry.candidate);
        factors.push(entry.factors);
        scores.push(entry.rho);
        probabilities.push(entry.probability);
    }
    let space = ScoredMoveSpace::from_scores(moves, factors, scores).map_err(|e| FormatError::new(1, e))?;
    // Probabilities are recomputed from the scores; a file whose probability
    // column disagrees was not produced by this tool.
    for (i, (a, b)) in space.probabilities().iter().zip(&probabilities).enumerate() {
        if a.to_bits() != b.to_bits() {
            return Err(FormatError::new(
                i + 1,
                "probability does not match the softmax of the scores",
            ));
        }
    }
    Ok(space)
}

pub fn write_fit_result(fit: &FitResult) -> String {
    let mut out = serde_json::to_string(fit).expect("fit result serializes");
    out.push('\n');
    out
}

pub fn read_fit_result(text: &str) -> Result<FitResult, FormatError> {
    serde_json::from_str(text.trim()).map_err(|e| FormatError::new(1, e))
}
