//! Problem files.
//!
//! A problem file is a JSON document:
//!
//! ```json
//! {
//!   "bids": [
//!     { "id": 0, "label": "Italian", "utility": 0.5, "acceptance_probability": 0.4 },
//!     { "utility": 0.9, "acceptance_probability": 0.2 }
//!   ],
//!   "reservation_value": 0.2,
//!   "deadline": 3
//! }
//! ```
//!
//! `id` and `label` are optional; a missing id becomes the bid's array index.
//! Numbers are written in their shortest round-trip form (at most 17
//! significant digits), so writing and re-reading a problem is lossless.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{validate_domain, Bid, BidId, DomainError, PlanningProblem};

#[derive(Debug, Error)]
pub enum ProblemFileError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid problem: {0}")]
    Invalid(#[from] DomainError),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BidRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<BidId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    utility: f64,
    acceptance_probability: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemRecord {
    bids: Vec<BidRecord>,
    reservation_value: f64,
    deadline: usize,
}

pub fn parse_problem_str(text: &str) -> Result<PlanningProblem, ProblemFileError> {
    let record: ProblemRecord = serde_json::from_str(text).map_err(|e| ProblemFileError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let bids = record
        .bids
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            let id = match b.id {
                Some(id) => id,
                None => BidId::try_from(i).map_err(|_| ProblemFileError::Parse {
                    line: 0,
                    column: 0,
                    message: format!("bid index {i} does not fit in an id"),
                })?,
            };
            Ok(Bid {
                id,
                label: b.label,
                utility: b.utility,
                acceptance_probability: b.acceptance_probability,
            })
        })
        .collect::<Result<Vec<_>, ProblemFileError>>()?;
    let domain = validate_domain(bids)?;
    Ok(PlanningProblem::new(
        domain,
        record.reservation_value,
        record.deadline,
    )?)
}

pub fn parse_problem_file(path: impl AsRef<Path>) -> Result<PlanningProblem, ProblemFileError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ProblemFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_problem_str(&text)
}

/// Serializes a problem with explicit ids.
pub fn problem_to_string(problem: &PlanningProblem) -> String {
    let record = ProblemRecord {
        bids: problem
            .domain()
            .bids()
            .iter()
            .map(|b| BidRecord {
                id: Some(b.id),
                label: b.label.clone(),
                utility: b.utility,
                acceptance_probability: b.acceptance_probability,
            })
            .collect(),
        reservation_value: problem.reservation_value(),
        deadline: problem.deadline(),
    };
    let mut text = serde_json::to_string_pretty(&record).expect("problem records always serialize");
    text.push('\n');
    text
}

pub fn write_problem_file(
    problem: &PlanningProblem,
    path: impl AsRef<Path>,
) -> Result<(), ProblemFileError> {
    let path = path.as_ref();
    fs::write(path, problem_to_string(problem)).map_err(|source| ProblemFileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Field;

    const TABLE1: &str = r#"{
        "bids": [
            { "id": 0, "label": "Italian", "utility": 0.5, "acceptance_probability": 0.4 },
            { "id": 1, "label": "Sushi", "utility": 0.9, "acceptance_probability": 0.2 },
            { "id": 2, "label": "Fast food", "utility": 0.3, "acceptance_probability": 0.9 }
        ],
        "reservation_value": 0.2,
        "deadline": 3
    }"#;

    #[test]
    fn parses_table1() {
        let p = parse_problem_str(TABLE1).unwrap();
        assert_eq!(p.reservation_value(), 0.2);
        assert_eq!(p.deadline(), 3);
        assert_eq!(p.domain().len(), 3);
        assert_eq!(p.domain().get(1).unwrap().label.as_deref(), Some("Sushi"));
    }

    #[test]
    fn ids_default_to_array_index() {
        let text = r#"{"bids":[{"utility":0.5,"acceptance_probability":0.4},
            {"utility":0.9,"acceptance_probability":0.2}],"reservation_value":0,"deadline":1}"#;
        let p = parse_problem_str(text).unwrap();
        let ids: Vec<_> = p.domain().bids().iter().map(|b| b.id).collect();
        assert_eq!(ids, vec![0, 1]);
    }

    #[test]
    fn missing_deadline_is_named() {
        let text = r#"{"bids":[{"utility":0.5,"acceptance_probability":0.4}],"reservation_value":0}"#;
        match parse_problem_str(text) {
            Err(ProblemFileError::Parse { message, .. }) => assert!(message.contains("deadline")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn utility_out_of_range_fails_validation() {
        let text = r#"{"bids":[{"utility":1.5,"acceptance_probability":0.4}],"reservation_value":0,"deadline":1}"#;
        assert!(matches!(
            parse_problem_str(text),
            Err(ProblemFileError::Invalid(DomainError::OutOfRange {
                field: Field::Utility,
                ..
            }))
        ));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"bids":[{"utility":0.5,"acceptance":0.4}],"reservation_value":0,"deadline":1}"#;
        assert!(matches!(parse_problem_str(text), Err(ProblemFileError::Parse { .. })));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(
            parse_problem_file("/nonexistent/problem.json"),
            Err(ProblemFileError::Io { .. })
        ));
    }

    #[test]
    fn write_then_parse() {
        let p = parse_problem_str(TABLE1).unwrap();
        assert_eq!(parse_problem_str(&problem_to_string(&p)).unwrap(), p);
    }
}
