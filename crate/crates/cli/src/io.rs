//! The input document: a JSON object holding either `p_x` and `channel`, or
//! a `joint` matrix, with optional `x_labels` and `y_labels`.
//!
//! ```json
//! { "p_x": [0.5, 0.5], "channel": [[0.9, 0.1], [0.1, 0.9]] }
//! { "joint": [[0.25, 0.25], [0.25, 0.25]], "x_labels": ["a", "b"] }
//! ```

use std::path::Path;

use alphaleak::{Channel, JointDist, Pmf};
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_labels: Option<Vec<String>>,
}

/// A validated input in either parameterization.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Pair(Pmf, Channel),
    Joint(JointDist),
}

impl Distribution {
    /// Input distribution and channel; a joint matrix is decomposed.
    pub fn pair(&self) -> (Pmf, Channel) {
        match self {
            Distribution::Pair(p, w) => (p.clone(), w.clone()),
            Distribution::Joint(j) => j.decompose(),
        }
    }

    fn to_doc(&self) -> InputDoc {
        match self {
            Distribution::Pair(p, w) => InputDoc {
                p_x: Some(p.probs().to_vec()),
                channel: Some(w.rows().to_vec()),
                x_labels: Some(w.x_labels().to_vec()),
                y_labels: Some(w.y_labels().to_vec()),
                ..InputDoc::default()
            },
            Distribution::Joint(j) => InputDoc {
                joint: Some(j.matrix().to_vec()),
                x_labels: Some(j.x_labels().to_vec()),
                y_labels: Some(j.y_labels().to_vec()),
                ..InputDoc::default()
            },
        }
    }
}

fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn invalid(what: &'static str) -> impl FnOnce(alphaleak::Error) -> CliError {
    move |source| CliError::Invalid { what, source }
}

/// Validates a parsed document.
pub fn from_doc(doc: InputDoc) -> Result<Distribution> {
    let width = |m: &[Vec<f64>]| m.first().map_or(0, Vec::len);
    match (doc.p_x, doc.channel, doc.joint) {
        (Some(p), Some(rows), None) => {
            let xl = doc.x_labels.unwrap_or_else(|| default_labels("x", rows.len()));
            let yl = doc.y_labels.unwrap_or_else(|| default_labels("y", width(&rows)));
            let pmf = Pmf::with_labels(xl.clone(), &p, false).map_err(invalid("p_x"))?;
            let w = Channel::with_labels(xl, yl, rows).map_err(invalid("channel"))?;
            if pmf.len() != w.nx() {
                return Err(CliError::Invalid {
                    what: "channel",
                    source: alphaleak::Error::DimensionMismatch {
                        what: "channel rows vs p_x",
                        expected: pmf.len(),
                        found: w.nx(),
                    },
                });
            }
            Ok(Distribution::Pair(pmf, w))
        }
        (None, None, Some(m)) => {
            let xl = doc.x_labels.unwrap_or_else(|| default_labels("x", m.len()));
            let yl = doc.y_labels.unwrap_or_else(|| default_labels("y", width(&m)));
            let j = JointDist::with_labels(xl, yl, m).map_err(invalid("joint"))?;
            Ok(Distribution::Joint(j))
        }
        _ => Err(CliError::Usage(
            "input must contain either `p_x` and `channel`, or `joint`".into(),
        )),
    }
}

/// Parses and validates a JSON document. `origin` names the source in
/// error messages.
pub fn parse_distribution(text: &str, origin: &Path) -> Result<Distribution> {
    let doc: InputDoc = serde_json::from_str(text).map_err(|source| CliError::Parse {
        path: origin.to_path_buf(),
        source,
    })?;
    from_doc(doc)
}

pub fn load_distribution(path: &Path) -> Result<Distribution> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_distribution(&text, path)
}

/// Serializes with labels and shortest round-trip number formatting, so
/// that loading the output reproduces the distribution bit for bit.
pub fn to_json(d: &Distribution) -> String {
    serde_json::to_string_pretty(&d.to_doc()).expect("finite numbers serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Distribution> {
        parse_distribution(s, Path::new("<test>"))
    }

    #[test]
    fn both_forms_parse() {
        let d = parse(r#"{"p_x":[0.5,0.5],"channel":[[0.9,0.1],[0.1,0.9]]}"#).unwrap();
        assert!(matches!(d, Distribution::Pair(..)));
        let d = parse(r#"{"joint":[[0.25,0.25],[0.25,0.25]],"y_labels":["u","v"]}"#).unwrap();
        let (p, w) = d.pair();
        assert_eq!(p.probs(), &[0.5, 0.5]);
        assert_eq!(w.y_labels(), &["u".to_string(), "v".to_string()]);
    }

    #[test]
    fn errors_name_the_violation() {
        let e = parse(r#"{"p_x":[0.5,0.5],"channel":[[0.89,0.1],[0.1,0.9]]}"#).unwrap_err();
        assert!(e.to_string().contains("channel: row 0"), "{e}");
        let e = parse(r#"{"p_x":[0.5,0.5,0.0],"channel":[[1.0],[1.0]]}"#).unwrap_err();
        assert!(e.to_string().contains("p_x"), "{e}");
        assert!(matches!(parse(r#"{"p_x":[1.0]}"#), Err(CliError::Usage(_))));
        assert!(matches!(parse(r#"{"joint":[[1.0]],"extra":1}"#), Err(CliError::Parse { .. })));
    }
}
