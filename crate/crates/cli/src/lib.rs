//! Library behind the `alphaleak` command: input parsing, measure tables,
//! α-sweeps, the identity-verification harness and plot data.
//!
//! Every table is in nats and carries that unit in its header.
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod io;
pub mod measure;
pub mod plot;
pub mod table;
pub mod verify;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("invalid {what}: {source}")]
    Invalid {
        what: &'static str,
        source: alphaleak::Error,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        source: alphaleak::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    /// Exit status for this error: always 2. Status 1 is reserved for
    /// verification failures.
    pub fn exit_code(&self) -> u8 {
        2
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Parses an order list: comma-separated values (`0.5,2,4`) or an
/// inclusive linear grid `start:stop:n`.
///
/// ```
/// use alphaleak_cli::parse_alphas;
///
/// assert_eq!(parse_alphas("0.5, 2").unwrap(), vec![0.5, 2.0]);
/// assert_eq!(parse_alphas("1:2:3").unwrap(), vec![1.0, 1.5, 2.0]);
/// ```
pub fn parse_alphas(s: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| CliError::Usage(format!("bad order list {s:?}: {why}"));
    let num = |t: &str| -> Result<f64> {
        t.trim()
            .parse::<f64>()
            .map_err(|_| bad(&format!("{:?} is not a number", t.trim())))
    };
    let parts: Vec<&str> = s.split(':').collect();
    let out = match parts.as_slice() {
        [start, stop, n] => {
            let (a, b) = (num(start)?, num(stop)?);
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| bad("grid count must be a positive integer"))?;
            match n {
                0 => return Err(bad("grid count must be a positive integer")),
                1 => vec![a],
                _ => (0..n)
                    .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
                    .collect(),
            }
        }
        [list] => list
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(num)
            .collect::<Result<Vec<_>>>()?,
        _ => return Err(bad("expected a comma list or start:stop:n")),
    };
    if let Some(a) = out.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
        return Err(bad(&format!("order {a} is not positive and finite")));
    }
    Ok(out)
}

/// Parses a comma-separated variant list; `all` selects every variant.
pub fn parse_variants(s: &str) -> Result<Vec<alphaleak::MiVariant>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(alphaleak::MiVariant::ALL.to_vec());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("unknown variant {:?}", t.trim())))
        })
        .collect()
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
