use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("point outside the open unit disc (|z| = {0})")]
    Domain(f64),
    #[error("inconclusive: {reason}{}", required_hint(*.required_n))]
    Inconclusive {
        reason: String,
        required_n: Option<usize>,
    },
    #[error("diverged: {0}")]
    Diverged(String),
    #[error("hypothesis gate failed at clause {clause}: {detail}")]
    Gate { clause: String, detail: String },
}

fn required_hint(n: Option<usize>) -> String {
    match n {
        Some(n) => format!(" (try N >= {n})"),
        None => String::new(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
