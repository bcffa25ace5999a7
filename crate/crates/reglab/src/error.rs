use thiserror::Error;

/// Errors raised by grid construction, estimators, solvers and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid too coarse: {0} cells per side (need at least 4)")]
    GridTooCoarse(usize),
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("scale below grid resolution: {0}")]
    ScaleBelowResolution(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("infeasible data: {0}")]
    Infeasible(String),
    #[error("bracket failure: {0}")]
    BracketFailure(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
