use thiserror::Error;

/// Errors produced by the library. Each variant names the operation that
/// failed and carries a witness suitable for machine-readable reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: bracketing failed on [{lo}, {hi}]: {msg}")]
    Bracket { op: &'static str, lo: f64, hi: f64, msg: String },

    #[error("{op}: iteration budget exhausted (residual {residual:.3e})")]
    Budget { op: &'static str, residual: f64 },

    #[error("{op}: divergent integral: {msg}")]
    Divergent { op: &'static str, msg: String },

    #[error("{op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("{op}: point ({x1}, {x2}) outside the domain")]
    OutsideDomain { op: &'static str, x1: f64, x2: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("expression: {0}")]
    Expr(String),

    #[error("graph schema: {0}")]
    Schema(String),

    #[error("{op}: no matching rewrite rule: {msg}")]
    NoRewrite { op: &'static str, msg: String },

    #[error("the Bellman function is +infinity off the fixed boundary: {reason}")]
    BellmanInfinite { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Structured form used by the CLI for machine-readable error output.
    pub fn witness_json(&self) -> serde_json::Value {
        serde_json::json!({
            "error": self.to_string(),
        })
    }
}
