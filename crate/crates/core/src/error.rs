use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coin {coin} is out of range (graph has {coin_count} coins)")]
    InvalidEndpoint { coin: usize, coin_count: usize },
    #[error("rope width must be at least 1")]
    ZeroWidth,
    #[error("cycle length must be at least 1")]
    ZeroLength,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("string {0} is not a legal move in this position")]
    IllegalMove(usize),
    #[error("board contains a self-loop on coin {0}")]
    DegenerateInput(usize),
    #[error("position has {alive} strings, search budget is {budget}")]
    BudgetExceeded { alive: usize, budget: usize },
    #[error("variable {0} is unset")]
    UnsetVariable(usize),
    #[error("clause {0} has fewer than 2 variables")]
    ClauseTooSmall(usize),
    #[error("variable {0} occurs in no clause")]
    UnusedVariable(usize),
    #[error("chain length {0} is below the minimum of 5")]
    ChainTooShort(usize),
    #[error("compiled instance would have {strings} strings, cap is {cap}")]
    OverBudget { strings: u128, cap: u128 },
    #[error("phase invariant broken: {0}")]
    PhaseInvariantBroken(String),
    #[error("the variable-setting phase needs a Game SAT oracle")]
    OracleRequired,
    #[error("policy {policy} emitted illegal cut {string} at ply {ply}")]
    IllegalByPolicy {
        policy: String,
        string: usize,
        ply: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
