//! Strings-and-Coins, Nimstring and Coins-are-Lava on coin/string multigraphs.
//!
//! The crate is organised bottom-up:
//!
//! * [`multigraph`]: the board (coins, strings, the ground) and its text/DOT formats.
//! * [`engine`]: rule semantics for the three games, including free moves.
//! * [`solver`]: exact memoized search, a naive oracle, and loony-position tools.
//! * [`gamesat`]: positive-DNF Game SAT with skips.
//! * [`reduce`]: the Nimstring to Strings-and-Coins, Lava to Nimstring and
//!   Game SAT to Lava compilers.
//! * [`strategy`]: scripted four-phase strategies and baseline policies for
//!   compiled Lava positions.
//! * [`verify`]: campaigns that cross-check all of the above.
//! * [`cli`]: the `sandc` command-line front end.

pub mod cli;
pub mod engine;
pub mod error;
pub mod gamesat;
pub mod multigraph;
pub mod reduce;
pub mod solver;
pub mod strategy;
pub mod verify;

pub use engine::{GameKind, GameState, Outcome, Player, Winner};
pub use error::{Error, Result};
pub use gamesat::{DnfFormula, GameSatValue, Role};
pub use multigraph::{CoinId, Endpoint, Multigraph, StringEdge};
pub use reduce::ReductionArtifact;
pub use solver::{SolveResult, Solver};
