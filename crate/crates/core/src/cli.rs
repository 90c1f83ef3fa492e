//! The `sandc` command line.
//!
//! Results go to stdout, diagnostics to stderr. Exit status is 0 on
//! success, 1 when a verification finds a failure, and 2 for usage or input
//! errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::engine::{parse_transcript, replay, GameKind, GameState, Player};
use crate::error::{Error, Result};
use crate::gamesat::{DnfFormula, GameSatTable, Role, DEFAULT_BUDGET as GAMESAT_BUDGET};
use crate::multigraph::Multigraph;
use crate::reduce::{
    compile_with_cap, full_pipeline, reduce_lava_to_nimstring, reduce_nimstring_to_sac,
    DEFAULT_CHAIN_LEN, DEFAULT_STRING_CAP,
};
use crate::solver::{Solver, DEFAULT_BUDGET};
use crate::strategy::{playout_kinds, GadgetIndex, Oracle, PolicyKind};
use crate::verify;

#[derive(Parser, Debug)]
#[command(name = "sandc", version, about = "Strings-and-Coins, Nimstring and Coins-are-Lava toolkit")]
pub struct Cli {
    /// Worker threads for campaigns (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GameArg {
    Sac,
    Nimstring,
    Lava,
}

impl From<GameArg> for GameKind {
    fn from(g: GameArg) -> Self {
        match g {
            GameArg::Sac => GameKind::StringsAndCoins,
            GameArg::Nimstring => GameKind::Nimstring,
            GameArg::Lava => GameKind::CoinsAreLava,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlayerArg {
    P1,
    P2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RoleArg {
    Trudy,
    Fallon,
}

impl From<RoleArg> for Role {
    fn from(r: RoleArg) -> Self {
        match r {
            RoleArg::Trudy => Role::Trudy,
            RoleArg::Fallon => Role::Fallon,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Fallon,
    Trudy,
    Random,
    Greedy,
}

impl From<PolicyArg> for PolicyKind {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Fallon => PolicyKind::FallonScript,
            PolicyArg::Trudy => PolicyKind::TrudyScript,
            PolicyArg::Random => PolicyKind::UniformRandom,
            PolicyArg::Greedy => PolicyKind::GreedyDisabler,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a position exactly and print `winner=.. score=..-.. states=..`.
    Solve {
        #[arg(long, value_enum)]
        game: GameArg,
        #[arg(long = "in")]
        input: PathBuf,
        /// Player who moves first.
        #[arg(long, value_enum, default_value = "p1")]
        first: PlayerArg,
        /// Largest number of strings the solver accepts.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Run one of the reductions.
    #[command(subcommand)]
    Reduce(ReduceCommand),
    /// Run a verification campaign and print a JSON report.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Play two policies against each other on a compiled formula.
    Play {
        #[command(flatten)]
        compile: CompileArgs,
        #[arg(long, value_enum)]
        policy_a: PolicyArg,
        #[arg(long, value_enum)]
        policy_b: PolicyArg,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Write a random fixture.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_coins: usize,
        #[arg(long, default_value_t = 7)]
        max_strings: usize,
        #[arg(long, default_value_t = 25)]
        ground_percent: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write Graphviz DOT for a board, or for a compiled formula.
    ExportDot {
        #[arg(long = "in", conflicts_with = "formula")]
        input: Option<PathBuf>,
        #[arg(long)]
        formula: Option<PathBuf>,
        #[arg(long = "N", default_value_t = 2)]
        width_base: u64,
        #[arg(long, value_enum, default_value = "trudy")]
        first: RoleArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a transcript against a board and print the result.
    Replay {
        #[arg(long, value_enum)]
        game: GameArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        transcript: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Graph,
    Loony,
    Formula,
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    #[arg(long)]
    pub formula: PathBuf,
    /// Width base N of the ropes.
    #[arg(long = "N", default_value_t = 2)]
    pub width_base: u64,
    #[arg(long, value_enum)]
    pub first: RoleArg,
    /// Refuse to build more strings than this.
    #[arg(long, default_value_t = DEFAULT_STRING_CAP)]
    pub cap: u128,
}

#[derive(Subcommand, Debug)]
pub enum ReduceCommand {
    /// Nimstring board to Strings-and-Coins board.
    NimToSac {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Coins-are-Lava board to Nimstring board.
    LavaToNim {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CHAIN_LEN)]
        chain_len: usize,
    },
    /// Game SAT formula to Coins-are-Lava board plus gadget plan.
    GamesatToLava {
        #[command(flatten)]
        compile: CompileArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// All three stages, written into a directory.
    Pipeline {
        #[command(flatten)]
        compile: CompileArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    /// Memoized solver against the naive recursion.
    Oracle {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
    Lemma1 {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    Lemma3 {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    Loony {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Recount a compiled board, or a batch of random formulas.
    Structure {
        #[arg(long)]
        formula: Option<PathBuf>,
        #[arg(long = "N", default_value_t = 2)]
        width_base: u64,
        #[arg(long, value_enum, default_value = "trudy")]
        first: RoleArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
    /// Predicted winner's script against every opponent over a range of N.
    Strategies {
        #[arg(long)]
        formula: PathBuf,
        #[arg(long, value_enum)]
        first: RoleArg,
        /// Comma-separated widths to try, smallest first.
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        widths: Vec<u64>,
        #[arg(long, default_value_t = 200)]
        seeds: usize,
    },
    SkipDominance {
        #[arg(long, default_value_t = 3)]
        max_n: usize,
        #[arg(long, default_value_t = 3)]
        max_m: usize,
    },
}

/// Parses `args` and runs the command, writing results to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if cli.jobs > 0 {
        // Fails only if a pool already exists, in which case it is reused.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    match execute(cli.command, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn read_graph(path: &Path) -> Result<Multigraph> {
    Multigraph::parse_text(&read(path)?)
}

fn read_formula(path: &Path) -> Result<DnfFormula> {
    DnfFormula::parse(&read(path)?)
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<bool> {
    match cmd {
        Command::Solve {
            game,
            input,
            first,
            budget,
        } => {
            let g = read_graph(&input)?;
            writeln!(out, "{}", solve_line(g, game.into(), first, budget)?)?;
            Ok(true)
        }
        Command::Reduce(r) => reduce(r, out).map(|_| true),
        Command::Verify(v) => verify_cmd(v, out),
        Command::Play {
            compile,
            policy_a,
            policy_b,
            seed,
            transcript,
            summary,
        } => {
            let f = read_formula(&compile.formula)?;
            let a = compile_with_cap(&f, compile.width_base, compile.first.into(), compile.cap)?;
            let idx = GadgetIndex::new(&a);
            let oracle = GameSatTable::build(&f, true, GAMESAT_BUDGET)
                .ok()
                .map(|t| Oracle::Table(Arc::new(t)));
            let r = playout_kinds(&a, &idx, [policy_a.into(), policy_b.into()], seed, oracle.as_ref())?;
            if let Some(p) = transcript {
                fs::write(p, r.transcript())?;
            }
            let json = r.summary_json()?;
            if let Some(p) = summary {
                fs::write(p, &json)?;
            }
            writeln!(out, "{json}")?;
            Ok(true)
        }
        Command::Gen {
            kind,
            seed,
            max_coins,
            max_strings,
            ground_percent,
            out: path,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let text = match kind {
                GenKind::Graph => verify::random_multigraph(
                    &mut rng,
                    verify::GraphShape {
                        max_coins,
                        max_strings,
                        ground_percent,
                        prune_isolated: false,
                    },
                )
                .canonical_text(),
                GenKind::Loony => verify::planted_loony(&mut rng, max_strings.max(2)).canonical_text(),
                GenKind::Formula => verify::random_formula(&mut rng, 4, 3).to_text(),
            };
            fs::write(&path, text)?;
            writeln!(out, "wrote {}", path.display())?;
            Ok(true)
        }
        Command::ExportDot {
            input,
            formula,
            width_base,
            first,
            out: path,
        } => {
            let g = match (input, formula) {
                (Some(i), _) => read_graph(&i)?,
                (None, Some(f)) => {
                    crate::reduce::compile_gamesat_to_lava(&read_formula(&f)?, width_base, first.into())?.graph
                }
                (None, None) => {
                    return Err(Error::Parse {
                        line: 0,
                        message: "export-dot needs --in or --formula".into(),
                    })
                }
            };
            fs::write(&path, g.to_dot())?;
            writeln!(out, "wrote {}", path.display())?;
            Ok(true)
        }
        Command::Replay {
            game,
            input,
            transcript,
        } => {
            let g = read_graph(&input)?;
            let cuts = parse_transcript(&read(&transcript)?)?;
            let (s, outcome) = replay(Arc::new(g), game.into(), &cuts)?;
            match outcome {
                Some(o) => writeln!(
                    out,
                    "valid cuts={} winner={} score={}-{}",
                    cuts.len(),
                    o.winner,
                    o.final_score[0],
                    o.final_score[1]
                )?,
                None => writeln!(
                    out,
                    "valid cuts={} unfinished mover={} alive={}",
                    cuts.len(),
                    s.mover(),
                    s.alive_count()
                )?,
            }
            Ok(true)
        }
    }
}

/// Solves, then follows principal moves to the end for the score.
pub fn solve_line(g: Multigraph, kind: GameKind, first: PlayerArg, budget: usize) -> Result<String> {
    let solver = Solver::with_budget(budget);
    let mut s = GameState::new(Arc::new(g))?;
    if first == PlayerArg::P2 {
        s.set_mover(Player::P2);
    }
    let root = solver.solve(&s, kind)?;
    let winner = root.winner(&s);
    let mut line = s.clone();
    while line.is_terminal(kind).is_none() {
        let r = solver.solve(&line, kind)?;
        match r.principal_move {
            Some(id) => {
                line.cut(kind, id)?;
            }
            None => break,
        }
    }
    let [a, b] = line.scores();
    Ok(format!("winner={winner} score={a}-{b} states={}", root.states_visited))
}

fn reduce(cmd: ReduceCommand, out: &mut dyn Write) -> Result<()> {
    match cmd {
        ReduceCommand::NimToSac { input, out: path } => {
            let h = reduce_nimstring_to_sac(&read_graph(&input)?);
            fs::write(&path, h.canonical_text())?;
            writeln!(out, "coins={} strings={}", h.coin_count(), h.string_count())?;
        }
        ReduceCommand::LavaToNim {
            input,
            out: path,
            chain_len,
        } => {
            let h = reduce_lava_to_nimstring(&read_graph(&input)?, chain_len)?;
            fs::write(&path, h.canonical_text())?;
            writeln!(out, "coins={} strings={}", h.coin_count(), h.string_count())?;
        }
        ReduceCommand::GamesatToLava {
            compile,
            out: path,
            plan,
        } => {
            let f = read_formula(&compile.formula)?;
            let a = compile_with_cap(&f, compile.width_base, compile.first.into(), compile.cap)?;
            fs::write(&path, a.graph.canonical_text())?;
            if let Some(p) = plan {
                fs::write(p, a.plan_json()?)?;
            }
            write!(out, "{}", a.describe())?;
            writeln!(out, "parity: {}", a.parity.rule)?;
        }
        ReduceCommand::Pipeline { compile, out_dir } => {
            let f = read_formula(&compile.formula)?;
            let p = full_pipeline(&f, compile.width_base, compile.first.into())?;
            fs::create_dir_all(&out_dir)?;
            fs::write(out_dir.join("lava.coins"), p.lava.graph.canonical_text())?;
            fs::write(out_dir.join("lava.plan.json"), p.lava.plan_json()?)?;
            fs::write(out_dir.join("nimstring.coins"), p.nim.canonical_text())?;
            fs::write(out_dir.join("sac.coins"), p.sac.canonical_text())?;
            for (stage, g) in [("lava", &p.lava.graph), ("nimstring", &p.nim), ("sac", &p.sac)] {
                writeln!(out, "{stage}: coins={} strings={}", g.coin_count(), g.string_count())?;
            }
        }
    }
    Ok(())
}

fn verify_cmd(cmd: VerifyCommand, out: &mut dyn Write) -> Result<bool> {
    let report = match cmd {
        VerifyCommand::Oracle { seed, count } => verify::check_oracle(seed, count),
        VerifyCommand::Lemma1 { seed, count } => verify::check_cycle_union(seed, count),
        VerifyCommand::Lemma3 { seed, count } => verify::check_lava_chains(seed, count),
        VerifyCommand::Loony { seed, count } => verify::check_loony(seed, count),
        VerifyCommand::Structure {
            formula: Some(f),
            width_base,
            first,
            ..
        } => verify::check_structure(&read_formula(&f)?, width_base, first.into()),
        VerifyCommand::Structure {
            formula: None,
            seed,
            count,
            ..
        } => verify::structure_campaign(seed, count),
        VerifyCommand::SkipDominance { max_n, max_m } => verify::skip_dominance_sweep(max_n, max_m),
        VerifyCommand::Strategies {
            formula,
            first,
            widths,
            seeds,
        } => {
            let c = verify::campaign_strategies(&read_formula(&formula)?, first.into(), &widths, seeds)?;
            write_json(out, &c)?;
            return Ok(c.ok());
        }
    };
    write_json(out, &report)?;
    eprintln!("{}", report.line());
    Ok(report.ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let code = run(args.iter().copied(), &mut out);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_str(&["sandc", "solve"]).0, 2);
        assert_eq!(run_str(&["sandc", "frobnicate"]).0, 2);
    }

    #[test]
    fn solve_lone_string() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.coins");
        fs::write(&p, "coins 2\nstring 0 0 1\n").unwrap();
        let (code, out) = run_str(&["sandc", "solve", "--game", "nimstring", "--in", p.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert!(out.starts_with("winner=P2 score=0-0"), "{out}");
        let (_, out) = run_str(&["sandc", "solve", "--game", "sac", "--in", p.to_str().unwrap()]);
        assert!(out.starts_with("winner=P1 score=2-0"), "{out}");
    }

    #[test]
    fn missing_file_exits_2() {
        assert_eq!(
            run_str(&["sandc", "solve", "--game", "lava", "--in", "/nonexistent.coins"]).0,
            2
        );
    }
}
