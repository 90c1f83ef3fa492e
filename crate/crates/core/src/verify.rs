//! Verification campaigns and instance generators.
//!
//! Every check runs on seeded instances and returns a [`CheckReport`] with
//! pass/fail/skip counts and replayable counterexamples. Solver results are
//! cross-checked against a second code path on at least every fifth instance.
//!
//! The Game SAT to Lava compiler cannot be verified end to end by search (its
//! smallest instance has hundreds of strings). Evidence for it is layered:
//! exact checks of the two small-graph reductions, a structural recount, a
//! parity audit, and scripted-strategy campaigns.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{GameKind, GameState, Player};
use crate::error::{Error, Result};
use crate::gamesat::{solve_gamesat, DnfFormula, GameSatTable, GameSatValue, Role};
use crate::multigraph::{CoinId, Endpoint, Multigraph};
use crate::reduce::{
    closed_form, compile_gamesat_to_lava, reduce_lava_to_nimstring, reduce_nimstring_to_sac,
    DEFAULT_CHAIN_LEN,
};
use crate::solver::{
    find_loony_witnesses, line_wins_for_mover, loony_first_move, naive_lava_free_loses,
    naive_solve, Solver,
};
use crate::strategy::{playout_kinds, GadgetIndex, Oracle, PlayoutRecord, PolicyKind, TerminalKind};

/// At least one instance in this many is also solved naively.
const DUAL_EVERY: usize = 5;
/// The naive recursion is only run on boards this small.
const DUAL_MAX_STRINGS: usize = 10;

/// Whether instance `i` gets the naive cross-check: small enough, and the
/// running share of cross-checked instances has fallen to 1 in
/// `DUAL_EVERY`.
fn wants_dual(i: usize, done: usize, strings: usize) -> bool {
    strings <= DUAL_MAX_STRINGS && done * DUAL_EVERY <= i
}

const MAX_COUNTEREXAMPLES: usize = 5;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    /// Instances also checked by a second code path.
    pub dual_checked: usize,
    pub counterexamples: Vec<String>,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(name: &str) -> Self {
        CheckReport {
            name: name.to_owned(),
            ..Default::default()
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0 && self.passed > 0
    }

    fn fail(&mut self, example: String) {
        self.failed += 1;
        if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
            self.counterexamples.push(example);
        }
    }

    fn record(&mut self, outcome: Result<Option<String>>, dual: bool) {
        match outcome {
            Ok(None) => self.passed += 1,
            Ok(Some(example)) => self.fail(example),
            Err(Error::BudgetExceeded { .. }) => self.skipped += 1,
            Err(e) => self.fail(format!("error: {e}")),
        }
        self.dual_checked += dual as usize;
    }

    pub fn line(&self) -> String {
        format!(
            "{}: {} passed, {} failed, {} skipped",
            self.name, self.passed, self.failed, self.skipped
        )
    }
}

/// Shape of random boards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphShape {
    pub max_coins: usize,
    pub max_strings: usize,
    /// Chance, in percent, that an endpoint is the ground.
    pub ground_percent: u32,
    pub prune_isolated: bool,
}

/// A board with 1..=max_coins coins and 0..=max_strings strings, without
/// self-loops. With `prune_isolated`, coins touching no string are removed.
pub fn random_multigraph(rng: &mut impl Rng, shape: GraphShape) -> Multigraph {
    let coins = rng.gen_range(1..=shape.max_coins.max(1));
    let strings = rng.gen_range(0..=shape.max_strings);
    let mut ends = Vec::with_capacity(strings);
    let pick = |rng: &mut dyn rand::RngCore| {
        if rng.gen_range(0..100) < shape.ground_percent {
            Endpoint::Ground
        } else {
            Endpoint::coin(rng.gen_range(0..coins))
        }
    };
    while ends.len() < strings {
        let a = pick(rng);
        let b = pick(rng);
        if a != b || a == Endpoint::Ground {
            ends.push((a, b));
        }
    }
    let mut used = vec![!shape.prune_isolated; coins];
    for (a, b) in &ends {
        for c in [a, b].into_iter().filter_map(|e| e.as_coin()) {
            used[c.0] = true;
        }
    }
    let mut renumber = vec![0; coins];
    let mut g = Multigraph::new();
    for c in 0..coins {
        if used[c] {
            renumber[c] = g.add_coin().0;
        }
    }
    let map = |e: Endpoint| match e {
        Endpoint::Coin(c) => Endpoint::coin(renumber[c.0]),
        Endpoint::Ground => Endpoint::Ground,
    };
    for (a, b) in ends {
        g.add_string(map(a), map(b)).expect("endpoints are in range");
    }
    g
}

/// A board containing a loony pattern: `A -a- B -b- X` where A has degree
/// 1, B degree 2, and X is the ground or a coin with at least one more
/// string. At most `max_strings` strings in total.
pub fn planted_loony(rng: &mut impl Rng, max_strings: usize) -> Multigraph {
    let rest = random_multigraph(
        rng,
        GraphShape {
            max_coins: 4,
            max_strings: max_strings.saturating_sub(2),
            ground_percent: 30,
            prune_isolated: true,
        },
    );
    let mut g = Multigraph::with_coins(2).disjoint_union(&rest);
    g.set_coin_label(CoinId(0), "loony:A");
    g.set_coin_label(CoinId(1), "loony:B");
    let far = if rest.coin_count() == 0 || rng.gen_bool(0.3) {
        Endpoint::Ground
    } else {
        Endpoint::coin(2 + rng.gen_range(0..rest.coin_count()))
    };
    g.add_string(Endpoint::coin(0), Endpoint::coin(1)).expect("coins exist");
    g.add_string(Endpoint::coin(1), far).expect("coins exist");
    g
}

/// Every positive DNF formula with `1..=max_n` variables and `0..=max_m`
/// distinct nonempty clauses, up to clause order.
pub fn enumerate_formulas(max_n: usize, max_m: usize) -> Vec<DnfFormula> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let subsets: Vec<Vec<usize>> = (1u32..1 << n)
            .map(|mask| (0..n).filter(|&v| mask >> v & 1 == 1).collect())
            .collect();
        for m in 0..=max_m {
            for combo in combinations(subsets.len(), m) {
                let clauses = combo.iter().map(|&i| subsets[i].clone()).collect();
                out.push(DnfFormula::new(n, clauses).expect("subsets are valid clauses"));
            }
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// A formula the compiler accepts: every clause has two or more variables
/// and every variable occurs.
pub fn random_formula(rng: &mut impl Rng, max_n: usize, max_m: usize) -> DnfFormula {
    loop {
        let n = rng.gen_range(2..=max_n.max(2));
        let m = rng.gen_range(1..=max_m.max(1));
        let vars: Vec<usize> = (0..n).collect();
        let clauses: Vec<Vec<usize>> = (0..m)
            .map(|_| {
                let size = rng.gen_range(2..=n);
                vars.choose_multiple(rng, size).copied().collect()
            })
            .collect();
        let f = DnfFormula::new(n, clauses).expect("variables are in range");
        if f.occurrences().iter().all(|&k| k > 0) {
            return f;
        }
    }
}

fn state(g: Multigraph) -> Result<GameState> {
    GameState::new(Arc::new(g))
}

pub const ORACLE_SHAPE: GraphShape = GraphShape {
    max_coins: 5,
    max_strings: 10,
    ground_percent: 25,
    prune_isolated: false,
};

/// Memoized solver against the naive recursion, for every game kind.
pub fn check_oracle(seed: u64, count: usize) -> CheckReport {
    let mut report = CheckReport::new("solver-oracle");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let solver = Solver::default();
    for i in 0..count {
        let g = random_multigraph(&mut rng, ORACLE_SHAPE);
        let text = g.canonical_text();
        for kind in GameKind::ALL {
            let outcome = state(g.clone()).and_then(|s| {
                let fast = solver.solve(&s, kind)?;
                let slow = naive_solve(&s, kind)?;
                let same = fast.winner_for_mover == slow.winner_for_mover
                    && (kind != GameKind::StringsAndCoins || fast.net_score_for_mover == slow.net_score_for_mover);
                Ok((!same).then(|| format!("instance {i} {kind}: memo {fast:?} naive {slow:?}\n{text}")))
            });
            report.record(outcome, true);
        }
    }
    report
}

pub const CYCLE_UNION_SHAPE: GraphShape = GraphShape {
    max_coins: 4,
    max_strings: 7,
    ground_percent: 25,
    prune_isolated: false,
};

/// Nimstring on G against Strings-and-Coins on G plus a long cycle.
pub fn check_cycle_union(seed: u64, count: usize) -> CheckReport {
    let mut report = CheckReport::new("cycle-union");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let solver = Solver::default();
    for i in 0..count {
        let g = random_multigraph(&mut rng, CYCLE_UNION_SHAPE);
        let h = reduce_nimstring_to_sac(&g);
        let dual = wants_dual(i, report.dual_checked, h.string_count());
        let text = g.canonical_text();
        let outcome = (|| {
            let nim = solver.solve(&state(g)?, GameKind::Nimstring)?;
            let hs = state(h)?;
            let sac = solver.solve(&hs, GameKind::StringsAndCoins)?;
            if dual {
                let slow = naive_solve(&hs, GameKind::StringsAndCoins)?;
                if slow.net_score_for_mover != sac.net_score_for_mover {
                    return Ok(Some(format!("instance {i}: memo and naive disagree on H\n{text}")));
                }
            }
            if sac.net_score_for_mover == 0 {
                return Ok(Some(format!("instance {i}: Strings-and-Coins draw on H\n{text}")));
            }
            let same = nim.winner_for_mover == (sac.net_score_for_mover > 0);
            Ok((!same).then(|| {
                format!(
                    "instance {i}: nimstring mover wins={} sac net={}\n{text}",
                    nim.winner_for_mover, sac.net_score_for_mover
                )
            }))
        })();
        report.record(outcome, dual);
    }
    report
}

pub const LAVA_CHAIN_SHAPE: GraphShape = GraphShape {
    max_coins: 2,
    max_strings: 4,
    ground_percent: 35,
    prune_isolated: true,
};

/// Lava on G against Nimstring on G with a five-string chain per coin.
/// Both Lava formulations are solved for G.
pub fn check_lava_chains(seed: u64, count: usize) -> CheckReport {
    let mut report = CheckReport::new("lava-chains");
    report
        .notes
        .push("coins with no strings are pruned; a chain on such a coin changes the winner".into());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let solver = Solver::default();
    for i in 0..count {
        let g = random_multigraph(&mut rng, LAVA_CHAIN_SHAPE);
        let text = g.canonical_text();
        let outcome = (|| {
            let h = reduce_lava_to_nimstring(&g, DEFAULT_CHAIN_LEN)?;
            let gs = state(g)?;
            let lava = solver.solve(&gs, GameKind::CoinsAreLava)?;
            let freeing_loses = naive_lava_free_loses(&gs)?;
            if freeing_loses != lava.winner_for_mover {
                return Ok(Some(format!("instance {i}: lava formulations disagree\n{text}")));
            }
            let nim = solver.solve(&state(h)?, GameKind::Nimstring)?;
            Ok((nim.winner_for_mover != lava.winner_for_mover).then(|| {
                format!(
                    "instance {i}: lava mover wins={} nimstring(H) mover wins={}\n{text}",
                    lava.winner_for_mover, nim.winner_for_mover
                )
            }))
        })();
        report.record(outcome, true);
    }
    report
}

/// Planted loony positions: the mover wins Nimstring, and the scripted
/// first move keeps the win.
pub fn check_loony(seed: u64, count: usize) -> CheckReport {
    let mut report = CheckReport::new("loony");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let solver = Solver::default();
    for i in 0..count {
        let g = planted_loony(&mut rng, 12);
        let text = g.canonical_text();
        let dual = wants_dual(i, report.dual_checked, g.string_count());
        let outcome = (|| {
            let s = state(g)?;
            let Some(w) = find_loony_witnesses(&s).into_iter().next() else {
                return Ok(Some(format!("instance {i}: no loony witness found\n{text}")));
            };
            let r = solver.solve(&s, GameKind::Nimstring)?;
            if !r.winner_for_mover {
                return Ok(Some(format!("instance {i}: first player loses\n{text}")));
            }
            if dual && !naive_solve(&s, GameKind::Nimstring)?.winner_for_mover {
                return Ok(Some(format!("instance {i}: naive search says first player loses\n{text}")));
            }
            let line = loony_first_move(&s, &w, &solver)?;
            Ok((!line_wins_for_mover(&s, &line, &solver)?)
                .then(|| format!("instance {i}: line {line:?} does not win\n{text}")))
        })();
        report.record(outcome, dual);
    }
    report
}

/// Counts recovered from a compiled board by walking its coins and strings.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recount {
    pub variables: u64,
    pub w1: u64,
    pub w2: u64,
    pub clauses: u64,
    pub strings: u128,
    pub pad: u64,
    pub mismatches: Vec<String>,
}

/// Recounts a compiled board from its coin labels and string endpoints and
/// compares every quantity with the closed forms. Returns the recount;
/// `mismatches` lists every disagreement.
pub fn recount_structure(g: &Multigraph, f: &DnfFormula, width_base: u64, first: Role) -> Recount {
    let p = |e: u32| width_base.pow(e) as usize;
    let mut rc = Recount::default();
    let mut miss = Vec::new();

    // Parallel classes: (endpoint, endpoint) -> width.
    let mut classes: BTreeMap<(Endpoint, Endpoint), usize> = BTreeMap::new();
    let mut at: Vec<Vec<(Endpoint, usize)>> = vec![Vec::new(); g.coin_count()];
    for s in g.strings() {
        *classes.entry((s.a, s.b)).or_default() += 1;
    }
    for (&(a, b), &w) in &classes {
        if let Endpoint::Coin(c) = a {
            at[c.0].push((b, w));
        }
        if let Endpoint::Coin(c) = b {
            at[c.0].push((a, w));
        }
    }
    rc.pad = classes.get(&(Endpoint::Ground, Endpoint::Ground)).copied().unwrap_or(0) as u64;
    rc.strings = g.string_count() as u128;

    let label = |c: usize| g.coin_label(CoinId(c)).unwrap_or("");
    let coin_of = |prefix: &str| (0..g.coin_count()).find(|&c| label(c) == prefix);
    let root = coin_of("root");
    if root.is_none() {
        miss.push("no root coin".into());
    }
    let mut clause_coins = BTreeMap::new();
    let mut var_out = BTreeMap::new();
    for c in 0..g.coin_count() {
        let l = label(c);
        if l.starts_with("clause:") {
            rc.clauses += 1;
            clause_coins.insert(c, l.to_owned());
            if !at[c].contains(&(Endpoint::Ground, p(5))) {
                miss.push(format!("{l}: no ground rope of width {}", p(5)));
            }
        } else if let Some(name) = l.strip_prefix("var:").and_then(|r| r.strip_suffix(":mid")) {
            rc.variables += 1;
            let mut ends = at[c].clone();
            ends.sort();
            let out = coin_of(&format!("var:{name}:out"));
            match (out, ends.as_slice()) {
                (Some(o), [(Endpoint::Coin(x), 1), (Endpoint::Ground, 1)]) if x.0 == o => {
                    var_out.insert(name.to_owned(), o);
                }
                _ => miss.push(format!("variable {name}: strings {ends:?}")),
            }
        }
    }

    let mut into: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for c in 0..g.coin_count() {
        let l = label(c);
        let level = if l.starts_with("wire:L1:") {
            1
        } else if l.starts_with("wire:L2:") {
            2
        } else {
            continue;
        };
        if level == 1 {
            rc.w1 += 1;
        } else {
            rc.w2 += 1;
        }
        let bottom = at[c].iter().find(|&&(e, w)| w == p(2 * level - 1) && e.as_coin().map_or(false, |x| {
            if level == 1 {
                var_out.values().any(|&o| o == x.0)
            } else {
                Some(x.0) == root
            }
        }));
        let top = at[c]
            .iter()
            .find(|&&(e, w)| w == p(2 * level) && e.as_coin().map_or(false, |x| clause_coins.contains_key(&x.0)));
        match (bottom, top, at[c].len()) {
            (Some(_), Some(&(Endpoint::Coin(t), _)), 2) => {
                let e = into.entry(clause_coins[&t.0].clone()).or_default();
                if level == 1 {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
            _ => miss.push(format!("{l}: ropes {:?}", at[c])),
        }
    }

    let cf = closed_form(f, width_base);
    let expect = |what: &str, got: u128, want: u128, miss: &mut Vec<String>| {
        if got != want {
            miss.push(format!("{what}: recount {got}, closed form {want}"));
        }
    };
    expect("variables", rc.variables as u128, cf.n as u128, &mut miss);
    expect("W1", rc.w1 as u128, cf.w1 as u128, &mut miss);
    expect("W2", rc.w2 as u128, cf.w2 as u128, &mut miss);
    expect("clauses", rc.clauses as u128, cf.clauses as u128, &mut miss);
    expect("T", rc.strings - rc.pad as u128, cf.t, &mut miss);
    if rc.pad > 1 {
        miss.push(format!("{} pad strings", rc.pad));
    }

    // Wires into each clause, from the formula alone.
    let k = f.occurrences();
    let (n, m) = (f.variable_count(), f.clause_count());
    let mut want: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for (j, c) in f.clauses().iter().enumerate() {
        want.insert(format!("clause:real:{j}"), (c.len() as u64, 1));
    }
    for (v, name) in f.names().iter().enumerate() {
        want.insert(format!("clause:singleton:{name}"), (k[v] as u64 - 1, 1));
    }
    want.insert("clause:empty".into(), (0, (n + m - 1) as u64));
    for (clause, w) in &want {
        let got = into.get(clause).copied().unwrap_or((0, 0));
        if got != *w {
            miss.push(format!("{clause}: wires in {got:?}, expected {w:?}"));
        }
    }

    if let Some(r) = root {
        expect("root degree", g.degree(CoinId(r)) as u128, (cf.w2 as u128) * p(3) as u128, &mut miss);
    }
    for (v, name) in f.names().iter().enumerate() {
        if let Some(&o) = var_out.get(name) {
            let want = 1 + (2 * k[v] - 1) * p(1);
            expect(&format!("degree of {name} output"), g.degree(CoinId(o)) as u128, want as u128, &mut miss);
        }
    }

    // The player stuck after the Fallon-terminal cut count must be Trudy's.
    let r_f = (cf.n + cf.w1 + cf.w2) as u128;
    let cuts = rc.strings - r_f;
    let stuck = if cuts % 2 == 0 { Player::P1 } else { Player::P2 };
    let trudy = if first == Role::Trudy { Player::P1 } else { Player::P2 };
    if stuck != trudy {
        miss.push(format!("after {cuts} cuts {stuck} is stuck, but Trudy is {trudy}"));
    }
    rc.mismatches = miss;
    rc
}

pub fn check_structure(f: &DnfFormula, width_base: u64, first: Role) -> CheckReport {
    let mut report = CheckReport::new("structure");
    let outcome = compile_gamesat_to_lava(f, width_base, first).map(|a| {
        let rc = recount_structure(&a.graph, f, width_base, first);
        (!rc.mismatches.is_empty()).then(|| format!("{f} N={width_base}: {}", rc.mismatches.join("; ")))
    });
    report.record(outcome, false);
    report
}

/// The four-variable formula plus `count` random formulas, each at N = 2 and 3
/// and for both first movers.
pub fn structure_campaign(seed: u64, count: usize) -> CheckReport {
    let mut report = CheckReport::new("structure");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut formulas = vec![four_variable_formula()];
    formulas.extend((0..count).map(|_| random_formula(&mut rng, 4, 3)));
    for f in &formulas {
        for n in [2, 3] {
            for first in [Role::Trudy, Role::Fallon] {
                let r = check_structure(f, n, first);
                report.passed += r.passed;
                report.failed += r.failed;
                report.counterexamples.extend(r.counterexamples);
            }
        }
    }
    report.counterexamples.truncate(MAX_COUNTEREXAMPLES);
    report
}

/// (x1 ∧ x2 ∧ x3) ∨ (x2 ∧ x3) ∨ (x3 ∧ x4).
pub fn four_variable_formula() -> DnfFormula {
    DnfFormula::new(4, vec![vec![0, 1, 2], vec![1, 2], vec![2, 3]]).expect("fixed formula")
}

/// (x1 ∧ x2).
pub fn pair_formula() -> DnfFormula {
    DnfFormula::new(2, vec![vec![0, 1]]).expect("fixed formula")
}

/// (x1 ∧ x2) ∨ (x1 ∧ x3) ∨ (x2 ∧ x3).
pub fn majority_formula() -> DnfFormula {
    DnfFormula::new(3, vec![vec![0, 1], vec![0, 2], vec![1, 2]]).expect("fixed formula")
}

/// Values with and without skips agree, and none is unresolved, for every
/// formula up to the given size and both first movers.
pub fn skip_dominance_sweep(max_n: usize, max_m: usize) -> CheckReport {
    let mut report = CheckReport::new("skip-dominance");
    let mut unresolved = 0;
    for f in enumerate_formulas(max_n, max_m) {
        for first in [Role::Trudy, Role::Fallon] {
            let outcome = (|| {
                let with = solve_gamesat(&f, first, true)?;
                let without = solve_gamesat(&f, first, false)?;
                unresolved += (with == GameSatValue::Unresolved) as usize;
                Ok((with != without || with == GameSatValue::Unresolved)
                    .then(|| format!("{f} first={first}: with skips {with:?}, without {without:?}")))
            })();
            report.record(outcome, true);
        }
    }
    report.notes.push(format!("{unresolved} unresolved values"));
    report
}

/// Results for one opponent at one N.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchupStats {
    pub opponent: String,
    pub playouts: usize,
    pub script_wins: usize,
    pub violations: usize,
    /// Playouts ending in the terminal shape predicted for the winner.
    pub shape_matches: usize,
    pub terminals: BTreeMap<String, usize>,
    /// Fallon terminals where the stuck player was not Trudy's.
    pub parity_violations: usize,
    pub phase_regressions: usize,
    pub playouts_with_deviations: usize,
    pub counterexamples: Vec<String>,
}

impl MatchupStats {
    pub fn perfect(&self) -> bool {
        self.playouts > 0
            && self.script_wins == self.playouts
            && self.violations == 0
            && self.shape_matches == self.playouts
            && self.parity_violations == 0
            && self.phase_regressions == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidthResult {
    pub width_base: u64,
    pub strings: usize,
    pub large_n: bool,
    pub matchups: Vec<MatchupStats>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyCampaign {
    pub formula: String,
    pub first: Role,
    pub predicted: GameSatValue,
    pub script: Option<PolicyKind>,
    pub seeds: usize,
    pub widths: Vec<WidthResult>,
    /// Smallest N at which the script was perfect against every opponent.
    pub minimal_n: Option<u64>,
}

impl StrategyCampaign {
    pub fn ok(&self) -> bool {
        self.minimal_n.is_some()
    }
}

/// Plays the predicted winner's script against every opponent over
/// `seeds` seeds at each N in `widths`.
pub fn campaign_strategies(f: &DnfFormula, first: Role, widths: &[u64], seeds: usize) -> Result<StrategyCampaign> {
    let table = Arc::new(GameSatTable::build(f, true, crate::gamesat::DEFAULT_BUDGET)?);
    let predicted = table.value(&crate::gamesat::GameSatState::initial(f.variable_count(), first));
    let role = predicted.winner();
    let mut campaign = StrategyCampaign {
        formula: f.to_string(),
        first,
        predicted,
        script: role.map(script_for),
        seeds,
        widths: Vec::new(),
        minimal_n: None,
    };
    let Some(role) = role else {
        return Ok(campaign);
    };
    let oracle = Oracle::Table(table);
    for &n in widths {
        let a = compile_gamesat_to_lava(f, n, first)?;
        let idx = GadgetIndex::new(&a);
        let me = a.player_of(role);
        let opponents = [PolicyKind::UniformRandom, PolicyKind::GreedyDisabler, script_for(role.other())];
        let matchups = opponents
            .iter()
            .map(|&opp| {
                let kinds = if me == Player::P1 {
                    [script_for(role), opp]
                } else {
                    [opp, script_for(role)]
                };
                let runs: Vec<Result<PlayoutRecord>> = (0..seeds as u64)
                    .into_par_iter()
                    .map(|seed| playout_kinds(&a, &idx, kinds, seed, Some(&oracle)))
                    .collect();
                tally(opp, me, &a, runs)
            })
            .collect::<Vec<_>>();
        let perfect = matchups.iter().all(MatchupStats::perfect);
        campaign.widths.push(WidthResult {
            width_base: n,
            strings: a.graph.string_count(),
            large_n: a.large_n,
            matchups,
        });
        if perfect {
            campaign.minimal_n = Some(n);
            break;
        }
    }
    Ok(campaign)
}

pub fn script_for(role: Role) -> PolicyKind {
    match role {
        Role::Trudy => PolicyKind::TrudyScript,
        Role::Fallon => PolicyKind::FallonScript,
    }
}

fn tally(
    opp: PolicyKind,
    me: Player,
    a: &crate::reduce::ReductionArtifact,
    runs: Vec<Result<PlayoutRecord>>,
) -> MatchupStats {
    let mut st = MatchupStats {
        opponent: opp.to_string(),
        ..Default::default()
    };
    let trudy = a.player_of(Role::Trudy);
    for (seed, run) in runs.into_iter().enumerate() {
        st.playouts += 1;
        let r = match run {
            Ok(r) => r,
            Err(e) => {
                st.violations += 1;
                if st.counterexamples.len() < MAX_COUNTEREXAMPLES {
                    st.counterexamples.push(format!("seed {seed}: {e}"));
                }
                continue;
            }
        };
        let won = r.winner == me;
        st.script_wins += won as usize;
        let expected = match r.winner_role {
            Role::Fallon => TerminalKind::Fallon,
            Role::Trudy => TerminalKind::Trudy,
        };
        st.shape_matches += (r.census.terminal == expected) as usize;
        *st.terminals.entry(format!("{:?}", r.census.terminal)).or_default() += 1;
        if r.census.terminal == TerminalKind::Fallon && r.stuck != trudy {
            st.parity_violations += 1;
        }
        st.phase_regressions += r.phase_regressions;
        st.playouts_with_deviations += (!r.deviations[me.index()].is_empty()) as usize;
        if (!won || r.census.terminal != expected) && st.counterexamples.len() < MAX_COUNTEREXAMPLES {
            st.counterexamples.push(format!(
                "seed {seed}: winner {} terminal {:?} clauses {:?} deviations {:?}",
                r.winner_role, r.census.terminal, r.census.clauses, r.deviations[me.index()]
            ));
        }
    }
    st
}

/// Script-against-script playouts that end in a Fallon terminal, with the
/// stuck player checked against the Trudy player.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityAudit {
    pub playouts: usize,
    pub fallon_terminals: usize,
    pub trudy_terminals: usize,
    pub violations: usize,
    pub errors: usize,
    pub counterexamples: Vec<String>,
}

pub fn parity_audit(cases: &[(DnfFormula, Role, u64)], seeds: usize) -> Result<ParityAudit> {
    let mut audit = ParityAudit::default();
    for (f, first, n) in cases {
        let table = Arc::new(GameSatTable::build(f, true, crate::gamesat::DEFAULT_BUDGET)?);
        let oracle = Oracle::Table(table);
        let a = compile_gamesat_to_lava(f, *n, *first)?;
        let idx = GadgetIndex::new(&a);
        let kinds = [script_for(*first), script_for(first.other())];
        let trudy = a.player_of(Role::Trudy);
        let runs: Vec<Result<PlayoutRecord>> = (0..seeds as u64)
            .into_par_iter()
            .map(|seed| playout_kinds(&a, &idx, kinds, seed, Some(&oracle)))
            .collect();
        for (seed, run) in runs.into_iter().enumerate() {
            audit.playouts += 1;
            match run {
                Ok(r) => match r.census.terminal {
                    TerminalKind::Fallon => {
                        audit.fallon_terminals += 1;
                        if r.stuck != trudy {
                            audit.violations += 1;
                            audit.counterexamples.push(format!("{f} N={n} seed {seed}: {} stuck", r.stuck));
                        }
                    }
                    TerminalKind::Trudy => audit.trudy_terminals += 1,
                    TerminalKind::Other => {}
                },
                Err(e) => {
                    audit.errors += 1;
                    audit.counterexamples.push(format!("{f} N={n} seed {seed}: {e}"));
                }
            }
        }
    }
    audit.counterexamples.truncate(MAX_COUNTEREXAMPLES);
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seeded_and_loop_free() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g = random_multigraph(&mut a, ORACLE_SHAPE);
            assert_eq!(g, random_multigraph(&mut b, ORACLE_SHAPE));
            assert!(g.first_self_loop().is_none());
            assert!(g.string_count() <= 10);
        }
        let pruned = random_multigraph(&mut a, LAVA_CHAIN_SHAPE);
        assert!(pruned.degrees().iter().all(|&d| d > 0));
    }

    #[test]
    fn planted_pattern_is_found() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let g = planted_loony(&mut rng, 12);
            assert!(g.string_count() <= 12);
            let s = GameState::new(Arc::new(g)).unwrap();
            assert!(!find_loony_witnesses(&s).is_empty());
        }
    }

    #[test]
    fn formula_enumeration_counts() {
        // n=1: one subset, m=0 or 1.
        assert_eq!(enumerate_formulas(1, 3).len(), 2);
        // n=2: three subsets, m=0..=3 → 1+3+3+1.
        assert_eq!(enumerate_formulas(2, 3).len(), 2 + 8);
    }

    #[test]
    fn random_formulas_compile() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let f = random_formula(&mut rng, 4, 3);
            assert!(crate::reduce::augment_formula(&f).is_ok());
        }
    }

    #[test]
    fn structure_recount_on_fixtures() {
        for f in [four_variable_formula(), pair_formula(), majority_formula()] {
            assert!(check_structure(&f, 2, Role::Trudy).ok());
        }
    }

    #[test]
    fn recount_notices_a_missing_string() {
        let a = compile_gamesat_to_lava(&pair_formula(), 2, Role::Fallon).unwrap();
        let mut g = a.graph.clone();
        let keep = g.string_count() - 1;
        g.truncate_strings(keep);
        assert!(!recount_structure(&g, &pair_formula(), 2, Role::Fallon).mismatches.is_empty());
    }

    #[test]
    fn small_campaigns_pass() {
        assert!(check_oracle(1, 5).ok());
        assert!(check_cycle_union(1, 5).ok());
        assert!(check_lava_chains(1, 5).ok());
        assert!(check_loony(1, 5).ok());
    }
}
