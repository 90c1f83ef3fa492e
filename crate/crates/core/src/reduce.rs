//! Reductions between the games.
//!
//! * [`reduce_nimstring_to_sac`]: add a long cycle so that Strings-and-Coins
//!   on the result has the Nimstring winner of the input.
//! * [`reduce_lava_to_nimstring`]: hang a chain of at least five strings from
//!   every coin to the ground.
//! * [`compile_gamesat_to_lava`]: the gadget compiler from positive-DNF Game
//!   SAT to Coins-are-Lava, with parity padding.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::engine::Player;
use crate::error::{Error, Result};
use crate::gamesat::{DnfFormula, Role};
use crate::multigraph::{CoinId, Endpoint, Multigraph};

pub const DEFAULT_CHAIN_LEN: usize = 5;
pub const MIN_CHAIN_LEN: usize = 5;
pub const DEFAULT_STRING_CAP: u128 = 2_000_000;

/// `G ⊎ C_k` with `k = max(2, |V(G)| + 1)`.
pub fn reduce_nimstring_to_sac(g: &Multigraph) -> Multigraph {
    let k = (g.coin_count() + 1).max(2);
    let mut cycle = Multigraph::cycle_graph(k).expect("cycle length is at least 2");
    for i in 0..k {
        cycle.set_coin_label(CoinId(i), format!("cycle:{i}"));
    }
    cycle.label_strings(0..k, "cycle");
    g.disjoint_union(&cycle)
}

/// Hangs a path of `chain_len` strings from each coin to the ground through
/// `chain_len - 1` fresh coins. Original strings keep their ids.
pub fn reduce_lava_to_nimstring(g: &Multigraph, chain_len: usize) -> Result<Multigraph> {
    if chain_len < MIN_CHAIN_LEN {
        return Err(Error::ChainTooShort(chain_len));
    }
    let mut h = g.clone();
    for c in 0..g.coin_count() {
        let label = format!("chain:{c}");
        let mut prev = Endpoint::coin(c);
        for step in 0..chain_len {
            let next = if step + 1 == chain_len {
                Endpoint::Ground
            } else {
                let fresh = h.add_coin();
                h.set_coin_label(fresh, label.clone());
                Endpoint::Coin(fresh)
            };
            let id = h.add_string(prev, next)?;
            h.set_string_label(id, label.clone());
            prev = next;
        }
    }
    Ok(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClauseRole {
    Real,
    Singleton,
    Empty,
}

/// A clause of the augmented formula F′.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedClause {
    pub role: ClauseRole,
    pub vars: Vec<usize>,
}

/// Real clauses in input order, then one singleton per variable, then the
/// empty clause.
pub fn augment_formula(f: &DnfFormula) -> Result<Vec<AugmentedClause>> {
    for (j, c) in f.clauses().iter().enumerate() {
        if c.len() < 2 {
            return Err(Error::ClauseTooSmall(j));
        }
    }
    if let Some(v) = f.occurrences().iter().position(|&k| k == 0) {
        return Err(Error::UnusedVariable(v));
    }
    let mut out: Vec<AugmentedClause> = f
        .clauses()
        .iter()
        .map(|c| AugmentedClause {
            role: ClauseRole::Real,
            vars: c.clone(),
        })
        .collect();
    out.extend((0..f.variable_count()).map(|v| AugmentedClause {
        role: ClauseRole::Singleton,
        vars: vec![v],
    }));
    out.push(AugmentedClause {
        role: ClauseRole::Empty,
        vars: Vec::new(),
    });
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WireSource {
    Variable(usize),
    Root,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GadgetKind {
    Variable { var: usize },
    /// `target` indexes the augmented clause list.
    Wire { level: u8, source: WireSource, target: usize },
    Clause { level: u8, clause: usize, role: ClauseRole },
    ParityPad,
}

/// `width` consecutive string ids starting at `first`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RopeSpan {
    pub first: usize,
    pub width: usize,
}

impl RopeSpan {
    fn from_range(r: Range<usize>) -> Self {
        RopeSpan {
            first: r.start,
            width: r.len(),
        }
    }

    pub fn ids(&self) -> Range<usize> {
        self.first..self.first + self.width
    }

    pub fn contains(&self, id: usize) -> bool {
        self.ids().contains(&id)
    }
}

/// One gadget. Ropes run from the input side to the output side: variable
/// `[bottom, top]`, wire `[bottom, top]`, clause `[rope]`, pad `[pad]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetPlan {
    pub kind: GadgetKind,
    pub label: String,
    pub ropes: Vec<RopeSpan>,
    pub input: Option<usize>,
    pub mid: Option<usize>,
    pub output: Option<usize>,
}

impl GadgetPlan {
    pub fn ids(&self) -> Range<usize> {
        let first = self.ropes.first().map_or(0, |r| r.first);
        let last = self.ropes.last().map_or(0, |r| r.first + r.width);
        first..last
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityRecord {
    /// Strings left in the canonical Fallon-win terminal.
    pub r_f: u64,
    /// Cuts from the start to that terminal, pad included.
    pub c_f: u64,
    pub fallon_player: Player,
    pub pad: bool,
    pub rule: String,
}

/// Closed-form sizes of a compiled instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub n: u64,
    pub m: u64,
    pub w1: u64,
    pub w2: u64,
    pub clauses: u64,
    /// Total strings without the pad.
    pub t: u128,
}

pub fn closed_form(f: &DnfFormula, width_base: u64) -> ClosedForm {
    let n = f.variable_count() as u64;
    let m = f.clause_count() as u64;
    let sum_k: u64 = f.occurrences().iter().map(|&k| k as u64).sum();
    let w1 = 2 * sum_k - n;
    let w2 = 2 * (n + m) - 1;
    let p = |e: u32| (width_base as u128).pow(e);
    let t = 2 * n as u128
        + w1 as u128 * (p(1) + p(2))
        + w2 as u128 * (p(3) + p(4))
        + (m + n + 1) as u128 * p(5);
    ClosedForm {
        n,
        m,
        w1,
        w2,
        clauses: m + n + 1,
        t,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionArtifact {
    pub graph: Multigraph,
    pub formula: DnfFormula,
    pub clauses: Vec<AugmentedClause>,
    pub plan: Vec<GadgetPlan>,
    pub width_base: u64,
    pub first: Role,
    pub root: usize,
    pub parity: ParityRecord,
    /// Whether N ≥ m²n², the regime the correctness argument asks for.
    pub large_n: bool,
}

impl ReductionArtifact {
    /// The Lava player who plays `role`: the first mover is P1.
    pub fn player_of(&self, role: Role) -> Player {
        if role == self.first {
            Player::P1
        } else {
            Player::P2
        }
    }

    pub fn role_of(&self, p: Player) -> Role {
        if p == Player::P1 {
            self.first
        } else {
            self.first.other()
        }
    }

    /// Index of the gadget owning string `id`.
    pub fn owner(&self, id: usize) -> Option<usize> {
        let i = self.plan.partition_point(|g| g.ids().end <= id);
        (i < self.plan.len() && self.plan[i].ids().contains(&id)).then_some(i)
    }

    pub fn provenance(&self, id: usize) -> &str {
        self.graph.string_label(id).unwrap_or("?")
    }

    pub fn plan_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.plan)?)
    }

    fn clause_tag(&self, j: usize) -> String {
        clause_tag(&self.formula, &self.clauses, j)
    }
}

fn clause_tag(f: &DnfFormula, clauses: &[AugmentedClause], j: usize) -> String {
    match clauses[j].role {
        ClauseRole::Real => format!("clause:real:{j}"),
        ClauseRole::Singleton => format!("clause:singleton:{}", f.names()[clauses[j].vars[0]]),
        ClauseRole::Empty => "clause:empty".to_owned(),
    }
}

pub fn compile_gamesat_to_lava(f: &DnfFormula, width_base: u64, first: Role) -> Result<ReductionArtifact> {
    compile_with_cap(f, width_base, first, DEFAULT_STRING_CAP)
}

pub fn compile_with_cap(f: &DnfFormula, width_base: u64, first: Role, cap: u128) -> Result<ReductionArtifact> {
    if width_base < 2 {
        return Err(Error::ZeroWidth);
    }
    let clauses = augment_formula(f)?;
    let cf = closed_form(f, width_base);
    if cf.t + 1 > cap {
        return Err(Error::OverBudget {
            strings: cf.t + 1,
            cap,
        });
    }
    let n = f.variable_count();
    let width = |level: u32| width_base.pow(level) as usize;
    let mut g = Multigraph::new();
    let mut plan = Vec::new();

    let root = g.add_coin();
    g.set_coin_label(root, "root");

    let mut var_out = Vec::with_capacity(n);
    for (v, name) in f.names().iter().enumerate() {
        let mid = g.add_coin();
        let out = g.add_coin();
        g.set_coin_label(mid, format!("var:{name}:mid"));
        g.set_coin_label(out, format!("var:{name}:out"));
        let bottom = g.add_rope(Endpoint::Coin(mid), Endpoint::Ground, 1)?;
        let top = g.add_rope(Endpoint::Coin(out), Endpoint::Coin(mid), 1)?;
        let label = format!("var:{name}");
        g.label_strings(bottom.clone(), &format!("{label}:bottom"));
        g.label_strings(top.clone(), &format!("{label}:top"));
        plan.push(GadgetPlan {
            kind: GadgetKind::Variable { var: v },
            label,
            ropes: vec![RopeSpan::from_range(bottom), RopeSpan::from_range(top)],
            input: None,
            mid: Some(mid.0),
            output: Some(out.0),
        });
        var_out.push(out);
    }

    let mut clause_in = Vec::with_capacity(clauses.len());
    for (j, c) in clauses.iter().enumerate() {
        let coin = g.add_coin();
        let label = clause_tag(f, &clauses, j);
        g.set_coin_label(coin, label.clone());
        let rope = g.add_rope(Endpoint::Coin(coin), Endpoint::Ground, width(5))?;
        g.label_strings(rope.clone(), &format!("{label}:rope"));
        plan.push(GadgetPlan {
            kind: GadgetKind::Clause {
                level: 3,
                clause: j,
                role: c.role,
            },
            label,
            ropes: vec![RopeSpan::from_range(rope)],
            input: Some(coin.0),
            mid: None,
            output: None,
        });
        clause_in.push(coin);
    }

    let m = f.clause_count();
    let singleton = |v: usize| m + v;
    let empty = m + n;

    let mut wires: Vec<(u8, WireSource, usize)> = Vec::new();
    let occurrences = f.occurrences();
    for v in 0..n {
        for (j, c) in f.clauses().iter().enumerate() {
            if c.contains(&v) {
                wires.push((1, WireSource::Variable(v), j));
            }
        }
        for _ in 1..occurrences[v] {
            wires.push((1, WireSource::Variable(v), singleton(v)));
        }
    }
    for j in 0..m + n {
        wires.push((2, WireSource::Root, j));
    }
    for _ in 1..n + m {
        wires.push((2, WireSource::Root, empty));
    }

    let mut serial = std::collections::HashMap::new();
    for (level, source, target) in wires {
        let src_coin = match source {
            WireSource::Variable(v) => var_out[v],
            WireSource::Root => root,
        };
        let src_name = match source {
            WireSource::Variable(v) => f.names()[v].clone(),
            WireSource::Root => "root".to_owned(),
        };
        let tag = clause_tag(f, &clauses, target);
        let tag = tag.strip_prefix("clause:").unwrap_or(&tag).to_owned();
        let k = serial.entry((source, target)).or_insert(0usize);
        let label = format!("wire:L{level}:{src_name}->{tag}#{k}");
        *k += 1;
        let mid = g.add_coin();
        g.set_coin_label(mid, format!("{label}:mid"));
        let lv = level as u32;
        let bottom = g.add_rope(Endpoint::Coin(src_coin), Endpoint::Coin(mid), width(2 * lv - 1))?;
        let top = g.add_rope(Endpoint::Coin(mid), Endpoint::Coin(clause_in[target]), width(2 * lv))?;
        g.label_strings(bottom.clone(), &format!("{label}:bottom"));
        g.label_strings(top.clone(), &format!("{label}:top"));
        plan.push(GadgetPlan {
            kind: GadgetKind::Wire {
                level,
                source,
                target,
            },
            label,
            ropes: vec![RopeSpan::from_range(bottom), RopeSpan::from_range(top)],
            input: Some(src_coin.0),
            mid: Some(mid.0),
            output: Some(clause_in[target].0),
        });
    }
    debug_assert_eq!(g.string_count() as u128, cf.t);

    let nm = (n * m) as u64;
    let artifact = ReductionArtifact {
        graph: g,
        formula: f.clone(),
        clauses,
        plan,
        width_base,
        first,
        root: root.0,
        parity: ParityRecord {
            r_f: 0,
            c_f: 0,
            fallon_player: Player::P1,
            pad: false,
            rule: String::new(),
        },
        large_n: width_base >= nm.saturating_mul(nm),
    };
    Ok(fix_parity(artifact, first))
}

/// Decides the ground-to-ground pad so that the player stuck in the
/// canonical Fallon-win terminal (every variable and wire down to one string,
/// every clause rope gone) is the Trudy player. Sets the first mover to
/// `first`, and adds or drops the pad as needed.
pub fn fix_parity(mut a: ReductionArtifact, first: Role) -> ReductionArtifact {
    if a.parity.pad {
        let keep = a.graph.string_count() - 1;
        a.graph.truncate_strings(keep);
        a.plan.pop();
    }
    a.first = first;
    let cf = closed_form(&a.formula, a.width_base);
    let r_f = cf.n + cf.w1 + cf.w2;
    let unpadded = a.graph.string_count() as u64 - r_f;
    let fallon_player = a.player_of(Role::Fallon);
    // Lava alternates every cut, so P1 moves after an even number of cuts.
    let stuck = if unpadded % 2 == 0 { Player::P1 } else { Player::P2 };
    let pad = stuck == fallon_player;
    if pad {
        let id = a
            .graph
            .add_string(Endpoint::Ground, Endpoint::Ground)
            .expect("ground endpoints are always valid");
        a.graph.set_string_label(id, "pad");
        a.plan.push(GadgetPlan {
            kind: GadgetKind::ParityPad,
            label: "pad".into(),
            ropes: vec![RopeSpan { first: id, width: 1 }],
            input: None,
            mid: None,
            output: None,
        });
    }
    let c_f = unpadded + pad as u64;
    a.parity = ParityRecord {
        r_f,
        c_f,
        fallon_player,
        pad,
        rule: format!(
            "{c_f} cuts reach the Fallon terminal with {r_f} strings left; the stuck mover is {} ({})",
            a.player_of(Role::Trudy),
            Role::Trudy
        ),
    };
    a
}

/// The three stages of the full reduction.
pub struct Pipeline {
    pub lava: ReductionArtifact,
    pub nim: Multigraph,
    pub sac: Multigraph,
}

pub fn full_pipeline(f: &DnfFormula, width_base: u64, first: Role) -> Result<Pipeline> {
    let lava = compile_gamesat_to_lava(f, width_base, first)?;
    let nim = reduce_lava_to_nimstring(&lava.graph, DEFAULT_CHAIN_LEN)?;
    let sac = reduce_nimstring_to_sac(&nim);
    Ok(Pipeline { lava, nim, sac })
}

impl ReductionArtifact {
    /// Gadget indices of every wire into augmented clause `j`.
    pub fn wires_into(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.plan.iter().enumerate().filter_map(move |(i, g)| match g.kind {
            GadgetKind::Wire { target, .. } if target == j => Some(i),
            _ => None,
        })
    }

    pub fn describe(&self) -> String {
        let cf = closed_form(&self.formula, self.width_base);
        let mut s = format!(
            "formula {}\nN={} n={} m={} W1={} W2={} clauses={} strings={} pad={}\n",
            self.formula,
            self.width_base,
            cf.n,
            cf.m,
            cf.w1,
            cf.w2,
            cf.clauses,
            self.graph.string_count(),
            self.parity.pad
        );
        for j in 0..self.clauses.len() {
            s.push_str(&format!("{} wires={}\n", self.clause_tag(j), self.wires_into(j).count()));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{GameKind, GameState};
    use crate::solver::Solver;
    use std::sync::Arc;

    fn pair() -> DnfFormula {
        DnfFormula::new(2, vec![vec![0, 1]]).unwrap()
    }

    fn four_variable() -> DnfFormula {
        DnfFormula::new(4, vec![vec![0, 1, 2], vec![1, 2], vec![2, 3]]).unwrap()
    }

    #[test]
    fn cycle_union_sizes_and_winner() {
        let mut g = Multigraph::with_coins(2);
        g.add_string(Endpoint::coin(0), Endpoint::coin(1)).unwrap();
        let h = reduce_nimstring_to_sac(&g);
        assert_eq!((h.coin_count(), h.string_count()), (5, 4));
        let solver = Solver::default();
        let nim = solver
            .solve(&GameState::new(Arc::new(g)).unwrap(), GameKind::Nimstring)
            .unwrap();
        let sac = solver
            .solve(&GameState::new(Arc::new(h)).unwrap(), GameKind::StringsAndCoins)
            .unwrap();
        assert!(!nim.winner_for_mover);
        assert!(sac.net_score_for_mover < 0);

        let empty = reduce_nimstring_to_sac(&Multigraph::new());
        assert_eq!((empty.coin_count(), empty.string_count()), (2, 2));
    }

    #[test]
    fn lava_chain_sizes() {
        let mut g = Multigraph::with_coins(2);
        g.add_string(Endpoint::coin(0), Endpoint::coin(1)).unwrap();
        let h = reduce_lava_to_nimstring(&g, 5).unwrap();
        assert_eq!((h.coin_count(), h.string_count()), (10, 11));
        assert_eq!(h.string(0), g.string(0));
        assert!(matches!(reduce_lava_to_nimstring(&g, 4), Err(Error::ChainTooShort(4))));
    }

    #[test]
    fn augment_counts() {
        assert_eq!(augment_formula(&four_variable()).unwrap().len(), 8);
        assert_eq!(augment_formula(&pair()).unwrap().len(), 4);
        let bad = DnfFormula::new(2, vec![vec![0, 1], vec![1]]).unwrap();
        assert!(matches!(augment_formula(&bad), Err(Error::ClauseTooSmall(1))));
        let unused = DnfFormula::new(3, vec![vec![0, 1]]).unwrap();
        assert!(matches!(augment_formula(&unused), Err(Error::UnusedVariable(2))));
    }

    #[test]
    fn closed_forms() {
        let cf = closed_form(&four_variable(), 2);
        assert_eq!((cf.w1, cf.w2, cf.clauses), (10, 13, 8));
        let cf = closed_form(&pair(), 2);
        assert_eq!((cf.w1, cf.w2, cf.t), (2, 5, 264));
    }

    #[test]
    fn compile_pair() {
        let a = compile_gamesat_to_lava(&pair(), 2, Role::Trudy).unwrap();
        assert_eq!(a.graph.string_count(), 264 + a.parity.pad as usize);
        // Every string has exactly one owner.
        for id in 0..a.graph.string_count() {
            let o = a.owner(id).unwrap();
            assert!(a.plan[o].ropes.iter().any(|r| r.contains(id)));
        }
        // Root degree: five level-2 bottom ropes of width 8.
        assert_eq!(a.graph.degree(CoinId(a.root)), 5 * 8);
    }

    #[test]
    fn parity_flips_with_first_mover() {
        let t = compile_gamesat_to_lava(&pair(), 2, Role::Trudy).unwrap();
        let f = compile_gamesat_to_lava(&pair(), 2, Role::Fallon).unwrap();
        assert_ne!(t.parity.pad, f.parity.pad);
        for a in [&t, &f] {
            let stuck = if a.parity.c_f % 2 == 0 { Player::P1 } else { Player::P2 };
            assert_eq!(a.role_of(stuck), Role::Trudy);
        }
        // Refixing is idempotent and reversible.
        let back = fix_parity(fix_parity(t.clone(), Role::Fallon), Role::Trudy);
        assert_eq!(back.graph, t.graph);
    }

    #[test]
    fn over_budget() {
        assert!(matches!(
            compile_with_cap(&pair(), 2, Role::Trudy, 100),
            Err(Error::OverBudget { .. })
        ));
    }

    #[test]
    fn pipeline_is_deterministic() {
        let a = full_pipeline(&pair(), 2, Role::Trudy).unwrap();
        let b = full_pipeline(&pair(), 2, Role::Trudy).unwrap();
        assert_eq!(a.sac.canonical_text(), b.sac.canonical_text());
        let lava_coins = a.lava.graph.coin_count();
        assert_eq!(a.nim.string_count(), a.lava.graph.string_count() + 5 * lava_coins);
        assert!(a.sac.string_label(0).is_some());
    }
}
