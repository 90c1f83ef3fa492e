//! Scripted players for compiled Lava positions.
//!
//! [`FallonScript`] and [`TrudyScript`] follow the four-phase plans for the
//! two Game SAT roles: set variables with a Game SAT oracle, settle the
//! level-1 wires, settle the level-2 wires, then cut clause ropes.
//! [`UniformRandom`] and [`GreedyDisabler`] are baselines. [`playout`] runs
//! two policies to the end and returns a transcript with a terminal census.
//!
//! Scripts never guess around a position they did not plan for: whenever a
//! planned cut is unavailable they note a deviation and play a filler cut.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{GameKind, GameState, Player};
use crate::error::{Error, Result};
use crate::gamesat::{GameSatMove, GameSatState, GameSatTable, Role, Truth};
use crate::multigraph::Multigraph;
use crate::reduce::{ClauseRole, GadgetKind, ReductionArtifact, WireSource};

const LAVA: GameKind = GameKind::CoinsAreLava;
const BOTTOM: usize = 0;
const TOP: usize = 1;

/// Gadget lookup tables for one artifact.
#[derive(Clone, Debug)]
pub struct GadgetIndex {
    /// Gadget of each variable.
    pub vars: Vec<usize>,
    /// Gadget of each augmented clause.
    pub clauses: Vec<usize>,
    pub level1: Vec<usize>,
    pub level2: Vec<usize>,
    pub board: Arc<Multigraph>,
    owner: Vec<(u32, u8)>,
}

impl GadgetIndex {
    pub fn new(a: &ReductionArtifact) -> Self {
        let mut idx = GadgetIndex {
            vars: vec![0; a.formula.variable_count()],
            clauses: vec![0; a.clauses.len()],
            level1: Vec::new(),
            level2: Vec::new(),
            board: Arc::new(a.graph.clone()),
            owner: vec![(0, 0); a.graph.string_count()],
        };
        for (g, plan) in a.plan.iter().enumerate() {
            match plan.kind {
                GadgetKind::Variable { var } => idx.vars[var] = g,
                GadgetKind::Clause { clause, .. } => idx.clauses[clause] = g,
                GadgetKind::Wire { level: 1, .. } => idx.level1.push(g),
                GadgetKind::Wire { .. } => idx.level2.push(g),
                GadgetKind::ParityPad => {}
            }
            for (r, rope) in plan.ropes.iter().enumerate() {
                for id in rope.ids() {
                    idx.owner[id] = (g as u32, r as u8);
                }
            }
        }
        idx
    }

    /// Gadget and rope of string `id`.
    pub fn owner(&self, id: usize) -> (usize, usize) {
        let (g, r) = self.owner[id];
        (g as usize, r as usize)
    }
}

/// Alive strings per rope, with a cursor at the lowest alive id.
#[derive(Clone, Debug)]
pub struct RopeView {
    alive: Vec<[u32; 2]>,
    cursor: Vec<[usize; 2]>,
    end: Vec<[usize; 2]>,
}

impl RopeView {
    pub fn new(a: &ReductionArtifact) -> Self {
        let mut v = RopeView {
            alive: Vec::with_capacity(a.plan.len()),
            cursor: Vec::with_capacity(a.plan.len()),
            end: Vec::with_capacity(a.plan.len()),
        };
        for plan in &a.plan {
            let mut alive = [0; 2];
            let mut cursor = [0; 2];
            let mut end = [0; 2];
            for (r, rope) in plan.ropes.iter().enumerate() {
                alive[r] = rope.width as u32;
                cursor[r] = rope.first;
                end[r] = rope.first + rope.width;
            }
            v.alive.push(alive);
            v.cursor.push(cursor);
            v.end.push(end);
        }
        v
    }

    /// Call after `id` has been cut from `s`.
    pub fn notify(&mut self, idx: &GadgetIndex, s: &GameState, id: usize) {
        let (g, r) = idx.owner(id);
        self.alive[g][r] -= 1;
        let c = &mut self.cursor[g][r];
        while *c < self.end[g][r] && !s.is_alive(*c) {
            *c += 1;
        }
    }

    pub fn alive(&self, g: usize, r: usize) -> u32 {
        self.alive[g][r]
    }

    pub fn lowest(&self, g: usize, r: usize) -> Option<usize> {
        (self.alive[g][r] > 0).then_some(self.cursor[g][r])
    }
}

/// What a policy sees when asked for a move.
pub struct Ctx<'a> {
    pub artifact: &'a ReductionArtifact,
    pub index: &'a GadgetIndex,
    pub state: &'a GameState,
    pub view: &'a RopeView,
    /// The previous cut, which in Lava was always the opponent's.
    pub last_cut: Option<usize>,
    pub ply: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub string: usize,
    pub phase: u8,
}

pub trait Policy {
    fn name(&self) -> String;
    fn choose(&mut self, cx: &Ctx) -> Result<Decision>;
    fn deviations(&self) -> &[String] {
        &[]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WireClass {
    Good,
    Bad,
    Neutral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WireStatus {
    Intact,
    Disabled,
    Activated,
}

/// Read-only helpers over one position.
struct Board<'a> {
    a: &'a ReductionArtifact,
    idx: &'a GadgetIndex,
    s: &'a GameState,
    v: &'a RopeView,
}

impl<'a> Board<'a> {
    fn new(cx: &Ctx<'a>) -> Self {
        Board {
            a: cx.artifact,
            idx: cx.index,
            s: cx.state,
            v: cx.view,
        }
    }

    fn hp(&self, g: usize) -> u32 {
        self.v.alive(g, BOTTOM)
    }

    fn top(&self, g: usize) -> u32 {
        self.v.alive(g, TOP)
    }

    fn status(&self, g: usize) -> WireStatus {
        if self.hp(g) == 0 {
            WireStatus::Disabled
        } else if self.top(g) == 0 {
            WireStatus::Activated
        } else {
            WireStatus::Intact
        }
    }

    fn wire(&self, g: usize) -> (WireSource, usize) {
        match self.a.plan[g].kind {
            GadgetKind::Wire { source, target, .. } => (source, target),
            _ => unreachable!("gadget {g} is not a wire"),
        }
    }

    fn source_var(&self, g: usize) -> usize {
        match self.wire(g).0 {
            WireSource::Variable(v) => v,
            WireSource::Root => unreachable!("level-1 wires start at a variable"),
        }
    }

    fn role(&self, clause: usize) -> ClauseRole {
        self.a.clauses[clause].role
    }

    fn truth(&self, var: usize) -> Truth {
        let g = self.idx.vars[var];
        if self.v.alive(g, TOP) == 0 {
            Truth::True
        } else if self.v.alive(g, BOTTOM) == 0 {
            Truth::False
        } else {
            Truth::Unset
        }
    }

    fn assignment(&self) -> Vec<Truth> {
        (0..self.idx.vars.len()).map(|v| self.truth(v)).collect()
    }

    fn legal_in(&self, g: usize, r: usize) -> Option<usize> {
        self.v.lowest(g, r).filter(|&id| self.s.is_legal(id, LAVA))
    }

    fn disable(&self, g: usize) -> Option<usize> {
        self.legal_in(g, BOTTOM)
    }

    fn activate(&self, g: usize) -> Option<usize> {
        self.legal_in(g, TOP)
    }

    /// First phase whose work is not finished: variables unset, level-1
    /// wires intact, level-2 wires intact, clause ropes.
    fn phase(&self) -> u8 {
        if self.assignment().contains(&Truth::Unset) {
            1
        } else if self.idx.level1.iter().any(|&g| self.status(g) == WireStatus::Intact) {
            2
        } else if self.idx.level2.iter().any(|&g| self.status(g) == WireStatus::Intact) {
            3
        } else {
            4
        }
    }

    /// Wires ordered for disabling: closest to activation first.
    fn by_urgency(&self, mut wires: Vec<usize>) -> Vec<usize> {
        wires.sort_by_key(|&g| (self.top(g), g));
        wires
    }

    fn first_disable(&self, wires: Vec<usize>) -> Option<usize> {
        self.by_urgency(wires).into_iter().find_map(|g| self.disable(g))
    }

    /// A cut that changes no gadget's status: the lowest id in a rope with
    /// at least two strings left, else any legal cut.
    fn filler(&self) -> Option<usize> {
        let n = self.a.plan.len();
        (0..n)
            .flat_map(|g| [(g, 0), (g, 1)])
            .filter(|&(g, r)| r < self.a.plan[g].ropes.len() && self.v.alive(g, r) >= 2)
            .find_map(|(g, r)| self.v.lowest(g, r))
            .or_else(|| {
                (0..n)
                    .flat_map(|g| [(g, 0), (g, 1)])
                    .filter(|&(g, r)| r < self.a.plan[g].ropes.len())
                    .find_map(|(g, r)| self.legal_in(g, r))
            })
    }

    fn level1_into(&self, clause: usize) -> impl Iterator<Item = usize> + '_ {
        self.idx
            .level1
            .iter()
            .copied()
            .filter(move |&g| self.wire(g).1 == clause)
    }

    /// Lowest real clause whose variables are all true.
    fn satisfied_real(&self) -> Option<usize> {
        (0..self.a.clauses.len()).find(|&j| {
            self.role(j) == ClauseRole::Real
                && self.a.clauses[j].vars.iter().all(|&v| self.truth(v) == Truth::True)
        })
    }

    /// A satisfied real or singleton clause whose level-1 wires are all
    /// activated, preferring `c`.
    fn activated_clause(&self, c: Option<usize>) -> Option<usize> {
        let all_activated = |j: usize| self.level1_into(j).all(|g| self.status(g) == WireStatus::Activated);
        c.filter(|&j| all_activated(j)).or_else(|| {
            (0..self.a.clauses.len()).find(|&j| {
                self.role(j) == ClauseRole::Singleton
                    && self.truth(self.a.clauses[j].vars[0]) == Truth::True
                    && all_activated(j)
            })
        })
    }

    fn set_variable(&self, var: usize, value: bool) -> Option<usize> {
        self.legal_in(self.idx.vars[var], if value { TOP } else { BOTTOM })
    }
}

/// How the variable-setting phase picks its moves.
#[derive(Clone, Debug)]
pub enum Oracle {
    Table(Arc<GameSatTable>),
    /// Variable settings to play in order, for formulas beyond the table
    /// budget. Entries for variables already set are passed over.
    Moves(Vec<(usize, bool)>),
}

/// Per-script tracking: the phase reached, the clauses chosen so far, the
/// wires being kept, and the deviations met.
#[derive(Clone, Debug, Default)]
pub struct PhaseState {
    pub phase: u8,
    pub c: Option<usize>,
    pub c_prime: Option<usize>,
    pub c_double_prime: Option<usize>,
    /// Kept level-1 wire per variable.
    pub level1_keep: Vec<Option<usize>>,
    pub level2_keep: Option<usize>,
    pub deviations: Vec<String>,
    noted: BTreeSet<String>,
}

impl PhaseState {
    fn note(&mut self, ply: usize, msg: String) {
        if self.noted.insert(msg.clone()) {
            self.deviations.push(format!("ply {ply}: {msg}"));
        }
    }

    fn advance(&mut self, observed: u8) -> u8 {
        self.phase = self.phase.max(observed);
        self.phase
    }
}

fn oracle_move(
    oracle: &Oracle,
    b: &Board,
    role: Role,
    ps: &mut PhaseState,
    ply: usize,
) -> Option<usize> {
    let assignment = b.assignment();
    let mv = match oracle {
        Oracle::Table(t) => {
            let st = GameSatState {
                assignment: assignment.clone(),
                mover: role,
            };
            let mv = t.winning_move(&st);
            if mv.is_none() {
                ps.note(ply, format!("game sat oracle has no winning move for {role}"));
            }
            mv
        }
        Oracle::Moves(list) => list
            .iter()
            .find(|(v, _)| assignment[*v] == Truth::Unset)
            .map(|&(v, val)| GameSatMove::Set(v, val)),
    };
    let mv = mv.or_else(|| {
        assignment
            .iter()
            .position(|&t| t == Truth::Unset)
            .map(|v| GameSatMove::Set(v, role.preferred_value()))
    });
    match mv? {
        GameSatMove::Set(v, val) => b.set_variable(v, val),
        GameSatMove::Skip => None,
    }
}

/// Keeps `current` while it still has HP, else picks the first candidate
/// with HP under `rank` (smallest rank wins, ties to the lowest gadget).
fn keep<K: Ord>(b: &Board, current: Option<usize>, candidates: &[usize], rank: impl Fn(usize) -> K) -> Option<usize> {
    if let Some(g) = current.filter(|&g| b.hp(g) > 0 && candidates.contains(&g)) {
        return Some(g);
    }
    candidates
        .iter()
        .copied()
        .filter(|&g| b.hp(g) > 0)
        .min_by_key(|&g| (rank(g), g))
}

/// Plays Fallon's side of a compiled position.
pub struct FallonScript {
    oracle: Oracle,
    pub ps: PhaseState,
}

impl FallonScript {
    pub fn new(oracle: Oracle) -> Self {
        FallonScript {
            oracle,
            ps: PhaseState::default(),
        }
    }

    fn classify_level1(b: &Board, g: usize) -> WireClass {
        let (_, target) = b.wire(g);
        if b.truth(b.source_var(g)) != Truth::True {
            WireClass::Neutral
        } else if b.role(target) == ClauseRole::Real {
            WireClass::Good
        } else {
            WireClass::Bad
        }
    }

    fn classify_level2(b: &Board, g: usize) -> WireClass {
        if b.role(b.wire(g).1) == ClauseRole::Empty {
            WireClass::Bad
        } else {
            WireClass::Good
        }
    }

    fn phase2(&mut self, b: &Board, last: Option<usize>, ply: usize) -> Option<usize> {
        let n = b.idx.vars.len();
        self.ps.level1_keep.resize(n, None);
        let class: Vec<(usize, WireClass)> = b
            .idx
            .level1
            .iter()
            .map(|&g| (g, Self::classify_level1(b, g)))
            .collect();
        let of = |c: WireClass, v: Option<usize>| -> Vec<usize> {
            class
                .iter()
                .filter(|&&(g, k)| k == c && v.map_or(true, |v| b.source_var(g) == v))
                .map(|&(g, _)| g)
                .collect()
        };

        let bad_left: Vec<usize> = of(WireClass::Bad, None).into_iter().filter(|&g| b.hp(g) > 0).collect();
        if !bad_left.is_empty() {
            for v in (0..n).filter(|&v| b.truth(v) == Truth::True) {
                let good: u32 = of(WireClass::Good, Some(v)).iter().map(|&g| b.hp(g)).sum();
                let bad: u32 = of(WireClass::Bad, Some(v)).iter().map(|&g| b.hp(g)).sum();
                if bad > 0 && good <= bad {
                    let name = &b.a.formula.names()[v];
                    self.ps.note(ply, format!("good wires of {name} no longer outweigh bad ones"));
                }
            }
            // Answer a hit on a good wire of x with a hit on a bad wire of x.
            if let Some(id) = last {
                let (g, r) = b.idx.owner(id);
                if r == BOTTOM && class.iter().any(|&(w, k)| w == g && k == WireClass::Good) {
                    let v = b.source_var(g);
                    let same: Vec<usize> = of(WireClass::Bad, Some(v)).into_iter().filter(|&w| b.hp(w) > 0).collect();
                    if let Some(id) = b.first_disable(same) {
                        return Some(id);
                    }
                }
            }
            if let Some(id) = b.first_disable(bad_left) {
                return Some(id);
            }
        }

        let mut targets: Vec<usize> = of(WireClass::Neutral, None).into_iter().filter(|&g| b.hp(g) > 0).collect();
        for v in (0..n).filter(|&v| b.truth(v) == Truth::True) {
            let good = of(WireClass::Good, Some(v));
            let kept = keep(b, self.ps.level1_keep[v], &good, |g| std::cmp::Reverse(b.hp(g)));
            self.ps.level1_keep[v] = kept;
            targets.extend(good.into_iter().filter(|&g| Some(g) != kept && b.hp(g) > 0));
        }
        if let Some(id) = b.first_disable(targets) {
            return Some(id);
        }
        let kept: Vec<usize> = self.ps.level1_keep.iter().flatten().copied().collect();
        kept.into_iter()
            .chain(b.idx.level1.iter().copied())
            .filter(|&g| b.status(g) == WireStatus::Intact)
            .find_map(|g| b.activate(g))
    }

    fn phase3(&mut self, b: &Board) -> Option<usize> {
        let good: Vec<usize> = b
            .idx
            .level2
            .iter()
            .copied()
            .filter(|&g| Self::classify_level2(b, g) == WireClass::Good)
            .collect();
        let bad: Vec<usize> = b
            .idx
            .level2
            .iter()
            .copied()
            .filter(|&g| Self::classify_level2(b, g) == WireClass::Bad && b.hp(g) > 0)
            .collect();
        // A clause with no disabled level-1 wire could not be cut later if
        // its level-2 wire were activated, so that wire goes first.
        let has_disabled = |j: usize| b.level1_into(j).any(|g| b.status(g) == WireStatus::Disabled);
        let (safe, unsafe_): (Vec<usize>, Vec<usize>) = good.iter().partition(|&&g| has_disabled(b.wire(g).1));
        let unsafe_: Vec<usize> = unsafe_.into_iter().filter(|&g| b.hp(g) > 0).collect();
        if let Some(id) = b.first_disable(unsafe_) {
            return Some(id);
        }
        if let Some(id) = b.first_disable(bad) {
            return Some(id);
        }
        let kept = keep(b, self.ps.level2_keep, &safe, |g| {
            (b.role(b.wire(g).1) != ClauseRole::Real, std::cmp::Reverse(b.hp(g)))
        });
        self.ps.level2_keep = kept;
        let rest: Vec<usize> = good.iter().copied().filter(|&g| Some(g) != kept && b.hp(g) > 0).collect();
        if let Some(id) = b.first_disable(rest) {
            return Some(id);
        }
        kept.into_iter()
            .chain(b.idx.level2.iter().copied())
            .filter(|&g| b.status(g) == WireStatus::Intact)
            .find_map(|g| b.activate(g))
    }
}

/// Cuts a clause rope other than `except`. Notes a deviation when such a
/// rope is left but none can be cut.
fn cut_clauses(b: &Board, ps: &mut PhaseState, ply: usize, except: Option<usize>) -> Option<usize> {
    let targets = || {
        b.idx
            .clauses
            .iter()
            .enumerate()
            .filter(move |&(j, _)| Some(j) != except)
            .map(|(_, &g)| g)
    };
    let cut = targets().find_map(|g| b.legal_in(g, 0));
    if cut.is_none() {
        if let Some(g) = targets().find(|&g| b.v.alive(g, 0) > 0) {
            ps.note(ply, format!("{} cannot be cut", b.a.plan[g].label));
        }
    }
    cut
}

fn finish(b: &Board, ps: &mut PhaseState, phase: u8, ply: usize, planned: Option<usize>) -> Result<Decision> {
    let string = match planned {
        Some(id) => id,
        None => {
            if (2..=3).contains(&phase) {
                ps.note(ply, format!("no planned cut in phase {phase}"));
            }
            b.filler()
                .ok_or_else(|| Error::PhaseInvariantBroken(format!("no legal cut at ply {ply}")))?
        }
    };
    Ok(Decision { string, phase })
}

impl Policy for FallonScript {
    fn name(&self) -> String {
        "fallon-script".into()
    }

    fn choose(&mut self, cx: &Ctx) -> Result<Decision> {
        let b = Board::new(cx);
        let phase = self.ps.advance(b.phase());
        let planned = match phase {
            1 => oracle_move(&self.oracle, &b, Role::Fallon, &mut self.ps, cx.ply),
            2 => self.phase2(&b, cx.last_cut, cx.ply),
            3 => self.phase3(&b),
            _ => cut_clauses(&b, &mut self.ps, cx.ply, None),
        };
        finish(&b, &mut self.ps, phase, cx.ply, planned)
    }

    fn deviations(&self) -> &[String] {
        &self.ps.deviations
    }
}

/// Plays Trudy's side of a compiled position.
pub struct TrudyScript {
    oracle: Oracle,
    pub ps: PhaseState,
}

impl TrudyScript {
    pub fn new(oracle: Oracle) -> Self {
        TrudyScript {
            oracle,
            ps: PhaseState::default(),
        }
    }

    fn classify_level1(b: &Board, c: Option<usize>, g: usize) -> WireClass {
        let v = b.source_var(g);
        let target = b.wire(g).1;
        match c {
            Some(c) if b.a.clauses[c].vars.contains(&v) => {
                if target == c || b.role(target) == ClauseRole::Singleton {
                    WireClass::Good
                } else {
                    WireClass::Bad
                }
            }
            _ => WireClass::Neutral,
        }
    }

    fn classify_level2(b: &Board, c_prime: Option<usize>, g: usize) -> WireClass {
        let target = b.wire(g).1;
        if Some(target) == c_prime || b.role(target) == ClauseRole::Empty {
            WireClass::Good
        } else {
            WireClass::Bad
        }
    }

    fn phase2(&mut self, b: &Board, ply: usize) -> Option<usize> {
        if self.ps.c.is_none() {
            self.ps.c = b.satisfied_real();
            if self.ps.c.is_none() {
                self.ps.note(ply, "no real clause is satisfied".into());
            }
        }
        let c = self.ps.c;
        self.ps.level1_keep.resize(b.idx.vars.len(), None);
        let class = |g| Self::classify_level1(b, c, g);
        let alive_of = |k: WireClass| -> Vec<usize> {
            b.idx.level1.iter().copied().filter(|&g| class(g) == k && b.hp(g) > 0).collect()
        };
        if let Some(id) = b.first_disable(alive_of(WireClass::Bad)) {
            return Some(id);
        }
        let mut targets = alive_of(WireClass::Neutral);
        for &v in c.map(|c| &b.a.clauses[c].vars[..]).unwrap_or(&[]) {
            let good: Vec<usize> = b
                .idx
                .level1
                .iter()
                .copied()
                .filter(|&g| b.source_var(g) == v && class(g) == WireClass::Good)
                .collect();
            let kept = keep(b, self.ps.level1_keep[v], &good, |g| {
                (Some(b.wire(g).1) != c, std::cmp::Reverse(b.hp(g)))
            });
            self.ps.level1_keep[v] = kept;
            targets.extend(good.into_iter().filter(|&g| Some(g) != kept && b.hp(g) > 0));
        }
        if let Some(id) = b.first_disable(targets) {
            return Some(id);
        }
        let kept: Vec<usize> = self.ps.level1_keep.iter().flatten().copied().collect();
        kept.into_iter()
            .chain(b.idx.level1.iter().copied())
            .filter(|&g| b.status(g) == WireStatus::Intact)
            .find_map(|g| b.activate(g))
    }

    fn phase3(&mut self, b: &Board, ply: usize) -> Option<usize> {
        if self.ps.c_prime.is_none() {
            self.ps.c_prime = b.activated_clause(self.ps.c);
            if self.ps.c_prime.is_none() {
                self.ps.note(ply, "no satisfied clause has only activated level-1 wires".into());
                self.ps.c_prime = self.ps.c;
            }
        }
        let cp = self.ps.c_prime;
        let class = |g| Self::classify_level2(b, cp, g);
        let bad: Vec<usize> = b.idx.level2.iter().copied().filter(|&g| class(g) == WireClass::Bad && b.hp(g) > 0).collect();
        if let Some(id) = b.first_disable(bad) {
            return Some(id);
        }
        let good: Vec<usize> = b.idx.level2.iter().copied().filter(|&g| class(g) == WireClass::Good).collect();
        let kept = keep(b, self.ps.level2_keep, &good, |g| {
            (Some(b.wire(g).1) != cp, std::cmp::Reverse(b.hp(g)))
        });
        self.ps.level2_keep = kept;
        let rest: Vec<usize> = good.iter().copied().filter(|&g| Some(g) != kept && b.hp(g) > 0).collect();
        if let Some(id) = b.first_disable(rest) {
            return Some(id);
        }
        kept.into_iter()
            .chain(b.idx.level2.iter().copied())
            .filter(|&g| b.status(g) == WireStatus::Intact)
            .find_map(|g| b.activate(g))
    }

    fn phase4(&mut self, b: &Board, ply: usize) -> Option<usize> {
        if self.ps.c_double_prime.is_none() {
            self.ps.c_double_prime = b
                .idx
                .level2
                .iter()
                .find(|&&g| b.status(g) == WireStatus::Activated)
                .map(|&g| b.wire(g).1);
        }
        let except = self.ps.c_double_prime;
        cut_clauses(b, &mut self.ps, ply, except)
    }
}

impl Policy for TrudyScript {
    fn name(&self) -> String {
        "trudy-script".into()
    }

    fn choose(&mut self, cx: &Ctx) -> Result<Decision> {
        let b = Board::new(cx);
        let phase = self.ps.advance(b.phase());
        let planned = match phase {
            1 => oracle_move(&self.oracle, &b, Role::Trudy, &mut self.ps, cx.ply),
            2 => self.phase2(&b, cx.ply),
            3 => self.phase3(&b, cx.ply),
            _ => self.phase4(&b, cx.ply),
        };
        finish(&b, &mut self.ps, phase, cx.ply, planned)
    }

    fn deviations(&self) -> &[String] {
        &self.ps.deviations
    }
}

/// Cuts a legal string chosen uniformly at random.
pub struct UniformRandom {
    rng: ChaCha8Rng,
}

impl UniformRandom {
    pub fn new(seed: u64) -> Self {
        UniformRandom {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for UniformRandom {
    fn name(&self) -> String {
        "uniform-random".into()
    }

    fn choose(&mut self, cx: &Ctx) -> Result<Decision> {
        let s = cx.state;
        let total = s.board().string_count();
        let phase = Board::new(cx).phase();
        // Rejection sampling is uniform over legal strings given success,
        // and so is the fallback.
        for _ in 0..64 {
            let id = self.rng.gen_range(0..total);
            if s.is_alive(id) && s.is_legal(id, LAVA) {
                return Ok(Decision { string: id, phase });
            }
        }
        let legal = s.legal_moves(LAVA);
        if legal.is_empty() {
            return Err(Error::PhaseInvariantBroken(format!("no legal cut at ply {}", cx.ply)));
        }
        let string = legal[self.rng.gen_range(0..legal.len())];
        Ok(Decision { string, phase })
    }
}

/// Attacks the wires that the opposing script wants to keep: cuts the
/// lowest-HP good wire's bottom rope, else the lowest legal string.
pub struct GreedyDisabler {
    /// The role of the opponent whose good wires are attacked.
    against: Role,
}

impl GreedyDisabler {
    pub fn new(against: Role) -> Self {
        GreedyDisabler { against }
    }

    fn good_wires(&self, b: &Board) -> Vec<usize> {
        let l1 = b.idx.level1.iter().copied();
        let l2 = b.idx.level2.iter().copied();
        match self.against {
            Role::Fallon => l1
                .filter(|&g| FallonScript::classify_level1(b, g) == WireClass::Good)
                .chain(l2.filter(|&g| FallonScript::classify_level2(b, g) == WireClass::Good))
                .collect(),
            Role::Trudy => {
                let c = b.satisfied_real();
                let cp = b.activated_clause(c).or(c);
                l1.filter(|&g| TrudyScript::classify_level1(b, c, g) == WireClass::Good)
                    .chain(l2.filter(|&g| TrudyScript::classify_level2(b, cp, g) == WireClass::Good))
                    .collect()
            }
        }
    }
}

impl Policy for GreedyDisabler {
    fn name(&self) -> String {
        "greedy-disabler".into()
    }

    fn choose(&mut self, cx: &Ctx) -> Result<Decision> {
        let b = Board::new(cx);
        let phase = b.phase();
        let mut good: Vec<usize> = self.good_wires(&b).into_iter().filter(|&g| b.hp(g) > 0).collect();
        good.sort_by_key(|&g| (b.hp(g), g));
        let string = good
            .into_iter()
            .find_map(|g| b.disable(g))
            .or_else(|| {
                (0..b.a.plan.len())
                    .flat_map(|g| (0..b.a.plan[g].ropes.len()).map(move |r| (g, r)))
                    .find_map(|(g, r)| b.legal_in(g, r))
            })
            .ok_or_else(|| Error::PhaseInvariantBroken(format!("no legal cut at ply {}", cx.ply)))?;
        Ok(Decision { string, phase })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    FallonScript,
    TrudyScript,
    UniformRandom,
    GreedyDisabler,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::FallonScript,
        PolicyKind::TrudyScript,
        PolicyKind::UniformRandom,
        PolicyKind::GreedyDisabler,
    ];
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::FallonScript => "fallon",
            PolicyKind::TrudyScript => "trudy",
            PolicyKind::UniformRandom => "random",
            PolicyKind::GreedyDisabler => "greedy",
        })
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| format!("unknown policy {s:?}; expected fallon, trudy, random or greedy"))
    }
}

/// Builds a policy for player `me`. Scripts need `oracle`; the greedy
/// baseline attacks whichever role `me` does not play.
pub fn build_policy(
    kind: PolicyKind,
    a: &ReductionArtifact,
    me: Player,
    seed: u64,
    oracle: Option<&Oracle>,
) -> Result<Box<dyn Policy>> {
    Ok(match kind {
        PolicyKind::FallonScript => Box::new(FallonScript::new(oracle.cloned().ok_or(Error::OracleRequired)?)),
        PolicyKind::TrudyScript => Box::new(TrudyScript::new(oracle.cloned().ok_or(Error::OracleRequired)?)),
        PolicyKind::UniformRandom => Box::new(UniformRandom::new(seed)),
        PolicyKind::GreedyDisabler => Box::new(GreedyDisabler::new(a.role_of(me).other())),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ply {
    pub k: usize,
    pub player: Player,
    pub string: usize,
    pub provenance: String,
    pub phase: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TerminalKind {
    /// Every variable and wire at one string, every clause rope gone.
    Fallon,
    /// As above but exactly one clause rope at one string.
    Trudy,
    Other,
}

/// Strings left per gadget family at the end of a game.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub variables: Vec<u32>,
    pub wires: Vec<u32>,
    pub clauses: Vec<u32>,
    pub pad: u32,
    pub terminal: TerminalKind,
}

impl Census {
    pub fn take(a: &ReductionArtifact, idx: &GadgetIndex, view: &RopeView) -> Census {
        let total = |g: usize| (0..a.plan[g].ropes.len()).map(|r| view.alive(g, r)).sum::<u32>();
        let variables: Vec<u32> = idx.vars.iter().map(|&g| total(g)).collect();
        let wires: Vec<u32> = idx.level1.iter().chain(&idx.level2).map(|&g| total(g)).collect();
        let clauses: Vec<u32> = idx.clauses.iter().map(|&g| total(g)).collect();
        let pad = a
            .plan
            .iter()
            .enumerate()
            .filter(|(_, p)| p.kind == GadgetKind::ParityPad)
            .map(|(g, _)| total(g))
            .sum();
        let shaped = variables.iter().chain(&wires).all(|&x| x == 1) && pad == 0;
        let clause_sum: u32 = clauses.iter().sum();
        let terminal = match (shaped, clause_sum, clauses.iter().max().copied().unwrap_or(0)) {
            (true, 0, _) => TerminalKind::Fallon,
            (true, 1, 1) => TerminalKind::Trudy,
            _ => TerminalKind::Other,
        };
        Census {
            variables,
            wires,
            clauses,
            pad,
            terminal,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlayoutRecord {
    pub policies: [String; 2],
    pub plies: Vec<Ply>,
    /// The player left without a legal cut.
    pub stuck: Player,
    pub winner: Player,
    pub winner_role: Role,
    pub census: Census,
    pub deviations: [Vec<String>; 2],
    pub max_phase: [u8; 2],
    /// Plies at which a policy's reported phase went down.
    pub phase_regressions: usize,
}

impl PlayoutRecord {
    pub fn transcript(&self) -> String {
        let mut out = format!("# {} vs {}\n", self.policies[0], self.policies[1]);
        for p in &self.plies {
            out.push_str(&format!(
                "ply {} {} cut {} # {} phase={}\n",
                p.k, p.player, p.string, p.provenance, p.phase
            ));
        }
        out.push_str(&format!("# winner {} ({})\n", self.winner, self.winner_role));
        out
    }

    pub fn summary_json(&self) -> Result<String> {
        let summary = serde_json::json!({
            "policies": self.policies,
            "winner": self.winner,
            "winner_role": self.winner_role,
            "stuck": self.stuck,
            "plies": self.plies.len(),
            "terminal": self.census.terminal,
            "census": self.census,
            "deviations": self.deviations,
        });
        Ok(serde_json::to_string_pretty(&summary)?)
    }
}

/// Plays `p1` (first mover) against `p2` until someone has no legal cut.
pub fn playout(
    a: &ReductionArtifact,
    idx: &GadgetIndex,
    p1: &mut dyn Policy,
    p2: &mut dyn Policy,
) -> Result<PlayoutRecord> {
    let mut s = GameState::new(idx.board.clone())?;
    let mut view = RopeView::new(a);
    let mut plies = Vec::new();
    let mut last_cut = None;
    let mut last_phase = [0u8; 2];
    let mut regressions = 0;
    while s.legal_count(LAVA) > 0 {
        let mover = s.mover();
        let policy: &mut dyn Policy = if mover == Player::P1 { &mut *p1 } else { &mut *p2 };
        let cx = Ctx {
            artifact: a,
            index: idx,
            state: &s,
            view: &view,
            last_cut,
            ply: plies.len(),
        };
        let d = policy.choose(&cx)?;
        if d.string >= a.graph.string_count() || !s.is_alive(d.string) || !s.is_legal(d.string, LAVA) {
            return Err(Error::IllegalByPolicy {
                policy: policy.name(),
                string: d.string,
                ply: plies.len(),
            });
        }
        s.cut(LAVA, d.string)?;
        view.notify(idx, &s, d.string);
        if d.phase < last_phase[mover.index()] {
            regressions += 1;
        }
        last_phase[mover.index()] = d.phase;
        plies.push(Ply {
            k: plies.len(),
            player: mover,
            string: d.string,
            provenance: a.provenance(d.string).to_owned(),
            phase: d.phase,
        });
        last_cut = Some(d.string);
    }
    let stuck = s.mover();
    let winner = stuck.other();
    Ok(PlayoutRecord {
        policies: [p1.name(), p2.name()],
        plies,
        stuck,
        winner,
        winner_role: a.role_of(winner),
        census: Census::take(a, idx, &view),
        deviations: [p1.deviations().to_vec(), p2.deviations().to_vec()],
        max_phase: last_phase,
        phase_regressions: regressions,
    })
}

/// Builds both policies from kinds and seed, then plays.
pub fn playout_kinds(
    a: &ReductionArtifact,
    idx: &GadgetIndex,
    kinds: [PolicyKind; 2],
    seed: u64,
    oracle: Option<&Oracle>,
) -> Result<PlayoutRecord> {
    let mut p1 = build_policy(kinds[0], a, Player::P1, seed, oracle)?;
    let mut p2 = build_policy(kinds[1], a, Player::P2, seed.wrapping_add(0x9e37_79b9), oracle)?;
    playout(a, idx, p1.as_mut(), p2.as_mut())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamesat::DnfFormula;
    use crate::reduce::compile_gamesat_to_lava;

    fn setup(f: &DnfFormula, n: u64, first: Role) -> (ReductionArtifact, GadgetIndex, Oracle) {
        let a = compile_gamesat_to_lava(f, n, first).unwrap();
        let idx = GadgetIndex::new(&a);
        let table = GameSatTable::build(f, true, 12).unwrap();
        (a, idx, Oracle::Table(Arc::new(table)))
    }

    fn pair() -> DnfFormula {
        DnfFormula::new(2, vec![vec![0, 1]]).unwrap()
    }

    #[test]
    fn index_covers_every_string() {
        let (a, idx, _) = setup(&pair(), 2, Role::Fallon);
        assert_eq!(idx.vars.len(), 2);
        assert_eq!(idx.clauses.len(), 4);
        assert_eq!((idx.level1.len(), idx.level2.len()), (2, 5));
        for id in 0..a.graph.string_count() {
            let (g, r) = idx.owner(id);
            assert!(a.plan[g].ropes[r].contains(id));
        }
    }

    #[test]
    fn fallon_opening_sets_false() {
        let (a, idx, oracle) = setup(&pair(), 2, Role::Fallon);
        let s = GameState::new(Arc::new(a.graph.clone())).unwrap();
        let view = RopeView::new(&a);
        let cx = Ctx {
            artifact: &a,
            index: &idx,
            state: &s,
            view: &view,
            last_cut: None,
            ply: 0,
        };
        let d = FallonScript::new(oracle).choose(&cx).unwrap();
        assert!(a.provenance(d.string).ends_with(":bottom"));
        assert!(a.provenance(d.string).starts_with("var:"));
        assert_eq!(d.phase, 1);
    }

    #[test]
    fn random_games_terminate_and_are_seeded() {
        let (a, idx, _) = setup(&pair(), 2, Role::Trudy);
        let kinds = [PolicyKind::UniformRandom, PolicyKind::UniformRandom];
        let r1 = playout_kinds(&a, &idx, kinds, 7, None).unwrap();
        let r2 = playout_kinds(&a, &idx, kinds, 7, None).unwrap();
        assert!(r1.plies.len() <= a.graph.string_count());
        assert_eq!(r1.transcript(), r2.transcript());
    }

    #[test]
    fn fallon_script_beats_random_on_pair() {
        let (a, idx, oracle) = setup(&pair(), 3, Role::Fallon);
        for seed in 0..5 {
            let r = playout_kinds(
                &a,
                &idx,
                [PolicyKind::FallonScript, PolicyKind::UniformRandom],
                seed,
                Some(&oracle),
            )
            .unwrap();
            assert_eq!(r.winner_role, Role::Fallon, "{:?}", r.deviations);
            assert_eq!(r.census.terminal, TerminalKind::Fallon);
            assert_eq!(r.phase_regressions, 0);
        }
    }

    #[test]
    fn transcript_replays() {
        let (a, idx, oracle) = setup(&pair(), 2, Role::Trudy);
        let r = playout_kinds(
            &a,
            &idx,
            [PolicyKind::UniformRandom, PolicyKind::FallonScript],
            3,
            Some(&oracle),
        )
        .unwrap();
        let text = r.transcript();
        assert!(text.lines().nth(1).unwrap().starts_with("ply 0 P1 cut "));
        let cuts = crate::engine::parse_transcript(&text).unwrap();
        let (_, outcome) = crate::engine::replay(Arc::new(a.graph.clone()), LAVA, &cuts).unwrap();
        assert_eq!(outcome.unwrap().winner, r.winner.into());
    }

    #[test]
    fn scripts_need_an_oracle() {
        let (a, _, _) = setup(&pair(), 2, Role::Trudy);
        assert!(matches!(
            build_policy(PolicyKind::TrudyScript, &a, Player::P1, 0, None),
            Err(Error::OracleRequired)
        ));
    }
}
