//! Game SAT over positive DNF formulas.
//!
//! Two players, Trudy and Fallon, alternately set an unset variable to either
//! value or skip. Once every variable is set Trudy wins iff the formula holds.
//! Skips make the game graph cyclic: within one assignment the two mover
//! states can pass the turn back and forth forever. [`GameSatTable`] solves
//! the game layer by layer (by number of set variables) and, inside a layer,
//! takes the least fixpoint of each player's forced-win attractor. States in
//! neither attractor are [`GameSatValue::Unresolved`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Trudy,
    Fallon,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Trudy => Role::Fallon,
            Role::Fallon => Role::Trudy,
        }
    }

    /// The value this role likes to set.
    pub fn preferred_value(self) -> bool {
        self == Role::Trudy
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Trudy => "trudy",
            Role::Fallon => "fallon",
        })
    }
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "trudy" => Ok(Role::Trudy),
            "fallon" => Ok(Role::Fallon),
            _ => Err(format!("expected trudy or fallon, found {s:?}")),
        }
    }
}

/// A positive DNF formula: an OR of ANDs of variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DnfFormula {
    names: Vec<String>,
    clauses: Vec<Vec<usize>>,
}

impl DnfFormula {
    /// Variables are named `x1..xn`. Clause variable lists are sorted and
    /// deduplicated; empty clauses are rejected.
    pub fn new(variable_count: usize, clauses: Vec<Vec<usize>>) -> Result<DnfFormula> {
        let names = (1..=variable_count).map(|i| format!("x{i}")).collect();
        Self::with_names(names, clauses)
    }

    pub fn with_names(names: Vec<String>, clauses: Vec<Vec<usize>>) -> Result<DnfFormula> {
        let mut out = Vec::with_capacity(clauses.len());
        for (j, mut clause) in clauses.into_iter().enumerate() {
            clause.sort_unstable();
            clause.dedup();
            if clause.is_empty() {
                return Err(Error::Parse {
                    line: j + 1,
                    message: "empty clause".into(),
                });
            }
            if let Some(&v) = clause.iter().find(|&&v| v >= names.len()) {
                return Err(Error::UnsetVariable(v));
            }
            out.push(clause);
        }
        Ok(DnfFormula {
            names,
            clauses: out,
        })
    }

    /// One clause per line, variable names separated by whitespace. Variables
    /// are numbered by first appearance.
    pub fn parse(text: &str) -> Result<DnfFormula> {
        let mut names: Vec<String> = Vec::new();
        let mut clauses = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut clause = Vec::new();
            for name in line.split_whitespace() {
                let idx = match names.iter().position(|n| n == name) {
                    Some(idx) => idx,
                    None => {
                        names.push(name.to_owned());
                        names.len() - 1
                    }
                };
                clause.push(idx);
            }
            if clause.is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "empty clause".into(),
                });
            }
            clauses.push(clause);
        }
        Self::with_names(names, clauses)
    }

    pub fn to_text(&self) -> String {
        self.clauses
            .iter()
            .map(|c| {
                let names: Vec<&str> = c.iter().map(|&v| self.names[v].as_str()).collect();
                names.join(" ") + "\n"
            })
            .collect()
    }

    pub fn variable_count(&self) -> usize {
        self.names.len()
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<usize>] {
        &self.clauses
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// k_i: the number of clauses containing each variable.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut k = vec![0; self.names.len()];
        for clause in &self.clauses {
            for &v in clause {
                k[v] += 1;
            }
        }
        k
    }

    pub fn evaluate(&self, values: &[bool]) -> bool {
        self.clauses.iter().any(|c| c.iter().all(|&v| values[v]))
    }

    pub fn evaluate_assignment(&self, assignment: &[Truth]) -> Result<bool> {
        let values = assignment
            .iter()
            .enumerate()
            .map(|(i, t)| match t {
                Truth::Unset => Err(Error::UnsetVariable(i)),
                Truth::True => Ok(true),
                Truth::False => Ok(false),
            })
            .collect::<Result<Vec<bool>>>()?;
        Ok(self.evaluate(&values))
    }
}

impl fmt::Display for DnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                let names: Vec<&str> = c.iter().map(|&v| self.names[v].as_str()).collect();
                format!("({})", names.join(" & "))
            })
            .collect();
        f.write_str(&parts.join(" | "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Truth {
    Unset,
    True,
    False,
}

impl From<bool> for Truth {
    fn from(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GameSatState {
    pub assignment: Vec<Truth>,
    pub mover: Role,
}

impl GameSatState {
    pub fn initial(n: usize, first: Role) -> Self {
        GameSatState {
            assignment: vec![Truth::Unset; n],
            mover: first,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.assignment.iter().all(|&t| t != Truth::Unset)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameSatMove {
    Set(usize, bool),
    Skip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameSatValue {
    TrudyWins,
    FallonWins,
    Unresolved,
}

impl GameSatValue {
    pub fn winner(self) -> Option<Role> {
        match self {
            GameSatValue::TrudyWins => Some(Role::Trudy),
            GameSatValue::FallonWins => Some(Role::Fallon),
            GameSatValue::Unresolved => None,
        }
    }

    fn for_role(role: Role) -> Self {
        match role {
            Role::Trudy => GameSatValue::TrudyWins,
            Role::Fallon => GameSatValue::FallonWins,
        }
    }
}

/// Every move available in a non-terminal state; none in a terminal one.
pub fn gamesat_moves(s: &GameSatState) -> Vec<GameSatMove> {
    if s.is_terminal() {
        return Vec::new();
    }
    let mut moves: Vec<GameSatMove> = s
        .assignment
        .iter()
        .enumerate()
        .filter(|(_, &t)| t == Truth::Unset)
        .flat_map(|(v, _)| [GameSatMove::Set(v, true), GameSatMove::Set(v, false)])
        .collect();
    moves.push(GameSatMove::Skip);
    moves
}

pub fn apply_gamesat_move(s: &GameSatState, mv: GameSatMove) -> GameSatState {
    let mut next = s.clone();
    if let GameSatMove::Set(v, b) = mv {
        next.assignment[v] = b.into();
    }
    next.mover = s.mover.other();
    next
}

/// Values of every state of one formula.
#[derive(Clone, Debug)]
pub struct GameSatTable {
    n: usize,
    allow_skip: bool,
    pow3: Vec<usize>,
    /// Indexed by `code * 2 + mover`.
    values: Vec<GameSatValue>,
}

const UNSET: usize = 0;
const TRUE: usize = 1;
const FALSE: usize = 2;

impl GameSatTable {
    pub fn build(f: &DnfFormula, allow_skip: bool, budget: usize) -> Result<GameSatTable> {
        let n = f.variable_count();
        if n > budget {
            return Err(Error::BudgetExceeded { alive: n, budget });
        }
        let pow3: Vec<usize> = (0..=n).map(|i| 3usize.pow(i as u32)).collect();
        let states = pow3[n];
        let digit = |code: usize, v: usize| code / pow3[v] % 3;

        // Bucket assignment codes by number of set variables.
        let mut layers: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for code in 0..states {
            let set = (0..n).filter(|&v| digit(code, v) != UNSET).count();
            layers[set].push(code);
        }

        let mut values = vec![GameSatValue::Unresolved; states * 2];
        let idx = |code: usize, mover: Role| code * 2 + (mover == Role::Fallon) as usize;
        let mut values_bool = vec![false; n];

        for code in &layers[n] {
            for (v, b) in values_bool.iter_mut().enumerate() {
                *b = digit(*code, v) == TRUE;
            }
            let v = if f.evaluate(&values_bool) {
                GameSatValue::TrudyWins
            } else {
                GameSatValue::FallonWins
            };
            values[idx(*code, Role::Trudy)] = v;
            values[idx(*code, Role::Fallon)] = v;
        }

        for layer in layers[..n].iter().rev() {
            for &code in layer {
                // Outcomes of setting moves for each mover: (some child wins
                // for the mover, every child wins for the opponent).
                let mut summary = [(false, true); 2];
                for (slot, mover) in [Role::Trudy, Role::Fallon].into_iter().enumerate() {
                    let mine = GameSatValue::for_role(mover);
                    let theirs = GameSatValue::for_role(mover.other());
                    for v in (0..n).filter(|&v| digit(code, v) == UNSET) {
                        for val in [TRUE, FALSE] {
                            let child = values[idx(code + val * pow3[v], mover.other())];
                            summary[slot].0 |= child == mine;
                            summary[slot].1 &= child == theirs;
                        }
                    }
                }
                let mut vt = GameSatValue::Unresolved;
                let mut vf = GameSatValue::Unresolved;
                let settle = |set_win: bool, set_all_lose: bool, skip_child: GameSatValue, me: Role| {
                    let mine = GameSatValue::for_role(me);
                    let theirs = GameSatValue::for_role(me.other());
                    if set_win || (allow_skip && skip_child == mine) {
                        mine
                    } else if set_all_lose && (!allow_skip || skip_child == theirs) {
                        theirs
                    } else {
                        GameSatValue::Unresolved
                    }
                };
                // Two mover states per layer entry: three rounds reach the
                // least fixpoint.
                for _ in 0..3 {
                    vt = settle(summary[0].0, summary[0].1, vf, Role::Trudy);
                    vf = settle(summary[1].0, summary[1].1, vt, Role::Fallon);
                }
                values[idx(code, Role::Trudy)] = vt;
                values[idx(code, Role::Fallon)] = vf;
            }
        }

        Ok(GameSatTable {
            n,
            allow_skip,
            pow3,
            values,
        })
    }

    fn code(&self, assignment: &[Truth]) -> usize {
        assignment
            .iter()
            .enumerate()
            .map(|(v, t)| {
                self.pow3[v]
                    * match t {
                        Truth::Unset => UNSET,
                        Truth::True => TRUE,
                        Truth::False => FALSE,
                    }
            })
            .sum()
    }

    pub fn value(&self, s: &GameSatState) -> GameSatValue {
        debug_assert_eq!(s.assignment.len(), self.n);
        self.values[self.code(&s.assignment) * 2 + (s.mover == Role::Fallon) as usize]
    }

    /// A move that keeps the mover winning. Setting moves of the mover's own
    /// value come first, then the other value, then skip; ties go to the
    /// lowest variable.
    pub fn winning_move(&self, s: &GameSatState) -> Option<GameSatMove> {
        let me = s.mover;
        let mine = GameSatValue::for_role(me);
        let unset: Vec<usize> = (0..self.n)
            .filter(|&v| s.assignment[v] == Truth::Unset)
            .collect();
        let good = me.preferred_value();
        let candidates = unset
            .iter()
            .map(|&v| GameSatMove::Set(v, good))
            .chain(unset.iter().map(|&v| GameSatMove::Set(v, !good)))
            .chain(self.allow_skip.then_some(GameSatMove::Skip));
        for mv in candidates {
            if self.value(&apply_gamesat_move(s, mv)) == mine {
                return Some(mv);
            }
        }
        None
    }
}

pub fn solve_gamesat(f: &DnfFormula, first: Role, allow_skip: bool) -> Result<GameSatValue> {
    solve_gamesat_with_budget(f, first, allow_skip, DEFAULT_BUDGET)
}

pub fn solve_gamesat_with_budget(
    f: &DnfFormula,
    first: Role,
    allow_skip: bool,
    budget: usize,
) -> Result<GameSatValue> {
    let table = GameSatTable::build(f, allow_skip, budget)?;
    Ok(table.value(&GameSatState::initial(f.variable_count(), first)))
}

/// Whether skipping changes nothing: the values with and without skips agree
/// and neither is unresolved.
pub fn skip_dominance_check(f: &DnfFormula, first: Role) -> Result<bool> {
    let with = solve_gamesat(f, first, true)?;
    let without = solve_gamesat(f, first, false)?;
    Ok(with == without && with != GameSatValue::Unresolved)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_variable() -> DnfFormula {
        DnfFormula::new(4, vec![vec![0, 1, 2], vec![1, 2], vec![2, 3]]).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let f = DnfFormula::new(2, vec![vec![0, 1]]).unwrap();
        assert!(f.evaluate(&[true, true]));
        assert!(!f.evaluate(&[true, false]));
        assert!(four_variable().evaluate(&[false, false, true, true]));
        assert!(matches!(
            f.evaluate_assignment(&[Truth::True, Truth::Unset]),
            Err(Error::UnsetVariable(1))
        ));
    }

    #[test]
    fn move_counts() {
        let mut s = GameSatState::initial(2, Role::Trudy);
        assert_eq!(gamesat_moves(&s).len(), 5);
        s.assignment[0] = Truth::True;
        assert_eq!(gamesat_moves(&s).len(), 3);
        s.assignment[1] = Truth::False;
        assert!(gamesat_moves(&s).is_empty());
    }

    #[test]
    fn small_values() {
        let single = DnfFormula::new(1, vec![vec![0]]).unwrap();
        assert_eq!(solve_gamesat(&single, Role::Trudy, true).unwrap(), GameSatValue::TrudyWins);

        let pair = DnfFormula::new(2, vec![vec![0, 1]]).unwrap();
        for first in [Role::Trudy, Role::Fallon] {
            for skip in [true, false] {
                assert_eq!(
                    solve_gamesat(&pair, first, skip).unwrap(),
                    GameSatValue::FallonWins
                );
            }
        }

        let majority = DnfFormula::new(3, vec![vec![0, 1], vec![0, 2], vec![1, 2]]).unwrap();
        assert_eq!(
            solve_gamesat(&majority, Role::Trudy, true).unwrap(),
            GameSatValue::TrudyWins
        );
    }

    #[test]
    fn dominance_examples() {
        for f in [
            DnfFormula::new(1, vec![vec![0]]).unwrap(),
            DnfFormula::new(2, vec![vec![0, 1]]).unwrap(),
        ] {
            for first in [Role::Trudy, Role::Fallon] {
                assert!(skip_dominance_check(&f, first).unwrap());
            }
        }
    }

    #[test]
    fn parse_orders_by_first_appearance() {
        let f = DnfFormula::parse("# fig\nb a\nc b\n").unwrap();
        assert_eq!(f.names(), &["b", "a", "c"]);
        assert_eq!(f.clauses(), &[vec![0, 1], vec![0, 2]]);
        assert_eq!(f.occurrences(), vec![2, 1, 1]);
        assert_eq!(DnfFormula::parse(&f.to_text()).unwrap(), f);
    }

    #[test]
    fn budget() {
        let f = DnfFormula::new(13, vec![(0..13).collect()]).unwrap();
        assert!(matches!(
            solve_gamesat(&f, Role::Trudy, false),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn winning_move_prefers_own_value() {
        let majority = DnfFormula::new(3, vec![vec![0, 1], vec![0, 2], vec![1, 2]]).unwrap();
        let table = GameSatTable::build(&majority, true, 12).unwrap();
        let s = GameSatState::initial(3, Role::Trudy);
        assert_eq!(table.winning_move(&s), Some(GameSatMove::Set(0, true)));
    }
}
