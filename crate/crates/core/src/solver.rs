//! Exact search for all three games.
//!
//! Positions are re-encoded into a dense local bitmask over the surviving
//! strings. Nimstring and Lava are impartial, so the value for the player to
//! move depends only on the surviving set; the Strings-and-Coins future score
//! differential is likewise mover-independent. The memo key is therefore the
//! mask alone for every game.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::engine::{GameKind, GameState, Player, Winner};
use crate::error::{Error, Result};
use crate::multigraph::{CoinId, Endpoint};

pub const DEFAULT_BUDGET: usize = 24;
pub const NAIVE_BUDGET: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub game: GameKind,
    /// Nimstring and Lava: whether the player to move wins.
    pub winner_for_mover: bool,
    /// Strings-and-Coins: best achievable (own future points − opponent's).
    pub net_score_for_mover: i32,
    pub principal_move: Option<usize>,
    pub states_visited: u64,
}

impl SolveResult {
    pub fn winner(&self, s: &GameState) -> Winner {
        let mover = s.mover();
        match self.game {
            GameKind::StringsAndCoins => {
                let lead = s.score(mover) as i64 - s.score(mover.other()) as i64
                    + self.net_score_for_mover as i64;
                match lead.signum() {
                    1 => mover.into(),
                    -1 => mover.other().into(),
                    _ => Winner::Draw,
                }
            }
            _ if self.winner_for_mover => mover.into(),
            _ => mover.other().into(),
        }
    }
}

/// Surviving strings relabelled 0..k with per-coin incidence masks.
struct Compact {
    ids: Vec<usize>,
    ends: Vec<[Option<u8>; 2]>,
    incidence: Vec<u64>,
}

impl Compact {
    fn new(s: &GameState, budget: usize) -> Result<Compact> {
        let alive = s.alive_count();
        if alive > budget || alive > 64 {
            return Err(Error::BudgetExceeded { alive, budget });
        }
        let board = s.board();
        let ids: Vec<usize> = s.alive_ids().collect();
        let mut local: HashMap<usize, u8> = HashMap::new();
        let mut incidence = Vec::new();
        let mut ends = Vec::with_capacity(ids.len());
        for (bit, &id) in ids.iter().enumerate() {
            let edge = board.string(id);
            let mut pair = [None, None];
            for (slot, e) in [edge.a, edge.b].into_iter().enumerate() {
                if let Endpoint::Coin(CoinId(c)) = e {
                    let next = local.len() as u8;
                    let l = *local.entry(c).or_insert(next);
                    if l as usize == incidence.len() {
                        incidence.push(0);
                    }
                    incidence[l as usize] |= 1 << bit;
                    pair[slot] = Some(l);
                }
            }
            ends.push(pair);
        }
        Ok(Compact {
            ids,
            ends,
            incidence,
        })
    }

    fn full(&self) -> u64 {
        if self.ids.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.ids.len()) - 1
        }
    }

    #[inline]
    fn frees(&self, mask: u64, bit: usize) -> u32 {
        self.ends[bit]
            .iter()
            .flatten()
            .filter(|&&c| (mask & self.incidence[c as usize]).count_ones() == 1)
            .count() as u32
    }

    /// Freeing cuts first, then ascending id.
    fn ordered_moves(&self, mask: u64) -> impl Iterator<Item = (usize, u32)> + '_ {
        let bits = || (0..self.ids.len()).filter(move |&b| mask >> b & 1 == 1);
        let freeing = bits().filter_map(move |b| Some((b, self.frees(mask, b))).filter(|m| m.1 > 0));
        let quiet = bits().filter(move |&b| self.frees(mask, b) == 0).map(|b| (b, 0));
        freeing.chain(quiet)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Solver {
    pub budget: usize,
}

impl Default for Solver {
    fn default() -> Self {
        Solver {
            budget: DEFAULT_BUDGET,
        }
    }
}

struct Memo<'a, V> {
    cx: &'a Compact,
    table: HashMap<u64, V>,
}

impl Memo<'_, bool> {
    fn nim(&mut self, mask: u64) -> bool {
        if mask == 0 {
            return false;
        }
        if let Some(&v) = self.table.get(&mask) {
            return v;
        }
        let cx = self.cx;
        let v = cx.ordered_moves(mask).any(|(b, freed)| {
            let next = mask & !(1 << b);
            if freed > 0 {
                self.nim(next)
            } else {
                !self.nim(next)
            }
        });
        self.table.insert(mask, v);
        v
    }

    fn lava(&mut self, mask: u64) -> bool {
        if let Some(&v) = self.table.get(&mask) {
            return v;
        }
        let cx = self.cx;
        let v = (0..cx.ids.len())
            .filter(|&b| mask >> b & 1 == 1 && cx.frees(mask, b) == 0)
            .any(|b| !self.lava(mask & !(1 << b)));
        self.table.insert(mask, v);
        v
    }
}

impl Memo<'_, i32> {
    fn sac(&mut self, mask: u64) -> i32 {
        if mask == 0 {
            return 0;
        }
        if let Some(&v) = self.table.get(&mask) {
            return v;
        }
        let cx = self.cx;
        let mut best = i32::MIN;
        for (b, freed) in cx.ordered_moves(mask).collect::<Vec<_>>() {
            let next = mask & !(1 << b);
            let v = if freed > 0 {
                freed as i32 + self.sac(next)
            } else {
                -self.sac(next)
            };
            best = best.max(v);
        }
        self.table.insert(mask, best);
        best
    }
}

impl Solver {
    pub fn with_budget(budget: usize) -> Self {
        Solver { budget }
    }

    pub fn solve(&self, s: &GameState, kind: GameKind) -> Result<SolveResult> {
        let cx = Compact::new(s, self.budget)?;
        let full = cx.full();
        let mut result = SolveResult {
            game: kind,
            winner_for_mover: false,
            net_score_for_mover: 0,
            principal_move: None,
            states_visited: 0,
        };
        match kind {
            GameKind::StringsAndCoins => {
                let mut m = Memo {
                    cx: &cx,
                    table: HashMap::new(),
                };
                let best = m.sac(full);
                result.net_score_for_mover = best;
                result.principal_move = cx
                    .ordered_moves(full)
                    .collect::<Vec<_>>()
                    .into_iter()
                    .find(|&(b, freed)| {
                        let next = full & !(1 << b);
                        let v = if freed > 0 {
                            freed as i32 + m.sac(next)
                        } else {
                            -m.sac(next)
                        };
                        v == best
                    })
                    .map(|(b, _)| cx.ids[b]);
                result.winner_for_mover = best > 0;
                result.states_visited = m.table.len() as u64;
            }
            GameKind::Nimstring => {
                let mut m = Memo {
                    cx: &cx,
                    table: HashMap::new(),
                };
                result.winner_for_mover = m.nim(full);
                result.principal_move = cx
                    .ordered_moves(full)
                    .collect::<Vec<_>>()
                    .into_iter()
                    .find(|&(b, freed)| {
                        let next = full & !(1 << b);
                        if freed > 0 {
                            m.nim(next)
                        } else {
                            !m.nim(next)
                        }
                    })
                    .map(|(b, _)| cx.ids[b]);
                result.states_visited = m.table.len() as u64;
            }
            GameKind::CoinsAreLava => {
                let mut m = Memo {
                    cx: &cx,
                    table: HashMap::new(),
                };
                result.winner_for_mover = m.lava(full);
                result.principal_move = (0..cx.ids.len())
                    .filter(|&b| cx.frees(full, b) == 0)
                    .find(|&b| !m.lava(full & !(1 << b)))
                    .map(|b| cx.ids[b]);
                result.states_visited = m.table.len() as u64;
            }
        }
        Ok(result)
    }
}

/// Plain recursion over every move, no memo and no short-circuit. Test oracle.
pub fn naive_solve(s: &GameState, kind: GameKind) -> Result<SolveResult> {
    let cx = Compact::new(s, NAIVE_BUDGET)?;
    let mut visited = 0u64;

    fn walk(cx: &Compact, kind: GameKind, mask: u64, visited: &mut u64) -> i32 {
        *visited += 1;
        let mut values = Vec::new();
        for b in 0..cx.ids.len() {
            if mask >> b & 1 == 0 {
                continue;
            }
            let freed = cx.frees(mask, b);
            let next = mask & !(1 << b);
            let v = match kind {
                GameKind::CoinsAreLava if freed > 0 => continue,
                GameKind::CoinsAreLava => -walk(cx, kind, next, visited),
                GameKind::Nimstring if freed > 0 => walk(cx, kind, next, visited),
                GameKind::Nimstring => -walk(cx, kind, next, visited),
                GameKind::StringsAndCoins if freed > 0 => {
                    freed as i32 + walk(cx, kind, next, visited)
                }
                GameKind::StringsAndCoins => -walk(cx, kind, next, visited),
            };
            values.push(v);
        }
        match (kind, values.iter().max()) {
            (GameKind::StringsAndCoins, None) => 0,
            (GameKind::StringsAndCoins, Some(&v)) => v,
            // +1 win for the mover, -1 loss.
            (_, Some(&v)) if v > 0 => 1,
            _ => -1,
        }
    }

    let v = walk(&cx, kind, cx.full(), &mut visited);
    Ok(SolveResult {
        game: kind,
        winner_for_mover: v > 0,
        net_score_for_mover: if kind == GameKind::StringsAndCoins { v } else { 0 },
        principal_move: None,
        states_visited: visited,
    })
}

/// Lava in its original form: any cut is allowed, and freeing a coin loses
/// on the spot. Used to cross-check the forbidden-move formulation.
pub fn naive_lava_free_loses(s: &GameState) -> Result<bool> {
    let cx = Compact::new(s, NAIVE_BUDGET)?;
    fn wins(cx: &Compact, mask: u64) -> bool {
        (0..cx.ids.len())
            .filter(|&b| mask >> b & 1 == 1)
            .any(|b| cx.frees(mask, b) == 0 && !wins(cx, mask & !(1 << b)))
    }
    Ok(wins(&cx, cx.full()))
}

/// A degree-2 coin `coin_b` whose string `a` leads to the degree-1 coin
/// `coin_a`, and whose other string is `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoonyWitness {
    pub a: usize,
    pub b: usize,
    pub coin_a: CoinId,
    pub coin_b: CoinId,
}

/// Every loony witness among the surviving strings, ordered by `a`.
pub fn find_loony_witnesses(s: &GameState) -> Vec<LoonyWitness> {
    let board = s.board();
    let mut out = Vec::new();
    for a in s.alive_ids() {
        let edge = board.string(a);
        let (Some(x), Some(y)) = (edge.a.as_coin(), edge.b.as_coin()) else {
            continue;
        };
        if x == y {
            continue;
        }
        for (coin_a, coin_b) in [(x, y), (y, x)] {
            if s.live_degree(coin_a) != 1 || s.live_degree(coin_b) != 2 {
                continue;
            }
            // B's other string; with degree 2 the XOR trick is not available,
            // so scan B's incident strings.
            let Some(b) = s
                .alive_ids()
                .find(|&t| t != a && board.string(t).other_end(coin_b).is_some())
            else {
                continue;
            };
            let far = board.string(b).other_end(coin_b).expect("incident");
            let second_leaf = matches!(far, Endpoint::Coin(c) if s.live_degree(c) == 1);
            if !second_leaf {
                out.push(LoonyWitness {
                    a,
                    b,
                    coin_a,
                    coin_b,
                });
            }
        }
    }
    out
}

/// The opening cuts that win a loony position for the player to move:
/// `[a, b]` when the mover wins the remainder, `[b]` otherwise.
pub fn loony_first_move(s: &GameState, w: &LoonyWitness, solver: &Solver) -> Result<Vec<usize>> {
    let rest = s.alive_ids().filter(|&id| id != w.a && id != w.b);
    let remainder = GameState::with_alive(s.board().clone(), rest, s.mover())?;
    let r = solver.solve(&remainder, GameKind::Nimstring)?;
    Ok(if r.winner_for_mover {
        vec![w.a, w.b]
    } else {
        vec![w.b]
    })
}

/// Plays `line` from `s` in Nimstring and asks the solver whether the
/// original mover now wins.
pub fn line_wins_for_mover(s: &GameState, line: &[usize], solver: &Solver) -> Result<bool> {
    let me: Player = s.mover();
    let mut t = s.clone();
    for &id in line {
        t.cut(GameKind::Nimstring, id)?;
    }
    let r = solver.solve(&t, GameKind::Nimstring)?;
    Ok(r.winner_for_mover == (t.mover() == me))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multigraph::Multigraph;
    use std::sync::Arc;

    const G: Endpoint = Endpoint::Ground;
    fn c(i: usize) -> Endpoint {
        Endpoint::coin(i)
    }

    fn state(coins: usize, strings: &[(Endpoint, Endpoint)]) -> GameState {
        let mut g = Multigraph::with_coins(coins);
        for &(a, b) in strings {
            g.add_string(a, b).unwrap();
        }
        GameState::new(Arc::new(g)).unwrap()
    }

    #[test]
    fn forced_lines() {
        let solver = Solver::default();
        let lone = state(2, &[(c(0), c(1))]);
        assert!(!solver.solve(&lone, GameKind::Nimstring).unwrap().winner_for_mover);
        assert!(!naive_solve(&lone, GameKind::Nimstring).unwrap().winner_for_mover);

        let fork = state(1, &[(c(0), G), (c(0), G)]);
        assert!(solver.solve(&fork, GameKind::CoinsAreLava).unwrap().winner_for_mover);

        let empty = state(0, &[]);
        assert!(!naive_solve(&empty, GameKind::CoinsAreLava).unwrap().winner_for_mover);
    }

    #[test]
    fn short_chain_is_first_player_win() {
        // A - B - ground
        let s = state(2, &[(c(0), c(1)), (c(1), G)]);
        let r = Solver::default().solve(&s, GameKind::Nimstring).unwrap();
        assert!(r.winner_for_mover);
        assert_eq!(r.winner(&s), Winner::P1);
    }

    #[test]
    fn triangle_sac_matches_hand_count() {
        // Any first cut opens a 3-chain and the opponent takes all three coins.
        let s = state(3, &[(c(0), c(1)), (c(1), c(2)), (c(2), c(0))]);
        let r = Solver::default().solve(&s, GameKind::StringsAndCoins).unwrap();
        let n = naive_solve(&s, GameKind::StringsAndCoins).unwrap();
        assert_eq!(r.net_score_for_mover, -3);
        assert_eq!(n.net_score_for_mover, -3);
        assert_eq!(r.winner(&s), Winner::P2);
    }

    #[test]
    fn budgets() {
        let strings: Vec<_> = (0..13).map(|_| (c(0), G)).collect();
        let s = state(1, &strings);
        assert!(matches!(
            naive_solve(&s, GameKind::Nimstring),
            Err(Error::BudgetExceeded { alive: 13, budget: 12 })
        ));
        assert!(matches!(
            Solver::with_budget(10).solve(&s, GameKind::Nimstring),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(Solver::default().solve(&s, GameKind::Nimstring).is_ok());
    }

    #[test]
    fn memo_determinism() {
        let s = state(3, &[(c(0), c(1)), (c(1), c(2)), (c(2), G), (c(0), G), (c(1), G)]);
        let a = Solver::default().solve(&s, GameKind::StringsAndCoins).unwrap();
        let b = Solver::default().solve(&s, GameKind::StringsAndCoins).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn loony_patterns() {
        // 4(b): A - B - ground.
        let s = state(2, &[(c(0), c(1)), (c(1), G)]);
        let w = find_loony_witnesses(&s);
        assert_eq!(w.len(), 1);
        assert_eq!((w[0].a, w[0].b, w[0].coin_a, w[0].coin_b), (0, 1, CoinId(0), CoinId(1)));

        // 4(a): A - B - C, C has two more ground strings.
        let s = state(3, &[(c(0), c(1)), (c(1), c(2)), (c(2), G), (c(2), G)]);
        assert_eq!(find_loony_witnesses(&s).len(), 1);

        // Path of three coins with both ends degree 1: not loony.
        let s = state(3, &[(c(0), c(1)), (c(1), c(2))]);
        assert!(find_loony_witnesses(&s).is_empty());
    }

    #[test]
    fn loony_lines() {
        let solver = Solver::default();
        let s = state(2, &[(c(0), c(1)), (c(1), G)]);
        let w = find_loony_witnesses(&s)[0];
        let line = loony_first_move(&s, &w, &solver).unwrap();
        assert_eq!(line, vec![1]);
        assert!(line_wins_for_mover(&s, &line, &solver).unwrap());

        // G' = a lone coin-ground string: whoever cuts it must move again
        // on an empty board, so the mover of G' loses.
        let s = state(3, &[(c(0), c(1)), (c(1), c(2)), (c(2), G)]);
        let w = find_loony_witnesses(&s)[0];
        let line = loony_first_move(&s, &w, &solver).unwrap();
        assert_eq!(line, vec![w.b]);
        assert!(line_wins_for_mover(&s, &line, &solver).unwrap());

        // G' = a coin with two ground strings, a win for its mover.
        let s = state(3, &[(c(0), c(1)), (c(1), c(2)), (c(2), G), (c(2), G)]);
        let w = find_loony_witnesses(&s)[0];
        let line = loony_first_move(&s, &w, &solver).unwrap();
        assert_eq!(line, vec![w.a, w.b]);
        assert!(line_wins_for_mover(&s, &line, &solver).unwrap());
    }

    #[test]
    fn lava_formulations_agree() {
        let s = state(2, &[(c(0), c(1)), (c(0), G), (c(1), G), (c(1), G)]);
        let forbidden = Solver::default().solve(&s, GameKind::CoinsAreLava).unwrap();
        assert_eq!(forbidden.winner_for_mover, naive_lava_free_loses(&s).unwrap());
    }
}
