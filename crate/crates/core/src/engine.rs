//! Rule semantics for Strings-and-Coins, Nimstring and Coins-are-Lava.
//!
//! A [`GameState`] shares an immutable board and tracks the surviving strings
//! as a bitmask. Alongside the mask it keeps, per coin, the live degree and
//! the XOR of live incident string ids; when a coin is down to one string the
//! XOR *is* that string, which makes Lava legality checks O(1) per cut.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multigraph::{CoinId, Multigraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameKind {
    StringsAndCoins,
    Nimstring,
    CoinsAreLava,
}

impl GameKind {
    pub const ALL: [GameKind; 3] = [
        GameKind::StringsAndCoins,
        GameKind::Nimstring,
        GameKind::CoinsAreLava,
    ];
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameKind::StringsAndCoins => "sac",
            GameKind::Nimstring => "nimstring",
            GameKind::CoinsAreLava => "lava",
        })
    }
}

/// `P1` makes the first cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    P1,
    P2,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::P1 => Player::P2,
            Player::P2 => Player::P1,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::P1 => "P1",
            Player::P2 => "P2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Winner {
    P1,
    P2,
    Draw,
}

impl From<Player> for Winner {
    fn from(p: Player) -> Self {
        match p {
            Player::P1 => Winner::P1,
            Player::P2 => Winner::P2,
        }
    }
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::P1 => "P1",
            Winner::P2 => "P2",
            Winner::Draw => "Draw",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub winner: Winner,
    /// Indexed by [`Player::index`]; zero outside Strings-and-Coins.
    pub final_score: [u32; 2],
}

/// What a single cut did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CutEffect {
    pub freed: u32,
    pub mover_after: Player,
}

#[derive(Clone, Debug)]
pub struct GameState {
    board: Arc<Multigraph>,
    alive: Vec<u64>,
    alive_count: usize,
    degree: Vec<u32>,
    incident_xor: Vec<usize>,
    /// Live strings with a coin endpoint of live degree 1.
    blocked: usize,
    mover: Player,
    score: [u32; 2],
}

impl GameState {
    /// Opening position: every string alive, P1 to move.
    pub fn new(board: Arc<Multigraph>) -> Result<GameState> {
        let n = board.string_count();
        Self::with_alive(board, 0..n, Player::P1)
    }

    pub fn with_alive(
        board: Arc<Multigraph>,
        alive: impl IntoIterator<Item = usize>,
        mover: Player,
    ) -> Result<GameState> {
        if let Some(c) = board.first_self_loop() {
            return Err(Error::DegenerateInput(c.0));
        }
        let n = board.string_count();
        let mut state = GameState {
            alive: vec![0; n.div_ceil(64)],
            alive_count: 0,
            degree: vec![0; board.coin_count()],
            incident_xor: vec![0; board.coin_count()],
            blocked: 0,
            mover,
            score: [0; 2],
            board,
        };
        for id in alive {
            if id >= n {
                return Err(Error::IllegalMove(id));
            }
            if state.is_alive(id) {
                continue;
            }
            state.alive[id / 64] |= 1 << (id % 64);
            state.alive_count += 1;
            for c in state.board.string(id).coins() {
                state.degree[c.0] += 1;
                state.incident_xor[c.0] ^= id;
            }
        }
        state.blocked = state.alive_ids().filter(|&id| state.is_blocked(id)).count();
        Ok(state)
    }

    pub fn board(&self) -> &Arc<Multigraph> {
        &self.board
    }

    pub fn mover(&self) -> Player {
        self.mover
    }

    pub fn set_mover(&mut self, p: Player) {
        self.mover = p;
    }

    pub fn score(&self, p: Player) -> u32 {
        self.score[p.index()]
    }

    pub fn scores(&self) -> [u32; 2] {
        self.score
    }

    pub fn set_scores(&mut self, scores: [u32; 2]) {
        self.score = scores;
    }

    pub fn alive_count(&self) -> usize {
        self.alive_count
    }

    pub fn is_alive(&self, id: usize) -> bool {
        id < self.board.string_count() && self.alive[id / 64] >> (id % 64) & 1 == 1
    }

    pub fn alive_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.alive.iter().enumerate().flat_map(|(w, &bits)| {
            let mut bits = bits;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + b)
            })
        })
    }

    pub fn live_degree(&self, c: CoinId) -> u32 {
        self.degree[c.0]
    }

    /// The single live string at `c`, when `c` has live degree 1.
    pub fn last_string_at(&self, c: CoinId) -> Option<usize> {
        (self.degree[c.0] == 1).then_some(self.incident_xor[c.0])
    }

    /// Coins this cut would free.
    pub fn frees(&self, id: usize) -> u32 {
        self.board
            .string(id)
            .coins()
            .filter(|c| self.degree[c.0] == 1)
            .count() as u32
    }

    fn is_blocked(&self, id: usize) -> bool {
        self.is_alive(id) && self.frees(id) > 0
    }

    pub fn is_legal(&self, id: usize, kind: GameKind) -> bool {
        self.is_alive(id) && (kind != GameKind::CoinsAreLava || self.frees(id) == 0)
    }

    pub fn legal_count(&self, kind: GameKind) -> usize {
        match kind {
            GameKind::CoinsAreLava => self.alive_count - self.blocked,
            _ => self.alive_count,
        }
    }

    pub fn legal_moves(&self, kind: GameKind) -> Vec<usize> {
        self.alive_ids()
            .filter(|&id| kind != GameKind::CoinsAreLava || self.frees(id) == 0)
            .collect()
    }

    pub fn apply_move(&self, kind: GameKind, id: usize) -> Result<GameState> {
        let mut next = self.clone();
        next.cut(kind, id)?;
        Ok(next)
    }

    /// Cuts `id` in place.
    pub fn cut(&mut self, kind: GameKind, id: usize) -> Result<CutEffect> {
        if !self.is_legal(id, kind) {
            return Err(Error::IllegalMove(id));
        }
        let edge = *self.board.string(id);
        // Strings that may change blocked status: the partner string at any
        // endpoint going from degree 2 to 1.
        let mut watch: [Option<(usize, bool)>; 2] = [None, None];
        for (slot, c) in edge.coins().enumerate() {
            if self.degree[c.0] == 2 {
                let t = self.incident_xor[c.0] ^ id;
                if watch[..slot].iter().all(|w| w.map(|(x, _)| x) != Some(t)) {
                    watch[slot] = Some((t, self.is_blocked(t)));
                }
            }
        }
        let was_blocked = self.is_blocked(id);
        let freed = self.frees(id);

        self.alive[id / 64] &= !(1 << (id % 64));
        self.alive_count -= 1;
        for c in edge.coins() {
            self.degree[c.0] -= 1;
            self.incident_xor[c.0] ^= id;
        }
        if was_blocked {
            self.blocked -= 1;
        }
        for (t, before) in watch.into_iter().flatten() {
            match (before, self.is_blocked(t)) {
                (false, true) => self.blocked += 1,
                (true, false) => self.blocked -= 1,
                _ => {}
            }
        }

        match kind {
            GameKind::CoinsAreLava => self.mover = self.mover.other(),
            _ if freed > 0 => {
                if kind == GameKind::StringsAndCoins {
                    self.score[self.mover.index()] += freed;
                }
            }
            _ => self.mover = self.mover.other(),
        }
        Ok(CutEffect {
            freed,
            mover_after: self.mover,
        })
    }

    pub fn is_terminal(&self, kind: GameKind) -> Option<Outcome> {
        match kind {
            GameKind::StringsAndCoins => (self.alive_count == 0).then(|| {
                let [a, b] = self.score;
                let winner = match a.cmp(&b) {
                    std::cmp::Ordering::Greater => Winner::P1,
                    std::cmp::Ordering::Less => Winner::P2,
                    std::cmp::Ordering::Equal => Winner::Draw,
                };
                Outcome {
                    winner,
                    final_score: self.score,
                }
            }),
            GameKind::Nimstring | GameKind::CoinsAreLava => {
                (self.legal_count(kind) == 0).then(|| Outcome {
                    winner: self.mover.other().into(),
                    final_score: [0; 2],
                })
            }
        }
    }
}

/// Parses a move transcript: `cut <id>` per line, `#` comments allowed, and
/// any text after a `#` on a line ignored.
pub fn parse_transcript(text: &str) -> Result<Vec<usize>> {
    let mut cuts = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        // `ply <k> <player> cut <id>` lines from playouts are accepted too.
        let id = match fields.as_slice() {
            ["cut", id] | ["ply", _, _, "cut", id] => id.parse().ok(),
            _ => None,
        };
        cuts.push(id.ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected `cut <id>`, found {line:?}"),
        })?);
    }
    Ok(cuts)
}

/// Replays `cuts` from the opening position and returns the outcome if the
/// game has ended.
pub fn replay(board: Arc<Multigraph>, kind: GameKind, cuts: &[usize]) -> Result<(GameState, Option<Outcome>)> {
    let mut state = GameState::new(board)?;
    for &id in cuts {
        if state.is_terminal(kind).is_some() {
            return Err(Error::IllegalMove(id));
        }
        state.cut(kind, id)?;
    }
    let outcome = state.is_terminal(kind);
    Ok((state, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multigraph::Endpoint;

    fn board(coins: usize, strings: &[(Endpoint, Endpoint)]) -> Arc<Multigraph> {
        let mut g = Multigraph::with_coins(coins);
        for &(a, b) in strings {
            g.add_string(a, b).unwrap();
        }
        Arc::new(g)
    }

    const G: Endpoint = Endpoint::Ground;
    fn c(i: usize) -> Endpoint {
        Endpoint::coin(i)
    }

    #[test]
    fn lava_legality() {
        let two = GameState::new(board(1, &[(c(0), G), (c(0), G)])).unwrap();
        assert_eq!(two.legal_moves(GameKind::CoinsAreLava), vec![0, 1]);

        let one = GameState::new(board(1, &[(c(0), G)])).unwrap();
        assert!(one.legal_moves(GameKind::CoinsAreLava).is_empty());
        assert_eq!(one.legal_moves(GameKind::Nimstring), vec![0]);
    }

    #[test]
    fn sac_lone_coin() {
        let s = GameState::new(board(1, &[(c(0), G)])).unwrap();
        let s = s.apply_move(GameKind::StringsAndCoins, 0).unwrap();
        assert_eq!(s.score(Player::P1), 1);
        assert_eq!(s.mover(), Player::P1);
        assert_eq!(s.alive_count(), 0);
        assert_eq!(
            s.is_terminal(GameKind::StringsAndCoins).unwrap().winner,
            Winner::P1
        );
    }

    #[test]
    fn nimstring_lone_coin_coin_string() {
        let s = GameState::new(board(2, &[(c(0), c(1))])).unwrap();
        let mut t = s.clone();
        let eff = t.cut(GameKind::Nimstring, 0).unwrap();
        assert_eq!(eff.freed, 2);
        assert_eq!(t.mover(), Player::P1);
        assert_eq!(t.is_terminal(GameKind::Nimstring).unwrap().winner, Winner::P2);
    }

    #[test]
    fn lava_triangle_flips() {
        let g = Multigraph::cycle_graph(3).unwrap();
        let s = GameState::new(Arc::new(g)).unwrap();
        for id in 0..3 {
            let mut t = s.clone();
            let eff = t.cut(GameKind::CoinsAreLava, id).unwrap();
            assert_eq!(eff.freed, 0);
            assert_eq!(t.mover(), Player::P2);
        }
    }

    #[test]
    fn terminal_rules() {
        let mut s = GameState::new(board(0, &[])).unwrap();
        s.set_mover(Player::P2);
        assert_eq!(s.is_terminal(GameKind::Nimstring).unwrap().winner, Winner::P1);
        s.set_mover(Player::P1);
        assert_eq!(s.is_terminal(GameKind::CoinsAreLava).unwrap().winner, Winner::P2);
        s.set_scores([2, 1]);
        let o = s.is_terminal(GameKind::StringsAndCoins).unwrap();
        assert_eq!((o.winner, o.final_score), (Winner::P1, [2, 1]));
        s.set_scores([1, 1]);
        assert_eq!(
            s.is_terminal(GameKind::StringsAndCoins).unwrap().winner,
            Winner::Draw
        );
    }

    #[test]
    fn illegal_and_degenerate() {
        let s = GameState::new(board(1, &[(c(0), G)])).unwrap();
        assert!(matches!(
            s.apply_move(GameKind::CoinsAreLava, 0),
            Err(Error::IllegalMove(0))
        ));
        assert!(matches!(
            s.apply_move(GameKind::Nimstring, 5),
            Err(Error::IllegalMove(5))
        ));
        let looped = Multigraph::cycle_graph(1).unwrap();
        assert!(matches!(
            GameState::new(Arc::new(looped)),
            Err(Error::DegenerateInput(0))
        ));
    }

    #[test]
    fn blocked_count_tracks_parallel_partner() {
        // Coins 0 and 1 joined by two parallel strings plus a ground string
        // on coin 0. Cutting the ground string leaves the pair at degree 2.
        let b = board(2, &[(c(0), c(1)), (c(0), c(1)), (c(0), G)]);
        let mut s = GameState::new(b).unwrap();
        assert_eq!(s.legal_count(GameKind::CoinsAreLava), 3);
        s.cut(GameKind::CoinsAreLava, 0).unwrap();
        // coin 1 now has degree 1, so string 1 is blocked; string 2 is fine.
        assert_eq!(s.legal_moves(GameKind::CoinsAreLava), vec![2]);
        assert_eq!(s.legal_count(GameKind::CoinsAreLava), 1);
    }

    #[test]
    fn transcripts() {
        let cuts = parse_transcript("# header\ncut 1\nply 2 P2 cut 0 # wire phase=2\n").unwrap();
        assert_eq!(cuts, vec![1, 0]);
        assert!(parse_transcript("snip 3\n").is_err());

        let b = board(1, &[(c(0), G), (c(0), G)]);
        let (_, out) = replay(b.clone(), GameKind::CoinsAreLava, &[0]).unwrap();
        assert_eq!(out.unwrap().winner, Winner::P1);
        assert!(replay(b, GameKind::CoinsAreLava, &[0, 1]).is_err());
    }
}
