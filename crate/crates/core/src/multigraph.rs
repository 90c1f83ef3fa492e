//! Coin/string multigraphs.
//!
//! A string joins at most two coins; any missing endpoint is the ground.
//! Parallel strings are stored individually, so a rope of width `w` is `w`
//! strings with consecutive ids. String ids never change once assigned; game
//! states remove strings logically.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoinId(pub usize);

impl fmt::Display for CoinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One end of a string. `Coin` sorts before `Ground`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Endpoint {
    Coin(CoinId),
    Ground,
}

impl Endpoint {
    pub fn coin(index: usize) -> Self {
        Endpoint::Coin(CoinId(index))
    }

    pub fn as_coin(self) -> Option<CoinId> {
        match self {
            Endpoint::Coin(c) => Some(c),
            Endpoint::Ground => None,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Coin(c) => write!(f, "{}", c.0),
            Endpoint::Ground => f.write_str("ground"),
        }
    }
}

/// A string with its endpoints stored in sorted order, so `(a, b)` and
/// `(b, a)` compare equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StringEdge {
    pub id: usize,
    pub a: Endpoint,
    pub b: Endpoint,
}

impl StringEdge {
    fn new(id: usize, x: Endpoint, y: Endpoint) -> Self {
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        StringEdge { id, a, b }
    }

    pub fn is_self_loop(&self) -> bool {
        matches!((self.a, self.b), (Endpoint::Coin(x), Endpoint::Coin(y)) if x == y)
    }

    pub fn is_ground_to_ground(&self) -> bool {
        self.a == Endpoint::Ground && self.b == Endpoint::Ground
    }

    /// Coin endpoints, with the ground dropped.
    pub fn coins(&self) -> impl Iterator<Item = CoinId> {
        [self.a, self.b].into_iter().filter_map(Endpoint::as_coin)
    }

    /// The endpoint across from `c`, if `c` is an endpoint.
    pub fn other_end(&self, c: CoinId) -> Option<Endpoint> {
        if self.a == Endpoint::Coin(c) {
            Some(self.b)
        } else if self.b == Endpoint::Coin(c) {
            Some(self.a)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multigraph {
    coin_count: usize,
    strings: Vec<StringEdge>,
    coin_labels: BTreeMap<usize, String>,
    string_labels: BTreeMap<usize, String>,
}

impl Multigraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_coins(count: usize) -> Self {
        Multigraph {
            coin_count: count,
            ..Self::default()
        }
    }

    pub fn coin_count(&self) -> usize {
        self.coin_count
    }

    pub fn string_count(&self) -> usize {
        self.strings.len()
    }

    pub fn strings(&self) -> &[StringEdge] {
        &self.strings
    }

    pub fn string(&self, id: usize) -> &StringEdge {
        &self.strings[id]
    }

    pub fn add_coin(&mut self) -> CoinId {
        self.coin_count += 1;
        CoinId(self.coin_count - 1)
    }

    fn check(&self, e: Endpoint) -> Result<()> {
        match e {
            Endpoint::Coin(CoinId(c)) if c >= self.coin_count => Err(Error::InvalidEndpoint {
                coin: c,
                coin_count: self.coin_count,
            }),
            _ => Ok(()),
        }
    }

    pub fn add_string(&mut self, a: Endpoint, b: Endpoint) -> Result<usize> {
        self.check(a)?;
        self.check(b)?;
        let id = self.strings.len();
        self.strings.push(StringEdge::new(id, a, b));
        Ok(id)
    }

    /// Adds `width` parallel strings between `a` and `b`.
    pub fn add_rope(&mut self, a: Endpoint, b: Endpoint, width: usize) -> Result<Range<usize>> {
        if width == 0 {
            return Err(Error::ZeroWidth);
        }
        self.check(a)?;
        self.check(b)?;
        let start = self.strings.len();
        for _ in 0..width {
            self.add_string(a, b)?;
        }
        Ok(start..start + width)
    }

    /// Drops every string with id `len` or above, with its label.
    pub fn truncate_strings(&mut self, len: usize) {
        self.strings.truncate(len);
        self.string_labels.split_off(&len);
    }

    pub fn set_coin_label(&mut self, c: CoinId, label: impl Into<String>) {
        self.coin_labels.insert(c.0, label.into());
    }

    pub fn set_string_label(&mut self, id: usize, label: impl Into<String>) {
        self.string_labels.insert(id, label.into());
    }

    pub fn label_strings(&mut self, ids: Range<usize>, label: &str) {
        for id in ids {
            self.string_labels.insert(id, label.to_owned());
        }
    }

    pub fn coin_label(&self, c: CoinId) -> Option<&str> {
        self.coin_labels.get(&c.0).map(String::as_str)
    }

    pub fn string_label(&self, id: usize) -> Option<&str> {
        self.string_labels.get(&id).map(String::as_str)
    }

    pub fn coin_labels(&self) -> &BTreeMap<usize, String> {
        &self.coin_labels
    }

    pub fn string_labels(&self) -> &BTreeMap<usize, String> {
        &self.string_labels
    }

    /// Degree of `c` over all strings. A self-loop counts twice.
    pub fn degree(&self, c: CoinId) -> usize {
        self.strings
            .iter()
            .map(|s| s.coins().filter(|&x| x == c).count())
            .sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.coin_count];
        for s in &self.strings {
            for c in s.coins() {
                deg[c.0] += 1;
            }
        }
        deg
    }

    pub fn first_self_loop(&self) -> Option<CoinId> {
        self.strings
            .iter()
            .find(|s| s.is_self_loop())
            .and_then(|s| s.a.as_coin())
    }

    /// `self` followed by `other`, with `other`'s coins shifted by
    /// `self.coin_count()` and its strings by `self.string_count()`.
    pub fn disjoint_union(&self, other: &Multigraph) -> Multigraph {
        let coin_offset = self.coin_count;
        let string_offset = self.strings.len();
        let shift = |e: Endpoint| match e {
            Endpoint::Coin(CoinId(c)) => Endpoint::Coin(CoinId(c + coin_offset)),
            Endpoint::Ground => Endpoint::Ground,
        };
        let mut g = self.clone();
        g.coin_count += other.coin_count;
        g.strings.extend(
            other
                .strings
                .iter()
                .map(|s| StringEdge::new(s.id + string_offset, shift(s.a), shift(s.b))),
        );
        g.coin_labels.extend(
            other
                .coin_labels
                .iter()
                .map(|(c, l)| (c + coin_offset, l.clone())),
        );
        g.string_labels.extend(
            other
                .string_labels
                .iter()
                .map(|(s, l)| (s + string_offset, l.clone())),
        );
        g
    }

    /// `n` coins joined in a ring. `n = 1` is a self-loop and `n = 2` a
    /// doubled string.
    pub fn cycle_graph(n: usize) -> Result<Multigraph> {
        if n == 0 {
            return Err(Error::ZeroLength);
        }
        let mut g = Multigraph::with_coins(n);
        for i in 0..n {
            g.add_string(Endpoint::coin(i), Endpoint::coin((i + 1) % n))?;
        }
        Ok(g)
    }

    /// Deterministic text form; labels are not part of it.
    pub fn canonical_text(&self) -> String {
        let mut out = String::with_capacity(16 + self.strings.len() * 24);
        let _ = writeln!(out, "coins {}", self.coin_count);
        for s in &self.strings {
            let _ = writeln!(out, "string {} {} {}", s.id, s.a, s.b);
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Multigraph> {
        let mut graph: Option<Multigraph> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["coins", count] => {
                    if graph.is_some() {
                        return Err(err("duplicate coins header".into()));
                    }
                    let count = count
                        .parse()
                        .map_err(|_| err(format!("bad coin count {count:?}")))?;
                    graph = Some(Multigraph::with_coins(count));
                }
                ["string", id, a, b] => {
                    let g = graph
                        .as_mut()
                        .ok_or_else(|| err("string before coins header".into()))?;
                    let id: usize = id.parse().map_err(|_| err(format!("bad string id {id:?}")))?;
                    if id != g.string_count() {
                        return Err(err(format!(
                            "expected string id {}, found {id}",
                            g.string_count()
                        )));
                    }
                    let a = parse_endpoint(a).ok_or_else(|| err(format!("bad endpoint {a:?}")))?;
                    let b = parse_endpoint(b).ok_or_else(|| err(format!("bad endpoint {b:?}")))?;
                    g.add_string(a, b).map_err(|e| err(e.to_string()))?;
                }
                _ => return Err(err(format!("unrecognised record {line:?}"))),
            }
        }
        graph.ok_or(Error::Parse {
            line: 0,
            message: "missing coins header".into(),
        })
    }

    /// Graphviz export. Coins are circles, the ground is a single shared box,
    /// and every string is its own edge. Labels beginning with a known role
    /// prefix pick the colour.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph G {\n  node [shape=circle, label=\"\", width=0.25];\n");
        let uses_ground = self
            .strings
            .iter()
            .any(|s| s.a == Endpoint::Ground || s.b == Endpoint::Ground);
        if uses_ground {
            out.push_str("  ground [shape=box, label=\"ground\", width=0.6];\n");
        }
        for c in 0..self.coin_count {
            match self.coin_labels.get(&c) {
                Some(label) => {
                    let _ = writeln!(
                        out,
                        "  c{c} [tooltip=\"{label}\", style=filled, fillcolor=\"{}\"];",
                        role_colour(label)
                    );
                }
                None => {
                    let _ = writeln!(out, "  c{c};");
                }
            }
        }
        let node = |e: Endpoint| match e {
            Endpoint::Coin(c) => format!("c{}", c.0),
            Endpoint::Ground => "ground".to_string(),
        };
        for s in &self.strings {
            match self.string_labels.get(&s.id) {
                Some(label) => {
                    let _ = writeln!(
                        out,
                        "  {} -- {} [id=\"s{}\", color=\"{}\"];",
                        node(s.a),
                        node(s.b),
                        s.id,
                        role_colour(label)
                    );
                }
                None => {
                    let _ = writeln!(out, "  {} -- {} [id=\"s{}\"];", node(s.a), node(s.b), s.id);
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

fn parse_endpoint(s: &str) -> Option<Endpoint> {
    if s == "ground" {
        Some(Endpoint::Ground)
    } else {
        s.parse().ok().map(Endpoint::coin)
    }
}

/// Colour for a provenance label, keyed on its leading role.
pub fn role_colour(label: &str) -> &'static str {
    let role = label.split(':').take(2).collect::<Vec<_>>();
    match role.as_slice() {
        ["clause", "empty", ..] => "gray40",
        ["clause", "singleton", ..] => "darkgreen",
        ["clause", "real", ..] => "darkorange",
        ["wire", "L1", ..] => "royalblue",
        ["wire", "L2", ..] => "purple",
        ["var", ..] => "black",
        ["root", ..] => "red",
        ["pad", ..] => "goldenrod",
        ["chain", ..] => "sienna",
        ["cycle", ..] => "deeppink",
        _ => "black",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_coin_counts_up() {
        let mut g = Multigraph::new();
        assert_eq!(g.add_coin(), CoinId(0));
        let mut g = Multigraph::with_coins(3);
        assert_eq!(g.add_coin(), CoinId(3));
        assert_eq!(g.coin_count(), 4);
        let mut h = Multigraph::new();
        for _ in 0..7 {
            h.add_coin();
        }
        assert_eq!(h.coin_count(), 7);
    }

    #[test]
    fn add_string_updates_degrees() {
        let mut g = Multigraph::with_coins(1);
        g.add_string(Endpoint::coin(0), Endpoint::Ground).unwrap();
        assert_eq!(g.degree(CoinId(0)), 1);

        let mut g = Multigraph::with_coins(2);
        let x = g.add_string(Endpoint::coin(0), Endpoint::coin(1)).unwrap();
        let y = g.add_string(Endpoint::coin(1), Endpoint::coin(0)).unwrap();
        assert_ne!(x, y);
        assert_eq!(g.degrees(), vec![2, 2]);
        assert_eq!(g.string(0).a, g.string(1).a);

        g.add_string(Endpoint::Ground, Endpoint::Ground).unwrap();
        assert_eq!(g.degrees(), vec![2, 2]);
    }

    #[test]
    fn add_string_rejects_bad_coin() {
        let mut g = Multigraph::with_coins(1);
        assert!(matches!(
            g.add_string(Endpoint::coin(1), Endpoint::Ground),
            Err(Error::InvalidEndpoint { coin: 1, .. })
        ));
    }

    #[test]
    fn ropes() {
        let mut g = Multigraph::with_coins(2);
        let r = g.add_rope(Endpoint::coin(0), Endpoint::coin(1), 5).unwrap();
        assert_eq!(r, 0..5);
        assert!(g.strings().iter().all(|s| (s.a, s.b) == (Endpoint::coin(0), Endpoint::coin(1))));

        let mut h = Multigraph::with_coins(2);
        h.add_rope(Endpoint::coin(0), Endpoint::coin(1), 1).unwrap();
        let mut k = Multigraph::with_coins(2);
        k.add_string(Endpoint::coin(0), Endpoint::coin(1)).unwrap();
        assert_eq!(h, k);

        let before = g.degree(CoinId(0));
        g.add_rope(Endpoint::coin(0), Endpoint::Ground, 3).unwrap();
        assert_eq!(g.degree(CoinId(0)), before + 3);

        assert!(matches!(
            g.add_rope(Endpoint::coin(0), Endpoint::Ground, 0),
            Err(Error::ZeroWidth)
        ));
    }

    #[test]
    fn union_and_cycles() {
        let mut g = Multigraph::with_coins(2);
        g.add_string(Endpoint::coin(0), Endpoint::coin(1)).unwrap();
        let h = g.disjoint_union(&Multigraph::cycle_graph(3).unwrap());
        assert_eq!((h.coin_count(), h.string_count()), (5, 4));
        assert_eq!(h.degrees(), vec![1, 1, 2, 2, 2]);

        assert_eq!(g.disjoint_union(&Multigraph::new()), g);

        let c3 = Multigraph::cycle_graph(3).unwrap();
        let two = c3.disjoint_union(&c3);
        assert_eq!((two.coin_count(), two.string_count()), (6, 6));
        assert!(two.strings()[3..].iter().all(|s| s.coins().all(|c| c.0 >= 3)));

        let c2 = Multigraph::cycle_graph(2).unwrap();
        assert_eq!(c2.degrees(), vec![2, 2]);
        assert!(Multigraph::cycle_graph(1).unwrap().first_self_loop().is_some());
        assert!(matches!(Multigraph::cycle_graph(0), Err(Error::ZeroLength)));
    }

    #[test]
    fn text_format() {
        let mut g = Multigraph::new();
        g.add_string(Endpoint::Ground, Endpoint::Ground).unwrap();
        assert_eq!(g.canonical_text(), "coins 0\nstring 0 ground ground\n");

        let text = "# comment\ncoins 2\n\nstring 0 1 0\nstring 1 ground 1\n";
        let g = Multigraph::parse_text(text).unwrap();
        assert_eq!(
            g.canonical_text(),
            "coins 2\nstring 0 0 1\nstring 1 1 ground\n"
        );
    }

    #[test]
    fn text_errors() {
        for bad in [
            "string 0 ground ground\n",
            "coins 1\nstring 1 0 ground\n",
            "coins 1\nstring 0 2 ground\n",
            "coins x\n",
            "coins 1\nrope 0 0 0\n",
            "",
        ] {
            assert!(Multigraph::parse_text(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn dot_has_parallel_edges_and_one_ground() {
        let mut g = Multigraph::with_coins(1);
        g.add_rope(Endpoint::coin(0), Endpoint::Ground, 3).unwrap();
        let dot = g.to_dot();
        assert_eq!(dot.matches("c0 -- ground").count(), 3);
        assert_eq!(dot.matches("ground [shape=box").count(), 1);
    }
}
