use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// A path from the root of a term's tree unfolding; child indices are 1-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Position(Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn new(path: Vec<usize>) -> Self {
        debug_assert!(path.iter().all(|&i| i >= 1), "positions are 1-based");
        Position(path)
    }

    pub fn path(&self) -> &[usize] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Position {
        let mut p = self.0.clone();
        p.push(i);
        Position(p)
    }

    pub fn concat(&self, other: &Position) -> Position {
        let mut p = self.0.clone();
        p.extend_from_slice(&other.0);
        Position(p)
    }

    /// `self` is a (non-strict) prefix of `other`.
    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Neither position is a prefix of the other.
    pub fn is_disjoint(&self, other: &Position) -> bool {
        !self.is_prefix_of(other) && !other.is_prefix_of(self)
    }

    /// The suffix of `other` below `self`, if `self` is a prefix of `other`.
    pub fn strip_prefix_of(&self, other: &Position) -> Option<Position> {
        other.0.strip_prefix(self.0.as_slice()).map(|s| Position(s.to_vec()))
    }

    /// Ordering by depth first, then lexicographically (left-most first).
    pub fn depth_lex_cmp(&self, other: &Position) -> Ordering {
        self.depth()
            .cmp(&other.depth())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Position {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Position {
    fn cmp(&self, other: &Self) -> Ordering {
        self.depth_lex_cmp(other)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ".")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "ε" || s == "e" || s == "eps" {
            return Ok(Position::root());
        }
        s.split('.')
            .map(|part| match part.trim().parse::<usize>() {
                Ok(i) if i >= 1 => Ok(i),
                _ => Err(Error::parse(1, 1, format!("bad position component `{part}`"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Position)
    }
}

impl From<Vec<usize>> for Position {
    fn from(v: Vec<usize>) -> Self {
        Position::new(v)
    }
}
