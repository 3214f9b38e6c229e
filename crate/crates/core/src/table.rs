//! Memoized characteristic function `S ↦ c(S)` with the solution that
//! witnesses each value.

use crate::coalition::{Coalition, MAX_PLAYERS};
use crate::error::{Error, Result};
use crate::tsppd::Route;

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Value supplied directly (characteristic-table games).
    Given,
    /// Single-vehicle optimum.
    Route(Route),
    /// Multi-route optimum whose lexicographically smallest block is `first`;
    /// the remaining blocks are the witness of `S \ first`.
    Split { first: Coalition },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub cost: f64,
    pub witness: Witness,
}

#[derive(Debug, Clone)]
pub struct CharTable {
    n: usize,
    entries: Vec<Option<Entry>>,
}

impl CharTable {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("game needs at least one player".into()));
        }
        if n > MAX_PLAYERS {
            return Err(Error::ScaleLimit {
                what: "players",
                value: n,
                max: MAX_PLAYERS,
            });
        }
        Ok(CharTable {
            n,
            entries: vec![None; 1 << n],
        })
    }

    /// Builds a complete table from `(coalition, cost)` pairs.
    pub fn from_pairs(n: usize, pairs: &[(Coalition, f64)]) -> Result<Self> {
        let mut t = CharTable::new(n)?;
        for &(s, c) in pairs {
            t.insert(s, c, Witness::Given);
        }
        let missing = t.missing();
        if !missing.is_empty() {
            return Err(Error::Table(
                missing
                    .into_iter()
                    .map(|s| format!("missing coalition {s}"))
                    .collect(),
            ));
        }
        Ok(t)
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.n)
    }

    /// `c(∅) = 0`; `None` for coalitions not yet evaluated.
    pub fn cost(&self, s: Coalition) -> Option<f64> {
        if s.is_empty() {
            return Some(0.0);
        }
        self.entries
            .get(s.mask() as usize)
            .and_then(|e| e.as_ref())
            .map(|e| e.cost)
    }

    pub fn entry(&self, s: Coalition) -> Option<&Entry> {
        self.entries.get(s.mask() as usize).and_then(|e| e.as_ref())
    }

    /// Inserting the same value twice is harmless.
    pub fn insert(&mut self, s: Coalition, cost: f64, witness: Witness) {
        assert!(
            !s.is_empty() && s.fits(self.n),
            "coalition {s} outside a {}-player table",
            self.n
        );
        self.entries[s.mask() as usize] = Some(Entry { cost, witness });
    }

    pub fn grand_cost(&self) -> Option<f64> {
        self.cost(self.grand())
    }

    pub fn missing(&self) -> Vec<Coalition> {
        (1..self.entries.len())
            .filter(|&m| self.entries[m].is_none())
            .map(|m| Coalition::from_mask(m as u32))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.entries[1..].iter().all(Option::is_some)
    }

    /// Defined entries in ascending mask order.
    pub fn pairs(&self) -> Vec<(Coalition, f64)> {
        (1..self.entries.len())
            .filter_map(|m| {
                self.entries[m]
                    .as_ref()
                    .map(|e| (Coalition::from_mask(m as u32), e.cost))
            })
            .collect()
    }

    /// Blocks of the witness partition of `s`, in ascending mask order.
    pub fn blocks(&self, s: Coalition) -> Option<Vec<Coalition>> {
        let mut out = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            match &self.entry(rest)?.witness {
                Witness::Split { first } => {
                    out.push(*first);
                    rest = rest.difference(*first);
                }
                _ => {
                    out.push(rest);
                    rest = Coalition::EMPTY;
                }
            }
        }
        out.sort();
        Some(out)
    }
}
