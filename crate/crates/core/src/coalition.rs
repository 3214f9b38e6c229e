//! Coalitions, allocations and excesses: the vocabulary every solver shares.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::table::CharTable;

/// Largest player count any coalition-indexed structure accepts.
pub const MAX_PLAYERS: usize = 16;

/// A set of players stored as a bitmask; bit `i` is player `i` (0-based).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coalition(u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub const fn from_mask(mask: u32) -> Self {
        Coalition(mask)
    }

    pub const fn mask(self) -> u32 {
        self.0
    }

    pub const fn singleton(i: usize) -> Self {
        Coalition(1 << i)
    }

    /// The grand coalition of `n` players.
    pub fn grand(n: usize) -> Self {
        debug_assert!(n <= MAX_PLAYERS);
        Coalition(((1u64 << n) - 1) as u32)
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(members: I) -> Self {
        Coalition(members.into_iter().fold(0, |m, i| m | (1 << i)))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn cardinality(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Coalition) -> Coalition {
        Coalition(self.0 | other.0)
    }

    pub fn intersection(self, other: Coalition) -> Coalition {
        Coalition(self.0 & other.0)
    }

    pub fn difference(self, other: Coalition) -> Coalition {
        Coalition(self.0 & !other.0)
    }

    /// Whether only bits `0..n` are set.
    pub fn fits(self, n: usize) -> bool {
        n >= 32 || self.0 >> n == 0
    }

    /// Lowest member, if any.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Member ids in ascending order.
    pub fn members(self) -> Members {
        Members(self.0)
    }

    /// Non-empty submasks of `self`, in descending mask order.
    pub fn subsets(self) -> Subsets {
        Subsets {
            full: self.0,
            next: Some(self.0).filter(|&m| m != 0),
        }
    }

    /// Sum of `y_i` over members.
    pub fn sum(self, y: &[f64]) -> f64 {
        self.members().map(|i| y[i]).sum()
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(self.members().map(|i| i + 1))
            .finish()
    }
}

/// Players are 0-based internally and printed 1-based, as in the input files.
impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.members().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

/// JSON form is the sorted, 1-based member list.
impl Serialize for Coalition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.members().map(|i| i + 1))
    }
}

impl<'de> Deserialize<'de> for Coalition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let members = Vec::<usize>::deserialize(d)?;
        let mut mask = 0u32;
        for m in members {
            if m == 0 || m > MAX_PLAYERS {
                return Err(serde::de::Error::custom(format!(
                    "member {m} outside 1..={MAX_PLAYERS}"
                )));
            }
            mask |= 1 << (m - 1);
        }
        Ok(Coalition(mask))
    }
}

pub struct Members(u32);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(i as usize)
    }
}

pub struct Subsets {
    full: u32,
    next: Option<u32>,
}

impl Iterator for Subsets {
    type Item = Coalition;

    fn next(&mut self) -> Option<Coalition> {
        let cur = self.next?;
        let nxt = cur.wrapping_sub(1) & self.full;
        self.next = (nxt != 0).then_some(nxt);
        Some(Coalition(cur))
    }
}

/// A per-player cost vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub y: Vec<f64>,
    pub total: f64,
    /// Set when `total` has been checked against `c(N)`.
    #[serde(default)]
    pub imputation: bool,
}

impl Allocation {
    pub fn new(y: Vec<f64>) -> Self {
        let total = y.iter().sum();
        Allocation {
            y,
            total,
            imputation: false,
        }
    }

    /// Tags `y` as an imputation; fails unless `Σ y_i = grand_cost` within 1e-7.
    pub fn imputation(y: Vec<f64>, grand_cost: f64) -> Result<Self> {
        let mut a = Allocation::new(y);
        let tol = 1e-7 * grand_cost.abs().max(1.0);
        if (a.total - grand_cost).abs() > tol {
            return Err(domain(format!(
                "allocation total {} differs from c(N) = {}",
                a.total, grand_cost
            )));
        }
        a.imputation = true;
        Ok(a)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Euclidean distance to another allocation of the same length.
    pub fn distance(&self, other: &Allocation) -> Result<f64> {
        if self.len() != other.len() {
            return Err(domain(format!(
                "allocation lengths differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .y
            .iter()
            .zip(&other.y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

/// Proper-coalition excesses sorted non-decreasingly, ties by ascending mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcessVector {
    pub entries: Vec<(Coalition, f64)>,
}

impl ExcessVector {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|&(_, e)| e)
    }

    pub fn min(&self) -> Option<(Coalition, f64)> {
        self.entries.first().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `e(y, S) = c(S) − Σ_{i∈S} y_i`.
pub fn excess(table: &CharTable, s: Coalition, y: &Allocation) -> Result<f64> {
    if s.is_empty() {
        return Err(domain("excess of the empty coalition"));
    }
    if !s.fits(y.len()) {
        return Err(domain(format!(
            "coalition {s} has members beyond the allocation"
        )));
    }
    let c = table
        .cost(s)
        .ok_or_else(|| domain(format!("c({s}) undefined")))?;
    Ok(c - s.sum(&y.y))
}

/// θ(y) over the 2^n − 2 proper coalitions; ∅ and N are left out since
/// both excesses vanish for any efficient `y`.
pub fn excess_vector(table: &CharTable, y: &Allocation) -> Result<ExcessVector> {
    let n = table.players();
    if y.len() != n {
        return Err(domain(format!(
            "allocation has {} entries for a {n}-player game",
            y.len()
        )));
    }
    let grand = Coalition::grand(n);
    let mut entries = Vec::with_capacity((1usize << n).saturating_sub(2));
    for mask in 1..grand.mask() {
        let s = Coalition::from_mask(mask);
        let c = table
            .cost(s)
            .ok_or_else(|| domain(format!("characteristic table incomplete: c({s}) missing")))?;
        entries.push((s, c - s.sum(&y.y)));
    }
    entries.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(ExcessVector { entries })
}

/// Lexicographic order on sorted excess values: the first differing
/// position decides.
pub fn lex_compare(a: &ExcessVector, b: &ExcessVector) -> Result<Ordering> {
    lex_compare_tol(a, b, 0.0)
}

/// As [`lex_compare`], treating entries within `tol` as equal.
pub fn lex_compare_tol(a: &ExcessVector, b: &ExcessVector, tol: f64) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(domain(format!(
            "excess vectors differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    for (x, y) in a.values().zip(b.values()) {
        if (x - y).abs() > tol {
            return Ok(x.total_cmp(&y));
        }
    }
    Ok(Ordering::Equal)
}

/// One vehicle can serve `S`: `1 ≤ |S| ≤ Q`, driver included.
pub fn is_feasible(s: Coalition, capacity: usize) -> bool {
    (1..=capacity).contains(&s.cardinality())
}

/// `Σ_{i∈S} c({i}) ≥ c(S)`.
pub fn is_profitable_coalition(table: &CharTable, s: Coalition) -> Result<bool> {
    if s.is_empty() {
        return Err(domain("profitability of the empty coalition"));
    }
    let missing = |t: Coalition| Error::Domain(format!("c({t}) undefined"));
    let joint = table.cost(s).ok_or_else(|| missing(s))?;
    let mut solo = 0.0;
    for i in s.members() {
        let t = Coalition::singleton(i);
        solo += table.cost(t).ok_or_else(|| missing(t))?;
    }
    Ok(solo >= joint)
}
