//! Multi-vehicle ridesharing plans: the cheapest partition of a player set
//! into capacity-feasible routes.
//!
//! Block costs come from [`crate::tsppd`]; blocks that some 2-split beats
//! are pruned (they never appear in an optimal plan) and the rest are
//! combined by a submask dynamic program.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coalition::{Coalition, MAX_PLAYERS};
use crate::error::{domain, Error, Result};
use crate::instance::Instance;
use crate::tsppd::{solve_tsppd, Route, MAX_ROUTE_PLAYERS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub members: Coalition,
    pub route: Route,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    /// Ascending by member mask.
    pub blocks: Vec<Block>,
    pub cost: f64,
}

impl Partition {
    pub fn coalitions(&self) -> Vec<Coalition> {
        self.blocks.iter().map(|b| b.members).collect()
    }
}

fn tie_eps(v: f64) -> f64 {
    1e-9 * v.abs().max(1.0)
}

/// Single-route optima for every feasible subset of `universe`, indexed by
/// mask. Computed in parallel.
pub fn route_book(inst: &Instance, universe: Coalition) -> Result<Vec<Option<Route>>> {
    let n = inst.len();
    if n > MAX_PLAYERS {
        return Err(Error::ScaleLimit {
            what: "players",
            value: n,
            max: MAX_PLAYERS,
        });
    }
    let q = inst.capacity().min(universe.cardinality());
    if q > MAX_ROUTE_PLAYERS {
        return Err(Error::ScaleLimit {
            what: "route size",
            value: q,
            max: MAX_ROUTE_PLAYERS,
        });
    }
    let masks: Vec<Coalition> = universe
        .subsets()
        .filter(|s| s.cardinality() <= q)
        .collect();
    let solved: Vec<(Coalition, Route)> = masks
        .into_par_iter()
        .map(|s| solve_tsppd(inst, s).map(|r| (s, r)))
        .collect::<Result<_>>()?;
    let mut book = vec![None; 1 << n];
    for (s, r) in solved {
        book[s.mask() as usize] = Some(r);
    }
    Ok(book)
}

/// Profitability over single-route costs: no split of `s` into
/// two non-empty parts is strictly cheaper than one route for `s`.
fn profitable_in(block_cost: &[f64], s: Coalition) -> bool {
    let whole = block_cost[s.mask() as usize];
    let low = Coalition::singleton(s.first().expect("non-empty"));
    s.subsets()
        .filter(|&a| a != s && low.is_subset_of(a))
        .all(|a| {
            let b = s.difference(a);
            block_cost[a.mask() as usize] + block_cost[b.mask() as usize] >= whole
        })
}

/// Whether one vehicle serving `s` beats every split into two parties.
pub fn is_profitable_route(inst: &Instance, s: Coalition) -> Result<bool> {
    if s.is_empty() || s.cardinality() > inst.capacity() {
        return Err(domain(format!(
            "profitability is defined for feasible coalitions; {s} has {} members, capacity {}",
            s.cardinality(),
            inst.capacity()
        )));
    }
    let book = route_book(inst, s)?;
    let costs: Vec<f64> = book
        .iter()
        .map(|r| r.as_ref().map_or(f64::INFINITY, |r| r.cost))
        .collect();
    Ok(profitable_in(&costs, s))
}

/// Cheapest partition of every subset of `universe` into usable blocks.
///
/// `block_cost[m]` is the cost of serving mask `m` as one block, or infinity
/// when `m` may not be a block.
pub struct PlanDp {
    pub cost: Vec<f64>,
    block_cost: Vec<f64>,
}

impl PlanDp {
    pub fn solve(block_cost: Vec<f64>, universe: Coalition) -> Self {
        let mut cost = vec![f64::INFINITY; block_cost.len()];
        cost[0] = 0.0;
        // submasks of the universe in ascending numeric order
        let mut subs: Vec<Coalition> = universe.subsets().collect();
        subs.reverse();
        for t in subs {
            let low = Coalition::singleton(t.first().unwrap());
            let mut best = f64::INFINITY;
            for b in t.subsets().filter(|b| low.is_subset_of(*b)) {
                let bc = block_cost[b.mask() as usize];
                if bc.is_finite() {
                    let v = bc + cost[t.difference(b).mask() as usize];
                    if v < best {
                        best = v;
                    }
                }
            }
            cost[t.mask() as usize] = best;
        }
        PlanDp { cost, block_cost }
    }

    /// The smallest-mask block that starts an optimal partition of `t`.
    pub fn first_block(&self, t: Coalition) -> Option<Coalition> {
        let target = self.cost[t.mask() as usize];
        if !target.is_finite() {
            return None;
        }
        let eps = tie_eps(target);
        t.subsets()
            .filter(|b| {
                let bc = self.block_cost[b.mask() as usize];
                bc.is_finite() && bc + self.cost[t.difference(*b).mask() as usize] <= target + eps
            })
            .min()
    }

    /// Optimal partition of `t` whose ascending block list is
    /// lexicographically smallest.
    pub fn plan(&self, t: Coalition) -> Option<Vec<Coalition>> {
        let mut out = Vec::new();
        let mut rest = t;
        while !rest.is_empty() {
            let b = self.first_block(rest)?;
            out.push(b);
            rest = rest.difference(b);
        }
        Some(out)
    }
}

/// Block costs for the plan DP: single-route cost for feasible profitable
/// masks, infinity otherwise.
pub fn usable_blocks(book: &[Option<Route>]) -> Vec<f64> {
    let raw: Vec<f64> = book
        .iter()
        .map(|r| r.as_ref().map_or(f64::INFINITY, |r| r.cost))
        .collect();
    (0..raw.len())
        .map(|m| {
            let s = Coalition::from_mask(m as u32);
            if m != 0 && raw[m].is_finite() && profitable_in(&raw, s) {
                raw[m]
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

/// Minimum-cost assignment of the players in `s` to feasible routes.
pub fn solve_rsp(inst: &Instance, s: Coalition) -> Result<Partition> {
    if s.is_empty() {
        return Err(domain("ridesharing plan for the empty coalition"));
    }
    if !s.fits(inst.len()) {
        return Err(domain(format!(
            "coalition {s} has members beyond {} players",
            inst.len()
        )));
    }
    let book = route_book(inst, s)?;
    let dp = PlanDp::solve(usable_blocks(&book), s);
    let blocks = dp.plan(s).expect("singletons are always usable");
    Ok(assemble(&book, blocks))
}

pub(crate) fn assemble(book: &[Option<Route>], blocks: Vec<Coalition>) -> Partition {
    let blocks: Vec<Block> = blocks
        .into_iter()
        .map(|b| Block {
            members: b,
            route: book[b.mask() as usize]
                .clone()
                .expect("blocks are feasible"),
        })
        .collect();
    let cost = blocks.iter().map(|b| b.route.cost).sum();
    Partition { blocks, cost }
}
