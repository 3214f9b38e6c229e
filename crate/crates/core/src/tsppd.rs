//! Exact single-vehicle routing with pickup-before-drop-off precedence.
//!
//! For each candidate driver the remaining members' origins and destinations
//! are sequenced by a cost-to-go dynamic program over (visited set, last
//! node). A destination may only be entered once its origin is visited.

use serde::{Deserialize, Serialize};

use crate::coalition::Coalition;
use crate::error::{domain, Error, Result};
use crate::instance::Instance;

/// Largest coalition a single route may cover; the DP state space grows as
/// `4^|S|`.
pub const MAX_ROUTE_PLAYERS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    /// 0-based player id of the driver.
    pub driver: usize,
    /// Graph node ids: origin of player `i` is `i + 1`, destination `i + 1 + n`.
    pub stops: Vec<usize>,
    pub cost: f64,
}

impl Route {
    /// Players covered by the route.
    pub fn coalition(&self, n: usize) -> Coalition {
        Coalition::from_members(self.stops.iter().filter(|&&v| v <= n).map(|&v| v - 1))
    }
}

fn tie_eps(v: f64) -> f64 {
    1e-9 * v.abs().max(1.0)
}

/// Minimum-cost route serving all of `s` with one vehicle.
///
/// Among equal-cost routes the lexicographically smallest stop sequence is
/// returned.
pub fn solve_tsppd(inst: &Instance, s: Coalition) -> Result<Route> {
    let n = inst.len();
    if s.is_empty() {
        return Err(domain("route for the empty coalition"));
    }
    if !s.fits(n) {
        return Err(domain(format!(
            "coalition {s} has members beyond {n} players"
        )));
    }
    if s.cardinality() > inst.capacity() {
        return Err(domain(format!(
            "coalition {s} exceeds vehicle capacity {}",
            inst.capacity()
        )));
    }
    if s.cardinality() > MAX_ROUTE_PLAYERS {
        return Err(Error::ScaleLimit {
            what: "route size",
            value: s.cardinality(),
            max: MAX_ROUTE_PLAYERS,
        });
    }

    let mut best: Option<(f64, usize, DriverPlan)> = None;
    for d in s.members() {
        let plan = DriverPlan::build(inst, s, d);
        let c = plan.optimum();
        match &best {
            // drivers come in ascending order, so a tie keeps the earlier one
            Some((b, _, _)) if c >= *b - tie_eps(*b) => {}
            _ => best = Some((c, d, plan)),
        }
    }
    let (_, driver, plan) = best.expect("non-empty coalition has a driver");
    let stops = plan.trace();
    let m = inst.cost();
    let cost = stops.windows(2).map(|w| m.get(w[0], w[1])).sum();
    Ok(Route {
        driver,
        stops,
        cost,
    })
}

/// `c(S)` for a coalition one vehicle can serve.
pub fn char_value_feasible(inst: &Instance, s: Coalition) -> Result<f64> {
    solve_tsppd(inst, s).map(|r| r.cost)
}

struct DriverPlan<'a> {
    inst: &'a Instance,
    start: usize,
    end: usize,
    /// Global node ids of the passengers' origins then destinations.
    nodes: Vec<usize>,
    k: usize,
    /// `togo[mask * 2k + last]`: cheapest completion from `last` having
    /// visited `mask`.
    togo: Vec<f64>,
}

impl<'a> DriverPlan<'a> {
    fn build(inst: &'a Instance, s: Coalition, driver: usize) -> Self {
        let passengers: Vec<usize> = s.members().filter(|&i| i != driver).collect();
        let k = passengers.len();
        let mut nodes: Vec<usize> = passengers.iter().map(|&i| inst.origin_node(i)).collect();
        nodes.extend(passengers.iter().map(|&i| inst.destination_node(i)));
        let mut plan = DriverPlan {
            inst,
            start: inst.origin_node(driver),
            end: inst.destination_node(driver),
            nodes,
            k,
            togo: Vec::new(),
        };
        plan.fill();
        plan
    }

    fn allowed(&self, mask: usize, next: usize) -> bool {
        mask >> next & 1 == 0 && (next < self.k || mask >> (next - self.k) & 1 == 1)
    }

    fn fill(&mut self) {
        let w = 2 * self.k;
        if w == 0 {
            return;
        }
        let m = self.inst.cost();
        let full = (1usize << w) - 1;
        let mut togo = vec![f64::INFINITY; (full + 1) * w];
        for last in 0..w {
            togo[full * w + last] = m.get(self.nodes[last], self.end);
        }
        for mask in (1..full).rev() {
            for last in 0..w {
                if mask >> last & 1 == 0 {
                    continue;
                }
                let mut best = f64::INFINITY;
                for next in 0..w {
                    if !self.allowed(mask, next) {
                        continue;
                    }
                    let v = m.get(self.nodes[last], self.nodes[next])
                        + togo[(mask | 1 << next) * w + next];
                    if v < best {
                        best = v;
                    }
                }
                togo[mask * w + last] = best;
            }
        }
        self.togo = togo;
    }

    fn first_leg(&self, next: usize) -> f64 {
        let w = 2 * self.k;
        self.inst.cost().get(self.start, self.nodes[next]) + self.togo[(1 << next) * w + next]
    }

    fn optimum(&self) -> f64 {
        if self.k == 0 {
            return self.inst.cost().get(self.start, self.end);
        }
        (0..self.k)
            .map(|j| self.first_leg(j))
            .fold(f64::INFINITY, f64::min)
    }

    /// Greedy walk choosing the smallest node id that stays optimal.
    fn trace(&self) -> Vec<usize> {
        let w = 2 * self.k;
        let mut stops = vec![self.start];
        if w > 0 {
            let m = self.inst.cost();
            let target = self.optimum();
            let mut last = (0..self.k)
                .find(|&j| self.first_leg(j) <= target + tie_eps(target))
                .expect("optimum is attained");
            let mut mask = 1usize << last;
            stops.push(self.nodes[last]);
            while mask != (1 << w) - 1 {
                let here = self.togo[mask * w + last];
                let next = (0..w)
                    .filter(|&j| self.allowed(mask, j))
                    .find(|&j| {
                        m.get(self.nodes[last], self.nodes[j]) + self.togo[(mask | 1 << j) * w + j]
                            <= here + tie_eps(here)
                    })
                    .expect("cost-to-go is attained");
                mask |= 1 << next;
                last = next;
                stops.push(self.nodes[next]);
            }
        }
        stops.push(self.end);
        stops
    }
}
