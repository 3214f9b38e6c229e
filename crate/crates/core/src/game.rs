//! A cooperative cost game ready for the nucleolus driver.

use crate::coalition::{is_feasible, Coalition};
use crate::error::{domain, Result};
use crate::instance::Instance;
use crate::rsp::{self, Partition, PlanDp};
use crate::table::{CharTable, Witness};
use crate::tsppd::Route;

#[derive(Debug, Clone)]
pub struct Game {
    table: CharTable,
    capacity: Option<usize>,
    plan: Vec<Coalition>,
    routes: Option<Vec<Option<Route>>>,
    digest: String,
}

impl Game {
    /// Evaluates `c(S)` for every coalition of a ridesharing instance.
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let n = inst.len();
        let grand = Coalition::grand(n);
        let book = rsp::route_book(inst, grand)?;
        let dp = PlanDp::solve(rsp::usable_blocks(&book), grand);
        let mut table = CharTable::new(n)?;
        for mask in 1..=grand.mask() {
            let s = Coalition::from_mask(mask);
            let first = dp.first_block(s).expect("singletons are always usable");
            let witness = if first == s {
                Witness::Route(
                    book[mask as usize]
                        .clone()
                        .expect("usable blocks are routed"),
                )
            } else {
                Witness::Split { first }
            };
            table.insert(s, dp.cost[mask as usize], witness);
        }
        let plan = dp.plan(grand).expect("grand coalition is coverable");
        Ok(Game {
            table,
            capacity: Some(inst.capacity()),
            plan,
            routes: Some(book),
            digest: inst.digest(),
        })
    }

    /// Wraps a complete table. `capacity` limits which coalitions count as
    /// feasible blocks; `None` makes every coalition feasible.
    pub fn from_table(table: CharTable, capacity: Option<usize>) -> Result<Self> {
        if !table.is_complete() {
            return Err(domain("characteristic table must cover every coalition"));
        }
        if capacity == Some(0) {
            return Err(domain("capacity must be at least 1"));
        }
        let n = table.players();
        let grand = table.grand();
        let q = capacity.unwrap_or(n);
        let blocks: Vec<f64> = (0..=grand.mask())
            .map(|m| {
                let s = Coalition::from_mask(m);
                if m != 0 && is_feasible(s, q) {
                    table.cost(s).unwrap()
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let plan = PlanDp::solve(blocks, grand)
            .plan(grand)
            .expect("singletons are always feasible");
        let digest = {
            let mut h: u64 = 0xcbf2_9ce4_8422_2325;
            for (s, c) in table.pairs() {
                for b in (s.mask() as u64)
                    .to_le_bytes()
                    .into_iter()
                    .chain(c.to_bits().to_le_bytes())
                {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x0100_0000_01b3);
                }
            }
            format!("{h:016x}")
        };
        Ok(Game {
            table,
            capacity,
            plan,
            routes: None,
            digest,
        })
    }

    pub fn players(&self) -> usize {
        self.table.players()
    }

    pub fn table(&self) -> &CharTable {
        &self.table
    }

    pub fn grand(&self) -> Coalition {
        self.table.grand()
    }

    /// `c(S)`; the table is complete so every non-empty `S` resolves.
    pub fn cost(&self, s: Coalition) -> f64 {
        self.table.cost(s).expect("complete table")
    }

    pub fn grand_cost(&self) -> f64 {
        self.cost(self.grand())
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    pub fn is_feasible(&self, s: Coalition) -> bool {
        is_feasible(s, self.capacity.unwrap_or(self.players()))
    }

    /// Blocks of the optimal plan for the grand coalition, ascending.
    pub fn plan(&self) -> &[Coalition] {
        &self.plan
    }

    /// The optimal plan with its routes (instance games only).
    pub fn partition(&self) -> Option<Partition> {
        let book = self.routes.as_ref()?;
        Some(rsp::assemble(book, self.plan.clone()))
    }

    /// Single-route optimum for a feasible coalition (instance games only).
    pub fn route(&self, s: Coalition) -> Option<&Route> {
        self.routes.as_ref()?.get(s.mask() as usize)?.as_ref()
    }

    /// Stable identifier of the game data.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// Number of proper coalitions, `2^n − 2`.
    pub fn proper_coalitions(&self) -> usize {
        (1usize << self.players()) - 2
    }
}
