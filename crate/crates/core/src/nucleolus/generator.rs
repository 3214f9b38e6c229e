//! Separation oracles: find the coalition whose constraint the current
//! master solution violates most.

use serde::Serialize;

use super::master::MasterState;
use crate::coalition::Coalition;
use crate::game::Game;

/// A candidate row with `value = c(S) − y(S) − w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub coalition: Coalition,
    pub value: f64,
}

/// Most violated proper coalition of any size, or `None` when every
/// candidate satisfies `value >= −tol`. Ties go to the smallest mask.
pub fn general_generator(
    game: &Game,
    y: &[f64],
    w: f64,
    state: &MasterState,
    tol: f64,
) -> Option<Violation> {
    most_violated(game, y, w, state, tol, |_| true)
}

/// As [`general_generator`] but restricted to coalitions one vehicle can
/// serve.
pub fn feasible_generator(
    game: &Game,
    y: &[f64],
    w: f64,
    state: &MasterState,
    tol: f64,
) -> Option<Violation> {
    most_violated(game, y, w, state, tol, |s| game.is_feasible(s))
}

fn most_violated(
    game: &Game,
    y: &[f64],
    w: f64,
    state: &MasterState,
    tol: f64,
    admit: impl Fn(Coalition) -> bool,
) -> Option<Violation> {
    let grand = game.grand();
    let mut found: Vec<Violation> = (1..grand.mask())
        .map(Coalition::from_mask)
        .filter(|&s| admit(s) && !state.contains(s))
        .filter_map(|s| {
            let value = game.cost(s) - s.sum(y) - w;
            (value < -tol).then_some(Violation {
                coalition: s,
                value,
            })
        })
        .collect();
    found.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.coalition.cmp(&b.coalition))
    });
    found.into_iter().find(|v| !state.excludes(v.coalition))
}
