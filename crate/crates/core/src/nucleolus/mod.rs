//! Staged computation of the nucleolus with lazily generated coalition rows.
//!
//! Every stage maximizes the smallest excess over the rows currently in the
//! master problem. Missing coalitions are added by a separation oracle until
//! none is violated; then the rows that are tight on the whole optimal face
//! become equalities and the next stage starts. The run ends as soon as the
//! optimal face is a single allocation.

mod generator;
mod master;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use generator::{feasible_generator, general_generator, Violation};
pub use master::{step_master, MasterSolve, MasterState};

use crate::coalition::{Allocation, Coalition};
use crate::error::{domain, Error, Result};
use crate::game::Game;
use crate::lp;

/// Largest game [`brute_nucleolus`] accepts.
pub const MAX_BRUTE_PLAYERS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Rows over every proper coalition, generated on demand.
    Exact,
    /// Rows over capacity-feasible coalitions only, generated on demand.
    Approx,
    /// Every row of the family loaded before the first solve.
    Brute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    All,
    Feasible,
}

/// Which tight rows become equalities between stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fixation {
    /// Rows whose slack is zero everywhere on the optimal face.
    Safe,
    /// Rows with a positive dual price.
    Dual,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Approx => "approx",
            Mode::Brute => "brute",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "approx" | "approximate" => Ok(Mode::Approx),
            "brute" => Ok(Mode::Brute),
            _ => Err(domain(format!("unknown mode {s:?}"))),
        }
    }
}

impl fmt::Display for Fixation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fixation::Safe => "safe",
            Fixation::Dual => "dual",
        })
    }
}

impl FromStr for Fixation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "safe" => Ok(Fixation::Safe),
            "dual" => Ok(Fixation::Dual),
            _ => Err(domain(format!("unknown fixation rule {s:?}"))),
        }
    }
}

/// Progress records emitted while the driver runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    MasterSolved {
        stage: usize,
        iteration: usize,
        rows: usize,
        level: f64,
        y: Vec<f64>,
    },
    Generated {
        stage: usize,
        coalition: Coalition,
        violation: f64,
    },
    Fixed {
        stage: usize,
        level: f64,
        coalitions: Vec<Coalition>,
        settled: Vec<Coalition>,
    },
    Finished {
        stage: usize,
        y: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageLog {
    pub stage: usize,
    /// Optimal smallest excess of the stage; infinite when no inequality
    /// row was left.
    pub level: f64,
    pub master_solves: usize,
    pub generated: Vec<Coalition>,
    /// Rows turned into equalities at the end of the stage.
    pub fixed: Vec<Coalition>,
    /// Rows dropped because earlier equalities determine them.
    pub settled: Vec<Coalition>,
    /// Set on the last stage, whose face is a single point.
    pub unique: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NucleolusResult {
    pub mode: Mode,
    pub family: Family,
    pub fixation: Fixation,
    pub allocation: Allocation,
    pub plan: Vec<Coalition>,
    pub stages: Vec<StageLog>,
    /// Rows in the first master problem.
    pub initial_count: usize,
    /// Rows added by the separation oracle over the whole run.
    pub added_count: usize,
    /// Distinct coalitions that ever entered the master problem.
    pub generated_count: usize,
    /// `2^n − 2`.
    pub proper_count: usize,
    /// `generated_count / proper_count`; absent for one player.
    pub fraction: Option<f64>,
    #[serde(skip)]
    pub events: Vec<Event>,
}

impl NucleolusResult {
    /// Optimal level of the first stage: the least-core value.
    pub fn least_core_value(&self) -> f64 {
        self.stages.first().map_or(f64::INFINITY, |s| s.level)
    }

    /// Incumbent allocation after every master solve, in order.
    pub fn incumbents(&self) -> Vec<&[f64]> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::MasterSolved { y, .. } => Some(y.as_slice()),
                _ => None,
            })
            .collect()
    }
}

/// Core membership over capacity-feasible coalitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoreReport {
    pub nonempty: bool,
    /// Largest achievable smallest excess; non-negative iff the core is
    /// non-empty.
    pub least_core_value: f64,
    /// Nucleolus of the feasible-coalition game, a least-core allocation.
    pub witness: Allocation,
    /// Feasible coalitions whose excess at the witness equals the least-core
    /// value. Certifies emptiness when the value is negative.
    pub binding: Vec<Coalition>,
}

struct Tolerances {
    /// Violation needed before a row is generated.
    generate: f64,
    /// Slack below which a row counts as tight.
    tight: f64,
    /// Width of the optimal face below which it counts as a point.
    unique: f64,
    /// Smallest dual price treated as positive.
    dual: f64,
}

impl Tolerances {
    fn for_game(game: &Game) -> Self {
        let scale = game.grand_cost().abs().max(1.0);
        Tolerances {
            generate: 1e-9 * scale,
            tight: 1e-9 * scale,
            unique: (1e-11 * scale).max(1e-7),
            dual: 1e-9,
        }
    }
}

/// Singletons plus the blocks of the optimal plan, or `{N}` for one player.
pub fn initial_master(game: &Game) -> MasterState {
    let n = game.players();
    let mut state = MasterState::new(n);
    if n == 1 {
        state.insert(game.grand());
        return state;
    }
    for i in 0..n {
        state.insert(Coalition::singleton(i));
    }
    for &b in game.plan() {
        if b != game.grand() {
            state.insert(b);
        }
    }
    state
}

fn family_members(game: &Game, family: Family) -> impl Iterator<Item = Coalition> + '_ {
    (1..game.grand().mask())
        .map(Coalition::from_mask)
        .filter(move |&s| family == Family::All || game.is_feasible(s))
}

/// Nucleolus of `game` under `mode`.
pub fn nucleolus(game: &Game, mode: Mode, fixation: Fixation) -> Result<NucleolusResult> {
    match mode {
        Mode::Exact => run(game, mode, Family::All, fixation),
        Mode::Approx => run(game, mode, Family::Feasible, fixation),
        Mode::Brute => brute_nucleolus(game, Family::All, fixation),
    }
}

/// Reference computation with every row of `family` present from the start.
pub fn brute_nucleolus(game: &Game, family: Family, fixation: Fixation) -> Result<NucleolusResult> {
    if game.players() > MAX_BRUTE_PLAYERS {
        return Err(Error::ScaleLimit {
            what: "players for brute force",
            value: game.players(),
            max: MAX_BRUTE_PLAYERS,
        });
    }
    run(game, Mode::Brute, family, fixation)
}

/// Decides whether the feasible-coalition core is empty.
pub fn core_check(game: &Game) -> Result<CoreReport> {
    let res = run(game, Mode::Approx, Family::Feasible, Fixation::Safe)?;
    let value = res.least_core_value();
    let tol = Tolerances::for_game(game).tight;
    let y = &res.allocation.y;
    let binding = family_members(game, Family::Feasible)
        .filter(|&s| game.cost(s) - s.sum(y) <= value + tol)
        .collect();
    Ok(CoreReport {
        nonempty: value >= -tol,
        least_core_value: value,
        witness: res.allocation,
        binding,
    })
}

fn run(game: &Game, mode: Mode, family: Family, fixation: Fixation) -> Result<NucleolusResult> {
    let n = game.players();
    let tol = Tolerances::for_game(game);
    let preload = mode == Mode::Brute;
    let mut state = initial_master(game);
    if preload {
        family_members(game, family).for_each(|s| {
            state.insert(s);
        });
    }
    let initial_count = state.seen_count();
    let mut events = Vec::new();
    let mut stages: Vec<StageLog> = Vec::new();
    let mut added_count = 0;

    let y = loop {
        let stage = state.stage;
        if stage > n.max(1) {
            return Err(Error::Internal(format!(
                "no unique allocation after {} stages",
                stage - 1
            )));
        }
        let mut log = StageLog {
            stage,
            level: f64::INFINITY,
            master_solves: 0,
            generated: Vec::new(),
            fixed: Vec::new(),
            settled: Vec::new(),
            unique: false,
        };

        if state.ineq.is_empty() && state.rank() < n {
            // every inequality was settled; restart from what remains
            let rest: Vec<Coalition> = family_members(game, family)
                .filter(|&s| !state.excludes(s))
                .collect();
            if rest.is_empty() {
                return Err(Error::Internal(
                    "coalition family does not determine an allocation".into(),
                ));
            }
            for s in rest {
                state.insert(s);
                log.generated.push(s);
                added_count += 1;
            }
        }

        let solve = loop {
            let m = step_master(game, &state)?;
            log.master_solves += 1;
            events.push(Event::MasterSolved {
                stage,
                iteration: log.master_solves,
                rows: m.lp.rows.len(),
                level: m.w,
                y: m.y.clone(),
            });
            if preload || state.ineq.is_empty() {
                break m;
            }
            let found = match family {
                Family::All => general_generator(game, &m.y, m.w, &state, tol.generate),
                Family::Feasible => feasible_generator(game, &m.y, m.w, &state, tol.generate),
            };
            match found {
                Some(v) => {
                    log::debug!("stage {stage}: adding {} ({:.3e})", v.coalition, v.value);
                    state.insert(v.coalition);
                    log.generated.push(v.coalition);
                    added_count += 1;
                    events.push(Event::Generated {
                        stage,
                        coalition: v.coalition,
                        violation: v.value,
                    });
                }
                None => break m,
            }
        };
        log.level = solve.w;

        if state.ineq.is_empty() || face_is_point(&solve, n, tol.unique)? {
            log.unique = true;
            stages.push(log);
            events.push(Event::Finished {
                stage,
                y: solve.y.clone(),
            });
            break solve.y;
        }

        let tight = match fixation {
            Fixation::Safe => tight_on_face(game, &state, &solve, tol.tight)?,
            Fixation::Dual => {
                let priced = priced_rows(&state, &solve, tol.dual);
                if priced.is_empty() {
                    log::warn!("stage {stage}: no positive dual price, using face probes");
                    tight_on_face(game, &state, &solve, tol.tight)?
                } else {
                    priced
                }
            }
        };
        let (pinned, settled) = state.fix(&tight, solve.w);
        if pinned.is_empty() {
            return Err(Error::Internal(format!(
                "stage {stage} fixed no independent coalition"
            )));
        }
        log::debug!("stage {stage}: level {} fixes {:?}", solve.w, pinned);
        events.push(Event::Fixed {
            stage,
            level: solve.w,
            coalitions: pinned.clone(),
            settled: settled.clone(),
        });
        log.fixed = pinned;
        log.settled = settled;
        stages.push(log);
    };

    let generated_count = state.seen_count();
    let proper_count = game.proper_coalitions();
    Ok(NucleolusResult {
        mode,
        family,
        fixation,
        allocation: Allocation::imputation(y, game.grand_cost())?,
        plan: game.plan().to_vec(),
        stages,
        initial_count,
        added_count,
        generated_count,
        proper_count,
        fraction: (proper_count > 0).then(|| generated_count as f64 / proper_count as f64),
        events,
    })
}

/// Whether every `y_i` is constant over the optimal face.
fn face_is_point(solve: &MasterSolve, n: usize, tol: f64) -> Result<bool> {
    for i in 0..n {
        let (lo, hi) = lp::probe_range(&solve.lp, solve.solution.objective, i)?;
        if hi - lo > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Inequality rows with zero slack at every optimal solution.
fn tight_on_face(
    game: &Game,
    state: &MasterState,
    solve: &MasterSolve,
    tol: f64,
) -> Result<Vec<Coalition>> {
    let n = state.players();
    let mut out = Vec::new();
    for &s in &state.ineq {
        let c = game.cost(s);
        if c - s.sum(&solve.y) - solve.w > tol {
            continue;
        }
        let mut dir: Vec<f64> = (0..n)
            .map(|i| if s.contains(i) { 1.0 } else { 0.0 })
            .collect();
        dir.push(1.0);
        let lowest = lp::face_extreme(&solve.lp, solve.solution.objective, &dir, false)?;
        if c - lowest <= tol {
            out.push(s);
        }
    }
    Ok(out)
}

/// Inequality rows carrying a positive dual price.
fn priced_rows(state: &MasterState, solve: &MasterSolve, tol: f64) -> Vec<Coalition> {
    state
        .ineq
        .iter()
        .zip(&solve.solution.duals)
        .filter(|(_, &d)| d > tol)
        .map(|(&s, _)| s)
        .collect()
}
