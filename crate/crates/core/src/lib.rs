//! Cost allocation for ridesharing coalitions.
//!
//! Players with trip origins and destinations form coalitions that share
//! capacity-limited vehicles. [`tsppd`] prices a single shared route,
//! [`rsp`] the cheapest multi-vehicle plan, and [`nucleolus`] splits the
//! plan's cost among the players.

pub mod coalition;
pub mod error;
pub mod game;
pub mod instance;
pub mod lp;
pub mod nucleolus;
pub mod report;
pub mod rsp;
pub mod table;
pub mod tsppd;

pub use coalition::{
    excess, excess_vector, is_feasible, is_profitable_coalition, lex_compare, lex_compare_tol,
    Allocation, Coalition, ExcessVector, MAX_PLAYERS,
};
pub use error::{Error, Result};
pub use game::Game;
pub use instance::{parse_char_table, parse_instance, CharTableInput, Instance, PlayerSpec, Point};
pub use nucleolus::{
    brute_nucleolus, core_check, nucleolus, CoreReport, Family, Fixation, Mode, NucleolusResult,
};
pub use report::{emit, solution_path, Format, RunReport};
pub use rsp::{is_profitable_route, solve_rsp, Partition};
pub use table::CharTable;
pub use tsppd::{char_value_feasible, solve_tsppd, Route};
