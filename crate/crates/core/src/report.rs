//! Serialization of nucleolus runs: JSON reports, CSV stage summaries and
//! distance-to-reference series.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coalition::{Allocation, Coalition};
use crate::error::{domain, Error, Result};
use crate::game::Game;
use crate::nucleolus::{Event, Fixation, Mode, NucleolusResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    /// `None` when the stage had no inequality rows left.
    pub level: Option<f64>,
    pub master_solves: usize,
    pub generated: Vec<Coalition>,
    pub fixed: Vec<Coalition>,
    pub settled: Vec<Coalition>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub iteration: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance_digest: String,
    pub mode: Mode,
    pub fixation: Fixation,
    pub players: usize,
    pub capacity: Option<usize>,
    pub grand_cost: f64,
    pub allocation: Vec<f64>,
    pub plan: Vec<Coalition>,
    pub least_core_value: Option<f64>,
    pub stages: Vec<StageRecord>,
    pub initial_count: usize,
    pub added_count: usize,
    pub generated_count: usize,
    pub proper_count: usize,
    pub fraction: Option<f64>,
    /// Wall-clock seconds; left out unless explicitly recorded so that
    /// reports of the same input are byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_secs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_path: Option<Vec<PathPoint>>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl RunReport {
    pub fn new(game: &Game, result: &NucleolusResult) -> Self {
        RunReport {
            instance_digest: game.digest().to_string(),
            mode: result.mode,
            fixation: result.fixation,
            players: game.players(),
            capacity: game.capacity(),
            grand_cost: game.grand_cost(),
            allocation: result.allocation.y.clone(),
            plan: result.plan.clone(),
            least_core_value: finite(result.least_core_value()),
            stages: result
                .stages
                .iter()
                .map(|s| StageRecord {
                    stage: s.stage,
                    level: finite(s.level),
                    master_solves: s.master_solves,
                    generated: s.generated.clone(),
                    fixed: s.fixed.clone(),
                    settled: s.settled.clone(),
                })
                .collect(),
            initial_count: result.initial_count,
            added_count: result.added_count,
            generated_count: result.generated_count,
            proper_count: result.proper_count,
            fraction: result.fraction,
            duration_secs: None,
            solution_path: None,
        }
    }

    pub fn with_solution_path(
        mut self,
        result: &NucleolusResult,
        reference: &Allocation,
    ) -> Result<Self> {
        self.solution_path = Some(solution_path(&result.events, reference)?);
        Ok(self)
    }

    pub fn with_duration(mut self, secs: f64) -> Self {
        self.duration_secs = Some(secs);
        self
    }
}

/// Euclidean distance from each master-solve incumbent to `reference`.
pub fn solution_path(events: &[Event], reference: &Allocation) -> Result<Vec<PathPoint>> {
    let mut out = Vec::new();
    for e in events {
        if let Event::MasterSolved { y, .. } = e {
            let d = Allocation::new(y.clone()).distance(reference)?;
            out.push(PathPoint {
                iteration: out.len() + 1,
                distance: d,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    CsvSummary,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" | "csv-summary" => Ok(Format::CsvSummary),
            _ => Err(domain(format!("unknown format {s:?}"))),
        }
    }
}

/// Renders `report`; the output depends only on its contents.
pub fn emit(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::CsvSummary => csv_summary(report),
    }
}

fn join(list: &[Coalition]) -> String {
    let parts: Vec<String> = list.iter().map(|c| c.to_string()).collect();
    format!("\"{}\"", parts.join(" "))
}

fn csv_summary(report: &RunReport) -> String {
    let mut out = String::from("stage,level,master_solves,generated,fixed,settled\n");
    for s in &report.stages {
        let level = s.level.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            s.stage,
            level,
            s.master_solves,
            join(&s.generated),
            join(&s.fixed),
            join(&s.settled)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nucleolus::{nucleolus, Fixation, Mode};
    use crate::table::CharTable;

    fn empty_core_game() -> Game {
        let c = |m: &[usize]| Coalition::from_members(m.iter().map(|i| i - 1));
        let t = CharTable::from_pairs(
            3,
            &[
                (c(&[1]), 5.0),
                (c(&[2]), 5.0),
                (c(&[3]), 5.0),
                (c(&[1, 2]), 7.0),
                (c(&[2, 3]), 7.0),
                (c(&[1, 3]), 9.0),
                (c(&[1, 2, 3]), 12.0),
            ],
        )
        .unwrap();
        Game::from_table(t, Some(2)).unwrap()
    }

    #[test]
    fn path_ends_at_own_result() {
        let g = empty_core_game();
        let r = nucleolus(&g, Mode::Exact, Fixation::Safe).unwrap();
        let path = solution_path(&r.events, &r.allocation).unwrap();
        assert_eq!(path.len(), r.incumbents().len());
        assert!(path.iter().all(|p| p.distance >= 0.0));
        assert!(path.last().unwrap().distance <= 1e-6);
        assert!(solution_path(&r.events, &Allocation::new(vec![1.0])).is_err());
    }

    #[test]
    fn constant_incumbent_gives_zero_path() {
        let y = vec![1.0, 2.0];
        let events: Vec<Event> = (1..4)
            .map(|i| Event::MasterSolved {
                stage: 1,
                iteration: i,
                rows: 3,
                level: 0.0,
                y: y.clone(),
            })
            .collect();
        let path = solution_path(&events, &Allocation::new(y)).unwrap();
        assert_eq!(
            path.iter().map(|p| p.distance).collect::<Vec<_>>(),
            vec![0.0; 3]
        );
    }

    #[test]
    fn json_round_trips_and_is_stable() {
        let g = empty_core_game();
        let r = nucleolus(&g, Mode::Exact, Fixation::Safe).unwrap();
        let rep = RunReport::new(&g, &r)
            .with_solution_path(&r, &r.allocation)
            .unwrap();
        let a = emit(&rep, Format::Json);
        let back: RunReport = serde_json::from_str(&a).unwrap();
        assert_eq!(back, rep);
        let again = nucleolus(&g, Mode::Exact, Fixation::Safe).unwrap();
        let b = emit(
            &RunReport::new(&g, &again)
                .with_solution_path(&again, &again.allocation)
                .unwrap(),
            Format::Json,
        );
        assert_eq!(a, b);
        assert!(a.contains("\"generated_count\": "));
    }

    #[test]
    fn csv_has_one_row_per_stage() {
        let g = empty_core_game();
        let r = nucleolus(&g, Mode::Exact, Fixation::Safe).unwrap();
        let rep = RunReport::new(&g, &r);
        let csv = emit(&rep, Format::CsvSummary);
        assert_eq!(csv.lines().count(), rep.stages.len() + 1);
    }

    #[test]
    fn single_player_report_has_one_stage() {
        let t = CharTable::from_pairs(1, &[(Coalition::singleton(0), 3.0)]).unwrap();
        let g = Game::from_table(t, None).unwrap();
        let r = nucleolus(&g, Mode::Exact, Fixation::Safe).unwrap();
        let rep = RunReport::new(&g, &r);
        assert_eq!(rep.stages.len(), 1);
        let json = emit(&rep, Format::Json);
        assert!(json.contains("\"fraction\": null"));
    }
}
