use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use ridenuc_core::{
    core_check, emit, nucleolus, parse_char_table, parse_instance, solve_rsp, Allocation,
    Coalition, Error, Fixation, Format, Game, Mode, RunReport,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "ridenuc",
    version,
    about = "Ridesharing plans and nucleolus cost shares"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cheapest assignment of all players to capacity-feasible routes.
    SolveRsp {
        instance: PathBuf,
        #[arg(long)]
        capacity: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nucleolus cost shares for an instance or a characteristic table.
    Nucleolus {
        /// Instance text file or characteristic-table JSON.
        input: PathBuf,
        #[arg(long, default_value = "exact")]
        mode: Mode,
        #[arg(long)]
        capacity: Option<usize>,
        #[arg(long, default_value = "safe")]
        fixation: Fixation,
        /// Allocation to measure each incumbent against.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: Format,
        /// Record wall-clock time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Whether the core over capacity-feasible coalitions is empty.
    Core {
        input: PathBuf,
        #[arg(long)]
        capacity: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. }
        | Error::Table(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::Domain(_) => 2,
        Error::ScaleLimit { .. } => 3,
        Error::Numerical(_) | Error::Internal(_) => 4,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(Error::from)
}

fn load_game(path: &Path, capacity: Option<usize>) -> Result<Game, Error> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        let table = parse_char_table(&text)?.to_table()?;
        Game::from_table(table, capacity)
    } else {
        let inst = parse_instance(&text)?;
        let inst = match capacity {
            Some(q) => inst.with_capacity(q)?,
            None => inst,
        };
        Game::from_instance(&inst)
    }
}

/// Accepts a bare array or an object with a `y` array.
fn load_allocation(path: &Path) -> Result<Allocation, Error> {
    let v: Value = serde_json::from_str(&read(path)?)?;
    let list = match &v {
        Value::Array(_) => &v,
        Value::Object(m) => {
            m.get("y")
                .or_else(|| m.get("allocation"))
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    msg: "reference needs a `y` array".into(),
                })?
        }
        _ => &Value::Null,
    };
    let y: Vec<f64> = serde_json::from_value(list.clone()).map_err(|_| Error::Parse {
        line: 1,
        msg: "reference must be a list of numbers".into(),
    })?;
    Ok(Allocation::new(y))
}

fn write(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn members(c: Coalition) -> Vec<usize> {
    c.members().map(|i| i + 1).collect()
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::SolveRsp {
            instance,
            capacity,
            out,
        } => {
            let mut inst = parse_instance(&read(&instance)?)?;
            if let Some(q) = capacity {
                inst = inst.with_capacity(q)?;
            }
            let plan = solve_rsp(&inst, Coalition::grand(inst.len()))?;
            let blocks: Vec<Value> = plan
                .blocks
                .iter()
                .map(|b| {
                    json!({
                        "members": members(b.members),
                        "driver": b.route.driver + 1,
                        "stops": b.route.stops,
                        "cost": b.route.cost,
                    })
                })
                .collect();
            let doc = json!({
                "instance_digest": inst.digest(),
                "players": inst.len(),
                "capacity": inst.capacity(),
                "cost": plan.cost,
                "blocks": blocks,
            });
            write(out.as_deref(), &pretty(&doc))
        }
        Command::Nucleolus {
            input,
            mode,
            capacity,
            fixation,
            reference,
            out,
            format,
            timing,
        } => {
            let start = Instant::now();
            let game = load_game(&input, capacity)?;
            let result = nucleolus(&game, mode, fixation)?;
            log::info!(
                "{} stages, {} of {} coalitions generated",
                result.stages.len(),
                result.generated_count,
                result.proper_count
            );
            let mut report = RunReport::new(&game, &result);
            if let Some(path) = reference {
                report = report.with_solution_path(&result, &load_allocation(&path)?)?;
            }
            if timing {
                report = report.with_duration(start.elapsed().as_secs_f64());
            }
            write(out.as_deref(), &emit(&report, format))
        }
        Command::Core {
            input,
            capacity,
            out,
        } => {
            let game = load_game(&input, capacity)?;
            let core = core_check(&game)?;
            let doc = json!({
                "nonempty": core.nonempty,
                "least_core_value": core.least_core_value,
                "witness": core.witness.y,
                "binding": core.binding.iter().map(|&c| members(c)).collect::<Vec<_>>(),
            });
            write(out.as_deref(), &pretty(&doc))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ridenuc: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
