use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use ergodic_insurance::asymptotics::{geometric_grid, limit_series, residual_order_check, second_order_coefficient};
use ergodic_insurance::fee_solver::{break_even_fee, default_bracket, win_win_interval, IntervalKind};
use ergodic_insurance::gamble::{net_premium, owner_gamble, Role};
use ergodic_insurance::montecarlo::{
    estimate_growth, multiplicative_factors, ruin_probability, simulate, SimulationConfig,
};
use ergodic_insurance::paradigms::time_growth_rate;
use ergodic_insurance::scenario::{
    emit_sweep, emit_tables, four_significant, load_scenario_file, render_tables_csv, render_tables_text, ParadigmKind,
};
use ergodic_insurance::Error;

#[derive(Parser)]
#[command(
    name = "ergodic-insurance",
    version,
    about = "Evaluate insurance contracts under expected-wealth, expected-utility and time-average criteria"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParadigmArg {
    All,
    Ew,
    Eu,
    Ta,
}

impl ParadigmArg {
    fn kinds(self) -> Vec<ParadigmKind> {
        match self {
            ParadigmArg::All => ParadigmKind::ALL.to_vec(),
            ParadigmArg::Ew => vec![ParadigmKind::ExpectedWealth],
            ParadigmArg::Eu => vec![ParadigmKind::ExpectedUtility],
            ParadigmArg::Ta => vec![ParadigmKind::TimeAverage],
        }
    }

    fn single(self) -> Result<ParadigmKind, CliError> {
        match self.kinds().as_slice() {
            [kind] => Ok(*kind),
            _ => Err(CliError::usage("this command needs a single paradigm: ew, eu or ta")),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Insured, uninsured and difference rates for both parties.
    Evaluate {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        paradigm: ParadigmArg,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Break-even fees for each party and the win-win fee interval.
    Solve {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "ta")]
        paradigm: ParadigmArg,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Both parties' deltas over an even fee grid, as CSV.
    Sweep {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        paradigm: ParadigmArg,
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long)]
        steps: usize,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the owner's time-average growth rate.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        rounds: usize,
        #[arg(long)]
        trajectories: usize,
        #[arg(long)]
        seed: u64,
        /// Simulate the insured owner instead of the bare venture.
        #[arg(long)]
        insured: bool,
        /// Also estimate the probability that wealth falls to this fraction of its start.
        #[arg(long)]
        ruin_threshold: Option<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Insurer growth delta times wealth on a geometric wealth grid.
    Limit {
        scenario: PathBuf,
        /// start:stop:factor
        #[arg(long, default_value = "1e6:1e9:10")]
        wealth_grid: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

enum CliError {
    Model(Error),
    Usage(String),
    Io(std::io::Error),
    FlaggedCells,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn report(&self) -> (&'static str, i32, String) {
        match self {
            CliError::Model(e) => (e.category(), e.exit_code(), e.to_string()),
            CliError::Usage(m) => ("usage", 2, m.clone()),
            CliError::Io(e) => ("io", 2, e.to_string()),
            CliError::FlaggedCells => ("domain", 3, "some rates do not exist (flagged cells)".into()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn to_json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("output serializes")
}

fn evaluate(scenario: PathBuf, paradigm: ParadigmArg, format: Format) -> Result<String, CliError> {
    let s = load_scenario_file(scenario)?;
    let report = emit_tables(&s)?;
    let kinds = paradigm.kinds();
    let out = match format {
        Format::Text => render_tables_text(&report, &kinds),
        Format::Csv => render_tables_csv(&report, &kinds),
        Format::Json => {
            let mut map = serde_json::Map::new();
            for kind in &kinds {
                let key = match kind {
                    ParadigmKind::ExpectedWealth => "expected_wealth",
                    ParadigmKind::ExpectedUtility => "expected_utility",
                    ParadigmKind::TimeAverage => "time_average",
                };
                map.insert(
                    key.into(),
                    serde_json::to_value(report.table(*kind)).expect("table serializes"),
                );
            }
            to_json(&map) + "\n"
        }
    };
    print!("{out}");
    if kinds.iter().any(|k| report.table(*k).has_flags()) {
        return Err(CliError::FlaggedCells);
    }
    Ok(String::new())
}

fn solve(scenario: PathBuf, paradigm: ParadigmArg, format: Format) -> Result<String, CliError> {
    let s = load_scenario_file(scenario)?;
    let kind = paradigm.single()?;
    let paradigm = s.paradigm(kind)?;
    let venture = s.venture()?;
    let (owner, insurer) = (s.owner()?, s.insurer()?);
    let owner_fee = break_even_fee(
        paradigm,
        Role::Owner,
        &venture,
        owner.wealth(),
        default_bracket(paradigm, Role::Owner, &venture, owner.wealth()),
    )?;
    let insurer_fee = break_even_fee(
        paradigm,
        Role::Insurer,
        &venture,
        insurer.wealth(),
        default_bracket(paradigm, Role::Insurer, &venture, insurer.wealth()),
    )?;
    let interval = win_win_interval(paradigm, &venture, &owner, &insurer);
    let premium = net_premium(&s.contract()?, venture.loss_probability());
    Ok(match format {
        Format::Json => {
            to_json(&json!({
                "paradigm": paradigm,
                "net_premium": premium,
                "owner_break_even": owner_fee,
                "insurer_break_even": insurer_fee,
                "win_win": interval,
            })) + "\n"
        }
        Format::Text | Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "net premium          {premium:.4}");
            let _ = writeln!(out, "owner break-even     {owner_fee:.4}");
            let _ = writeln!(out, "insurer break-even   {insurer_fee:.4}");
            match (interval.kind, interval.lower, interval.upper) {
                (IntervalKind::Proper, Some(lo), Some(hi)) => {
                    let _ = writeln!(out, "win-win interval     ({lo:.4}, {hi:.4})");
                }
                (IntervalKind::Degenerate, Some(at), _) => {
                    let _ = writeln!(out, "win-win interval     degenerate at {at:.4}");
                }
                _ => {
                    let _ = writeln!(out, "win-win interval     empty");
                }
            }
            out
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    scenario: PathBuf,
    paradigm: ParadigmArg,
    min: f64,
    max: f64,
    steps: usize,
    out: Option<PathBuf>,
) -> Result<String, CliError> {
    let s = load_scenario_file(scenario)?;
    let sweep = emit_sweep(&s, paradigm.single()?, min, max, steps)?;
    let csv = sweep.to_csv();
    match out {
        Some(path) => {
            std::fs::write(&path, csv)?;
            eprintln!(
                "wrote {} rows ({}, {}) for scenario {} to {}",
                sweep.rows.len(),
                sweep.paradigm.short_name(),
                sweep.units.label(),
                &sweep.scenario_hash[..12],
                path.display()
            );
            Ok(String::new())
        }
        None => Ok(csv),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_simulation(
    scenario: PathBuf,
    rounds: usize,
    trajectories: usize,
    seed: u64,
    insured: bool,
    ruin_threshold: Option<f64>,
    format: Format,
) -> Result<String, CliError> {
    let s = load_scenario_file(scenario)?;
    let venture = s.venture()?;
    let contract = s.contract()?;
    let gamble = owner_gamble(&venture, insured.then_some(&contract));
    let closed_form = time_growth_rate(&gamble, s.owner_wealth)?.value;
    let factors = multiplicative_factors(&gamble, s.owner_wealth)?;
    let config = SimulationConfig::new(rounds, trajectories, seed, s.owner_wealth)?;
    let estimate = estimate_growth(&simulate(&config, &factors)?)?;
    let ruin = ruin_threshold
        .map(|t| ruin_probability(&factors, &config, t))
        .transpose()?;
    Ok(match format {
        Format::Json => {
            to_json(&json!({
                "insured": insured,
                "rounds": rounds,
                "trajectories": trajectories,
                "seed": seed,
                "growth": estimate.mean,
                "standard_error": estimate.standard_error,
                "closed_form": closed_form,
                "expected_factor": factors.expected_factor(),
                "ruin": ruin,
            })) + "\n"
        }
        Format::Text | Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "growth rate        {}", estimate.mean);
            let _ = writeln!(out, "standard error     {}", estimate.standard_error);
            let _ = writeln!(out, "closed form        {closed_form}");
            if estimate.standard_error > 0.0 {
                let z = (estimate.mean - closed_form) / estimate.standard_error;
                let _ = writeln!(out, "z score            {}", four_significant(z));
            }
            if let Some(r) = ruin {
                let _ = writeln!(out, "ruin probability   {} ({:?})", r.probability, r.method);
            }
            out
        }
    })
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, factor] = parts.as_slice() else {
        return Err(CliError::usage(format!(
            "wealth grid `{spec}` is not start:stop:factor"
        )));
    };
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| CliError::usage(format!("`{x}` in wealth grid is not a number")))
    };
    Ok(geometric_grid(num(start)?, num(stop)?, num(factor)?)?)
}

fn limit(scenario: PathBuf, wealth_grid: String, format: Format) -> Result<String, CliError> {
    let s = load_scenario_file(scenario)?;
    let venture = s.venture()?;
    let contract = s.contract()?;
    let rows = limit_series(&venture, &contract, &parse_grid(&wealth_grid)?)?;
    let slope = residual_order_check(&rows)?;
    let coefficient = second_order_coefficient(&venture, &contract);
    Ok(match format {
        Format::Json => {
            to_json(&json!({ "rows": rows, "slope": slope, "second_order_coefficient": coefficient })) + "\n"
        }
        Format::Csv => {
            let mut out = String::from("wealth,delta_g,scaled_delta,residual\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:e},{:e},{:e},{:e}",
                    r.wealth, r.delta_g, r.scaled_delta, r.residual
                );
            }
            out
        }
        Format::Text => {
            let mut out = format!(
                "{:>14}{:>16}{:>16}{:>16}\n",
                "wealth", "delta_g", "delta_g*W", "residual"
            );
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:>14e}{:>16.6e}{:>16.6}{:>16.6e}",
                    r.wealth, r.delta_g, r.scaled_delta, r.residual
                );
            }
            let _ = writeln!(out, "log-log residual slope  {slope:.4}");
            let _ = writeln!(out, "second-order coefficient {coefficient:e}");
            out
        }
    })
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Evaluate {
            scenario,
            paradigm,
            format,
        } => evaluate(scenario, paradigm, format),
        Command::Solve {
            scenario,
            paradigm,
            format,
        } => solve(scenario, paradigm, format),
        Command::Sweep {
            scenario,
            paradigm,
            min,
            max,
            steps,
            out,
        } => sweep(scenario, paradigm, min, max, steps, out),
        Command::Simulate {
            scenario,
            rounds,
            trajectories,
            seed,
            insured,
            ruin_threshold,
            format,
        } => run_simulation(scenario, rounds, trajectories, seed, insured, ruin_threshold, format),
        Command::Limit {
            scenario,
            wealth_grid,
            format,
        } => limit(scenario, wealth_grid, format),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (category, code, message) = e.report();
            eprintln!("error[{category}]: {message}");
            ExitCode::from(code as u8)
        }
    }
}
