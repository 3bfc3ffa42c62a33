use std::fs;
use std::path::Path;

use charconv_core::bakery::REGIME_1;
use charconv_core::estimate::{
    fit_gradient_with, fit_grid_with, synthesize, window_fits, DirichletPrior, EstimateError, FitOptions,
    SyntheticConfig, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE,
};
use charconv_core::scenario::ScenarioError;
use charconv_core::sim::{self, score_scenario_moves};
use charconv_core::{io, Scenario, Weights};

use crate::{table, Format, Method};

pub struct CliError {
    pub code: u8,
    pub message: String,
}

type CliResult = Result<(), CliError>;

fn triple(flag: &str, values: &[f64]) -> Result<[f64; 3], CliError> {
    <[f64; 3]>::try_from(values)
        .map_err(|_| invalid(format!("--{flag} takes exactly 3 comma-separated values")))
}

fn invalid(message: impl ToString) -> CliError {
    CliError {
        code: 2,
        message: message.to_string(),
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: 3,
        message: format!("{}: {e}", path.display()),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = read(path)?;
    Scenario::parse(&text).map_err(|e| match e {
        ScenarioError::Syntax(e) => invalid(format!("{}: {e}", path.display())),
        other => invalid(format!("{}: {other}", path.display())),
    })
}

pub fn validate(path: &Path) -> CliResult {
    load_scenario(path)?;
    println!("OK");
    Ok(())
}

pub fn score(path: &Path, format: Format, state: Option<&str>, agent: Option<&str>) -> CliResult {
    let scenario = load_scenario(path)?;
    let index = match agent {
        Some(name) => scenario
            .agent_index(name)
            .ok_or_else(|| invalid(format!("unknown agent `{name}`")))?,
        None => 0,
    };
    let active = scenario.belief.active_type();
    let state = state.unwrap_or(active.init_state());
    if !active.has_state(state) {
        return Err(invalid(format!(
            "conversational type `{}` has no state `{state}`",
            active.name()
        )));
    }
    let name = &scenario.agents[index].name;
    let moves = scenario
        .move_spaces
        .get(&(index, state.to_owned()))
        .ok_or_else(|| invalid(format!("no move space for agent `{name}` at state `{state}`")))?;
    let info = scenario.initial_state(index).map_err(invalid)?;
    let space = score_scenario_moves(moves, &info, state).map_err(invalid)?;
    match format {
        Format::Table => print!("{}", table::scored_space(&space)),
        Format::Machine => print!("{}", io::write_scored_space(&space)),
    }
    Ok(())
}

pub fn simulate(path: &Path, seed: Option<u64>, trace_path: Option<&Path>) -> CliResult {
    let mut scenario = load_scenario(path)?;
    if let Some(seed) = seed {
        scenario = scenario.with_seed(seed);
    }
    let trace = sim::run(&scenario).map_err(invalid)?;
    if let Some(out) = trace_path {
        fs::write(out, trace.to_jsonl()).map_err(|e| io_error(out, e))?;
    }
    print!("{}", trace.transcript());
    Ok(())
}

pub fn fit(
    path: &Path,
    method: Method,
    step: f64,
    format: Format,
    window: Option<usize>,
    prior: Option<&[f64]>,
) -> CliResult {
    let text = read(path)?;
    let observations =
        io::read_observations(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let options = FitOptions {
        prior: prior
            .map(|p| triple("prior", p).and_then(|p| DirichletPrior::new(p).map_err(invalid)))
            .transpose()?,
    };
    let fitted = match method {
        Method::Grid => fit_grid_with(&observations, step, &options),
        Method::Gradient => {
            fit_gradient_with(&observations, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE, &options)
        }
    };
    let result = fitted.map_err(|e| match e {
        EstimateError::NoInformativeObservations => CliError {
            code: 4,
            message: e.to_string(),
        },
        other => invalid(other),
    })?;
    match format {
        Format::Table => {
            print!("{}", table::fit_result(&result));
            if let Some(window) = window {
                let fits = window_fits(&observations, window, step).map_err(invalid)?;
                print!("\n{}", table::windows(&fits));
            }
        }
        Format::Machine => print!("{}", io::write_fit_result(&result)),
    }
    Ok(())
}

pub fn synth(count: usize, seed: u64, jitter: f64, weights: &[f64], out: Option<&Path>) -> CliResult {
    let [alpha, beta, gamma] = triple("weights", weights)?;
    let planted = Weights::new(alpha, beta, gamma).map_err(invalid)?;
    if !(0.0..=2.0).contains(&jitter) {
        return Err(invalid(format!("jitter {jitter} outside [0, 2]")));
    }
    let observations = synthesize(&SyntheticConfig {
        planted,
        base_rows: REGIME_1.factor_rows(),
        count,
        jitter,
        seed,
    });
    let text = io::write_observations(&observations);
    match out {
        Some(p) => fs::write(p, text).map_err(|e| io_error(p, e))?,
        None => print!("{text}"),
    }
    Ok(())
}
