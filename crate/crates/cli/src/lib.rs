//! Command-line frontend. [`dispatch`] runs one command from an argument
//! list and returns the exit code together with the text for stdout and
//! stderr, so the binary and the tests share one code path.
//!
//! Exit codes: 0 on success, 2 for invalid input or a violated
//! precondition (stderr then holds `{"code", "message", "required_value"}`),
//! 1 for internal failures.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
mod commands;
pub mod output;

use std::ffi::OsString;
use std::path::Path;

use clap::{CommandFactory, FromArgMatches};
use pabi_core::PabiError;
use serde::Serialize;
use serde_json::{Map, Value};

use args::{Cli, Command, MixingCommand, OutputArgs, PrivacyCommand, SimulateCommand};
use output::{number_text, to_json};

pub use commands::eta_grid;

#[derive(Debug)]
pub enum CliError {
    Core(PabiError),
    Usage(String),
    Precondition {
        code: String,
        message: String,
        required_value: Option<f64>,
    },
    Io(String),
}

impl From<PabiError> for CliError {
    fn from(e: PabiError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_user_error() => 1,
            CliError::Io(_) => 1,
            _ => 2,
        }
    }

    fn report(&self) -> ErrorReport {
        match self {
            CliError::Core(PabiError::Precondition {
                code,
                message,
                required_value,
            }) => ErrorReport {
                code: (*code).into(),
                message: message.clone(),
                required_value: *required_value,
            },
            CliError::Core(e) => ErrorReport {
                code: e.code().into(),
                message: e.to_string(),
                required_value: None,
            },
            CliError::Usage(message) => ErrorReport {
                code: "usage".into(),
                message: message.clone(),
                required_value: None,
            },
            CliError::Precondition {
                code,
                message,
                required_value,
            } => ErrorReport {
                code: code.clone(),
                message: message.clone(),
                required_value: *required_value,
            },
            CliError::Io(message) => ErrorReport {
                code: "io".into(),
                message: message.clone(),
                required_value: None,
            },
        }
    }
}

/// Machine-readable error written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub code: String,
    pub message: String,
    pub required_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs one command. `argv` excludes the program name. A leading
/// `--config FILE` (or `--config=FILE`) is replaced by the flags stored in
/// that file; any remaining arguments are applied on top.
pub fn dispatch<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    match execute(argv) {
        Ok(outcome) => outcome,
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: to_json(&e.report()) + "\n",
        },
    }
}

fn execute(argv: Vec<OsString>) -> Result<Outcome, CliError> {
    let argv = expand_config(argv)?;
    let matches = match command_tree()
        .try_get_matches_from(std::iter::once(OsString::from("pabi")).chain(argv))
    {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }),
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => Err(CliError::Usage(text)),
                _ => Err(CliError::Usage(text.trim_end().to_string())),
            };
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Usage(e.to_string()))?;
    let out = describe(&cli.command).1;

    let mut stderr = String::new();
    if out.echo_config {
        stderr = echo_config(&cli.command) + "\n";
    }
    let body = commands::run(&cli.command)?;
    let stdout = match &out.output {
        Some(file) => {
            std::fs::write(file, &body)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", file.display())))?;
            String::new()
        }
        None => body,
    };
    Ok(Outcome {
        code: 0,
        stdout,
        stderr,
    })
}

/// The clap command with repeated flags resolving to their last value, so
/// arguments after `--config FILE` override the file.
fn command_tree() -> clap::Command {
    fn last_wins(cmd: clap::Command) -> clap::Command {
        let names: Vec<String> = cmd
            .get_subcommands()
            .map(|s| s.get_name().to_string())
            .collect();
        names
            .iter()
            .fold(cmd.args_override_self(true), |cmd, name| {
                cmd.mut_subcommand(name, last_wins)
            })
    }
    last_wins(Cli::command())
}

/// Subcommand path (`privacy sweep`) and output flags of a parsed command.
fn describe(command: &Command) -> (&'static str, &OutputArgs) {
    match command {
        Command::Bound(a) => ("bound", &a.out),
        Command::Shifts(a) => ("shifts", &a.out),
        Command::Mixing(MixingCommand::Theta(a)) => ("mixing theta", &a.out),
        Command::Mixing(MixingCommand::WeaklySmooth(a)) => ("mixing weakly-smooth", &a.out),
        Command::Mixing(MixingCommand::Dissipative(a)) => ("mixing dissipative", &a.out),
        Command::Privacy(PrivacyCommand::Epsilon(a)) => ("privacy epsilon", &a.out),
        Command::Privacy(PrivacyCommand::Sweep(a)) => ("privacy sweep", &a.out),
        Command::Sweep(a) => ("sweep", &a.out),
        Command::Simulate(SimulateCommand::Run(a)) => ("simulate run", &a.out),
        Command::Simulate(SimulateCommand::ValidateMixing(a)) => {
            ("simulate validate-mixing", &a.out)
        }
    }
}

fn flags_value(command: &Command) -> Value {
    let value = match command {
        Command::Bound(a) => serde_json::to_value(a),
        Command::Shifts(a) => serde_json::to_value(a),
        Command::Mixing(MixingCommand::Theta(a)) => serde_json::to_value(a),
        Command::Mixing(MixingCommand::WeaklySmooth(a)) => serde_json::to_value(a),
        Command::Mixing(MixingCommand::Dissipative(a)) => serde_json::to_value(a),
        Command::Privacy(PrivacyCommand::Epsilon(a)) => serde_json::to_value(a),
        Command::Privacy(PrivacyCommand::Sweep(a)) | Command::Sweep(a) => serde_json::to_value(a),
        Command::Simulate(SimulateCommand::Run(a)) => serde_json::to_value(a),
        Command::Simulate(SimulateCommand::ValidateMixing(a)) => serde_json::to_value(a),
    };
    value.expect("flags serialize")
}

/// Flat JSON of the resolved flags, defaults included, keyed by long flag
/// name, plus the `subcommand` path. Output destination and this flag
/// itself are left out.
pub fn echo_config(command: &Command) -> String {
    let mut object = Map::new();
    object.insert(
        "subcommand".into(),
        Value::String(describe(command).0.into()),
    );
    if let Value::Object(flags) = flags_value(command) {
        for (key, value) in flags {
            object.insert(key.replace('_', "-"), value);
        }
    }
    to_json(&Value::Object(object))
}

fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(first) = argv.first().and_then(|a| a.to_str()) else {
        return Ok(argv);
    };
    let (path, rest) = if first == "--config" {
        let path = argv
            .get(1)
            .ok_or_else(|| CliError::usage("--config needs a file path"))?
            .clone();
        (path, &argv[2..])
    } else if let Some(path) = first.strip_prefix("--config=") {
        (OsString::from(path), &argv[1..])
    } else {
        return Ok(argv);
    };
    let mut expanded = config_to_argv(Path::new(&path))?;
    expanded.extend(rest.iter().cloned());
    Ok(expanded)
}

/// Turns a flat JSON config into arguments: `subcommand` gives the leading
/// words, `true` booleans become bare flags, arrays are comma-joined.
fn config_to_argv(path: &Path) -> Result<Vec<OsString>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{} is not valid JSON: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(CliError::usage("a config file must hold a JSON object"));
    };
    let subcommand = match map.get("subcommand") {
        Some(Value::String(s)) => s.clone(),
        _ => {
            return Err(CliError::usage(
                "a config file needs a string `subcommand` entry",
            ))
        }
    };
    let mut argv: Vec<OsString> = subcommand.split_whitespace().map(OsString::from).collect();
    for (key, value) in &map {
        if key == "subcommand" {
            continue;
        }
        let flag = format!("--{key}");
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => argv.push(flag.into()),
            Value::Array(items) => {
                let parts = items
                    .iter()
                    .map(scalar_text)
                    .collect::<Result<Vec<_>, _>>()?;
                argv.push(flag.into());
                argv.push(parts.join(",").into());
            }
            other => {
                argv.push(flag.into());
                argv.push(scalar_text(other)?.into());
            }
        }
    }
    Ok(argv)
}

fn scalar_text(value: &Value) -> Result<String, CliError> {
    match value {
        Value::Number(n) => Ok(number_text(n)),
        Value::String(s) => Ok(s.clone()),
        other => Err(CliError::usage(format!("unsupported config value {other}"))),
    }
}

/// Applies the `PABI_THREADS` cap to the global thread pool.
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(text) = value else {
        return Ok(());
    };
    let threads: usize = text.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::usage(format!(
            "PABI_THREADS must be a positive integer, got `{text}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Io(format!("cannot configure the thread pool: {e}")))
}

/// Error text for [`configure_threads`] failures, in the same shape as
/// [`dispatch`] errors.
pub fn error_text(e: &CliError) -> String {
    to_json(&e.report()) + "\n"
}
