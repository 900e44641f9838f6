//! Command-line front end.
//!
//! ```text
//! bsplanner analytic|goodput|simulate|sweep [--config FILE | --preset NAME]
//!           [--seed N] [--out-dir DIR] [--mode analytic|monte_carlo]
//!           [--compare] [--set key=value]...
//! bsplanner presets
//! ```
//!
//! Exit status is 0 on success, 2 for configuration errors and 3 for
//! failures while running. `BSPLANNER_THREADS` caps worker threads.

mod overrides;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Config;
use crate::goodput;
use crate::output::{self, Table};
use crate::presets;
use crate::sim;
use crate::sweep::{self, Mode, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

pub const THREADS_ENV: &str = "BSPLANNER_THREADS";
pub const MANIFEST_FILE: &str = "manifest.json";
const DEFAULT_OUT_DIR: &str = "bsplanner-out";

#[derive(Debug, Parser)]
#[command(name = "bsplanner", version, about = "Base-station capacity planning under TCP and TCP/NC goodput")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form base-station counts over the configured grid.
    Analytic(CommonArgs),
    /// Goodput per protocol, throughput, loss rate and rtt.
    Goodput(CommonArgs),
    /// Monte Carlo simulation at every grid point.
    Simulate(CommonArgs),
    /// Full sweep with CSV, plot script and manifest.
    Sweep(CommonArgs),
    /// List built-in presets.
    Presets,
}

#[derive(Debug, Args, Clone)]
struct CommonArgs {
    /// JSON config file, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset used when no config file is given.
    #[arg(long)]
    preset: Option<String>,
    /// Master seed for Monte Carlo runs.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// analytic or monte_carlo.
    #[arg(long)]
    mode: Option<String>,
    /// Pair TCP/NC with TCP at every grid point.
    #[arg(long)]
    compare: bool,
    /// Override a config field, e.g. `--set sim.iterations=10` or `--set axes.p=0.01,0.02`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub preset: Option<String>,
    pub version: String,
    pub seed: u64,
    pub out_dir: String,
    pub effective_config: Config,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("config error: {e}"))
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("error: {e}"))
}

/// Runs the CLI with explicit arguments and streams, returning the exit code.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => {
                let _ = writeln!(stderr, "config error: {THREADS_ENV} must be a positive integer, got `{v}`");
                return EXIT_CONFIG;
            }
        },
        Err(_) => None,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_RUNTIME;
        }
    };
    match pool.install(|| dispatch(cli.command, stdout, stderr)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.message());
            e.code()
        }
    }
}

struct Loaded {
    config: Config,
    config_path: Option<String>,
    preset: Option<String>,
}

fn load(args: &CommonArgs) -> Result<Loaded, CliError> {
    // Raw file text, kept for positioned diagnostics when it is parsed as is.
    let mut plain_file = None;
    let (mut tree, preset) = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            let mut tree: Value = serde_json::from_str(&text)
                .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            match tree.get_mut("effective_config") {
                Some(effective) => tree = effective.take(),
                None => plain_file = Some((path.display().to_string(), text)),
            }
            (tree, None)
        }
        (None, Some(name)) => {
            let cfg = presets::preset(name).map_err(config_err)?;
            (serde_json::to_value(cfg).expect("config serializes"), Some(name.clone()))
        }
        (None, None) => return Err(config_err("pass --config FILE or --preset NAME")),
    };
    for assignment in &args.set {
        overrides::apply(&mut tree, assignment).map_err(config_err)?;
    }
    if let Some(seed) = args.seed {
        overrides::apply(&mut tree, &format!("sim.seed={seed}")).map_err(config_err)?;
    }
    if let Some(mode) = &args.mode {
        overrides::apply(&mut tree, &format!("mode={}", serde_json::to_string(mode).expect("string")))
            .map_err(config_err)?;
    }
    if args.compare {
        overrides::apply(&mut tree, "compare=true").map_err(config_err)?;
    }
    let no_overrides = args.set.is_empty() && args.seed.is_none() && args.mode.is_none() && !args.compare;
    let config: Config = serde_path_to_error::deserialize(tree).map_err(|e| {
        let field = e.path().to_string();
        match plain_file.filter(|_| no_overrides) {
            Some((path, text)) => match serde_json::from_str::<Config>(&text) {
                Err(positioned) => config_err(format!("{path}: {field}: {positioned}")),
                Ok(_) => config_err(format!("{field}: {}", e.inner())),
            },
            None => config_err(format!("{field}: {}", e.inner())),
        }
    })?;
    Ok(Loaded {
        config,
        config_path: args.config.as_ref().map(|p| p.display().to_string()),
        preset,
    })
}

fn checked_spec(config: &Config) -> Result<SweepSpec, CliError> {
    let spec = config.sweep_spec().map_err(config_err)?;
    spec.grid().map_err(config_err)?;
    if let Some(sim) = &spec.sim {
        if spec.mode == Mode::MonteCarlo {
            sim.validate().map_err(config_err)?;
        }
    }
    Ok(spec)
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| runtime_err(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| runtime_err(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn write_manifest(command: &str, loaded: &Loaded, dir: &Path) -> Result<PathBuf, CliError> {
    let manifest = RunManifest {
        command: command.to_string(),
        config_path: loaded.config_path.clone(),
        preset: loaded.preset.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: loaded.config.sim.seed,
        out_dir: dir.display().to_string(),
        effective_config: loaded.config.clone(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_file(dir, MANIFEST_FILE, text.as_bytes())
}

/// Writes `table` to `<out-dir>/<name>.csv` plus a manifest, or to stdout.
fn emit_table(
    command: &str,
    loaded: &Loaded,
    out_dir: Option<&Path>,
    table: &Table,
    stdout: &mut (dyn Write + Send),
    stderr: &mut (dyn Write + Send),
) -> Result<(), CliError> {
    match out_dir {
        Some(dir) => {
            let csv = write_file(dir, &format!("{}.csv", loaded.config.name), table.to_csv_string().as_bytes())?;
            let manifest = write_manifest(command, loaded, dir)?;
            let _ = writeln!(stderr, "wrote {} and {}", csv.display(), manifest.display());
            Ok(())
        }
        None => table.write_csv(stdout).map_err(runtime_err),
    }
}

fn dispatch(command: Command, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<(), CliError> {
    match command {
        Command::Presets => {
            for (name, description) in presets::PRESETS {
                writeln!(stdout, "{name:<8} {description}").map_err(runtime_err)?;
            }
            writeln!(stdout, "\np values {:?} are inferred from the published figure legends.", presets::P_VALUES)
                .map_err(runtime_err)?;
            Ok(())
        }
        Command::Analytic(args) => cmd_analytic(&args, stdout, stderr),
        Command::Goodput(args) => cmd_goodput(&args, stdout, stderr),
        Command::Simulate(args) => cmd_simulate(&args, stderr),
        Command::Sweep(args) => cmd_sweep(&args, stderr),
    }
}

fn cmd_analytic(args: &CommonArgs, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let mut loaded = load(args)?;
    loaded.config.mode = Mode::Analytic;
    let spec = checked_spec(&loaded.config)?;
    let table = if loaded.config.compare {
        output::comparison_table(&sweep::compare_protocols(&spec).map_err(runtime_err)?)
    } else {
        output::sweep_table(&sweep::run_sweep(&spec).map_err(runtime_err)?, loaded.config.kw_per_station)
    };
    emit_table("analytic", &loaded, args.out_dir.as_deref(), &table, stdout, stderr)
}

fn cmd_goodput(args: &CommonArgs, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let loaded = load(args)?;
    let spec = checked_spec(&loaded.config)?;
    let grid = spec.grid().map_err(config_err)?;
    // Goodput does not depend on the scenario axes.
    let mut rows = Vec::new();
    for pt in grid {
        if rows.iter().any(|(q, _): &(sweep::GridPoint, f64)| {
            q.protocol == pt.protocol && q.r_t == pt.r_t && q.p_p == pt.p_p && q.rtt == pt.rtt
        }) {
            continue;
        }
        let (_, protocol) = spec.resolve(&pt).map_err(runtime_err)?;
        let r_g = goodput::goodput(&protocol, pt.r_t).map_err(runtime_err)?;
        rows.push((pt, r_g));
    }
    emit_table("goodput", &loaded, args.out_dir.as_deref(), &output::goodput_table(&rows), stdout, stderr)
}

fn cmd_simulate(args: &CommonArgs, stderr: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let mut loaded = load(args)?;
    loaded.config.mode = Mode::MonteCarlo;
    let spec = checked_spec(&loaded.config)?;
    let sim_cfg = spec.sim.clone().expect("sweep_spec always sets sim");
    let grid = spec.grid().map_err(config_err)?;
    let runs = grid
        .par_iter()
        .map(|pt| {
            let row = spec.evaluate(pt)?;
            let (scenario, _) = spec.resolve(pt)?;
            let stats = sim::run_simulation(&scenario, &sim_cfg, row.r_g)?;
            Ok((row, stats))
        })
        .collect::<crate::Result<Vec<_>>>()
        .map_err(runtime_err)?;
    let rows: Vec<_> = runs.iter().map(|(r, _)| r.clone()).collect();
    let iterations: Vec<_> = runs
        .into_iter()
        .map(|(r, stats)| (r.point, sim_cfg.seed, stats))
        .collect();

    let dir = args.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let name = &loaded.config.name;
    let table = output::sweep_table(&rows, loaded.config.kw_per_station);
    write_file(&dir, &format!("{name}.csv"), table.to_csv_string().as_bytes())?;
    write_file(
        &dir,
        &format!("{name}_iterations.csv"),
        output::iterations_table(&iterations).to_csv_string().as_bytes(),
    )?;
    write_manifest("simulate", &loaded, &dir)?;
    let _ = writeln!(stderr, "wrote {name}.csv, {name}_iterations.csv and {MANIFEST_FILE} to {}", dir.display());
    Ok(())
}

fn cmd_sweep(args: &CommonArgs, stderr: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let loaded = load(args)?;
    let spec = checked_spec(&loaded.config)?;
    let name = &loaded.config.name;
    let csv_name = format!("{name}.csv");
    let (table, script) = if loaded.config.compare {
        let table = output::comparison_table(&sweep::compare_protocols(&spec).map_err(runtime_err)?);
        let script = output::plot_script(&table, &csv_name, name, &output::COMPARISON_SERIES);
        (table, script)
    } else {
        let rows = sweep::run_sweep(&spec).map_err(runtime_err)?;
        let table = output::sweep_table(&rows, loaded.config.kw_per_station);
        let series = output::sweep_series(&table);
        let script = output::plot_script(&table, &csv_name, name, &series);
        (table, script)
    };
    let dir = args.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    write_file(&dir, &csv_name, table.to_csv_string().as_bytes())?;
    write_file(&dir, &format!("{name}.gp"), script.as_bytes())?;
    write_manifest("sweep", &loaded, &dir)?;
    let _ = writeln!(stderr, "wrote {csv_name}, {name}.gp and {MANIFEST_FILE} to {}", dir.display());
    Ok(())
}
