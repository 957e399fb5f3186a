//! Configuration loading and subcommand dispatch for the `ris-est` binary.
//!
//! Settings come from three layers, later layers winning: built-in defaults (full
//! scale unless a desk preset is chosen), an optional `key = value` file, and
//! command-line flags. Every key accepted in the file is also accepted as `--key VALUE`.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Arg, ArgAction, ArgMatches};
use ris_est_core::dump::{read_dump, write_dump};
use ris_est_core::harness::{bench_complexity, generate_trial, nmse, run_algorithm, sweep};
use ris_est_core::{Algorithm, Axis, EstimatorSettings, SweepReport, SystemConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Help or version text requested; not a failure.
    #[error("{0}")]
    Help(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => 0,
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

fn config_err(e: ris_est_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Generate,
    Estimate,
    Sweep,
    Bench,
}

impl Subcommand {
    fn name(self) -> &'static str {
        match self {
            Subcommand::Generate => "generate",
            Subcommand::Estimate => "estimate",
            Subcommand::Sweep => "sweep",
            Subcommand::Bench => "bench",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Desk,
    Full,
}

impl Preset {
    fn parse(s: &str) -> Option<Preset> {
        match s.trim() {
            "desk" => Some(Preset::Desk),
            "full" => Some(Preset::Full),
            _ => None,
        }
    }

    fn system(self) -> SystemConfig {
        match self {
            Preset::Desk => SystemConfig::desk(),
            Preset::Full => SystemConfig::default(),
        }
    }
}

/// Keys that control the run rather than the model or the estimators.
pub const RUN_KEYS: [&str; 8] = ["algorithms", "axis", "values", "trials", "trial", "paths", "timing", "out"];

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub system: SystemConfig,
    pub settings: EstimatorSettings,
    pub algorithms: Vec<Algorithm>,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub trials: usize,
    /// Trial index drawn by `generate` and `estimate`.
    pub trial: u64,
    /// `P_j` values timed by `bench`.
    pub paths: Vec<usize>,
    /// When false the runtime column of sweep output is written as zero.
    pub timing: bool,
    pub out: Option<PathBuf>,
    /// Dump read by `estimate` instead of drawing a fresh trial.
    pub input: Option<PathBuf>,
}

impl CliConfig {
    pub fn with_preset(preset: Preset) -> Self {
        Self {
            system: preset.system(),
            settings: EstimatorSettings::default(),
            algorithms: Algorithm::standard_set(),
            axis: Axis::SnrDb,
            values: vec![-10.0, 0.0, 10.0],
            trials: 20,
            trial: 0,
            paths: vec![4, 6, 8, 10],
            timing: true,
            out: None,
            input: None,
        }
    }

    /// Sets one key from text. Unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if self.system.set(key, value).map_err(config_err)? || self.settings.set(key, value).map_err(config_err)? {
            return Ok(());
        }
        let v = value.trim();
        let bad = |what: &str| CliError::Config(format!("invalid configuration: field `{key}`: expected {what}, got `{v}`"));
        match key {
            "algorithms" => self.algorithms = Algorithm::parse_list(v).map_err(config_err)?,
            "axis" => self.axis = v.parse().map_err(config_err)?,
            "values" => {
                self.values = split_list(v)
                    .map(|x| x.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("a comma-separated list of numbers"))?
            }
            "trials" => self.trials = v.parse().map_err(|_| bad("a positive integer"))?,
            "trial" => self.trial = v.parse().map_err(|_| bad("a nonnegative integer"))?,
            "paths" => {
                self.paths = split_list(v)
                    .map(|x| x.parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("a comma-separated list of path counts"))?
            }
            "timing" => self.timing = v.parse().map_err(|_| bad("true or false"))?,
            "out" => self.out = Some(PathBuf::from(v)),
            _ => return Err(CliError::Config(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.system.validate().map_err(config_err)?;
        self.settings.validate().map_err(config_err)?;
        let field = |f: &str, why: &str| CliError::Config(format!("invalid configuration: field `{f}`: {why}"));
        if self.trials == 0 {
            return Err(field("trials", "must be at least 1"));
        }
        if self.values.is_empty() {
            return Err(field("values", "needs at least one value"));
        }
        if self.paths.is_empty() {
            return Err(field("paths", "needs at least one path count"));
        }
        Ok(())
    }

    /// Every setting as `key = value` lines, readable back as a config file.
    pub fn render(&self) -> String {
        let join = |xs: Vec<String>| xs.join(",");
        let mut lines: Vec<(String, String)> = Vec::new();
        lines.extend(self.system.entries().into_iter().map(|(k, v)| (k.to_string(), v)));
        lines.extend(self.settings.entries().into_iter().map(|(k, v)| (k.to_string(), v)));
        lines.push(("algorithms".into(), join(self.algorithms.iter().map(|a| a.name()).collect())));
        lines.push(("axis".into(), self.axis.name().into()));
        lines.push(("values".into(), join(self.values.iter().map(|v| v.to_string()).collect())));
        lines.push(("trials".into(), self.trials.to_string()));
        lines.push(("trial".into(), self.trial.to_string()));
        lines.push(("paths".into(), join(self.paths.iter().map(|v| v.to_string()).collect())));
        lines.push(("timing".into(), self.timing.to_string()));
        if let Some(out) = &self.out {
            lines.push(("out".into(), out.display().to_string()));
        }
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

/// Parses `key = value` lines; `#` starts a comment. Returns `(line, key, value)`.
pub fn parse_config_text(text: &str) -> Result<Vec<(usize, String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected `key = value`, got `{line}`", i + 1)));
        };
        let k = k.trim();
        if k.is_empty() {
            return Err(CliError::Config(format!("line {}: missing key", i + 1)));
        }
        out.push((i + 1, k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn model_keys() -> impl Iterator<Item = &'static str> {
    SystemConfig::KEYS
        .into_iter()
        .chain(EstimatorSettings::KEYS)
        .chain(RUN_KEYS)
}

/// The clap command tree. Every config key doubles as a `--key VALUE` flag.
pub fn command() -> clap::Command {
    let mut shared = vec![
        Arg::new("config").long("config").value_name("PATH").help("key = value configuration file"),
        Arg::new("preset")
            .long("preset")
            .value_name("desk|full")
            .help("dimension preset applied before the file"),
        Arg::new("full-scale")
            .long("full-scale")
            .action(ArgAction::SetTrue)
            .help("use full-scale dimensions even if the file selects the desk preset"),
        Arg::new("input")
            .long("input")
            .value_name("PATH")
            .help("dump to estimate on instead of a fresh draw"),
    ];
    for key in model_keys() {
        shared.push(
            Arg::new(key)
                .long(key)
                .value_name("VALUE")
                .allow_hyphen_values(true)
                .hide(true),
        );
    }
    let sub = |name: &'static str, about: &'static str| clap::Command::new(name).about(about).args(shared.clone());
    clap::Command::new("ris-est")
        .about("RIS cascaded channel estimation experiments")
        .after_help("Any configuration key can be passed as --KEY VALUE, e.g. --users 8 --snr_db -5.")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(sub("generate", "Draw one trial and write it as a dump"))
        .subcommand(sub("estimate", "Run the selected estimators on one trial and print NMSE"))
        .subcommand(sub("sweep", "Monte-Carlo NMSE sweep along one axis, as CSV"))
        .subcommand(sub("bench", "Estimator runtime against the number of RIS-user paths, as CSV"))
}

/// Resolves defaults, the config file and flags into one validated configuration.
pub fn resolve(matches: &ArgMatches) -> Result<CliConfig, CliError> {
    let file_entries = match matches.get_one::<String>("config") {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
            parse_config_text(&text).map_err(|e| CliError::Config(format!("{path}: {e}")))?
        }
        None => Vec::new(),
    };
    let mut preset = Preset::Full;
    for (line, k, v) in &file_entries {
        if k == "preset" {
            preset = Preset::parse(v).ok_or_else(|| CliError::Config(format!("line {line}: unknown preset `{v}`")))?;
        }
    }
    if let Some(p) = matches.get_one::<String>("preset") {
        preset = Preset::parse(p).ok_or_else(|| CliError::Config(format!("unknown preset `{p}`")))?;
    }
    if matches.get_flag("full-scale") {
        preset = Preset::Full;
    }
    let mut cfg = CliConfig::with_preset(preset);
    for (line, k, v) in &file_entries {
        if k == "preset" {
            continue;
        }
        if k == "input" {
            cfg.input = Some(PathBuf::from(v));
            continue;
        }
        cfg.set(k, v).map_err(|e| CliError::Config(format!("line {line}: {e}")))?;
    }
    for key in model_keys() {
        if let Some(v) = matches.get_one::<String>(key) {
            cfg.set(key, v)?;
        }
    }
    if let Some(p) = matches.get_one::<String>("input") {
        cfg.input = Some(PathBuf::from(p));
    }
    if matches.get_flag("full-scale") {
        let dims = SystemConfig::default();
        if (cfg.system.bs_antennas(), cfg.system.ris_elements()) != (dims.bs_antennas(), dims.ris_elements()) {
            eprintln!("note: --full-scale set, but explicit keys changed the array sizes");
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `args` (including the program name) into a subcommand and configuration.
pub fn parse_args<I, S>(args: I) -> Result<(Subcommand, CliConfig), CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    use clap::error::ErrorKind;
    let m = command().try_get_matches_from(args).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Help(e.render().to_string()),
        ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => CliError::Config(e.render().to_string()),
        _ => {
            let text = e.render().to_string();
            CliError::Config(text.trim_start_matches("error: ").trim_end().to_string())
        }
    })?;
    let (name, sub) = m.subcommand().expect("subcommand is required");
    let which = match name {
        "generate" => Subcommand::Generate,
        "estimate" => Subcommand::Estimate,
        "sweep" => Subcommand::Sweep,
        _ => Subcommand::Bench,
    };
    Ok((which, resolve(sub)?))
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| runtime_err(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_report(cfg: &CliConfig, report: &SweepReport) -> Result<(), CliError> {
    let text = if cfg.timing { report.to_csv() } else { report.to_csv_without_timing() };
    let mut w = open_out(&cfg.out)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(runtime_err)
}

fn load_dump(path: &Path) -> Result<(SystemConfig, ris_est_core::TrialData), CliError> {
    let f = File::open(path).map_err(|e| runtime_err(format!("cannot open {}: {e}", path.display())))?;
    read_dump(BufReader::new(f)).map_err(|e| runtime_err(format!("{}: {e}", path.display())))
}

/// Runs a subcommand. The resolved configuration is logged to standard error first.
pub fn dispatch(which: Subcommand, cfg: &CliConfig) -> Result<(), CliError> {
    eprintln!("# ris-est {} resolved configuration", which.name());
    eprint!("{}", cfg.render());
    match which {
        Subcommand::Generate => {
            let data = generate_trial(&cfg.system, cfg.trial).map_err(runtime_err)?;
            let mut w = open_out(&cfg.out)?;
            write_dump(&mut w, &cfg.system, &data).map_err(runtime_err)?;
            w.flush().map_err(runtime_err)
        }
        Subcommand::Estimate => {
            let (system, data) = match &cfg.input {
                Some(p) => {
                    let (system, data) = load_dump(p)?;
                    eprintln!("# model configuration taken from {}", p.display());
                    for (k, v) in system.entries() {
                        eprintln!("{k} = {v}");
                    }
                    (system, data)
                }
                None => (cfg.system.clone(), generate_trial(&cfg.system, cfg.trial).map_err(runtime_err)?),
            };
            let mut w = open_out(&cfg.out)?;
            let mut text = String::from("algorithm,nmse,nmse_db,iters_mean\n");
            for &alg in &cfg.algorithms {
                let start = Instant::now();
                let est = run_algorithm(alg, &system, &cfg.settings, &data).map_err(runtime_err)?;
                eprintln!("{alg}: {:.3} ms", start.elapsed().as_secs_f64() * 1e3);
                let e = nmse(&est.angular, &data.realization).map_err(runtime_err)?;
                text.push_str(&format!(
                    "{alg},{e:.9e},{:.9e},{:.9e}\n",
                    10.0 * e.log10(),
                    est.mean_iterations()
                ));
            }
            w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(runtime_err)
        }
        Subcommand::Sweep => {
            let report = sweep(&cfg.system, &cfg.settings, cfg.axis, &cfg.values, cfg.trials, &cfg.algorithms)
                .map_err(runtime_err)?;
            write_report(cfg, &report)
        }
        Subcommand::Bench => {
            let report = bench_complexity(&cfg.system, &cfg.settings, &cfg.paths, cfg.trials).map_err(runtime_err)?;
            write_report(cfg, &report)
        }
    }
}
