use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xxz_cli::config::{DeltaRange, Format, GridScale, RunConfig};
use xxz_cli::run::{cmd_border, cmd_negativity, cmd_partitions, cmd_profile, NegativityParams, PartitionKind};
use xxz_cli::verify::{cmd_verify, Fault};
use xxz_cli::{CliError, WORKERS_ENV};
use xxz_core::entanglement::EPS_NEG;
use xxz_core::spinchain::Topology;

#[derive(Parser)]
#[command(name = "xxz", version, about = "Thermal entanglement of XXZ spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Negativity of one thermal state, printed as a JSON record.
    Negativity(NegativityArgs),
    /// Negativity against temperature for every (b̄, Δ, partition).
    Profile(SweepArgs),
    /// Limit temperature against Δ, one file per partition.
    Border(SweepArgs),
    /// Run the self-check suite and print a JSON report.
    Verify(VerifyArgs),
    /// List one representative per class of bipartitions.
    Partitions(PartitionArgs),
    /// Print the effective configuration as TOML.
    Config(SweepArgs),
}

#[derive(Args)]
struct NegativityArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "cyclic-nn")]
    topology: Topology,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    vx: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    vz: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    b: f64,
    /// Temperature in the units of the couplings; 0 gives the ground-state mixture.
    #[arg(long = "T")]
    temperature: f64,
    #[arg(long)]
    partition: String,
    #[arg(long, default_value_t = EPS_NEG)]
    eps_neg: f64,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    topology: Option<Topology>,
    #[arg(long, allow_hyphen_values = true)]
    v_sign: Option<f64>,
    /// Comma-separated reduced fields.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    b_bar: Option<Vec<f64>>,
    /// Comma-separated anisotropies.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "delta_range")]
    deltas: Option<Vec<String>>,
    /// `start:stop:steps`, inclusive.
    #[arg(long, allow_hyphen_values = true)]
    delta_range: Option<String>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_points: Option<usize>,
    #[arg(long, value_parser = parse_scale)]
    t_scale: Option<GridScale>,
    /// Comma-separated labels, `all-global` or `all-reduced`.
    #[arg(long, value_delimiter = ',')]
    partitions: Option<Vec<String>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    eps_neg: Option<f64>,
    /// Upper end of the limit-temperature scan.
    #[arg(long)]
    t_ceiling: Option<f64>,
    /// Only locate the last crossing; skip reentry windows.
    #[arg(long)]
    no_reentry: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = parse_format)]
    formats: Option<Vec<Format>>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Corrupt a closed form on purpose (`wrong-pair-gamma`).
    #[arg(long, value_parser = parse_fault)]
    inject_fault: Option<Fault>,
    /// Also write the report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "global", value_parser = parse_kind)]
    kind: PartitionKind,
}

fn parse_scale(s: &str) -> Result<GridScale, String> {
    match s {
        "log" => Ok(GridScale::Log),
        "linear" => Ok(GridScale::Linear),
        _ => Err(format!("expected log or linear, got {s:?}")),
    }
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        _ => Err(format!("expected csv or json, got {s:?}")),
    }
}

fn parse_fault(s: &str) -> Result<Fault, String> {
    match s {
        "wrong-pair-gamma" => Ok(Fault::WrongPairGamma),
        _ => Err(format!("unknown fault {s:?}")),
    }
}

fn parse_kind(s: &str) -> Result<PartitionKind, String> {
    match s {
        "global" => Ok(PartitionKind::Global),
        "reduced" => Ok(PartitionKind::Reduced),
        _ => Err(format!("expected global or reduced, got {s:?}")),
    }
}

fn load(path: &Option<PathBuf>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn parse_number(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim().parse().map_err(|_| CliError::Config(format!("{what}: cannot parse {s:?}")))
}

impl SweepArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = load(&self.config)?;
        let m = &mut cfg.model;
        if let Some(n) = self.n {
            m.n = n;
        }
        if let Some(t) = self.topology {
            m.topology = t;
        }
        if let Some(v) = self.v_sign {
            m.v_sign = v;
        }
        if let Some(b) = &self.b_bar {
            m.b_bar = b.clone();
        }
        let s = &mut cfg.sweep;
        if let Some(list) = &self.deltas {
            let values = list
                .iter()
                .filter(|x| !x.trim().is_empty())
                .map(|x| parse_number(x, "--deltas"))
                .collect::<Result<Vec<f64>, _>>()?;
            s.deltas = Some(values);
        }
        if let Some(range) = &self.delta_range {
            let parts: Vec<&str> = range.split(':').collect();
            let [start, stop, steps] = parts[..] else {
                return Err(CliError::Config(format!("--delta-range expects start:stop:steps, got {range:?}")));
            };
            let steps = steps
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("--delta-range: bad step count {steps:?}")))?;
            s.deltas = None;
            s.delta_range = Some(DeltaRange {
                start: parse_number(start, "--delta-range")?,
                stop: parse_number(stop, "--delta-range")?,
                steps,
            });
        }
        if let Some(x) = self.t_min {
            s.t_min = x;
        }
        if let Some(x) = self.t_max {
            s.t_max = x;
        }
        if let Some(x) = self.t_points {
            s.t_points = x;
        }
        if let Some(x) = self.t_scale {
            s.t_scale = x;
        }
        if let Some(p) = &self.partitions {
            s.partitions = p.clone();
        }
        let nu = &mut cfg.numeric;
        if let Some(x) = self.tol {
            nu.tol = x;
        }
        if let Some(x) = self.eps_neg {
            nu.eps_neg = x;
        }
        if let Some(x) = self.t_ceiling {
            nu.t_ceiling = x;
        }
        if self.no_reentry {
            nu.reentry = false;
        }
        if let Some(dir) = &self.out {
            cfg.output.dir = dir.clone();
        }
        if let Some(f) = &self.formats {
            cfg.output.formats = f.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&w| w > 0)
        .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

fn execute(cli: Cli) -> Result<(), CliError> {
    configure_workers()?;
    match cli.command {
        Command::Negativity(a) => {
            let params = NegativityParams { eps_neg: a.eps_neg, ..NegativityParams::new(a.n, a.topology, a.vx, a.vz, a.b, a.temperature) };
            println!("{}", json_line(&cmd_negativity(params, &a.partition)?));
        }
        Command::Profile(a) => {
            let cfg = a.resolve()?;
            let manifest = cmd_profile(&cfg)?;
            println!("wrote {} files to {}", manifest.files.len(), cfg.output.dir.display());
        }
        Command::Border(a) => {
            let cfg = a.resolve()?;
            let manifest = cmd_border(&cfg)?;
            println!("wrote {} files to {}", manifest.files.len(), cfg.output.dir.display());
        }
        Command::Verify(a) => {
            let mut cfg = load(&a.config)?;
            if let Some(x) = a.max_n {
                cfg.verify.max_n = x;
            }
            if let Some(x) = a.samples {
                cfg.verify.samples = x;
            }
            if let Some(x) = a.seed {
                cfg.verify.seed = x;
            }
            cfg.validate()?;
            let report = cmd_verify(&cfg.verify, a.inject_fault);
            let text = serde_json::to_string_pretty(&report).expect("serializable");
            println!("{text}");
            if let Some(path) = &a.report {
                std::fs::write(path, format!("{text}\n"))
                    .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
            }
            if !report.passed {
                let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                return Err(CliError::Verification(failed.join(", ")));
            }
        }
        Command::Partitions(a) => {
            for label in cmd_partitions(a.n, a.kind)? {
                println!("{label}");
            }
        }
        Command::Config(a) => print!("{}", a.resolve()?.to_toml()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("xxz: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
