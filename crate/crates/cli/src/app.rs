use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use cdma_downlink::experiment::{self, ExperimentConfig, SweepPoint};
use cdma_downlink::report;
use cdma_downlink::validation::{self, GateReport, GateSettings};
use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};

use crate::config;
use crate::error::CliError;
use crate::manifest::{FailedTrial, RunManifest};

#[derive(Debug, Parser)]
#[command(
    name = "cdma-sim",
    version,
    about = "Monte Carlo analysis of the DS-CDMA cellular downlink"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one operating point (first K/M and first shadowing value).
    Single(Common),
    /// Run every K/M value (or every r_bs value when an r_bs list is given)
    /// at every shadowing value.
    Sweep(Common),
    /// Dump one network realization and its association.
    Snapshot {
        #[command(flatten)]
        common: Common,
        /// Trial index whose realization is dumped.
        #[arg(long, default_value_t = 0)]
        trial: usize,
        /// Also write the full link table to links.csv.
        #[arg(long)]
        links: bool,
    },
    /// Check the closed-form outage kernel against fading simulation.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        contexts: usize,
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat key = value configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// rate, power or both.
    #[arg(long)]
    pub policy: Option<String>,
    /// Comma-separated K/M values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub km_list: Option<Vec<f64>>,
    /// Comma-separated base-station exclusion radii; switches sweeps to r_bs.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub rbs_list: Option<Vec<f64>>,
    #[arg(long, value_name = "N", allow_negative_numbers = true)]
    pub trials: Option<i64>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Comma-separated shadowing standard deviations in dB.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        value_name = "DB"
    )]
    pub sigma_s: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Worker threads for trial execution (default: all cores).
    #[arg(long, value_name = "N")]
    pub workers: Option<usize>,
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
}

impl Common {
    /// The flags as config-file entries, so they go through the same checks.
    fn overrides(&self) -> Table {
        let list = |xs: &[f64]| Value::Array(xs.iter().map(|&x| Value::Float(x)).collect());
        let mut t = Table::new();
        if let Some(p) = &self.policy {
            t.insert("policy".into(), Value::String(p.clone()));
        }
        if let Some(v) = &self.km_list {
            t.insert("km_list".into(), list(v));
        }
        if let Some(v) = &self.rbs_list {
            t.insert("rbs_list".into(), list(v));
        }
        if let Some(n) = self.trials {
            t.insert("n_trials".into(), Value::Integer(n));
        }
        if let Some(s) = self.seed {
            t.insert("master_seed".into(), Value::String(s.to_string()));
        }
        if let Some(v) = &self.sigma_s {
            t.insert("sigma_s_dB".into(), list(v));
        }
        if let Some(a) = self.alpha {
            t.insert("alpha".into(), Value::Float(a));
        }
        t
    }

    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                config::parse_table(&text)?
            }
            None => Table::new(),
        };
        config::resolve(&file, &self.overrides())
    }
}

/// Parses arguments and runs; returns the process exit status.
pub fn main_with<I, T>(args: I) -> std::process::ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return std::process::ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cdma-sim: {e}");
            (&e).into()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Single(c) | Command::Sweep(c) => c,
        Command::Snapshot { common, .. } | Command::Validate { common, .. } => common,
    };
    let cfg = common.resolve()?;
    if let Some(n) = common.workers {
        if n == 0 {
            return Err(CliError::config("workers", "must be at least 1"));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let out = &common.out;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;

    match &cli.command {
        Command::Single(_) => {
            let point = experiment::single(&cfg)?;
            write_aggregates("single", &cfg, &[point], out)
        }
        Command::Sweep(_) => {
            let points = experiment::sweep(&cfg)?;
            write_aggregates("sweep", &cfg, &points, out)
        }
        Command::Snapshot { trial, links, .. } => snapshot(&cfg, *trial, *links, out),
        Command::Validate {
            contexts, draws, ..
        } => validate(&cfg, *contexts, *draws, out),
    }
}

fn manifest(command: &str, cfg: &ExperimentConfig, out: &Path) -> Result<RunManifest, CliError> {
    let table = config::to_table(cfg);
    let mut m = RunManifest::new(command, cfg.master_seed, table.clone());
    let text = toml::to_string(&table).expect("config serializes");
    m.emit(out, "config.toml", text.as_bytes())?;
    Ok(m)
}

fn write_aggregates(
    command: &str,
    cfg: &ExperimentConfig,
    points: &[SweepPoint],
    out: &Path,
) -> Result<(), CliError> {
    let mut m = manifest(command, cfg, out)?;
    let mut results = Vec::new();
    report::write_results(points, &mut results).expect("in-memory write");
    let mut ccdf = Vec::new();
    report::write_ccdf(points, &mut ccdf).expect("in-memory write");
    m.emit(out, "results.csv", &results)?;
    m.emit(out, "ccdf.csv", &ccdf)?;

    for p in points {
        for f in &p.result.failures {
            m.failed_trials.push(FailedTrial {
                swept_value: p.swept_value,
                sigma_s_db: p.sigma_s_db,
                trial_index: f.trial_index,
                seed: f.seed,
                error: f.error.to_string(),
            });
        }
    }
    m.write(out)?;

    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(
        stdout,
        "{:>8} {:>6} {:>6} {:>10} {:>10} {:>10} {:>7}",
        "value", "policy", "sigma", "E[R]", "tau", "edge", "denied"
    );
    for p in points {
        for s in &p.result.stats {
            let _ = writeln!(
                stdout,
                "{:>8} {:>6} {:>6} {:>10.4} {:>10.3} {:>10.4} {:>7.4}",
                p.swept_value,
                s.policy.as_str(),
                p.sigma_s_db,
                s.mean_rate,
                s.transmission_capacity,
                s.cell_edge_mean_rate,
                s.denial_fraction
            );
        }
    }
    if !m.failed_trials.is_empty() {
        eprintln!(
            "cdma-sim: {} trial(s) aborted by infeasible placement; see manifest.json",
            m.failed_trials.len()
        );
    }
    let _ = writeln!(stdout, "wrote {}", out.display());
    Ok(())
}

fn snapshot(cfg: &ExperimentConfig, trial: usize, links: bool, out: &Path) -> Result<(), CliError> {
    let scenario = cfg.scenario(cfg.km_list[0], cfg.r_bs, cfg.sigma_s_db[0])?;
    let detail = experiment::simulate(&scenario, trial)?;
    let mut m = manifest("snapshot", cfg, out)?;
    let mut buf = Vec::new();
    report::write_snapshot(&detail.network, &detail.assignment, &mut buf).expect("in-memory write");
    m.emit(out, "snapshot.csv", &buf)?;
    if links {
        let mut buf = Vec::new();
        detail.links.write_csv(&mut buf).expect("in-memory write");
        m.emit(out, "links.csv", &buf)?;
    }
    m.write(out)?;
    println!(
        "trial {trial} (seed {}): {} stations, {} mobiles, {} denied; wrote {}",
        detail.seed,
        detail.network.base_stations.len(),
        detail.network.mobiles.len(),
        detail.assignment.num_denied(),
        out.display()
    );
    Ok(())
}

pub const VALIDATE_HEADER: &str =
    "context,m0,interferers,beta,closed_form,oracle,standard_error,within";

fn write_gate(report: &GateReport) -> Vec<u8> {
    let mut buf = Vec::new();
    writeln!(buf, "{VALIDATE_HEADER}").unwrap();
    for (i, c) in report.cases.iter().enumerate() {
        writeln!(
            buf,
            "{i},{},{},{},{},{},{},{}",
            c.m0, c.interferers, c.beta, c.closed_form, c.oracle, c.standard_error, c.within
        )
        .unwrap();
    }
    buf
}

fn validate(
    cfg: &ExperimentConfig,
    contexts: usize,
    draws: usize,
    out: &Path,
) -> Result<(), CliError> {
    if contexts == 0 {
        return Err(CliError::config("contexts", "must be at least 1"));
    }
    if draws == 0 {
        return Err(CliError::config("draws", "must be at least 1"));
    }
    let settings = GateSettings {
        contexts,
        draws,
        seed: cfg.master_seed,
        air: cfg.air(),
        ..Default::default()
    };
    let report = validation::oracle_gate(&settings)?;
    let mut m = manifest("validate", cfg, out)?;
    m.emit(out, "validate.csv", &write_gate(&report))?;
    m.write(out)?;
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    println!(
        "outage kernel vs fading oracle: {}/{} contexts within {} SE ({:.1}%, need {:.0}%) with {} draws each: {verdict}",
        report.within(),
        report.cases.len(),
        settings.tolerance_se,
        100.0 * report.fraction_within(),
        100.0 * settings.required_fraction,
        settings.draws
    );
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::GateFailed {
            within: report.within(),
            total: report.cases.len(),
        })
    }
}
