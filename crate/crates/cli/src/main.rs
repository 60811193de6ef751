use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use noma_outage::error::{Error, Result};
use noma_outage::link::{GainMode, SystemConfig};
use noma_outage::montecarlo::{estimate_op_with_mode, Z_95};
use noma_outage_cli::sweep::format_probability;
use noma_outage_cli::{
    apply_overrides, find_optimal_w, find_snr_for_op, parse_assignments, run_sweep, write_csv, Grid, Method,
    RowOutcome, Scenario, SweepRow, SweepSpec, SweepVariable,
};

/// Outage probability of MIMO-NOMA users behind an energy-harvesting AF relay.
#[derive(Debug, Parser)]
#[command(name = "noma-outage", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form outage probability of every user.
    Analytic(Single),
    /// Outage probability by numerical integration.
    Quadrature(Single),
    /// Monte Carlo estimate with 95% intervals.
    Simulate {
        #[command(flatten)]
        single: Single,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, value_enum, default_value_t = Mode::Approx)]
        gain_mode: Mode,
    },
    /// Runs the scenario's [sweep] table.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: McOverrides,
    },
    /// SNR (dB) at which a user's analytic OP reaches a target.
    FindSnr {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        user: Option<usize>,
        #[arg(long, default_value_t = 1e-3)]
        target: f64,
        #[arg(long, default_value_t = 0.0)]
        low: f64,
        #[arg(long, default_value_t = 60.0)]
        high: f64,
    },
    /// Power-splitting ratio minimizing a user's analytic OP.
    FindW {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        user: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        start: f64,
        #[arg(long, default_value_t = 0.95)]
        stop: f64,
        #[arg(long, default_value_t = 19)]
        points: usize,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file.
    scenario: PathBuf,
    /// Override a configuration field, e.g. `--set snr_db=25` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Single {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    user: Option<usize>,
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
}

#[derive(Debug, Args)]
struct McOverrides {
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Approx,
    Exact,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Analytic(s) => single(&s, Method::Analytic, None),
        Command::Quadrature(s) => single(&s, Method::Quadrature, None),
        Command::Simulate { single: s, mc, gain_mode } => {
            let mode = match gain_mode {
                Mode::Approx => GainMode::Approx,
                Mode::Exact => GainMode::Exact,
            };
            single(&s, Method::Montecarlo, Some((mc, mode)))
        }
        Command::Sweep { common, mc } => {
            let scenario = Scenario::load(&common.scenario)?;
            let mut spec = SweepSpec::from_scenario(&scenario)?;
            spec.series = series(&scenario, &common.set)?;
            spec.trials = mc.trials.unwrap_or(spec.trials);
            spec.seed = mc.seed.unwrap_or(spec.seed);
            spec.workers = mc.workers;
            let rows = run_sweep(&spec)?;
            emit(common.out.as_deref(), |w| write_csv(&rows, w))
        }
        Command::FindSnr { common, user, target, low, high } => {
            let scenario = Scenario::load(&common.scenario)?;
            let mut lines = vec!["scenario,user,target_op,snr_db".to_string()];
            for (label, config) in series(&scenario, &common.set)? {
                for k in users(&config, user)? {
                    let snr = find_snr_for_op(k, &config, target, (low, high))?;
                    lines.push(format!("{},{k},{},{snr:.3}", csv_field(&label), format_probability(target)));
                }
            }
            emit(common.out.as_deref(), |w| write_lines(&lines, w))
        }
        Command::FindW { common, user, start, stop, points } => {
            let scenario = Scenario::load(&common.scenario)?;
            let grid = Grid::linear(start, stop, points).values()?;
            let mut lines = vec!["scenario,user,w_opt,op_opt".to_string()];
            for (label, config) in series(&scenario, &common.set)? {
                for k in users(&config, user)? {
                    let (w, op) = find_optimal_w(k, &config, &grid)?;
                    lines.push(format!("{},{k},{w:.4},{}", csv_field(&label), format_probability(op)));
                }
            }
            emit(common.out.as_deref(), |w| write_lines(&lines, w))
        }
    }
}

fn single(s: &Single, method: Method, mc: Option<(McArgs, GainMode)>) -> Result<()> {
    let scenario = Scenario::load(&s.common.scenario)?;
    let mut rows = Vec::new();
    for (label, config) in series(&scenario, &s.common.set)? {
        config.validate()?;
        let ks = users(&config, s.user)?;
        match &mc {
            Some((args, mode)) => {
                let est = estimate_op_with_mode(&config, args.trials, args.seed, args.workers, *mode)?;
                for k in ks {
                    let (lo, hi) = est.interval(k, Z_95);
                    rows.push(row(&label, &config, k, method, est.op_hat[k - 1], Some((0.5 * (hi - lo), est.trials))));
                }
            }
            None => {
                let spec = SweepSpec {
                    scenario: label.clone(),
                    variable: SweepVariable::SnrDb,
                    grid: Grid::linear(config.snr_db, config.snr_db, 1),
                    methods: vec![method],
                    trials: 0,
                    seed: 0,
                    workers: 1,
                    series: vec![(label.clone(), config.clone())],
                };
                config.check_feasible_all()?;
                rows.extend(run_sweep(&spec)?.into_iter().filter(|r| ks.contains(&r.user)));
            }
        }
    }
    emit(s.common.out.as_deref(), |w| write_csv(&rows, w))
}

fn row(label: &str, config: &SystemConfig, user: usize, method: Method, op: f64, mc: Option<(f64, u64)>) -> SweepRow {
    SweepRow {
        scenario: label.to_string(),
        variable: SweepVariable::SnrDb,
        value: config.snr_db,
        user,
        method,
        outcome: RowOutcome::Value { op, ci_halfwidth: mc.map(|m| m.0), trials: mc.map(|m| m.1) },
    }
}

fn series(scenario: &Scenario, set: &[String]) -> Result<Vec<(String, SystemConfig)>> {
    let overrides = parse_assignments(set)?;
    scenario
        .series()?
        .into_iter()
        .map(|(label, c)| Ok((label, apply_overrides(&c, &overrides)?)))
        .collect()
}

fn users(config: &SystemConfig, user: Option<usize>) -> Result<Vec<usize>> {
    match user {
        Some(k) if k >= 1 && k <= config.users() => Ok(vec![k]),
        Some(k) => Err(Error::Domain(format!("user {k} outside 1..={}", config.users()))),
        None => Ok((1..=config.users()).collect()),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_lines(lines: &[String], mut w: impl Write) -> Result<()> {
    for l in lines {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

fn emit(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)
        }
    }
}
