use std::fs;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use signed_consensus::config::load;
use signed_consensus::env::Assumption;
use signed_consensus::harness::{run_experiment_with, ConstantsReport, Execution, SequenceStats};
use signed_consensus::trajectory::Trajectory;
use signed_consensus::{preset, ConfigError, ConfigFile, ExperimentConfig, ExperimentSummary, Model, PresetName, VerdictKind};

const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_CONFIG: u8 = 65;
const EXIT_IO: u8 = 74;

/// Monte-Carlo simulator for consensus over signed random networks.
#[derive(Debug, Parser)]
#[command(name = "signed-consensus", version)]
struct Cli {
    /// Only print errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write summary.json plus per-trial CSVs.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Run trials one after another instead of in parallel.
        #[arg(long)]
        sequential: bool,
    },
    /// Write a preset's config file for editing.
    Preset {
        name: PresetName,
        /// Directory to write `<name>.toml` into; prints to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report which connectivity and sampling assumptions the schedule meets.
    Check {
        #[command(flatten)]
        source: Source,
    },
    /// Print the convergence constants for the configuration.
    Constants {
        #[command(flatten)]
        source: Source,
    },
}

#[derive(Debug, Args)]
#[group(skip)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["config", "preset"])))]
struct Source {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset name.
    #[arg(long)]
    preset: Option<PresetName>,
    /// Override a config value, e.g. `env.d.c=0.3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug)]
enum Failure {
    Config(ConfigError),
    Io(PathBuf, io::Error),
    Check,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl Source {
    fn load(&self) -> Result<ExperimentConfig, ConfigError> {
        let (mut file, base) = match (&self.config, self.preset) {
            (Some(path), _) => (load(path, &self.overrides)?, path.parent().unwrap_or(Path::new(".")).to_path_buf()),
            (None, Some(p)) => (ConfigFile::from_toml_with(&preset(p).to_toml(), &self.overrides)?, PathBuf::from(".")),
            (None, None) => unreachable!("clap requires one input"),
        };
        if let Some(t) = self.trials {
            file.trials = t;
        }
        if let Some(s) = self.seed {
            file.seed = s;
        }
        ExperimentConfig::from_file(file, &base)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let level = if cli.quiet { log::LevelFilter::Error } else { log::LevelFilter::Warn };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();

    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Io(path, e)) => {
            eprintln!("error: cannot write {}: {e}", path.display());
            ExitCode::from(EXIT_IO)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Run { source, out, sequential } => {
            let cfg = source.load()?;
            let exec = if *sequential { Execution::Sequential } else { Execution::default() };
            run(&cfg, exec, out, cli.quiet)
        }
        Command::Preset { name, out } => {
            let text = preset(*name).to_toml();
            match out {
                None => print!("{text}"),
                Some(dir) => {
                    let path = dir.join(format!("{name}.toml"));
                    fs::create_dir_all(dir).map_err(|e| Failure::Io(dir.clone(), e))?;
                    fs::write(&path, text).map_err(|e| Failure::Io(path.clone(), e))?;
                    if !cli.quiet {
                        println!("wrote {}", path.display());
                    }
                }
            }
            Ok(())
        }
        Command::Check { source } => check(source, cli.quiet),
        Command::Constants { source } => {
            let cfg = source.load()?;
            print_constants(&cfg.constants_report());
            Ok(())
        }
    }
}

fn run(cfg: &ExperimentConfig, exec: Execution, out: &Path, quiet: bool) -> Result<(), Failure> {
    if cfg.source.contrast_models {
        for model in [Model::Relative, Model::Flip] {
            let s = run_into(&cfg.with_model(model), exec, &out.join(model.to_string()))?;
            if !quiet {
                print_verdicts(&format!("{model}"), &s);
            }
        }
    } else {
        let s = run_into(cfg, exec, out)?;
        if !quiet {
            print_verdicts(&cfg.params.model.to_string(), &s);
        }
    }
    Ok(())
}

fn run_into(cfg: &ExperimentConfig, exec: Execution, dir: &Path) -> Result<ExperimentSummary, Failure> {
    let traj_dir = dir.join("trajectories");
    fs::create_dir_all(&traj_dir).map_err(|e| Failure::Io(traj_dir.clone(), e))?;
    let first_error: Mutex<Option<Failure>> = Mutex::new(None);
    let summary = run_experiment_with(cfg, exec, |traj| {
        if let Err(e) = write_trajectory(&traj_dir, traj) {
            first_error.lock().expect("error slot").get_or_insert(e);
        }
    });
    if let Some(e) = first_error.into_inner().expect("error slot") {
        return Err(e);
    }
    let path = dir.join("summary.json");
    fs::write(&path, summary.to_json() + "\n").map_err(|e| Failure::Io(path.clone(), e))?;
    Ok(summary)
}

fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<(), Failure> {
    let path = dir.join(format!("trial_{:04}.csv", traj.trial));
    let file = fs::File::create(&path).map_err(|e| Failure::Io(path.clone(), e))?;
    traj.write_csv(BufWriter::new(file)).map_err(|e| Failure::Io(path.clone(), e.into()))
}

fn print_verdicts(label: &str, s: &ExperimentSummary) {
    println!("{label}: {} trials, seed {}", s.trials, s.seed);
    for k in VerdictKind::ALL {
        let v = &s.verdicts[k.name()];
        println!("  {:<20} {:>6}  {:.4} +- {:.4}", k.name(), v.count, v.frequency, v.std_error);
    }
}

fn check(source: &Source, quiet: bool) -> Result<(), Failure> {
    let cfg = source.load()?;
    let report = match cfg.assumption_report() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("assumption check failed: {e}");
            return Err(Failure::Check);
        }
    };
    let requested = &cfg.source.theory.assumptions;
    let ok = requested.iter().all(|&a| report.holds(a));
    if !quiet {
        println!("window K = {}, windows checked {}", report.k, report.windows_checked);
        for a in Assumption::ALL {
            let mark = if requested.contains(&a) { "*" } else { " " };
            println!("{mark} {a} {}", report.holds(a));
        }
        let fmt_p = |p: Option<f64>| p.map_or("-".to_string(), |p| p.to_string());
        println!("p_lower {}  p_upper {}", fmt_p(report.p_lower), fmt_p(report.p_upper));
        let blocks: Vec<String> = report
            .partition
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        println!("positive clusters Tp = {}: {}", report.cluster_count(), blocks.join(" "));
        let names: Vec<String> = requested.iter().map(|a| a.to_string()).collect();
        println!("requested {}: {}", names.join(" "), if ok { "all hold" } else { "not all hold" });
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn print_constants(c: &ConstantsReport) {
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6e}"));
    let flag = |v: Option<bool>| v.map_or("-".to_string(), |v| v.to_string());
    println!("K {}  K0 {}  blocks {}", c.k, c.k0.map_or("-".to_string(), |k| k.to_string()), c.blocks);
    if let Some(e) = &c.error {
        println!("constants unavailable: {e}");
    }
    println!("rho_star {}  lambda_star {}", opt(c.rho_star), opt(c.lambda_star));
    println!("{:<10} {:>14} {:>14} {:>14} {:>14} {:>14}", "sequence", "first", "last", "min", "max", "sum");
    let rows: [(&str, &Option<SequenceStats>); 6] =
        [("X", &c.x), ("Y", &c.y), ("X-Y", &c.margin), ("J", &c.j), ("W", &c.w), ("W/J", &c.w_over_j)];
    for (name, stats) in rows {
        match stats {
            Some(s) => println!(
                "{name:<10} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
                s.first, s.last, s.min, s.max, s.sum
            ),
            None => println!("{name:<10} {:>14}", "-"),
        }
    }
    println!("X-Y in [0,1]          {}", flag(c.margins_in_unit_interval));
    println!("sum X-Y diverges      {}", flag(c.margin_sum_diverges));
    println!("W/J trends to zero    {}", flag(c.w_over_j_trends_to_zero));
    println!("b summable {}  partial sum {:.6}", c.b_summability.summable, c.b_summability.partial_sum);
    println!("d summable {}  partial sum {:.6}", c.d_summability.summable, c.d_summability.partial_sum);
}
