use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use trajadv::controller::ControlMode;
use trajadv::harness::{self, run_simulation, SimConfig, Summary};
use trajadv::Error;

#[derive(Parser)]
#[command(
    name = "trajadv",
    version,
    about = "Assisted trajectory advancement workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop simulation and write the CSV log and plots.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to `output_dir` in the config, then `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        advancement: Option<Toggle>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Run the configured (assisted) scenario and the same scenario without
    /// hand pulses, and report the difference.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// When given, artifacts go to `<out>/assisted` and `<out>/unassisted`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Parse and validate a configuration file.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    CancelAll,
    RetainHelpful,
}

impl From<Mode> for ControlMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::CancelAll => ControlMode::CancelAll,
            Mode::RetainHelpful => ControlMode::RetainHelpful,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(path: &Path, mode: Option<Mode>) -> Result<SimConfig, Error> {
    let mut config = SimConfig::load(path)?;
    if let Some(m) = mode {
        config.controller.mode = m.into();
    }
    Ok(config)
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Run {
            config,
            out,
            advancement,
            mode,
        } => {
            let mut cfg = load(&config, mode)?;
            if let Some(a) = advancement {
                cfg.advancement = matches!(a, Toggle::On);
            }
            let dir = out
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            let run = run_simulation(&cfg)?;
            let written = harness::write_artifacts(&run, &cfg, &dir)?;
            print_summary("run", &run.summary);
            for p in written {
                println!("wrote {}", p.display());
            }
        }
        Command::Compare { config, out, mode } => {
            let assisted = load(&config, mode)?;
            let unassisted = assisted.unassisted();
            let (a, u) = std::thread::scope(|s| {
                let ha = s.spawn(|| run_simulation(&assisted));
                let hu = s.spawn(|| run_simulation(&unassisted));
                (
                    ha.join().expect("assisted run panicked"),
                    hu.join().expect("unassisted run panicked"),
                )
            });
            let (a, u) = (a?, u?);
            if let Some(dir) = out {
                harness::write_artifacts(&a, &assisted, &dir.join("assisted"))?;
                harness::write_artifacts(&u, &unassisted, &dir.join("unassisted"))?;
            }
            print_summary("assisted", &a.summary);
            print_summary("unassisted", &u.summary);
            println!(
                "delta    final_psi {:+.6}  max_psi_dot {:+.6}  time_to_goal {}",
                a.summary.final_psi - u.summary.final_psi,
                a.summary.max_psi_dot - u.summary.max_psi_dot,
                match (a.summary.time_to_goal, u.summary.time_to_goal) {
                    (Some(x), Some(y)) => format!("{:+.3} s", x - y),
                    _ => "n/a".to_string(),
                }
            );
        }
        Command::ValidateConfig { config } => {
            let cfg = SimConfig::load(&config)?;
            harness::sim::initial_state(&cfg)?;
            println!(
                "ok: {} model, {} steps of {} s, mode {}, advancement {}, {} pulse(s), reference ends at psi = {}",
                cfg.model.kind().name(),
                cfg.steps(),
                cfg.dt,
                cfg.controller.mode.as_str(),
                if cfg.advancement { "on" } else { "off" },
                cfg.profile.pulses().len(),
                cfg.curve.psi_end()
            );
        }
    }
    Ok(())
}

fn print_summary(label: &str, s: &Summary) {
    let ttg = s
        .time_to_goal
        .map_or_else(|| "not reached".to_string(), |t| format!("{t:.3} s"));
    println!(
        "{label:<10} steps {}  final_psi {:.6}  max_psi_dot {:.6}  time_to_goal {ttg}",
        s.steps, s.final_psi, s.max_psi_dot
    );
    for (phase, t) in &s.transitions {
        println!("{:<10} entered {} at t = {t:.3} s", "", phase.label());
    }
}
