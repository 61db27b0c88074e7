use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qsl_cli::output::resolve_output_dir;
use qsl_cli::run::{run_experiment, run_sweep, run_trajectory, RunError, SweepKind};
use qsl_cli::ScenarioConfig;

#[derive(Parser)]
#[command(
    name = "qsl",
    version,
    about = "Speed limits on observables under spectral dephasing"
)]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic bounds along the scenario grid: trajectory.csv and summary.json.
    Trajectory { config: PathBuf },
    /// Virtual tomography experiment plus the analytic overlay.
    Experiment { config: PathBuf },
    /// Maximum bound and speed against photon number, monochromatic light.
    SweepN {
        #[arg(long)]
        kind: SweepKind,
        #[arg(long)]
        n_max: usize,
        /// Output directory (overridden by QSL_OUTPUT_DIR).
        #[arg(long, default_value = "out/sweep")]
        out: PathBuf,
    },
    /// Parse and validate a scenario file without running it.
    Validate { config: PathBuf },
}

fn load(path: &Path) -> Result<ScenarioConfig, RunError> {
    Ok(ScenarioConfig::from_file(path)?)
}

fn execute(command: Command) -> Result<(), RunError> {
    match command {
        Command::Trajectory { config } => {
            let cfg = load(&config)?;
            let dir = resolve_output_dir(&cfg.output_dir);
            let run = run_trajectory(&cfg, &dir)?;
            let s = &run.summary;
            println!(
                "{}: max |ȧ| = {:.6} at l = {:.6}, {} sandwich violations -> {}",
                s.scenario,
                s.max_speed,
                s.l_star,
                s.sandwich_violations,
                dir.display()
            );
        }
        Command::Experiment { config } => {
            let cfg = load(&config)?;
            let dir = resolve_output_dir(&cfg.output_dir);
            let run = run_experiment(&cfg, &dir)?;
            let e = &run.summary.experiment;
            println!(
                "{}: estimated max |ȧ| = {:.4} ± {:.4} at l = {:.4} (analytic {:.4}), {} points outside bounds ± 3σ -> {}",
                cfg.name,
                e.estimated_max_speed,
                e.estimated_max_speed_std,
                e.estimated_l_star,
                run.summary.analytic.max_speed,
                e.bound_excursions,
                dir.display()
            );
        }
        Command::SweepN { kind, n_max, out } => {
            let dir = resolve_output_dir(&out);
            let (rows, path) = run_sweep(kind, n_max, &dir)?;
            println!(
                "{:>2}  {:>14}  {:>14}  {:>14}",
                "N", "max bound", "ideal", "max |ȧ|"
            );
            for r in &rows {
                println!(
                    "{:>2}  {:>14.10}  {:>14.10}  {:>14.10}",
                    r.n, r.max_upper_bound, r.ideal_bound, r.max_speed
                );
            }
            println!("-> {}", path.display());
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            println!("{}: ok ({} grid points)", cfg.name, cfg.l_grid().len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
