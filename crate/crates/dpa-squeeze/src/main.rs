use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dpa_squeeze::runner::{self, ExperimentConfig, RunManifest, PRESETS};
use dpa_squeeze::Error;

#[derive(Parser)]
#[command(name = "dpa-squeeze", version, about = "Spin squeezing with a degenerate parametric amplifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a registered preset and write CSV, JSON and a manifest.
    Run(RunArgs),
    /// List registered presets.
    ListPresets,
    /// Compare the full and effective models for a preset's full-model run.
    Compare(RunArgs),
    /// Rerun from a manifest written by an earlier `run`.
    Rerun {
        manifest: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    preset: String,
    /// Parameter override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trajectory count for quantum-jump runs.
    #[arg(long)]
    traj: Option<usize>,
    /// N = 20 and 200 trajectories.
    #[arg(long)]
    quick: bool,
    /// Flat key=value file; --set entries take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig, Error> {
        let mut c = ExperimentConfig::new(self.preset);
        if let Some(path) = &self.config {
            c.load_file(path)?;
        }
        for s in &self.set {
            c.set_assignment(s)?;
        }
        c.out_dir = self.out;
        c.seed = self.seed;
        c.ntraj = self.traj;
        c.quick = self.quick;
        c.validate()?;
        Ok(c)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) => ExitCode::from(2),
                Error::Infeasible(_) => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn execute(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::ListPresets => {
            for p in PRESETS {
                println!("{:<8} {}", p.name, p.description);
            }
        }
        Command::Run(args) => report(runner::run_preset(&args.into_config()?)?),
        Command::Rerun { manifest, out } => {
            let m = RunManifest::load(&manifest)?;
            let c = runner::config_from_manifest(&m, out);
            let resolved = runner::resolve(&c)?;
            if resolved.runs() != m.resolved.as_slice() {
                return Err(Error::Usage("manifest parameters no longer resolve identically".into()));
            }
            report(runner::run_preset(&c)?)
        }
        Command::Compare(args) => {
            let cmp = runner::compare_models(&args.into_config()?)?;
            println!("{}", serde_json::to_string_pretty(&cmp)?);
        }
    }
    Ok(())
}

fn report(r: runner::PresetReport) {
    for s in &r.summary.runs {
        println!(
            "{:<24} xi2_min {:>8.3} dB at t = {:<8.2} theta {:>6.1} deg (predicted {:>6.1})",
            s.label, s.xi2_min_db, s.t_min, s.theta_at_min_deg, s.predicted_theta_deg
        );
    }
    for s in &r.summary.table {
        println!(
            "{:<20} xi2_min {:>8.3} dB at t = {:.4e} s (published {:.2} dB)",
            s.label, s.xi2_min_db, s.t_min_s, s.published_db
        );
    }
    for f in &r.files {
        println!("wrote {}", f.display());
    }
}
