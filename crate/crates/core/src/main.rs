use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stq::experiments::{
    fig_preset, oracles, run_sweep, run_trajectory, write_sweep, write_trajectory, ExperimentConfig, PointOutcome,
};
use stq::redfield::IntegratorConfig;
use stq::{Error, Result};

/// Dissipative entanglement dynamics of two capacitively coupled S-T0 qubits.
#[derive(Parser)]
#[command(name = "stq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output root directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the RK4 step (ns).
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Use the full memory window from t = 0.
    #[arg(long, global = true)]
    markov: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single trajectory from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a parameter sweep from a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a figure preset (fig1 .. fig6).
    Fig { name: String },
    /// Run the closed-form oracle suite.
    Validate,
}

impl Common {
    fn apply(&self, integrator: &mut IntegratorConfig) {
        if let Some(dt) = self.dt {
            integrator.dt = dt;
            integrator.kernel_dtau = integrator.kernel_dtau.min(dt);
        }
        if self.markov {
            integrator.markov_mode = true;
        }
    }

    fn load(&self, path: &PathBuf) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = ExperimentConfig::from_json(&text)?;
        self.apply(&mut cfg.integrator);
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_root(&self, cfg: &ExperimentConfig) -> PathBuf {
        cfg.output.clone().unwrap_or_else(|| self.out.clone())
    }
}

fn report_sweep(cfg: &ExperimentConfig, outcomes: &[PointOutcome], common: &Common) -> Result<()> {
    let dir = write_sweep(&common.out_root(cfg), cfg, outcomes)?;
    println!("{:<28} {:>10} {:>12} {:>12}", "point", "max_ddse", "argmax_ns", "null_from_ns");
    let mut failed = None;
    for o in outcomes {
        match &o.result {
            Ok(r) => {
                let s = r.summary;
                let null = s.null_from.map(|t| format!("{t}")).unwrap_or_else(|| "-".into());
                println!("{:<28} {:>10.5} {:>12} {:>12}", o.label(), s.max_ddse, s.argmax_t, null);
            }
            Err(e) => {
                println!("{:<28} FAILED: {e}", o.label());
                failed = Some(e.clone());
            }
        }
    }
    println!("wrote {}", dir.display());
    match failed {
        Some(e) => Err(Error::NumericalFailure(format!("at least one sweep point failed: {e}"))),
        None => Ok(()),
    }
}

fn execute(cli: Cli) -> Result<()> {
    let common = &cli.common;
    if let Some(0) = common.threads {
        return Err(Error::InvalidConfig("--threads must be at least 1".into()));
    }
    match &cli.command {
        Command::Run { config } => {
            let cfg = common.load(config)?;
            let record = run_trajectory(&cfg)?;
            let dir = write_trajectory(&common.out_root(&cfg), &record)?;
            let s = record.summary;
            println!("max_ddse {:.5} at {} ns; null from {:?} ns", s.max_ddse, s.argmax_t, s.null_from);
            println!("wrote {}", dir.display());
            Ok(())
        }
        Command::Sweep { config } => {
            let cfg = common.load(config)?;
            let outcomes = run_sweep(&cfg, common.threads)?;
            report_sweep(&cfg, &outcomes, common)
        }
        Command::Fig { name } => {
            let mut cfg = fig_preset(name)?;
            common.apply(&mut cfg.integrator);
            cfg.validate()?;
            let outcomes = run_sweep(&cfg, common.threads)?;
            report_sweep(&cfg, &outcomes, common)
        }
        Command::Validate => {
            let mut integrator = IntegratorConfig::default();
            common.apply(&mut integrator);
            integrator.validate()?;
            let checks = oracles::run_all(&integrator)?;
            let mut ok = true;
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("{tag} {:<55} error {:.3e} (tolerance {:.0e})", c.name, c.max_error, c.tolerance);
                ok &= c.passed;
            }
            if ok {
                Ok(())
            } else {
                Err(Error::NumericalFailure("oracle suite failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
