//! Command line front end. Exits with status 0 iff every pass criterion of
//! the requested run holds.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use kinlab::harness::checks::{
    check_d0d1, check_flux_gamma, check_psi_pair, parse_params, run_collapse_oracle,
    run_riemann_oracle, CollapseParams, PsiParams, RiemannParams,
};
use kinlab::harness::{emit_csv, parse_config, run_and_write, Experiment, ExperimentReport};
use kinlab::Result;

#[derive(Parser)]
#[command(
    name = "kinlab",
    version,
    about = "Stochastic conservation law experiments"
)]
struct Cli {
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of Monte Carlo paths; overrides the config.
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble and write per-path kinetic data and checkpoints.
    Simulate { config: PathBuf },
    /// Run one of the ensemble experiments.
    Experiment {
        kind: ExperimentKind,
        config: PathBuf,
    },
    /// Structural checks of the model ingredients.
    Check { kind: CheckKind, config: PathBuf },
    /// Closed-form oracles; params is inline JSON or a JSON file.
    Oracle {
        kind: OracleKind,
        #[arg(default_value = "{}")]
        params: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    Contraction,
    Viscosity,
    Regularity,
    Energy,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    D0d1,
    Gamma,
    Psipair,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Collapse,
    Riemann,
}

fn report(rep: &ExperimentReport) {
    for (k, v) in &rep.details {
        println!("{k} = {v}");
    }
    for f in &rep.failures {
        println!("failed: {f}");
    }
    println!(
        "{} {}",
        rep.experiment,
        if rep.pass { "PASS" } else { "FAIL" }
    );
}

fn write_standalone(rep: &ExperimentReport, out: Option<&Path>) -> Result<()> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        emit_csv(&rep.table, &dir.join(format!("{}.csv", rep.experiment)))?;
        std::fs::write(
            dir.join(format!("{}_report.json", rep.experiment)),
            serde_json::to_string_pretty(rep)?,
        )?;
    } else {
        print!("{}", rep.table.to_csv_string()?);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let rep = match &cli.command {
        Command::Simulate { config } => ensemble(&cli, Experiment::Simulate, config)?,
        Command::Experiment { kind, config } => {
            let e = match kind {
                ExperimentKind::Contraction => Experiment::Contraction,
                ExperimentKind::Viscosity => Experiment::Viscosity,
                ExperimentKind::Regularity => Experiment::Regularity,
                ExperimentKind::Energy => Experiment::Energy,
            };
            ensemble(&cli, e, config)?
        }
        Command::Check { kind, config } => {
            let rep = match kind {
                CheckKind::D0d1 => check_d0d1(&parse_config(config)?)?,
                CheckKind::Gamma => check_flux_gamma(&parse_config(config)?)?,
                CheckKind::Psipair => {
                    let p: PsiParams = parse_params(&config.to_string_lossy())?;
                    check_psi_pair(&p)?
                }
            };
            write_standalone(&rep, cli.out.as_deref())?;
            rep
        }
        Command::Oracle { kind, params } => {
            let rep = match kind {
                OracleKind::Collapse => {
                    run_collapse_oracle(&parse_params::<CollapseParams>(params)?)?
                }
                OracleKind::Riemann => run_riemann_oracle(&parse_params::<RiemannParams>(params)?)?,
            };
            write_standalone(&rep, cli.out.as_deref())?;
            rep
        }
    };
    report(&rep);
    Ok(rep.pass)
}

fn ensemble(cli: &Cli, e: Experiment, config: &Path) -> Result<ExperimentReport> {
    let mut cfg = parse_config(config)?;
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(p) = cli.paths {
        cfg.ensemble_size = p;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    let out = cfg.output_dir.clone();
    let rep = run_and_write(e, &cfg, cli.threads, &out)?;
    println!("output: {}", out.display());
    Ok(rep)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
