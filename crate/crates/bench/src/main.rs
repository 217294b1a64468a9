use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lnmusic::io::{crlb_csv, crlb_table, format_control_matrix, read_control_matrix, spectrum_csv, trace_csv};
use lnmusic::report::write_files;
use lnmusic::scan::{epsilon_scan_plan, rho_zeta_csv, rho_zeta_scan};
use lnmusic::{run_sweep, spectrum_run, BenchError, ExperimentPlan};

#[derive(Parser)]
#[command(
    name = "lnmusic",
    version,
    about = "Monte Carlo benchmarks for RIS-aided robust DOA estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment plan (TOML); the built-in SNR sweep when omitted.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Overrides the plan's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores); overrides the plan.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

impl Common {
    fn plan(&self) -> Result<ExperimentPlan, BenchError> {
        let mut plan = match &self.plan {
            Some(p) => ExperimentPlan::load(p)?,
            None => ExperimentPlan::default(),
        };
        if let Some(s) = self.seed {
            plan.base_seed = s;
        }
        if let Some(w) = self.workers {
            plan.workers = w;
        }
        plan.validate()?;
        Ok(plan)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every trial of the plan and write per-trial and summary CSVs.
    Sweep(Common),
    /// Scan ε at each SNR and report the best value per SNR.
    ScanEps(Common),
    /// Scan (ρ, ζ) pairs at each SNR.
    ScanRhoZeta(Common),
    /// Dump one trial's spatial spectrum, solver trace and control matrix.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Use the ROSM-selected control matrix.
        #[arg(long)]
        rosm: bool,
        /// Replay with this control matrix instead.
        #[arg(long)]
        g_file: Option<PathBuf>,
    },
    /// Write the CRLB against SNR.
    Crlb(Common),
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn out(dir: &Path, plan: &ExperimentPlan, suffix: &str) -> PathBuf {
    dir.join(format!("{}.{suffix}", plan.name))
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Sweep(c) => {
            let plan = c.plan()?;
            let report = run_sweep(&plan)?;
            println!("{}", report.aggregates_csv());
            report_written(&report.write(&c.out_dir)?);
        }
        Command::ScanEps(c) => {
            let plan = c.plan()?;
            let scan = epsilon_scan_plan(&plan)?;
            print!("{}", scan.best_csv());
            report_written(&write_files(
                &c.out_dir,
                &[
                    (out(&c.out_dir, &plan, "eps-scan.csv"), scan.cells_csv()),
                    (out(&c.out_dir, &plan, "eps-best.csv"), scan.best_csv()),
                ],
            )?);
        }
        Command::ScanRhoZeta(c) => {
            let plan = c.plan()?;
            let csv = rho_zeta_csv(&rho_zeta_scan(&plan)?);
            print!("{csv}");
            report_written(&write_files(
                &c.out_dir,
                &[(out(&c.out_dir, &plan, "rho-zeta.csv"), csv)],
            )?);
        }
        Command::Spectrum { common, rosm, g_file } => {
            let plan = common.plan()?;
            let g = g_file.as_deref().map(read_control_matrix).transpose()?;
            let seed = common.seed.unwrap_or(plan.base_seed);
            let run = spectrum_run(&plan, seed, rosm, g)?;
            println!("truth_deg: {:?}", run.truth);
            println!("peaks_deg: {:?}", run.spectrum.peaks);
            report_written(&write_files(
                &common.out_dir,
                &[
                    (out(&common.out_dir, &plan, "spectrum.csv"), spectrum_csv(&run.spectrum)),
                    (out(&common.out_dir, &plan, "trace.csv"), trace_csv(&run.solution.trace)),
                    (out(&common.out_dir, &plan, "g.txt"), format_control_matrix(&run.g)),
                ],
            )?);
        }
        Command::Crlb(c) => {
            let plan = c.plan()?;
            let csv = crlb_csv(&crlb_table(&plan)?);
            print!("{csv}");
            report_written(&write_files(&c.out_dir, &[(out(&c.out_dir, &plan, "crlb.csv"), csv)])?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lnmusic: {e}");
            match e {
                BenchError::Plan(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
