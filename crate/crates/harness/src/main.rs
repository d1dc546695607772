use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hhl_core::hhl::BackendKind;
use hhl_harness::output::{emit_figures_data, load_report, ramsey_csv, write_metadata};
use hhl_harness::{ramsey_report, run_pipeline, ExperimentConfig, HarnessError, ReportBundle};

#[derive(Parser)]
#[command(name = "hhlsim", version, about = "Simulate the four-qubit 2x2 HHL solver and its tomography")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: all inputs, state and process tomography, figure data.
    Run(Common),
    /// Ramsey calibration of the Q3-Q4 CZ only.
    Ramsey(Common),
    /// Pipeline with only the process-tomography outputs printed.
    Qpt(Common),
    /// Re-emit figure data from an existing report.json in the output directory.
    Report(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_backend)]
    backend: Option<BackendKind>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_backend(s: &str) -> Result<BackendKind, String> {
    match s {
        "ideal" => Ok(BackendKind::Ideal),
        "device" => Ok(BackendKind::Device),
        "device-noisy" => Ok(BackendKind::DeviceNoisy),
        _ => Err(format!("unknown backend {s:?} (ideal, device, device-noisy)")),
    }
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(b) = self.backend {
            cfg.backend = b;
        }
        if let Some(s) = self.shots {
            cfg.shots = s;
            cfg.exact = false;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn summary(b: &ReportBundle) {
    println!("backend {} seed {}", b.backend.name(), b.seed);
    for r in &b.records {
        println!(
            "  j={:2}  <X>={:+.4} <Y>={:+.4} <Z>={:+.4}  F={:.4}±{:.4}  p={:.4}",
            r.index, r.expectations[0], r.expectations[1], r.expectations[2], r.fidelity, r.fidelity_std, r.success_probability
        );
    }
    let p = &b.process;
    println!("process fidelity {:.4}±{:.4}  Tr chi {:.4} (ideal {:.4})", p.fidelity, p.fidelity_std, p.trace, p.ideal_trace);
    if let Some(r) = &b.ramsey {
        println!("ramsey phase difference {:.4} rad", r.phase_difference);
    }
}

fn execute(cmd: Command) -> Result<(), HarnessError> {
    match cmd {
        Command::Run(c) => {
            let cfg = c.config()?;
            let run = run_pipeline(&cfg)?;
            for p in emit_figures_data(&run.bundle, Some(&run.dataset), &cfg.output)? {
                eprintln!("wrote {}", p.display());
            }
            write_metadata(&run.bundle, &cfg.output)?;
            summary(&run.bundle);
        }
        Command::Qpt(c) => {
            let cfg = c.config()?;
            let run = run_pipeline(&cfg)?;
            emit_figures_data(&run.bundle, Some(&run.dataset), &cfg.output)?;
            write_metadata(&run.bundle, &cfg.output)?;
            let p = &run.bundle.process;
            println!("process fidelity {:.4}±{:.4}", p.fidelity, p.fidelity_std);
            println!("projected fidelity {:.4}", p.projected_fidelity);
            println!("Tr chi {:.4} (ideal {:.4}), condition {:.2}", p.trace, p.ideal_trace, p.condition);
        }
        Command::Ramsey(c) => {
            let cfg = c.config()?;
            let r = ramsey_report(&cfg)?;
            std::fs::create_dir_all(&cfg.output)?;
            std::fs::write(cfg.output.join("ramsey.csv"), ramsey_csv(&r))?;
            println!(
                "Q{}-Q{} CZ: phases {:.4} / {:.4}, visibility {:.4} / {:.4}, difference {:.4} rad",
                r.control + 1,
                r.target + 1,
                r.fits[0].phase,
                r.fits[1].phase,
                r.fits[0].visibility,
                r.fits[1].visibility,
                r.phase_difference
            );
        }
        Command::Report(c) => {
            let out = match (&c.out, &c.config) {
                (Some(o), _) => o.clone(),
                (None, Some(p)) => ExperimentConfig::from_file(p)?.output,
                (None, None) => ExperimentConfig::default().output,
            };
            let bundle = load_report(&out.join("report.json"))?;
            emit_figures_data(&bundle, None, &out)?;
            summary(&bundle);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hhlsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
