use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use rmtlab::catalog;
use rmtlab::config::{parse_config, Experiment, ExperimentConfig};

/// Random matrix experiments around the local semicircle law.
#[derive(Debug, Parser)]
#[command(name = "rmtlab", version)]
struct Cli {
    /// Experiment name, or `list` to print the catalogue.
    experiment: String,
    /// TOML configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` and RMTLAB_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long = "N")]
    n: Option<usize>,
}

fn load(cli: &Cli, experiment: Experiment) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let cfg = parse_config(&text).map_err(|e| format!("{}:\n{e}", path.display()))?;
            if cfg.experiment != experiment {
                return Err(format!("{} configures `{}`, not `{experiment}`", path.display(), cfg.experiment));
            }
            cfg
        }
        None => ExperimentConfig::default_for(experiment),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(s) = cli.samples {
        cfg.samples = s;
    }
    if let Some(n) = cli.n {
        cfg.n = n;
    }
    // re-validate after overrides
    parse_config(&cfg.canonical()).map_err(|e| format!("after command-line overrides:\n{e}"))
}

fn output_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.output_dir.clone().map(PathBuf::from))
        .or_else(|| std::env::var_os("RMTLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("rmtlab-out"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.experiment == "list" {
        for e in catalog::list_experiments() {
            println!("{:<20} {}", e.experiment.name(), e.description);
            println!("{:<20} anchor: {}", "", e.anchor);
            println!("{:<20} output: {}", "", e.schema());
        }
        return ExitCode::SUCCESS;
    }
    let Some(experiment) = Experiment::from_name(&cli.experiment) else {
        let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
        eprintln!("error: unknown experiment `{}` (expected `list` or one of: {})", cli.experiment, names.join(", "));
        return ExitCode::from(1);
    };
    let cfg = match load(&cli, experiment) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let dir = output_dir(&cli, &cfg);
    match rmtlab::run_to_dir(&cfg, cli.threads, &dir) {
        Ok((outcome, summary)) => {
            for c in &outcome.criteria {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                println!("{verdict} {}: measured {:.6e}, threshold {:.6e} ({})", c.name, c.measured, c.threshold, c.detail);
            }
            println!("wrote {} files to {} in {:.1} s", summary.files.len(), dir.display(), summary.wall_time_seconds);
            if summary.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
