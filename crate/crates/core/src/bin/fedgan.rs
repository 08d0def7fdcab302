use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use fedgan_lab::cli::compare::Comparison;
use fedgan_lab::cli::config::ExperimentConfig;
use fedgan_lab::cli::grid::{image_side, read_samples_csv, render_pgm};
use fedgan_lab::cli::run::{load_report, run_experiment};
use fedgan_lab::cli::{exit_code, presets, EXIT_NOT_IMPROVED, EXIT_RUNTIME, EXIT_VALIDATION};
use fedgan_lab::Error;

#[derive(Parser)]
#[command(name = "fedgan", version, about = "Federated GAN experiments: FedGAN vs Bias-Free FedGAN")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file or preset.
    Run {
        #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Use a shipped preset instead of a config file.
        #[arg(long)]
        preset: Option<String>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override a config value, e.g. `--set federation.seed=7`.
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
        /// Train clients on separate threads.
        #[arg(long)]
        parallel: bool,
    },
    /// Compare the bias reports of two run directories (a = baseline).
    Compare { dir_a: PathBuf, dir_b: PathBuf },
    /// Render square image samples from a CSV as a PGM grid.
    Grid {
        samples: PathBuf,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// List presets, or print one.
    Presets { name: Option<String> },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION as u8 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Error>().map_or(EXIT_RUNTIME, exit_code);
            ExitCode::from(code as u8)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<i32> {
    match command {
        Command::Run {
            config,
            preset,
            out,
            overrides,
            parallel,
        } => cmd_run(config, preset, out, &overrides, parallel),
        Command::Compare { dir_a, dir_b } => cmd_compare(&dir_a, &dir_b),
        Command::Grid {
            samples,
            rows,
            cols,
            out,
        } => cmd_grid(&samples, rows, cols, &out),
        Command::Presets { name } => cmd_presets(name.as_deref()),
    }
}

fn cmd_run(
    config: Option<PathBuf>,
    preset: Option<String>,
    out: Option<PathBuf>,
    overrides: &[String],
    parallel: bool,
) -> anyhow::Result<i32> {
    let mut cfg = match (config, preset) {
        (Some(path), _) => ExperimentConfig::load(&path)?,
        (None, Some(name)) => ExperimentConfig::parse(&format!("preset = {name}\n"), &PathBuf::from("--preset"))?,
        (None, None) => unreachable!("clap requires one of --config and --preset"),
    };
    for o in overrides {
        let (field, value) = o
            .split_once('=')
            .and_then(|(f, v)| Some((f.trim().split_once('.')?, v.trim())))
            .ok_or_else(|| Error::Config(format!("--set {o:?}: expected SECTION.KEY=VALUE")))?;
        cfg.set(field.0, field.1, value)?;
    }
    if let Some(dir) = out {
        cfg.output = dir;
    }
    eprintln!("seed {}, config sha256 {}", cfg.federation.seed, cfg.hash());
    let summary = run_experiment(&cfg, parallel, &mut |line| eprintln!("{line}"))?;
    for run in &summary.runs {
        println!(
            "{}: minority_share {:.4}, balance_entropy {:.4} -> {}",
            run.algorithm.name(),
            run.bias.minority_share,
            run.bias.balance_entropy,
            run.dir.display()
        );
    }
    Ok(0)
}

fn cmd_compare(dir_a: &std::path::Path, dir_b: &std::path::Path) -> anyhow::Result<i32> {
    let cmp = Comparison::new(load_report(dir_a)?, load_report(dir_b)?)?;
    print!("{}", cmp.to_table());
    if cmp.improved() {
        Ok(0)
    } else {
        println!("minority share did not improve");
        Ok(EXIT_NOT_IMPROVED)
    }
}

fn cmd_grid(samples: &std::path::Path, rows: usize, cols: usize, out: &std::path::Path) -> anyhow::Result<i32> {
    let text = fs::read_to_string(samples).with_context(|| format!("reading {}", samples.display()))?;
    let m = read_samples_csv(&text, samples)?;
    let side = image_side(m.cols())?;
    let pgm = render_pgm(&m, side, rows, cols)?;
    fs::write(out, pgm).with_context(|| format!("writing {}", out.display()))?;
    println!("{}x{} grid of {side}x{side} tiles -> {}", rows, cols, out.display());
    Ok(0)
}

fn cmd_presets(name: Option<&str>) -> anyhow::Result<i32> {
    match name {
        None => {
            for n in presets::names() {
                println!("{n}");
            }
        }
        Some(n) => {
            let text = presets::preset(n).ok_or_else(|| {
                Error::Config(format!("unknown preset {n:?}; available: {}", presets::names().join(", ")))
            })?;
            print!("{text}");
        }
    }
    Ok(0)
}
