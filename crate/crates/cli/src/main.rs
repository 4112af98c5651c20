use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use noticescope::filterlist::load_list;
use noticescope::harvest::{run_crawl, CrawlConfig};
use noticescope::inference::{parse_formula, preset, FitOptions, ObservationRow};
use noticescope::noticemetrics::{measure_run, read_observations, write_observations};
use noticescope::report::{evaluate, fit_models, parse_truth, run_pipeline, write_reports};

/// Cookie notice crawling, measurement and analysis.
#[derive(Parser)]
#[command(name = "noticescope", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a cosmetic filter list and print line accounting as JSON.
    ParseFilters {
        file: PathBuf,
        #[arg(long)]
        stats_json: Option<PathBuf>,
    },
    /// Fetch every site from every vantage point.
    Crawl {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        resume: bool,
    },
    /// Turn a crawl run into one observation per successful fetch.
    Measure {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a logit model, or rank a preset family of models by AIC.
    Fit {
        #[arg(long)]
        observations: PathBuf,
        /// Preset name (`table3`) or a formula such as `banner_exists ~ TLD + VPN_EU`.
        #[arg(long)]
        model: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit heatmaps, the per-TLD table and scatter data.
    Report {
        #[arg(long)]
        observations: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        include_com: bool,
    },
    /// Score detector output against hand labels.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Crawl, measure, fit and report in one run directory.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::ParseFilters { file, stats_json } => {
            let bytes = fs::read(&file).with_context(|| format!("reading {}", file.display()))?;
            let set = load_list(&String::from_utf8_lossy(&bytes));
            match stats_json {
                Some(p) => write_json(&p, &set.stats)?,
                None => println!("{}", serde_json::to_string(&set.stats)?),
            }
            eprintln!(
                "{} hide rules, list version {:?}",
                set.hide_rule_count(),
                set.source_version
            );
        }
        Command::Crawl {
            config,
            out,
            resume,
        } => {
            let config = CrawlConfig::load(&config)?;
            let manifest = run_crawl(&config, &out, resume)?;
            println!("{}", serde_json::to_string_pretty(&manifest.summary)?);
        }
        Command::Measure { run, out } => {
            let obs = measure_run(&run)?;
            write_observations(&out, &obs).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("{} observations", obs.len());
        }
        Command::Fit {
            observations,
            model,
            out,
        } => {
            let specs = match preset(&model) {
                Some(specs) => specs,
                None => vec![parse_formula(&model)?],
            };
            let obs = read_observations(&observations)?;
            let rows: Vec<ObservationRow> = obs.iter().map(ObservationRow::from).collect();
            let report = fit_models(&rows, &specs, FitOptions::default())?;
            write_json(&out, &report)?;
        }
        Command::Report {
            observations,
            out,
            include_com,
        } => {
            let obs = read_observations(&observations)?;
            for p in write_reports(&obs, &out, include_com)? {
                println!("{}", p.display());
            }
        }
        Command::Evaluate { predictions, truth } => {
            let obs = read_observations(&predictions)?;
            let text = fs::read_to_string(&truth)
                .with_context(|| format!("reading {}", truth.display()))?;
            let eval = evaluate(&obs, &parse_truth(&text)?);
            println!("{}", serde_json::to_string_pretty(&eval)?);
            if let Some(e) = eval.error {
                bail!(e);
            }
        }
        Command::Pipeline { config, out } => {
            let config = CrawlConfig::load(&config)?;
            let manifest = run_pipeline(&config, &out)?;
            for a in &manifest.artifacts {
                println!("{}  {}", a.sha256, a.path);
            }
        }
    }
    Ok(())
}
