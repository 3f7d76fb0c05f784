//! `kbc`: solve, simulate and certify privacy-aware beauty contest equilibria.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use kbc_core::{FormulaSet, PrivacyMeasure};

use config::{ExperimentConfig, FamilyName, Format, SweepAxis};
use output::Document;

#[derive(Parser)]
#[command(name = "kbc", version, about = "Privacy-aware Keynesian beauty contest lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Closed-form equilibrium, oracle residuals and prices of privacy.
    Solve,
    /// Monte Carlo run of the equilibrium (or overridden) profile.
    Simulate,
    /// Search for profitable unilateral deviations.
    Deviate,
    /// Agents' and aggregator's price of privacy.
    Pop,
    /// Closed-form quantities over a grid of parameters.
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Simulate => "simulate",
            Command::Deviate => "deviate",
            Command::Pop => "pop",
            Command::Sweep => "sweep",
        }
    }

    fn default_format(self) -> Format {
        match self {
            Command::Sweep => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Args)]
struct Options {
    /// JSON config file, or an earlier output to re-run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Never changes the output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Number of players.
    #[arg(long, global = true, conflicts_with = "continuum")]
    n: Option<u32>,
    /// Continuum of players.
    #[arg(long, global = true)]
    continuum: bool,
    #[arg(long = "sigma2-x", global = true)]
    sigma2_x: Option<f64>,
    #[arg(long = "sigma2-y", global = true)]
    sigma2_y: Option<f64>,
    #[arg(long, global = true, value_parser = parse_measure)]
    measure: Option<PrivacyMeasure>,
    #[arg(long, global = true, value_parser = parse_formulas)]
    formulas: Option<FormulaSet>,
    /// Noise family (the entropy measure always uses Gaussian noise in
    /// equilibrium).
    #[arg(long, global = true, value_enum)]
    family: Option<FamilyName>,
    /// Upper atom of two-point noise before centring.
    #[arg(long = "two-point-high", global = true)]
    two_point_high: Option<f64>,
    /// Probability of the upper atom of two-point noise.
    #[arg(long = "two-point-prob", global = true)]
    two_point_prob: Option<f64>,
    /// Weight on the private signal instead of the equilibrium one.
    #[arg(long, global = true)]
    kappa: Option<f64>,
    /// Noise variance instead of the equilibrium one.
    #[arg(long, global = true)]
    nu: Option<f64>,
    /// True state the simulation conditions on.
    #[arg(long, global = true, allow_hyphen_values = true)]
    s: Option<f64>,
    #[arg(long, global = true)]
    replicates: Option<u64>,
    /// Agents the aggregator observes.
    #[arg(long = "n-obs", global = true)]
    n_obs: Option<u64>,
    /// Sweep axis `name=v1,v2,...`; repeat for a Cartesian grid.
    #[arg(long, global = true, value_parser = SweepAxis::parse)]
    sweep: Vec<SweepAxis>,
}

fn parse_measure(s: &str) -> Result<PrivacyMeasure, String> {
    PrivacyMeasure::ALL
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| format!("expected precision or entropy, got `{s}`"))
}

fn parse_formulas(s: &str) -> Result<FormulaSet, String> {
    [FormulaSet::Paper, FormulaSet::Consistent]
        .into_iter()
        .find(|f| f.name() == s)
        .ok_or_else(|| format!("expected paper or consistent, got `{s}`"))
}

impl Options {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! overlay {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { c.$field = v; })*
            };
        }
        overlay!(alpha, beta, sigma2_x, sigma2_y, measure, formulas, family, two_point_high, two_point_prob, s, replicates);
        macro_rules! overlay_some {
            ($($field:ident),*) => {
                $(if self.$field.is_some() { c.$field = self.$field; })*
            };
        }
        overlay_some!(seed, kappa, nu, n_obs, format, n);
        if self.continuum {
            c.n = None;
        }
        if !self.sweep.is_empty() {
            c.sweep = self.sweep.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: &Cli) -> Result<()> {
    let mut cfg = cli.options.resolve()?;
    let format = cfg.format.unwrap_or(cli.command.default_format());
    cfg.format = Some(format);
    let body = match cli.command {
        Command::Solve => commands::solve(&cfg)?,
        Command::Simulate => commands::simulate(&cfg)?,
        Command::Deviate => commands::deviate(&cfg)?,
        Command::Pop => commands::pop(&cfg)?,
        Command::Sweep => commands::sweep(&cfg)?,
    };
    let mut notes = vec![commands::FORMULA_NOTE.to_string()];
    if matches!(cli.command, Command::Deviate) {
        notes.push(commands::DEVIATION_NOTE.to_string());
    }
    let doc = Document {
        command: cli.command.name(),
        config: serde_json::to_value(&cfg)?,
        notes,
        body,
    };
    let text = match format {
        Format::Json => doc.to_json(),
        Format::Csv => doc.to_csv(),
    };
    match &cli.options.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.options.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start {threads} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
