use clap::{Parser, Subcommand};
use qxlab_cli::config::{Analysis, Periods, RunConfig, Source};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qxlab", version, about = "Quasi-expansion diagnostics for complex Hénon maps and polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Map description (JSON), overriding `map` in the config.
    #[arg(long, global = true)]
    map: Option<PathBuf>,
    /// Catalog file to reuse, or to create when missing.
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `N`, `A..B` or `A..=B` (inclusive).
    #[arg(long, global = true)]
    periods: Option<Periods>,
    #[arg(long, global = true)]
    t: Option<f64>,
    #[arg(long, global = true)]
    margin: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Quasi-expansion certificate over the saddle sample.
    Certify,
    /// Periodic orbit catalog.
    Saddles,
    /// Normalized unstable parametrizations and step multipliers.
    Manifold,
    /// Metric intervals and cocycles.
    Metrics,
    /// Orders, projection degrees and contact orders of jets.
    Folding,
    /// One-variable polynomial certificate and semi-hyperbolicity.
    Poly1d,
    /// Certificate verdicts over a parameter grid.
    Survey,
}

fn config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    cfg.analysis = match cli.command {
        Command::Certify => Analysis::Certify,
        Command::Saddles => Analysis::Saddles,
        Command::Manifold => Analysis::Manifold,
        Command::Metrics => Analysis::Metrics,
        Command::Folding => Analysis::Folding,
        Command::Poly1d => Analysis::Poly1d,
        Command::Survey => Analysis::Survey,
    };
    if let Some(m) = &cli.map {
        if cfg.analysis == Analysis::Poly1d {
            cfg.poly = Some(Source::Path(m.clone()));
        } else {
            cfg.map = Some(Source::Path(m.clone()));
        }
    }
    if let Some(c) = &cli.catalog {
        cfg.catalog = Some(c.clone());
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(p) = cli.periods {
        cfg.periods = p;
    }
    if let Some(t) = cli.t {
        cfg.t = t;
    }
    if let Some(m) = cli.margin {
        cfg.margin = m;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config(&cli).and_then(|cfg| qxlab_cli::execute(&cfg).map(|b| (cfg, b)));
    match result {
        Ok((cfg, b)) => {
            for name in b.files.keys() {
                println!("{}", cfg.out.join(name).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qxlab: {e:#}");
            ExitCode::FAILURE
        }
    }
}
