use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use trustgrid_core::{Group, TrustSeries};
use trustgrid_pipeline::ingest::to_export_lines;
use trustgrid_pipeline::render::ERROR_FILE;
use trustgrid_pipeline::{
    build_series, exclude, export_text, ingest_str, render_tables, run_analysis, simulate_cohort,
    write_atomic, AnalysisConfig, AnalysisReport, CohortConfig, ExclusionReport,
    ExclusionThresholds, SessionData,
};
use trustgrid_server::{ExportFilter, RandomIds, ServerConfig, Service, Store, SystemClock};

/// Trust experiment pipeline: bot cohorts, exclusion, series, models, tables.
#[derive(Debug, Parser)]
#[command(name = "trustgrid", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Server configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Session store directory.
    #[arg(long, global = true, env = "TRUSTGRID_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Experiment seed shared by all sessions.
    #[arg(long, global = true, env = "TRUSTGRID_EXPERIMENT_SEED")]
    seed: Option<u64>,
    /// Directory for outputs.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Read sessions from this export file instead of the store.
    #[arg(long, global = true)]
    export: Option<PathBuf>,
    #[arg(long, global = true)]
    max_gap_minutes: Option<f64>,
    #[arg(long, global = true)]
    max_total_estimate: Option<u32>,
    #[arg(long, global = true)]
    unreasonable_trials: Option<usize>,
    /// Largest AR and MA order in the AIC grid.
    #[arg(long, global = true, default_value_t = 4)]
    max_order: usize,
    /// Seed of the optimiser's random restarts.
    #[arg(long, global = true, default_value_t = 0)]
    fit_seed: u64,
    /// Log at debug level.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse an export and summarise its sessions.
    Ingest,
    /// Apply exclusion rules; writes kept.ndjson and exclusions.json.
    Exclude,
    /// Build the group-mean trust series; writes series.json.
    Series,
    /// Fit all models; writes report.json.
    Analyze,
    /// Fit all models and write tables and figure data.
    Render,
    /// Play a bot cohort into the store; writes export.ndjson.
    Simulate {
        #[arg(long, default_value_t = 20)]
        sessions: usize,
        #[arg(long, default_value_t = 1)]
        cohort_seed: u64,
        /// Include frame logs in the written export.
        #[arg(long)]
        frames: bool,
    },
    /// Run the experiment server.
    Serve {
        #[arg(long)]
        host: Option<String>,
        #[arg(long)]
        port: Option<u16>,
    },
}

impl Global {
    fn server_config(&self) -> Result<ServerConfig> {
        let mut cfg = ServerConfig::load(self.config.as_deref())?;
        if let Some(d) = &self.data_dir {
            cfg.data_dir = d.clone();
        }
        if let Some(s) = self.seed {
            cfg.experiment_seed = s;
        }
        Ok(cfg)
    }

    fn thresholds(&self) -> ExclusionThresholds {
        let mut th = ExclusionThresholds::default();
        if let Some(v) = self.max_gap_minutes {
            th.max_gap_minutes = v;
        }
        if let Some(v) = self.max_total_estimate {
            th.max_total_estimate = v;
        }
        if let Some(v) = self.unreasonable_trials {
            th.unreasonable_trials = v;
        }
        th
    }

    fn analysis(&self) -> AnalysisConfig {
        let mut cfg = AnalysisConfig {
            p_values: (0..=self.max_order).collect(),
            q_values: (0..=self.max_order).collect(),
            ..AnalysisConfig::default()
        };
        cfg.fit.seed = self.fit_seed;
        cfg
    }

    fn sessions(&self) -> Result<Vec<SessionData>> {
        let text = match &self.export {
            Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
            None => {
                let cfg = self.server_config()?;
                let store = Store::open(&cfg.data_dir)?;
                let svc = Service::open(cfg, store, Arc::new(SystemClock), Arc::new(RandomIds))?;
                let mut buf = Vec::new();
                svc.write_export(
                    &ExportFilter {
                        frames: Some(false),
                        ..ExportFilter::default()
                    },
                    &mut buf,
                )?;
                String::from_utf8(buf)?
            }
        };
        Ok(ingest_str(&text)?)
    }

    fn kept(&self) -> Result<(Vec<SessionData>, Vec<ExclusionReport>)> {
        let th = self.thresholds();
        tracing::info!(?th, "exclusion thresholds");
        Ok(exclude(self.sessions()?, &th))
    }

    fn series(&self) -> Result<[TrustSeries; 2]> {
        let (kept, _) = self.kept()?;
        let world = self.server_config()?.world;
        Ok([
            build_series(&kept, Group::G0, &world)?,
            build_series(&kept, Group::G1, &world)?,
        ])
    }

    fn report(&self) -> Result<AnalysisReport> {
        let [s0, s1] = self.series()?;
        Ok(run_analysis(&s0, &s1, &self.analysis())?)
    }

    fn write_json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        fs::create_dir_all(&self.out)?;
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        Ok(write_atomic(&self.out, name, &bytes)?)
    }
}

#[derive(Serialize)]
struct IngestSummary {
    sessions: usize,
    synthetic: usize,
    trials: usize,
    by_group: Vec<(Group, usize)>,
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match cli.command {
        Command::Ingest => {
            let sessions = g.sessions()?;
            let summary = IngestSummary {
                sessions: sessions.len(),
                synthetic: sessions.iter().filter(|s| s.session.synthetic).count(),
                trials: sessions.iter().map(|s| s.trials.len()).sum(),
                by_group: Group::ALL
                    .iter()
                    .map(|&grp| {
                        (
                            grp,
                            sessions.iter().filter(|s| s.session.group == grp).count(),
                        )
                    })
                    .collect(),
            };
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Exclude => {
            let (kept, reports) = g.kept()?;
            fs::create_dir_all(&g.out)?;
            write_atomic(&g.out, "kept.ndjson", to_export_lines(&kept)?.as_bytes())?;
            let path = g.write_json("exclusions.json", &reports)?;
            println!(
                "kept {} sessions, excluded {} ({})",
                kept.len(),
                reports.len(),
                path.display()
            );
        }
        Command::Series => {
            let path = g.write_json("series.json", &g.series()?)?;
            println!("{}", path.display());
        }
        Command::Analyze => {
            let path = g.write_json("report.json", &g.report()?)?;
            println!("{}", path.display());
        }
        Command::Render => {
            // any failure leaves an explicit error file instead of stale tables
            let files = g.report().and_then(|r| Ok(render_tables(&r, &g.out)?));
            match files {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                }
                Err(e) => {
                    if !g.out.join(ERROR_FILE).exists() {
                        fs::create_dir_all(&g.out)?;
                        write_atomic(&g.out, ERROR_FILE, format!("{e:#}\n").as_bytes())?;
                    }
                    return Err(e);
                }
            }
        }
        Command::Simulate {
            sessions,
            cohort_seed,
            frames,
        } => {
            let server = g.server_config()?;
            let cfg = CohortConfig {
                sessions,
                cohort_seed,
                experiment_seed: server.experiment_seed,
                world: server.world,
                ..CohortConfig::default()
            };
            if has_sessions(&server.data_dir)? {
                bail!(
                    "{} already holds sessions; choose an empty data directory",
                    server.data_dir.display()
                );
            }
            let (svc, played) = simulate_cohort(&cfg, &server.data_dir)?;
            fs::create_dir_all(&g.out)?;
            let path = write_atomic(
                &g.out,
                "export.ndjson",
                export_text(&svc, frames)?.as_bytes(),
            )?;
            println!(
                "{} bot sessions; export at {}",
                played.len(),
                path.display()
            );
        }
        Command::Serve { host, port } => {
            let mut cfg = g.server_config()?;
            if let Some(h) = host {
                cfg.host = h;
            }
            if let Some(p) = port {
                cfg.port = p;
            }
            cfg.validate()?;
            tokio::runtime::Runtime::new()?.block_on(trustgrid_server::serve(cfg))?;
        }
    }
    Ok(())
}

fn has_sessions(dir: &Path) -> Result<bool> {
    let index = dir.join("index.jsonl");
    Ok(index.exists() && fs::metadata(&index)?.len() > 0)
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.verbose {
        tracing::Level::DEBUG
    } else {
        tracing::Level::INFO
    };
    tracing_subscriber::fmt()
        .with_max_level(level)
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
