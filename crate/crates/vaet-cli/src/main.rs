//! Command-line front end. Every invocation resolves its full input set up
//! front, derives the run ID from it, then writes tables plus a manifest.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::bail;
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use vaet::model::ElectronicPattern;
use vaet_cli::config::{
    parse_values, resolve_model, Axis, FileConfig, InitState, RunSettings, SweepConfig,
};
use vaet_cli::figures;
use vaet_cli::output::{write_manifest, write_table, InputCore, OutputFormat, Table};
use vaet_cli::runner::{
    self, ensemble_summary_table, run_converge, run_disorder_ensemble, run_scaling_study,
    run_sweep, scaling_table, sweep_table, ScalingKind,
};

#[derive(Parser)]
#[command(
    name = "vaet",
    version,
    about = "Dissipative exciton-transfer studies: rate sweeps, disorder ensembles, \
             scaling tables, cutoff ladders and bundled figure datasets"
)]
struct Cli {
    /// TOML config file; inline flags override its tables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Bundled parameter set p1..p4 (ignored when the config has [model]).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Master seed for disorder realizations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Table file format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SweepArgs {
    /// Swept parameter: epsilon, gamma, nbar, gamma_d, sigma_g, sigma_eps,
    /// L or n_monomers.
    #[arg(long)]
    axis: Option<Axis>,
    /// Comma list or inclusive start:stop:step range.
    #[arg(long)]
    values: Option<String>,
    /// Initial state: triplet, singlet, product-<site>, E1, W or thermal.
    #[arg(long)]
    init: Option<InitState>,
    /// Runs per axis value; disorder is resampled per replicate.
    #[arg(long)]
    replicates: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Transfer-rate sweep along one parameter axis.
    Sweep(SweepArgs),
    /// Replicated disorder sweep (sigma_g or sigma_eps) with quartile
    /// summaries against the zero-disorder baseline.
    Ensemble(SweepArgs),
    /// Rate table against growing monomer size or chain length.
    Scaling {
        #[arg(long, value_enum)]
        kind: ScalingKind,
        /// Largest size; the table stops early at the resource cap.
        #[arg(long, default_value_t = 5)]
        max: usize,
    },
    /// Regenerate a bundled dataset by tag (fig2a, fig2b, ..., fig9).
    Figure { tag: String },
    /// Observable convergence ladder over phonon cutoffs.
    Converge {
        #[arg(long, value_delimiter = ',', default_values_t = vec![5usize, 8, 10, 15, 20])]
        cutoffs: Vec<usize>,
        /// Sup-norm agreement required between successive cutoffs.
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        #[arg(long, default_value = "triplet")]
        init: InitState,
    },
    /// Closed-form exciton coupling curves over (p, d) grids at J = 1.
    Couplings {
        #[arg(long, default_value = "0.5:3.0:0.05")]
        p_values: String,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 3])]
        d_values: Vec<usize>,
    },
    /// Golden-rule rate curve over a site-splitting grid.
    Fgr {
        #[arg(long, default_value = "0.2:4.5:0.02")]
        values: String,
        #[arg(long, default_value = "triplet")]
        init: InitState,
        /// Highest phonon channel summed.
        #[arg(long, default_value_t = 12)]
        n_max: usize,
    },
}

/// Ensembles and scaling tables default to a decade coarser integration;
/// rate medians and orderings are stable well below it.
fn coarse_default() -> RunSettings {
    RunSettings { rtol: 1e-5, atol: 1e-8, ..RunSettings::default() }
}

fn merge_sweep(cli: &Cli, cfg: &FileConfig, args: &SweepArgs) -> anyhow::Result<SweepConfig> {
    let base = cfg.sweep.as_ref();
    let axis = args
        .axis
        .or(base.map(|s| s.axis))
        .ok_or_else(|| anyhow::anyhow!("no sweep axis: pass --axis or a [sweep] table"))?;
    let values = match &args.values {
        Some(s) => parse_values(s)?,
        None => base
            .map(|s| s.values.clone())
            .ok_or_else(|| anyhow::anyhow!("no sweep values: pass --values or a [sweep] table"))?,
    };
    Ok(SweepConfig {
        preset: cli.preset.clone().or_else(|| base.and_then(|s| s.preset.clone())),
        axis,
        values,
        init_state: args.init.or(base.map(|s| s.init_state)).unwrap_or(InitState::Triplet),
        replicates: args.replicates.or(base.map(|s| s.replicates)).unwrap_or(1),
        master_seed: cli.seed.or(base.map(|s| s.master_seed)).unwrap_or(0),
    })
}

fn finish(
    cli: &Cli,
    core: InputCore,
    tables: &[Table],
    started: Instant,
    mut notes: Vec<String>,
    extra_notes: Vec<String>,
) -> anyhow::Result<()> {
    let label = core.label.clone();
    let mut files = Vec::new();
    for t in tables {
        files.push(write_table(&cli.out, t, cli.format)?);
    }
    notes.extend(extra_notes);
    let run_id = write_manifest(&cli.out, core, files, started.elapsed().as_secs_f64(), notes)?;
    println!("{label}: wrote datasets to {} (run id {run_id})", cli.out.display());
    Ok(())
}

fn cmd_sweep(cli: &Cli, cfg: &FileConfig, args: &SweepArgs, ensemble: bool) -> anyhow::Result<()> {
    let pool = runner::thread_pool(cli.threads);
    let sweep = merge_sweep(cli, cfg, args)?;
    let model = resolve_model(cfg, sweep.preset.as_deref())?;
    let settings =
        cfg.run.unwrap_or_else(|| if ensemble { coarse_default() } else { RunSettings::default() });
    let command = if ensemble { "ensemble" } else { "sweep" };
    let label = format!("{command}_{}", sweep.axis.name());
    let core = InputCore::new(
        command,
        &label,
        json!({"model": model, "sweep": sweep, "run": settings}),
        sweep.master_seed,
        settings.rtol,
        settings.atol,
    );
    let run_id = core.run_id();
    let started = Instant::now();
    let mut tables = Vec::new();
    let mut notes = Vec::new();
    if ensemble {
        let out = run_disorder_ensemble(&model, &sweep, settings, &pool)?;
        tables.push(sweep_table(&format!("{label}_rows"), &out.rows, &run_id));
        tables.push(ensemble_summary_table(&format!("{label}_summary"), &out.summaries, &run_id));
        notes.push(format!("zero-disorder baseline rate k_t_star = {}", out.k_t_star));
    } else {
        let rows = run_sweep(&model, &sweep, settings, &pool)?;
        let failed = rows.iter().filter(|r| r.data.is_err()).count();
        if failed > 0 {
            notes.push(format!("{failed} of {} runs failed; see the status column", rows.len()));
        }
        tables.push(sweep_table(&label, &rows, &run_id));
    }
    finish(cli, core, &tables, started, notes, Vec::new())
}

fn cmd_scaling(cli: &Cli, cfg: &FileConfig, kind: ScalingKind, max: usize) -> anyhow::Result<()> {
    let pool = runner::thread_pool(cli.threads);
    let model = resolve_model(cfg, cli.preset.as_deref())?;
    let settings = cfg.run.unwrap_or_else(coarse_default);
    let label = format!("scaling_{}", kind.name());
    let core = InputCore::new(
        "scaling",
        &label,
        json!({"model": model, "kind": kind.name(), "max_size": max, "run": settings}),
        cli.seed.unwrap_or(0),
        settings.rtol,
        settings.atol,
    );
    let run_id = core.run_id();
    let started = Instant::now();
    let out = run_scaling_study(kind, max, &model, settings, &pool)?;
    let tables = vec![scaling_table(&label, &out.rows, &run_id)];
    let notes = out.cap_note.into_iter().collect();
    finish(cli, core, &tables, started, notes, Vec::new())
}

fn cmd_converge(
    cli: &Cli,
    cfg: &FileConfig,
    cutoffs: &[usize],
    tolerance: f64,
    init: InitState,
) -> anyhow::Result<()> {
    let pool = runner::thread_pool(cli.threads);
    let model = resolve_model(cfg, cli.preset.as_deref())?;
    let settings = cfg.run.unwrap_or_default();
    let core = InputCore::new(
        "converge",
        "converge",
        json!({
            "model": model,
            "cutoffs": cutoffs,
            "tolerance": tolerance,
            "init": init.to_string(),
            "run": settings,
        }),
        cli.seed.unwrap_or(0),
        settings.rtol,
        settings.atol,
    );
    let run_id = core.run_id();
    let started = Instant::now();
    let out = run_converge(&model, cutoffs, init, settings, tolerance, &pool)?;
    let (tables, notes) = figures::converge_tables("converge", model.n_monomers, &out, tolerance, &run_id);
    finish(cli, core, &tables, started, notes, Vec::new())
}

fn cmd_couplings(cli: &Cli, p_values: &str, d_values: &[usize]) -> anyhow::Result<()> {
    let p_grid = parse_values(p_values)?.expand()?;
    if d_values.is_empty() || d_values.iter().any(|&d| d == 0) {
        bail!("d_values must be positive gap widths");
    }
    let core = InputCore::new(
        "couplings",
        "couplings",
        json!({"j": 1.0, "p_values": p_grid, "d_values": d_values}),
        cli.seed.unwrap_or(0),
        0.0,
        0.0,
    );
    let run_id = core.run_id();
    let started = Instant::now();
    let tables = vec![figures::couplings_curve_table("couplings", &p_grid, d_values, &run_id)];
    finish(cli, core, &tables, started, Vec::new(), Vec::new())
}

fn cmd_fgr(
    cli: &Cli,
    cfg: &FileConfig,
    values: &str,
    init: InitState,
    n_max: usize,
) -> anyhow::Result<()> {
    let model = resolve_model(cfg, cli.preset.as_deref())?;
    let grid = parse_values(values)?.expand()?;
    let pattern = match init {
        InitState::Triplet => ElectronicPattern::Triplet,
        InitState::Singlet => ElectronicPattern::Singlet,
        other => bail!("the golden-rule curve covers triplet or singlet starts, got {other}"),
    };
    let core = InputCore::new(
        "fgr",
        "fgr",
        json!({
            "model": model,
            "epsilon_values": grid,
            "init": init.to_string(),
            "n_max": n_max,
        }),
        cli.seed.unwrap_or(0),
        0.0,
        0.0,
    );
    let run_id = core.run_id();
    let started = Instant::now();
    let (table, tail) = figures::fgr_table("fgr", &model, &grid, pattern, n_max, &run_id)?;
    let notes = if tail {
        vec!["channel sum left residual tail mass above 1e-8; raise n_max".to_string()]
    } else {
        Vec::new()
    };
    finish(cli, core, &[table], started, notes, Vec::new())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match &cli.command {
        Command::Sweep(args) => cmd_sweep(&cli, &cfg, args, false),
        Command::Ensemble(args) => cmd_sweep(&cli, &cfg, args, true),
        Command::Scaling { kind, max } => cmd_scaling(&cli, &cfg, *kind, *max),
        Command::Figure { tag } => {
            let pool = runner::thread_pool(cli.threads);
            figures::run_figure(tag, &cli.out, cli.format, cli.seed.unwrap_or(0), &pool)
        }
        Command::Converge { cutoffs, tolerance, init } => {
            cmd_converge(&cli, &cfg, cutoffs, *tolerance, *init)
        }
        Command::Couplings { p_values, d_values } => cmd_couplings(&cli, p_values, d_values),
        Command::Fgr { values, init, n_max } => cmd_fgr(&cli, &cfg, values, *init, *n_max),
    }
}
