//! Execution layer: one evolve-and-analyze pipeline per parameter point,
//! and the sweep, ensemble, scaling and convergence drivers built on it.
//!
//! Work items are keyed by (axis index, replicate index) before anything
//! runs: seeds derive from those indices alone and results are collected
//! in job order, so outputs are identical no matter how the pool schedules
//! the actual work.

use rayon::prelude::*;
use vaet::analysis::{fit_equilibration, transfer_rate, EquilibrationFit, RateDefinition};
use vaet::lindblad::{
    cutoff_convergence, evolve_with_options, linspace_grid, thermal_pattern_state, ChannelSet,
    ConvergenceScenario, IntegratorOptions, ObservableSet, Record, Trajectory,
};
use vaet::model::{
    build_hamiltonian, rng, sample_disorder, ElectronicPattern, EnergyScheme, ModelParams,
};
use vaet::Error;

use crate::config::{Axis, InitState, RunSettings, SweepConfig};
use crate::output::{Cell, Table};

/// Joint-dimension ceiling for every bundled study.
pub const DIM_CAP: usize = 400;

/// Builds a dedicated pool so `--threads` never fights the global one.
pub fn thread_pool(threads: Option<usize>) -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    builder.build().expect("thread pool construction cannot fail here")
}

/// Maps an initial-state label onto an electronic pattern and the mode
/// occupancy of the initial thermal mixture.
pub fn init_pattern(
    init: InitState,
    params: &ModelParams<f64>,
) -> (ElectronicPattern, f64) {
    match init {
        InitState::Triplet => (ElectronicPattern::Triplet, 0.0),
        InitState::Singlet => (ElectronicPattern::Singlet, 0.0),
        InitState::Product(k) => (ElectronicPattern::Product(k), 0.0),
        InitState::E1 => (ElectronicPattern::TopExciton, 0.0),
        InitState::W => (ElectronicPattern::W, 0.0),
        InitState::Thermal => {
            let pattern = if params.sites_per_monomer == 2 {
                ElectronicPattern::Triplet
            } else {
                ElectronicPattern::TopExciton
            };
            (pattern, params.nbar)
        }
    }
}

/// One fully resolved unit of work.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub params: ModelParams<f64>,
    pub init: InitState,
    pub sigma_g: f64,
    pub sigma_eps: f64,
    pub seed: u64,
    pub settings: RunSettings,
}

/// Everything a pipeline produces; the trajectory is dropped by the sweep
/// drivers and kept by the figure recipes.
pub struct PipelineOutput {
    pub k_t: f64,
    pub rate_definition: RateDefinition,
    pub fit: Option<EquilibrationFit<f64>>,
    pub trajectory: Trajectory<f64>,
}

pub fn run_pipeline(p: &Pipeline) -> vaet::Result<PipelineOutput> {
    p.params.validate()?;
    let dim = p.params.dim();
    if dim > DIM_CAP {
        return Err(Error::InvalidParameter(format!(
            "joint dimension {dim} exceeds the resource cap {DIM_CAP}"
        )));
    }
    let realization = if p.sigma_g > 0.0 || p.sigma_eps > 0.0 {
        Some(sample_disorder(&p.params, p.sigma_g, p.sigma_eps, p.seed)?)
    } else {
        None
    };
    let h = build_hamiltonian(&p.params, realization.as_ref())?;
    let channels = ChannelSet::from_params(&p.params)?;
    let (pattern, init_nbar) = init_pattern(p.init, &p.params);
    let rho0 = thermal_pattern_state(pattern, init_nbar, &p.params, realization.as_ref())?;
    let observables = ObservableSet::for_model(&p.params)?;
    let t_final = p.settings.t_final(p.params.omega);
    let grid = linspace_grid(t_final, p.settings.n_records);
    let opts = IntegratorOptions::with_tolerances(p.settings.rtol, p.settings.atol);
    let trajectory = evolve_with_options(&h, &channels, &rho0, t_final, &grid, &observables, &opts)?;

    // With intermediate monomers the donor population alone understates
    // the transfer; the acceptor complement is the rate-bearing series.
    let use_complement = p.params.n_monomers > 2;
    let rate = transfer_rate(&trajectory, use_complement)?;
    let fit = fit_equilibration(&trajectory).ok();
    Ok(PipelineOutput {
        k_t: rate.k_t,
        rate_definition: rate.definition,
        fit,
        trajectory,
    })
}

/// Scalar result columns shared by the sweep, ensemble and scaling tables.
#[derive(Debug, Clone)]
pub struct RowData {
    pub k_t: f64,
    pub rate_definition: &'static str,
    pub gamma_fit: Option<f64>,
    pub gamma_fit_ci95: Option<f64>,
    pub p_ss: Option<f64>,
    pub p_ss_ci95: Option<f64>,
    pub fit_residual: Option<f64>,
    pub p_d_final: f64,
    pub p_a_final: f64,
    pub p_intermediate_final: f64,
    pub p_ta_final: Option<f64>,
    pub p_sa_final: Option<f64>,
    pub p_wa_final: f64,
    pub n_phonon_final: f64,
    pub purity_final: f64,
    pub c12_final: f64,
    pub c34_final: f64,
    pub max_trace_drift: f64,
    pub cutoff_warning: bool,
}

fn rate_definition_name(def: RateDefinition) -> &'static str {
    match def {
        RateDefinition::DonorPopulation => "donor_population",
        RateDefinition::OneMinusAcceptor => "one_minus_acceptor",
    }
}

impl RowData {
    fn from_output(out: &PipelineOutput) -> Result<Self, String> {
        if !out.k_t.is_finite() {
            return Err(format!("non-finite transfer rate {}", out.k_t));
        }
        let last = out.trajectory.records.last().expect("non-empty record grid");
        let mid: f64 = if last.p_monomer.len() > 2 {
            last.p_monomer[1..last.p_monomer.len() - 1].iter().sum()
        } else {
            0.0
        };
        Ok(Self {
            k_t: out.k_t,
            rate_definition: rate_definition_name(out.rate_definition),
            gamma_fit: out.fit.map(|f| f.gamma),
            gamma_fit_ci95: out.fit.map(|f| f.ci95.0),
            p_ss: out.fit.map(|f| f.p_ss),
            p_ss_ci95: out.fit.map(|f| f.ci95.1),
            fit_residual: out.fit.map(|f| f.residual),
            p_d_final: last.p_donor(),
            p_a_final: last.p_acceptor(),
            p_intermediate_final: mid,
            p_ta_final: last.p_exciton_acceptor.first().copied(),
            p_sa_final: last.p_exciton_acceptor.get(1).copied(),
            p_wa_final: last.p_w_acceptor,
            n_phonon_final: last.n_phonon,
            purity_final: last.purity,
            c12_final: last.c12,
            c34_final: last.c34,
            max_trace_drift: out.trajectory.max_trace_drift,
            cutoff_warning: out.trajectory.cutoff_warning,
        })
    }
}

/// One sweep result row; failures carry the diagnostic and the sweep
/// continues.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub axis: Axis,
    pub axis_index: usize,
    pub axis_value: f64,
    pub replicate: usize,
    pub seed: u64,
    pub data: Result<RowData, String>,
}

/// Applies one axis value; disorder axes set widths instead of fields.
pub fn apply_axis(params: &mut ModelParams<f64>, axis: Axis, value: f64) -> (f64, f64) {
    match axis {
        Axis::Epsilon => {
            params.epsilon_scheme = EnergyScheme::Symmetric { epsilon: value };
            (0.0, 0.0)
        }
        Axis::Gamma => {
            params.gamma = value;
            (0.0, 0.0)
        }
        Axis::Nbar => {
            params.nbar = value;
            (0.0, 0.0)
        }
        Axis::GammaD => {
            params.gamma_d = value;
            (0.0, 0.0)
        }
        Axis::SigmaG => (value, 0.0),
        Axis::SigmaEps => (0.0, value),
        Axis::SitesPerMonomer => {
            params.sites_per_monomer = value as usize;
            (0.0, 0.0)
        }
        Axis::NMonomers => {
            params.n_monomers = value as usize;
            (0.0, 0.0)
        }
    }
}

struct Job {
    axis_index: usize,
    axis_value: f64,
    replicate: usize,
    pipeline: Pipeline,
}

fn build_jobs(
    base: &ModelParams<f64>,
    cfg: &SweepConfig,
    values: &[f64],
    settings: RunSettings,
    reps_at: impl Fn(f64) -> usize,
) -> Vec<Job> {
    let mut jobs = Vec::new();
    for (axis_index, &axis_value) in values.iter().enumerate() {
        for replicate in 0..reps_at(axis_value) {
            let mut params = base.clone();
            let (sigma_g, sigma_eps) = apply_axis(&mut params, cfg.axis, axis_value);
            // Replicate-keyed seeds: the same realization index draws the
            // same underlying disorder shape at every width, so ensemble
            // curves share common random numbers across the axis.
            let seed = rng::derive_seed(cfg.master_seed, replicate as u64);
            jobs.push(Job {
                axis_index,
                axis_value,
                replicate,
                pipeline: Pipeline {
                    params,
                    init: cfg.init_state,
                    sigma_g,
                    sigma_eps,
                    seed,
                    settings,
                },
            });
        }
    }
    jobs
}

fn execute(jobs: Vec<Job>, axis: Axis, pool: &rayon::ThreadPool) -> Vec<SweepRow> {
    pool.install(|| {
        jobs.par_iter()
            .map(|job| SweepRow {
                axis,
                axis_index: job.axis_index,
                axis_value: job.axis_value,
                replicate: job.replicate,
                seed: job.pipeline.seed,
                data: match run_pipeline(&job.pipeline) {
                    Ok(out) => RowData::from_output(&out),
                    Err(e) => Err(e.to_string()),
                },
            })
            .collect()
    })
}

/// Runs one pipeline per (axis value, replicate); failed points become
/// diagnostic rows and the sweep continues.
pub fn run_sweep(
    base: &ModelParams<f64>,
    cfg: &SweepConfig,
    settings: RunSettings,
    pool: &rayon::ThreadPool,
) -> anyhow::Result<Vec<SweepRow>> {
    settings.validate()?;
    let values = cfg.validate()?;
    let jobs = build_jobs(base, cfg, &values, settings, |_| cfg.replicates);
    Ok(execute(jobs, cfg.axis, pool))
}

/// Quartile summary of one ensemble point.
#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    pub axis: Axis,
    pub axis_value: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub n_realizations: usize,
    pub k_t_star: f64,
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Aggregates realization rows into per-axis-value quartile summaries of
/// `k_T / k_T*`. Rows are grouped by their stored axis index, so any
/// execution or storage order produces the same summaries.
pub fn aggregate_ensemble(
    rows: &[SweepRow],
    values: &[f64],
    k_t_star: f64,
) -> Vec<EnsembleSummary> {
    values
        .iter()
        .enumerate()
        .map(|(axis_index, &axis_value)| {
            let mut ratios: Vec<f64> = rows
                .iter()
                .filter(|r| r.axis_index == axis_index)
                .filter_map(|r| r.data.as_ref().ok().map(|d| d.k_t / k_t_star))
                .collect();
            ratios.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
            let axis = rows.first().map(|r| r.axis).unwrap_or(Axis::SigmaG);
            if ratios.is_empty() {
                return EnsembleSummary {
                    axis,
                    axis_value,
                    median: f64::NAN,
                    q25: f64::NAN,
                    q75: f64::NAN,
                    n_realizations: 0,
                    k_t_star,
                };
            }
            EnsembleSummary {
                axis,
                axis_value,
                median: quantile(&ratios, 0.5),
                q25: quantile(&ratios, 0.25),
                q75: quantile(&ratios, 0.75),
                n_realizations: ratios.len(),
                k_t_star,
            }
        })
        .collect()
}

/// Disorder ensemble: per width, `replicates` independent realizations;
/// the zero-disorder baseline `k_T*` is computed in the same invocation
/// with the same settings.
pub struct EnsembleOutput {
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<EnsembleSummary>,
    pub k_t_star: f64,
}

pub fn run_disorder_ensemble(
    base: &ModelParams<f64>,
    cfg: &SweepConfig,
    settings: RunSettings,
    pool: &rayon::ThreadPool,
) -> anyhow::Result<EnsembleOutput> {
    settings.validate()?;
    if !cfg.axis.is_disorder() {
        anyhow::bail!("ensemble axis must be sigma_g or sigma_eps, got {}", cfg.axis);
    }
    if cfg.replicates < 2 {
        anyhow::bail!("an ensemble needs at least 2 replicates");
    }
    let values = cfg.validate()?;

    let baseline = Pipeline {
        params: base.clone(),
        init: cfg.init_state,
        sigma_g: 0.0,
        sigma_eps: 0.0,
        seed: cfg.master_seed,
        settings,
    };
    let k_t_star = run_pipeline(&baseline)
        .map_err(|e| anyhow::anyhow!("zero-disorder baseline failed: {e}"))?
        .k_t;
    if !(k_t_star.abs() > 0.0) || !k_t_star.is_finite() {
        anyhow::bail!("zero-disorder baseline rate {k_t_star} cannot normalize an ensemble");
    }

    // At zero width every seed reproduces the clean parameters bit for
    // bit (the Gaussian draws are multiplied by sigma), so one pipeline
    // run stands in for all replicates of that point.
    let jobs = build_jobs(base, cfg, &values, settings, |v| if v == 0.0 { 1 } else { cfg.replicates });
    let mut rows = execute(jobs, cfg.axis, pool);
    let mut expanded = Vec::with_capacity(values.len() * cfg.replicates);
    for row in rows.drain(..) {
        if row.axis_value == 0.0 {
            for replicate in 0..cfg.replicates {
                let mut copy = row.clone();
                copy.replicate = replicate;
                copy.seed = rng::derive_seed(cfg.master_seed, replicate as u64);
                expanded.push(copy);
            }
        } else {
            expanded.push(row);
        }
    }
    let summaries = aggregate_ensemble(&expanded, &values, k_t_star);
    Ok(EnsembleOutput { rows: expanded, summaries, k_t_star })
}

/// Scaling-study flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ScalingKind {
    /// Sites per monomer grows; top-exciton and W starts compared.
    MonomerSize,
    /// Monomer count grows; full couplings compared against truncation at
    /// coordinate distance 5.
    ChainLength,
}

impl ScalingKind {
    pub fn name(self) -> &'static str {
        match self {
            ScalingKind::MonomerSize => "monomer_size",
            ScalingKind::ChainLength => "chain_length",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub kind: ScalingKind,
    pub size: usize,
    pub variant: &'static str,
    pub init: InitState,
    pub data: Result<RowData, String>,
}

pub struct ScalingOutput {
    pub rows: Vec<ScalingRow>,
    /// Set when the requested maximum ran past the resource cap; the
    /// table then stops at the last size that fits.
    pub cap_note: Option<String>,
}

pub fn run_scaling_study(
    kind: ScalingKind,
    max_size: usize,
    base: &ModelParams<f64>,
    settings: RunSettings,
    pool: &rayon::ThreadPool,
) -> anyhow::Result<ScalingOutput> {
    settings.validate()?;
    if max_size < 2 {
        anyhow::bail!("scaling study needs max size >= 2");
    }
    let mut specs: Vec<(usize, &'static str, InitState, ModelParams<f64>)> = Vec::new();
    let mut cap_note = None;
    for size in 2..=max_size {
        let mut params = base.clone();
        match kind {
            ScalingKind::MonomerSize => params.sites_per_monomer = size,
            ScalingKind::ChainLength => params.n_monomers = size,
        }
        if params.dim() > DIM_CAP {
            cap_note = Some(format!(
                "size {size} needs joint dimension {} above the cap {DIM_CAP}; table ends at size {}",
                params.dim(),
                size - 1
            ));
            break;
        }
        match kind {
            ScalingKind::MonomerSize => {
                specs.push((size, "e1", InitState::E1, params.clone()));
                specs.push((size, "w", InitState::W, params));
            }
            ScalingKind::ChainLength => {
                let mut truncated = params.clone();
                truncated.coupling_truncation = Some(5.0);
                specs.push((size, "full", InitState::Triplet, params));
                specs.push((size, "truncated", InitState::Triplet, truncated));
            }
        }
    }
    let rows = pool.install(|| {
        specs
            .par_iter()
            .map(|(size, variant, init, params)| {
                let pipeline = Pipeline {
                    params: params.clone(),
                    init: *init,
                    sigma_g: 0.0,
                    sigma_eps: 0.0,
                    seed: 0,
                    settings,
                };
                ScalingRow {
                    kind,
                    size: *size,
                    variant,
                    init: *init,
                    data: match run_pipeline(&pipeline) {
                        Ok(out) => RowData::from_output(&out),
                        Err(e) => Err(e.to_string()),
                    },
                }
            })
            .collect()
    });
    Ok(ScalingOutput { rows, cap_note })
}

/// Per-cutoff trajectories plus the engine's own convergence verdict.
pub struct ConvergeOutput {
    pub points: Vec<(usize, Result<Trajectory<f64>, String>)>,
    pub recommended: Result<usize, String>,
}

pub fn run_converge(
    base: &ModelParams<f64>,
    cutoffs: &[usize],
    init: InitState,
    settings: RunSettings,
    tolerance: f64,
    pool: &rayon::ThreadPool,
) -> anyhow::Result<ConvergeOutput> {
    settings.validate()?;
    if cutoffs.is_empty() {
        anyhow::bail!("cutoff list is empty");
    }
    let points = pool.install(|| {
        cutoffs
            .par_iter()
            .map(|&cutoff| {
                let mut params = base.clone();
                params.phonon_cutoff = cutoff;
                let pipeline = Pipeline {
                    params,
                    init,
                    sigma_g: 0.0,
                    sigma_eps: 0.0,
                    seed: 0,
                    settings,
                };
                (cutoff, run_pipeline(&pipeline).map(|o| o.trajectory).map_err(|e| e.to_string()))
            })
            .collect()
    });
    let scenario = ConvergenceScenario::standard(settings.t_final(base.omega));
    let recommended = cutoff_convergence(base, &scenario, tolerance).map_err(|e| e.to_string());
    Ok(ConvergeOutput { points, recommended })
}

// Table builders. Column layouts are part of the artifact contract; the
// trajectory layout is fixed as t, P_D, P_A, P_I_k..., P_TA, P_SA,
// n_phonon, purity, C12, C34, with P_WA and the run ID appended.

const SWEEP_HEADERS: [&str; 24] = [
    "axis",
    "axis_value",
    "replicate",
    "seed",
    "k_t",
    "rate_definition",
    "gamma_fit",
    "gamma_fit_ci95",
    "p_ss",
    "p_ss_ci95",
    "fit_residual",
    "p_d_final",
    "p_a_final",
    "p_intermediate_final",
    "p_ta_final",
    "p_sa_final",
    "p_wa_final",
    "n_phonon_final",
    "purity_final",
    "c12_final",
    "c34_final",
    "max_trace_drift",
    "cutoff_warning",
    "status",
];

fn opt_cell(v: Option<f64>) -> Cell {
    match v {
        Some(x) if x.is_finite() => Cell::F64(x),
        _ => Cell::Empty,
    }
}

fn data_cells(data: &Result<RowData, String>) -> Vec<Cell> {
    match data {
        Ok(d) => vec![
            Cell::F64(d.k_t),
            Cell::Str(d.rate_definition.to_string()),
            opt_cell(d.gamma_fit),
            opt_cell(d.gamma_fit_ci95),
            opt_cell(d.p_ss),
            opt_cell(d.p_ss_ci95),
            opt_cell(d.fit_residual),
            Cell::F64(d.p_d_final),
            Cell::F64(d.p_a_final),
            Cell::F64(d.p_intermediate_final),
            opt_cell(d.p_ta_final),
            opt_cell(d.p_sa_final),
            Cell::F64(d.p_wa_final),
            Cell::F64(d.n_phonon_final),
            Cell::F64(d.purity_final),
            Cell::F64(d.c12_final),
            Cell::F64(d.c34_final),
            Cell::F64(d.max_trace_drift),
            Cell::Bool(d.cutoff_warning),
            Cell::Str("ok".to_string()),
        ],
        Err(msg) => {
            let mut cells = vec![Cell::Empty; 19];
            cells.push(Cell::Str(format!("failed: {msg}")));
            cells
        }
    }
}

pub fn sweep_table(name: &str, rows: &[SweepRow], run_id: &str) -> Table {
    let mut headers: Vec<&str> = SWEEP_HEADERS.to_vec();
    headers.push("run_id");
    let mut table = Table::new(name, &headers);
    for row in rows {
        let mut cells = vec![
            Cell::Str(row.axis.name().to_string()),
            Cell::F64(row.axis_value),
            Cell::Usize(row.replicate),
            Cell::U64(row.seed),
        ];
        cells.extend(data_cells(&row.data));
        cells.push(Cell::Str(run_id.to_string()));
        table.push(cells);
    }
    table
}

pub fn ensemble_summary_table(name: &str, summaries: &[EnsembleSummary], run_id: &str) -> Table {
    let mut table = Table::new(
        name,
        &[
            "axis",
            "axis_value",
            "median_ratio",
            "q25_ratio",
            "q75_ratio",
            "n_realizations",
            "k_t_star",
            "run_id",
        ],
    );
    for s in summaries {
        table.push(vec![
            Cell::Str(s.axis.name().to_string()),
            Cell::F64(s.axis_value),
            Cell::F64(s.median),
            Cell::F64(s.q25),
            Cell::F64(s.q75),
            Cell::Usize(s.n_realizations),
            Cell::F64(s.k_t_star),
            Cell::Str(run_id.to_string()),
        ]);
    }
    table
}

pub fn scaling_table(name: &str, rows: &[ScalingRow], run_id: &str) -> Table {
    let mut headers = vec!["kind", "size", "variant", "init_state"];
    headers.extend(&SWEEP_HEADERS[4..]);
    headers.push("run_id");
    let mut table = Table::new(name, &headers);
    for row in rows {
        let mut cells = vec![
            Cell::Str(row.kind.name().to_string()),
            Cell::Usize(row.size),
            Cell::Str(row.variant.to_string()),
            Cell::Str(row.init.to_string()),
        ];
        cells.extend(data_cells(&row.data));
        cells.push(Cell::Str(run_id.to_string()));
        table.push(cells);
    }
    table
}

pub fn trajectory_table(
    name: &str,
    traj: &Trajectory<f64>,
    n_monomers: usize,
    run_id: &str,
) -> Table {
    let mut headers: Vec<String> = vec!["t".into(), "P_D".into(), "P_A".into()];
    for k in 1..n_monomers.saturating_sub(1) {
        headers.push(format!("P_I_{k}"));
    }
    headers.extend(
        ["P_TA", "P_SA", "n_phonon", "purity", "C12", "C34", "P_WA", "run_id"]
            .map(String::from),
    );
    let headers_ref: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut table = Table::new(name, &headers_ref);
    for (t, rec) in traj.times.iter().zip(&traj.records) {
        table.push(record_cells(*t, rec, n_monomers, run_id));
    }
    table
}

fn record_cells(t: f64, rec: &Record<f64>, n_monomers: usize, run_id: &str) -> Vec<Cell> {
    let mut cells = vec![Cell::F64(t), Cell::F64(rec.p_donor()), Cell::F64(rec.p_acceptor())];
    for k in 1..n_monomers.saturating_sub(1) {
        cells.push(Cell::F64(rec.p_monomer[k]));
    }
    cells.push(opt_cell(rec.p_exciton_acceptor.first().copied()));
    cells.push(opt_cell(rec.p_exciton_acceptor.get(1).copied()));
    cells.push(Cell::F64(rec.n_phonon));
    cells.push(Cell::F64(rec.purity));
    cells.push(Cell::F64(rec.c12));
    cells.push(Cell::F64(rec.c34));
    cells.push(Cell::F64(rec.p_w_acceptor));
    cells.push(Cell::Str(run_id.to_string()));
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate_linearly() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&xs, 0.5), 2.5);
        assert_eq!(quantile(&xs, 0.25), 1.75);
        assert_eq!(quantile(&xs, 0.75), 3.25);
        assert_eq!(quantile(&[5.0], 0.25), 5.0);
    }

    #[test]
    fn axis_application_touches_the_right_field() {
        let base = vaet::model::presets::p1();
        let mut p = base.clone();
        assert_eq!(apply_axis(&mut p, Axis::Gamma, 0.07), (0.0, 0.0));
        assert_eq!(p.gamma, 0.07);
        let mut p = base.clone();
        assert_eq!(apply_axis(&mut p, Axis::SigmaG, 0.1), (0.1, 0.0));
        assert_eq!(p, base);
        let mut p = base.clone();
        apply_axis(&mut p, Axis::Epsilon, 1.25);
        assert_eq!(p.epsilon_scheme, EnergyScheme::Symmetric { epsilon: 1.25 });
    }
}
