//! Preset runner: resolves a configuration into concrete runs, integrates
//! them, and writes CSV series, JSON summaries and a manifest.

pub mod config;
pub mod output;
pub mod presets;

use std::path::PathBuf;
use std::time::Instant;

use log::info;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{mcsolve, mesolve, Observable, SolverConfig, TimeGrid, TimeSeries};
use crate::error::{Error, Result};
use crate::meanfield::{find_min_squeezing, mf_integrate, Coupling, MeanFieldParams, MeanFieldState, MinSqueezing};
use crate::model::{
    apply_adiabatic_elimination, build_effective_model_with, build_full_model_with, build_tat_model, Model,
};
use crate::observables::{
    axis_angle_distance, fidelity_from_pump_density, husimi_from_spin_density, spin_observables,
    squeezing_direction_prediction, squeezing_wineland, HusimiField, HusimiGrid, SpinMoments,
};
use crate::operator::destroy_in;
use crate::params::{derive_params, DerivedParams, ModelParams};
use crate::space::{Factor, SpaceLayout};
use crate::state::{coherent_state, QuantumState};

pub use config::{parse_complex, ExperimentConfig, Method, AUTO_MASTER_DIM, OVERRIDE_KEYS};
pub use output::RunManifest;
pub use presets::{plan, ModelChoice, Plan, RunSpec, TableColumn, PRESETS};

/// Largest full-model dimension accepted by [`compare_models`].
pub const COMPARE_MAX_DIM: usize = 4096;

/// Trajectory tolerances. Per-trajectory integration error stays orders of
/// magnitude below the ensemble's statistical error at these values.
pub const TRAJECTORY_RTOL: f64 = 1e-6;
pub const TRAJECTORY_ATOL: f64 = 1e-8;

/// Margin used for the squeezing-duration window, dB.
pub const WINDOW_MARGIN_DB: f64 = 3.0;

/// One run after presets, quick mode and overrides are applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedRun {
    pub label: String,
    /// `None` for mean-field table columns.
    pub model: Option<ModelChoice>,
    pub params: ModelParams,
    pub derived: DerivedParams,
    pub t_end: f64,
    pub samples: usize,
    pub solver: SolverConfig,
    /// Solver actually used; `None` for mean-field columns.
    pub method: Option<Method>,
    pub dim: usize,
    pub husimi: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedPlan {
    Dynamics { runs: Vec<ResolvedRun>, scan: bool },
    Table { runs: Vec<ResolvedRun>, published_db: Vec<f64> },
}

impl ResolvedPlan {
    pub fn runs(&self) -> &[ResolvedRun] {
        match self {
            ResolvedPlan::Dynamics { runs, .. } | ResolvedPlan::Table { runs, .. } => runs,
        }
    }
}

fn layout_for(model: ModelChoice, p: &ModelParams, d: &DerivedParams) -> Result<SpaceLayout> {
    match model {
        ModelChoice::Full => SpaceLayout::full(p.pump_cutoff_or_default(d), p.signal_cutoff_or_default(), p.n_atoms),
        ModelChoice::Effective | ModelChoice::Eliminated => {
            SpaceLayout::effective(p.pump_cutoff_or_default(d), p.n_atoms)
        }
        ModelChoice::Tat => SpaceLayout::single(Factor::Spin { n: p.n_atoms }),
    }
}

fn choose_method(requested: Method, dim: usize, lossless: bool) -> Method {
    match requested {
        Method::Auto if lossless || dim > AUTO_MASTER_DIM => Method::Trajectories,
        Method::Auto => Method::Master,
        m => m,
    }
}

fn is_lossless(model: ModelChoice, p: &ModelParams) -> bool {
    match model {
        ModelChoice::Tat => true,
        ModelChoice::Full => [p.kappa_p, p.kappa_s, p.gamma_s, p.gamma_c].iter().all(|&r| r == 0.0),
        ModelChoice::Effective => [p.kappa_p, p.gamma_s, p.gamma_c].iter().all(|&r| r == 0.0),
        ModelChoice::Eliminated => false,
    }
}

/// Rough peak memory of one run, bytes.
pub fn memory_estimate(method: Method, dim: usize, samples: usize, row_width: usize) -> f64 {
    let dim = dim as f64;
    let c = 16.0;
    match method {
        // state, derivative, 12 stages and scratch for the density matrix
        Method::Master | Method::Auto => 16.0 * dim * dim * c + samples as f64 * row_width as f64 * c,
        Method::Trajectories => {
            let batch = (2 * rayon::current_num_threads()).max(4) as f64;
            batch * (20.0 * dim * c + samples as f64 * row_width as f64 * c)
        }
    }
}

/// Applies quick mode, overrides and flags to the preset plan.
pub fn resolve(config: &ExperimentConfig) -> Result<ResolvedPlan> {
    config.validate()?;
    let requested = config.method()?;
    let limit = config.memory_limit_bytes()?;
    match plan(&config.preset, config.quick)? {
        Plan::Dynamics { runs, scan } => {
            let mut out = Vec::with_capacity(runs.len());
            for spec in runs {
                let mut params = spec.params.clone();
                config::apply_model_overrides(&mut params, &config.overrides)?;
                let mut t_end = spec.t_end;
                let mut samples = spec.samples;
                config::apply_grid_overrides(&mut t_end, &mut samples, &config.overrides)?;
                let derived = derive_params(&params)?;
                let layout = layout_for(spec.model, &params, &derived)?;
                let dim = layout.dim();
                let method = choose_method(requested, dim, is_lossless(spec.model, &params));
                let mut solver = SolverConfig { ntraj: spec.ntraj, seed: config.seed, ..Default::default() };
                if method == Method::Trajectories {
                    solver.rtol = TRAJECTORY_RTOL;
                    solver.atol = TRAJECTORY_ATOL;
                }
                config::apply_solver_overrides(&mut solver, &config.overrides)?;
                if let Some(m) = config.ntraj {
                    solver.ntraj = m;
                }
                let spin_dim = params.n_atoms + 1;
                let width = 9 + 1 + 2 * 12 * 12 + if spec.husimi { spin_dim * spin_dim } else { 0 };
                let need = memory_estimate(method, dim, samples, width);
                if need > limit {
                    return Err(Error::Infeasible(format!(
                        "run '{}' has Hilbert-space dimension {dim}; estimated memory {:.1} GiB exceeds the {:.1} GiB limit (set memory_limit_gb to raise it)",
                        spec.label,
                        need / 1024f64.powi(3),
                        limit / 1024f64.powi(3)
                    )));
                }
                out.push(ResolvedRun {
                    label: spec.label,
                    model: Some(spec.model),
                    params,
                    derived,
                    t_end,
                    samples,
                    solver,
                    method: Some(method),
                    dim,
                    husimi: spec.husimi,
                });
            }
            Ok(ResolvedPlan::Dynamics { runs: out, scan })
        }
        Plan::Table(cols) => {
            let mut runs = Vec::with_capacity(cols.len());
            let mut published_db = Vec::with_capacity(cols.len());
            for col in cols {
                let mut params = col.params.clone();
                config::apply_model_overrides(&mut params, &config.overrides)?;
                let mut t_end = col.t_end;
                let mut samples = col.samples;
                config::apply_grid_overrides(&mut t_end, &mut samples, &config.overrides)?;
                let derived = derive_params(&params)?;
                runs.push(ResolvedRun {
                    label: col.label,
                    model: None,
                    params,
                    derived,
                    t_end,
                    samples,
                    solver: SolverConfig { seed: config.seed, ..Default::default() },
                    method: None,
                    dim: 3,
                    husimi: false,
                });
                published_db.push(col.published_db);
            }
            Ok(ResolvedPlan::Table { runs, published_db })
        }
    }
}

/// Builds the model and initial state of a resolved run.
///
/// The pump starts in the coherent state `alpha0`, the signal mode in vacuum
/// and the spins in their collective ground state.
pub fn build_run_model(run: &ResolvedRun) -> Result<(Model, QuantumState)> {
    let p = &run.params;
    let d = &run.derived;
    let model = match run.model {
        Some(ModelChoice::Full) => build_full_model_with(p, d)?,
        Some(ModelChoice::Effective) => build_effective_model_with(p, d)?,
        Some(ModelChoice::Eliminated) => apply_adiabatic_elimination(&build_full_model_with(p, d)?, p)?,
        Some(ModelChoice::Tat) => build_tat_model(tat_coupling(p, d), p.n_atoms)?,
        None => return Err(Error::InvalidArgument("mean-field column has no quantum model".into())),
    };
    let layout = &model.layout;
    let mut parts = Vec::new();
    for (slot, f) in layout.factors().iter().enumerate() {
        parts.push(match *f {
            Factor::Boson { cutoff } if Some(slot) == layout.pump_slot() => coherent_state(p.alpha0, cutoff)?,
            Factor::Boson { cutoff } => QuantumState::fock(cutoff, 0)?,
            Factor::Spin { n } => QuantumState::spin_ground(n)?,
        });
    }
    let psi = QuantumState::tensor(&parts)?;
    Ok((model, psi))
}

/// `g_tat = d0 · g_eff`, with `d0 = iΩ/κ_p` when driven and `alpha0` otherwise.
pub fn tat_coupling(p: &ModelParams, d: &DerivedParams) -> C64 {
    d.d0.unwrap_or(p.alpha0) * d.g_eff
}

/// Squeezing and pump diagnostics of one run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub label: String,
    pub model: ModelChoice,
    pub n_atoms: usize,
    pub dim: usize,
    pub method: Method,
    pub ntraj: usize,
    pub times: Vec<f64>,
    pub xi2: Vec<f64>,
    pub xi2_db: Vec<f64>,
    /// Squeezing axis angle in the plane normal to the mean spin, rad.
    pub theta: Vec<f64>,
    pub mean_spin: Vec<[f64; 3]>,
    /// Standard error of `⟨S_z⟩` for trajectory runs.
    pub sz_std_err: Option<Vec<f64>>,
    pub pump: Option<Vec<C64>>,
    pub fidelity: Option<Vec<f64>>,
    pub minimum: MinSqueezing,
    pub min_index: usize,
    pub predicted_theta: f64,
    pub husimi: Option<HusimiField>,
    pub max_top_population: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub model: ModelChoice,
    pub n_atoms: usize,
    pub dim: usize,
    pub method: Method,
    pub ntraj: usize,
    pub xi2_min_db: f64,
    pub t_min: f64,
    pub interior_minimum: bool,
    pub theta_at_min_deg: f64,
    pub predicted_theta_deg: f64,
    pub direction_error_deg: f64,
    /// Length of the contiguous stretch around the minimum lying within
    /// [`WINDOW_MARGIN_DB`] of it.
    pub squeezing_window: f64,
    pub fidelity_min: Option<f64>,
    pub abs_pump_at_min: Option<f64>,
    pub husimi_normalization: Option<f64>,
    pub max_top_population: f64,
}

impl RunOutcome {
    pub fn summary(&self) -> RunSummary {
        let k = self.min_index;
        RunSummary {
            label: self.label.clone(),
            model: self.model,
            n_atoms: self.n_atoms,
            dim: self.dim,
            method: self.method,
            ntraj: self.ntraj,
            xi2_min_db: self.minimum.xi2_db_min,
            t_min: self.minimum.t_min,
            interior_minimum: self.minimum.interior,
            theta_at_min_deg: self.theta[k].to_degrees(),
            predicted_theta_deg: self.predicted_theta.to_degrees(),
            direction_error_deg: axis_angle_distance(self.theta[k], self.predicted_theta).to_degrees(),
            squeezing_window: squeezing_window(&self.times, &self.xi2_db, WINDOW_MARGIN_DB),
            fidelity_min: self.fidelity.as_ref().map(|f| f.iter().copied().fold(f64::INFINITY, f64::min)),
            abs_pump_at_min: self.pump.as_ref().map(|a| a[k].norm()),
            husimi_normalization: self.husimi.as_ref().map(HusimiField::normalization),
            max_top_population: self.max_top_population,
        }
    }

    pub fn to_csv(&self) -> String {
        use output::Csv;
        let mut c = Csv::new(&[
            "t",
            "xi2",
            "xi2_db",
            "theta_deg",
            "sx",
            "sy",
            "sz",
            "sz_se",
            "re_ap",
            "im_ap",
            "abs_ap",
            "fidelity",
        ]);
        for k in 0..self.times.len() {
            let ap = self.pump.as_ref().map(|a| a[k]);
            let m = self.mean_spin[k];
            c.row(&[
                self.times[k].into(),
                self.xi2[k].into(),
                self.xi2_db[k].into(),
                self.theta[k].to_degrees().into(),
                m[0].into(),
                m[1].into(),
                m[2].into(),
                self.sz_std_err.as_ref().map(|s| s[k]).into(),
                ap.map(|a| a.re).into(),
                ap.map(|a| a.im).into(),
                ap.map(|a| a.norm()).into(),
                self.fidelity.as_ref().map(|f| f[k]).into(),
            ]);
        }
        c.into_string()
    }
}

/// Length of the contiguous run of samples around the minimum with
/// `db <= min + margin`.
pub fn squeezing_window(times: &[f64], db: &[f64], margin: f64) -> f64 {
    if times.is_empty() {
        return 0.0;
    }
    let mut k = 0;
    for (i, v) in db.iter().enumerate() {
        if *v < db[k] {
            k = i;
        }
    }
    let bound = db[k] + margin;
    let mut lo = k;
    while lo > 0 && db[lo - 1] <= bound {
        lo -= 1;
    }
    let mut hi = k;
    while hi + 1 < db.len() && db[hi + 1] <= bound {
        hi += 1;
    }
    times[hi] - times[lo]
}

/// Integrates one resolved run and extracts the squeezing diagnostics.
pub fn simulate(run: &ResolvedRun) -> Result<RunOutcome> {
    let (model, psi0) = build_run_model(run)?;
    let layout = model.layout.clone();
    let mut obs = spin_observables(&layout)?;
    let pump_slot = layout.pump_slot();
    if let Some(slot) = pump_slot {
        obs.push(Observable::expect("ap", destroy_in(&layout, slot)?));
        obs.push(Observable::reduced("rho_pump", slot));
    }
    let spin_slot = layout.spin_slot().expect("every model carries spins");
    if run.husimi {
        obs.push(Observable::reduced("rho_spin", spin_slot));
    }
    let grid = TimeGrid::new(0.0, run.t_end, run.samples)?;
    let method = run.method.unwrap_or(Method::Auto);
    info!("{}: {} model, dim {}, {:?}", run.label, model.label, model.dim(), method);
    let ts = match method {
        Method::Master => mesolve(&model, &psi0, &grid, &obs, &run.solver)?,
        Method::Trajectories | Method::Auto => mcsolve(&model, &psi0, &grid, &obs, &run.solver)?,
    };
    analyze(run, &ts, method)
}

fn analyze(run: &ResolvedRun, ts: &TimeSeries, method: Method) -> Result<RunOutcome> {
    let n = run.params.n_atoms;
    let mut xi2 = Vec::with_capacity(ts.times.len());
    let mut xi2_db = Vec::with_capacity(ts.times.len());
    let mut theta = Vec::with_capacity(ts.times.len());
    let mut mean_spin = Vec::with_capacity(ts.times.len());
    for k in 0..ts.times.len() {
        let m = SpinMoments::from_series(ts, k, n)?;
        let r = squeezing_wineland(&m).map_err(|e| match e {
            Error::Degenerate(msg) => Error::Degenerate(format!("{} at t = {}: {msg}", run.label, ts.times[k])),
            e => e,
        })?;
        xi2.push(r.xi2);
        xi2_db.push(r.xi2_db);
        theta.push(r.theta);
        mean_spin.push(m.mean);
    }
    let minimum = find_min_squeezing(&ts.times, &xi2_db)?;
    let min_index = (0..xi2_db.len()).fold(0, |a, k| if xi2_db[k] < xi2_db[a] { k } else { a });
    let pump = ts.get("ap").map(<[C64]>::to_vec);
    let fidelity = match (ts.reduced("rho_pump"), &pump) {
        (Some(r), Some(ap)) => Some(
            r.values
                .iter()
                .zip(ap)
                .map(|(rho, a)| fidelity_from_pump_density(rho, Some(*a)))
                .collect::<Result<Vec<_>>>()?,
        ),
        _ => None,
    };
    let phase = match &pump {
        Some(ap) => ap[min_index].arg(),
        None => tat_coupling(&run.params, &run.derived).arg(),
    };
    let husimi = match ts.reduced("rho_spin") {
        Some(r) => Some(husimi_from_spin_density(&r.values[min_index], n, &HusimiGrid::default())?),
        None => None,
    };
    Ok(RunOutcome {
        label: run.label.clone(),
        model: run.model.unwrap_or(ModelChoice::Full),
        n_atoms: n,
        dim: run.dim,
        method,
        ntraj: ts.ntraj,
        times: ts.times.clone(),
        xi2,
        xi2_db,
        theta,
        mean_spin,
        sz_std_err: ts.std_errs.as_ref().and_then(|_| ts.std_err("sz").map(<[f64]>::to_vec)),
        pump,
        fidelity,
        minimum,
        min_index,
        predicted_theta: squeezing_direction_prediction(phase),
        husimi,
        max_top_population: ts.max_top_population,
    })
}

/// Mean-field result of one table column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSummary {
    pub label: String,
    pub n_atoms: f64,
    pub xi2_min_db: f64,
    pub t_min_s: f64,
    pub interior_minimum: bool,
    pub published_db: f64,
    pub hpt_breakdown_s: Option<f64>,
    pub closure_violation_s: Option<f64>,
}

/// Integrates one table column with the bare effective coupling
/// `g² J / δ_s²`, which is what the tabulated minima correspond to.
pub fn solve_table_column(run: &ResolvedRun) -> Result<(TableSummary, String)> {
    let mf = MeanFieldParams::from_model(&run.params, &run.derived, Coupling::Bare);
    let grid = TimeGrid::new(0.0, run.t_end, run.samples)?;
    let traj = mf_integrate(&mf, MeanFieldState::initial(run.params.alpha0), &grid.times())?;
    let db = traj.xi2_db()?;
    let min = find_min_squeezing(&traj.times, &db)?;
    Ok((
        TableSummary {
            label: run.label.clone(),
            n_atoms: mf.n,
            xi2_min_db: min.xi2_db_min,
            t_min_s: min.t_min,
            interior_minimum: min.interior,
            published_db: f64::NAN,
            hpt_breakdown_s: traj.hpt_breakdown,
            closure_violation_s: traj.closure_violation,
        },
        traj.to_csv()?,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct PresetSummary {
    pub preset: String,
    pub quick: bool,
    pub seed: u64,
    pub runs: Vec<RunSummary>,
    pub table: Vec<TableSummary>,
}

#[derive(Debug)]
pub struct PresetReport {
    pub files: Vec<PathBuf>,
    pub summary: PresetSummary,
    pub outcomes: Vec<RunOutcome>,
}

/// Runs every member of a preset and writes its artifacts to `config.out_dir`.
pub fn run_preset(config: &ExperimentConfig) -> Result<PresetReport> {
    let start = Instant::now();
    let resolved = resolve(config)?;
    let mut out = output::OutputSet::new(&config.out_dir)?;
    let mut summary = PresetSummary {
        preset: config.preset.clone(),
        quick: config.quick,
        seed: config.seed,
        runs: Vec::new(),
        table: Vec::new(),
    };
    let mut outcomes = Vec::new();
    match &resolved {
        ResolvedPlan::Dynamics { runs, scan } => {
            outcomes = if *scan {
                runs.par_iter().map(simulate).collect::<Result<Vec<_>>>()?
            } else {
                runs.iter().map(simulate).collect::<Result<Vec<_>>>()?
            };
            for o in &outcomes {
                out.write(&format!("{}.csv", o.label), o.to_csv().as_bytes())?;
                if let Some(h) = &o.husimi {
                    out.write(&format!("{}_husimi.csv", o.label), h.to_csv().as_bytes())?;
                }
                summary.runs.push(o.summary());
            }
            if *scan {
                out.write("scan.csv", scan_csv(runs, &outcomes).as_bytes())?;
            }
        }
        ResolvedPlan::Table { runs, published_db } => {
            let cols = runs.par_iter().map(solve_table_column).collect::<Result<Vec<_>>>()?;
            for ((mut s, csv), published) in cols.into_iter().zip(published_db) {
                s.published_db = *published;
                out.write(&format!("{}.csv", s.label), csv.as_bytes())?;
                summary.table.push(s);
            }
        }
    }
    out.write_json("summary.json", &summary)?;
    let manifest = RunManifest {
        config: config.clone(),
        resolved: resolved.runs().to_vec(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        wall_clock_s: start.elapsed().as_secs_f64(),
        checksums: Default::default(),
    };
    let files = out.finish(manifest)?;
    Ok(PresetReport { files, summary, outcomes })
}

fn scan_csv(runs: &[ResolvedRun], outcomes: &[RunOutcome]) -> String {
    use output::{Cell, Csv};
    let mut c = Csv::new(&["n_atoms", "kappa_p", "model", "xi2_min_db", "t_min", "interior"]);
    for (r, o) in runs.iter().zip(outcomes) {
        c.row(&[
            Cell::Int(r.params.n_atoms as u64),
            r.params.kappa_p.into(),
            Cell::Text(format!("{:?}", o.model).to_lowercase()),
            o.minimum.xi2_db_min.into(),
            o.minimum.t_min.into(),
            Cell::Text(o.minimum.interior.to_string()),
        ]);
    }
    c.into_string()
}

/// Rebuilds the configuration stored in a manifest, writing to `out_dir`.
pub fn config_from_manifest(m: &RunManifest, out_dir: PathBuf) -> ExperimentConfig {
    ExperimentConfig { out_dir, ..m.config.clone() }
}

/// Discrepancies between two runs sampled on the same grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    /// Largest `|Δ ξ²(dB)|` up to the earlier of the two minima.
    pub max_db_before_min: f64,
    pub max_db: f64,
    /// Difference of the two minima, dB.
    pub db_at_min: f64,
    pub t_min: (f64, f64),
    pub max_fidelity: Option<f64>,
    pub max_abs_pump: Option<f64>,
}

pub fn compare_outcomes(a: &RunOutcome, b: &RunOutcome) -> Result<Comparison> {
    if a.times != b.times {
        return Err(Error::InvalidArgument("runs are sampled on different grids".into()));
    }
    let cut = a.min_index.min(b.min_index);
    let diff = |x: &[f64], y: &[f64], upto: usize| -> f64 {
        x[..=upto].iter().zip(&y[..=upto]).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
    };
    let last = a.times.len() - 1;
    let max_fidelity = match (&a.fidelity, &b.fidelity) {
        (Some(x), Some(y)) => Some(diff(x, y, last)),
        _ => None,
    };
    let max_abs_pump = match (&a.pump, &b.pump) {
        (Some(x), Some(y)) => Some(x.iter().zip(y).map(|(p, q)| (p.norm() - q.norm()).abs()).fold(0.0, f64::max)),
        _ => None,
    };
    Ok(Comparison {
        a: a.label.clone(),
        b: b.label.clone(),
        max_db_before_min: diff(&a.xi2_db, &b.xi2_db, cut),
        max_db: diff(&a.xi2_db, &b.xi2_db, last),
        db_at_min: a.minimum.xi2_db_min - b.minimum.xi2_db_min,
        t_min: (a.minimum.t_min, b.minimum.t_min),
        max_fidelity,
        max_abs_pump,
    })
}

/// Runs the full and effective models for the first full-model run of a
/// preset on identical grids and seeds and writes `compare.json`.
pub fn compare_models(config: &ExperimentConfig) -> Result<Comparison> {
    let resolved = resolve(config)?;
    let ResolvedPlan::Dynamics { runs, .. } = &resolved else {
        return Err(Error::Usage(format!("preset '{}' has no quantum runs to compare", config.preset)));
    };
    let full = runs
        .iter()
        .find(|r| r.model == Some(ModelChoice::Full))
        .ok_or_else(|| Error::Usage(format!("preset '{}' has no full-model run", config.preset)))?;
    if full.dim > COMPARE_MAX_DIM {
        return Err(Error::Infeasible(format!(
            "full model dimension {} exceeds the comparison limit {COMPARE_MAX_DIM}",
            full.dim
        )));
    }
    let mut eff = full.clone();
    eff.label = format!("{}_effective", full.label);
    eff.model = Some(ModelChoice::Effective);
    eff.dim = layout_for(ModelChoice::Effective, &eff.params, &eff.derived)?.dim();
    eff.method = Some(choose_method(config.method()?, eff.dim, is_lossless(ModelChoice::Effective, &eff.params)));
    let a = simulate(full)?;
    let b = simulate(&eff)?;
    let cmp = compare_outcomes(&a, &b)?;
    let mut out = output::OutputSet::new(&config.out_dir)?;
    out.write_json("compare.json", &cmp)?;
    out.write(&format!("{}.csv", a.label), a.to_csv().as_bytes())?;
    out.write(&format!("{}.csv", b.label), b.to_csv().as_bytes())?;
    Ok(cmp)
}
