//! Registered figure and table reproductions.
//!
//! Figure presets work in units of the collective coupling `g_c = 1`, so
//! times are in `1/g_c`. The table preset works in SI units (rad/s, s).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{hz, ModelParams};

pub struct PresetInfo {
    pub name: &'static str,
    pub description: &'static str,
}

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        name: "fig2",
        description: "driven N=50: full vs effective, fidelity, |<a_p>|, Husimi at the minimum",
    },
    PresetInfo { name: "fig3a", description: "driven full model for kappa_p = Omega in {1, 5} with TAT references" },
    PresetInfo { name: "fig3b", description: "effective-model minimum vs N for kappa_p in {1, 5} and the TAT model" },
    PresetInfo { name: "fig4", description: "driven, gamma_s = 1e-3 (full, effective) vs gamma_s = 0" },
    PresetInfo { name: "fig5", description: "driven, gamma_c = 1e-3 (full, effective) vs gamma_c = 0" },
    PresetInfo { name: "fig6", description: "driven, kappa_s = 0.1 (full, eliminated) vs kappa_s = 0" },
    PresetInfo { name: "fig7", description: "undriven lossless N=50, alpha = i: full vs effective, Husimi" },
    PresetInfo { name: "fig8a", description: "undriven full model for alpha in {i, 1.5i, 2i}" },
    PresetInfo { name: "fig8", description: "undriven, gamma_s in {1e-3, 0}" },
    PresetInfo { name: "fig9", description: "undriven, gamma_c in {1e-3, 0}" },
    PresetInfo { name: "fig10", description: "undriven, kappa_s in {0.1, 0}" },
    PresetInfo { name: "fig11", description: "undriven, kappa_p in {0.01, 0.1, 0}" },
    PresetInfo { name: "fig14", description: "driven full model from vacuum vs the quasi-steady pump state" },
    PresetInfo { name: "table1", description: "mean-field minima for the Rb and NV parameter sets (SI units)" },
];

pub const FULL_N: usize = 50;
pub const QUICK_N: usize = 20;
pub const FULL_NTRAJ: usize = 1000;
pub const QUICK_NTRAJ: usize = 200;
pub const FIG3B_SIZES: &[usize] = &[4, 6, 8, 10, 15, 20, 30, 40, 50];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Full,
    Effective,
    /// Effective model plus the dissipators left by eliminating the signal mode.
    Eliminated,
    /// Spin-only model with `g_tat = d0 · g_eff` taken from the run's parameters.
    Tat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub label: String,
    pub model: ModelChoice,
    pub params: ModelParams,
    pub t_end: f64,
    pub samples: usize,
    pub ntraj: usize,
    pub husimi: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableColumn {
    pub label: String,
    pub params: ModelParams,
    pub t_end: f64,
    pub samples: usize,
    /// Value printed in the published table, dB.
    pub published_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    /// Independent quantum runs; `scan` marks a minimum-vs-N sweep.
    Dynamics {
        runs: Vec<RunSpec>,
        scan: bool,
    },
    Table(Vec<TableColumn>),
}

fn driven(n: usize, kappa_p: f64) -> ModelParams {
    let mut p = ModelParams::reference(n);
    p.kappa_p = kappa_p;
    p.omega = C64::new(kappa_p, 0.0);
    // quasi-steady amplitude iΩ/κ_p
    p.alpha0 = C64::new(0.0, 1.0);
    p
}

fn undriven(n: usize) -> ModelParams {
    let mut p = ModelParams::reference(n);
    p.kappa_p = 0.0;
    p.omega = C64::new(0.0, 0.0);
    p.alpha0 = C64::new(0.0, 1.0);
    p
}

fn run(label: &str, model: ModelChoice, params: ModelParams, t_end: f64, ntraj: usize) -> RunSpec {
    RunSpec { label: label.to_string(), model, params, t_end, samples: t_end as usize + 1, ntraj, husimi: false }
}

/// Builds the run list of a preset. Quick mode changes only `N` and the
/// trajectory count.
pub fn plan(name: &str, quick: bool) -> Result<Plan> {
    use ModelChoice::*;
    let n = if quick { QUICK_N } else { FULL_N };
    let m = if quick { QUICK_NTRAJ } else { FULL_NTRAJ };
    let runs = match name {
        "fig2" => {
            let mut full = run("full", Full, driven(n, 1.0), 300.0, m);
            let mut eff = run("effective", Effective, driven(n, 1.0), 300.0, m);
            full.husimi = true;
            eff.husimi = true;
            vec![full, eff]
        }
        "fig3a" => {
            let mut v = Vec::new();
            for k in [1.0, 5.0] {
                v.push(run(&format!("full_kp{k}"), Full, driven(n, k), 300.0, m));
                v.push(run(&format!("tat_kp{k}"), Tat, driven(n, k), 300.0, m));
            }
            v
        }
        "fig3b" => {
            let mut v = Vec::new();
            for &size in FIG3B_SIZES.iter().filter(|&&s| !quick || s <= QUICK_N) {
                for k in [1.0, 5.0] {
                    v.push(run(&format!("effective_kp{k}_n{size}"), Effective, driven(size, k), 400.0, m));
                    v.push(run(&format!("tat_kp{k}_n{size}"), Tat, driven(size, k), 400.0, m));
                }
            }
            return Ok(Plan::Dynamics { runs: v, scan: true });
        }
        "fig4" | "fig5" | "fig6" => {
            let (key, value, partner): (&str, f64, ModelChoice) = match name {
                "fig4" => ("gamma_s", 1e-3, Effective),
                "fig5" => ("gamma_c", 1e-3, Effective),
                _ => ("kappa_s", 0.1, Eliminated),
            };
            let mut lossy = driven(n, 1.0);
            set_rate(&mut lossy, key, value);
            let partner_label = if partner == Eliminated { "eliminated" } else { "effective" };
            vec![
                run(&format!("full_{key}"), Full, lossy.clone(), 300.0, m),
                run(&format!("{partner_label}_{key}"), partner, lossy, 300.0, m),
                run("full_lossless", Full, driven(n, 1.0), 300.0, m),
            ]
        }
        "fig7" => {
            let mut full = run("full", Full, undriven(n), 200.0, m);
            let mut eff = run("effective", Effective, undriven(n), 200.0, m);
            full.husimi = true;
            eff.husimi = true;
            vec![full, eff]
        }
        "fig8a" => [("alpha_i", 1.0), ("alpha_1.5i", 1.5), ("alpha_2i", 2.0)]
            .iter()
            .map(|&(label, a)| {
                let mut p = undriven(n);
                p.alpha0 = C64::new(0.0, a);
                run(label, Full, p, 200.0, m)
            })
            .collect(),
        "fig8" | "fig9" | "fig10" | "fig11" => {
            let (key, values, t_end): (&str, &[f64], f64) = match name {
                "fig8" => ("gamma_s", &[1e-3, 0.0], 300.0),
                "fig9" => ("gamma_c", &[1e-3, 0.0], 300.0),
                "fig10" => ("kappa_s", &[0.1, 0.0], 300.0),
                _ => ("kappa_p", &[0.01, 0.1, 0.0], 600.0),
            };
            values
                .iter()
                .map(|&v| {
                    let mut p = undriven(n);
                    set_rate(&mut p, key, v);
                    run(&format!("full_{key}_{v}"), Full, p, t_end, m)
                })
                .collect()
        }
        "fig14" => {
            let mut ground = driven(n, 1.0);
            ground.alpha0 = C64::new(0.0, 0.0);
            vec![run("ground", Full, ground, 300.0, m), run("quasi_steady", Full, driven(n, 1.0), 300.0, m)]
        }
        "table1" => return Ok(Plan::Table(table1_columns())),
        _ => return Err(Error::Usage(format!("unknown preset '{name}'"))),
    };
    Ok(Plan::Dynamics { runs, scan: false })
}

fn set_rate(p: &mut ModelParams, key: &str, v: f64) {
    match key {
        "gamma_s" => p.gamma_s = v,
        "gamma_c" => p.gamma_c = v,
        "kappa_s" => p.kappa_s = v,
        "kappa_p" => p.kappa_p = v,
        _ => unreachable!("rate key {key}"),
    }
}

/// The six columns of the experimental-feasibility table.
///
/// `δ_s = ω_s − ω_q` is read from the listed frequencies: 0.6 MHz for Rb
/// (exactly 15 g_c) and 179.2 MHz for NV (14.93 g_c). Dashes in the rate
/// rows are zero.
pub fn table1_columns() -> Vec<TableColumn> {
    let rb = |omega: f64, kappa_p: f64, alpha: C64| {
        let mut p = ModelParams::reference(1_000_000);
        p.set_g_c(hz(40e3));
        p.j = hz(56.569e3);
        p.delta_s = hz(6.8330e9 - 6.8324e9);
        p.kappa_s = hz(7e3);
        p.kappa_p = kappa_p;
        p.omega = C64::new(omega, 0.0);
        p.alpha0 = alpha;
        p
    };
    let nv = |omega: f64, kappa_p: f64, alpha: C64| {
        let mut p = ModelParams::reference(1_000_000_000_000);
        p.set_g_c(hz(12e6));
        p.j = hz(16.97e6);
        p.delta_s = hz(2.8691e9 - 2.6899e9);
        p.kappa_s = hz(3e3);
        p.gamma_c = hz(0.26e3);
        p.kappa_p = kappa_p;
        p.omega = C64::new(omega, 0.0);
        p.alpha0 = alpha;
        p
    };
    let zero = C64::new(0.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let col = |label: &str, params: ModelParams, t_end: f64, published_db: f64| TableColumn {
        label: label.to_string(),
        params,
        t_end,
        samples: 20_001,
        published_db,
    };
    vec![
        col("rb_driven_alpha0", rb(hz(10e6), hz(10e6), zero), 5e-3, -15.13),
        col("rb_driven_alphai", rb(hz(10e6), hz(10e6), i), 5e-3, -14.91),
        col("rb_undriven_alphai", rb(0.0, hz(3e3), i), 2e-3, -2.34),
        col("nv_driven_alpha0", nv(hz(10e6), hz(10e6), zero), 2e-5, -13.58),
        col("nv_driven_alphai", nv(hz(10e6), hz(10e6), i), 2e-5, -13.58),
        col("nv_undriven_alphai", nv(0.0, hz(3e3), i), 2e-5, -9.51),
    ]
}
