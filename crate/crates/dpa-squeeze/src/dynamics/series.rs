//! Sampling grids, solver settings, observables and the resulting series.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::ode::StepControl;
use crate::error::{invalid, Result};
use crate::operator::Operator;
use crate::space::SpaceLayout;
use crate::sparse::CsrMatrix;
use crate::state::{reduce_mixed, reduce_pure, QuantumState};

/// Uniform sampling times; the integrator picks its own internal steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn new(start: f64, end: f64, count: usize) -> Result<Self> {
        if !(start >= 0.0 && end > start) || count < 2 {
            return invalid(format!("time grid needs end > start >= 0 and count >= 2 (got {start}, {end}, {count})"));
        }
        Ok(Self { start, end, count })
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|k| if k + 1 == self.count { self.end } else { self.start + k as f64 * dt }).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: Option<f64>,
    /// Accuracy of the survival probability at a located jump.
    pub jump_tol: f64,
    pub ntraj: usize,
    pub seed: u64,
    pub max_steps: usize,
    /// Record the full (ensemble) density matrix at every sample.
    pub dump_states: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: None,
            jump_tol: 1e-6,
            ntraj: 1000,
            seed: 0,
            max_steps: 50_000_000,
            dump_states: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.jump_tol > 0.0) {
            return invalid("solver tolerances must be > 0");
        }
        if self.max_step.is_some_and(|h| !(h > 0.0)) {
            return invalid("max_step must be > 0");
        }
        Ok(())
    }

    pub fn step_control(&self) -> StepControl {
        StepControl {
            rtol: self.rtol,
            atol: self.atol,
            h_max: self.max_step.unwrap_or(f64::INFINITY),
            max_steps: self.max_steps,
        }
    }
}

/// Quantity recorded at every sample time.
#[derive(Debug, Clone)]
pub enum Observable {
    /// Expectation value of an operator.
    Expect { name: String, op: Operator },
    /// Reduced density matrix of one factor, or of the whole space for `None`.
    Reduced { name: String, slot: Option<usize> },
}

impl Observable {
    pub fn expect(name: impl Into<String>, op: Operator) -> Self {
        Observable::Expect { name: name.into(), op }
    }

    pub fn reduced(name: impl Into<String>, slot: usize) -> Self {
        Observable::Reduced { name: name.into(), slot: Some(slot) }
    }

    pub fn name(&self) -> &str {
        match self {
            Observable::Expect { name, .. } | Observable::Reduced { name, .. } => name,
        }
    }
}

/// Reduced density matrices over time, row-major `dim × dim` per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSeries {
    pub name: String,
    pub slot: Option<usize>,
    pub dim: usize,
    pub values: Vec<Vec<C64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// `means[observable][sample]`.
    pub means: Vec<Vec<C64>>,
    /// Monte Carlo standard errors of the complex mean, same shape as `means`.
    pub std_errs: Option<Vec<Vec<f64>>>,
    pub reduced: Vec<ReducedSeries>,
    pub ntraj: usize,
    pub seed: Option<u64>,
    pub layout: SpaceLayout,
    /// Largest population seen in the top Fock level of any bosonic factor.
    pub max_top_population: f64,
}

impl TimeSeries {
    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<&[C64]> {
        self.index(name).map(|i| self.means[i].as_slice())
    }

    pub fn real(&self, name: &str) -> Option<Vec<f64>> {
        self.get(name).map(|v| v.iter().map(|c| c.re).collect())
    }

    pub fn std_err(&self, name: &str) -> Option<&[f64]> {
        let i = self.index(name)?;
        self.std_errs.as_ref().map(|s| s[i].as_slice())
    }

    pub fn reduced(&self, name: &str) -> Option<&ReducedSeries> {
        self.reduced.iter().find(|r| r.name == name)
    }

    /// Full density matrix at sample `k`, when states were dumped.
    pub fn state_at(&self, k: usize) -> Option<Result<QuantumState>> {
        let r = self.reduced.iter().find(|r| r.slot.is_none())?;
        Some(QuantumState::mixed(self.layout.clone(), r.values[k].clone()))
    }
}

/// Flattens the requested observables into one value vector per sample.
pub(crate) struct Sampler {
    layout: SpaceLayout,
    names: Vec<String>,
    ops: Vec<CsrMatrix>,
    reduced: Vec<(String, Option<usize>, usize, usize, usize)>,
    width: usize,
}

impl Sampler {
    pub fn new(layout: &SpaceLayout, observables: &[Observable], dump_states: bool) -> Result<Self> {
        let mut names = Vec::new();
        let mut ops = Vec::new();
        let mut reduced = Vec::new();
        let mut add_reduced = |name: &str, slot: Option<usize>| -> Result<()> {
            match slot {
                Some(s) if s >= layout.factors().len() => invalid(format!("observable {name}: no factor {s}")),
                Some(s) => {
                    let (l, r) = layout.split_dims(s);
                    reduced.push((name.to_string(), slot, l, layout.factor_dim(s), r));
                    Ok(())
                }
                None => {
                    reduced.push((name.to_string(), None, 1, layout.dim(), 1));
                    Ok(())
                }
            }
        };
        for o in observables {
            match o {
                Observable::Expect { name, op } => {
                    if op.layout() != layout {
                        return invalid(format!("observable {name} has a different layout"));
                    }
                    names.push(name.clone());
                    ops.push(op.matrix().clone());
                }
                Observable::Reduced { name, slot } => add_reduced(name, *slot)?,
            }
        }
        if dump_states {
            add_reduced("state", None)?;
        }
        let width = ops.len() + reduced.iter().map(|r| r.3 * r.3).sum::<usize>();
        Ok(Self { layout: layout.clone(), names, ops, reduced, width })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn n_expect(&self) -> usize {
        self.ops.len()
    }

    /// Observables of `ψ / ‖ψ‖`.
    pub fn sample_pure(&self, psi: &[C64], out: &mut [C64]) {
        let n2: f64 = psi.iter().map(|v| v.norm_sqr()).sum();
        for (o, op) in out.iter_mut().zip(&self.ops) {
            *o = op.quadratic_form(psi) / n2;
        }
        let mut at = self.ops.len();
        for &(_, _, l, d, r) in &self.reduced {
            let m = reduce_pure(psi, l, d, r);
            for (o, v) in out[at..at + d * d].iter_mut().zip(m) {
                *o = v / n2;
            }
            at += d * d;
        }
    }

    pub fn sample_mixed(&self, rho: &[C64], out: &mut [C64]) {
        for (o, op) in out.iter_mut().zip(&self.ops) {
            *o = op.trace_product(rho);
        }
        let mut at = self.ops.len();
        for &(_, _, l, d, r) in &self.reduced {
            out[at..at + d * d].copy_from_slice(&reduce_mixed(rho, l, d, r));
            at += d * d;
        }
    }

    /// Splits per-sample value vectors into a [`TimeSeries`].
    pub fn assemble(
        &self,
        times: Vec<f64>,
        rows: &[Vec<C64>],
        std_errs: Option<Vec<Vec<f64>>>,
        ntraj: usize,
        seed: Option<u64>,
    ) -> TimeSeries {
        let ne = self.ops.len();
        let means = (0..ne).map(|i| rows.iter().map(|r| r[i]).collect()).collect();
        let mut reduced = Vec::new();
        let mut at = ne;
        for (name, slot, _, d, _) in &self.reduced {
            let values = rows.iter().map(|r| r[at..at + d * d].to_vec()).collect();
            reduced.push(ReducedSeries { name: name.clone(), slot: *slot, dim: *d, values });
            at += d * d;
        }
        TimeSeries {
            times,
            names: self.names.clone(),
            means,
            std_errs,
            reduced,
            ntraj,
            seed,
            layout: self.layout.clone(),
            max_top_population: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_both_ends() {
        let g = TimeGrid::new(0.0, 3.0, 4).unwrap();
        assert_eq!(g.times(), vec![0.0, 1.0, 2.0, 3.0]);
        assert!(TimeGrid::new(1.0, 1.0, 4).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn config_rejects_nonpositive_tolerances() {
        let c = SolverConfig { rtol: 0.0, ..Default::default() };
        assert!(c.validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }
}
