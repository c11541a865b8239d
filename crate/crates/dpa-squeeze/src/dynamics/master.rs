//! Lindblad master equation on dense density matrices.

use num_complex::Complex64 as C64;

use super::ode::{integrate_samples, OdeSystem};
use super::series::{Observable, Sampler, SolverConfig, TimeGrid, TimeSeries};
use crate::error::{invalid, Error, Result};
use crate::model::Model;
use crate::sparse::CsrMatrix;
use crate::state::QuantumState;

/// Largest tolerated `|Tr ρ - 1|` at a sample.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// `-i H_nh` with `H_nh = H - (i/2) Σ c†c`.
pub(crate) fn non_hermitian_generator(model: &Model) -> CsrMatrix {
    let d = model.dim();
    let mut m = model.hamiltonian.matrix().scale(C64::new(0.0, -1.0));
    let mut decay = CsrMatrix::zeros(d, d);
    for c in &model.collapse_ops {
        decay = decay.add(&c.matrix().adjoint().matmul(c.matrix()));
    }
    m = m.add(&decay.scale(C64::new(-0.5, 0.0)));
    m
}

/// `dρ = Mρ + (Mρ)† + Σ c ρ c†` with `M = -i H_nh`.
pub(crate) struct Lindblad {
    d: usize,
    m: CsrMatrix,
    c: Vec<CsrMatrix>,
    a: Vec<C64>,
    bt: Vec<C64>,
    e: Vec<C64>,
}

impl Lindblad {
    pub fn new(model: &Model) -> Self {
        let d = model.dim();
        let z = vec![C64::new(0.0, 0.0); d * d];
        Self {
            d,
            m: non_hermitian_generator(model),
            c: model.collapse_ops.iter().map(|c| c.matrix().clone()).collect(),
            a: z.clone(),
            bt: z.clone(),
            e: z,
        }
    }
}

/// `out = in†` for square row-major matrices, blocked for cache reuse.
fn adjoint_into(input: &[C64], out: &mut [C64], d: usize) {
    const B: usize = 32;
    for ib in (0..d).step_by(B) {
        for jb in (0..d).step_by(B) {
            for i in ib..(ib + B).min(d) {
                for j in jb..(jb + B).min(d) {
                    out[j * d + i] = input[i * d + j].conj();
                }
            }
        }
    }
}

impl OdeSystem for Lindblad {
    fn rhs(&mut self, _t: f64, rho: &[C64], drho: &mut [C64]) {
        let d = self.d;
        self.m.mul_dense(rho, d, &mut self.a);
        adjoint_into(&self.a, drho, d);
        for (o, a) in drho.iter_mut().zip(&self.a) {
            *o += a;
        }
        for c in &self.c {
            // c ρ c† = c (c ρ)† for Hermitian ρ
            c.mul_dense(rho, d, &mut self.a);
            adjoint_into(&self.a, &mut self.bt, d);
            c.mul_dense(&self.bt, d, &mut self.e);
            for (o, e) in drho.iter_mut().zip(&self.e) {
                *o += e;
            }
        }
    }
}

fn hermitize(rho: &mut [C64], d: usize) {
    for i in 0..d {
        rho[i * d + i].im = 0.0;
        for j in 0..i {
            let avg = (rho[i * d + j] + rho[j * d + i].conj()) * 0.5;
            rho[i * d + j] = avg;
            rho[j * d + i] = avg.conj();
        }
    }
}

/// Integrates the Lindblad equation and samples the observables.
pub fn mesolve(
    model: &Model,
    initial: &QuantumState,
    grid: &TimeGrid,
    observables: &[Observable],
    config: &SolverConfig,
) -> Result<TimeSeries> {
    config.validate()?;
    if initial.layout() != &model.layout {
        return invalid("initial state layout differs from the model layout");
    }
    let d = model.dim();
    let sampler = Sampler::new(&model.layout, observables, config.dump_states)?;
    let monitor = super::trajectory::TruncationMonitor::new(&model.layout);
    let times = grid.times();
    let mut rows = vec![Vec::new(); times.len()];
    let mut rhs = Lindblad::new(model);
    let rho0 = initial.density_matrix();
    let mut top = 0.0f64;
    integrate_samples(&mut rhs, &rho0, &times, config.step_control(), |k, t, rho| {
        hermitize(rho, d);
        let tr: f64 = (0..d).map(|i| rho[i * d + i].re).sum();
        if (tr - 1.0).abs() > TRACE_DRIFT_LIMIT {
            return Err(Error::Diagnostic { t, msg: format!("trace drifted to {tr}") });
        }
        top = top.max(monitor.top_population_mixed(rho));
        let mut row = vec![C64::new(0.0, 0.0); sampler.width()];
        sampler.sample_mixed(rho, &mut row);
        rows[k] = row;
        Ok(true)
    })?;
    monitor.report(top);
    let mut ts = sampler.assemble(times, &rows, None, 1, None);
    ts.max_top_population = top;
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_tat_model, ModelKind};
    use crate::operator::{destroy_op, spin_ops_in, Operator};
    use crate::space::{Factor, SpaceLayout};

    fn decay_model(kappa: f64) -> Model {
        let a = destroy_op(3).unwrap();
        let layout = a.layout().clone();
        Model::new(layout.clone(), Operator::zero(&layout), vec![a.scale_real(kappa.sqrt())], "decay", ModelKind::Full)
            .unwrap()
    }

    #[test]
    fn photon_decays_exponentially() {
        let m = decay_model(1.0);
        let a = destroy_op(3).unwrap();
        let n = a.adjoint().compose(&a).unwrap();
        let grid = TimeGrid::new(0.0, 2.0, 5).unwrap();
        let ts = mesolve(
            &m,
            &QuantumState::fock(3, 1).unwrap(),
            &grid,
            &[Observable::expect("n", n)],
            &SolverConfig::default(),
        )
        .unwrap();
        let n = ts.real("n").unwrap();
        for (k, t) in ts.times.iter().enumerate() {
            assert!((n[k] - (-t).exp()).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn unitary_channel_keeps_purity() {
        let m = build_tat_model(C64::new(0.0, 0.3), 4).unwrap();
        let grid = TimeGrid::new(0.0, 5.0, 11).unwrap();
        let cfg = SolverConfig { dump_states: true, ..Default::default() };
        let ts = mesolve(&m, &QuantumState::spin_ground(4).unwrap(), &grid, &[], &cfg).unwrap();
        for k in 0..11 {
            let p = ts.state_at(k).unwrap().unwrap().purity();
            assert!((p - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn three_level_twisting_matches_closed_form() {
        // On N = 2, S_+² only couples |1,-1⟩ and |1,1⟩ with element 2.
        let g = C64::new(0.0, 0.02);
        let m = build_tat_model(g, 2).unwrap();
        let s = spin_ops_in(&m.layout).unwrap();
        let grid = TimeGrid::new(0.0, 40.0, 9).unwrap();
        let ts = mesolve(
            &m,
            &QuantumState::spin_ground(2).unwrap(),
            &grid,
            &[Observable::expect("sz", s.sz)],
            &SolverConfig::default(),
        )
        .unwrap();
        let sz = ts.real("sz").unwrap();
        for (k, t) in ts.times.iter().enumerate() {
            let w = 2.0 * g.norm() * t;
            let want = -w.cos().powi(2) + w.sin().powi(2);
            assert!((sz[k] - want).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_mismatched_initial_state() {
        let m = decay_model(1.0);
        let other = QuantumState::spin_ground(2).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        assert!(mesolve(&m, &other, &grid, &[], &SolverConfig::default()).is_err());
        let _ = SpaceLayout::single(Factor::Spin { n: 1 });
    }
}
