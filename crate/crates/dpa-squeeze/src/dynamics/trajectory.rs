//! Quantum-jump Monte Carlo trajectories.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::master::non_hermitian_generator;
use super::ode::{Dop853, OdeSystem};
use super::series::{Observable, Sampler, SolverConfig, TimeGrid, TimeSeries};
use crate::error::{invalid, Error, Result};
use crate::model::Model;
use crate::space::{Factor, SpaceLayout};
use crate::sparse::CsrMatrix;
use crate::state::QuantumState;

/// Top-level Fock population above which a run is reported as under-resolved.
pub const TRUNCATION_WARN: f64 = 1e-6;

/// Watches the population of the highest Fock level of every bosonic factor.
pub(crate) struct TruncationMonitor {
    /// `(left, dim, right)` per bosonic factor.
    slots: Vec<(usize, usize, usize)>,
}

impl TruncationMonitor {
    pub fn new(layout: &SpaceLayout) -> Self {
        let slots = layout
            .factors()
            .iter()
            .enumerate()
            .filter(|(_, f)| matches!(f, Factor::Boson { .. }))
            .map(|(i, f)| {
                let (l, r) = layout.split_dims(i);
                (l, f.dim(), r)
            })
            .collect();
        Self { slots }
    }

    fn top_indices(&self) -> impl Iterator<Item = (usize, impl Iterator<Item = usize>)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .map(|(k, &(l, d, r))| (k, (0..l).flat_map(move |a| (0..r).map(move |b| (a * d + d - 1) * r + b))))
    }

    pub fn top_population_pure(&self, psi: &[C64]) -> f64 {
        let n2: f64 = psi.iter().map(|v| v.norm_sqr()).sum();
        self.top_indices().map(|(_, idx)| idx.map(|i| psi[i].norm_sqr()).sum::<f64>() / n2).fold(0.0, f64::max)
    }

    pub fn top_population_mixed(&self, rho: &[C64]) -> f64 {
        let d = (rho.len() as f64).sqrt() as usize;
        self.top_indices().map(|(_, idx)| idx.map(|i| rho[i * d + i].re).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn report(&self, top: f64) {
        if top > TRUNCATION_WARN {
            log::warn!("top Fock level population reached {top:.2e}; consider a larger cutoff");
        }
    }
}

/// `dψ = M ψ` with `M = -i H_nh`.
struct NonHermitian {
    m: CsrMatrix,
}

impl OdeSystem for NonHermitian {
    fn rhs(&mut self, _t: f64, y: &[C64], dy: &mut [C64]) {
        self.m.matvec(y, dy);
    }
}

struct Shared<'a> {
    m: CsrMatrix,
    c: Vec<CsrMatrix>,
    sampler: Sampler,
    monitor: TruncationMonitor,
    psi0: &'a [C64],
    times: Vec<f64>,
    config: &'a SolverConfig,
}

struct Record {
    rows: Vec<Vec<C64>>,
    top: f64,
    jumps: usize,
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// Per-trajectory generator: the master seed picks the key, the trajectory
/// index picks the stream, so results do not depend on scheduling.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn run_one(sh: &Shared, index: u64) -> Result<Record> {
    let mut rng = trajectory_rng(sh.config.seed, index);
    let mut sys = NonHermitian { m: sh.m.clone() };
    let n = sh.psi0.len();
    let times = &sh.times;
    let t_end = *times.last().unwrap();
    let mut rows = Vec::with_capacity(times.len());
    let mut buf = vec![C64::new(0.0, 0.0); n];
    let mut jump_buf = vec![C64::new(0.0, 0.0); n];
    let mut top = 0.0f64;
    let mut jumps = 0;

    let sample = |psi: &[C64], rows: &mut Vec<Vec<C64>>, top: &mut f64| {
        let mut row = vec![C64::new(0.0, 0.0); sh.sampler.width()];
        sh.sampler.sample_pure(psi, &mut row);
        *top = top.max(sh.monitor.top_population_pure(psi));
        rows.push(row);
    };

    sample(sh.psi0, &mut rows, &mut top);
    let mut next = 1;
    let mut u: f64 = if sh.c.is_empty() { 0.0 } else { rng.random() };
    let mut ode = Dop853::new(&mut sys, times[0], sh.psi0, sh.config.step_control());

    while next < times.len() {
        ode.step(&mut sys, t_end)?;
        if !sh.c.is_empty() && norm_sqr(ode.y()) <= u {
            // bisection on the dense output for ‖ψ(t*)‖² = u
            let (mut lo, mut hi) = (ode.t_old(), ode.t());
            let mut t_star = hi;
            buf.copy_from_slice(ode.y());
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                ode.interpolate(&mut sys, mid, &mut buf);
                let n2 = norm_sqr(&buf);
                t_star = mid;
                if (n2 - u).abs() <= sh.config.jump_tol {
                    break;
                }
                if n2 > u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if t_star == hi {
                ode.interpolate(&mut sys, hi, &mut buf);
            }
            let mut out = vec![C64::new(0.0, 0.0); n];
            while next < times.len() && times[next] <= t_star {
                ode.interpolate(&mut sys, times[next], &mut out);
                sample(&out, &mut rows, &mut top);
                next += 1;
            }
            // choose the channel with probability ∝ ‖c_k ψ‖²
            let weights: Vec<f64> =
                sh.c.iter()
                    .map(|c| {
                        c.matvec(&buf, &mut jump_buf);
                        norm_sqr(&jump_buf)
                    })
                    .collect();
            let total: f64 = weights.iter().sum();
            if !(total > 0.0) {
                return Err(Error::Numeric { t: t_star, msg: "jump forced with zero total jump rate".into() });
            }
            let mut r = rng.random::<f64>() * total;
            let mut k = weights.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if r < *w {
                    k = i;
                    break;
                }
                r -= w;
            }
            sh.c[k].matvec(&buf, &mut jump_buf);
            let nj = norm_sqr(&jump_buf).sqrt();
            jump_buf.iter_mut().for_each(|v| *v /= nj);
            ode.reset(&mut sys, t_star, &jump_buf);
            u = rng.random();
            jumps += 1;
        } else {
            while next < times.len() && times[next] <= ode.t() {
                ode.interpolate(&mut sys, times[next], &mut buf);
                sample(&buf, &mut rows, &mut top);
                next += 1;
            }
        }
    }
    Ok(Record { rows, top, jumps })
}

/// Averages quantum-jump trajectories.
///
/// Trajectories run in parallel in batches; their records are summed
/// sequentially in trajectory order, so the output is bitwise identical for
/// any thread count.
pub fn mcsolve(
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
    let Some(psi0) = initial.vector() else {
        return invalid("quantum-jump evolution needs a pure initial state");
    };
    if config.ntraj == 0 {
        return invalid("trajectory count must be >= 1");
    }
    let sampler = Sampler::new(&model.layout, observables, config.dump_states)?;
    let shared = Shared {
        m: non_hermitian_generator(model),
        c: model.collapse_ops.iter().map(|c| c.matrix().clone()).collect(),
        monitor: TruncationMonitor::new(&model.layout),
        sampler,
        psi0,
        times: grid.times(),
        config,
    };
    let ns = shared.times.len();
    let w = shared.sampler.width();
    let ne = shared.sampler.n_expect();

    if shared.c.is_empty() {
        // deterministic: every trajectory is the Schrödinger solution
        let rec = run_one(&shared, 0)?;
        shared.monitor.report(rec.top);
        let se = vec![vec![0.0; ns]; ne];
        let mut ts =
            shared.sampler.assemble(shared.times.clone(), &rec.rows, Some(se), config.ntraj, Some(config.seed));
        ts.max_top_population = rec.top;
        return Ok(ts);
    }

    let mut sum = vec![vec![C64::new(0.0, 0.0); w]; ns];
    let mut sq = vec![vec![0.0f64; ne]; ns];
    let mut top = 0.0f64;
    let mut jumps = 0usize;
    let batch = (2 * rayon::current_num_threads()).max(4);
    let mut start = 0;
    while start < config.ntraj {
        let end = (start + batch).min(config.ntraj);
        let records: Vec<Result<Record>> = (start..end).into_par_iter().map(|i| run_one(&shared, i as u64)).collect();
        for rec in records {
            let rec = rec?;
            for (k, row) in rec.rows.iter().enumerate() {
                for (s, v) in sum[k].iter_mut().zip(row) {
                    *s += v;
                }
                for (q, v) in sq[k].iter_mut().zip(&row[..ne]) {
                    *q += v.norm_sqr();
                }
            }
            top = top.max(rec.top);
            jumps += rec.jumps;
        }
        start = end;
    }
    let m = config.ntraj as f64;
    let mut se = vec![vec![0.0; ns]; ne];
    let rows: Vec<Vec<C64>> = sum
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mean: Vec<C64> = s.iter().map(|v| v / m).collect();
            for i in 0..ne {
                // sample variance of the complex values (real + imaginary parts)
                let var =
                    if config.ntraj > 1 { ((sq[k][i] - m * mean[i].norm_sqr()) / (m - 1.0)).max(0.0) } else { 0.0 };
                se[i][k] = (var / m).sqrt();
            }
            mean
        })
        .collect();
    log::debug!("mcsolve: {} trajectories, {:.1} jumps on average", config.ntraj, jumps as f64 / m);
    shared.monitor.report(top);
    let mut ts = shared.sampler.assemble(shared.times.clone(), &rows, Some(se), config.ntraj, Some(config.seed));
    ts.max_top_population = top;
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::mesolve;
    use crate::model::{build_tat_model, ModelKind};
    use crate::operator::{destroy_op, spin_ops_in, Operator};

    #[test]
    fn jump_free_limit_has_zero_variance() {
        let m = build_tat_model(C64::new(0.0, 0.05), 6).unwrap();
        let s = spin_ops_in(&m.layout).unwrap();
        let grid = TimeGrid::new(0.0, 10.0, 6).unwrap();
        let obs = [Observable::expect("sz", s.sz.clone())];
        let cfg = SolverConfig { ntraj: 50, ..Default::default() };
        let psi = QuantumState::spin_ground(6).unwrap();
        let mc = mcsolve(&m, &psi, &grid, &obs, &cfg).unwrap();
        let me = mesolve(&m, &psi, &grid, &obs, &cfg).unwrap();
        assert!(mc.std_err("sz").unwrap().iter().all(|&e| e == 0.0));
        for (a, b) in mc.get("sz").unwrap().iter().zip(me.get("sz").unwrap()) {
            assert!((a - b).norm() < 1e-7);
        }
        assert_eq!(mc.ntraj, 50);
    }

    #[test]
    fn single_mode_decay_within_three_standard_errors() {
        let a = destroy_op(2).unwrap();
        let layout = a.layout().clone();
        let m = Model::new(layout.clone(), Operator::zero(&layout), vec![a.clone()], "decay", ModelKind::Full).unwrap();
        let n = a.adjoint().compose(&a).unwrap();
        let grid = TimeGrid::new(0.0, 2.0, 5).unwrap();
        let cfg = SolverConfig { ntraj: 2000, seed: 3, ..Default::default() };
        let ts = mcsolve(&m, &QuantumState::fock(2, 1).unwrap(), &grid, &[Observable::expect("n", n)], &cfg).unwrap();
        let n = ts.real("n").unwrap();
        let se = ts.std_err("n").unwrap();
        for (k, t) in ts.times.iter().enumerate() {
            let want = (-t).exp();
            assert!((n[k] - want).abs() <= 3.0 * se[k] + 1e-9, "t = {t}: {} vs {want} (se {})", n[k], se[k]);
        }
    }

    #[test]
    fn norm_decreases_between_jumps() {
        let layout = SpaceLayout::single(Factor::Spin { n: 3 }).unwrap();
        let s = spin_ops_in(&layout).unwrap();
        let shifted = s.sz.scale_real(0.5).add(&Operator::identity(&layout).scale_real(2.0)).unwrap();
        let m = Model::new(layout, s.sx.clone(), vec![s.sm.scale_real(0.3), shifted], "nh", ModelKind::Tat).unwrap();
        let mut sys = NonHermitian { m: non_hermitian_generator(&m) };
        let psi = QuantumState::spin_ground(3).unwrap();
        let mut ode = Dop853::new(&mut sys, 0.0, psi.vector().unwrap(), SolverConfig::default().step_control());
        let mut last = 1.0;
        while ode.t() < 2.0 {
            ode.step(&mut sys, 2.0).unwrap();
            let n = norm_sqr(ode.y());
            assert!(n < last, "norm rose to {n} at t = {}", ode.t());
            last = n;
        }
        // Σ c†c >= (2 - 3/4)² bounds the decay rate from below
        assert!(last < (-1.25f64.powi(2) * 2.0).exp());
    }

    #[test]
    fn rejects_mixed_initial_state() {
        let m = build_tat_model(C64::new(0.0, 0.05), 2).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let rho = QuantumState::spin_ground(2).unwrap().to_mixed();
        assert!(mcsolve(&m, &rho, &grid, &[], &SolverConfig::default()).is_err());
    }

    #[test]
    fn streams_differ_between_trajectories() {
        let a: f64 = trajectory_rng(1, 0).random();
        let b: f64 = trajectory_rng(1, 1).random();
        let c: f64 = trajectory_rng(1, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
