//! Structural invariants checked over random inputs.

use dpa_squeeze::meanfield::{mf_integrate, MeanFieldParams, MeanFieldState};
use dpa_squeeze::model::{build_effective_model, build_full_model};
use dpa_squeeze::observables::{spin_moments, squeezing_in_basis, squeezing_wineland};
use dpa_squeeze::operator::{destroy_in, destroy_op, embed, spin_ops, spin_ops_in};
use dpa_squeeze::params::derive_params;
use dpa_squeeze::state::{coherent_state, expectation};
use dpa_squeeze::{Factor, ModelParams, Operator, QuantumState, SpaceLayout, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn max_dense_diff(a: &Operator, b: &Operator) -> f64 {
    a.to_dense().iter().zip(b.to_dense()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn small_params(n: usize, g: f64, j: f64, delta_s: f64, delta_q: f64) -> ModelParams {
    let mut p = ModelParams::reference(n);
    p.g = g;
    p.j = j;
    p.delta_s = delta_s;
    p.delta_q = delta_q;
    p.omega = c(0.0, 0.0);
    p.kappa_p = 0.0;
    p.pump_cutoff = Some(3);
    p.signal_cutoff = Some(3);
    p
}

fn hermitian_spectrum(op: &Operator) -> Vec<f64> {
    let d = op.dim();
    let m = nalgebra::DMatrix::from_row_slice(d, d, &op.to_dense());
    let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Rodrigues rotation about a normalised `axis`.
fn rotation(axis: (f64, f64, f64), angle: f64) -> Option<[[f64; 3]; 3]> {
    let norm = (axis.0 * axis.0 + axis.1 * axis.1 + axis.2 * axis.2).sqrt();
    if norm < 1e-3 {
        return None;
    }
    let u = [axis.0 / norm, axis.1 / norm, axis.2 / norm];
    let (s, c) = angle.sin_cos();
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = u[i] * u[j] * (1.0 - c) + if i == j { c } else { 0.0 };
        }
    }
    r[0][1] -= u[2] * s;
    r[1][0] += u[2] * s;
    r[0][2] += u[1] * s;
    r[2][0] -= u[1] * s;
    r[1][2] -= u[0] * s;
    r[2][1] += u[0] * s;
    Some(r)
}

fn random_spin_state(n: usize, amps: &[(f64, f64)]) -> QuantumState {
    let layout = SpaceLayout::single(Factor::Spin { n }).unwrap();
    let psi = amps[..=n].iter().map(|&(r, i)| c(r, i)).collect();
    QuantumState::pure(layout, psi).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn su2_algebra_holds(n in 1usize..=8) {
        let s = spin_ops(n).unwrap();
        let i = c(0.0, 1.0);
        let l = n as f64 / 2.0;
        let comm = s.sx.commutator(&s.sy).unwrap();
        prop_assert!(max_dense_diff(&comm, &s.sz.scale(i)) < 1e-12);
        let comm = s.sy.commutator(&s.sz).unwrap();
        prop_assert!(max_dense_diff(&comm, &s.sx.scale(i)) < 1e-12);
        let comm = s.sz.commutator(&s.sx).unwrap();
        prop_assert!(max_dense_diff(&comm, &s.sy.scale(i)) < 1e-12);
        let cas = s.sx.compose(&s.sx).unwrap()
            .add(&s.sy.compose(&s.sy).unwrap()).unwrap()
            .add(&s.sz.compose(&s.sz).unwrap()).unwrap();
        let want = Operator::identity(s.sx.layout()).scale_real(l * (l + 1.0));
        prop_assert!(max_dense_diff(&cas, &want) < 1e-12);
    }

    #[test]
    fn truncated_bosonic_commutator(cutoff in 1usize..30) {
        let a = destroy_op(cutoff).unwrap();
        let comm = a.commutator(&a.adjoint()).unwrap();
        for i in 0..=cutoff {
            for j in 0..=cutoff {
                let want = if i == j && i < cutoff { 1.0 } else if i == j { -(cutoff as f64) } else { 0.0 };
                prop_assert!((comm.matrix().get(i, j) - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn embedding_preserves_spectra(
        pc in 1usize..3, n in 1usize..4, slot in 0usize..3, x in -1.0..1.0f64, y in -1.0..1.0f64,
    ) {
        let layout = SpaceLayout::full(pc, 1, n).unwrap();
        prop_assume!(layout.dim() <= 64);
        // a Hermitian single-factor operator with a non-trivial spectrum
        let op = if slot == 2 {
            let s = spin_ops(n).unwrap();
            s.sx.scale_real(x).add(&s.sz.compose(&s.sz).unwrap().scale_real(y)).unwrap()
        } else {
            let a = destroy_op(layout.factor_dim(slot) - 1).unwrap();
            let na = a.adjoint().compose(&a).unwrap();
            a.scale(c(x, y)).plus_adjoint().add(&na.compose(&na).unwrap()).unwrap()
        };
        let big = embed(&op, &layout, slot).unwrap();
        let mult = layout.dim() / op.dim();
        let mut want: Vec<f64> = hermitian_spectrum(&op).into_iter().flat_map(|e| std::iter::repeat_n(e, mult)).collect();
        want.sort_by(f64::total_cmp);
        let got = hermitian_spectrum(&big);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-10, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn embedding_is_a_homomorphism(pc in 1usize..4, sc in 1usize..4, n in 1usize..4) {
        let layout = SpaceLayout::full(pc, sc, n).unwrap();
        let a = destroy_op(pc).unwrap();
        let ad = a.adjoint();
        let lhs = embed(&ad.compose(&a).unwrap(), &layout, 0).unwrap();
        let ea = embed(&a, &layout, 0).unwrap();
        let rhs = ea.adjoint().compose(&ea).unwrap();
        prop_assert!(max_dense_diff(&lhs, &rhs) < 1e-14);
        // n_p ⊗ 1 has the single-mode spectrum, each level repeated (sc+1)(n+1) times
        let mut diag: Vec<f64> = (0..layout.dim()).map(|k| lhs.matrix().get(k, k).re).collect();
        diag.sort_by(f64::total_cmp);
        let rep = (sc + 1) * (n + 1);
        for (k, v) in diag.iter().enumerate() {
            prop_assert!((v - (k / rep) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_state_is_normalised_eigenstate(re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let alpha = c(re, im);
        let psi = coherent_state(alpha, 40).unwrap();
        prop_assert!((psi.trace() - 1.0).abs() < 1e-12);
        let a = destroy_op(40).unwrap();
        prop_assert!((expectation(&a, &psi).unwrap() - alpha).norm() < 1e-8);
    }

    #[test]
    fn models_are_hermitian(
        n in 1usize..4, g in 0.0..0.5f64, j in 0.0..2.0f64, ds in 5.0..20.0f64,
        or in -1.0..1.0f64, oi in -1.0..1.0f64, stark: bool,
    ) {
        let mut p = small_params(n, g, j, ds, 0.3);
        p.omega = c(or, oi);
        p.kappa_p = 1.0;
        p.compensate_stark = stark;
        let full = build_full_model(&p).unwrap();
        prop_assert!(full.hamiltonian.matrix().hermitian_defect() < 1e-14);
        let eff = build_effective_model(&p).unwrap();
        prop_assert!(eff.hamiltonian.matrix().hermitian_defect() < 1e-14);
    }

    #[test]
    fn undriven_full_model_conserves_excitations(
        n in 1usize..5, g in 0.0..0.5f64, j in 0.0..2.0f64, ds in 5.0..20.0f64, dq in -1.0..1.0f64,
    ) {
        let p = small_params(n, g, j, ds, dq);
        let m = build_full_model(&p).unwrap();
        let l = &m.layout;
        let ap = destroy_in(l, 0).unwrap();
        let as_ = destroy_in(l, 1).unwrap();
        let np = ap.adjoint().compose(&ap).unwrap();
        let ns = as_.adjoint().compose(&as_).unwrap();
        let q = np.scale_real(2.0).add(&ns).unwrap().add(&spin_ops_in(l).unwrap().sz).unwrap();
        prop_assert!(m.hamiltonian.commutator(&q).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn undriven_effective_model_conserves_excitations(n in 2usize..8, g in 0.05..0.5f64, j in 0.5..2.0f64) {
        let p = small_params(n, g, j, 15.0, 0.0);
        let m = build_effective_model(&p).unwrap();
        let l = &m.layout;
        let ap = destroy_in(l, 0).unwrap();
        let q = ap.adjoint().compose(&ap).unwrap().scale_real(2.0).add(&spin_ops_in(l).unwrap().sz).unwrap();
        prop_assert!(m.hamiltonian.commutator(&q).unwrap().max_abs() < 1e-12);
    }

    /// The compensated single-atom excitation keeps its bare energy up to
    /// fourth order in `g / δ_s`.
    #[test]
    fn stark_compensation_cancels_second_order_shift(g in 0.01..0.3f64, ds in 5.0..20.0f64) {
        let mut p = small_params(1, g, 0.7, ds, 0.0);
        p.compensate_stark = true;
        let h = build_full_model(&p).unwrap().hamiltonian;
        // |n_p=0, n_s=0, ↑⟩ and |0, 1, ↓⟩; spin index 1 is ↑
        let (a, b) = (1, 2);
        let ea = h.matrix().get(a, a).re;
        let eb = h.matrix().get(b, b).re;
        let v = h.matrix().get(a, b).norm();
        prop_assert!((v - g).abs() < 1e-14);
        let mid = (ea + eb) / 2.0;
        let dressed = mid - ((eb - ea).powi(2) / 4.0 + v * v).sqrt();
        let bound = 3.0 * g.powi(4) / ds.powi(3);
        prop_assert!(dressed.abs() < bound, "shift {dressed:e} vs bound {bound:e}");
        // without compensation the shift is second order
        prop_assert!((ea - g * g / ds).abs() < 1e-14);
    }

    #[test]
    fn derived_parameters_are_continuous(om in 0.0..3.0f64, ph in 0.0..std::f64::consts::TAU, kp in 0.5..3.0f64) {
        let mut p = ModelParams::reference(50);
        p.omega = C64::from_polar(om, ph);
        p.kappa_p = kp;
        let d1 = derive_params(&p).unwrap();
        prop_assert_eq!(&derive_params(&p).unwrap(), &d1);
        p.omega += C64::from_polar(1e-9, ph);
        let d2 = derive_params(&p).unwrap();
        prop_assert!((d2.d - d1.d).norm() < 1e-8, "Δd = {:e}", (d2.d - d1.d).norm());
        prop_assert!((d2.g_eff - d1.g_eff).abs() < 1e-8 * d1.g_eff);
        prop_assert!(d1.g_eff >= d1.g_eff_undriven);
        prop_assert!(d1.delta_big_s <= p.delta_s);
    }

    #[test]
    fn undriven_coupling_is_exact(n in 1usize..100, kp in 0.0..3.0f64, ds in 5.0..30.0f64) {
        let mut p = ModelParams::reference(n);
        p.omega = c(0.0, 0.0);
        p.kappa_p = kp;
        p.delta_s = ds;
        let d = derive_params(&p).unwrap();
        prop_assert_eq!(d.g_eff, d.g_eff_undriven);
    }

    /// First plus second order shift of every pump- and signal-vacuum Dicke
    /// level, with `H_0` the diagonal free part and `V` the coupling plus the
    /// compensation term.
    #[test]
    fn stark_compensation_cancels_perturbative_shift(
        n in 1usize..=6, g in 0.01..0.3f64, j in 0.0..2.0f64, ds in 5.0..20.0f64,
    ) {
        let mut p = small_params(n, g, j, ds, 0.0);
        p.compensate_stark = true;
        let dp = derive_params(&p).unwrap();
        let h = build_full_model(&p).unwrap().hamiltonian;
        let l = n as f64 / 2.0;
        let d = n + 1;
        let spsm = |k: usize| {
            let m = k as f64 - l;
            l * (l + 1.0) - m * (m - 1.0)
        };
        let e0 = |idx: usize| h.matrix().get(idx, idx).re - g * g / dp.delta_big_s * spsm(idx % d);
        let bound = 5.0 * g.powi(4) / dp.delta_big_s.powi(3);
        for k in 0..d {
            let first = h.matrix().get(k, k).re - e0(k);
            let second: f64 = h
                .matrix()
                .row(k)
                .filter(|&(col, _)| col != k)
                .map(|(col, v)| v.norm_sqr() / (e0(k) - e0(col)))
                .sum();
            prop_assert!((first + second).abs() < bound, "level {k}: {:e} vs {bound:e}", first + second);
            // each term alone is second order
            prop_assert!(k == 0 || first > 0.0);
        }
    }

    #[test]
    fn squeezing_is_rotation_invariant(
        n in 2usize..7,
        amps in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 7),
        phi in 0.0..std::f64::consts::TAU,
    ) {
        let psi = random_spin_state(n, &amps);
        let m = spin_moments(&psi).unwrap();
        let len = (m.mean[0].powi(2) + m.mean[1].powi(2) + m.mean[2].powi(2)).sqrt();
        prop_assume!(len > 0.05 * n as f64);
        let l = n as f64 / 2.0;
        let rotated: Vec<(f64, f64)> = amps[..=n]
            .iter()
            .enumerate()
            .map(|(k, &(re, im))| {
                let z = c(re, im) * C64::from_polar(1.0, -phi * (k as f64 - l));
                (z.re, z.im)
            })
            .collect();
        let x1 = squeezing_wineland(&m).unwrap().xi2;
        let x2 = squeezing_wineland(&spin_moments(&random_spin_state(n, &rotated)).unwrap()).unwrap().xi2;
        prop_assert!((x1 - x2).abs() < 1e-8);
    }

    /// Rotating every moment by one SO(3) matrix is the same as rotating
    /// the state and the reference frame together.
    #[test]
    fn squeezing_is_invariant_under_frame_rotations(
        n in 2usize..7,
        amps in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 7),
        axis in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
        angle in 0.0..std::f64::consts::TAU,
    ) {
        let m = spin_moments(&random_spin_state(n, &amps)).unwrap();
        let len = (m.mean[0].powi(2) + m.mean[1].powi(2) + m.mean[2].powi(2)).sqrt();
        prop_assume!(len > 0.05 * n as f64);
        let r = rotation(axis, angle);
        prop_assume!(r.is_some());
        let r = r.unwrap();
        let mut rm = m;
        rm.mean = [0, 1, 2].map(|i| (0..3).map(|k| r[i][k] * m.mean[k]).sum());
        rm.second = [0, 1, 2].map(|i| {
            [0, 1, 2].map(|j| (0..3).flat_map(|k| (0..3).map(move |q| (k, q))).map(|(k, q)| r[i][k] * m.second[k][q] * r[j][q]).sum())
        });
        let x1 = squeezing_wineland(&m).unwrap().xi2;
        let x2 = squeezing_wineland(&rm).unwrap().xi2;
        prop_assert!((x1 - x2).abs() < 1e-8);
    }

    #[test]
    fn coherent_spin_states_are_unsqueezed(n in 1usize..30, theta in 0.0..std::f64::consts::PI, phi in 0.0..std::f64::consts::TAU) {
        let (cs, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let amps: Vec<(f64, f64)> = (0..=n)
            .map(|k| {
                let z = C64::from_polar(binomial(n, k).sqrt() * cs.powi((n - k) as i32) * sn.powi(k as i32), k as f64 * phi);
                (z.re, z.im)
            })
            .collect();
        let m = spin_moments(&random_spin_state(n, &amps)).unwrap();
        prop_assert!((squeezing_wineland(&m).unwrap().xi2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn squeezing_is_basis_independent(
        n in 2usize..7,
        amps in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 7),
        psi_angle in 0.0..std::f64::consts::TAU,
    ) {
        let m = spin_moments(&random_spin_state(n, &amps)).unwrap();
        let len = (m.mean[0].powi(2) + m.mean[1].powi(2) + m.mean[2].powi(2)).sqrt();
        prop_assume!(len > 0.05 * n as f64);
        let r = squeezing_wineland(&m).unwrap();
        let u = [m.mean[0] / len, m.mean[1] / len, m.mean[2] / len];
        let (n1, n2) = dpa_squeeze::observables::perpendicular_basis(u);
        let (cs, sn) = (psi_angle.cos(), psi_angle.sin());
        let m1 = [0, 1, 2].map(|k| cs * n1[k] + sn * n2[k]);
        let m2 = [0, 1, 2].map(|k| -sn * n1[k] + cs * n2[k]);
        let r2 = squeezing_in_basis(&m, m1, m2).unwrap();
        prop_assert!((r.xi2 - r2.xi2).abs() < 1e-12);
    }
}

fn lossless_mf(n: f64, g_eff: f64) -> MeanFieldParams {
    MeanFieldParams {
        n,
        g_eff,
        omega: c(0.0, 0.0),
        kappa_p: 0.0,
        pump_extra: 0.0,
        gamma_s: 0.0,
        spin_extra: 0.0,
        gamma_c: 0.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mean_field_conserves_excitations_and_purity(
        re in -1.5..1.5f64, im in 0.3..1.5f64, g_eff in 1e-4..1e-3f64,
    ) {
        let p = lossless_mf(1e4, g_eff);
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.5).collect();
        let tr = mf_integrate(&p, MeanFieldState::initial(c(re, im)), &times).unwrap();
        let q0 = 2.0 * c(re, im).norm_sqr();
        for s in &tr.states {
            prop_assert!((2.0 * s.a_p.norm_sqr() + s.nb - q0).abs() < 1e-8 * q0);
            // a pure Gaussian state saturates |⟨b²⟩|² = nb (nb + 1)
            let gap = s.b2.norm_sqr() - s.nb * (s.nb + 1.0);
            prop_assert!(gap.abs() < 1e-7 * (1.0 + s.nb * s.nb));
        }
    }

    /// Scaling every rate by `λ` is the same as running the clock `λ` times faster.
    #[test]
    fn mean_field_time_scale_covariance(lambda in 0.2..5.0f64, kp in 0.0..2.0f64, gs in 0.0..0.1f64) {
        let mut p = lossless_mf(1e3, 2e-3);
        p.omega = c(0.5, 0.2);
        p.kappa_p = kp;
        p.gamma_s = gs;
        let mut q = p;
        q.g_eff *= lambda;
        q.omega *= lambda;
        q.kappa_p *= lambda;
        q.gamma_s *= lambda;
        let times: Vec<f64> = (0..=20).map(|k| k as f64).collect();
        let scaled: Vec<f64> = times.iter().map(|t| t / lambda).collect();
        let init = MeanFieldState::initial(c(0.1, 0.9));
        let a = mf_integrate(&p, init, &times).unwrap();
        let b = mf_integrate(&q, init, &scaled).unwrap();
        prop_assert_eq!(a.states.len(), b.states.len());
        for (x, y) in a.states.iter().zip(&b.states) {
            prop_assert!((x.a_p - y.a_p).norm() < 1e-7);
            prop_assert!((x.b2 - y.b2).norm() < 1e-7 * (1.0 + x.b2.norm()));
            prop_assert!((x.nb - y.nb).abs() < 1e-7 * (1.0 + x.nb));
        }
    }
}
