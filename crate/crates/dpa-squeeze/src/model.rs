//! Hamiltonians and collapse operators for the simulated models.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::operator::{destroy_in, spin_ops_in, Operator};
use crate::params::{derive_params, DerivedParams, ModelParams};
use crate::space::{Factor, SpaceLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// Pump, signal and spin.
    Full,
    /// Signal mode eliminated, two-axis-twisting-like pump-spin coupling.
    Effective,
    /// Effective model plus the dissipators left by eliminating a lossy signal mode.
    Eliminated,
    /// Spin-only two-axis twisting.
    Tat,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub layout: SpaceLayout,
    pub hamiltonian: Operator,
    /// Rate-weighted collapse operators; zero rates are omitted.
    pub collapse_ops: Vec<Operator>,
    pub label: String,
    pub kind: ModelKind,
}

impl Model {
    pub fn new(
        layout: SpaceLayout,
        hamiltonian: Operator,
        collapse_ops: Vec<Operator>,
        label: impl Into<String>,
        kind: ModelKind,
    ) -> Result<Self> {
        if hamiltonian.layout() != &layout || collapse_ops.iter().any(|c| c.layout() != &layout) {
            return invalid("model operators do not share the model layout");
        }
        let hamiltonian = hamiltonian.claim_hermitian()?;
        Ok(Self { layout, hamiltonian, collapse_ops, label: label.into(), kind })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }
}

fn push_collapse(ops: &mut Vec<Operator>, rate: f64, op: &Operator) {
    if rate > 0.0 {
        ops.push(op.scale_real(rate.sqrt()));
    }
}

/// Drive term. The sign makes `⟨a_p⟩` relax to `d = Ω/(2δ_p - iκ_p)`.
fn drive(a: &Operator, omega: C64) -> Operator {
    a.scale(-omega.conj() / 2.0).plus_adjoint()
}

/// Full three-mode model in the frame rotating with the drive.
///
/// `H = δ_p n_p + δ_s n_s + δ_q S_z + (J a_p a_s†² + g a_s S_+ + h.c.) + H_drive`,
/// plus `+(g²/δ_S) S_+S_-` when Stark compensation is on, which cancels the
/// dispersive shift `-(g²/δ_S) S_+S_-` induced by the detuned signal mode.
pub fn build_full_model(p: &ModelParams) -> Result<Model> {
    let dp = derive_params(p)?;
    build_full_model_with(p, &dp)
}

pub fn build_full_model_with(p: &ModelParams, dp: &DerivedParams) -> Result<Model> {
    let layout = SpaceLayout::full(p.pump_cutoff_or_default(dp), p.signal_cutoff_or_default(), p.n_atoms)?;
    let ap = destroy_in(&layout, 0)?;
    let as_ = destroy_in(&layout, 1)?;
    let s = spin_ops_in(&layout)?;
    let np = ap.adjoint().compose(&ap)?;
    let ns = as_.adjoint().compose(&as_)?;
    let asd = as_.adjoint();

    let mut h = np.scale_real(dp.delta_p).add(&ns.scale_real(p.delta_s))?;
    if p.delta_q != 0.0 {
        h = h.add(&s.sz.scale_real(p.delta_q))?;
    }
    let pair = ap.compose(&asd)?.compose(&asd)?.scale_real(p.j);
    let tc = as_.compose(&s.sp)?.scale_real(p.g);
    h = h.add(&pair.add(&tc)?.plus_adjoint())?;
    if p.omega != C64::new(0.0, 0.0) {
        h = h.add(&drive(&ap, p.omega))?;
    }
    if p.compensate_stark && p.g != 0.0 {
        let spsm = s.sp.compose(&s.sm)?;
        h = h.add(&spsm.scale_real(p.g * p.g / dp.delta_big_s))?;
    }
    let mut c = Vec::new();
    push_collapse(&mut c, p.kappa_p, &ap);
    push_collapse(&mut c, p.kappa_s, &as_);
    push_collapse(&mut c, p.gamma_s / p.n_atoms as f64, &s.sm);
    push_collapse(&mut c, p.gamma_c, &s.sz);
    Model::new(layout, h, c, "full", ModelKind::Full)
}

/// Effective pump-spin model `g_eff (a_p S_+² + a_p† S_-²) + H_drive`.
pub fn build_effective_model(p: &ModelParams) -> Result<Model> {
    let dp = derive_params(p)?;
    build_effective_model_with(p, &dp)
}

pub fn build_effective_model_with(p: &ModelParams, dp: &DerivedParams) -> Result<Model> {
    let layout = SpaceLayout::effective(p.pump_cutoff_or_default(dp), p.n_atoms)?;
    let ap = destroy_in(&layout, 0)?;
    let s = spin_ops_in(&layout)?;
    let sp2 = s.sp.compose(&s.sp)?;
    let mut h = ap.compose(&sp2)?.scale_real(dp.g_eff).plus_adjoint();
    if p.omega != C64::new(0.0, 0.0) {
        h = h.add(&drive(&ap, p.omega))?;
    }
    let mut c = Vec::new();
    push_collapse(&mut c, p.kappa_p, &ap);
    push_collapse(&mut c, p.gamma_s / p.n_atoms as f64, &s.sm);
    push_collapse(&mut c, p.gamma_c, &s.sz);
    Model::new(layout, h, c, "effective", ModelKind::Effective)
}

/// Spin-only `g_tat S_+² + g_tat* S_-²`.
pub fn build_tat_model(g_tat: C64, n: usize) -> Result<Model> {
    if n < 2 {
        return invalid(format!("two-axis twisting needs N >= 2, got {n}"));
    }
    let layout = SpaceLayout::single(Factor::Spin { n })?;
    let s = spin_ops_in(&layout)?;
    let h = s.sp.compose(&s.sp)?.scale(g_tat).plus_adjoint();
    Model::new(layout, h, vec![], "tat", ModelKind::Tat)
}

/// Replaces a lossy signal mode by its adiabatic-elimination dissipators:
/// rates `J² p_γ` on `a_p` and `g² p_γ` on `S_-`, added to the effective model.
pub fn apply_adiabatic_elimination(full: &Model, p: &ModelParams) -> Result<Model> {
    if full.kind != ModelKind::Full || full.layout.signal_slot().is_none() {
        return invalid("adiabatic elimination needs the full model");
    }
    if !(p.kappa_s > 0.0) {
        return invalid("adiabatic elimination needs kappa_s > 0");
    }
    let dp = derive_params(p)?;
    let eff = build_effective_model_with(p, &dp)?;
    let ap = destroy_in(&eff.layout, 0)?;
    let s = spin_ops_in(&eff.layout)?;
    let mut c = eff.collapse_ops;
    push_collapse(&mut c, p.j * p.j * dp.p_gamma, &ap);
    push_collapse(&mut c, p.g * p.g * dp.p_gamma, &s.sm);
    Model::new(eff.layout, eff.hamiltonian, c, "eliminated", ModelKind::Eliminated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::spin_ops;

    fn zero_coupling(n: usize) -> ModelParams {
        let mut p = ModelParams::reference(n);
        p.g = 0.0;
        p.j = 0.0;
        p.omega = C64::new(0.0, 0.0);
        p.kappa_p = 0.0;
        p.delta_q = 0.3;
        p.pump_cutoff = Some(2);
        p.signal_cutoff = Some(2);
        p
    }

    #[test]
    fn free_hamiltonian_is_diagonal() {
        let p = zero_coupling(2);
        let m = build_full_model(&p).unwrap();
        let dp = derive_params(&p).unwrap();
        for (i, j, v) in m.hamiltonian.matrix().triplets() {
            assert_eq!(i, j);
            let (np, rest) = (i / 9, i % 9);
            let (ns, k) = (rest / 3, rest % 3);
            let want = dp.delta_p * np as f64 + p.delta_s * ns as f64 + p.delta_q * (k as f64 - 1.0);
            assert!((v.re - want).abs() < 1e-14 && v.im == 0.0);
        }
        assert!(m.collapse_ops.is_empty());
    }

    #[test]
    fn reference_run_has_one_collapse() {
        let m = build_full_model(&ModelParams::reference(50)).unwrap();
        assert_eq!(m.collapse_ops.len(), 1);
        assert_eq!(m.dim(), 12 * 6 * 51);
    }

    #[test]
    fn single_atom_jaynes_cummings_block() {
        let mut p = zero_coupling(1);
        p.g = 1.0;
        p.delta_q = 0.0;
        p.compensate_stark = false;
        let m = build_full_model(&p).unwrap();
        // |0_p, 1_s, ↓⟩ = index 2, |0_p, 0_s, ↑⟩ = index 1
        let h = m.hamiltonian.matrix();
        assert_eq!(h.get(1, 2), C64::new(1.0, 0.0));
        assert_eq!(h.get(2, 1), C64::new(1.0, 0.0));
        assert_eq!(h.get(2, 2), C64::new(p.delta_s, 0.0));
        assert_eq!(h.get(1, 1), C64::new(0.0, 0.0));
    }

    #[test]
    fn effective_squared_raising_element() {
        let s = spin_ops(2).unwrap();
        let sp2 = s.sp.compose(&s.sp).unwrap();
        assert_eq!(sp2.matrix().nnz(), 1);
        assert!((sp2.matrix().get(2, 0) - C64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn effective_without_coupling_is_drive_only() {
        let mut p = ModelParams::reference(4);
        p.g = 0.0;
        let m = build_effective_model(&p).unwrap();
        let ap = destroy_in(&m.layout, 0).unwrap();
        let want = drive(&ap, p.omega);
        assert_eq!(m.hamiltonian.to_dense(), want.to_dense());
    }

    #[test]
    fn tat_real_coupling_is_twice_sx2_minus_sy2() {
        let m = build_tat_model(C64::new(1.0, 0.0), 2).unwrap();
        let s = spin_ops(2).unwrap();
        let sx2 = s.sx.compose(&s.sx).unwrap();
        let sy2 = s.sy.compose(&s.sy).unwrap();
        let want = sx2.sub(&sy2).unwrap().scale_real(2.0).to_dense();
        let got = m.hamiltonian.to_dense();
        assert!(got.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-14));
        let z = build_tat_model(C64::new(0.0, 0.0), 4).unwrap();
        assert_eq!(z.hamiltonian.matrix().nnz(), 0);
        assert!(build_tat_model(C64::new(1.0, 0.0), 1).is_err());
    }

    #[test]
    fn elimination_adds_two_channels() {
        let mut p = ModelParams::reference(4);
        p.kappa_s = 0.1;
        let full = build_full_model(&p).unwrap();
        let el = apply_adiabatic_elimination(&full, &p).unwrap();
        assert_eq!(el.collapse_ops.len(), 3);
        assert_eq!(el.layout.signal_slot(), None);
        p.kappa_s = 0.0;
        assert!(apply_adiabatic_elimination(&full, &p).is_err());
        let eff = build_effective_model(&ModelParams::reference(4)).unwrap();
        assert!(apply_adiabatic_elimination(&eff, &ModelParams::reference(4)).is_err());
    }

    #[test]
    fn hamiltonians_are_hermitian() {
        let mut p = ModelParams::reference(3);
        p.omega = C64::new(0.3, 0.7);
        p.gamma_c = 0.1;
        p.gamma_s = 0.1;
        p.kappa_s = 0.2;
        for m in [build_full_model(&p).unwrap(), build_effective_model(&p).unwrap()] {
            assert!(m.hamiltonian.is_hermitian());
            assert!(m.hamiltonian.matrix().hermitian_defect() < 1e-12);
        }
    }
}
