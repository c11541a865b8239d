//! Pure and mixed states over a [`SpaceLayout`].

use num_complex::Complex64 as C64;

use crate::error::{invalid, Result};
use crate::operator::Operator;
use crate::space::{Factor, SpaceLayout};

/// Truncation tail above which [`coherent_state`] warns.
pub const COHERENT_TAIL_WARN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum StateData {
    /// State vector.
    Pure(Vec<C64>),
    /// Row-major density matrix.
    Mixed(Vec<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    layout: SpaceLayout,
    data: StateData,
}

impl QuantumState {
    /// Normalised pure state.
    pub fn pure(layout: SpaceLayout, mut psi: Vec<C64>) -> Result<Self> {
        if psi.len() != layout.dim() {
            return invalid(format!("vector length {} vs layout dimension {}", psi.len(), layout.dim()));
        }
        let n = norm(&psi);
        if !(n > 0.0) || !n.is_finite() {
            return invalid("state vector has zero or non-finite norm");
        }
        psi.iter_mut().for_each(|v| *v /= n);
        Ok(Self { layout, data: StateData::Pure(psi) })
    }

    /// Density matrix; checks trace 1 (1e-8) and Hermiticity (1e-10).
    pub fn mixed(layout: SpaceLayout, rho: Vec<C64>) -> Result<Self> {
        let d = layout.dim();
        if rho.len() != d * d {
            return invalid(format!("density matrix has {} entries, expected {}", rho.len(), d * d));
        }
        let tr: C64 = (0..d).map(|i| rho[i * d + i]).sum();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-8 {
            return invalid(format!("density matrix trace is {tr}"));
        }
        for i in 0..d {
            for j in 0..i {
                if (rho[i * d + j] - rho[j * d + i].conj()).norm() > 1e-10 {
                    return invalid("density matrix is not Hermitian");
                }
            }
        }
        Ok(Self { layout, data: StateData::Mixed(rho) })
    }

    pub fn basis(layout: SpaceLayout, index: usize) -> Result<Self> {
        let d = layout.dim();
        if index >= d {
            return invalid(format!("basis index {index} outside dimension {d}"));
        }
        let mut v = vec![C64::new(0.0, 0.0); d];
        v[index] = C64::new(1.0, 0.0);
        Self::pure(layout, v)
    }

    /// Dicke state `|l, m⟩` for `n` atoms; `m` given as `2m` to stay integral.
    pub fn dicke(n: usize, two_m: i64) -> Result<Self> {
        let k = two_m + n as i64;
        if k < 0 || k > 2 * n as i64 || k % 2 != 0 {
            return invalid(format!("2m = {two_m} is not on the ladder of {n} atoms"));
        }
        Self::basis(SpaceLayout::single(Factor::Spin { n })?, (k / 2) as usize)
    }

    /// Collective ground state `|l, -l⟩`.
    pub fn spin_ground(n: usize) -> Result<Self> {
        Self::basis(SpaceLayout::single(Factor::Spin { n })?, 0)
    }

    pub fn fock(cutoff: usize, n: usize) -> Result<Self> {
        Self::basis(SpaceLayout::single(Factor::Boson { cutoff })?, n)
    }

    /// Maximally mixed state on `layout`.
    pub fn maximally_mixed(layout: SpaceLayout) -> Self {
        let d = layout.dim();
        let mut rho = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            rho[i * d + i] = C64::new(1.0 / d as f64, 0.0);
        }
        Self { layout, data: StateData::Mixed(rho) }
    }

    /// Kronecker product of single-or-multi-factor states, in order.
    pub fn tensor(parts: &[QuantumState]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return invalid("tensor product of zero states");
        };
        let mut acc = first.clone();
        for p in &parts[1..] {
            let mut factors = acc.layout.factors().to_vec();
            factors.extend_from_slice(p.layout.factors());
            let layout = SpaceLayout::new(factors)?;
            acc = match (&acc.data, &p.data) {
                (StateData::Pure(a), StateData::Pure(b)) => {
                    let v = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
                    Self { layout, data: StateData::Pure(v) }
                }
                _ => {
                    let ra = acc.density_matrix();
                    let rb = p.density_matrix();
                    let (da, db) = (acc.dim(), p.dim());
                    let d = da * db;
                    let mut rho = vec![C64::new(0.0, 0.0); d * d];
                    for i in 0..da {
                        for j in 0..da {
                            let a = ra[i * da + j];
                            for k in 0..db {
                                for l in 0..db {
                                    rho[(i * db + k) * d + j * db + l] = a * rb[k * db + l];
                                }
                            }
                        }
                    }
                    Self { layout, data: StateData::Mixed(rho) }
                }
            };
        }
        Ok(acc)
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn vector(&self) -> Option<&[C64]> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Mixed(_) => None,
        }
    }

    /// Row-major density matrix (built from the vector for pure states).
    pub fn density_matrix(&self) -> Vec<C64> {
        match &self.data {
            StateData::Mixed(r) => r.clone(),
            StateData::Pure(v) => v.iter().flat_map(|a| v.iter().map(move |b| a * b.conj())).collect(),
        }
    }

    pub fn to_mixed(&self) -> Self {
        Self { layout: self.layout.clone(), data: StateData::Mixed(self.density_matrix()) }
    }

    pub fn trace(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => norm(v).powi(2),
            StateData::Mixed(r) => {
                let d = self.dim();
                (0..d).map(|i| r[i * d + i].re).sum()
            }
        }
    }

    pub fn purity(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => norm(v).powi(4),
            StateData::Mixed(r) => r.iter().map(|v| v.norm_sqr()).sum(),
        }
    }

    /// Reduced density matrix of factor `slot`, row-major.
    pub fn reduced(&self, slot: usize) -> Result<Vec<C64>> {
        if slot >= self.layout.factors().len() {
            return invalid(format!("slot {slot} outside layout"));
        }
        let (left, right) = self.layout.split_dims(slot);
        let ds = self.layout.factor_dim(slot);
        Ok(match &self.data {
            StateData::Pure(v) => reduce_pure(v, left, ds, right),
            StateData::Mixed(r) => reduce_mixed(r, left, ds, right),
        })
    }
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Partial trace of `|ψ⟩⟨ψ|` keeping the middle factor of `left ⊗ ds ⊗ right`.
pub(crate) fn reduce_pure(v: &[C64], left: usize, ds: usize, right: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); ds * ds];
    for a in 0..left {
        for i in 0..ds {
            let row_i = &v[(a * ds + i) * right..(a * ds + i + 1) * right];
            for j in 0..ds {
                let row_j = &v[(a * ds + j) * right..(a * ds + j + 1) * right];
                let mut s = C64::new(0.0, 0.0);
                for (x, y) in row_i.iter().zip(row_j) {
                    s += x * y.conj();
                }
                out[i * ds + j] += s;
            }
        }
    }
    out
}

pub(crate) fn reduce_mixed(r: &[C64], left: usize, ds: usize, right: usize) -> Vec<C64> {
    let d = left * ds * right;
    let mut out = vec![C64::new(0.0, 0.0); ds * ds];
    for a in 0..left {
        for i in 0..ds {
            for j in 0..ds {
                let mut s = C64::new(0.0, 0.0);
                for b in 0..right {
                    s += r[((a * ds + i) * right + b) * d + (a * ds + j) * right + b];
                }
                out[i * ds + j] += s;
            }
        }
    }
    out
}

/// Truncated coherent state, renormalised after truncation.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<QuantumState> {
    let layout = SpaceLayout::single(Factor::Boson { cutoff })?;
    let mut c = Vec::with_capacity(cutoff + 1);
    let mut term = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    c.push(term);
    for n in 1..=cutoff {
        term = term * alpha / (n as f64).sqrt();
        c.push(term);
    }
    let kept: f64 = c.iter().map(|x| x.norm_sqr()).sum();
    let tail = (1.0 - kept).max(0.0);
    if tail > COHERENT_TAIL_WARN {
        log::warn!("coherent state |{alpha}> truncated at {cutoff}: tail weight {tail:.2e}");
    }
    QuantumState::pure(layout, c)
}

/// `⟨ψ|A|ψ⟩` or `Tr(ρA)`.
pub fn expectation(op: &Operator, state: &QuantumState) -> Result<C64> {
    if op.layout() != state.layout() {
        return invalid("operator and state layouts differ");
    }
    Ok(match &state.data {
        StateData::Pure(v) => op.matrix().quadratic_form(v),
        StateData::Mixed(r) => op.matrix().trace_product(r),
    })
}

/// Real expectation of a Hermitian-flagged operator plus the imaginary residue.
pub fn expectation_real(op: &Operator, state: &QuantumState) -> Result<(f64, f64)> {
    if !op.is_hermitian() {
        return invalid("operator is not flagged Hermitian");
    }
    let e = expectation(op, state)?;
    Ok((e.re, e.im.abs()))
}
