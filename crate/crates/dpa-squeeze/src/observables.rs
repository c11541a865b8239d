//! Squeezing parameter, squeezing direction, Husimi Q and pump fidelity.

use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Observable, TimeSeries};
use crate::error::{invalid, Error, Result};
use crate::operator::{destroy_in, spin_ops, spin_ops_in, Operator};
use crate::space::{Factor, SpaceLayout};
use crate::state::{coherent_state, expectation, QuantumState};

/// Names of the nine spin moments recorded by [`spin_observables`].
pub const MOMENT_NAMES: [&str; 9] = ["sx", "sy", "sz", "sxx", "syy", "szz", "sxy", "sxz", "syz"];

/// First and symmetrised second moments of the collective spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinMoments {
    pub mean: [f64; 3],
    /// `⟨S_i S_j + S_j S_i⟩ / 2`.
    pub second: [[f64; 3]; 3],
    pub n_atoms: usize,
}

impl SpinMoments {
    fn from_values(v: [f64; 9], n_atoms: usize) -> Self {
        let [x, y, z, xx, yy, zz, xy, xz, yz] = v;
        Self { mean: [x, y, z], second: [[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]], n_atoms }
    }

    /// Moments at sample `k` of a series recorded with [`spin_observables`].
    pub fn from_series(ts: &TimeSeries, k: usize, n_atoms: usize) -> Result<Self> {
        let mut v = [0.0; 9];
        for (slot, name) in v.iter_mut().zip(MOMENT_NAMES) {
            *slot =
                ts.get(name).ok_or_else(|| Error::InvalidArgument(format!("series lacks observable {name}")))?[k].re;
        }
        Ok(Self::from_values(v, n_atoms))
    }
}

/// The nine spin-moment observables on `layout`.
pub fn spin_observables(layout: &SpaceLayout) -> Result<Vec<Observable>> {
    let s = spin_ops_in(layout)?;
    let sym = |a: &Operator, b: &Operator| -> Result<Operator> {
        a.compose(b)?.add(&b.compose(a)?).map(|o| o.scale_real(0.5))
    };
    let ops = [
        s.sx.clone(),
        s.sy.clone(),
        s.sz.clone(),
        s.sx.compose(&s.sx)?,
        s.sy.compose(&s.sy)?,
        s.sz.compose(&s.sz)?,
        sym(&s.sx, &s.sy)?,
        sym(&s.sx, &s.sz)?,
        sym(&s.sy, &s.sz)?,
    ];
    Ok(MOMENT_NAMES.iter().zip(ops).map(|(n, o)| Observable::expect(*n, o)).collect())
}

/// Exact moments of a pure or mixed state.
pub fn spin_moments(state: &QuantumState) -> Result<SpinMoments> {
    let n = state.layout().atom_count().ok_or_else(|| Error::InvalidArgument("layout has no spin factor".into()))?;
    let mut v = [0.0; 9];
    for (slot, o) in v.iter_mut().zip(spin_observables(state.layout())?) {
        if let Observable::Expect { op, .. } = o {
            *slot = expectation(&op, state)?.re;
        }
    }
    Ok(SpinMoments::from_values(v, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingResult {
    pub xi2: f64,
    pub xi2_db: f64,
    /// Unit vector of the squeezed quadrature, orthogonal to the mean spin.
    pub direction: [f64; 3],
    /// Angle of `direction` from the first in-plane axis, in `[0, π)`.
    pub theta: f64,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Orthonormal pair spanning the plane orthogonal to `n`. For `n ∥ ±e_z`
/// this is `(e_x, e_y)`.
pub fn perpendicular_basis(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let project = |e: [f64; 3]| {
        let c = dot(e, n);
        [e[0] - c * n[0], e[1] - c * n[1], e[2] - c * n[2]]
    };
    let mut v = project([1.0, 0.0, 0.0]);
    if dot(v, v) < 1e-12 {
        v = project([0.0, 1.0, 0.0]);
    }
    let n1 = normalize(v);
    let mut n2 = cross(n, n1);
    let flip = if n2[1].abs() > 1e-12 { n2[1] < 0.0 } else { n2[2] < 0.0 };
    if flip {
        n2 = [-n2[0], -n2[1], -n2[2]];
    }
    (n1, n2)
}

/// Wineland parameter `N λ_min(C) / |⟨S⟩|²` with `C` the covariance in the
/// plane orthogonal to the mean spin.
pub fn squeezing_wineland(m: &SpinMoments) -> Result<SqueezingResult> {
    let len = dot(m.mean, m.mean).sqrt();
    if !(len > 1e-9 * m.n_atoms as f64) {
        return Err(Error::Degenerate(format!("mean spin length {len:e} is too small")));
    }
    let n = [m.mean[0] / len, m.mean[1] / len, m.mean[2] / len];
    let (n1, n2) = perpendicular_basis(n);
    squeezing_in_basis(m, n1, n2)
}

/// Same as [`squeezing_wineland`] with a caller-chosen in-plane basis.
pub fn squeezing_in_basis(m: &SpinMoments, n1: [f64; 3], n2: [f64; 3]) -> Result<SqueezingResult> {
    let len2 = dot(m.mean, m.mean);
    if !(len2.sqrt() > 1e-9 * m.n_atoms as f64) {
        return Err(Error::Degenerate("mean spin vanishes".into()));
    }
    let quad = |a: [f64; 3], b: [f64; 3]| {
        let s: f64 = a.iter().zip(&m.second).map(|(ai, row)| ai * dot(*row, b)).sum();
        s - dot(a, m.mean) * dot(b, m.mean)
    };
    let (a, b, c) = (quad(n1, n1), quad(n1, n2), quad(n2, n2));
    let half = 0.5 * (a - c);
    let lambda = 0.5 * (a + c) - (half * half + b * b).sqrt();
    let v = if b.abs() < 1e-300 {
        if a <= c {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        }
    } else {
        let u = (b, lambda - a);
        let w = (lambda - c, b);
        if u.0.hypot(u.1) >= w.0.hypot(w.1) {
            u
        } else {
            w
        }
    };
    let vn = v.0.hypot(v.1);
    let (v1, v2) = (v.0 / vn, v.1 / vn);
    let direction = [v1 * n1[0] + v2 * n2[0], v1 * n1[1] + v2 * n2[1], v1 * n1[2] + v2 * n2[2]];
    let xi2 = (m.n_atoms as f64 * lambda / len2).max(0.0);
    Ok(SqueezingResult { xi2, xi2_db: 10.0 * xi2.log10(), direction, theta: v2.atan2(v1).rem_euclid(PI) })
}

/// Expected squeezing angle `π/4 + φ/2 (mod π)` for pump phase `φ`.
pub fn squeezing_direction_prediction(phi: f64) -> f64 {
    (FRAC_PI_4 + phi / 2.0).rem_euclid(PI)
}

/// Smallest distance between two axis angles, modulo π.
pub fn axis_angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Uniform `(θ, φ)` grid over the sphere, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HusimiGrid {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for HusimiGrid {
    fn default() -> Self {
        Self { n_theta: 101, n_phi: 101 }
    }
}

impl HusimiGrid {
    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n_theta).map(|k| PI * k as f64 / (self.n_theta - 1) as f64).collect()
    }

    pub fn phis(&self) -> Vec<f64> {
        (0..self.n_phi).map(|k| 2.0 * PI * k as f64 / (self.n_phi - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HusimiField {
    pub n_atoms: usize,
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// `values[i_theta * n_phi + i_phi]`.
    pub values: Vec<f64>,
}

impl HusimiField {
    /// `(N+1)/(4π) ∫ Q sinθ dθ dφ` by the trapezoid rule; 1 for any state.
    pub fn normalization(&self) -> f64 {
        let np = self.phis.len();
        let trap = |x: &[f64], f: &dyn Fn(usize) -> f64| {
            (1..x.len()).map(|i| 0.5 * (x[i] - x[i - 1]) * (f(i) + f(i - 1))).sum::<f64>()
        };
        let row = |i: usize| trap(&self.phis, &|j| self.values[i * np + j]) * self.thetas[i].sin();
        trap(&self.thetas, &row) * (self.n_atoms as f64 + 1.0) / (4.0 * PI)
    }

    /// CSV with header `theta,phi,q`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,phi,q\n");
        let np = self.phis.len();
        for (i, th) in self.thetas.iter().enumerate() {
            for (j, ph) in self.phis.iter().enumerate() {
                s.push_str(&format!("{th:.10e},{ph:.10e},{:.10e}\n", self.values[i * np + j]));
            }
        }
        s
    }
}

/// Husimi Q of a spin density matrix (row-major, Dicke index `k ↔ m = k - l`).
pub fn husimi_from_spin_density(rho: &[C64], n_atoms: usize, grid: &HusimiGrid) -> Result<HusimiField> {
    let d = n_atoms + 1;
    if rho.len() != d * d {
        return invalid("spin density matrix has the wrong size");
    }
    if grid.n_theta < 2 || grid.n_phi < 2 {
        return invalid("Husimi grid needs at least 2 points per axis");
    }
    let s = spin_ops(n_atoms)?;
    let sy = DMatrix::from_row_slice(d, d, &s.sy.to_dense());
    let eig = sy.symmetric_eigen();
    let v = eig.eigenvectors;
    let lam = eig.eigenvalues;
    let l = n_atoms as f64 / 2.0;
    // V† |l, +l⟩ is the last row of V, conjugated
    let top: Vec<C64> = (0..d).map(|k| v[(d - 1, k)].conj()).collect();
    let thetas = grid.thetas();
    let phis = grid.phis();
    let rows: Vec<Vec<f64>> = thetas
        .par_iter()
        .map(|&th| {
            // w = exp(-iθ S_y) |l, +l⟩
            let coef: Vec<C64> = (0..d).map(|k| top[k] * C64::new(0.0, -th * lam[k]).exp()).collect();
            let w: Vec<C64> = (0..d).map(|i| (0..d).map(|k| v[(i, k)] * coef[k]).sum()).collect();
            phis.iter()
                .map(|&ph| {
                    let psi: Vec<C64> = (0..d).map(|i| w[i] * C64::new(0.0, -ph * (i as f64 - l)).exp()).collect();
                    let mut q = C64::new(0.0, 0.0);
                    for i in 0..d {
                        let mut r = C64::new(0.0, 0.0);
                        for j in 0..d {
                            r += rho[i * d + j] * psi[j];
                        }
                        q += psi[i].conj() * r;
                    }
                    q.re.clamp(0.0, 1.0)
                })
                .collect()
        })
        .collect();
    Ok(HusimiField { n_atoms, thetas, phis, values: rows.concat() })
}

/// Husimi Q of the spin factor of `state`.
pub fn husimi_q(state: &QuantumState, grid: &HusimiGrid) -> Result<HusimiField> {
    let slot = state.layout().spin_slot().ok_or_else(|| Error::InvalidArgument("layout has no spin factor".into()))?;
    let n = state.layout().atom_count().unwrap();
    husimi_from_spin_density(&state.reduced(slot)?, n, grid)
}

/// `⟨a_p⟩` of a state.
pub fn reduced_pump_amplitude(state: &QuantumState) -> Result<C64> {
    let slot = state.layout().pump_slot().ok_or_else(|| Error::InvalidArgument("layout has no pump factor".into()))?;
    expectation(&destroy_in(state.layout(), slot)?, state)
}

/// `⟨β|ρ_p|β⟩` for a pump density matrix; `β` defaults to `Tr(ρ_p a)`.
pub fn fidelity_from_pump_density(rho_p: &[C64], beta: Option<C64>) -> Result<f64> {
    let d = (rho_p.len() as f64).sqrt().round() as usize;
    if d * d != rho_p.len() || d < 2 {
        return invalid("pump density matrix is not square");
    }
    let beta = beta.unwrap_or_else(|| {
        // Tr(ρ a) = Σ_n √n ρ[n, n-1]
        (1..d).map(|n| rho_p[n * d + n - 1] * (n as f64).sqrt()).sum()
    });
    let b = coherent_state(beta, d - 1)?;
    let b = b.vector().unwrap();
    let mut f = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            f += b[i].conj() * rho_p[i * d + j] * b[j];
        }
    }
    Ok(f.re)
}

/// `Tr[ρ (|β⟩⟨β| ⊗ I)]` with `β` defaulting to the state's own `⟨a_p⟩`.
pub fn coherent_fidelity(state: &QuantumState, beta: Option<C64>) -> Result<f64> {
    let slot = state.layout().pump_slot().ok_or_else(|| Error::InvalidArgument("layout has no pump factor".into()))?;
    match state.layout().factors()[slot] {
        Factor::Boson { .. } => fidelity_from_pump_density(&state.reduced(slot)?, beta),
        Factor::Spin { .. } => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Factor;

    fn css(n: usize, theta: f64, phi: f64) -> QuantumState {
        // rotate |l,+l⟩ with the Husimi rotation to get any coherent spin state
        let d = n + 1;
        let s = spin_ops(n).unwrap();
        let g = s.sx.scale_real(phi.sin()).sub(&s.sy.scale_real(phi.cos())).unwrap();
        let gm = DMatrix::from_row_slice(d, d, &g.to_dense());
        let e = gm.symmetric_eigen();
        let mut psi = vec![C64::new(0.0, 0.0); d];
        for (i, amp) in psi.iter_mut().enumerate() {
            for k in 0..d {
                *amp += e.eigenvectors[(i, k)]
                    * C64::new(0.0, theta * e.eigenvalues[k]).exp()
                    * e.eigenvectors[(d - 1, k)].conj();
            }
        }
        QuantumState::pure(SpaceLayout::single(Factor::Spin { n }).unwrap(), psi).unwrap()
    }

    #[test]
    fn ground_state_moments() {
        let m = spin_moments(&QuantumState::spin_ground(50).unwrap()).unwrap();
        assert_eq!(m.mean[2], -25.0);
        assert!((m.second[0][0] - 12.5).abs() < 1e-12);
        assert!((m.second[1][1] - 12.5).abs() < 1e-12);
        let m = spin_moments(&QuantumState::dicke(2, 0).unwrap()).unwrap();
        assert!(m.mean.iter().all(|v| v.abs() < 1e-15));
        assert!(squeezing_wineland(&m).is_err());
    }

    #[test]
    fn cat_state_moments_against_dense_oracle() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let layout = SpaceLayout::single(Factor::Spin { n: 2 }).unwrap();
        let psi = QuantumState::pure(layout, vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)]).unwrap();
        let m = spin_moments(&psi).unwrap();
        let s = spin_ops(2).unwrap();
        let dense = |a: &Operator, b: &Operator| {
            let (a, b) = (a.to_dense(), b.to_dense());
            let v = psi.vector().unwrap();
            let mut r = C64::new(0.0, 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        r += v[i].conj() * 0.5 * (a[i * 3 + k] * b[k * 3 + j] + b[i * 3 + k] * a[k * 3 + j]) * v[j];
                    }
                }
            }
            r.re
        };
        assert!((m.second[0][0] - dense(&s.sx, &s.sx)).abs() < 1e-14);
        assert!((m.second[0][1] - dense(&s.sx, &s.sy)).abs() < 1e-14);
        assert!((m.second[0][0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coherent_states_are_unsqueezed() {
        for n in [2, 10, 50] {
            let r = squeezing_wineland(&spin_moments(&QuantumState::spin_ground(n).unwrap()).unwrap()).unwrap();
            assert!((r.xi2 - 1.0).abs() < 1e-10);
        }
        let r = squeezing_wineland(&spin_moments(&css(6, 1.1, 2.3)).unwrap()).unwrap();
        assert!((r.xi2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn predicted_directions() {
        use std::f64::consts::FRAC_PI_2;
        assert!((squeezing_direction_prediction(FRAC_PI_2) - FRAC_PI_2).abs() < 1e-15);
        assert!((squeezing_direction_prediction(0.0) - FRAC_PI_4).abs() < 1e-15);
        assert!(squeezing_direction_prediction(-FRAC_PI_2).abs() < 1e-15);
        assert!((axis_angle_distance(0.01, PI - 0.01) - 0.02).abs() < 1e-12);
    }

    #[test]
    fn husimi_reference_values() {
        let grid = HusimiGrid { n_theta: 5, n_phi: 5 };
        let n = 4;
        let d = n + 1;
        let top = QuantumState::basis(SpaceLayout::single(Factor::Spin { n }).unwrap(), n).unwrap();
        let q = husimi_q(&top, &grid).unwrap();
        assert!((q.values[0] - 1.0).abs() < 1e-12);
        let q = husimi_q(&QuantumState::spin_ground(n).unwrap(), &grid).unwrap();
        assert!(q.values[0].abs() < 1e-12);
        let mixed = QuantumState::maximally_mixed(SpaceLayout::single(Factor::Spin { n }).unwrap());
        let q = husimi_q(&mixed, &grid).unwrap();
        assert!(q.values.iter().all(|v| (v - 1.0 / d as f64).abs() < 1e-12));
    }

    #[test]
    fn husimi_peaks_on_the_coherent_direction() {
        let (th, ph) = (PI / 2.0, PI / 2.0);
        let q = husimi_q(&css(8, th, ph), &HusimiGrid { n_theta: 3, n_phi: 5 }).unwrap();
        // grid node (θ = π/2, φ = π/2)
        assert!((q.values[5 + 1] - 1.0).abs() < 1e-12);
        assert!((husimi_q(&css(8, th, ph), &HusimiGrid::default()).unwrap().normalization() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn fidelity_limits() {
        let layout_state = QuantumState::tensor(&[
            coherent_state(C64::new(0.0, 1.0), 12).unwrap(),
            QuantumState::spin_ground(2).unwrap(),
        ])
        .unwrap();
        assert!(coherent_fidelity(&layout_state, None).unwrap() >= 1.0 - 1e-8);
        let vac =
            QuantumState::tensor(&[QuantumState::fock(12, 0).unwrap(), QuantumState::spin_ground(2).unwrap()]).unwrap();
        let f = coherent_fidelity(&vac, Some(C64::new(0.0, 1.0))).unwrap();
        assert!((f - (-1.0f64).exp()).abs() < 1e-8);
        let a = reduced_pump_amplitude(&layout_state).unwrap();
        assert!((a - C64::new(0.0, 1.0)).norm() < 1e-6);
        assert!(reduced_pump_amplitude(&QuantumState::spin_ground(2).unwrap()).is_err());
    }
}
