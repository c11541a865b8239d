//! Holstein-Primakoff mean-field equations for large atom numbers.
//!
//! With `S_- → √N b` and `S_z → -N/2 + b†b`, the pump amplitude `a = ⟨a_p⟩`,
//! the anomalous moment `b2 = ⟨b²⟩` and the excitation `nb = ⟨b†b⟩` obey
//!
//! ```text
//! ȧ   = -i N g_eff b2 + iΩ/2 - (κ_p + J² p_γ) a / 2
//! ḃ2  = -2i N g_eff a (2 nb + 1) - (γ_s + g_c² p_γ + 2γ_c) b2
//! ṅb  = 4 N g_eff Im(a b2*) - (γ_s + g_c² p_γ) nb
//! ```

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::ode::{integrate_samples, OdeSystem, StepControl};
use crate::error::{Error, Result};
use crate::params::{DerivedParams, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub a_p: C64,
    pub b2: C64,
    pub nb: f64,
}

impl MeanFieldState {
    /// Pump in `|α₀⟩`, spins in the collective ground state.
    pub fn initial(alpha0: C64) -> Self {
        Self { a_p: alpha0, b2: C64::new(0.0, 0.0), nb: 0.0 }
    }

    /// Whether `|b2|² <= nb (nb + 1)` holds, up to a relative slack.
    pub fn closure_ok(&self) -> bool {
        self.b2.norm_sqr() <= self.nb * (self.nb + 1.0) * (1.0 + 1e-6) + 1e-12
    }
}

/// Which nonlinearity the mean-field run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coupling {
    /// `g² J / δ_S²`, with the displaced Bogoliubov frequency.
    Bogoliubov,
    /// `g² J / δ_s²`, the undisplaced value.
    Bare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldParams {
    pub n: f64,
    pub g_eff: f64,
    pub omega: C64,
    pub kappa_p: f64,
    /// Extra pump loss `J² p_γ` from the eliminated signal mode.
    pub pump_extra: f64,
    pub gamma_s: f64,
    /// Extra collective emission `g_c² p_γ` from the eliminated signal mode.
    pub spin_extra: f64,
    pub gamma_c: f64,
}

impl MeanFieldParams {
    pub fn from_model(p: &ModelParams, d: &DerivedParams, coupling: Coupling) -> Self {
        let g_c2 = p.g * p.g * p.n_atoms as f64;
        Self {
            n: p.n_atoms as f64,
            g_eff: match coupling {
                Coupling::Bogoliubov => d.g_eff,
                Coupling::Bare => d.g_eff_undriven,
            },
            omega: p.omega,
            kappa_p: p.kappa_p,
            pump_extra: p.j * p.j * d.p_gamma,
            gamma_s: p.gamma_s,
            spin_extra: g_c2 * d.p_gamma,
            gamma_c: p.gamma_c,
        }
    }

    fn pump_loss(&self) -> f64 {
        self.kappa_p + self.pump_extra
    }

    fn spin_loss(&self) -> f64 {
        self.gamma_s + self.spin_extra
    }
}

/// Time derivative of the mean-field state.
pub fn mf_derivatives(s: &MeanFieldState, p: &MeanFieldParams) -> MeanFieldState {
    let i = C64::new(0.0, 1.0);
    let ng = p.n * p.g_eff;
    MeanFieldState {
        a_p: -i * ng * s.b2 + i * p.omega / 2.0 - p.pump_loss() * s.a_p / 2.0,
        b2: -2.0 * i * ng * s.a_p * (2.0 * s.nb + 1.0) - (p.spin_loss() + 2.0 * p.gamma_c) * s.b2,
        nb: 4.0 * ng * (s.a_p * s.b2.conj()).im - p.spin_loss() * s.nb,
    }
}

struct System(MeanFieldParams);

impl OdeSystem for System {
    fn rhs(&mut self, _t: f64, y: &[C64], dy: &mut [C64]) {
        let d = mf_derivatives(&MeanFieldState { a_p: y[0], b2: y[1], nb: y[2].re }, &self.0);
        dy[0] = d.a_p;
        dy[1] = d.b2;
        dy[2] = C64::new(d.nb, 0.0);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldTrajectory {
    pub n: f64,
    pub times: Vec<f64>,
    pub states: Vec<MeanFieldState>,
    /// First sample time with `nb >= N/2`; the trajectory stops before it.
    pub hpt_breakdown: Option<f64>,
    /// First sample time violating `|b2|² <= nb (nb + 1)`.
    pub closure_violation: Option<f64>,
}

impl MeanFieldTrajectory {
    pub fn xi2(&self) -> Result<Vec<f64>> {
        self.states.iter().map(|s| xi2_hpt(s.nb, s.b2, self.n)).collect()
    }

    pub fn xi2_db(&self) -> Result<Vec<f64>> {
        Ok(self.xi2()?.into_iter().map(|x| 10.0 * x.log10()).collect())
    }

    /// CSV with header `t,re_a,im_a,re_b2,im_b2,nb,xi2_db`.
    pub fn to_csv(&self) -> Result<String> {
        let db = self.xi2_db()?;
        let mut s = String::from("t,re_a,im_a,re_b2,im_b2,nb,xi2_db\n");
        for ((t, st), x) in self.times.iter().zip(&self.states).zip(db) {
            s.push_str(&format!(
                "{t:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{x:.10e}\n",
                st.a_p.re, st.a_p.im, st.b2.re, st.b2.im, st.nb
            ));
        }
        Ok(s)
    }
}

/// Relative tolerance of mean-field integrations.
pub const MF_RTOL: f64 = 1e-10;

/// Integrates on `times`, stopping at the first sample where the
/// Holstein-Primakoff picture breaks down.
pub fn mf_integrate(p: &MeanFieldParams, initial: MeanFieldState, times: &[f64]) -> Result<MeanFieldTrajectory> {
    let mut sys = System(*p);
    let y0 = [initial.a_p, initial.b2, C64::new(initial.nb, 0.0)];
    let mut out = MeanFieldTrajectory {
        n: p.n,
        times: Vec::with_capacity(times.len()),
        states: Vec::with_capacity(times.len()),
        hpt_breakdown: None,
        closure_violation: None,
    };
    let ctrl = StepControl { rtol: MF_RTOL, atol: MF_RTOL * 1e-3, ..Default::default() };
    integrate_samples(&mut sys, &y0, times, ctrl, |_, t, y| {
        let s = MeanFieldState { a_p: y[0], b2: y[1], nb: y[2].re };
        if ![s.a_p.re, s.a_p.im, s.b2.re, s.b2.im, s.nb].iter().all(|v| v.is_finite()) {
            return Err(Error::Numeric { t, msg: "mean-field state is not finite".into() });
        }
        if s.nb >= p.n / 2.0 {
            out.hpt_breakdown = Some(t);
            return Ok(false);
        }
        if out.closure_violation.is_none() && !s.closure_ok() {
            out.closure_violation = Some(t);
        }
        out.times.push(t);
        out.states.push(s);
        Ok(true)
    })?;
    Ok(out)
}

/// `N² / (N - 2nb)² · (1 + 2nb - 2|b2|)`.
pub fn xi2_hpt(nb: f64, b2: C64, n: f64) -> Result<f64> {
    if nb >= n / 2.0 {
        return Err(Error::HptValidity { nb, half: n / 2.0 });
    }
    let r = n / (n - 2.0 * nb);
    Ok(r * r * (1.0 + 2.0 * nb - 2.0 * b2.norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinSqueezing {
    pub t_min: f64,
    pub xi2_db_min: f64,
    /// False when the smallest sample sits on an endpoint.
    pub interior: bool,
}

/// Global minimum of a sampled curve, refined by the parabola through the
/// bracketing samples.
pub fn find_min_squeezing(times: &[f64], xi2_db: &[f64]) -> Result<MinSqueezing> {
    if times.is_empty() || times.len() != xi2_db.len() {
        return Err(Error::InvalidArgument("empty or mismatched trajectory".into()));
    }
    let mut i = 0;
    for (k, v) in xi2_db.iter().enumerate() {
        if *v < xi2_db[i] {
            i = k;
        }
    }
    if i == 0 || i + 1 == times.len() {
        return Ok(MinSqueezing { t_min: times[i], xi2_db_min: xi2_db[i], interior: false });
    }
    let (x0, x1, x2) = (times[i - 1], times[i], times[i + 1]);
    let (y0, y1, y2) = (xi2_db[i - 1], xi2_db[i], xi2_db[i + 1]);
    // Newton divided differences: y = y0 + f01 (x - x0) + f012 (x - x0)(x - x1)
    let f01 = (y1 - y0) / (x1 - x0);
    let f12 = (y2 - y1) / (x2 - x1);
    let f012 = (f12 - f01) / (x2 - x0);
    if !(f012 > 0.0) {
        return Ok(MinSqueezing { t_min: x1, xi2_db_min: y1, interior: true });
    }
    let xv = 0.5 * (x0 + x1) - f01 / (2.0 * f012);
    let xv = xv.clamp(x0, x2);
    let yv = y0 + f01 * (xv - x0) + f012 * (xv - x0) * (xv - x1);
    Ok(MinSqueezing { t_min: xv, xi2_db_min: yv.min(y1), interior: true })
}
