//! Physical inputs and the closed-form quantities derived from them.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Raw physical parameters. Rates share one unit: either `g_c = 1`
/// (figure presets) or rad/s (Table 1 presets).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_atoms: usize,
    /// Single-atom coupling; the collective coupling is `g_c = √N g`.
    pub g: f64,
    pub j: f64,
    pub omega: C64,
    pub delta_s: f64,
    pub delta_q: f64,
    pub kappa_p: f64,
    pub kappa_s: f64,
    pub gamma_s: f64,
    pub gamma_c: f64,
    pub alpha0: C64,
    pub compensate_stark: bool,
    /// Pump Fock cutoff; `None` picks [`default_pump_cutoff`].
    pub pump_cutoff: Option<usize>,
    /// Signal Fock cutoff; `None` picks [`DEFAULT_SIGNAL_CUTOFF`].
    pub signal_cutoff: Option<usize>,
}

pub const DEFAULT_SIGNAL_CUTOFF: usize = 5;

impl ModelParams {
    /// Parameters of the driven N = 50 reference run, in units of `g_c`.
    pub fn reference(n_atoms: usize) -> Self {
        Self {
            n_atoms,
            g: 1.0 / (n_atoms as f64).sqrt(),
            j: std::f64::consts::SQRT_2,
            omega: C64::new(1.0, 0.0),
            delta_s: 15.0,
            delta_q: 0.0,
            kappa_p: 1.0,
            kappa_s: 0.0,
            gamma_s: 0.0,
            gamma_c: 0.0,
            alpha0: C64::new(0.0, 1.0),
            compensate_stark: true,
            pump_cutoff: None,
            signal_cutoff: None,
        }
    }

    pub fn g_c(&self) -> f64 {
        self.g * (self.n_atoms as f64).sqrt()
    }

    /// Sets `g` from a collective coupling.
    pub fn set_g_c(&mut self, g_c: f64) {
        self.g = g_c / (self.n_atoms as f64).sqrt();
    }

    /// Spin detuning that compensates only the `S_z`-linear part of the
    /// induced Stark shift.
    pub fn partial_compensation_delta_q(&self, d: &DerivedParams) -> f64 {
        (self.n_atoms as f64 + 1.0) * self.g * self.g / d.delta_big_s
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms < 1 {
            return invalid("atom count must be >= 1");
        }
        let rates = [
            ("kappa_p", self.kappa_p),
            ("kappa_s", self.kappa_s),
            ("gamma_s", self.gamma_s),
            ("gamma_c", self.gamma_c),
        ];
        for (name, v) in rates {
            if !(v >= 0.0) || !v.is_finite() {
                return invalid(format!("{name} must be a finite rate >= 0, got {v}"));
            }
        }
        for (name, v) in [("g", self.g), ("j", self.j), ("delta_s", self.delta_s), ("delta_q", self.delta_q)] {
            if !v.is_finite() {
                return invalid(format!("{name} is not finite"));
            }
        }
        if !(self.omega.re.is_finite() && self.omega.im.is_finite()) {
            return invalid("omega is not finite");
        }
        Ok(())
    }

    pub fn pump_cutoff_or_default(&self, d: &DerivedParams) -> usize {
        self.pump_cutoff.unwrap_or_else(|| {
            let a_ref = self.alpha0.norm().max(d.d0.map_or(0.0, |x| x.norm()));
            default_pump_cutoff(a_ref)
        })
    }

    pub fn signal_cutoff_or_default(&self) -> usize {
        self.signal_cutoff.unwrap_or(DEFAULT_SIGNAL_CUTOFF)
    }
}

/// `⌈|α|² + 6·√max(|α|², 1) + 4⌉`: a Poisson tail bound with a margin.
pub fn default_pump_cutoff(alpha_ref: f64) -> usize {
    let n = alpha_ref * alpha_ref;
    (n + 6.0 * n.max(1.0).sqrt() + 4.0).ceil() as usize
}

/// How comfortably a perturbative condition holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Validity {
    /// Ratio of at least 10.
    Good,
    /// Ratio in `[5, 10)`.
    Weak,
    /// Ratio below 5.
    Violated,
}

impl Validity {
    fn from_ratio(r: f64) -> Self {
        if r >= 10.0 {
            Validity::Good
        } else if r >= 5.0 {
            Validity::Weak
        } else {
            Validity::Violated
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Pump displacement `Ω / (2δ_p - iκ_p)`.
    pub d: C64,
    pub delta_p: f64,
    /// Bogoliubov frequency `√(δ_s² - (2J|d|)²)`.
    pub delta_big_s: f64,
    pub r: f64,
    pub theta_s: f64,
    pub g_eff: f64,
    pub g_eff_undriven: f64,
    /// `iΩ/κ_p`; absent without pump loss.
    pub d0: Option<C64>,
    pub p_gamma: f64,
    /// `δ_s / (2J|d|)`; infinite without a drive, `null` in JSON.
    #[serde(with = "unbounded")]
    pub displacement_ratio: f64,
    pub displacement_validity: Validity,
    /// `δ_S / max(J, g_c)`.
    #[serde(with = "unbounded")]
    pub dispersive_ratio: f64,
    pub dispersive_validity: Validity,
    pub iterations: usize,
}

/// Non-negative ratios that may be infinite; JSON has no infinity, so it
/// travels as `null`.
mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

const FIXED_POINT_TOL: f64 = 1e-12;
const FIXED_POINT_MAX_ITER: usize = 100;

fn displacement(p: &ModelParams, delta_p: f64) -> Result<C64> {
    if p.omega == C64::new(0.0, 0.0) {
        return Ok(C64::new(0.0, 0.0));
    }
    let den = C64::new(2.0 * delta_p, -p.kappa_p);
    if den.norm() == 0.0 {
        return Err(Error::ParameterRegime("driven pump without detuning or loss has no steady displacement".into()));
    }
    Ok(p.omega / den)
}

/// Solves the self-consistent `(d, δ_S, δ_p)` triple by fixed-point
/// iteration from `δ_S = δ_s` and evaluates the remaining closed forms.
pub fn derive_params(p: &ModelParams) -> Result<DerivedParams> {
    p.validate()?;
    if !(p.delta_s > 0.0) {
        return invalid(format!("delta_s must be > 0, got {}", p.delta_s));
    }
    let ds = p.delta_s;
    let j2 = p.j * p.j;
    let mut big_s = ds;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=FIXED_POINT_MAX_ITER {
        iterations = it;
        let d = displacement(p, j2 / big_s)?;
        let x = 2.0 * p.j * d.norm();
        if x >= ds {
            return Err(Error::ParameterRegime(format!("2J|d| = {x} >= delta_s = {ds}")));
        }
        let next = (ds * ds - x * x).sqrt();
        let step = (next - big_s).abs();
        big_s = next;
        if step <= FIXED_POINT_TOL * ds {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric { t: 0.0, msg: "displacement fixed point did not converge".into() });
    }
    let delta_p = j2 / big_s;
    let d = displacement(p, delta_p)?;
    let x = 2.0 * p.j * d.norm();
    let r = if x == 0.0 { 0.0 } else { 0.25 * ((ds + x) / (ds - x)).ln() };
    let theta_s = if d.norm() == 0.0 { 0.0 } else { -d.im.atan2(d.re) };
    let g2 = p.g * p.g;
    let d0 = (p.kappa_p > 0.0).then(|| C64::new(0.0, 1.0) * p.omega / p.kappa_p);
    let displacement_ratio = if x == 0.0 { f64::INFINITY } else { ds / x };
    let dispersive_ratio = big_s / p.j.abs().max(p.g_c().abs());
    Ok(DerivedParams {
        d,
        delta_p,
        delta_big_s: big_s,
        r,
        theta_s,
        g_eff: g2 * p.j / (big_s * big_s),
        g_eff_undriven: g2 * p.j / (ds * ds),
        d0,
        p_gamma: 4.0 * p.kappa_s / (4.0 * ds * ds + p.kappa_s * p.kappa_s),
        displacement_ratio,
        displacement_validity: Validity::from_ratio(displacement_ratio),
        dispersive_ratio,
        dispersive_validity: Validity::from_ratio(dispersive_ratio),
        iterations,
    })
}

/// Converts a frequency in Hz to an angular rate in rad/s.
pub fn hz(f: f64) -> f64 {
    2.0 * std::f64::consts::PI * f
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bisection on `f(x) = x² + (2J|Ω|)²/(4J⁴/x² + κ²) - δ_s²`, the scalar
    /// equation obtained by eliminating `d` and `δ_p`.
    fn bisect_big_s(j: f64, om: f64, kp: f64, ds: f64) -> f64 {
        let f = |x: f64| x * x + (2.0 * j * om).powi(2) / (4.0 * j.powi(4) / (x * x) + kp * kp) - ds * ds;
        let (mut lo, mut hi) = (1e-9, ds);
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid
            } else {
                lo = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn undriven_limit() {
        let mut p = ModelParams::reference(50);
        p.omega = C64::new(0.0, 0.0);
        let d = derive_params(&p).unwrap();
        assert_eq!(d.d, C64::new(0.0, 0.0));
        assert_eq!(d.delta_big_s, p.delta_s);
        assert_eq!(d.r, 0.0);
        assert_eq!(d.g_eff, d.g_eff_undriven);
        assert_eq!(d.g_eff_undriven, p.g * p.g * p.j / (p.delta_s * p.delta_s));
    }

    #[test]
    fn quasi_steady_amplitude_is_i() {
        let d = derive_params(&ModelParams::reference(50)).unwrap();
        assert_eq!(d.d0, Some(C64::new(0.0, 1.0)));
    }

    #[test]
    fn fixed_point_matches_bisection() {
        let p = ModelParams::reference(50);
        let d = derive_params(&p).unwrap();
        let s = bisect_big_s(p.j, p.omega.norm(), p.kappa_p, p.delta_s);
        assert!((d.delta_big_s - s).abs() < 1e-10 * p.delta_s);
        assert!((d.delta_p - p.j * p.j / s).abs() < 1e-10);
        let dm = p.omega.norm() / (4.0 * (p.j * p.j / s).powi(2) + p.kappa_p.powi(2)).sqrt();
        assert!((d.d.norm() - dm).abs() < 1e-10);
        assert!((d.delta_p - p.j * p.j / d.delta_big_s).abs() < 1e-12 * p.delta_s);
    }

    #[test]
    fn regime_error_when_displacement_too_large() {
        let mut p = ModelParams::reference(10);
        p.omega = C64::new(20.0, 0.0);
        assert!(matches!(derive_params(&p), Err(Error::ParameterRegime(_))));
        p.delta_s = 0.0;
        assert!(derive_params(&p).is_err());
    }

    #[test]
    fn elimination_weight_substitution() {
        let mut p = ModelParams::reference(50);
        p.kappa_s = 0.1;
        let d = derive_params(&p).unwrap();
        assert_eq!(d.p_gamma, 4.0 * 0.1 / (4.0 * 225.0 + 0.01));
    }

    #[test]
    fn default_cutoffs() {
        assert_eq!(default_pump_cutoff(1.0), 11);
        assert_eq!(default_pump_cutoff(2.0), 20);
        assert_eq!(default_pump_cutoff(0.0), 10);
    }

    #[test]
    fn squeezing_phase_uses_two_argument_angle() {
        let mut p = ModelParams::reference(10);
        p.j = 0.0;
        let d = derive_params(&p).unwrap();
        // J = 0 leaves d = Ω/(-iκ) = i, on the arctan branch cut.
        assert!((d.d - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((d.theta_s + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn undriven_ratios_survive_json() {
        let mut p = ModelParams::reference(10);
        p.omega = C64::new(0.0, 0.0);
        let d = derive_params(&p).unwrap();
        assert!(d.displacement_ratio.is_infinite());
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"displacement_ratio\":null"));
        assert_eq!(serde_json::from_str::<DerivedParams>(&json).unwrap(), d);
    }
}
