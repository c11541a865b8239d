//! Dormand-Prince 8(5,3) integrator for complex systems with 7th-order
//! dense output.
//!
//! Step-size control follows Hairer, Nørsett and Wanner. The dense-output
//! coefficients need three extra stages; they are computed only when
//! [`Dop853::interpolate`] is first called inside a step.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Right-hand side `dy/dt = f(t, y)`.
pub trait OdeSystem {
    fn rhs(&mut self, t: f64, y: &[C64], dy: &mut [C64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, h_max: f64::INFINITY, max_steps: 10_000_000 }
    }
}

const SAFETY: f64 = 0.9;
/// Bounds on the step ratio `h_new / h`.
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

#[allow(clippy::excessive_precision, clippy::unreadable_literal)]
mod tableau {
    pub(super) const A21: f64 = 5.26001519587677318785587544488e-2;
    pub(super) const A31: f64 = 1.97250569845378994544595329183e-2;
    pub(super) const A32: f64 = 5.91751709536136983633785987549e-2;
    pub(super) const A41: f64 = 2.95875854768068491816892993775e-2;
    pub(super) const A43: f64 = 8.87627564304205475450678981324e-2;
    pub(super) const A51: f64 = 2.41365134159266685502369798665e-1;
    pub(super) const A53: f64 = -8.84549479328286085344864962717e-1;
    pub(super) const A54: f64 = 9.24834003261792003115737966543e-1;
    pub(super) const A61: f64 = 3.7037037037037037037037037037e-2;
    pub(super) const A64: f64 = 1.70828608729473871279604482173e-1;
    pub(super) const A65: f64 = 1.25467687566822425016691814123e-1;
    pub(super) const A71: f64 = 3.7109375e-2;
    pub(super) const A74: f64 = 1.70252211019544039314978060272e-1;
    pub(super) const A75: f64 = 6.02165389804559606850219397283e-2;
    pub(super) const A76: f64 = -1.7578125e-2;

    pub(super) const A81: f64 = 3.70920001185047927108779319836e-2;
    pub(super) const A84: f64 = 1.70383925712239993810214054705e-1;
    pub(super) const A85: f64 = 1.07262030446373284651809199168e-1;
    pub(super) const A86: f64 = -1.53194377486244017527936158236e-2;
    pub(super) const A87: f64 = 8.27378916381402288758473766002e-3;
    pub(super) const A91: f64 = 6.24110958716075717114429577812e-1;
    pub(super) const A94: f64 = -3.36089262944694129406857109825e0;
    pub(super) const A95: f64 = -8.68219346841726006818189891453e-1;
    pub(super) const A96: f64 = 2.75920996994467083049415600797e1;
    pub(super) const A97: f64 = 2.01540675504778934086186788979e1;
    pub(super) const A98: f64 = -4.34898841810699588477366255144e1;
    pub(super) const A101: f64 = 4.77662536438264365890433908527e-1;
    pub(super) const A104: f64 = -2.48811461997166764192642586468e0;
    pub(super) const A105: f64 = -5.90290826836842996371446475743e-1;
    pub(super) const A106: f64 = 2.12300514481811942347288949897e1;
    pub(super) const A107: f64 = 1.52792336328824235832596922938e1;
    pub(super) const A108: f64 = -3.32882109689848629194453265587e1;
    pub(super) const A109: f64 = -2.03312017085086261358222928593e-2;

    pub(super) const A111: f64 = -9.3714243008598732571704021658e-1;
    pub(super) const A114: f64 = 5.18637242884406370830023853209e0;
    pub(super) const A115: f64 = 1.09143734899672957818500254654e0;
    pub(super) const A116: f64 = -8.14978701074692612513997267357e0;
    pub(super) const A117: f64 = -1.85200656599969598641566180701e1;
    pub(super) const A118: f64 = 2.27394870993505042818970056734e1;
    pub(super) const A119: f64 = 2.49360555267965238987089396762e0;
    pub(super) const A1110: f64 = -3.0467644718982195003823669022e0;
    pub(super) const A121: f64 = 2.27331014751653820792359768449e0;
    pub(super) const A124: f64 = -1.05344954667372501984066689879e1;
    pub(super) const A125: f64 = -2.00087205822486249909675718444e0;
    pub(super) const A126: f64 = -1.79589318631187989172765950534e1;
    pub(super) const A127: f64 = 2.79488845294199600508499808837e1;
    pub(super) const A128: f64 = -2.85899827713502369474065508674e0;
    pub(super) const A129: f64 = -8.87285693353062954433549289258e0;
    pub(super) const A1210: f64 = 1.23605671757943030647266201528e1;
    pub(super) const A1211: f64 = 6.43392746015763530355970484046e-1;

    pub(super) const A141: f64 = 5.61675022830479523392909219681e-2;
    pub(super) const A147: f64 = 2.53500210216624811088794765333e-1;
    pub(super) const A148: f64 = -2.46239037470802489917441475441e-1;
    pub(super) const A149: f64 = -1.24191423263816360469010140626e-1;
    pub(super) const A1410: f64 = 1.5329179827876569731206322685e-1;
    pub(super) const A1411: f64 = 8.20105229563468988491666602057e-3;
    pub(super) const A1412: f64 = 7.56789766054569976138603589584e-3;
    pub(super) const A1413: f64 = -8.298e-3;

    pub(super) const A151: f64 = 3.18346481635021405060768473261e-2;
    pub(super) const A156: f64 = 2.83009096723667755288322961402e-2;
    pub(super) const A157: f64 = 5.35419883074385676223797384372e-2;
    pub(super) const A158: f64 = -5.49237485713909884646569340306e-2;
    pub(super) const A1511: f64 = -1.08347328697249322858509316994e-4;
    pub(super) const A1512: f64 = 3.82571090835658412954920192323e-4;
    pub(super) const A1513: f64 = -3.40465008687404560802977114492e-4;
    pub(super) const A1514: f64 = 1.41312443674632500278074618366e-1;
    pub(super) const A161: f64 = -4.28896301583791923408573538692e-1;
    pub(super) const A166: f64 = -4.69762141536116384314449447206e0;
    pub(super) const A167: f64 = 7.68342119606259904184240953878e0;
    pub(super) const A168: f64 = 4.06898981839711007970213554331e0;
    pub(super) const A169: f64 = 3.56727187455281109270669543021e-1;
    pub(super) const A1613: f64 = -1.39902416515901462129418009734e-3;
    pub(super) const A1614: f64 = 2.9475147891527723389556272149e0;
    pub(super) const A1615: f64 = -9.15095847217987001081870187138e0;

    pub(super) const B1: f64 = 5.42937341165687622380535766363e-2;
    pub(super) const B6: f64 = 4.45031289275240888144113950566e0;
    pub(super) const B7: f64 = 1.89151789931450038304281599044e0;
    pub(super) const B8: f64 = -5.8012039600105847814672114227e0;
    pub(super) const B9: f64 = 3.1116436695781989440891606237e-1;
    pub(super) const B10: f64 = -1.52160949662516078556178806805e-1;
    pub(super) const B11: f64 = 2.01365400804030348374776537501e-1;
    pub(super) const B12: f64 = 4.47106157277725905176885569043e-2;

    pub(super) const BHH1: f64 = 0.244094488188976377952755905512e+00;
    pub(super) const BHH2: f64 = 0.733846688281611857341361741547e+00;
    pub(super) const BHH3: f64 = 0.220588235294117647058823529412e-01;

    pub(super) const C2: f64 = 0.526001519587677318785587544488e-01;
    pub(super) const C3: f64 = 0.789002279381515978178381316732e-01;
    pub(super) const C4: f64 = 0.118350341907227396726757197510e+00;
    pub(super) const C5: f64 = 0.281649658092772603273242802490e+00;
    pub(super) const C6: f64 = 0.333333333333333333333333333333e+00;
    pub(super) const C7: f64 = 0.25e+00;
    pub(super) const C8: f64 = 0.307692307692307692307692307692e+00;
    pub(super) const C9: f64 = 0.651282051282051282051282051282e+00;
    pub(super) const C10: f64 = 0.6e+00;
    pub(super) const C11: f64 = 0.857142857142857142857142857142e+00;
    pub(super) const C14: f64 = 0.1e+00;
    pub(super) const C15: f64 = 0.2e+00;
    pub(super) const C16: f64 = 0.777777777777777777777777777778e+00;

    pub(super) const ER1: f64 = 0.1312004499419488073250102996e-01;
    pub(super) const ER6: f64 = -0.1225156446376204440720569753e+01;
    pub(super) const ER7: f64 = -0.4957589496572501915214079952e+00;
    pub(super) const ER8: f64 = 0.1664377182454986536961530415e+01;
    pub(super) const ER9: f64 = -0.3503288487499736816886487290e+00;
    pub(super) const ER10: f64 = 0.3341791187130174790297318841e+00;
    pub(super) const ER11: f64 = 0.8192320648511571246570742613e-01;
    pub(super) const ER12: f64 = -0.2235530786388629525884427845e-01;

    pub(super) const D41: f64 = -0.84289382761090128651353491142e+01;
    pub(super) const D46: f64 = 0.56671495351937776962531783590e+00;
    pub(super) const D47: f64 = -0.30689499459498916912797304727e+01;
    pub(super) const D48: f64 = 0.23846676565120698287728149680e+01;
    pub(super) const D49: f64 = 0.21170345824450282767155149946e+01;
    pub(super) const D410: f64 = -0.87139158377797299206789907490e+00;
    pub(super) const D411: f64 = 0.22404374302607882758541771650e+01;
    pub(super) const D412: f64 = 0.63157877876946881815570249290e+00;
    pub(super) const D413: f64 = -0.88990336451333310820698117400e-01;
    pub(super) const D414: f64 = 0.18148505520854727256656404962e+02;
    pub(super) const D415: f64 = -0.91946323924783554000451984436e+01;
    pub(super) const D416: f64 = -0.44360363875948939664310572000e+01;

    pub(super) const D51: f64 = 0.10427508642579134603413151009e+02;
    pub(super) const D56: f64 = 0.24228349177525818288430175319e+03;
    pub(super) const D57: f64 = 0.16520045171727028198505394887e+03;
    pub(super) const D58: f64 = -0.37454675472269020279518312152e+03;
    pub(super) const D59: f64 = -0.22113666853125306036270938578e+02;
    pub(super) const D510: f64 = 0.77334326684722638389603898808e+01;
    pub(super) const D511: f64 = -0.30674084731089398182061213626e+02;
    pub(super) const D512: f64 = -0.93321305264302278729567221706e+01;
    pub(super) const D513: f64 = 0.15697238121770843886131091075e+02;
    pub(super) const D514: f64 = -0.31139403219565177677282850411e+02;
    pub(super) const D515: f64 = -0.93529243588444783865713862664e+01;
    pub(super) const D516: f64 = 0.35816841486394083752465898540e+02;

    pub(super) const D61: f64 = 0.19985053242002433820987653617e+02;
    pub(super) const D66: f64 = -0.38703730874935176555105901742e+03;
    pub(super) const D67: f64 = -0.18917813819516756882830838328e+03;
    pub(super) const D68: f64 = 0.52780815920542364900561016686e+03;
    pub(super) const D69: f64 = -0.11573902539959630126141871134e+02;
    pub(super) const D610: f64 = 0.68812326946963000169666922661e+01;
    pub(super) const D611: f64 = -0.10006050966910838403183860980e+01;
    pub(super) const D612: f64 = 0.77771377980534432092869265740e+00;
    pub(super) const D613: f64 = -0.27782057523535084065932004339e+01;
    pub(super) const D614: f64 = -0.60196695231264120758267380846e+02;
    pub(super) const D615: f64 = 0.84320405506677161018159903784e+02;
    pub(super) const D616: f64 = 0.11992291136182789328035130030e+02;

    pub(super) const D71: f64 = -0.25693933462703749003312586129e+02;
    pub(super) const D76: f64 = -0.15418974869023643374053993627e+03;
    pub(super) const D77: f64 = -0.23152937917604549567536039109e+03;
    pub(super) const D78: f64 = 0.35763911791061412378285349910e+03;
    pub(super) const D79: f64 = 0.93405324183624310003907691704e+02;
    pub(super) const D710: f64 = -0.37458323136451633156875139351e+02;
    pub(super) const D711: f64 = 0.10409964950896230045147246184e+03;
    pub(super) const D712: f64 = 0.29840293426660503123344363579e+02;
    pub(super) const D713: f64 = -0.43533456590011143754432175058e+02;
    pub(super) const D714: f64 = 0.96324553959188282948394950600e+02;
    pub(super) const D715: f64 = -0.39177261675615439165231486172e+02;
    pub(super) const D716: f64 = -0.14972683625798562581422125276e+03;
}
use tableau::*;

#[derive(Debug, Default, Clone, Copy)]
pub struct Stats {
    pub rhs_evals: usize,
    pub accepted: usize,
    pub rejected: usize,
}

pub struct Dop853 {
    ctrl: StepControl,
    t: f64,
    y: Vec<C64>,
    f: Vec<C64>,
    h: f64,
    t_old: f64,
    h_last: f64,
    y_old: Vec<C64>,
    f_old: Vec<C64>,
    stages: [Vec<C64>; 11],
    tmp: Vec<C64>,
    incr: Vec<C64>,
    cont: [Vec<C64>; 8],
    dense_ready: bool,
    stepped: bool,
    last_rejected: bool,
    stats: Stats,
}

// Stage k (2..=12) lives in `stages[k - 2]`; the three dense-output stages
// reuse the slots of stages 2, 3 and 4.

/// `out = y + h Σ c_k v_k`.
fn combo(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (c, v) in terms {
            acc += v[i] * *c;
        }
        *o = y[i] + acc * h;
    }
}

impl Dop853 {
    pub fn new<S: OdeSystem>(sys: &mut S, t0: f64, y0: &[C64], ctrl: StepControl) -> Self {
        let n = y0.len();
        let z = || vec![C64::new(0.0, 0.0); n];
        let mut s = Self {
            ctrl,
            t: t0,
            y: y0.to_vec(),
            f: z(),
            h: 0.0,
            t_old: t0,
            h_last: 0.0,
            y_old: z(),
            f_old: z(),
            stages: std::array::from_fn(|_| z()),
            tmp: z(),
            incr: z(),
            cont: std::array::from_fn(|_| z()),
            dense_ready: false,
            stepped: false,
            last_rejected: false,
            stats: Stats::default(),
        };
        sys.rhs(t0, &s.y, &mut s.f);
        s.stats.rhs_evals += 1;
        s.h = s.initial_step(sys);
        s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[C64] {
        &self.y
    }

    /// Start of the last accepted step.
    pub fn t_old(&self) -> f64 {
        self.t_old
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Replaces the state at the current time (or an earlier one inside the
    /// last step) and keeps the step-size estimate.
    pub fn reset<S: OdeSystem>(&mut self, sys: &mut S, t: f64, y: &[C64]) {
        self.t = t;
        self.y.copy_from_slice(y);
        sys.rhs(t, &self.y, &mut self.f);
        self.stats.rhs_evals += 1;
        self.stepped = false;
        self.dense_ready = false;
        self.last_rejected = false;
        self.t_old = t;
    }

    fn scale(&self, a: C64, b: C64) -> f64 {
        self.ctrl.atol + self.ctrl.rtol * a.norm().max(b.norm())
    }

    fn initial_step<S: OdeSystem>(&mut self, sys: &mut S) -> f64 {
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for (y, f) in self.y.iter().zip(&self.f) {
            let sk = self.scale(*y, *y);
            dnf += (f.norm() / sk).powi(2);
            dny += (y.norm() / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { (dny / dnf).sqrt() * 0.01 };
        h = h.min(self.ctrl.h_max);
        combo(&mut self.tmp, &self.y, h, &[(1.0, &self.f)]);
        sys.rhs(self.t + h, &self.tmp, &mut self.incr);
        self.stats.rhs_evals += 1;
        let mut der2 = 0.0;
        for ((y, f0), f1) in self.y.iter().zip(&self.f).zip(self.incr.iter()) {
            let sk = self.scale(*y, *y);
            der2 += ((f1 - f0).norm() / sk).powi(2);
        }
        let der2 = der2.sqrt() / h;
        let der12 = der2.abs().max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / der12).powf(1.0 / 8.0) };
        (100.0 * h).min(h1).min(self.ctrl.h_max)
    }

    /// Advances by one accepted step without passing `t_limit`.
    pub fn step<S: OdeSystem>(&mut self, sys: &mut S, t_limit: f64) -> Result<()> {
        if t_limit <= self.t {
            return Err(Error::Numeric { t: self.t, msg: format!("step limit {t_limit} not ahead of t") });
        }
        loop {
            if self.stats.accepted + self.stats.rejected >= self.ctrl.max_steps {
                return Err(Error::Numeric { t: self.t, msg: "maximum number of steps exceeded".into() });
            }
            let mut h = self.h.min(self.ctrl.h_max);
            if self.t + 1.01 * h >= t_limit {
                h = t_limit - self.t;
            }
            if h <= 16.0 * f64::EPSILON * self.t.abs().max(1.0) {
                return Err(Error::Numeric { t: self.t, msg: format!("step size underflow (h = {h:e})") });
            }
            let err = self.attempt(sys, h);
            let fac11 = if err.is_finite() { err.powf(1.0 / 8.0) } else { f64::INFINITY };
            if err <= 1.0 {
                let fac = (fac11 / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = (h / fac).min(self.ctrl.h_max);
                if self.last_rejected {
                    h_new = h_new.min(h);
                }
                self.accept(sys, h);
                self.h = h_new;
                self.last_rejected = false;
                return Ok(());
            }
            self.stats.rejected += 1;
            self.last_rejected = true;
            let shrink = if err.is_finite() { (fac11 / SAFETY).min(1.0 / FAC_MIN) } else { 10.0 };
            self.h = h / shrink;
        }
    }

    /// Computes the 12 stages for step `h`; leaves the solution increment in
    /// `incr` and returns the scaled error norm.
    fn attempt<S: OdeSystem>(&mut self, sys: &mut S, h: f64) -> f64 {
        let t = self.t;
        let y = &self.y;
        let k1 = &self.f;
        let [s2, s3, s4, s5, s6, s7, s8, s9, s10, s11, s12] = &mut self.stages;
        let tmp = &mut self.tmp;

        combo(tmp, y, h, &[(A21, k1)]);
        sys.rhs(t + C2 * h, tmp, s2);
        combo(tmp, y, h, &[(A31, k1), (A32, s2)]);
        sys.rhs(t + C3 * h, tmp, s3);
        combo(tmp, y, h, &[(A41, k1), (A43, s3)]);
        sys.rhs(t + C4 * h, tmp, s4);
        combo(tmp, y, h, &[(A51, k1), (A53, s3), (A54, s4)]);
        sys.rhs(t + C5 * h, tmp, s5);
        combo(tmp, y, h, &[(A61, k1), (A64, s4), (A65, s5)]);
        sys.rhs(t + C6 * h, tmp, s6);
        combo(tmp, y, h, &[(A71, k1), (A74, s4), (A75, s5), (A76, s6)]);
        sys.rhs(t + C7 * h, tmp, s7);
        combo(tmp, y, h, &[(A81, k1), (A84, s4), (A85, s5), (A86, s6), (A87, s7)]);
        sys.rhs(t + C8 * h, tmp, s8);
        combo(tmp, y, h, &[(A91, k1), (A94, s4), (A95, s5), (A96, s6), (A97, s7), (A98, s8)]);
        sys.rhs(t + C9 * h, tmp, s9);
        combo(tmp, y, h, &[(A101, k1), (A104, s4), (A105, s5), (A106, s6), (A107, s7), (A108, s8), (A109, s9)]);
        sys.rhs(t + C10 * h, tmp, s10);
        combo(
            tmp,
            y,
            h,
            &[(A111, k1), (A114, s4), (A115, s5), (A116, s6), (A117, s7), (A118, s8), (A119, s9), (A1110, s10)],
        );
        sys.rhs(t + C11 * h, tmp, s11);
        combo(
            tmp,
            y,
            h,
            &[
                (A121, k1),
                (A124, s4),
                (A125, s5),
                (A126, s6),
                (A127, s7),
                (A128, s8),
                (A129, s9),
                (A1210, s10),
                (A1211, s11),
            ],
        );
        sys.rhs(t + h, tmp, s12);
        self.stats.rhs_evals += 11;

        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..y.len() {
            let inc = k1[i] * B1
                + s6[i] * B6
                + s7[i] * B7
                + s8[i] * B8
                + s9[i] * B9
                + s10[i] * B10
                + s11[i] * B11
                + s12[i] * B12;
            self.incr[i] = inc;
            let y_new = y[i] + inc * h;
            let sk = self.ctrl.atol + self.ctrl.rtol * y[i].norm().max(y_new.norm());
            let e2 = inc - k1[i] * BHH1 - s9[i] * BHH2 - s12[i] * BHH3;
            err2 += (e2.norm() / sk).powi(2);
            let e = k1[i] * ER1
                + s6[i] * ER6
                + s7[i] * ER7
                + s8[i] * ER8
                + s9[i] * ER9
                + s10[i] * ER10
                + s11[i] * ER11
                + s12[i] * ER12;
            err += (e.norm() / sk).powi(2);
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        h.abs() * err * (1.0 / (y.len() as f64 * deno)).sqrt()
    }

    fn accept<S: OdeSystem>(&mut self, sys: &mut S, h: f64) {
        std::mem::swap(&mut self.y_old, &mut self.y);
        std::mem::swap(&mut self.f_old, &mut self.f);
        for ((y, yo), inc) in self.y.iter_mut().zip(&self.y_old).zip(&self.incr) {
            *y = yo + inc * h;
        }
        self.t_old = self.t;
        self.t += h;
        self.h_last = h;
        sys.rhs(self.t, &self.y, &mut self.f);
        self.stats.rhs_evals += 1;
        self.stats.accepted += 1;
        self.stepped = true;
        self.dense_ready = false;
    }

    fn prepare_dense<S: OdeSystem>(&mut self, sys: &mut S) {
        let h = self.h_last;
        let t = self.t_old;
        let yo = &self.y_old;
        let k1 = &self.f_old;
        let k4 = &self.f;
        let [s14, s15, s16, _, s6, s7, s8, s9, s10, s11, s12] = &mut self.stages;
        let tmp = &mut self.tmp;
        let [c1, c2, c3, c4, c5, c6, c7, c8] = &mut self.cont;

        for i in 0..yo.len() {
            let ydiff = self.y[i] - yo[i];
            let bspl = k1[i] * h - ydiff;
            c1[i] = yo[i];
            c2[i] = ydiff;
            c3[i] = bspl;
            c4[i] = ydiff - k4[i] * h - bspl;
            c5[i] = k1[i] * D41
                + s6[i] * D46
                + s7[i] * D47
                + s8[i] * D48
                + s9[i] * D49
                + s10[i] * D410
                + s11[i] * D411
                + s12[i] * D412;
            c6[i] = k1[i] * D51
                + s6[i] * D56
                + s7[i] * D57
                + s8[i] * D58
                + s9[i] * D59
                + s10[i] * D510
                + s11[i] * D511
                + s12[i] * D512;
            c7[i] = k1[i] * D61
                + s6[i] * D66
                + s7[i] * D67
                + s8[i] * D68
                + s9[i] * D69
                + s10[i] * D610
                + s11[i] * D611
                + s12[i] * D612;
            c8[i] = k1[i] * D71
                + s6[i] * D76
                + s7[i] * D77
                + s8[i] * D78
                + s9[i] * D79
                + s10[i] * D710
                + s11[i] * D711
                + s12[i] * D712;
        }

        combo(
            tmp,
            yo,
            h,
            &[(A141, k1), (A147, s7), (A148, s8), (A149, s9), (A1410, s10), (A1411, s11), (A1412, s12), (A1413, k4)],
        );
        sys.rhs(t + C14 * h, tmp, s14);
        combo(
            tmp,
            yo,
            h,
            &[(A151, k1), (A156, s6), (A157, s7), (A158, s8), (A1511, s11), (A1512, s12), (A1513, k4), (A1514, s14)],
        );
        sys.rhs(t + C15 * h, tmp, s15);
        combo(
            tmp,
            yo,
            h,
            &[(A161, k1), (A166, s6), (A167, s7), (A168, s8), (A169, s9), (A1613, k4), (A1614, s14), (A1615, s15)],
        );
        sys.rhs(t + C16 * h, tmp, s16);
        self.stats.rhs_evals += 3;

        for i in 0..yo.len() {
            c5[i] = (c5[i] + k4[i] * D413 + s14[i] * D414 + s15[i] * D415 + s16[i] * D416) * h;
            c6[i] = (c6[i] + k4[i] * D513 + s14[i] * D514 + s15[i] * D515 + s16[i] * D516) * h;
            c7[i] = (c7[i] + k4[i] * D613 + s14[i] * D614 + s15[i] * D615 + s16[i] * D616) * h;
            c8[i] = (c8[i] + k4[i] * D713 + s14[i] * D714 + s15[i] * D715 + s16[i] * D716) * h;
        }
        self.dense_ready = true;
    }

    /// Dense output at `t` inside the last accepted step.
    pub fn interpolate<S: OdeSystem>(&mut self, sys: &mut S, t: f64, out: &mut [C64]) {
        if t == self.t {
            out.copy_from_slice(&self.y);
            return;
        }
        assert!(self.stepped, "interpolation requested before any step");
        debug_assert!(t >= self.t_old - 1e-12 * self.t.abs().max(1.0) && t <= self.t);
        if !self.dense_ready {
            self.prepare_dense(sys);
        }
        let s = (t - self.t_old) / self.h_last;
        let s1 = 1.0 - s;
        let [c1, c2, c3, c4, c5, c6, c7, c8] = &self.cont;
        for i in 0..out.len() {
            let conpar = c5[i] + (c6[i] + (c7[i] + c8[i] * s) * s1) * s;
            out[i] = c1[i] + (c2[i] + (c3[i] + (c4[i] + conpar * s1) * s) * s1) * s;
        }
    }
}

/// Integrates from `times[0]`, landing exactly on every sample time. The
/// callback sees each sample and may overwrite the state; it returns `false`
/// to stop early.
pub fn integrate_samples<S, F>(
    sys: &mut S,
    y0: &[C64],
    times: &[f64],
    ctrl: StepControl,
    mut on_sample: F,
) -> Result<Stats>
where
    S: OdeSystem,
    F: FnMut(usize, f64, &mut Vec<C64>) -> Result<bool>,
{
    let Some(&t0) = times.first() else {
        return Ok(Stats::default());
    };
    let mut y = y0.to_vec();
    if !on_sample(0, t0, &mut y)? {
        return Ok(Stats::default());
    }
    let mut ode = Dop853::new(sys, t0, &y, ctrl);
    for (k, &ts) in times.iter().enumerate().skip(1) {
        while ode.t() < ts {
            ode.step(sys, ts)?;
        }
        y.copy_from_slice(ode.y());
        let before = y.clone();
        if !on_sample(k, ts, &mut y)? {
            break;
        }
        if y != before {
            ode.reset(sys, ts, &y);
        }
    }
    Ok(ode.stats())
}
