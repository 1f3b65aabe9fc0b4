//! Complex-time flows of polynomial vector fields.
//!
//! The flow `φᶻ` at complex time `z` is obtained by integrating
//! `dx/dτ = z · X(x)` over `τ ∈ [0, 1]`, i.e. along the straight segment from
//! `0` to `z`, with the Dormand–Prince 8(5,3) embedded pair. The state is
//! treated as `2n` real components for error control.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::poly::PolyMap;
use crate::sampling::{Sampler, DEFAULT_SEED};

/// States whose norm exceeds this abort the integration.
pub const ESCAPE_NORM: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// First trial step, measured in units of complex time.
    pub initial_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
            initial_step: 1e-2,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, tol) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(Error::Input(format!("{name} must lie in (0, 1e-2], got {tol}")));
            }
        }
        if self.max_steps < 1 {
            return Err(Error::Input("max_steps must be at least 1".into()));
        }
        if !(self.initial_step.is_finite() && self.initial_step > 0.0) {
            return Err(Error::Input(format!(
                "initial_step must be positive, got {}",
                self.initial_step
            )));
        }
        Ok(())
    }
}

/// Point `x0` to be flowed for complex time `z` (so `s = e^{2π√−1 z}`).
#[derive(Clone, Debug, PartialEq)]
pub struct FlowQuery {
    pub z: Complex64,
    pub x0: Vec<Complex64>,
}

/// `φᶻ(x0)` for the vector field `field`.
pub fn integrate_flow(field: &PolyMap, q: &FlowQuery, cfg: &IntegratorConfig) -> Result<Vec<Complex64>> {
    if q.x0.len() != field.dimension() {
        return Err(Error::Input(format!(
            "initial point has {} coordinates, field has dimension {}",
            q.x0.len(),
            field.dimension()
        )));
    }
    cfg.validate()?;
    if q.z == Complex64::new(0.0, 0.0) {
        return Ok(q.x0.clone());
    }
    Dop853::new(field, q.z, cfg).run(q.x0.clone())
}

/// `Dφᶻ(p) = exp(z · DX(p))`.
pub fn variational_matrix(field: &PolyMap, z: Complex64, p: &[Complex64]) -> Result<CMatrix> {
    let at_p = field.eval(p)?;
    let scale = linalg::max_abs(p).max(1.0);
    if linalg::max_abs(&at_p) > 1e-9 * scale {
        return Err(Error::Input(format!(
            "p is not a zero of the vector field (|X(p)| = {:.3e})",
            linalg::norm(&at_p)
        )));
    }
    Ok(linalg::expm_scaled(&jacobian_at(field, p), z))
}

/// `DX(p)` from exact polynomial differentiation.
pub fn jacobian_at(field: &PolyMap, p: &[Complex64]) -> CMatrix {
    let jac = field.jacobian();
    let n = field.dimension();
    CMatrix::from_fn(n, n, |i, j| jac[i][j].eval(p))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PeriodicityConfig {
    pub samples: usize,
    pub radius: f64,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for PeriodicityConfig {
    fn default() -> Self {
        PeriodicityConfig {
            samples: 20,
            radius: 0.5,
            tolerance: 1e-8,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicityReport {
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `max ‖φ¹(x) − x‖` over a polydisc cloud centered at `center`.
pub fn periodicity_check(
    field: &PolyMap,
    center: &[Complex64],
    samples: &PeriodicityConfig,
    cfg: &IntegratorConfig,
) -> Result<PeriodicityReport> {
    let mut sampler = Sampler::new(samples.seed);
    let mut max_residual: f64 = 0.0;
    for _ in 0..samples.samples {
        let x = sampler.polydisc(center, samples.radius);
        let q = FlowQuery {
            z: Complex64::new(1.0, 0.0),
            x0: x.clone(),
        };
        let y = integrate_flow(field, &q, cfg)?;
        max_residual = max_residual.max(linalg::distance(&x, &y));
    }
    Ok(PeriodicityReport {
        samples: samples.samples,
        max_residual,
        tolerance: samples.tolerance,
        passed: max_residual <= samples.tolerance,
    })
}

struct Dop853<'a> {
    field: &'a PolyMap,
    z: Complex64,
    cfg: &'a IntegratorConfig,
}

impl<'a> Dop853<'a> {
    fn new(field: &'a PolyMap, z: Complex64, cfg: &'a IntegratorConfig) -> Self {
        Dop853 { field, z, cfg }
    }

    fn rhs(&self, y: &[Complex64]) -> Vec<Complex64> {
        self.field.eval_unchecked(y).into_iter().map(|v| v * self.z).collect()
    }

    fn failure(&self, tau: f64, reason: impl Into<String>) -> Error {
        Error::IntegrationFailure {
            reached: self.z * tau,
            reason: reason.into(),
        }
    }

    fn run(&self, mut y: Vec<Complex64>) -> Result<Vec<Complex64>> {
        let n = y.len();
        let real_dim = (2 * n) as f64;
        let mut tau = 0.0f64;
        let mut h = (self.cfg.initial_step / self.z.norm()).min(1.0);
        let mut steps = 0usize;
        let mut last_rejected = false;
        let mut k1 = self.rhs(&y);

        while tau < 1.0 {
            if steps >= self.cfg.max_steps {
                return Err(self.failure(tau, format!("step budget of {} exhausted", self.cfg.max_steps)));
            }
            if h < 1e-14 {
                return Err(self.failure(tau, "step size underflow"));
            }
            let last = tau + h >= 1.0;
            if last {
                h = 1.0 - tau;
            }
            steps += 1;

            let stage = |coeffs: &[(f64, &Vec<Complex64>)]| -> Vec<Complex64> {
                let mut out = y.clone();
                for &(a, k) in coeffs {
                    let ah = a * h;
                    for (o, kv) in out.iter_mut().zip(k.iter()) {
                        *o += kv * ah;
                    }
                }
                out
            };

            let k2 = self.rhs(&stage(&[(A21, &k1)]));
            let k3 = self.rhs(&stage(&[(A31, &k1), (A32, &k2)]));
            let k4 = self.rhs(&stage(&[(A41, &k1), (A43, &k3)]));
            let k5 = self.rhs(&stage(&[(A51, &k1), (A53, &k3), (A54, &k4)]));
            let k6 = self.rhs(&stage(&[(A61, &k1), (A64, &k4), (A65, &k5)]));
            let k7 = self.rhs(&stage(&[(A71, &k1), (A74, &k4), (A75, &k5), (A76, &k6)]));
            let k8 = self.rhs(&stage(&[(A81, &k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)]));
            let k9 = self.rhs(&stage(&[
                (A91, &k1),
                (A94, &k4),
                (A95, &k5),
                (A96, &k6),
                (A97, &k7),
                (A98, &k8),
            ]));
            let k10 = self.rhs(&stage(&[
                (A101, &k1),
                (A104, &k4),
                (A105, &k5),
                (A106, &k6),
                (A107, &k7),
                (A108, &k8),
                (A109, &k9),
            ]));
            let k11 = self.rhs(&stage(&[
                (A111, &k1),
                (A114, &k4),
                (A115, &k5),
                (A116, &k6),
                (A117, &k7),
                (A118, &k8),
                (A119, &k9),
                (A1110, &k10),
            ]));
            let y12 = stage(&[
                (A121, &k1),
                (A124, &k4),
                (A125, &k5),
                (A126, &k6),
                (A127, &k7),
                (A128, &k8),
                (A129, &k9),
                (A1210, &k10),
                (A1211, &k11),
            ]);
            let k12 = self.rhs(&y12);

            let mut increment = vec![Complex64::new(0.0, 0.0); n];
            let mut err = 0.0;
            let mut err2 = 0.0;
            let mut y_new = Vec::with_capacity(n);
            for i in 0..n {
                let inc = k1[i] * B1
                    + k6[i] * B6
                    + k7[i] * B7
                    + k8[i] * B8
                    + k9[i] * B9
                    + k10[i] * B10
                    + k11[i] * B11
                    + k12[i] * B12;
                increment[i] = inc;
                let yn = y[i] + inc * h;
                let e2 = inc - k1[i] * BHH1 - k9[i] * BHH2 - k12[i] * BHH3;
                let e = k1[i] * ER1
                    + k6[i] * ER6
                    + k7[i] * ER7
                    + k8[i] * ER8
                    + k9[i] * ER9
                    + k10[i] * ER10
                    + k11[i] * ER11
                    + k12[i] * ER12;
                let sk_re = self.cfg.abs_tol + self.cfg.rel_tol * y[i].re.abs().max(yn.re.abs());
                let sk_im = self.cfg.abs_tol + self.cfg.rel_tol * y[i].im.abs().max(yn.im.abs());
                err += (e.re / sk_re).powi(2) + (e.im / sk_im).powi(2);
                err2 += (e2.re / sk_re).powi(2) + (e2.im / sk_im).powi(2);
                y_new.push(yn);
            }
            let mut deno = err + 0.01 * err2;
            if deno <= 0.0 {
                deno = 1.0;
            }
            let err = h * err * (1.0 / (real_dim * deno)).sqrt();
            if !err.is_finite() {
                // Overflow inside the stages; retry with a much smaller step.
                h *= 0.1;
                last_rejected = true;
                continue;
            }

            let fac11 = err.powf(1.0 / 8.0);
            let fac = (fac11 / SAFETY).clamp(1.0 / MAX_GROWTH, 1.0 / MIN_SHRINK);
            let mut h_new = h / fac;

            if err <= 1.0 {
                tau = if last { 1.0 } else { tau + h };
                y = y_new;
                if y.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(self.failure(tau, "state became non-finite"));
                }
                if linalg::norm(&y) > ESCAPE_NORM {
                    return Err(self.failure(tau, format!("state norm exceeded {ESCAPE_NORM:e}")));
                }
                k1 = self.rhs(&y);
                if last_rejected {
                    h_new = h_new.min(h);
                }
                last_rejected = false;
            } else {
                h_new = h / (1.0 / MIN_SHRINK).min(fac11 / SAFETY);
                last_rejected = true;
            }
            h = h_new;
        }
        Ok(y)
    }
}

const SAFETY: f64 = 0.9;
const MIN_SHRINK: f64 = 0.333;
const MAX_GROWTH: f64 = 6.0;

// Dormand–Prince 8(5,3) tableau (Hairer, Nørsett & Wanner).
const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;

const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{euler_cubic_action, euler_cubic_field, linear_field};
    use crate::linalg::TWO_PI_I;
    use crate::poly::Poly;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn linear_flow_quarter_period() {
        let x = integrate_flow(
            &linear_field(&[1, 2]),
            &FlowQuery {
                z: c(0.25, 0.0),
                x0: vec![c(1.0, 0.0), c(1.0, 0.0)],
            },
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!((x[0] - c(0.0, 1.0)).norm() < 1e-9);
        assert!((x[1] - c(-1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn zero_time_returns_start_exactly() {
        let x0 = vec![c(0.3, -0.1), c(0.7, 0.2)];
        let x = integrate_flow(
            &euler_cubic_field(),
            &FlowQuery { z: c(0.0, 0.0), x0: x0.clone() },
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(x, x0);
    }

    #[test]
    fn cubic_flow_matches_closed_form() {
        let field = euler_cubic_field();
        let closed = euler_cubic_action();
        let cfg = IntegratorConfig::default();
        for z in [c(1.0, 0.0), c(0.3, 0.1), c(-0.45, -0.15), c(0.0, 0.2)] {
            let x0 = vec![c(0.5, 0.0), c(0.3, 0.0)];
            let got = integrate_flow(&field, &FlowQuery { z, x0: x0.clone() }, &cfg).unwrap();
            let s = (TWO_PI_I * z).exp();
            let want = closed.eval(s, &x0).unwrap();
            assert!(linalg::distance(&got, &want) < 1e-8, "z = {z}: {got:?} vs {want:?}");
        }
    }

    #[test]
    fn variational_matrix_matches_closed_form() {
        let field = euler_cubic_field();
        let p = [c(0.0, 0.0), c(0.0, 0.0)];
        let t = 0.37;
        let m = variational_matrix(&field, c(-t, 0.0), &p).unwrap();
        let e1 = (TWO_PI_I * -t).exp();
        let e2 = (TWO_PI_I * (-2.0 * t)).exp();
        assert!((m[(0, 0)] - e1).norm() < 1e-13);
        assert!((m[(1, 1)] - e2).norm() < 1e-13);
        assert!(m[(0, 1)].norm() < 1e-13 && m[(1, 0)].norm() < 1e-13);

        // oracle: contour Jacobian of the integrated flow at p
        let cfg = IntegratorConfig::default();
        let jac = linalg::holomorphic_jacobian(
            |x| integrate_flow(&field, &FlowQuery { z: c(-t, 0.0), x0: x.to_vec() }, &cfg),
            &p,
            1e-2,
            8,
        )
        .unwrap();
        assert!((jac - &m).iter().all(|e| e.norm() < 1e-8));

        let id = variational_matrix(&field, c(0.0, 0.0), &p).unwrap();
        assert_eq!(id, CMatrix::identity(2, 2));
        let one = variational_matrix(&linear_field(&[1, 2]), c(1.0, 0.0), &p).unwrap();
        assert!((one - CMatrix::identity(2, 2)).iter().all(|e| e.norm() < 1e-13));
    }

    #[test]
    fn variational_inverse_pair() {
        let field = euler_cubic_field();
        let p = [c(0.0, 0.0), c(0.0, 0.0)];
        let z = c(0.31, -0.44);
        let a = variational_matrix(&field, z, &p).unwrap();
        let b = variational_matrix(&field, -z, &p).unwrap();
        assert!((a * b - CMatrix::identity(2, 2)).iter().all(|e| e.norm() < 1e-10));
    }

    #[test]
    fn periodicity_of_generators() {
        let cfg = IntegratorConfig::default();
        let origin = [c(0.0, 0.0), c(0.0, 0.0)];
        let good = periodicity_check(&euler_cubic_field(), &origin, &PeriodicityConfig::default(), &cfg).unwrap();
        assert!(good.passed, "{good:?}");
        assert!(good.max_residual <= 1e-8);

        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let missing_factor = PolyMap::new(vec![x, y.scale(&c(2.0, 0.0))]).unwrap();
        let bad = periodicity_check(&missing_factor, &origin, &PeriodicityConfig::default(), &cfg).unwrap();
        assert!(!bad.passed);
        assert!(bad.max_residual > 0.1);

        let zero = periodicity_check(&PolyMap::zero(2), &origin, &PeriodicityConfig::default(), &cfg).unwrap();
        assert_eq!(zero.max_residual, 0.0);
        assert!(zero.passed);
    }

    #[test]
    fn escape_guard_reports_failure() {
        // ẋ = x², blows up at finite real time from x0 = 1
        let x = Poly::var(1, 0);
        let field = PolyMap::new(vec![x.pow(2)]).unwrap();
        let err = integrate_flow(
            &field,
            &FlowQuery { z: c(2.0, 0.0), x0: vec![c(1.0, 0.0)] },
            &IntegratorConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::IntegrationFailure { .. }));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = IntegratorConfig { rel_tol: 0.5, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = IntegratorConfig { max_steps: 0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
