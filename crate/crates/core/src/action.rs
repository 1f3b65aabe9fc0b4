//! ℂ*-action descriptions: validation, linear part, weights and the
//! dicritical classification of the fixed point.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::catalog::{translated, translation};
use crate::error::{Error, Result};
use crate::flow::{self, FlowQuery, IntegratorConfig, PeriodicityConfig, PeriodicityReport};
use crate::linalg::{self, CMatrix, TWO_PI_I};
use crate::poly::{ActionPoly, LaurentPoly, MultiIndex, PolyMap};
use crate::sampling::{Sampler, DEFAULT_SEED};

/// Weights beyond this magnitude are treated as corrupt input.
pub const MAX_WEIGHT: i64 = 1_000_000;
/// Eigenvector matrices with a larger condition number signal a nilpotent part.
pub const SEMISIMPLE_CONDITION_LIMIT: f64 = 1e8;
pub const DEFAULT_WEIGHT_TOLERANCE: f64 = 1e-6;

/// `s = e^{2π√−1 z}`
pub fn group_element(z: Complex64) -> Complex64 {
    (TWO_PI_I * z).exp()
}

#[derive(Clone, Debug, PartialEq)]
pub enum ActionKind {
    ClosedForm(ActionPoly),
    VectorField(PolyMap),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionSpec {
    kind: ActionKind,
    fixed_point: Vec<Complex64>,
}

impl ActionSpec {
    pub fn closed_form(action: ActionPoly, fixed_point: Vec<Complex64>) -> Result<Self> {
        Self::new(ActionKind::ClosedForm(action), fixed_point)
    }

    pub fn vector_field(field: PolyMap, fixed_point: Vec<Complex64>) -> Result<Self> {
        Self::new(ActionKind::VectorField(field), fixed_point)
    }

    pub fn new(kind: ActionKind, fixed_point: Vec<Complex64>) -> Result<Self> {
        let n = match &kind {
            ActionKind::ClosedForm(a) => a.dimension(),
            ActionKind::VectorField(f) => f.dimension(),
        };
        if n == 0 {
            return Err(Error::Input("dimension must be at least 1".into()));
        }
        if fixed_point.len() != n {
            return Err(Error::Input(format!(
                "fixed point has {} coordinates, action has dimension {n}",
                fixed_point.len()
            )));
        }
        Ok(ActionSpec { kind, fixed_point })
    }

    pub fn kind(&self) -> &ActionKind {
        &self.kind
    }

    pub fn fixed_point(&self) -> &[Complex64] {
        &self.fixed_point
    }

    pub fn dimension(&self) -> usize {
        self.fixed_point.len()
    }

    fn fixed_point_is_origin(&self) -> bool {
        self.fixed_point.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    /// `Φ(s, u + p) − p`, an action fixing the origin.
    pub fn centered_action(&self) -> Option<ActionPoly> {
        match &self.kind {
            ActionKind::ClosedForm(a) if self.fixed_point_is_origin() => Some(a.clone()),
            ActionKind::ClosedForm(a) => {
                let minus: Vec<Complex64> = self.fixed_point.iter().map(|c| -c).collect();
                Some(translated(a, &minus))
            }
            ActionKind::VectorField(_) => None,
        }
    }

    /// `X(u + p)`, a field vanishing at the origin.
    pub fn centered_field(&self) -> Option<PolyMap> {
        match &self.kind {
            ActionKind::VectorField(f) if self.fixed_point_is_origin() => Some(f.clone()),
            ActionKind::VectorField(f) => Some(f.compose(&translation(&self.fixed_point))),
            ActionKind::ClosedForm(_) => None,
        }
    }

    /// `φᶻ(x)`: closed-form evaluation at `s = e^{2π√−1 z}` or the flow of the
    /// generating field at complex time `z`.
    pub fn flow(&self, z: Complex64, x: &[Complex64], cfg: &IntegratorConfig) -> Result<Vec<Complex64>> {
        match &self.kind {
            ActionKind::ClosedForm(a) => a.eval(group_element(z), x),
            ActionKind::VectorField(f) => flow::integrate_flow(f, &FlowQuery { z, x0: x.to_vec() }, cfg),
        }
    }

    /// Maximal Laurent frequency of a closed-form action; `None` for fields.
    pub fn max_frequency(&self) -> Option<u32> {
        match &self.kind {
            ActionKind::ClosedForm(a) => Some(a.max_frequency()),
            ActionKind::VectorField(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationConfig {
    pub samples: usize,
    /// Polydisc radius of sample points about the fixed point.
    pub radius: f64,
    pub min_modulus: f64,
    pub max_modulus: f64,
    /// Bound on relative residuals, `‖a − b‖ / max(1, ‖b‖)`.
    pub tolerance: f64,
    pub seed: u64,
    pub periodicity: PeriodicityConfig,
    pub integrator: IntegratorConfig,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            samples: 50,
            radius: 1.0,
            min_modulus: 0.1,
            max_modulus: 10.0,
            tolerance: 1e-10,
            seed: DEFAULT_SEED,
            periodicity: PeriodicityConfig::default(),
            integrator: IntegratorConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub kind: &'static str,
    pub samples: usize,
    pub tolerance: f64,
    /// `max ‖Φ(s, Φ(s′, x)) − Φ(ss′, x)‖`, relative
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_law_residual: Option<f64>,
    /// `max ‖Φ(1, x) − x‖`, relative
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_residual: Option<f64>,
    /// `max ‖Φ(s, p) − p‖`, relative
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_point_residual: Option<f64>,
    /// `‖X(p)‖`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_at_fixed_point: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periodicity: Option<PeriodicityReport>,
    pub passed: bool,
}

fn relative_residual(got: &[Complex64], want: &[Complex64]) -> f64 {
    linalg::distance(got, want) / linalg::norm(want).max(1.0)
}

/// Absolute group-law defect `‖Φ(s, Φ(s′, x)) − Φ(ss′, x)‖` at one sample.
pub fn group_law_residual(action: &ActionPoly, s: Complex64, s_prime: Complex64, x: &[Complex64]) -> Result<f64> {
    let inner = action.eval(s_prime, x)?;
    let lhs = action.eval(s, &inner)?;
    let rhs = action.eval(s * s_prime, x)?;
    Ok(linalg::distance(&lhs, &rhs))
}

/// Checks the action axioms on a seeded sample cloud.
pub fn validate_action(spec: &ActionSpec, cfg: &ValidationConfig) -> Result<ValidationReport> {
    if !(cfg.min_modulus > 0.0) || cfg.max_modulus < cfg.min_modulus {
        return Err(Error::Domain(format!(
            "sampled |s| must lie in a positive range, got [{}, {}]",
            cfg.min_modulus, cfg.max_modulus
        )));
    }
    let p = spec.fixed_point();
    let mut sampler = Sampler::new(cfg.seed);
    match spec.kind() {
        ActionKind::ClosedForm(action) => {
            // Exact check first: every coefficient at s = 1 must be the identity's.
            let at_one = action.at(Complex64::new(1.0, 0.0))?;
            let mut identity = at_one.max_coefficient_distance(&PolyMap::identity(spec.dimension()));
            let (mut group, mut fixed) = (0.0f64, 0.0f64);
            for _ in 0..cfg.samples {
                let s = sampler.annulus(cfg.min_modulus, cfg.max_modulus);
                let s_prime = sampler.annulus(cfg.min_modulus, cfg.max_modulus);
                let x = sampler.polydisc(p, cfg.radius);
                let inner = action.eval(s_prime, &x)?;
                let lhs = action.eval(s, &inner)?;
                let rhs = action.eval(s * s_prime, &x)?;
                group = group.max(relative_residual(&lhs, &rhs));
                identity = identity.max(relative_residual(&action.eval(Complex64::new(1.0, 0.0), &x)?, &x));
                fixed = fixed.max(relative_residual(&action.eval(s, p)?, p));
            }
            let passed = group <= cfg.tolerance && identity <= cfg.tolerance && fixed <= cfg.tolerance;
            Ok(ValidationReport {
                kind: "closed_form",
                samples: cfg.samples,
                tolerance: cfg.tolerance,
                group_law_residual: Some(group),
                identity_residual: Some(identity),
                fixed_point_residual: Some(fixed),
                field_at_fixed_point: None,
                periodicity: None,
                passed,
            })
        }
        ActionKind::VectorField(field) => {
            let at_p = linalg::norm(&field.eval(p)?);
            let periodicity = flow::periodicity_check(field, p, &cfg.periodicity, &cfg.integrator)?;
            let passed = at_p <= cfg.tolerance && periodicity.passed;
            Ok(ValidationReport {
                kind: "vector_field",
                samples: periodicity.samples,
                tolerance: cfg.tolerance,
                group_law_residual: None,
                identity_residual: None,
                fixed_point_residual: None,
                field_at_fixed_point: Some(at_p),
                periodicity: Some(periodicity),
                passed,
            })
        }
    }
}

/// Linear part of the action at its fixed point.
#[derive(Clone, Debug, PartialEq)]
pub enum LinearPart {
    /// `L(s)`, entry `(i, j)` the coefficient of `u_j` in coordinate `i`.
    Laurent(Vec<Vec<LaurentPoly>>),
    /// `DX(p)`
    Constant(CMatrix),
}

impl LinearPart {
    pub fn dimension(&self) -> usize {
        match self {
            LinearPart::Laurent(m) => m.len(),
            LinearPart::Constant(m) => m.nrows(),
        }
    }

    /// The matrix of `ψᶻ = (Dφᶻ)_p`.
    pub fn at(&self, z: Complex64) -> CMatrix {
        match self {
            LinearPart::Laurent(m) => {
                let s = group_element(z);
                let n = m.len();
                CMatrix::from_fn(n, n, |i, j| m[i][j].eval(s))
            }
            LinearPart::Constant(m) => linalg::expm_scaled(m, z),
        }
    }

    /// The infinitesimal generator `d/dz ψᶻ |_{z=0}`.
    pub fn generator(&self) -> CMatrix {
        match self {
            LinearPart::Laurent(m) => {
                let n = m.len();
                CMatrix::from_fn(n, n, |i, j| {
                    m[i][j].terms().map(|(k, c)| c * (k as f64)).sum::<Complex64>() * TWO_PI_I
                })
            }
            LinearPart::Constant(m) => m.clone(),
        }
    }

    /// The matrix coefficient `C_k` of `s^k`, for closed forms.
    fn laurent_coefficients(m: &[Vec<LaurentPoly>]) -> BTreeMap<i32, CMatrix> {
        let n = m.len();
        let mut out: BTreeMap<i32, CMatrix> = BTreeMap::new();
        for (i, row) in m.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                for (k, c) in entry.terms() {
                    out.entry(k).or_insert_with(|| CMatrix::zeros(n, n))[(i, j)] = c;
                }
            }
        }
        out
    }
}

/// `(Dφ)_p`: degree-one coefficients of the centered closed form, or the
/// exact Jacobian of the generating field at `p`.
pub fn linear_part(spec: &ActionSpec) -> LinearPart {
    let n = spec.dimension();
    match spec.kind() {
        ActionKind::ClosedForm(_) => {
            let centered = spec.centered_action().expect("closed form");
            LinearPart::Laurent(
                centered
                    .coords()
                    .iter()
                    .map(|p| (0..n).map(|j| p.coefficient(&MultiIndex::unit(n, j))).collect())
                    .collect(),
            )
        }
        ActionKind::VectorField(f) => LinearPart::Constant(flow::jacobian_at(f, spec.fixed_point())),
    }
}

/// Integer weights and the change of basis diagonalizing the linear part:
/// `A⁻¹ ψᶻ A = diag(e^{2π√−1 λ_j z})`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightData {
    pub weights: Vec<i64>,
    pub basis: CMatrix,
    pub basis_inverse: CMatrix,
    pub residual: f64,
}

impl WeightData {
    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    /// `diag(s^{λ_j})` entries at `s = e^{2π√−1 z}`.
    pub fn characters(&self, z: Complex64) -> Vec<Complex64> {
        self.weights.iter().map(|&w| (TWO_PI_I * z * w as f64).exp()).collect()
    }

    /// Coordinates `A⁻¹ v` in the diagonalizing frame.
    pub fn to_frame(&self, v: &[Complex64]) -> Vec<Complex64> {
        linalg::mat_vec(&self.basis_inverse, v)
    }

    pub fn from_frame(&self, u: &[Complex64]) -> Vec<Complex64> {
        linalg::mat_vec(&self.basis, u)
    }

    /// `ψᶻ(v) = A diag(s^λ) A⁻¹ v`
    pub fn linear_action(&self, z: Complex64, v: &[Complex64]) -> Vec<Complex64> {
        let u = self.to_frame(v);
        let scaled: Vec<Complex64> = u.iter().zip(self.characters(z)).map(|(a, b)| a * b).collect();
        self.from_frame(&scaled)
    }

    pub fn linear_action_matrix(&self, z: Complex64) -> CMatrix {
        let d = CMatrix::from_diagonal(&DVector::from_vec(self.characters(z)));
        &self.basis * d * &self.basis_inverse
    }
}

fn check_weight_cap(weights: &[i64]) -> Result<()> {
    match weights.iter().find(|w| w.abs() > MAX_WEIGHT) {
        Some(&w) => Err(Error::SuspectWeight { weight: w, cap: MAX_WEIGHT }),
        None => Ok(()),
    }
}

fn finish(weights: Vec<i64>, basis: CMatrix, residual: f64) -> Result<WeightData> {
    let condition = linalg::condition_number(&basis);
    if condition > SEMISIMPLE_CONDITION_LIMIT {
        return Err(Error::NilpotentPartDetected(format!(
            "eigenvector matrix condition number {condition:.3e} exceeds {SEMISIMPLE_CONDITION_LIMIT:e}"
        )));
    }
    let basis_inverse = basis
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NilpotentPartDetected("eigenvector matrix is singular".into()))?;
    Ok(WeightData {
        weights,
        basis,
        basis_inverse,
        residual,
    })
}

/// Extracts integer weights and a diagonalizing basis from the linear part.
///
/// Closed forms are read off directly: `L(s) = Σ C_k s^k` is a representation
/// exactly when the `C_k` are complementary projectors, whose ranges are the
/// weight spaces. Constant generators go through an eigen-decomposition whose
/// eigenvalues, divided by `2π√−1`, must round to integers within `tol`.
pub fn extract_weights(linear: &LinearPart, tol: f64) -> Result<WeightData> {
    let n = linear.dimension();
    match linear {
        LinearPart::Laurent(m) => {
            let coeffs = LinearPart::laurent_coefficients(m);
            let mut subspaces = Vec::new();
            let mut total_rank = 0;
            for (&k, c) in &coeffs {
                let scale = linalg::spectral_norm(c).max(1.0);
                let rank = linalg::singular_values(c).iter().filter(|&&s| s > 1e-8 * scale).count();
                if rank == 0 {
                    continue;
                }
                total_rank += rank;
                subspaces.push((k as i64, linalg::select_columns(c, rank)));
            }
            if total_rank != n {
                return Err(Error::NilpotentPartDetected(format!(
                    "coefficient ranges of the linear part have total rank {total_rank}, expected {n}"
                )));
            }
            let mut defect: f64 = 0.0;
            for (&j, cj) in &coeffs {
                for (&k, ck) in &coeffs {
                    let prod = cj * ck;
                    let want = if j == k { ck.clone() } else { CMatrix::zeros(n, n) };
                    defect = defect.max(linalg::max_entry(&(prod - want)));
                }
            }
            if defect > tol {
                return Err(Error::NilpotentPartDetected(format!(
                    "linear part is not a representation of C* (projector defect {defect:.3e})"
                )));
            }
            let (weights, basis) = linalg::assemble_frame(&subspaces)
                .ok_or_else(|| Error::NilpotentPartDetected("weight spaces do not span".into()))?;
            check_weight_cap(&weights)?;
            let data = finish(weights, basis, 0.0)?;
            let probe = Complex64::new(0.137, 0.0);
            let diag_defect =
                linalg::max_entry(&(data.basis_inverse.clone() * linear.at(probe) * &data.basis - diag(&data, probe)));
            let residual = defect.max(diag_defect);
            if residual > tol {
                return Err(Error::NotAPeriodicFlow { residual, tolerance: tol });
            }
            Ok(WeightData { residual, ..data })
        }
        LinearPart::Constant(gen) => {
            let mut rounded = Vec::with_capacity(n);
            let mut residual: f64 = 0.0;
            for mu in linalg::eigenvalues(gen) {
                let ratio = mu / TWO_PI_I;
                if !(ratio.re.is_finite() && ratio.im.is_finite()) {
                    return Err(Error::NotAPeriodicFlow {
                        residual: f64::INFINITY,
                        tolerance: tol,
                    });
                }
                if ratio.re.abs() > MAX_WEIGHT as f64 + 0.5 {
                    return Err(Error::SuspectWeight {
                        weight: ratio.re.round() as i64,
                        cap: MAX_WEIGHT,
                    });
                }
                let lambda = ratio.re.round();
                residual = residual.max((ratio - lambda).norm());
                rounded.push(lambda as i64);
            }
            if residual > tol {
                return Err(Error::NotAPeriodicFlow { residual, tolerance: tol });
            }
            let mut multiplicity: Vec<(i64, usize)> = Vec::new();
            for &w in &rounded {
                match multiplicity.iter_mut().find(|(v, _)| *v == w) {
                    Some((_, count)) => *count += 1,
                    None => multiplicity.push((w, 1)),
                }
            }
            let scale = linalg::spectral_norm(gen).max(1.0);
            let mut subspaces = Vec::with_capacity(multiplicity.len());
            for &(w, count) in &multiplicity {
                let shifted = gen - CMatrix::identity(n, n) * (TWO_PI_I * w as f64);
                let (space, worst) = linalg::near_null_space(&shifted, count);
                if worst > 1e-6 * scale {
                    return Err(Error::NilpotentPartDetected(format!(
                        "weight {w} has algebraic multiplicity {count} but a smaller eigenspace \
                         (singular value {worst:.3e})"
                    )));
                }
                subspaces.push((w, space));
            }
            let (weights, basis) = linalg::assemble_frame(&subspaces)
                .ok_or_else(|| Error::NilpotentPartDetected("eigenspaces do not span".into()))?;
            check_weight_cap(&weights)?;
            let data = finish(weights, basis, 0.0)?;
            let target = CMatrix::from_diagonal(&DVector::from_iterator(
                n,
                data.weights.iter().map(|&w| TWO_PI_I * w as f64),
            ));
            let diag_defect =
                linalg::max_entry(&(data.basis_inverse.clone() * gen * &data.basis - target)) / TWO_PI_I.im;
            let residual = residual.max(diag_defect);
            if residual > tol {
                return Err(Error::NotAPeriodicFlow { residual, tolerance: tol });
            }
            Ok(WeightData { residual, ..data })
        }
    }
}

fn diag(w: &WeightData, z: Complex64) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_vec(w.characters(z)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SignConvention {
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "tag")]
pub enum FixedPointClass {
    /// All weights nonzero with a common sign.
    Dicritical { sign: SignConvention },
    ZeroWeight,
    MixedSigns,
}

impl FixedPointClass {
    pub fn is_dicritical(&self) -> bool {
        matches!(self, FixedPointClass::Dicritical { .. })
    }
}

pub fn classify_weights(weights: &[i64]) -> FixedPointClass {
    if weights.contains(&0) {
        FixedPointClass::ZeroWeight
    } else if weights.iter().all(|&w| w > 0) {
        FixedPointClass::Dicritical {
            sign: SignConvention::Positive,
        }
    } else if weights.iter().all(|&w| w < 0) {
        FixedPointClass::Dicritical {
            sign: SignConvention::Negative,
        }
    } else {
        FixedPointClass::MixedSigns
    }
}

pub fn classify_fixed_point(w: &WeightData) -> FixedPointClass {
    classify_weights(&w.weights)
}
