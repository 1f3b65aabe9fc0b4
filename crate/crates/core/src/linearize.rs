//! The circle-averaged linearizer
//!
//! ```text
//! F(x) = ∫₀¹ Dφ^{−t}(p) · [φᵗ(x) − p] dt
//! ```
//!
//! satisfies `F(p) = 0`, `DF(p) = Id` and `ψᶻ ∘ F = F ∘ φᶻ` with `ψ = (Dφ)_p`.
//! For closed-form actions the integral is taken coefficient by coefficient:
//! in the frame diagonalizing `ψ`, the `x^α` coefficient of coordinate `i` is
//! the constant term of `s^{−λ_i} c_{i,α}(s)`. The numeric backend applies the
//! trapezoid rule, which is exact for trigonometric polynomials whose
//! frequencies stay below the number of distinct nodes.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use serde::Serialize;

use crate::action::{
    self, group_element, ActionKind, ActionSpec, LinearPart, WeightData, DEFAULT_WEIGHT_TOLERANCE,
};
use crate::catalog::translation;
use crate::error::{Error, Result};
use crate::flow::{self, FlowQuery, IntegratorConfig};
use crate::linalg::{self, CMatrix};
use crate::poly::{MultiIndex, Poly, PolyMap};
use crate::sampling::Sampler;

/// Trapezoid rule on `t ∈ [0, 1]` with `nodes` points including both ends,
/// i.e. `nodes − 1` distinct samples of the periodic integrand.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub nodes: usize,
    /// Keep doubling `nodes` until two successive values agree.
    pub auto_refine: bool,
    pub max_nodes: usize,
    pub refine_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            nodes: 64,
            auto_refine: true,
            max_nodes: 4096,
            refine_tol: 1e-12,
        }
    }
}

impl QuadratureConfig {
    pub fn fixed(nodes: usize) -> Self {
        QuadratureConfig {
            nodes,
            auto_refine: false,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(Error::Input(format!("quadrature needs at least 2 nodes, got {}", self.nodes)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum LinearizerMap {
    Symbolic(PolyMap),
    /// Evaluated pointwise by quadrature of the flow.
    Numeric {
        spec: ActionSpec,
        quadrature: QuadratureConfig,
        integrator: IntegratorConfig,
    },
}

#[derive(Clone, Debug)]
pub struct Linearizer {
    map: LinearizerMap,
    fixed_point: Vec<Complex64>,
    weights: WeightData,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Normalization {
    /// `‖F(p)‖`
    pub value_at_fixed_point: f64,
    /// `max |DF(p) − Id|`, entrywise
    pub jacobian_defect: f64,
}

impl Linearizer {
    pub fn from_polymap(map: PolyMap, fixed_point: Vec<Complex64>, weights: WeightData) -> Result<Self> {
        if map.dimension() != fixed_point.len() || weights.dimension() != fixed_point.len() {
            return Err(Error::Input("linearizer, fixed point and weights must share a dimension".into()));
        }
        Ok(Linearizer {
            map: LinearizerMap::Symbolic(map),
            fixed_point,
            weights,
        })
    }

    pub fn map(&self) -> &LinearizerMap {
        &self.map
    }

    pub fn polymap(&self) -> Option<&PolyMap> {
        match &self.map {
            LinearizerMap::Symbolic(m) => Some(m),
            LinearizerMap::Numeric { .. } => None,
        }
    }

    pub fn fixed_point(&self) -> &[Complex64] {
        &self.fixed_point
    }

    pub fn weights(&self) -> &WeightData {
        &self.weights
    }

    pub fn dimension(&self) -> usize {
        self.fixed_point.len()
    }

    pub fn eval(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        match &self.map {
            LinearizerMap::Symbolic(m) => m.eval(x),
            LinearizerMap::Numeric {
                spec,
                quadrature,
                integrator,
            } => bochner_numeric(spec, x, quadrature, integrator),
        }
    }

    /// Contour-difference Jacobian at `x`.
    pub fn jacobian(&self, x: &[Complex64]) -> Result<CMatrix> {
        linalg::holomorphic_jacobian(|y| self.eval(y), x, 1e-2, 8)
    }

    /// `F(p) = 0` and `DF(p) = Id`, measured.
    pub fn normalization(&self) -> Result<Normalization> {
        let n = self.dimension();
        let value = self.eval(&self.fixed_point)?;
        let jac = self.jacobian(&self.fixed_point)?;
        Ok(Normalization {
            value_at_fixed_point: linalg::norm(&value),
            jacobian_defect: linalg::max_entry(&(jac - CMatrix::identity(n, n))),
        })
    }
}

fn is_identity(m: &CMatrix) -> bool {
    *m == CMatrix::identity(m.nrows(), m.ncols())
}

fn check_weights(w: &WeightData) -> Result<()> {
    if !(w.residual <= DEFAULT_WEIGHT_TOLERANCE) {
        return Err(Error::WeightsUnreliable {
            residual: w.residual,
            tolerance: DEFAULT_WEIGHT_TOLERANCE,
        });
    }
    Ok(())
}

/// Averages a closed-form action coefficient by coefficient.
pub fn bochner_symbolic(spec: &ActionSpec, w: &WeightData) -> Result<Linearizer> {
    check_weights(w)?;
    let centered = spec
        .centered_action()
        .ok_or_else(|| Error::Input("the symbolic backend needs a closed-form action".into()))?;
    let n = spec.dimension();
    if w.dimension() != n {
        return Err(Error::Input("weights do not match the action dimension".into()));
    }
    let frame_identity = is_identity(&w.basis);
    let in_frame = if frame_identity {
        centered
    } else {
        centered.conjugate(
            &PolyMap::linear(&linalg::to_rows(&w.basis_inverse)),
            &PolyMap::linear(&linalg::to_rows(&w.basis)),
        )
    };
    let averaged = PolyMap::new(
        in_frame
            .coords()
            .iter()
            .zip(&w.weights)
            .map(|(coord, &lambda)| coord.map_coeffs(|_, c| c.shift(-(lambda as i32)).circle_average()))
            .collect(),
    )?;
    let p = spec.fixed_point();
    let mut map = if frame_identity {
        averaged
    } else {
        PolyMap::linear(&linalg::to_rows(&w.basis))
            .compose(&averaged)
            .compose(&PolyMap::linear(&linalg::to_rows(&w.basis_inverse)))
    };
    if p.iter().any(|c| *c != Complex64::new(0.0, 0.0)) {
        let minus: Vec<Complex64> = p.iter().map(|c| -c).collect();
        map = map.compose(&translation(&minus));
    }
    Linearizer::from_polymap(map, p.to_vec(), w.clone())
}

/// Linearizer evaluated pointwise by [`bochner_numeric`].
pub fn numeric_linearizer(
    spec: &ActionSpec,
    w: &WeightData,
    quadrature: QuadratureConfig,
    integrator: IntegratorConfig,
) -> Result<Linearizer> {
    check_weights(w)?;
    quadrature.validate()?;
    integrator.validate()?;
    Ok(Linearizer {
        map: LinearizerMap::Numeric {
            spec: spec.clone(),
            quadrature,
            integrator,
        },
        fixed_point: spec.fixed_point().to_vec(),
        weights: w.clone(),
    })
}

/// `F(x)` by the trapezoid rule over `t ∈ [0, 1]`.
pub fn bochner_numeric(
    spec: &ActionSpec,
    x: &[Complex64],
    q: &QuadratureConfig,
    cfg: &IntegratorConfig,
) -> Result<Vec<Complex64>> {
    q.validate()?;
    if x.len() != spec.dimension() {
        return Err(Error::Input(format!(
            "point has {} coordinates, action has dimension {}",
            x.len(),
            spec.dimension()
        )));
    }
    let p = spec.fixed_point();
    if x == p {
        return Ok(vec![Complex64::new(0.0, 0.0); x.len()]);
    }
    let linear = action::linear_part(spec);
    let mut nodes = q.nodes;
    let mut value = trapezoid(spec, &linear, x, nodes, cfg)?;
    if !q.auto_refine {
        return Ok(value);
    }
    let flow_tol = match spec.kind() {
        ActionKind::ClosedForm(_) => 0.0,
        ActionKind::VectorField(_) => 100.0 * cfg.rel_tol,
    };
    while nodes * 2 <= q.max_nodes {
        nodes *= 2;
        let refined = trapezoid(spec, &linear, x, nodes, cfg)?;
        let tol = q.refine_tol.max(flow_tol * linalg::norm(&refined).max(1.0));
        let change = linalg::distance(&refined, &value);
        value = refined;
        if change <= tol {
            break;
        }
    }
    Ok(value)
}

fn trapezoid(
    spec: &ActionSpec,
    linear: &LinearPart,
    x: &[Complex64],
    nodes: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<Complex64>> {
    let p = spec.fixed_point();
    let intervals = nodes - 1;
    let h = 1.0 / intervals as f64;
    let mut acc = vec![Complex64::new(0.0, 0.0); x.len()];
    let mut state = x.to_vec();
    for j in 0..nodes {
        let t = j as f64 * h;
        let point = match spec.kind() {
            ActionKind::ClosedForm(a) => a.eval(group_element(Complex64::new(t, 0.0)), x)?,
            ActionKind::VectorField(field) => {
                if j > 0 {
                    state = flow::integrate_flow(
                        field,
                        &FlowQuery {
                            z: Complex64::new(h, 0.0),
                            x0: state,
                        },
                        cfg,
                    )?;
                }
                state.clone()
            }
        };
        let back = linalg::mat_vec(&linear.at(Complex64::new(-t, 0.0)), &linalg::sub(&point, p));
        let weight = if j == 0 || j == intervals { 0.5 * h } else { h };
        for (a, b) in acc.iter_mut().zip(back) {
            *a += b * weight;
        }
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridConfig {
    /// Polydisc radius of the sampling torus about the fixed point.
    pub radius: f64,
    /// Points per axis; `max_degree + 2` when unset.
    pub points_per_axis: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            radius: 0.4,
            points_per_axis: None,
        }
    }
}

/// Largest tolerated condition number of the scaled Vandermonde matrix.
pub const MAX_FIT_CONDITION: f64 = 1e10;
/// Fitted coefficients below this magnitude are set to zero.
pub const FIT_PRUNE_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub map: PolyMap,
    /// `max |V c − b|` over grid points and coordinates.
    pub fit_residual: f64,
    pub condition: f64,
    pub grid_points: usize,
}

/// Fits the polynomial coefficients of `F` up to total degree `max_degree`
/// from quadrature values on a tensor grid of circles around `p`.
///
/// Monomials are scaled by the grid radius, so on the torus they are
/// orthogonal as long as every axis has more points than `max_degree`.
pub fn reconstruct_polymap(
    spec: &ActionSpec,
    max_degree: u32,
    grid: &GridConfig,
    q: &QuadratureConfig,
    cfg: &IntegratorConfig,
) -> Result<Reconstruction> {
    let n = spec.dimension();
    let p = spec.fixed_point();
    let per_axis = grid.points_per_axis.unwrap_or(max_degree as usize + 2);
    if per_axis == 0 || !(grid.radius > 0.0) {
        return Err(Error::Input("grid needs a positive radius and at least one point per axis".into()));
    }
    let total = per_axis
        .checked_pow(n as u32)
        .filter(|&t| t <= 1_000_000)
        .ok_or_else(|| Error::Input("grid is too large".into()))?;
    let monomials = MultiIndex::up_to_degree(n, max_degree);
    let axis: Vec<Complex64> = (0..per_axis)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / per_axis as f64))
        .collect();

    let mut unit_points = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rest = flat;
        let mut pt = Vec::with_capacity(n);
        for _ in 0..n {
            pt.push(axis[rest % per_axis]);
            rest /= per_axis;
        }
        unit_points.push(pt);
    }

    let vander = DMatrix::from_fn(total, monomials.len(), |r, c| {
        monomials[c]
            .exponents()
            .iter()
            .zip(&unit_points[r])
            .map(|(&e, u)| u.powu(e))
            .product::<Complex64>()
    });
    let condition = if monomials.len() > total {
        f64::INFINITY
    } else {
        linalg::condition_number(&vander)
    };
    if !(condition <= MAX_FIT_CONDITION) {
        return Err(Error::DegreeTooHighForGrid { condition });
    }

    let mut values = DMatrix::<Complex64>::zeros(total, n);
    for (r, u) in unit_points.iter().enumerate() {
        let x: Vec<Complex64> = u.iter().zip(p).map(|(ui, pi)| pi + ui * grid.radius).collect();
        let fx = bochner_numeric(spec, &x, q, cfg)?;
        for i in 0..n {
            values[(r, i)] = fx[i];
        }
    }

    let svd = SVD::new(vander.clone(), true, true);
    let coeffs = svd
        .solve(&values, 1e-14)
        .map_err(|e| Error::Input(format!("least-squares solve failed: {e}")))?;
    let fit_residual = (&vander * &coeffs - &values)
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);

    let coords: Vec<Poly<Complex64>> = (0..n)
        .map(|i| {
            Poly::from_terms(
                n,
                monomials.iter().enumerate().map(|(c, alpha)| {
                    (alpha.clone(), coeffs[(c, i)] / grid.radius.powi(alpha.degree() as i32))
                }),
            )
        })
        .collect();
    let mut map = PolyMap::new(coords)?;
    if p.iter().any(|c| *c != Complex64::new(0.0, 0.0)) {
        let minus: Vec<Complex64> = p.iter().map(|c| -c).collect();
        map = map.compose(&translation(&minus));
    }
    let map = map.map_coords(|poly| poly.prune(FIT_PRUNE_THRESHOLD));
    Ok(Reconstruction {
        map,
        fit_residual,
        condition,
        grid_points: total,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjugacySample {
    pub z: Complex64Pair,
    pub x: Vec<Complex64Pair>,
}

/// `[re, im]`
pub type Complex64Pair = [f64; 2];

pub(crate) fn pair(c: Complex64) -> Complex64Pair {
    [c.re, c.im]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjugacyReport {
    pub max_residual: f64,
    pub mean_residual: f64,
    pub sample_count: usize,
    pub worst_sample: Option<ConjugacySample>,
}

/// Residuals `‖ψᶻ(F(x)) − F(φᶻ(x))‖` over paired samples `(z_k, x_k)`.
pub fn verify_conjugacy(
    f: &Linearizer,
    spec: &ActionSpec,
    z_samples: &[Complex64],
    x_samples: &[Vec<Complex64>],
    cfg: &IntegratorConfig,
) -> Result<ConjugacyReport> {
    if z_samples.len() != x_samples.len() {
        return Err(Error::Input(format!(
            "{} group samples but {} points",
            z_samples.len(),
            x_samples.len()
        )));
    }
    let w = f.weights();
    let mut max_residual: f64 = 0.0;
    let mut sum = 0.0;
    let mut worst = None;
    for (k, (&z, x)) in z_samples.iter().zip(x_samples).enumerate() {
        let identify = |e: Error| match e {
            Error::IntegrationFailure { reached, reason } => Error::IntegrationFailure {
                reached,
                reason: format!("sample {k} (z = {z}, x = {x:?}): {reason}"),
            },
            other => other,
        };
        let lhs = w.linear_action(z, &f.eval(x).map_err(identify)?);
        let moved = spec.flow(z, x, cfg).map_err(identify)?;
        let rhs = f.eval(&moved).map_err(identify)?;
        let r = linalg::distance(&lhs, &rhs);
        sum += r;
        if worst.is_none() || r > max_residual {
            max_residual = r;
            worst = Some(ConjugacySample {
                z: pair(z),
                x: x.iter().map(|&c| pair(c)).collect(),
            });
        }
    }
    let count = z_samples.len();
    Ok(ConjugacyReport {
        max_residual,
        mean_residual: if count > 0 { sum / count as f64 } else { 0.0 },
        sample_count: count,
        worst_sample: worst,
    })
}

/// Sample cloud for [`verify_conjugacy`]: points in the polydisc of radius
/// `x_radius` about the fixed point, `z` in `|Re z| ≤ re_max`, `|Im z| ≤ im_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConjugacySampling {
    pub samples: usize,
    pub x_radius: f64,
    pub re_max: f64,
    pub im_max: f64,
    pub seed: u64,
}

impl Default for ConjugacySampling {
    fn default() -> Self {
        ConjugacySampling {
            samples: 100,
            x_radius: 0.5,
            re_max: 1.0,
            im_max: 0.2,
            seed: crate::sampling::DEFAULT_SEED,
        }
    }
}

impl ConjugacySampling {
    pub fn draw(&self, center: &[Complex64]) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
        let mut sampler = Sampler::new(self.seed);
        (0..self.samples)
            .map(|_| {
                let z = sampler.rectangle(self.re_max, self.im_max);
                (z, sampler.polydisc(center, self.x_radius))
            })
            .unzip()
    }
}
