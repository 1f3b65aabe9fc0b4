//! Injectivity domains for a linearizer and its extension along orbits.
//!
//! For a dicritical fixed point every orbit accumulates at `p`, so any `y`
//! can be pushed into the domain `U` by a contraction `φᶻ`, linearized there,
//! and pulled back by the linear action:
//!
//! ```text
//! T(y) = ψ^{−z} F(φᶻ(y))
//! ```
//!
//! Domains are polydiscs about `p` in the coordinates that diagonalize `ψ`.

use num_complex::Complex64;
use serde::Serialize;

use crate::action::{classify_fixed_point, ActionSpec, FixedPointClass, SignConvention};
use crate::error::{Error, Result};
use crate::flow::IntegratorConfig;
use crate::linalg;
use crate::linearize::{pair, Complex64Pair, Linearizer};
use crate::sampling::{Sampler, DEFAULT_SEED};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InjectivitySearch {
    pub max_radius: f64,
    pub min_radius: f64,
    pub boundary_samples: usize,
    pub pairs: usize,
    /// Smallest acceptable singular value of `DF` on the boundary.
    pub min_singular_value: f64,
    /// Inputs at least this far apart...
    pub separation: f64,
    /// ...must map at least this far apart.
    pub collision: f64,
    pub bisection_steps: u32,
    /// Tolerances for `F(p) = 0` and `DF(p) = Id`.
    pub normalization_tol: f64,
    pub seed: u64,
}

impl Default for InjectivitySearch {
    fn default() -> Self {
        InjectivitySearch {
            max_radius: 1.0,
            min_radius: 1e-4,
            boundary_samples: 200,
            pairs: 1000,
            min_singular_value: 1e-6,
            separation: 1e-6,
            collision: 1e-9,
            bisection_steps: 12,
            normalization_tol: 1e-8,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InjectivityEvidence {
    pub boundary_samples: usize,
    pub pairs: usize,
    pub min_singular_value: f64,
    /// Smallest `‖F(a) − F(b)‖ / ‖a − b‖` over the tested pairs.
    pub min_pair_ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InjectivityDomain {
    pub radius: f64,
    pub evidence: InjectivityEvidence,
}

impl InjectivityDomain {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Input(format!("domain radius must be positive, got {radius}")));
        }
        Ok(InjectivityDomain {
            radius,
            evidence: InjectivityEvidence {
                boundary_samples: 0,
                pairs: 0,
                min_singular_value: f64::NAN,
                min_pair_ratio: f64::NAN,
            },
        })
    }

    /// Membership of `x` in the polydisc, measured in the frame of `f`.
    pub fn contains(&self, f: &Linearizer, x: &[Complex64]) -> bool {
        let u = f.weights().to_frame(&linalg::sub(x, f.fixed_point()));
        u.iter().all(|c| c.norm() <= self.radius)
    }
}

fn probe(f: &Linearizer, radius: f64, search: &InjectivitySearch) -> Result<Option<InjectivityEvidence>> {
    let n = f.dimension();
    let p = f.fixed_point();
    let w = f.weights();
    let to_x = |u: &[Complex64]| linalg::add(p, &w.from_frame(u));
    let mut sampler = Sampler::new(search.seed);

    let mut min_sv = f64::INFINITY;
    for _ in 0..search.boundary_samples {
        let x = to_x(&sampler.polydisc_boundary(n, radius));
        let sv = linalg::min_singular_value(&f.jacobian(&x)?);
        min_sv = min_sv.min(sv);
        if !(sv >= search.min_singular_value) {
            return Ok(None);
        }
    }

    let origin = vec![Complex64::new(0.0, 0.0); n];
    let mut min_ratio = f64::INFINITY;
    for _ in 0..search.pairs {
        let a = to_x(&sampler.polydisc(&origin, radius));
        let b = to_x(&sampler.polydisc(&origin, radius));
        let apart = linalg::distance(&a, &b);
        if apart < search.separation {
            continue;
        }
        let image = linalg::distance(&f.eval(&a)?, &f.eval(&b)?);
        min_ratio = min_ratio.min(image / apart);
        if !(image >= search.collision) {
            return Ok(None);
        }
    }
    Ok(Some(InjectivityEvidence {
        boundary_samples: search.boundary_samples,
        pairs: search.pairs,
        min_singular_value: min_sv,
        min_pair_ratio: min_ratio,
    }))
}

/// Largest polydisc radius (up to `max_radius`) on which `F` passes the
/// sampled nonsingularity and collision tests.
pub fn injectivity_radius(f: &Linearizer, search: &InjectivitySearch) -> Result<InjectivityDomain> {
    let norm = f.normalization()?;
    if !(norm.value_at_fixed_point <= search.normalization_tol && norm.jacobian_defect <= search.normalization_tol) {
        return Err(Error::DegenerateLinearizer(format!(
            "F is not normalized at the fixed point: |F(p)| = {:e}, max |DF(p) - Id| = {:e}",
            norm.value_at_fixed_point, norm.jacobian_defect
        )));
    }

    let mut rejected = None;
    let mut r = search.max_radius;
    let mut accepted = loop {
        if r < search.min_radius {
            return Err(Error::DegenerateLinearizer(format!(
                "no radius down to {:e} passes the injectivity tests",
                search.min_radius
            )));
        }
        if let Some(evidence) = probe(f, r, search)? {
            break InjectivityDomain { radius: r, evidence };
        }
        rejected = Some(r);
        r /= 2.0;
    };

    if let Some(mut hi) = rejected {
        for _ in 0..search.bisection_steps {
            let mid = 0.5 * (accepted.radius + hi);
            match probe(f, mid, search)? {
                Some(evidence) => accepted = InjectivityDomain { radius: mid, evidence },
                None => hi = mid,
            }
        }
    }
    Ok(accepted)
}

/// Doublings of the contraction depth tried before giving up.
pub const DEFAULT_BUDGET: u32 = 24;
/// Contraction depth of the first attempt.
pub const INITIAL_DEPTH: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaturationResult {
    pub value: Vec<Complex64Pair>,
    /// Group parameter `z` with `φᶻ(y)` inside the domain.
    pub witness_z: Complex64Pair,
    /// Disagreement with the pull-back from a deeper contraction.
    pub residual: f64,
}

impl SaturationResult {
    pub fn value(&self) -> Vec<Complex64> {
        self.value.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
    }

    pub fn witness(&self) -> Complex64 {
        Complex64::new(self.witness_z[0], self.witness_z[1])
    }
}

/// Unit step of the group parameter that contracts towards `p`.
fn contraction_direction(f: &Linearizer) -> Result<Complex64> {
    match classify_fixed_point(f.weights()) {
        FixedPointClass::Dicritical {
            sign: SignConvention::Positive,
        } => Ok(Complex64::new(0.0, 1.0)),
        FixedPointClass::Dicritical {
            sign: SignConvention::Negative,
        } => Ok(Complex64::new(0.0, -1.0)),
        other => Err(Error::NotDicritical(other)),
    }
}

fn pull_back(f: &Linearizer, z: Complex64, moved: &[Complex64]) -> Result<Vec<Complex64>> {
    Ok(f.weights().linear_action(-z, &f.eval(moved)?))
}

/// Depth index `k ≥ start` of the first contraction `0.05·2ᵏ` that lands in the domain.
#[allow(clippy::too_many_arguments)]
fn first_entry(
    spec: &ActionSpec,
    f: &Linearizer,
    dom: &InjectivityDomain,
    y: &[Complex64],
    direction: Complex64,
    start: u32,
    budget: u32,
    cfg: &IntegratorConfig,
) -> Result<Option<(Complex64, Vec<Complex64>)>> {
    for k in start..=budget {
        let z = direction * (INITIAL_DEPTH * 2f64.powi(k as i32));
        let moved = match spec.flow(z, y, cfg) {
            Ok(m) => m,
            Err(Error::IntegrationFailure { .. }) => continue,
            Err(e) => return Err(e),
        };
        if dom.contains(f, &moved) {
            return Ok(Some((z, moved)));
        }
    }
    Ok(None)
}

/// `T(y) = ψ^{−z} F(φᶻ(y))` for the first scheduled contraction that enters `dom`.
pub fn saturate_extend(
    spec: &ActionSpec,
    f: &Linearizer,
    dom: &InjectivityDomain,
    y: &[Complex64],
    budget: u32,
    cfg: &IntegratorConfig,
) -> Result<SaturationResult> {
    if y.len() != spec.dimension() || f.dimension() != spec.dimension() {
        return Err(Error::Input("point, action and linearizer dimensions differ".into()));
    }
    let direction = contraction_direction(f)?;
    let zero = Complex64::new(0.0, 0.0);

    let (z, value, next) = if dom.contains(f, y) {
        (zero, f.eval(y)?, 0)
    } else {
        let Some((z, moved)) = first_entry(spec, f, dom, y, direction, 0, budget, cfg)? else {
            return Err(Error::OrbitNeverEntersDomain { budget });
        };
        let k = (z.im.abs() / INITIAL_DEPTH).log2().round() as u32;
        (z, pull_back(f, z, &moved)?, k + 1)
    };

    let residual = match first_entry(spec, f, dom, y, direction, next, budget + 1, cfg)? {
        Some((z2, moved)) => linalg::distance(&value, &pull_back(f, z2, &moved)?),
        None => return Err(Error::OrbitNeverEntersDomain { budget: budget + 1 }),
    };
    Ok(SaturationResult {
        value: value.into_iter().map(pair).collect(),
        witness_z: pair(z),
        residual,
    })
}

/// `‖ψ^{−z₁}F(φ^{z₁}(y)) − ψ^{−z₂}F(φ^{z₂}(y))‖`; both images must lie in `dom`.
pub fn welldefined_check(
    spec: &ActionSpec,
    f: &Linearizer,
    dom: &InjectivityDomain,
    y: &[Complex64],
    z1: Complex64,
    z2: Complex64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let mut pulled = Vec::with_capacity(2);
    for z in [z1, z2] {
        let moved = spec.flow(z, y, cfg)?;
        if !dom.contains(f, &moved) {
            return Err(Error::Input(format!("φ^z(y) leaves the domain for z = {z}")));
        }
        pulled.push(pull_back(f, z, &moved)?);
    }
    Ok(linalg::distance(&pulled[0], &pulled[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{extract_weights, linear_part};
    use crate::catalog::*;
    use crate::linearize::bochner_symbolic;
    use crate::poly::{ActionPoly, Poly, PolyMap};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn origin(n: usize) -> Vec<Complex64> {
        vec![c(0.0, 0.0); n]
    }

    fn e1() -> (ActionSpec, Linearizer) {
        let spec = ActionSpec::closed_form(e1_action(), origin(2)).unwrap();
        let w = extract_weights(&linear_part(&spec), 1e-6).unwrap();
        let f = bochner_symbolic(&spec, &w).unwrap();
        (spec, f)
    }

    #[test]
    fn identity_has_full_radius() {
        let (_, f) = e1();
        let id = Linearizer::from_polymap(PolyMap::identity(2), origin(2), f.weights().clone()).unwrap();
        assert_eq!(injectivity_radius(&id, &InjectivitySearch::default()).unwrap().radius, 1.0);
    }

    #[test]
    fn shear_is_injective() {
        let (_, f) = e1();
        let dom = injectivity_radius(&f, &InjectivitySearch::default()).unwrap();
        assert!(dom.radius >= 0.4);
        assert!(dom.evidence.min_singular_value > 1e-6);
    }

    #[test]
    fn folding_map_is_degenerate() {
        let (_, f) = e1();
        let fold = PolyMap::new(vec![Poly::var(2, 0).pow(2), Poly::var(2, 1)]).unwrap();
        let bad = Linearizer::from_polymap(fold, origin(2), f.weights().clone()).unwrap();
        assert!(matches!(
            injectivity_radius(&bad, &InjectivitySearch::default()),
            Err(Error::DegenerateLinearizer(_))
        ));
    }

    #[test]
    fn extension_outside_the_domain() {
        let (spec, f) = e1();
        let dom = InjectivityDomain::new(0.4).unwrap();
        let cfg = IntegratorConfig::default();
        let t = saturate_extend(&spec, &f, &dom, &[c(2.0, 0.0), c(3.0, 0.0)], DEFAULT_BUDGET, &cfg).unwrap();
        assert!(linalg::distance(&t.value(), &[c(2.0, 0.0), c(11.0, 0.0)]) <= 1e-9);
        assert!(t.residual <= 1e-9);
        assert!(t.witness().im > 0.0);

        let inside = [c(0.1, 0.0), c(-0.2, 0.1)];
        let t = saturate_extend(&spec, &f, &dom, &inside, DEFAULT_BUDGET, &cfg).unwrap();
        assert_eq!(t.value(), f.eval(&inside).unwrap());
        assert_eq!(t.witness(), c(0.0, 0.0));
    }

    #[test]
    fn negative_weights_contract_the_other_way() {
        // E1 reparametrized by s ↦ s⁻¹
        let spec = ActionSpec::closed_form(
            ActionPoly::new(vec![
                e1_action().coords()[0].map_coeffs(|_, l| reflect(l)),
                e1_action().coords()[1].map_coeffs(|_, l| reflect(l)),
            ])
            .unwrap(),
            origin(2),
        )
        .unwrap();
        let w = extract_weights(&linear_part(&spec), 1e-6).unwrap();
        assert_eq!(w.weights, vec![-1, -2]);
        let f = bochner_symbolic(&spec, &w).unwrap();
        let dom = InjectivityDomain::new(0.4).unwrap();
        let t = saturate_extend(&spec, &f, &dom, &[c(2.0, 0.0), c(3.0, 0.0)], DEFAULT_BUDGET, &IntegratorConfig::default())
            .unwrap();
        assert!(t.witness().im < 0.0);
        assert!(linalg::distance(&t.value(), &[c(2.0, 0.0), c(11.0, 0.0)]) <= 1e-9);
    }

    fn reflect(l: &crate::poly::LaurentPoly) -> crate::poly::LaurentPoly {
        crate::poly::LaurentPoly::from_terms(l.terms().map(|(k, v)| (-k, v)))
    }

    #[test]
    fn mixed_signs_are_rejected() {
        let spec = ActionSpec::closed_form(ActionPoly::diagonal(&[1, -1]), origin(2)).unwrap();
        let w = extract_weights(&linear_part(&spec), 1e-6).unwrap();
        let f = bochner_symbolic(&spec, &w).unwrap();
        let dom = InjectivityDomain::new(0.4).unwrap();
        let err = saturate_extend(&spec, &f, &dom, &[c(1.0, 0.0), c(1.0, 0.0)], DEFAULT_BUDGET, &IntegratorConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::NotDicritical(FixedPointClass::MixedSigns)));
    }

    #[test]
    fn well_definedness() {
        let (spec, f) = e1();
        let dom = InjectivityDomain::new(0.4).unwrap();
        let cfg = IntegratorConfig::default();
        let y = [c(2.0, 0.0), c(3.0, 0.0)];
        let (z1, z2) = (c(0.0, 0.4), c(0.0, 0.8));
        assert!(welldefined_check(&spec, &f, &dom, &y, z1, z2, &cfg).unwrap() <= 1e-9);
        assert_eq!(welldefined_check(&spec, &f, &dom, &y, z1, z1, &cfg).unwrap(), 0.0);
        assert!(matches!(
            welldefined_check(&spec, &f, &dom, &y, c(0.0, 0.0), z1, &cfg),
            Err(Error::Input(_))
        ));

        let id = Linearizer::from_polymap(PolyMap::identity(2), origin(2), f.weights().clone()).unwrap();
        assert!(welldefined_check(&spec, &id, &dom, &y, z1, z2, &cfg).unwrap() >= 1e-2);
    }

    #[test]
    fn extension_is_equivariant() {
        let (spec, f) = e1();
        let dom = injectivity_radius(&f, &InjectivitySearch::default()).unwrap();
        let cfg = IntegratorConfig::default();
        let mut sampler = Sampler::new(7);
        for _ in 0..20 {
            let y = sampler.polydisc(&origin(2), 2.0);
            let z = sampler.disc(1.0);
            let lhs = f.weights().linear_action(z, &saturate_extend(&spec, &f, &dom, &y, DEFAULT_BUDGET, &cfg).unwrap().value());
            let moved = spec.flow(z, &y, &cfg).unwrap();
            let rhs = saturate_extend(&spec, &f, &dom, &moved, DEFAULT_BUDGET, &cfg).unwrap().value();
            assert!(linalg::distance(&lhs, &rhs) <= 1e-8 * linalg::norm(&rhs).max(1.0));
        }
    }

    #[test]
    fn larger_budget_changes_nothing() {
        let (spec, f) = e1();
        let dom = InjectivityDomain::new(0.4).unwrap();
        let cfg = IntegratorConfig::default();
        let y = [c(1.5, -0.5), c(-1.0, 1.2)];
        let a = saturate_extend(&spec, &f, &dom, &y, 8, &cfg).unwrap();
        let b = saturate_extend(&spec, &f, &dom, &y, 40, &cfg).unwrap();
        assert!(linalg::distance(&a.value(), &b.value()) <= 1e-10);
    }
}
