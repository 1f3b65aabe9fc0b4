use cstar_linac::action::{
    classify_weights, extract_weights, linear_part, ActionSpec, FixedPointClass, SignConvention,
};
use cstar_linac::catalog::{euler_cubic_field, translated};
use cstar_linac::cli::format::Document;
use cstar_linac::flow::{integrate_flow, FlowQuery, IntegratorConfig};
use cstar_linac::linalg::{self, CMatrix};
use cstar_linac::linearize::{bochner_numeric, bochner_symbolic, verify_conjugacy, ConjugacySampling, QuadratureConfig};
use cstar_linac::poly::{ActionPoly, LaurentPoly, MultiIndex, Poly, PolyMap};
use cstar_linac::sampling::Sampler;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `x ↦ x + coeff · x_from^power · e_to`
fn shear(n: usize, to: usize, from: usize, power: u32, coeff: Complex64) -> PolyMap {
    let mut coords: Vec<Poly<Complex64>> = (0..n).map(|i| Poly::var(n, i)).collect();
    coords[to] = coords[to].clone() + Poly::var(n, from).pow(power).scale(&coeff);
    PolyMap::new(coords).unwrap()
}

#[derive(Clone, Debug)]
struct ShearCase {
    weights: Vec<i64>,
    to: usize,
    from: usize,
    power: u32,
    coeff: Complex64,
}

impl ShearCase {
    fn n(&self) -> usize {
        self.weights.len()
    }

    fn forward(&self) -> PolyMap {
        shear(self.n(), self.to, self.from, self.power, self.coeff)
    }

    fn inverse(&self) -> PolyMap {
        shear(self.n(), self.to, self.from, self.power, -self.coeff)
    }

    /// `G⁻¹ ∘ diag(s^λ) ∘ G`
    fn action(&self) -> ActionPoly {
        ActionPoly::diagonal(&self.weights).conjugate(&self.inverse(), &self.forward())
    }
}

fn shear_case() -> impl Strategy<Value = ShearCase> {
    (2usize..=3)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(1i64..=3, n),
                0..n,
                1..n,
                2u32..=3,
                -1.0f64..1.0,
                -1.0f64..1.0,
            )
        })
        .prop_map(|(weights, to, offset, power, re, im)| {
            let n = weights.len();
            ShearCase {
                weights,
                to,
                from: (to + offset) % n,
                power,
                coeff: c(re, im),
            }
        })
}

fn random_poly(n: usize, seed: u64) -> Poly<Complex64> {
    let mut s = Sampler::new(seed);
    Poly::from_terms(
        n,
        MultiIndex::up_to_degree(n, 3).into_iter().filter_map(|alpha| {
            // eighths keep sums and differences exact
            let re = (s.uniform(-16.0, 16.0).round()) / 8.0;
            let im = (s.uniform(-16.0, 16.0).round()) / 8.0;
            (s.uniform(0.0, 1.0) < 0.5).then_some((alpha, c(re, im)))
        }),
    )
}

fn random_matrix(n: usize, seed: u64) -> CMatrix {
    let mut s = Sampler::new(seed);
    CMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { c(2.0, 0.0) } else { c(0.0, 0.0) };
        d + s.disc(1.0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sum_then_difference_is_exact(n in 1usize..=3, a in any::<u64>(), b in any::<u64>()) {
        let f = random_poly(n, a);
        let g = random_poly(n, b);
        prop_assert_eq!((f.clone() + g.clone()) - g, f);
    }

    #[test]
    fn laurent_products_stay_canonical(k in -16i32..=16) {
        let p = LaurentPoly::monomial(k, c(1.0, 0.0)) * LaurentPoly::monomial(-k, c(1.0, 0.0));
        prop_assert_eq!(p.circle_average(), c(1.0, 0.0));
        prop_assert_eq!(p.len(), 1);
    }

    #[test]
    fn identity_element_acts_trivially(case in shear_case(), seed in any::<u64>()) {
        let action = case.action();
        let n = case.n();
        prop_assert_eq!(action.at(c(1.0, 0.0)).unwrap(), PolyMap::identity(n));
        let mut s = Sampler::new(seed);
        for _ in 0..100 {
            let x = s.polydisc(&vec![c(0.0, 0.0); n], 1.0);
            prop_assert!(linalg::distance(&action.eval(c(1.0, 0.0), &x).unwrap(), &x) <= 1e-14);
        }
    }

    #[test]
    fn weights_survive_linear_conjugation(
        weights in prop::collection::vec(-3i64..=3, 2..=3),
        seed in any::<u64>(),
    ) {
        let n = weights.len();
        let g = random_matrix(n, seed);
        let g_inv = g.clone().try_inverse().unwrap();
        let action = ActionPoly::diagonal(&weights).conjugate(
            &PolyMap::linear(&linalg::to_rows(&g_inv)),
            &PolyMap::linear(&linalg::to_rows(&g)),
        );
        let spec = ActionSpec::closed_form(action, vec![c(0.0, 0.0); n]).unwrap();
        let mut got = extract_weights(&linear_part(&spec), 1e-6).unwrap().weights;
        let mut want = weights.clone();
        got.sort();
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn classification_symmetries(weights in prop::collection::vec(-3i64..=3, 1..=4), rotate in 0usize..4) {
        let class = classify_weights(&weights);
        let mut permuted = weights.clone();
        let len = permuted.len();
        permuted.rotate_left(rotate % len);
        prop_assert_eq!(classify_weights(&permuted), class);
        let flipped: Vec<i64> = weights.iter().map(|w| -w).collect();
        let expected = match class {
            FixedPointClass::Dicritical { sign: SignConvention::Positive } => {
                FixedPointClass::Dicritical { sign: SignConvention::Negative }
            }
            FixedPointClass::Dicritical { sign: SignConvention::Negative } => {
                FixedPointClass::Dicritical { sign: SignConvention::Positive }
            }
            other => other,
        };
        prop_assert_eq!(classify_weights(&flipped), expected);
    }

    #[test]
    fn backends_agree(case in shear_case(), seed in any::<u64>()) {
        let n = case.n();
        let action = case.action();
        let k = action.max_frequency() as usize;
        let spec = ActionSpec::closed_form(action, vec![c(0.0, 0.0); n]).unwrap();
        let w = extract_weights(&linear_part(&spec), 1e-6).unwrap();
        let f = bochner_symbolic(&spec, &w).unwrap();
        let q = QuadratureConfig::fixed(k + 1);
        let cfg = IntegratorConfig::default();
        let mut s = Sampler::new(seed);
        for _ in 0..100 {
            let x = s.polydisc(&vec![c(0.0, 0.0); n], 0.5);
            let numeric = bochner_numeric(&spec, &x, &q, &cfg).unwrap();
            prop_assert!(linalg::distance(&numeric, &f.eval(&x).unwrap()) <= 1e-12);
        }
    }

    #[test]
    fn averaging_a_linearized_action_is_trivial(case in shear_case()) {
        let n = case.n();
        let spec = ActionSpec::closed_form(case.action(), vec![c(0.0, 0.0); n]).unwrap();
        let w = extract_weights(&linear_part(&spec), 1e-6).unwrap();
        let f = bochner_symbolic(&spec, &w).unwrap();
        let map = f.polymap().unwrap().clone();
        // F is a single shear, so its inverse is 2x − F(x)
        let inverse = PolyMap::new(
            map.coords()
                .iter()
                .enumerate()
                .map(|(i, p)| Poly::var(n, i).scale(&c(2.0, 0.0)) - p.clone())
                .collect(),
        )
        .unwrap();
        prop_assert!(map.compose(&inverse).max_coefficient_distance(&PolyMap::identity(n)) <= 1e-14);
        let linearized = spec.centered_action().unwrap().conjugate(&map, &inverse);
        let again = ActionSpec::closed_form(linearized, vec![c(0.0, 0.0); n]).unwrap();
        let w2 = extract_weights(&linear_part(&again), 1e-6).unwrap();
        let g = bochner_symbolic(&again, &w2).unwrap();
        prop_assert!(g.polymap().unwrap().max_coefficient_distance(&PolyMap::identity(n)) <= 1e-10);
    }

    #[test]
    fn translated_actions_linearize(case in shear_case(), seed in any::<u64>()) {
        let n = case.n();
        let mut s = Sampler::new(seed);
        let p = s.polydisc(&vec![c(0.0, 0.0); n], 1.0);
        let spec = ActionSpec::closed_form(translated(&case.action(), &p), p.clone()).unwrap();
        let w = extract_weights(&linear_part(&spec), 1e-6).unwrap();
        let mut want = case.weights.clone();
        let mut got = w.weights.clone();
        want.sort();
        got.sort();
        prop_assert_eq!(got, want);
        let f = bochner_symbolic(&spec, &w).unwrap();
        let norm = f.normalization().unwrap();
        prop_assert!(norm.value_at_fixed_point <= 1e-13, "{:?}", norm);
        prop_assert!(norm.jacobian_defect <= 1e-11, "{:?}", norm);
        let sampling = ConjugacySampling { samples: 30, seed, ..Default::default() };
        let (zs, xs) = sampling.draw(&p);
        let report = verify_conjugacy(&f, &spec, &zs, &xs, &IntegratorConfig::default()).unwrap();
        prop_assert!(report.max_residual <= 1e-9, "{:?}", report);
    }

    #[test]
    fn documents_round_trip(case in shear_case(), seed in any::<u64>()) {
        let n = case.n();
        let p = Sampler::new(seed).polydisc(&vec![c(0.0, 0.0); n], 3.0);
        for spec in [
            ActionSpec::closed_form(case.action(), p.clone()).unwrap(),
            ActionSpec::vector_field(case.forward(), p.clone()).unwrap(),
        ] {
            let doc = Document::from_spec(&spec);
            let parsed = Document::parse(&doc.to_json()).unwrap();
            prop_assert_eq!(&parsed, &doc);
            prop_assert_eq!(parsed.to_spec().unwrap(), spec);
        }
    }

    #[test]
    fn flow_composes(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let field = euler_cubic_field();
        let cfg = IntegratorConfig::default();
        let x = s.polydisc(&[c(0.0, 0.0), c(0.0, 0.0)], 0.5);
        let (z1, z2) = (s.disc(0.5), s.disc(0.5));
        let direct = integrate_flow(&field, &FlowQuery { z: z1 + z2, x0: x.clone() }, &cfg).unwrap();
        let first = integrate_flow(&field, &FlowQuery { z: z1, x0: x }, &cfg).unwrap();
        let composed = integrate_flow(&field, &FlowQuery { z: z2, x0: first }, &cfg).unwrap();
        let bound = 10.0 * (cfg.abs_tol + cfg.rel_tol * linalg::norm(&direct));
        prop_assert!(linalg::distance(&direct, &composed) <= bound);
    }
}

fn fixtures() -> Vec<std::path::PathBuf> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json") && !p.ends_with("e1_points.json"))
        .collect();
    files.sort();
    files
}

#[test]
fn shipped_documents_round_trip() {
    let files = fixtures();
    assert!(files.len() >= 7);
    for file in files {
        let doc = Document::read(&file).unwrap();
        let again = Document::parse(&doc.to_json()).unwrap();
        assert_eq!(again, doc, "{}", file.display());
        assert_eq!(Document::from_spec(&again.to_spec().unwrap()), doc, "{}", file.display());
    }
}

#[test]
fn shipped_linearizable_actions_conjugate() {
    use cstar_linac::linearize::{reconstruct_polymap, GridConfig, Linearizer};
    let cfg = IntegratorConfig::default();
    let mut checked = 0;
    for file in fixtures() {
        let spec = Document::read(&file).unwrap().to_spec().unwrap();
        let Ok(w) = extract_weights(&linear_part(&spec), 1e-6) else { continue };
        let valid = cstar_linac::action::validate_action(&spec, &Default::default()).unwrap().passed;
        if !valid {
            continue;
        }
        let f = match spec.centered_action() {
            Some(_) => bochner_symbolic(&spec, &w).unwrap(),
            None => {
                let r = reconstruct_polymap(&spec, 3, &GridConfig::default(), &QuadratureConfig::default(), &cfg).unwrap();
                Linearizer::from_polymap(r.map, spec.fixed_point().to_vec(), w).unwrap()
            }
        };
        let (zs, xs) = ConjugacySampling::default().draw(spec.fixed_point());
        let report = verify_conjugacy(&f, &spec, &zs, &xs, &cfg).unwrap();
        assert!(report.max_residual <= 1e-9, "{}: {report:?}", file.display());
        checked += 1;
    }
    assert_eq!(checked, 5);
}
