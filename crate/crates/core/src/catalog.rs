//! Reference actions and vector fields with known linearizers.

use num_complex::Complex64;

use crate::linalg::TWO_PI_I;
use crate::poly::{ActionPoly, LaurentPoly, MultiIndex, Poly, PolyMap};

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn laurent(terms: &[(i32, f64)]) -> LaurentPoly {
    LaurentPoly::from_terms(terms.iter().map(|&(k, c)| (k, re(c))))
}

fn term(alpha: &[u32], c: LaurentPoly) -> (MultiIndex, LaurentPoly) {
    (MultiIndex::new(alpha.to_vec()), c)
}

/// `(s x, s² y + (s² − s³) x³)`, linearized by `(x, y + x³)`.
pub fn e1_action() -> ActionPoly {
    ActionPoly::new(vec![
        Poly::from_terms(2, [term(&[1, 0], laurent(&[(1, 1.0)]))]),
        Poly::from_terms(
            2,
            [
                term(&[0, 1], laurent(&[(2, 1.0)])),
                term(&[3, 0], laurent(&[(2, 1.0), (3, -1.0)])),
            ],
        ),
    ])
    .expect("dimensions agree")
}

/// `(s x, s² y + (s³ − s²) x³)`: the time-`z` flow of [`euler_cubic_field`],
/// linearized by `(x, y − x³)`.
pub fn euler_cubic_action() -> ActionPoly {
    ActionPoly::new(vec![
        Poly::from_terms(2, [term(&[1, 0], laurent(&[(1, 1.0)]))]),
        Poly::from_terms(
            2,
            [
                term(&[0, 1], laurent(&[(2, 1.0)])),
                term(&[3, 0], laurent(&[(2, -1.0), (3, 1.0)])),
            ],
        ),
    ])
    .expect("dimensions agree")
}

/// `2π√−1 · (x, 2y + x³)`
pub fn euler_cubic_field() -> PolyMap {
    let x = Poly::var(2, 0);
    let y = Poly::var(2, 1);
    PolyMap::new(vec![
        x.scale(&TWO_PI_I),
        (y.scale(&re(2.0)) + x.pow(3)).scale(&TWO_PI_I),
    ])
    .expect("dimensions agree")
}

/// `2π√−1 · diag(weights) · x`
pub fn linear_field(weights: &[i64]) -> PolyMap {
    let n = weights.len();
    PolyMap::new(
        weights
            .iter()
            .enumerate()
            .map(|(j, &w)| Poly::var(n, j).scale(&(TWO_PI_I * w as f64)))
            .collect(),
    )
    .expect("dimensions agree")
}

/// `2π√−1 · [[1, 1], [0, 1]] · x`: a Jordan block, not a ℂ*-generator.
pub fn jordan_field() -> PolyMap {
    let x = Poly::var(2, 0);
    let y = Poly::var(2, 1);
    PolyMap::new(vec![(x + y.clone()).scale(&TWO_PI_I), y.scale(&TWO_PI_I)]).expect("dimensions agree")
}

/// `(s x, s² y + x³)`: not an action; at `s = 1` it is `(x, y + x³)` and the
/// group law fails.
pub fn broken_group_law_action() -> ActionPoly {
    ActionPoly::new(vec![
        Poly::from_terms(2, [term(&[1, 0], laurent(&[(1, 1.0)]))]),
        Poly::from_terms(
            2,
            [
                term(&[0, 1], laurent(&[(2, 1.0)])),
                term(&[3, 0], laurent(&[(0, 1.0)])),
            ],
        ),
    ])
    .expect("dimensions agree")
}

/// `(s x, s² y + (s − 1) x³)`: the identity at `s = 1`, but not a group law.
pub fn identity_only_action() -> ActionPoly {
    ActionPoly::new(vec![
        Poly::from_terms(2, [term(&[1, 0], laurent(&[(1, 1.0)]))]),
        Poly::from_terms(
            2,
            [
                term(&[0, 1], laurent(&[(2, 1.0)])),
                term(&[3, 0], laurent(&[(0, -1.0), (1, 1.0)])),
            ],
        ),
    ])
    .expect("dimensions agree")
}

/// `(x, y + x³)`
pub fn e1_linearizer() -> PolyMap {
    let x = Poly::var(2, 0);
    let y = Poly::var(2, 1);
    PolyMap::new(vec![x.clone(), y + x.pow(3)]).expect("dimensions agree")
}

/// `(x, y − x³)`
pub fn euler_cubic_linearizer() -> PolyMap {
    let x = Poly::var(2, 0);
    let y = Poly::var(2, 1);
    PolyMap::new(vec![x.clone(), y - x.pow(3)]).expect("dimensions agree")
}

/// `x ↦ x + shift`
pub fn translation(shift: &[Complex64]) -> PolyMap {
    let n = shift.len();
    PolyMap::new(
        shift
            .iter()
            .enumerate()
            .map(|(i, &c)| Poly::var(n, i) + Poly::constant(n, c))
            .collect(),
    )
    .expect("dimensions agree")
}

/// Moves an action fixing the origin so that it fixes `p` instead:
/// `Φ'(s, x) = Φ(s, x − p) + p`.
pub fn translated(action: &ActionPoly, p: &[Complex64]) -> ActionPoly {
    let minus: Vec<Complex64> = p.iter().map(|c| -c).collect();
    action.conjugate(&translation(p), &translation(&minus))
}
