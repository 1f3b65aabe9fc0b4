//! Sparse polynomial arithmetic over ℂ and over Laurent polynomials in the
//! group parameter.

mod index;
mod laurent;
mod polynomial;

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use index::MultiIndex;
pub use laurent::LaurentPoly;
pub use polynomial::Poly;
pub(crate) use polynomial::power_table;

/// Coefficient ring for [`Poly`].
pub trait Ring:
    Clone + Debug + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
}

impl Ring for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

impl From<f64> for LaurentPoly {
    fn from(v: f64) -> Self {
        LaurentPoly::constant(Complex64::new(v, 0.0))
    }
}

/// A polynomial map `ℂⁿ → ℂⁿ`: vector fields, linearizers, automorphisms.
#[derive(Clone, PartialEq, Debug)]
pub struct PolyMap {
    coords: Vec<Poly<Complex64>>,
}

impl PolyMap {
    pub fn new(coords: Vec<Poly<Complex64>>) -> Result<Self> {
        let n = coords.len();
        if let Some(bad) = coords.iter().position(|p| p.nvars() != n) {
            return Err(Error::Input(format!(
                "coordinate {bad} uses {} variables, expected {n}",
                coords[bad].nvars()
            )));
        }
        Ok(PolyMap { coords })
    }

    pub fn identity(n: usize) -> Self {
        PolyMap {
            coords: (0..n).map(|i| Poly::var(n, i)).collect(),
        }
    }

    pub fn zero(n: usize) -> Self {
        PolyMap {
            coords: (0..n).map(|_| Poly::zero(n)).collect(),
        }
    }

    /// The linear map `x ↦ M x`, with `M` given row-major.
    pub fn linear(rows: &[Vec<Complex64>]) -> Self {
        let n = rows.len();
        let coords = rows
            .iter()
            .map(|row| {
                Poly::from_terms(n, row.iter().enumerate().map(|(j, &c)| (MultiIndex::unit(n, j), c)))
            })
            .collect();
        PolyMap { coords }
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Poly<Complex64>] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &Poly<Complex64> {
        &self.coords[i]
    }

    pub fn degree(&self) -> u32 {
        self.coords.iter().map(Poly::degree).max().unwrap_or(0)
    }

    /// Evaluates every coordinate polynomial at `x`.
    pub fn eval(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dimension() {
            return Err(Error::Input(format!(
                "point has {} coordinates, map has dimension {}",
                x.len(),
                self.dimension()
            )));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[Complex64]) -> Vec<Complex64> {
        let max_exp: Vec<u32> = (0..self.dimension())
            .map(|i| self.coords.iter().map(|p| p.max_exponents()[i]).max().unwrap_or(0))
            .collect();
        let table = power_table(x, &max_exp);
        self.coords.iter().map(|p| p.eval_with_table(&table)).collect()
    }

    /// Exact Jacobian as a matrix of polynomials, `jac[i][j] = ∂f_i/∂x_j`.
    pub fn jacobian(&self) -> Vec<Vec<Poly<Complex64>>> {
        self.coords
            .iter()
            .map(|p| (0..self.dimension()).map(|j| p.derivative(j)).collect())
            .collect()
    }

    /// `self ∘ inner`
    pub fn compose(&self, inner: &PolyMap) -> PolyMap {
        PolyMap {
            coords: self.coords.iter().map(|p| p.compose(&inner.coords)).collect(),
        }
    }

    pub fn map_coords<F: FnMut(&Poly<Complex64>) -> Poly<Complex64>>(&self, f: F) -> PolyMap {
        PolyMap {
            coords: self.coords.iter().map(f).collect(),
        }
    }

    pub fn max_coefficient_distance(&self, other: &PolyMap) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a.clone() - b.clone()).max_abs_coefficient())
            .fold(0.0, f64::max)
    }
}

/// A polynomial action `Φ(s, x)`: coordinates are polynomials in `x` whose
/// coefficients are Laurent polynomials in `s`.
#[derive(Clone, PartialEq, Debug)]
pub struct ActionPoly {
    coords: Vec<Poly<LaurentPoly>>,
}

impl ActionPoly {
    pub fn new(coords: Vec<Poly<LaurentPoly>>) -> Result<Self> {
        let n = coords.len();
        if let Some(bad) = coords.iter().position(|p| p.nvars() != n) {
            return Err(Error::Input(format!(
                "coordinate {bad} uses {} variables, expected {n}",
                coords[bad].nvars()
            )));
        }
        Ok(ActionPoly { coords })
    }

    /// The diagonal linear action `x_j ↦ s^{λ_j} x_j`.
    pub fn diagonal(weights: &[i64]) -> Self {
        let n = weights.len();
        let coords = weights
            .iter()
            .enumerate()
            .map(|(j, &w)| {
                Poly::monomial(
                    MultiIndex::unit(n, j),
                    LaurentPoly::monomial(w as i32, Complex64::new(1.0, 0.0)),
                )
            })
            .collect();
        ActionPoly { coords }
    }

    /// Lifts a constant map into an action that does not depend on `s`.
    pub fn from_polymap(map: &PolyMap) -> Self {
        ActionPoly {
            coords: map
                .coords()
                .iter()
                .map(|p| p.map_coeffs(|_, &c| LaurentPoly::constant(c)))
                .collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Poly<LaurentPoly>] {
        &self.coords
    }

    /// Largest `|k|` over every Laurent coefficient.
    pub fn max_frequency(&self) -> u32 {
        self.coords
            .iter()
            .flat_map(|p| p.terms().map(|(_, c)| c.max_frequency()))
            .max()
            .unwrap_or(0)
    }

    /// The map `φˢ` obtained by fixing `s`.
    pub fn at(&self, s: Complex64) -> Result<PolyMap> {
        if s == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("the group parameter s must be nonzero".into()));
        }
        Ok(PolyMap {
            coords: self.coords.iter().map(|p| p.map_coeffs(|_, c| c.eval(s))).collect(),
        })
    }

    /// `Φ(s, x)`
    pub fn eval(&self, s: Complex64, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dimension() {
            return Err(Error::Input(format!(
                "point has {} coordinates, action has dimension {}",
                x.len(),
                self.dimension()
            )));
        }
        Ok(self.at(s)?.eval_unchecked(x))
    }

    /// `outer ∘ Φˢ ∘ inner` for `s`-independent polynomial maps.
    pub fn conjugate(&self, outer: &PolyMap, inner: &PolyMap) -> ActionPoly {
        let inner = ActionPoly::from_polymap(inner);
        let middle: Vec<Poly<LaurentPoly>> =
            self.coords.iter().map(|p| p.compose(&inner.coords)).collect();
        let outer = ActionPoly::from_polymap(outer);
        ActionPoly {
            coords: outer.coords.iter().map(|p| p.compose(&middle)).collect(),
        }
    }
}

/// Evaluates `Φ(s, x)`; `s = 0` is outside ℂ* and is rejected.
pub fn action_eval(action: &ActionPoly, s: Complex64, x: &[Complex64]) -> Result<Vec<Complex64>> {
    action.eval(s, x)
}

/// Evaluates a polynomial map at `x`.
pub fn poly_eval(f: &PolyMap, x: &[Complex64]) -> Result<Vec<Complex64>> {
    f.eval(x)
}

/// The coefficient of `s⁰`, i.e. the average over the unit circle.
pub fn laurent_circle_average(c: &LaurentPoly) -> Complex64 {
    c.circle_average()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::e1_action;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_map_eval() {
        let x = [c(0.3), Complex64::new(0.0, -0.7)];
        assert_eq!(poly_eval(&PolyMap::identity(2), &x).unwrap(), x.to_vec());
    }

    #[test]
    fn shear_maps_eval() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let plus = PolyMap::new(vec![x.clone(), y.clone() + x.pow(3)]).unwrap();
        assert_eq!(plus.eval(&[c(1.0), c(0.0)]).unwrap(), vec![c(1.0), c(1.0)]);
        let minus = PolyMap::new(vec![x.clone(), y - x.pow(3)]).unwrap();
        assert_eq!(minus.eval(&[c(2.0), c(1.0)]).unwrap(), vec![c(2.0), c(-7.0)]);
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let err = PolyMap::identity(2).eval(&[c(1.0)]).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn action_eval_e1() {
        let e1 = e1_action();
        let x = [c(0.25), Complex64::new(0.1, -0.3)];
        assert_eq!(action_eval(&e1, c(1.0), &x).unwrap(), x.to_vec());
        assert_eq!(action_eval(&e1, c(2.0), &[c(1.0), c(0.0)]).unwrap(), vec![c(2.0), c(-4.0)]);
        let err = action_eval(&e1, c(0.0), &x).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn diagonal_action_eval() {
        let d = ActionPoly::diagonal(&[1, -1]);
        assert_eq!(d.eval(c(2.0), &[c(1.0), c(1.0)]).unwrap(), vec![c(2.0), c(0.5)]);
    }

    #[test]
    fn e1_group_law_is_symbolically_exact() {
        // Φ(s, Φ(s', x)) − Φ(ss', x) expanded as a polynomial in (s, s', x);
        // checked on integer s, s' where all arithmetic is exact in f64.
        let e1 = e1_action();
        for s in [2.0, -3.0, 5.0] {
            for sp in [1.0, 4.0, -2.0] {
                let inner = e1.at(c(sp)).unwrap();
                let outer = e1.at(c(s)).unwrap();
                let lhs = outer.compose(&inner);
                let rhs = e1.at(c(s * sp)).unwrap();
                assert_eq!(lhs, rhs, "s = {s}, s' = {sp}");
            }
        }
    }
}
