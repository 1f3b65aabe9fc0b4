use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::Ring;

/// A Laurent polynomial `c(s) = Σ c_k s^k` in the group parameter `s ∈ ℂ*`.
///
/// Only nonzero coefficients are stored. A coefficient is dropped only when it
/// is exactly zero, so arithmetic results are reproducible bit for bit.
#[derive(Clone, PartialEq, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<i32, Complex64>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0, c)
    }

    /// `c · s^k`
    pub fn monomial(k: i32, c: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        if c != Complex64::new(0.0, 0.0) {
            terms.insert(k, c);
        }
        LaurentPoly { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (i32, Complex64)>>(terms: I) -> Self {
        let mut out = LaurentPoly::zero();
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    fn add_term(&mut self, k: i32, c: Complex64) {
        let entry = self.terms.entry(k).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, k: i32) -> Complex64 {
        self.terms.get(&k).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `|k|` with a nonzero coefficient; zero for the zero polynomial.
    pub fn max_frequency(&self) -> u32 {
        self.terms.keys().map(|k| k.unsigned_abs()).max().unwrap_or(0)
    }

    /// Multiplies by `s^shift`.
    pub fn shift(&self, shift: i32) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(&k, &c)| (k + shift, c)).collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        LaurentPoly::from_terms(self.terms.iter().map(|(&k, &c)| (k, c * factor)))
    }

    /// Evaluates at `s`. The caller guarantees `s ≠ 0` whenever negative
    /// powers are present.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let s_inv = if self.terms.keys().any(|&k| k < 0) {
            s.inv()
        } else {
            Complex64::new(0.0, 0.0)
        };
        self.terms
            .iter()
            .map(|(&k, &c)| {
                if k >= 0 {
                    c * s.powu(k as u32)
                } else {
                    c * s_inv.powu(k.unsigned_abs())
                }
            })
            .sum()
    }

    /// Average of `c(e^{2π√−1 t})` over `t ∈ [0, 1]`.
    ///
    /// Every `s^k` with `k ≠ 0` integrates to zero over the unit circle, so
    /// this is the constant coefficient.
    pub fn circle_average(&self) -> Complex64 {
        self.coefficient(0)
    }
}

impl Ring for LaurentPoly {
    fn zero() -> Self {
        LaurentPoly::zero()
    }

    fn one() -> Self {
        LaurentPoly::constant(Complex64::new(1.0, 0.0))
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;

    fn add(mut self, rhs: LaurentPoly) -> LaurentPoly {
        for (k, c) in rhs.terms {
            self.add_term(k, c);
        }
        self
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;

    fn sub(self, rhs: LaurentPoly) -> LaurentPoly {
        self + (-rhs)
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;

    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.into_iter().map(|(k, c)| (k, -c)).collect(),
        }
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;

    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (&a, &ca) in &self.terms {
            for (&b, &cb) in &rhs.terms {
                out.add_term(a + b, ca * cb);
            }
        }
        out
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| format!("({}{:+}i)s^{}", c.re, c.im, k))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Independent check of the circle average: trapezoid rule over the
    /// periodic interval with `nodes` samples.
    fn trapezoid_average(p: &LaurentPoly, nodes: usize) -> Complex64 {
        let h = 1.0 / nodes as f64;
        (0..nodes)
            .map(|j| {
                let t = j as f64 * h;
                p.eval(Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t))
            })
            .sum::<Complex64>()
            * h
    }

    #[test]
    fn circle_average_matches_quadrature() {
        let one_minus_s = LaurentPoly::from_terms([(0, c(1.0)), (1, c(-1.0))]);
        let q = trapezoid_average(&one_minus_s, 64);
        assert!((q - c(1.0)).norm() < 1e-14);
        assert_eq!(one_minus_s.circle_average(), c(1.0));

        let p = LaurentPoly::from_terms([(-2, c(1.0)), (0, c(5.0)), (7, c(3.0))]);
        let q = trapezoid_average(&p, 64);
        assert!((q - c(5.0)).norm() < 1e-13);
        assert_eq!(p.circle_average(), c(5.0));

        assert_eq!(LaurentPoly::monomial(1, c(1.0)).circle_average(), c(0.0));
    }

    #[test]
    fn reciprocal_monomials_average_to_one() {
        for k in -16..=16 {
            let prod = LaurentPoly::monomial(k, c(1.0)) * LaurentPoly::monomial(-k, c(1.0));
            assert_eq!(prod.circle_average(), c(1.0), "k = {k}");
        }
    }

    #[test]
    fn cancellation_leaves_canonical_zero() {
        let p = LaurentPoly::from_terms([(2, c(1.0)), (3, c(-1.0))]);
        let d = p.clone() - p;
        assert!(d.is_zero());
        assert_eq!(d, LaurentPoly::zero());
    }

    #[test]
    fn eval_negative_powers() {
        let p = LaurentPoly::from_terms([(-1, c(1.0)), (2, c(1.0))]);
        let v = p.eval(c(2.0));
        assert_eq!(v, c(0.5 + 4.0));
        assert_eq!(p.max_frequency(), 2);
    }
}
