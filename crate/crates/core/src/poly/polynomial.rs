use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::{MultiIndex, Ring};

/// Sparse multivariate polynomial in a fixed number of variables, with
/// coefficients in a commutative ring (complex numbers or Laurent
/// polynomials in the group parameter).
#[derive(Clone, PartialEq)]
pub struct Poly<C: Ring> {
    nvars: usize,
    terms: BTreeMap<MultiIndex, C>,
}

impl<C: Ring> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(MultiIndex::zero(nvars), c)
    }

    pub fn monomial(alpha: MultiIndex, c: C) -> Self {
        let nvars = alpha.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(alpha, c);
        }
        Poly { nvars, terms }
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::unit(nvars, i), C::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, C)>>(nvars: usize, terms: I) -> Self {
        let mut out = Poly::zero(nvars);
        for (alpha, c) in terms {
            assert_eq!(alpha.len(), nvars, "multi-index length must match nvars");
            out.add_term(alpha, c);
        }
        out
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&alpha) {
            Some(prev) => {
                let sum = prev + c;
                if !sum.is_zero() {
                    self.terms.insert(alpha, sum);
                }
            }
            None => {
                self.terms.insert(alpha, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> C {
        self.terms.get(alpha).cloned().unwrap_or_else(C::zero)
    }

    /// Terms in graded-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    pub fn map_coeffs<D: Ring, F: FnMut(&MultiIndex, &C) -> D>(&self, mut f: F) -> Poly<D> {
        let mut out = Poly::zero(self.nvars);
        for (alpha, c) in &self.terms {
            out.add_term(alpha.clone(), f(alpha, c));
        }
        out
    }

    pub fn scale(&self, factor: &C) -> Self {
        self.map_coeffs(|_, c| c.clone() * factor.clone())
    }

    pub fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Poly::constant(self.nvars, C::one());
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Substitutes `x_i ↦ subs[i]`. The substituted polynomials may live in a
    /// different number of variables.
    pub fn compose(&self, subs: &[Poly<C>]) -> Poly<C> {
        assert_eq!(subs.len(), self.nvars, "one substitution per variable");
        let target = subs.first().map(|p| p.nvars).unwrap_or(0);
        let mut powers: Vec<Vec<Poly<C>>> = subs
            .iter()
            .map(|p| vec![Poly::constant(target, C::one()), p.clone()])
            .collect();
        let mut out = Poly::zero(target);
        for (alpha, c) in &self.terms {
            let mut term = Poly::constant(target, c.clone());
            for (i, &e) in alpha.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = &powers[i][powers[i].len() - 1] * &subs[i];
                    powers[i].push(next);
                }
                term = &term * &powers[i][e as usize];
            }
            out = out + term;
        }
        out
    }

    /// Partial derivative with respect to `x_var`.
    pub fn derivative(&self, var: usize) -> Self
    where
        C: From<f64>,
    {
        let mut out = Poly::zero(self.nvars);
        for (alpha, c) in &self.terms {
            let e = alpha.exponents()[var];
            if e == 0 {
                continue;
            }
            let mut lowered = alpha.exponents().to_vec();
            lowered[var] -= 1;
            out.add_term(MultiIndex::new(lowered), c.clone() * C::from(e as f64));
        }
        out
    }

    /// Homogeneous part of the given total degree.
    pub fn homogeneous_part(&self, degree: u32) -> Self {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(a, _)| a.degree() == degree)
                .map(|(a, c)| (a.clone(), c.clone()))
                .collect(),
        }
    }
}

impl Poly<Complex64> {
    /// Direct monomial evaluation with a per-variable power table.
    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.nvars);
        let max_exp: Vec<u32> = (0..self.nvars)
            .map(|i| self.terms.keys().map(|a| a.exponents()[i]).max().unwrap_or(0))
            .collect();
        let table = power_table(x, &max_exp);
        self.eval_with_table(&table)
    }

    pub(crate) fn eval_with_table(&self, table: &[Vec<Complex64>]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (alpha, c) in &self.terms {
            let mut m = *c;
            for (i, &e) in alpha.exponents().iter().enumerate() {
                if e > 0 {
                    m *= table[i][e as usize];
                }
            }
            acc += m;
        }
        acc
    }

    pub(crate) fn max_exponents(&self) -> Vec<u32> {
        (0..self.nvars)
            .map(|i| self.terms.keys().map(|a| a.exponents()[i]).max().unwrap_or(0))
            .collect()
    }

    /// Largest coefficient magnitude, zero for the zero polynomial.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops coefficients with `|c| < threshold`.
    pub fn prune(&self, threshold: f64) -> Self {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() >= threshold)
                .map(|(a, c)| (a.clone(), *c))
                .collect(),
        }
    }
}

pub(crate) fn power_table(x: &[Complex64], max_exp: &[u32]) -> Vec<Vec<Complex64>> {
    x.iter()
        .zip(max_exp)
        .map(|(&xi, &m)| {
            let mut row = Vec::with_capacity(m as usize + 1);
            let mut p = Complex64::new(1.0, 0.0);
            row.push(p);
            for _ in 0..m {
                p *= xi;
                row.push(p);
            }
            row
        })
        .collect()
}

impl<C: Ring> Add for Poly<C> {
    type Output = Poly<C>;

    fn add(mut self, rhs: Poly<C>) -> Poly<C> {
        assert_eq!(self.nvars, rhs.nvars, "polynomials must share nvars");
        for (alpha, c) in rhs.terms {
            self.add_term(alpha, c);
        }
        self
    }
}

impl<C: Ring> Sub for Poly<C> {
    type Output = Poly<C>;

    fn sub(self, rhs: Poly<C>) -> Poly<C> {
        self + (-rhs)
    }
}

impl<C: Ring> Neg for Poly<C> {
    type Output = Poly<C>;

    fn neg(self) -> Poly<C> {
        Poly {
            nvars: self.nvars,
            terms: self.terms.into_iter().map(|(a, c)| (a, -c)).collect(),
        }
    }
}

impl<C: Ring> Mul for &Poly<C> {
    type Output = Poly<C>;

    fn mul(self, rhs: &Poly<C>) -> Poly<C> {
        assert_eq!(self.nvars, rhs.nvars, "polynomials must share nvars");
        let mut out = Poly::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.add(b), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Ring> Mul for Poly<C> {
    type Output = Poly<C>;

    fn mul(self, rhs: Poly<C>) -> Poly<C> {
        &self * &rhs
    }
}

impl<C: Ring> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(a, c)| format!("[{:?}]x^{:?}", c, a))
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

    #[test]
    fn compose_binomial() {
        // (x + y)^3 via composition of t^3 with t = x + y
        let t3 = Poly::monomial(MultiIndex::new(vec![3]), c(1.0));
        let sum = Poly::var(2, 0) + Poly::var(2, 1);
        let p = t3.compose(std::slice::from_ref(&sum));
        assert_eq!(p, sum.pow(3));
        assert_eq!(p.coefficient(&MultiIndex::new(vec![2, 1])), c(3.0));
        assert_eq!(p.num_terms(), 4);
    }

    #[test]
    fn derivative_of_cubic() {
        let p = Poly::var(2, 1) + Poly::var(2, 0).pow(3);
        let dx = p.derivative(0);
        assert_eq!(dx, Poly::var(2, 0).pow(2).scale(&c(3.0)));
        assert_eq!(p.derivative(1), Poly::constant(2, c(1.0)));
    }

    #[test]
    fn eval_matches_hand_substitution() {
        let p = Poly::var(2, 1) - Poly::var(2, 0).pow(3);
        assert_eq!(p.eval(&[c(2.0), c(1.0)]), c(-7.0));
    }
}
