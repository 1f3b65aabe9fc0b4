//! Small dense complex linear algebra on top of nalgebra.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
#[cfg(test)]
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
/// 2π√−1
pub const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

pub fn from_rows(rows: &[Vec<Complex64>]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map(Vec::len).unwrap_or(0);
    CMatrix::from_fn(n, m, |i, j| rows[i][j])
}

pub fn to_rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn mat_vec(m: &CMatrix, x: &[Complex64]) -> Vec<Complex64> {
    let v = m * DVector::from_column_slice(x);
    v.iter().copied().collect()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Eigenvalues from the complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let (_, t) = Schur::new(m.clone()).unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = SVD::new(m.clone(), false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn min_singular_value(m: &CMatrix) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// `σ_max / σ_min`; infinite for singular input.
pub fn condition_number(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Orthonormal basis of the `dim` right singular vectors with the smallest
/// singular values, together with the largest singular value among them.
pub fn near_null_space(m: &CMatrix, dim: usize) -> (CMatrix, f64) {
    let n = m.ncols();
    let svd = SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let picked = &order[..dim.min(order.len())];
    let worst = picked.iter().map(|&k| svd.singular_values[k]).fold(0.0, f64::max);
    let basis = CMatrix::from_fn(n, picked.len(), |i, c| v_t[(picked[c], i)].conj());
    (basis, worst)
}

/// Greedy pivoted Gram–Schmidt: picks `rank` columns of `m` that are the most
/// independent and returns them (unmodified, normalized to unit length).
pub fn select_columns(m: &CMatrix, rank: usize) -> CMatrix {
    let n = m.nrows();
    let mut residual = m.clone();
    let mut picked = Vec::with_capacity(rank);
    for _ in 0..rank {
        let best = (0..m.ncols())
            .filter(|j| !picked.contains(j))
            .max_by(|&a, &b| residual.column(a).norm().total_cmp(&residual.column(b).norm()))
            .expect("rank must not exceed column count");
        picked.push(best);
        let q = residual.column(best).normalize();
        for j in 0..m.ncols() {
            let proj = q.dotc(&residual.column(j));
            let update = &q * proj;
            let mut col = residual.column_mut(j);
            col -= update;
        }
    }
    CMatrix::from_fn(n, rank, |i, c| {
        let col = m.column(picked[c]);
        col[i] / Complex64::new(col.norm(), 0.0)
    })
}

/// Assembles a change of basis from invariant subspaces.
///
/// Each subspace basis is renormalized so that a set of pivot rows forms the
/// identity, and each column is placed at its pivot row. Diagonal inputs come
/// back as the identity with labels in coordinate order. Returns the labels per
/// column and the basis matrix.
pub fn assemble_frame<L: Copy>(subspaces: &[(L, CMatrix)]) -> Option<(Vec<L>, CMatrix)> {
    let n = subspaces.first().map(|(_, w)| w.nrows())?;
    let total: usize = subspaces.iter().map(|(_, w)| w.ncols()).sum();
    if total != n {
        return None;
    }
    let mut taken = vec![false; n];
    let mut placed: Vec<Option<(L, DVector<Complex64>)>> = vec![None; n];
    let mut fallback = false;
    let mut sequential: Vec<(L, DVector<Complex64>)> = Vec::with_capacity(n);

    for (label, w) in subspaces {
        let m = w.ncols();
        let mut work = w.clone();
        let mut pivots = Vec::with_capacity(m);
        for c in 0..m {
            let candidate = (0..n)
                .filter(|&r| !taken[r] && !pivots.contains(&r))
                .max_by(|&a, &b| work[(a, c)].norm().total_cmp(&work[(b, c)].norm()));
            let r = match candidate {
                Some(r) if work[(r, c)].norm() > 1e-10 => r,
                _ => {
                    fallback = true;
                    (0..n)
                        .filter(|r| !pivots.contains(r))
                        .max_by(|&a, &b| work[(a, c)].norm().total_cmp(&work[(b, c)].norm()))?
                }
            };
            pivots.push(r);
            let pivot = work[(r, c)];
            for c2 in (c + 1)..m {
                let factor = work[(r, c2)] / pivot;
                for i in 0..n {
                    let v = work[(i, c)];
                    work[(i, c2)] -= factor * v;
                }
            }
        }
        let square = CMatrix::from_fn(m, m, |i, j| w[(pivots[i], j)]);
        let normalized = w * square.try_inverse()?;
        for (c, &r) in pivots.iter().enumerate() {
            let col = normalized.column(c).into_owned();
            sequential.push((*label, col.clone()));
            if !taken[r] && placed[r].is_none() {
                taken[r] = true;
                placed[r] = Some((*label, col));
            } else {
                fallback = true;
            }
        }
    }

    let columns: Vec<(L, DVector<Complex64>)> = if fallback {
        sequential
    } else {
        placed.into_iter().map(|p| p.expect("every row placed")).collect()
    };
    let labels = columns.iter().map(|(l, _)| *l).collect();
    let basis = CMatrix::from_fn(n, n, |i, j| columns[j].1[i]);
    Some((labels, basis))
}

/// Eigen-decomposition `M = V diag(μ) V⁻¹` when `M` is numerically
/// semisimple; `None` when a cluster of eigenvalues lacks a full eigenspace or
/// the eigenvector matrix is too ill-conditioned.
pub fn semisimple_decomposition(m: &CMatrix, max_condition: f64) -> Option<(Vec<Complex64>, CMatrix)> {
    let n = m.nrows();
    if n == 0 {
        return Some((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let scale = spectral_norm(m).max(1.0);
    let cluster_tol = 1e-8 * scale;
    let null_tol = 1e-6 * scale;
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for mu in eigenvalues(m) {
        match clusters.iter_mut().find(|(c, _)| (c - mu).norm() <= cluster_tol) {
            Some((center, count)) => {
                *center = (*center * *count as f64 + mu) / (*count as f64 + 1.0);
                *count += 1;
            }
            None => clusters.push((mu, 1)),
        }
    }
    let mut subspaces = Vec::with_capacity(clusters.len());
    for (mu, count) in &clusters {
        let shifted = m - CMatrix::identity(n, n) * *mu;
        let (basis, worst) = near_null_space(&shifted, *count);
        if worst > null_tol {
            return None;
        }
        subspaces.push((*mu, basis));
    }
    let (values, basis) = assemble_frame(&subspaces)?;
    if condition_number(&basis) > max_condition {
        return None;
    }
    Some((values, basis))
}

/// `exp(M)` by scaling and squaring with a truncated Taylor series.
pub fn expm_taylor(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm1 = (0..n)
        .map(|j| m.column(j).iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = m * Complex64::new(0.5f64.powi(squarings), 0.0);
    let mut result = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=24 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        result += &term;
        if max_entry(&term) < 1e-18 * max_entry(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `exp(z M)`, through the eigen-decomposition when `M` is semisimple and
/// scaling-and-squaring otherwise.
pub fn expm_scaled(m: &CMatrix, z: Complex64) -> CMatrix {
    let n = m.nrows();
    if z == ZERO {
        return CMatrix::identity(n, n);
    }
    if let Some((values, v)) = semisimple_decomposition(m, 1e8) {
        if let Some(v_inv) = v.clone().try_inverse() {
            let d = CMatrix::from_diagonal(&DVector::from_iterator(n, values.iter().map(|mu| (z * mu).exp())));
            return &v * d * v_inv;
        }
    }
    expm_taylor(&(m * z))
}

/// Jacobian of a holomorphic map by the trapezoid rule on small circles:
/// column `j` is `(1/(K h)) Σ_k ω^{−k} f(x + h ω^k e_j)` with `ω = e^{2π√−1/K}`.
///
/// The error is `O(h^K)`, far below central differences at equal cost.
pub fn holomorphic_jacobian<F>(mut f: F, x: &[Complex64], h: f64, nodes: usize) -> crate::Result<CMatrix>
where
    F: FnMut(&[Complex64]) -> crate::Result<Vec<Complex64>>,
{
    let n = x.len();
    let mut jac = CMatrix::zeros(n, n);
    let mut probe = x.to_vec();
    for j in 0..n {
        for k in 0..nodes {
            let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
            probe[j] = x[j] + w * h;
            let fx = f(&probe)?;
            for i in 0..n {
                jac[(i, j)] += fx[i] * w.conj();
            }
        }
        probe[j] = x[j];
    }
    Ok(jac / Complex64::new(h * nodes as f64, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_frame_is_identity() {
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![TWO_PI_I, TWO_PI_I * 2.0]));
        let (vals, v) = semisimple_decomposition(&m, 1e8).unwrap();
        assert!((vals[0] - TWO_PI_I).norm() < 1e-12);
        assert!((vals[1] - TWO_PI_I * 2.0).norm() < 1e-12);
        assert!((v - CMatrix::identity(2, 2)).iter().all(|e| e.norm() < 1e-14));
    }

    #[test]
    fn jordan_block_is_not_semisimple() {
        let m = from_rows(&[vec![TWO_PI_I, TWO_PI_I], vec![ZERO, TWO_PI_I]]);
        assert!(semisimple_decomposition(&m, 1e8).is_none());
    }

    #[test]
    fn repeated_eigenvalue_semisimple() {
        let g = from_rows(&[vec![c(1.0, 0.0), c(2.0, 1.0)], vec![c(0.5, 0.0), c(-1.0, 0.3)]]);
        let g_inv = g.clone().try_inverse().unwrap();
        let m = &g * CMatrix::identity(2, 2) * c(0.0, 3.0) * &g_inv;
        let (vals, v) = semisimple_decomposition(&m, 1e8).unwrap();
        assert!(vals.iter().all(|mu| (mu - c(0.0, 3.0)).norm() < 1e-10));
        assert!(condition_number(&v) < 1e3);
    }

    #[test]
    fn expm_agrees_between_routes() {
        let m = from_rows(&[vec![c(0.1, 0.4), c(1.0, 0.0)], vec![c(-0.3, 0.2), c(0.0, -1.2)]]);
        let a = expm_scaled(&m, c(0.7, -0.2));
        let b = expm_taylor(&(&m * c(0.7, -0.2)));
        assert!((a - b).iter().all(|e| e.norm() < 1e-12));
        // nilpotent: exp(N) = I + N
        let nil = from_rows(&[vec![ZERO, c(2.0, 0.0)], vec![ZERO, ZERO]]);
        let e = expm_scaled(&nil, ONE);
        assert!((e[(0, 1)] - c(2.0, 0.0)).norm() < 1e-14);
        assert!((e[(0, 0)] - ONE).norm() < 1e-14);
    }

    #[test]
    fn contour_jacobian_of_cubic() {
        let f = |x: &[Complex64]| Ok(vec![x[0], x[1] + x[0] * x[0] * x[0]]);
        let x = [c(0.3, -0.2), c(0.1, 0.0)];
        let j = holomorphic_jacobian(f, &x, 1e-2, 8).unwrap();
        let expect = x[0] * x[0] * 3.0;
        assert!((j[(1, 0)] - expect).norm() < 1e-13);
        assert!((j[(0, 0)] - ONE).norm() < 1e-13);
        assert!(j[(0, 1)].norm() < 1e-13);
    }

    #[test]
    fn column_selection_keeps_original_columns() {
        let p = from_rows(&[vec![ONE, ZERO], vec![ZERO, ZERO]]);
        let s = select_columns(&p, 1);
        assert_eq!(s[(0, 0)], ONE);
        assert_eq!(s[(1, 0)], ZERO);
    }
}
