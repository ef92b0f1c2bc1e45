//! Dense complex linear algebra used across the crate.
//!
//! The Hermitian eigensolver is a cyclic complex Jacobi method with a
//! relative off-diagonal threshold, which keeps small eigenvalues of
//! positive semidefinite inputs accurate to working precision relative to
//! their own size rather than to the matrix norm.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{QmargError, Result};

pub type CMatrix = DMatrix<C64>;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in decreasing order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermiticity_deviation(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let n = u.nrows();
    if u.ncols() != n {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            dev = dev.max((prod[(i, j)] - target).norm());
        }
    }
    dev
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// Rejects inputs whose Hermiticity deviation exceeds `herm_tol`; the
/// strictly lower triangle is then replaced by the conjugate of the upper.
pub fn hermitian_eigen(a: &CMatrix, herm_tol: f64) -> Result<HermitianEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(QmargError::DimensionMismatch { expected: n, found: a.ncols() });
    }
    let deviation = hermiticity_deviation(a);
    if deviation > herm_tol {
        return Err(QmargError::NotHermitian { deviation });
    }

    // row-major working copy, symmetrized
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        m[i * n + i] = C64::new(a[(i, i)].re, 0.0);
        for j in i + 1..n {
            let x = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            m[i * n + j] = x;
            m[j * n + i] = x.conj();
        }
    }
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = C64::new(1.0, 0.0);
    }

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotations = 0usize;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                if mag <= f64::EPSILON * 0.5 * (app.abs() * aqq.abs()).sqrt() || mag < 1e-300 {
                    m[p * n + q] = C64::new(0.0, 0.0);
                    m[q * n + p] = C64::new(0.0, 0.0);
                    continue;
                }
                rotate(&mut m, &mut v, n, p, q, mag, apq / mag, app, aqq);
                rotations += 1;
            }
        }
        if rotations == 0 {
            converged = true;
        }
    }
    if !converged {
        return Err(QmargError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].re.total_cmp(&m[i * n + i].re));
    let values = order.iter().map(|&i| m[i * n + i].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[r * n + order[c]]);
    Ok(HermitianEigen { values, vectors })
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn rotate(
    m: &mut [C64],
    v: &mut [C64],
    n: usize,
    p: usize,
    q: usize,
    mag: f64,
    phase: C64,
    app: f64,
    aqq: f64,
) {
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // V = diag(1, e^{-i phi}) * [[c, s], [-s, c]] acting on columns p, q
    let ph = phase.conj();
    for k in 0..n {
        let akp = m[k * n + p];
        let akq = m[k * n + q];
        m[k * n + p] = akp * c - ph * akq * s;
        m[k * n + q] = akp * s + ph * akq * c;
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * c - ph * vkq * s;
        v[k * n + q] = vkp * s + ph * vkq * c;
    }
    let phc = ph.conj();
    for k in 0..n {
        let apk = m[p * n + k];
        let aqk = m[q * n + k];
        m[p * n + k] = apk * c - phc * aqk * s;
        m[q * n + k] = apk * s + phc * aqk * c;
    }
    m[p * n + p] = C64::new(app - t * mag, 0.0);
    m[q * n + q] = C64::new(aqq + t * mag, 0.0);
    m[p * n + q] = C64::new(0.0, 0.0);
    m[q * n + p] = C64::new(0.0, 0.0);
}

/// Determinant of a small dense complex matrix by partial-pivot LU.
pub fn det(a: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut lu = a.clone();
    let mut result = C64::new(1.0, 0.0);
    for col in 0..n {
        let mut piv = col;
        let mut best = lu[(col, col)].norm();
        for r in col + 1..n {
            let x = lu[(r, col)].norm();
            if x > best {
                best = x;
                piv = r;
            }
        }
        if best == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != col {
            lu.swap_rows(piv, col);
            result = -result;
        }
        let d = lu[(col, col)];
        result *= d;
        for r in col + 1..n {
            let f = lu[(r, col)] / d;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for c in col + 1..n {
                let x = lu[(col, c)];
                lu[(r, c)] -= f * x;
            }
        }
    }
    result
}

/// Orthonormalize the columns of `a` (modified Gram-Schmidt, two passes).
pub fn orthonormalize_columns(a: &CMatrix) -> CMatrix {
    let mut q = a.clone();
    let k = q.ncols();
    for j in 0..k {
        for _ in 0..2 {
            for i in 0..j {
                let proj: C64 = q.column(i).dotc(&q.column(j));
                let ci = q.column(i).clone_owned();
                let mut cj = q.column_mut(j);
                cj -= ci * proj;
            }
        }
        let norm = q.column(j).norm();
        q.column_mut(j).unscale_mut(norm);
    }
    q
}

/// Singular values of a complex matrix, descending.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Numerical rank with threshold `rel_tol * sigma_max`.
pub fn rank(a: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&x| x > rel_tol * smax).count(),
        _ => 0,
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for term in terms {
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
    }
    sum + comp
}

pub fn trace(a: &CMatrix) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, rng_for};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn diagonal_input_sorts_decreasing() {
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.4), c(0.9), c(0.7)]));
        let e = hermitian_eigen(&a, 1e-12).unwrap();
        assert_eq!(e.values, vec![0.9, 0.7, 0.4]);
        // permutation unitary
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((e.vectors[(2, 1)].norm() - 1.0).abs() < 1e-15);
        assert!((e.vectors[(0, 2)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = c(1.0);
        assert!(matches!(hermitian_eigen(&a, 1e-10), Err(QmargError::NotHermitian { .. })));
    }

    #[test]
    fn matches_nalgebra_on_random_hermitian() {
        let mut rng = rng_for(11, 0);
        for n in [1usize, 2, 5, 9, 17] {
            let a = random_hermitian(n, &mut rng);
            let e = hermitian_eigen(&a, 1e-12).unwrap();
            let mut reference: Vec<f64> =
                a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            reference.sort_by(|x, y| y.total_cmp(x));
            for (x, y) in e.values.iter().zip(&reference) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
            let recon = &e.vectors
                * CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    n,
                    e.values.iter().map(|&x| c(x)),
                ))
                * e.vectors.adjoint();
            assert!((recon - &a).norm() < 1e-12);
            assert!(unitarity_deviation(&e.vectors) < 1e-13);
        }
    }

    #[test]
    fn graded_psd_small_eigenvalues_keep_relative_accuracy() {
        // D A D with A well conditioned: eigenvalues spread over 20 decades
        let scales = [1.0, 1e-4, 1e-8, 1e-10];
        let a = CMatrix::from_fn(4, 4, |i, j| {
            let base = if i == j { 1.0 } else { 0.1 };
            c(base * scales[i] * scales[j])
        });
        let e = hermitian_eigen(&a, 1e-30).unwrap();
        // smallest eigenvalue approx 0.99 * 1e-20 with relative accuracy
        let smallest = e.values[3];
        assert!(smallest > 0.9e-20 && smallest < 1.0e-20, "{smallest}");
    }

    #[test]
    fn determinant_of_permutation_and_triangular() {
        let p = CMatrix::from_row_slice(3, 3, &[c(0.0), c(1.0), c(0.0), c(1.0), c(0.0), c(0.0), c(0.0), c(0.0), c(1.0)]);
        assert!((det(&p) - c(-1.0)).norm() < 1e-15);
        let t = CMatrix::from_row_slice(2, 2, &[C64::new(2.0, 1.0), c(5.0), c(0.0), C64::new(0.0, 3.0)]);
        assert!((det(&t) - C64::new(2.0, 1.0) * C64::new(0.0, 3.0)).norm() < 1e-14);
    }

    #[test]
    fn rank_of_stacked_frames() {
        let a = CMatrix::from_row_slice(3, 2, &[c(1.0), c(2.0), c(0.0), c(0.0), c(0.0), c(0.0)]);
        assert_eq!(rank(&a, 1e-8), 1);
        assert_eq!(rank(&CMatrix::identity(3, 3), 1e-8), 3);
    }
}
