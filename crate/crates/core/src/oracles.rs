//! Independent reference implementations used by the test suites.
//!
//! Every routine here deliberately takes a different algorithmic route than
//! the code it cross-checks (e.g. singular values through a symmetric
//! eigenproblem instead of one-sided column rotations), so agreement between
//! the two is meaningful evidence rather than an identity.

use crate::linalg::{dot, Matrix};
use crate::Real;

type M = Matrix<Real>;

/// Cyclic two-sided Jacobi eigensolver for a symmetric matrix.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues sorted descending
/// and eigenvectors as matching columns.
pub fn sym_eig_jacobi(a: &M) -> (Vec<Real>, M) {
    let n = a.rows();
    assert_eq!(n, a.cols(), "symmetric eigensolver needs a square matrix");
    let mut m = a.clone();
    let mut v = M::identity(n);
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.get(p, q).powi(2);
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + m.max_abs()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // rows/cols p and q of m
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<Real> = (0..n).map(|i| m.get(i, i)).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap().then(i.cmp(&j)));
    let vals = order.iter().map(|&i| diag[i]).collect();
    let vecs = M::from_fn(n, n, |i, j| v.get(i, order[j]));
    (vals, vecs)
}

/// Singular values of `a` as square roots of the Gram-matrix eigenvalues,
/// sorted descending.
pub fn singular_values_via_gram(a: &M) -> Vec<Real> {
    let gram = if a.rows() >= a.cols() {
        a.matmul_tn(a)
    } else {
        a.matmul_nt(a)
    };
    let (vals, _) = sym_eig_jacobi(&gram);
    vals.iter().map(|&l| l.max(0.0).sqrt()).collect()
}

/// Numerical column rank via the Gram-matrix spectrum.
pub fn rank_via_gram(a: &M, tol: Real) -> usize {
    let sv = singular_values_via_gram(a);
    let scale = sv.first().copied().unwrap_or(0.0).max(1.0);
    sv.iter().filter(|&&s| s > tol * scale).count()
}

/// Uncentered covariance by explicit double loop over sample pairs.
pub fn naive_covariance(samples: &M) -> M {
    let n = samples.rows();
    let d = samples.cols();
    let mut c = M::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = 0.0;
            for k in 0..n {
                acc += samples.get(k, i) * samples.get(k, j);
            }
            c.set(i, j, acc / n as Real);
        }
    }
    c
}

/// Diagonal-removing projection built the dense way: form the coefficient
/// matrix `C = u^T delta v`, zero its diagonal, and reassemble
/// `u C' v^T + (delta - u u^T delta v v^T)`.
pub fn coefficient_zeroing_projection(delta: &M, u: &M, v: &M) -> M {
    let c = u.matmul_tn(delta).matmul(v); // q x q
    let mut c_prime = c.clone();
    for p in 0..c.rows().min(c.cols()) {
        c_prime.set(p, p, 0.0);
    }
    let inside = u.matmul(&c).matmul_nt(v);
    let inside_zeroed = u.matmul(&c_prime).matmul_nt(v);
    delta.sub(&inside).add(&inside_zeroed)
}

/// Central finite difference of a scalar function.
pub fn central_difference(mut f: impl FnMut(Real) -> Real, x: Real, h: Real) -> Real {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Relative error with an absolute floor, the usual gradient-check metric.
pub fn relative_error(a: Real, b: Real, floor: Real) -> Real {
    (a - b).abs() / (a.abs() + b.abs()).max(floor)
}
