//! Dense linear algebra kernel: row-major matrices, one-sided Jacobi SVD,
//! truncated SVD, orthonormal basis maintenance, uncentered covariance, and
//! the diagonal-removing orthogonal-complement projection used when stacking
//! task updates.
//!
//! Everything here is deterministic and pure; all routines are generic over
//! the [`Scalar`] type. Dimensions in this crate stay small (d <= 128), so
//! the SVD favors simplicity and accuracy over asymptotic speed.

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> std::fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Matrix({}x{})", self.rows, self.cols)
    }
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, S::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::validation("ragged rows in matrix literal"));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Column vectors -> matrix. All columns must share a length.
    pub fn from_columns(cols: &[Vec<S>]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        if cols.iter().any(|x| x.len() != r) {
            return Err(Error::validation("ragged columns"));
        }
        Ok(Self::from_fn(r, c, |i, j| cols[j][i]))
    }

    pub fn from_column(col: &[S]) -> Self {
        Matrix { rows: col.len(), cols: 1, data: col.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [S] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn scale(&self, s: S) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, other: &Self, alpha: S) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + alpha * b;
        }
    }

    /// `self * other`
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == S::zero() {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for (o, &b) in out_row.iter_mut().zip(orow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    /// `self * other^T` — the hot path for batched layer application, where
    /// both operands are traversed along contiguous rows.
    pub fn matmul_nt(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "matmul_nt shape mismatch");
        Self::from_fn(self.rows, other.rows, |i, j| dot(self.row(i), other.row(j)))
    }

    /// `self^T * other`
    pub fn matmul_tn(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "matmul_tn shape mismatch");
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let srow = self.row(k);
            let orow = other.row(k);
            for i in 0..self.cols {
                let a = srow[i];
                if a == S::zero() {
                    continue;
                }
                let out_row = out.row_mut(i);
                for (o, &b) in out_row.iter_mut().zip(orow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    /// `self * v` for a vector `v`.
    pub fn matvec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `self^T * v`.
    pub fn matvec_t(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.rows, v.len(), "matvec_t shape mismatch");
        let mut out = vec![S::zero(); self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let vi = v[i];
            for (o, &r) in out.iter_mut().zip(row) {
                *o = *o + vi * r;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> S {
        self.data.iter().fold(S::zero(), |acc, &v| acc + v * v).sqrt()
    }

    /// Frobenius inner product `<self, other>_F`.
    pub fn frob_dot(&self, other: &Self) -> S {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(S::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn max_abs(&self) -> S {
        self.data.iter().fold(S::zero(), |acc, &v| acc.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }
}

#[inline]
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = S::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc = acc + x * y;
    }
    acc
}

pub fn norm2<S: Scalar>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

// Matrices serialize as nested row arrays so every on-disk format stays
// human-readable and shape-checked on load.
impl<S: Scalar> Serialize for Matrix<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            seq.serialize_element(self.row(i))?;
        }
        seq.end()
    }
}

impl<'de, S: Scalar> Deserialize<'de> for Matrix<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct MatVisitor<S>(std::marker::PhantomData<S>);
        impl<'de, S: Scalar> Visitor<'de> for MatVisitor<S> {
            type Value = Matrix<S>;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a sequence of equal-length rows")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Matrix<S>, A::Error> {
                let mut rows: Vec<Vec<S>> = Vec::new();
                while let Some(row) = seq.next_element::<Vec<S>>()? {
                    rows.push(row);
                }
                Matrix::from_rows(rows).map_err(|e| de::Error::custom(e.to_string()))
            }
        }
        deserializer.deserialize_seq(MatVisitor(std::marker::PhantomData))
    }
}

/// Thin SVD `a = u * diag(sigma) * v^T`.
///
/// `u` is m x q and `v` is n x q with orthonormal columns, `sigma` is
/// non-negative and sorted descending. `q = min(m, n)` for [`svd`] or the
/// requested rank for [`truncated_svd`]. Columns paired with zero singular
/// values are deterministic orthonormal completions of the range basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SvdResult<S> {
    pub u: Matrix<S>,
    pub sigma: Vec<S>,
    pub v: Matrix<S>,
}

impl<S: Scalar> SvdResult<S> {
    /// `u * diag(sigma) * v^T`.
    pub fn reconstruct(&self) -> Matrix<S> {
        let m = self.u.rows();
        let n = self.v.rows();
        let q = self.sigma.len();
        let mut out = Matrix::zeros(m, n);
        for p in 0..q {
            let s = self.sigma[p];
            if s == S::zero() {
                continue;
            }
            for i in 0..m {
                let uis = self.u.get(i, p) * s;
                let row = out.row_mut(i);
                for (j, o) in row.iter_mut().enumerate() {
                    *o = *o + uis * self.v.get(j, p);
                }
            }
        }
        out
    }

    /// True when the factored matrix is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.sigma.first().map_or(true, |&s| s == S::zero())
    }
}

const MAX_JACOBI_SWEEPS: usize = 60;

/// Full thin SVD via one-sided Jacobi rotations.
///
/// Rejects non-finite input. Singular values are accurate to machine
/// precision at the dimensions this crate works with.
pub fn svd<S: Scalar>(a: &Matrix<S>) -> Result<SvdResult<S>> {
    if !a.all_finite() {
        return Err(Error::numeric("svd: input contains non-finite entries"));
    }
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::validation("svd: empty matrix"));
    }
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        let r = svd_tall(&a.transpose())?;
        Ok(SvdResult { u: r.v, sigma: r.sigma, v: r.u })
    }
}

fn svd_tall<S: Scalar>(a: &Matrix<S>) -> Result<SvdResult<S>> {
    let m = a.rows();
    let n = a.cols();
    debug_assert!(m >= n);

    // Column-major working copies: b holds the rotating columns of a,
    // v accumulates the right rotations.
    let mut b: Vec<Vec<S>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<S>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { S::one() } else { S::zero() }).collect())
        .collect();

    let tol = S::epsilon() * S::from_f64(4.0);
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let app = dot(&b[p], &b[p]);
                let aqq = dot(&b[q], &b[q]);
                let apq = dot(&b[p], &b[q]);
                if apq == S::zero() || apq.abs() <= tol * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (S::from_f64(2.0) * apq);
                let t = if zeta >= S::zero() {
                    S::one() / (zeta + (S::one() + zeta * zeta).sqrt())
                } else {
                    -S::one() / (-zeta + (S::one() + zeta * zeta).sqrt())
                };
                let c = S::one() / (S::one() + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut b, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    // Singular values, sorted descending (stable on ties).
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<S> = b.iter().map(|col| norm2(col)).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let sigma_max = order.first().map_or(S::zero(), |&i| norms[i]);
    let rank_tol = sigma_max * S::epsilon() * S::from_f64(m.max(n) as f64);

    let mut u_cols: Vec<Vec<S>> = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        if s > rank_tol && s > S::zero() {
            u_cols.push(b[j].iter().map(|&x| x / s).collect());
        } else {
            u_cols.push(vec![S::zero(); m]);
            deficient.push(slot);
        }
    }
    if !deficient.is_empty() {
        complete_basis(&mut u_cols, &deficient, m);
    }

    let u = Matrix::from_columns(&u_cols)?;
    let v_sorted: Vec<Vec<S>> = order.iter().map(|&j| v[j].clone()).collect();
    let v = Matrix::from_columns(&v_sorted)?;
    Ok(SvdResult { u, sigma, v })
}

fn rotate_pair<S: Scalar>(cols: &mut [Vec<S>], p: usize, q: usize, c: S, s: S) {
    let (head, tail) = cols.split_at_mut(q);
    let cp = &mut head[p];
    let cq = &mut tail[0];
    for (xp, xq) in cp.iter_mut().zip(cq.iter_mut()) {
        let new_p = c * *xp - s * *xq;
        let new_q = s * *xp + c * *xq;
        *xp = new_p;
        *xq = new_q;
    }
}

/// Fill zero columns with deterministic orthonormal completions: repeatedly
/// pick the canonical basis vector with the largest residual against the
/// columns accepted so far.
fn complete_basis<S: Scalar>(u_cols: &mut [Vec<S>], deficient: &[usize], m: usize) {
    let mut accepted: Vec<Vec<S>> = u_cols
        .iter()
        .enumerate()
        .filter(|(i, _)| !deficient.contains(i))
        .map(|(_, c)| c.clone())
        .collect();
    for &slot in deficient {
        let mut best: Option<(S, usize)> = None;
        for cand in 0..m {
            let mut r = vec![S::zero(); m];
            r[cand] = S::one();
            project_out(&mut r, &accepted);
            let nrm = norm2(&r);
            if best.map_or(true, |(bn, _)| nrm > bn) {
                best = Some((nrm, cand));
            }
        }
        let (_, cand) = best.expect("nonempty candidate set");
        let mut r = vec![S::zero(); m];
        r[cand] = S::one();
        project_out(&mut r, &accepted);
        project_out(&mut r, &accepted); // second pass for orthogonality
        let nrm = norm2(&r);
        let col: Vec<S> = r.iter().map(|&x| x / nrm).collect();
        u_cols[slot] = col.clone();
        accepted.push(col);
    }
}

fn project_out<S: Scalar>(v: &mut [S], basis: &[Vec<S>]) {
    for b in basis {
        let c = dot(v, b);
        for (x, &bb) in v.iter_mut().zip(b) {
            *x = *x - c * bb;
        }
    }
}

/// Top-`r` truncated SVD. `1 <= r <= min(m, n)`.
pub fn truncated_svd<S: Scalar>(a: &Matrix<S>, r: usize) -> Result<SvdResult<S>> {
    let q = a.rows().min(a.cols());
    if r == 0 || r > q {
        return Err(Error::validation(format!(
            "truncated_svd: rank {r} out of range for {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let full = svd(a)?;
    Ok(SvdResult {
        u: Matrix::from_fn(a.rows(), r, |i, j| full.u.get(i, j)),
        sigma: full.sigma[..r].to_vec(),
        v: Matrix::from_fn(a.cols(), r, |i, j| full.v.get(i, j)),
    })
}

/// Default drop tolerance for [`orthonormalize_augment`].
pub fn default_augment_tol<S: Scalar>(rows: usize) -> S {
    S::from_f64(1e-8 * rows as f64)
}

/// Extend an orthonormal column basis with new directions.
///
/// New columns are orthogonalized against everything accepted so far
/// (two Gram-Schmidt passes) and dropped when their residual norm falls
/// below `tol`. The output spans `span(existing) + span(new_cols)` and never
/// gains more columns than that span's rank.
pub fn orthonormalize_augment<S: Scalar>(
    existing: Option<&Matrix<S>>,
    new_cols: &Matrix<S>,
    tol: S,
) -> Result<Matrix<S>> {
    let rows = new_cols.rows();
    let mut basis: Vec<Vec<S>> = Vec::new();
    if let Some(e) = existing {
        if e.rows() != rows {
            return Err(Error::validation(format!(
                "orthonormalize_augment: row mismatch {} vs {}",
                e.rows(),
                rows
            )));
        }
        for i in 0..e.cols() {
            basis.push(e.column(i));
        }
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let expect = if i == j { S::one() } else { S::zero() };
                if (dot(a, b) - expect).abs() > S::from_f64(1e-6) {
                    return Err(Error::validation(
                        "orthonormalize_augment: existing basis is not orthonormal",
                    ));
                }
            }
        }
    }
    for j in 0..new_cols.cols() {
        let mut c = new_cols.column(j);
        project_out(&mut c, &basis);
        project_out(&mut c, &basis);
        let nrm = norm2(&c);
        if nrm > tol {
            basis.push(c.iter().map(|&x| x / nrm).collect());
        }
    }
    if basis.is_empty() {
        return Ok(Matrix::zeros(rows, 0));
    }
    Matrix::from_columns(&basis)
}

/// Uncentered covariance `(1/N) * sum_i h_i h_i^T` of the rows of `samples`.
pub fn covariance<S: Scalar>(samples: &Matrix<S>) -> Result<Matrix<S>> {
    let n = samples.rows();
    if n == 0 {
        return Err(Error::validation("covariance: empty sample set"));
    }
    let d = samples.cols();
    let inv_n = S::one() / S::from_f64(n as f64);
    let mut c = Matrix::zeros(d, d);
    for k in 0..n {
        let row = samples.row(k);
        for i in 0..d {
            let ri = row[i];
            for j in i..d {
                let v = c.get(i, j) + ri * row[j];
                c.set(i, j, v);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = c.get(i, j) * inv_n;
            c.set(i, j, v);
            c.set(j, i, v);
        }
    }
    Ok(c)
}

/// Remove the diagonal singular-direction content of `delta` relative to a
/// previous factorization.
///
/// With `u_p`, `v_p` the paired columns of `prev`, returns
/// `delta - sum_p <delta, u_p v_p^T>_F u_p v_p^T`: every cross-pair
/// coefficient and the component outside the factored subspaces pass
/// through unchanged. A `prev` that factors the zero matrix leaves `delta`
/// untouched (there is nothing to remove).
pub fn project_orthogonal_complement<S: Scalar>(
    delta: &Matrix<S>,
    prev: &SvdResult<S>,
) -> Result<Matrix<S>> {
    if delta.rows() != prev.u.rows() || delta.cols() != prev.v.rows() {
        return Err(Error::validation(format!(
            "project_orthogonal_complement: delta is {}x{}, prev factors {}x{}",
            delta.rows(),
            delta.cols(),
            prev.u.rows(),
            prev.v.rows()
        )));
    }
    if prev.is_zero() {
        return Ok(delta.clone());
    }
    let q = prev.sigma.len().min(prev.u.cols()).min(prev.v.cols());
    let mut out = delta.clone();
    for p in 0..q {
        let up = prev.u.column(p);
        let vp = prev.v.column(p);
        // c_p = u_p^T delta v_p
        let dv = delta.matvec(&vp);
        let c = dot(&up, &dv);
        for i in 0..out.rows() {
            let ui_c = up[i] * c;
            let row = out.row_mut(i);
            for (j, o) in row.iter_mut().enumerate() {
                *o = *o - ui_c * vp[j];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = Matrix<f64>;

    fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> M {
        M::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn svd_identity() {
        let r = svd(&M::identity(3)).unwrap();
        for s in &r.sigma {
            assert!((s - 1.0).abs() < 1e-12);
        }
        let rec = r.reconstruct();
        assert!(rec.sub(&M::identity(3)).max_abs() < 1e-12);
    }

    #[test]
    fn svd_diagonal_sorted() {
        let a = M::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 3.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        let r = svd(&a).unwrap();
        assert!((r.sigma[0] - 3.0).abs() < 1e-12);
        assert!((r.sigma[1] - 2.0).abs() < 1e-12);
        assert!((r.sigma[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_random_matches_symmetric_jacobi_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 6, 4);
        let r = svd(&a).unwrap();
        let rec = r.reconstruct();
        let rel = rec.sub(&a).frobenius_norm() / a.frobenius_norm();
        assert!(rel < 1e-8, "reconstruction error {rel}");
        let oracle = oracles::singular_values_via_gram(&a);
        for (s, o) in r.sigma.iter().zip(&oracle) {
            assert!((s - o).abs() < 1e-8, "sigma {s} vs oracle {o}");
        }
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut a = M::zeros(2, 2);
        a.set(0, 0, f64::NAN);
        assert!(svd(&a).is_err());
    }

    #[test]
    fn svd_wide_and_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // wide
        let a = random_matrix(&mut rng, 3, 7);
        let r = svd(&a).unwrap();
        assert_eq!(r.u.rows(), 3);
        assert_eq!(r.v.rows(), 7);
        assert!(r.reconstruct().sub(&a).max_abs() < 1e-10);
        // rank-1 with zero singular values: bases stay orthonormal
        let u = vec![1.0, 2.0, -1.0, 0.5];
        let v = vec![0.3, -0.7, 0.2];
        let b = M::from_fn(4, 3, |i, j| u[i] * v[j]);
        let rb = svd(&b).unwrap();
        assert!(rb.sigma[1] < 1e-12);
        let gram = rb.u.matmul_tn(&rb.u);
        assert!(gram.sub(&M::identity(3)).max_abs() < 1e-10);
    }

    #[test]
    fn svd_zero_matrix() {
        let r = svd(&M::zeros(4, 2)).unwrap();
        assert!(r.is_zero());
        let gram_u = r.u.matmul_tn(&r.u);
        assert!(gram_u.sub(&M::identity(2)).max_abs() < 1e-12);
    }

    #[test]
    fn truncated_svd_diagonal_eckart_young() {
        let a = M::from_rows(vec![
            vec![3.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let t = truncated_svd(&a, 2).unwrap();
        let rec = t.reconstruct();
        let expect = M::from_rows(vec![
            vec![3.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        assert!(rec.sub(&expect).max_abs() < 1e-10);
        let err2 = rec.sub(&a).frobenius_norm().powi(2);
        assert!((err2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn truncated_svd_full_rank_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(&mut rng, 5, 4);
        let t = truncated_svd(&a, 4).unwrap();
        assert!(t.reconstruct().sub(&a).max_abs() < 1e-10);
    }

    #[test]
    fn truncated_svd_tail_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(&mut rng, 6, 4);
        let full = oracles::singular_values_via_gram(&a);
        let t = truncated_svd(&a, 2).unwrap();
        let err2 = t.reconstruct().sub(&a).frobenius_norm().powi(2);
        let tail: f64 = full[2..].iter().map(|s| s * s).sum();
        assert!((err2 - tail).abs() < 1e-8, "err2 {err2} vs tail {tail}");
    }

    #[test]
    fn truncated_svd_rank_bounds() {
        let a = M::zeros(3, 2);
        assert!(truncated_svd(&a, 0).is_err());
        assert!(truncated_svd(&a, 3).is_err());
    }

    #[test]
    fn orthonormalize_drops_duplicates_keeps_orthogonal() {
        let e1 = M::from_columns(&[vec![1.0, 0.0, 0.0]]).unwrap();
        let dup = orthonormalize_augment(Some(&e1), &e1, 1e-8).unwrap();
        assert_eq!(dup.cols(), 1);
        let e2 = M::from_columns(&[vec![0.0, 1.0, 0.0]]).unwrap();
        let both = orthonormalize_augment(Some(&e1), &e2, 1e-8).unwrap();
        assert_eq!(both.cols(), 2);
        let gram = both.matmul_tn(&both);
        assert!(gram.sub(&M::identity(2)).max_abs() < 1e-12);
    }

    #[test]
    fn orthonormalize_random_span_matches_rank_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let existing_raw = random_matrix(&mut rng, 8, 2);
        let existing = orthonormalize_augment(None, &existing_raw, 1e-8).unwrap();
        let new_cols = random_matrix(&mut rng, 8, 3);
        let out = orthonormalize_augment(Some(&existing), &new_cols, 1e-8).unwrap();
        let gram = out.matmul_tn(&out);
        assert!(gram.sub(&M::identity(out.cols())).max_abs() < 1e-10);
        // span check via Gram-matrix rank oracle on the stacked columns
        let mut stacked = Vec::new();
        for j in 0..existing.cols() {
            stacked.push(existing.column(j));
        }
        for j in 0..new_cols.cols() {
            stacked.push(new_cols.column(j));
        }
        let combined = M::from_columns(&stacked).unwrap();
        let rank = oracles::rank_via_gram(&combined, 1e-10);
        assert_eq!(out.cols(), rank);
        // every input column reconstructs through the output basis
        for col in &stacked {
            let coeffs = out.matvec_t(col);
            let rec = out.matvec(&coeffs);
            let resid: f64 = col.iter().zip(&rec).map(|(a, b)| (a - b).powi(2)).sum();
            assert!(resid.sqrt() < 1e-8);
        }
    }

    #[test]
    fn orthonormalize_dimension_mismatch() {
        let e = M::identity(3);
        let n = M::zeros(4, 1);
        assert!(orthonormalize_augment(Some(&e), &n, 1e-8).is_err());
    }

    #[test]
    fn covariance_single_sample() {
        let h = M::from_rows(vec![vec![1.0, 2.0]]).unwrap();
        let c = covariance(&h).unwrap();
        let expect = M::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(c.sub(&expect).max_abs() < 1e-14);
    }

    #[test]
    fn covariance_basis_vectors() {
        let h = M::from_rows(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let c = covariance(&h).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j && i < 2 { 0.5 } else { 0.0 };
                assert!((c.get(i, j) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn covariance_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = random_matrix(&mut rng, 100, 5);
        let c = covariance(&h).unwrap();
        let oracle = oracles::naive_covariance(&h);
        assert!(c.sub(&oracle).max_abs() < 1e-12);
        assert!(covariance(&M::zeros(0, 3)).is_err());
    }

    #[test]
    fn projector_fully_aligned_and_cross_term() {
        let e1e1 = M::from_fn(2, 2, |i, j| if i == 0 && j == 0 { 1.0 } else { 0.0 });
        let prev = svd(&e1e1).unwrap();
        let out = project_orthogonal_complement(&e1e1, &prev).unwrap();
        assert!(out.max_abs() < 1e-12);
        let e1e2 = M::from_fn(2, 2, |i, j| if i == 0 && j == 1 { 1.0 } else { 0.0 });
        let out2 = project_orthogonal_complement(&e1e2, &prev).unwrap();
        assert!(out2.sub(&e1e2).max_abs() < 1e-12);
    }

    #[test]
    fn projector_random_matches_coefficient_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let base = random_matrix(&mut rng, 5, 4);
        let prev = svd(&base).unwrap();
        let delta = random_matrix(&mut rng, 5, 4);
        let out = project_orthogonal_complement(&delta, &prev).unwrap();
        for p in 0..prev.sigma.len() {
            let up = prev.u.column(p);
            let vp = prev.v.column(p);
            let c = dot(&up, &out.matvec(&vp));
            assert!(c.abs() < 1e-10, "diagonal coefficient {c} at {p}");
        }
        let oracle = oracles::coefficient_zeroing_projection(&delta, &prev.u, &prev.v);
        assert!(out.sub(&oracle).max_abs() < 1e-10);
        assert!((out.frobenius_norm() - oracle.frobenius_norm()).abs() < 1e-10);
    }

    #[test]
    fn projector_zero_prev_is_identity() {
        let prev = svd(&M::zeros(3, 3)).unwrap();
        let delta = M::from_fn(3, 3, |i, j| (i + 2 * j) as f64);
        let out = project_orthogonal_complement(&delta, &prev).unwrap();
        assert!(out.sub(&delta).max_abs() < 1e-14);
    }

    #[test]
    fn projector_dimension_mismatch() {
        let prev = svd(&M::identity(3)).unwrap();
        let delta = M::zeros(2, 2);
        assert!(project_orthogonal_complement(&delta, &prev).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn prop_svd_reconstructs(seed in 0u64..5000, m in 1usize..8, n in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, m, n);
            let r = svd(&a).unwrap();
            let denom = a.frobenius_norm().max(1e-30);
            prop_assert!(r.reconstruct().sub(&a).frobenius_norm() / denom < 1e-8);
            for w in r.sigma.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            let q = m.min(n);
            prop_assert!(r.u.matmul_tn(&r.u).sub(&M::identity(q)).max_abs() < 1e-10);
            prop_assert!(r.v.matmul_tn(&r.v).sub(&M::identity(q)).max_abs() < 1e-10);
        }

        #[test]
        fn prop_truncation_error_is_tail_sum(seed in 0u64..5000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 6, 5);
            let full = svd(&a).unwrap();
            let r = 1 + (seed as usize % 4);
            let t = truncated_svd(&a, r).unwrap();
            let err2 = t.reconstruct().sub(&a).frobenius_norm().powi(2);
            let tail: f64 = full.sigma[r..].iter().map(|s| s * s).sum();
            prop_assert!((err2 - tail).abs() < 1e-8);
        }

        #[test]
        fn prop_projector_idempotent(seed in 0u64..5000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let base = random_matrix(&mut rng, 5, 4);
            let prev = svd(&base).unwrap();
            let delta = random_matrix(&mut rng, 5, 4);
            let once = project_orthogonal_complement(&delta, &prev).unwrap();
            let twice = project_orthogonal_complement(&once, &prev).unwrap();
            prop_assert!(twice.sub(&once).max_abs() < 1e-10);
        }

        #[test]
        fn prop_orthonormalize_never_exceeds_rank(seed in 0u64..5000, cols in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let new_cols = random_matrix(&mut rng, 6, cols);
            let out = orthonormalize_augment(None, &new_cols, 1e-8).unwrap();
            let rank = oracles::rank_via_gram(&new_cols, 1e-10);
            prop_assert!(out.cols() <= rank);
            if out.cols() > 0 {
                let gram = out.matmul_tn(&out);
                prop_assert!(gram.sub(&M::identity(out.cols())).max_abs() < 1e-10);
            }
        }
    }
}
