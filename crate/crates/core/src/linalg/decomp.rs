//! One-sided Jacobi SVD and cyclic Jacobi symmetric eigensolver.
//!
//! Both are plain dense kernels sized for matrices up to a few thousand
//! entries per side. They are deterministic: the rotation order is fixed.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::matrix::DenseMatrix;
use super::vector;

const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `M = U diag(s) Vᵀ`, `k = min(rows, cols)`.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    /// rows × k
    pub u: DenseMatrix<T>,
    /// nonincreasing, length k
    pub s: Vec<T>,
    /// cols × k
    pub v: DenseMatrix<T>,
}

fn validate<T: Scalar>(m: &DenseMatrix<T>) -> Result<()> {
    if m.is_empty() {
        return Err(Error::Input("matrix is empty".into()));
    }
    if !vector::all_finite(m.as_slice()) {
        return Err(Error::Input("matrix has a non-finite entry".into()));
    }
    Ok(())
}

/// Hestenes rotations on the columns of `w` (stored column-wise). Returns the
/// accumulated right rotations when `want_v` is set.
fn hestenes<T: Scalar>(w: &mut [Vec<T>], want_v: bool) -> Option<Vec<Vec<T>>> {
    let n = w.len();
    let mut v: Option<Vec<Vec<T>>> = want_v.then(|| {
        (0..n)
            .map(|j| {
                let mut e = vec![T::zero(); n];
                e[j] = T::one();
                e
            })
            .collect()
    });
    let tol = T::epsilon() * T::of(4.0);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = vector::dot(&w[p], &w[p]);
                let beta = vector::dot(&w[q], &w[q]);
                let gamma = vector::dot(&w[p], &w[q]);
                if gamma == T::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::of(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = w.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
                if let Some(v) = v.as_mut() {
                    let (lo, hi) = v.split_at_mut(q);
                    rotate(&mut lo[p], &mut hi[0], c, s);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    v
}

#[inline]
fn rotate<T: Scalar>(a: &mut [T], b: &mut [T], c: T, s: T) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Column-major copy of the orientation with `rows >= cols`.
fn tall_columns<T: Scalar>(m: &DenseMatrix<T>) -> (Vec<Vec<T>>, bool) {
    let transposed = m.rows() < m.cols();
    let cols: Vec<Vec<T>> = if transposed {
        (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
    } else {
        (0..m.cols()).map(|j| m.column(j)).collect()
    };
    (cols, transposed)
}

fn descending_order<T: Scalar>(s: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal));
    order
}

/// Singular values in nonincreasing order, `min(rows, cols)` of them.
pub fn singular_values<T: Scalar>(m: &DenseMatrix<T>) -> Result<Vec<T>> {
    validate(m)?;
    let (mut w, _) = tall_columns(m);
    hestenes(&mut w, false);
    let mut s: Vec<T> = w.iter().map(|c| vector::norm2(c)).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(s)
}

pub fn svd<T: Scalar>(m: &DenseMatrix<T>) -> Result<Svd<T>> {
    validate(m)?;
    let (mut w, transposed) = tall_columns(m);
    let rot = hestenes(&mut w, true).expect("rotations requested");
    let norms: Vec<T> = w.iter().map(|c| vector::norm2(c)).collect();
    let order = descending_order(&norms);
    let k = w.len();
    let tall = w[0].len();
    let mut left = DenseMatrix::zeros(tall, k);
    let mut right = DenseMatrix::zeros(k, k);
    let mut s = Vec::with_capacity(k);
    for (jj, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        s.push(sigma);
        if sigma > T::zero() {
            for i in 0..tall {
                left.set(i, jj, w[j][i] / sigma);
            }
        }
        for i in 0..k {
            right.set(i, jj, rot[j][i]);
        }
    }
    let (u, v) = if transposed { (right, left) } else { (left, right) };
    Ok(Svd { u, s, v })
}

/// Default rank tolerance: `1e-10 · σ_max`.
pub fn default_zero_tol<T: Scalar>(sigma_max: T) -> T {
    T::of(1e-10) * sigma_max
}

/// `min { σ : σ > zero_tol }`.
pub fn smallest_nonzero_singular<T: Scalar>(m: &DenseMatrix<T>, zero_tol: T) -> Result<T> {
    let s = singular_values(m)?;
    s.iter()
        .rev()
        .copied()
        .find(|&v| v > zero_tol)
        .ok_or_else(|| Error::Degenerate(format!("no singular value above {zero_tol}")))
}

/// Smallest nonzero singular value with the relative default tolerance.
pub fn sigma_min_plus<T: Scalar>(m: &DenseMatrix<T>) -> Result<T> {
    let s = singular_values(m)?;
    let tol = default_zero_tol(s[0]);
    s.iter()
        .rev()
        .copied()
        .find(|&v| v > tol)
        .ok_or_else(|| Error::Degenerate("matrix is numerically zero".into()))
}

pub fn operator_norm<T: Scalar>(m: &DenseMatrix<T>) -> Result<T> {
    Ok(singular_values(m)?[0])
}

/// `σ_max(A)²`, divided by the row count when `normalized`.
pub fn smoothness_constant<T: Scalar>(a: &DenseMatrix<T>, normalized: bool) -> Result<T> {
    let smax = operator_norm(a)?;
    let l = smax * smax;
    Ok(if normalized { l / T::of_usize(a.rows()) } else { l })
}

/// Moore–Penrose pseudo-inverse (cols × rows) with the default rank tolerance.
pub fn pseudo_inverse<T: Scalar>(m: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let Svd { u, s, v } = svd(m)?;
    let tol = default_zero_tol(s[0]);
    let mut out = DenseMatrix::zeros(m.cols(), m.rows());
    for (k, &sigma) in s.iter().enumerate() {
        if sigma <= tol || sigma == T::zero() {
            continue;
        }
        let inv = T::one() / sigma;
        for i in 0..m.cols() {
            let vik = v.get(i, k) * inv;
            if vik == T::zero() {
                continue;
            }
            for j in 0..m.rows() {
                out.set(i, j, out.get(i, j) + vik * u.get(j, k));
            }
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    /// ascending
    pub values: Vec<T>,
    /// column `k` is the unit eigenvector for `values[k]`
    pub vectors: DenseMatrix<T>,
}

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix.
pub fn symmetric_eigen<T: Scalar>(m: &DenseMatrix<T>) -> Result<SymmetricEigen<T>> {
    validate(m)?;
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::Dimension {
            expected: n,
            got: m.cols(),
        });
    }
    let scale = m.max_abs().max(T::min_positive_value());
    if !m.is_symmetric(T::of(1e-10) * scale) {
        return Err(Error::Input("matrix is not symmetric".into()));
    }
    let mut a: Vec<Vec<T>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let mut e = vec![T::zero(); n];
            e[i] = T::one();
            e
        })
        .collect();
    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off <= T::epsilon() * T::epsilon() * scale * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::of(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (T::one() + theta * theta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let diag: Vec<T> = (0..n).map(|i| a[i][i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| diag[x].partial_cmp(&diag[y]).unwrap_or(std::cmp::Ordering::Equal));
    let mut vectors = DenseMatrix::zeros(n, n);
    for (kk, &k) in order.iter().enumerate() {
        for (i, row) in v.iter().enumerate() {
            vectors.set(i, kk, row[k]);
        }
    }
    Ok(SymmetricEigen {
        values: order.iter().map(|&k| diag[k]).collect(),
        vectors,
    })
}

/// Orthonormal basis (as columns) of `{x : wᵀx = 0}` in `ℝⁿ` for nonzero `w`.
pub fn orthogonal_complement<T: Scalar>(w: &[T]) -> Result<DenseMatrix<T>> {
    let n = w.len();
    let nw = vector::norm2(w);
    if nw == T::zero() {
        return Err(Error::Degenerate("zero normal vector".into()));
    }
    // Householder reflector mapping w/‖w‖ to ±e₁; its remaining columns span w⊥.
    let mut u: Vec<T> = w.iter().map(|&x| x / nw).collect();
    let sign = if u[0] >= T::zero() { T::one() } else { -T::one() };
    u[0] = u[0] + sign;
    let uu = vector::dot(&u, &u);
    let mut basis = DenseMatrix::zeros(n, n.saturating_sub(1));
    for j in 1..n {
        let f = T::of(2.0) * u[j] / uu;
        for i in 0..n {
            let e = if i == j { T::one() } else { T::zero() };
            basis.set(i, j - 1, e - f * u[i]);
        }
    }
    Ok(basis)
}
