//! Lawson–Hanson nonnegative least squares.

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

use super::decomp::pseudo_inverse;
use super::matrix::DenseMatrix;
use super::vector;

/// `argmin_{u ≥ 0} ‖Eu − f‖₂`.
pub fn nnls<T: Scalar>(e: &DenseMatrix<T>, f: &[T]) -> Result<Vec<T>> {
    check_dim(e.rows(), f.len())?;
    let m = e.cols();
    let mut u = vec![T::zero(); m];
    let mut passive = vec![false; m];
    let scale = e.max_abs().max(T::min_positive_value()) * (T::one() + vector::norm_inf(f));
    let tol = T::of(1e-12) * scale;
    let max_outer = 3 * m.max(1) + 10;
    for _ in 0..max_outer {
        let resid = vector::sub(f, &e.mul_vec(&u));
        let w = e.tr_mul_vec(&resid);
        let entering = (0..m)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap_or(std::cmp::Ordering::Equal));
        let Some(j) = entering else {
            return Ok(u);
        };
        passive[j] = true;
        for _ in 0..max_outer {
            let idx: Vec<usize> = (0..m).filter(|&i| passive[i]).collect();
            let sol = pseudo_inverse(&e.select_columns(&idx))?.mul_vec(f);
            if sol.iter().all(|&s| s > T::zero()) {
                for (k, &i) in idx.iter().enumerate() {
                    u[i] = sol[k];
                }
                break;
            }
            let mut alpha = T::one();
            for (k, &i) in idx.iter().enumerate() {
                if sol[k] <= T::zero() {
                    let a = u[i] / (u[i] - sol[k]);
                    alpha = alpha.min(a);
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                u[i] = u[i] + alpha * (sol[k] - u[i]);
                if u[i] <= T::zero() || (sol[k] <= T::zero() && u[i] <= tol) {
                    u[i] = T::zero();
                    passive[i] = false;
                }
            }
        }
    }
    Err(Error::Numerical {
        message: "nonnegative least squares did not terminate".into(),
        residual: vector::norm2(&vector::sub(f, &e.mul_vec(&u))).as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_solution_when_positive() {
        let e = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]]).unwrap();
        let u: Vec<f64> = nnls(&e, &[3.0, 4.0, 1.0]).unwrap();
        assert!((u[0] - 3.0).abs() < 1e-12 && (u[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn negative_direction_is_clamped() {
        let e = DenseMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        // unconstrained solution (3, −1)
        let u: Vec<f64> = nnls(&e, &[2.0, -1.0]).unwrap();
        assert_eq!(u[1], 0.0);
        assert!((u[0] - 2.0).abs() < 1e-12);
    }
}
