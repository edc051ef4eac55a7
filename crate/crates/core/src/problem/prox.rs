use crate::error::{Error, Result};
use crate::linalg::vector;
use crate::scalar::Scalar;

pub const BISECTION_MAX_ITER: usize = 200;
pub const BISECTION_TOL: f64 = 1e-12;

#[inline]
pub fn soft_threshold<T: Scalar>(v: T, t: T) -> T {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        T::zero()
    }
}

pub fn soft_threshold_vec<T: Scalar>(v: &[T], t: T) -> Vec<T> {
    v.iter().map(|&x| soft_threshold(x, t)).collect()
}

fn clip_shift<T: Scalar>(v: &[T], labels: &[T], c: T, tau: T) -> Vec<T> {
    v.iter()
        .zip(labels)
        .map(|(&vi, &yi)| (vi - tau * yi).max(T::zero()).min(c))
        .collect()
}

/// Projection onto `{x : yᵀx = 0, 0 ≤ x ≤ C}` for labels `y ∈ {±1}ⁿ`.
///
/// The multiplier `τ` in `x = clip(v − τy, 0, C)` is found by bisection on
/// the nonincreasing map `τ ↦ yᵀx(τ)`, then refined by one exact linear solve
/// over the coordinates strictly inside the box.
pub fn project_box_hyperplane<T: Scalar>(v: &[T], labels: &[T], c: T) -> Result<Vec<T>> {
    let phi = |tau: T| vector::dot(labels, &clip_shift(v, labels, c, tau));
    let tol = T::of(BISECTION_TOL);
    let mut width = vector::norm2(v) + c;
    let (mut lo, mut hi) = (-width, width);
    // φ(lo) ≥ 0 ≥ φ(hi) holds for any |τ| ≥ ‖v‖∞ + C; expanding is a guard.
    while phi(lo) < T::zero() || phi(hi) > T::zero() {
        width = width * T::of(2.0);
        lo = -width;
        hi = width;
        if !width.is_finite() {
            return Err(Error::Numerical {
                message: "multiplier bracket diverged".into(),
                residual: f64::NAN,
            });
        }
    }
    let mut tau = T::zero();
    let mut res = phi(tau);
    for _ in 0..BISECTION_MAX_ITER {
        if res.abs() <= tol {
            break;
        }
        if res > T::zero() {
            lo = tau;
        } else {
            hi = tau;
        }
        tau = (lo + hi) * T::of(0.5);
        res = phi(tau);
    }
    let mut x = clip_shift(v, labels, c, tau);
    let free: Vec<usize> = (0..v.len()).filter(|&i| x[i] > T::zero() && x[i] < c).collect();
    if !free.is_empty() && res != T::zero() {
        let polished = tau + res / T::of_usize(free.len());
        let cand = clip_shift(v, labels, c, polished);
        let same_face = free.iter().all(|&i| cand[i] > T::zero() && cand[i] < c);
        let r2 = vector::dot(labels, &cand);
        if same_face && r2.abs() <= res.abs() {
            x = cand;
            res = r2;
        }
    }
    let scale = T::one().max(c);
    if res.abs() > T::of(1e-10) * scale {
        return Err(Error::Numerical {
            message: "hyperplane multiplier bisection did not converge".into(),
            residual: res.as_f64(),
        });
    }
    Ok(x)
}
