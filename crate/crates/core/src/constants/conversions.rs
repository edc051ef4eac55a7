//! Closed-form conversions between PL, EB, QG, Hoffman and firm-convexity
//! constants.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn positive<T: Scalar>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && !v.is_nan() {
        Ok(())
    } else {
        Err(Error::Input(format!("{name} must be positive, got {v}")))
    }
}

/// `ν = α/H²` for an indicator regularizer over a polyhedron.
pub fn pl_from_hoffman_indicator<T: Scalar>(alpha: T, h_k: T) -> Result<T> {
    positive("alpha", alpha)?;
    positive("H", h_k)?;
    Ok(alpha / (h_k * h_k))
}

/// `μ = 1/L + 2/ν`.
pub fn eb_from_pl<T: Scalar>(nu: T, l: T) -> Result<T> {
    positive("nu", nu)?;
    positive("L", l)?;
    Ok(T::one() / l + T::of(2.0) / nu)
}

/// `ν = L/(1 + 4L²μ²)`.
pub fn pl_from_eb<T: Scalar>(mu: T, l: T) -> Result<T> {
    positive("mu", mu)?;
    positive("L", l)?;
    Ok(l / (T::one() + T::of(4.0) * l * l * mu * mu))
}

/// Error-bound constant for a polyhedral nonsmooth regularizer:
/// `1/L + (8/α)H²(1 + ‖B‖L/γ)² + 8H‖B‖/γ`.
pub fn eb_polyhedral_nonsmooth<T: Scalar>(l: T, alpha: T, h_k: T, b_norm: T, gamma_k: T) -> Result<T> {
    positive("L", l)?;
    positive("alpha", alpha)?;
    positive("H", h_k)?;
    positive("gamma", gamma_k)?;
    if b_norm < T::zero() {
        return Err(Error::Input(format!("‖B‖ must be nonnegative, got {b_norm}")));
    }
    let eight = T::of(8.0);
    let t = T::one() + b_norm * l / gamma_k;
    Ok(T::one() / l + eight / alpha * h_k * h_k * t * t + eight * h_k * b_norm / gamma_k)
}

/// `ν = γ/2`, valid when `L ≥ γ/2`.
pub fn pl_from_qg<T: Scalar>(gamma_k: T, l: T) -> Result<T> {
    positive("gamma", gamma_k)?;
    positive("L", l)?;
    let nu = gamma_k / T::of(2.0);
    if l < nu {
        return Err(Error::Precondition(format!("L = {l} is below γ/2 = {nu}")));
    }
    Ok(nu)
}

/// LASSO firm-convexity lower bound `2/max(F₀/(ηδ*), F₀/(2η²))`; an infinite
/// margin keeps only the second term.
pub fn firm_convexity_lb_lasso<T: Scalar>(f_beta0: T, eta: T, delta_star: T) -> Result<T> {
    positive("F(β⁰)", f_beta0)?;
    positive("eta", eta)?;
    positive("delta*", delta_star)?;
    let second = f_beta0 / (T::of(2.0) * eta * eta);
    let worst = if delta_star.is_infinite() {
        second
    } else {
        (f_beta0 / (eta * delta_star)).max(second)
    };
    Ok(T::of(2.0) / worst)
}
