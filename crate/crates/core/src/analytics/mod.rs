//! Post-hoc diagnostics for trajectories of ℓ1 problems.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{symmetric_eigen, vector, DenseMatrix};
use crate::problem::{CompositeProblem, PolyhedralSystem};
use crate::scalar::Scalar;
use crate::solver::{Trajectory, ACTIVE_TOL, DESCENT_SLACK};

pub use crate::solver::{active_set, IndexSet};

/// Default tolerance for classifying LASSO optimality conditions.
pub const KKT_TOL: f64 = 1e-7;

/// `|a∩b| / |a∪b|`, with two empty sets scoring 1.
pub fn jaccard(a: &IndexSet, b: &IndexSet) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

fn split_l1<T: Scalar>(delta: &[T], support: &IndexSet) -> (T, T) {
    let mut on = T::zero();
    let mut off = T::zero();
    for (i, d) in delta.iter().enumerate() {
        if support.contains(&i) {
            on = on + d.abs();
        } else {
            off = off + d.abs();
        }
    }
    (on, off)
}

/// `‖Δ_{Sᶜ}‖₁ / ‖Δ_S‖₁` for `Δ = x − β̂`; `0/0 = 0`, `c/0 = +∞`.
pub fn cone_ratio<T: Scalar>(x: &[T], beta_hat: &[T], support: &IndexSet) -> Result<T> {
    check_dim(beta_hat.len(), x.len())?;
    if support.is_empty() {
        return Err(Error::Input("cone ratio needs a nonempty support".into()));
    }
    if let Some(&i) = support.iter().next_back() {
        if i >= x.len() {
            return Err(Error::Input(format!("support index {i} out of range")));
        }
    }
    let (on, off) = split_l1(&vector::sub(x, beta_hat), support);
    Ok(if on == T::zero() {
        if off == T::zero() {
            T::zero()
        } else {
            T::infinity()
        }
    } else {
        off / on
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeRow<T> {
    pub k: usize,
    pub off_support_l1: T,
    pub on_support_l1: T,
    /// `δ_k = F_k − F̂`
    pub gap: T,
    /// `3‖Δ_Â‖₁ + 2δ_k/η`
    pub rhs: T,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeMetrics<T> {
    pub support: IndexSet,
    pub rows: Vec<ConeRow<T>>,
    pub violations: usize,
}

impl<T> ConeMetrics<T> {
    pub fn all_hold(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `‖Δ_{Âᶜ}‖₁ ≤ 3‖Δ_Â‖₁ + 2(F_k − F̂)/η` on every record that stores
/// its iterate, with `Â` the support of `β̂`.
pub fn cone_lemma_check<T: Scalar>(
    traj: &Trajectory<T>,
    beta_hat: &[T],
    eta: T,
    f_hat: T,
) -> Result<ConeMetrics<T>> {
    let slack = T::of(DESCENT_SLACK);
    let mut gaps = Vec::with_capacity(traj.records.len());
    for r in &traj.records {
        if f_hat > r.objective + slack {
            return Err(Error::Input(format!(
                "F̂ = {f_hat} exceeds the objective {} at iteration {}",
                r.objective, r.k
            )));
        }
        gaps.push(Some(r.objective - f_hat));
    }
    cone_lemma_from_gaps(traj, beta_hat, eta, &gaps)
}

/// As [`cone_lemma_check`] with precomputed gaps (one per record).
pub fn cone_lemma_from_gaps<T: Scalar>(
    traj: &Trajectory<T>,
    beta_hat: &[T],
    eta: T,
    gaps: &[Option<T>],
) -> Result<ConeMetrics<T>> {
    check_dim(traj.records.len(), gaps.len())?;
    if !(eta > T::zero()) {
        return Err(Error::Input(format!("eta must be positive, got {eta}")));
    }
    let support = active_set(beta_hat, T::of(ACTIVE_TOL));
    let mut rows = Vec::new();
    let mut violations = 0;
    for (r, gap) in traj.records.iter().zip(gaps) {
        let (Some(x), Some(gap)) = (&r.x, gap) else {
            continue;
        };
        check_dim(beta_hat.len(), x.len())?;
        let gap = gap.max(T::zero());
        let (on, off) = split_l1(&vector::sub(x, beta_hat), &support);
        let rhs = T::of(3.0) * on + T::of(2.0) * gap / eta;
        let holds = off <= rhs + T::of(1e-12);
        if !holds {
            violations += 1;
        }
        rows.push(ConeRow {
            k: r.k,
            off_support_l1: off,
            on_support_l1: on,
            gap,
            rhs,
            holds,
        });
    }
    Ok(ConeMetrics {
        support,
        rows,
        violations,
    })
}

/// First iteration index from which every recorded active set equals
/// `reference`; `None` if the final one differs.
pub fn identification_time<T>(traj: &Trajectory<T>, reference: &IndexSet) -> Option<usize> {
    let mut t = None;
    for r in traj.records.iter().rev() {
        if &r.active_set != reference {
            break;
        }
        t = Some(r.k);
    }
    t
}

#[derive(Clone, Debug, PartialEq)]
pub struct LassoOptimalityData<T> {
    pub beta_hat: Vec<T>,
    /// `ŝ = −∇f(β̂)`, the dual certificate.
    pub s_hat: Vec<T>,
    pub i0: IndexSet,
    pub iplus: IndexSet,
    pub iminus: IndexSet,
    /// `min_{i∈I₀} (η − |ŝ_i|)`, `+∞` when `I₀` is empty.
    pub delta_star: T,
    pub eta: T,
}

impl<T: Scalar> LassoOptimalityData<T> {
    pub fn dim(&self) -> usize {
        self.beta_hat.len()
    }

    /// Rows `±e_i` encoding the sign pattern: `β_{I₀} = 0`, `β_{I₊} ≥ 0`,
    /// `β_{I₋} ≤ 0` as `Bβ ≤ 0`.
    pub fn b_matrix(&self) -> DenseMatrix<T> {
        let d = self.dim();
        let mut rows: Vec<Vec<T>> = Vec::new();
        let unit = |i: usize, s: T| {
            let mut e = vec![T::zero(); d];
            e[i] = s;
            e
        };
        for i in 0..d {
            if self.i0.contains(&i) {
                rows.push(unit(i, T::one()));
                rows.push(unit(i, -T::one()));
            } else if self.iplus.contains(&i) {
                rows.push(unit(i, -T::one()));
            } else if self.iminus.contains(&i) {
                rows.push(unit(i, T::one()));
            }
        }
        if rows.is_empty() {
            return DenseMatrix::zeros(0, d);
        }
        DenseMatrix::from_rows(&rows).expect("rows share the dimension")
    }

    /// `‖B‖₂`: every column of `B` has one or two unit entries and distinct
    /// columns never share a row, so `BᵀB` is diagonal with entries 1 or 2.
    pub fn b_norm(&self) -> T {
        if !self.i0.is_empty() {
            T::of(2.0).sqrt()
        } else if self.iplus.is_empty() && self.iminus.is_empty() {
            T::zero()
        } else {
            T::one()
        }
    }

    /// The optimal set `{β : Aβ = Aβ̂, Bβ ≤ 0}`.
    pub fn optimal_set_system(&self, a: &DenseMatrix<T>) -> Result<PolyhedralSystem<T>> {
        let b = self.b_matrix();
        let zeros = vec![T::zero(); b.rows()];
        PolyhedralSystem::new(a.clone(), a.mul_vec(&self.beta_hat), b, zeros)
    }
}

/// Classifies the optimality conditions of an ℓ1 problem at `beta_hat`.
pub fn lasso_optimality_data<T: Scalar>(
    p: &CompositeProblem<T>,
    beta_hat: &[T],
    kkt_tol: T,
) -> Result<LassoOptimalityData<T>> {
    let eta = p
        .eta()
        .ok_or_else(|| Error::Input(format!("expected an l1 problem, got {}", p.reg.name())))?;
    let grad = p.gradient_f(beta_hat)?;
    let s_hat: Vec<T> = grad.iter().map(|&g| -g).collect();
    let active_tol = T::of(ACTIVE_TOL);
    let mut i0 = IndexSet::new();
    let mut iplus = IndexSet::new();
    let mut iminus = IndexSet::new();
    let mut delta_star = T::infinity();
    for (i, (&s, &b)) in s_hat.iter().zip(beta_hat).enumerate() {
        let kkt_ok = if b.abs() > active_tol {
            (s - eta * b.signum()).abs() <= kkt_tol
        } else {
            s.abs() <= eta + kkt_tol
        };
        if !kkt_ok {
            return Err(Error::NotOptimal(format!(
                "coordinate {i}: β = {b}, ŝ = {s}, η = {eta}"
            )));
        }
        let near_plus = (s - eta).abs() <= kkt_tol;
        let near_minus = (s + eta).abs() <= kkt_tol;
        if near_plus && near_minus {
            return Err(Error::Classification(format!(
                "coordinate {i}: ŝ = {s} is within tolerance of both ±η"
            )));
        }
        if near_plus {
            iplus.insert(i);
        } else if near_minus {
            iminus.insert(i);
        } else if s.abs() < eta - kkt_tol {
            i0.insert(i);
            delta_star = delta_star.min(eta - s.abs());
        } else {
            return Err(Error::Classification(format!(
                "coordinate {i}: |ŝ| = {} is within tolerance of neither η nor the interior",
                s.abs()
            )));
        }
    }
    Ok(LassoOptimalityData {
        beta_hat: beta_hat.to_vec(),
        s_hat,
        i0,
        iplus,
        iminus,
        delta_star,
        eta,
    })
}

/// `(A, y, γ)` for `½‖Aβ − y‖² + γ‖β‖₁`, the rescaling of an ℓ1 problem
/// with the same minimizers (`γ = nη` for the normalized loss).
fn lasso_parts<T: Scalar>(p: &CompositeProblem<T>) -> Result<(&DenseMatrix<T>, &[T], T, T)> {
    let eta = p
        .eta()
        .ok_or_else(|| Error::Input(format!("expected an l1 problem, got {}", p.reg.name())))?;
    match (p.design(), p.targets()) {
        (Some(a), Some(y)) => {
            let scale = if p.is_normalized() {
                T::of_usize(a.rows())
            } else {
                T::one()
            };
            Ok((a, y, eta, scale * eta))
        }
        _ => Err(Error::Input("expected a least-squares loss".into())),
    }
}

/// `A_SᵀA_S z = A_Sᵀy − γθ`, or `None` when `A_S` is numerically rank
/// deficient.
fn sign_fixed_solve<T: Scalar>(
    a: &DenseMatrix<T>,
    y: &[T],
    gamma: T,
    support: &[usize],
    theta: &[T],
) -> Result<Option<Vec<T>>> {
    let a_s = a.select_columns(support);
    let rhs: Vec<T> = a_s
        .tr_mul_vec(y)
        .iter()
        .zip(theta)
        .map(|(&v, &t)| v - gamma * t)
        .collect();
    let eig = symmetric_eigen(&a_s.gram())?;
    let top = eig.values[eig.values.len() - 1];
    if !(eig.values[0] > T::of(1e-12) * top) {
        return Ok(None);
    }
    let coef: Vec<T> = (0..support.len())
        .map(|k| vector::dot(&eig.vectors.column(k), &rhs) / eig.values[k])
        .collect();
    Ok(Some(
        (0..support.len())
            .map(|j| (0..support.len()).map(|k| eig.vectors.get(j, k) * coef[k]).sum())
            .collect(),
    ))
}

/// Solves the LASSO optimality conditions with the support and signs of
/// `x` held fixed: `A_SᵀA_S β_S = A_Sᵀy − c·η·sign(x_S)` (`c = n` for the
/// normalized loss). Returns the candidate only if its signs agree with `x`
/// and the off-support conditions `|ŝ_i| ≤ η` hold.
pub fn lasso_polish<T: Scalar>(p: &CompositeProblem<T>, x: &[T]) -> Result<Option<Vec<T>>> {
    let (a, y, eta, gamma) = lasso_parts(p)?;
    check_dim(a.cols(), x.len())?;
    let support: Vec<usize> = active_set(x, T::of(ACTIVE_TOL)).into_iter().collect();
    let mut beta = vec![T::zero(); x.len()];
    if !support.is_empty() {
        let theta: Vec<T> = support.iter().map(|&i| x[i].signum()).collect();
        let Some(z) = sign_fixed_solve(a, y, gamma, &support, &theta)? else {
            return Ok(None);
        };
        for ((&i, &v), &t) in support.iter().zip(&z).zip(&theta) {
            if v.signum() != t || v == T::zero() {
                return Ok(None);
            }
            beta[i] = v;
        }
    }
    let grad = p.gradient_f(&beta)?;
    let tol = T::of(1e-12) * (T::one() + eta);
    if grad.iter().any(|g| g.abs() > eta + tol) {
        return Ok(None);
    }
    Ok(Some(beta))
}

/// Exact LASSO minimizer by sign search: grow the active set by the most
/// violated optimality condition, solve the sign-fixed equations and line
/// search over sign changes. The result is confirmed by [`lasso_polish`];
/// `None` when that fails within `max_iter` steps.
pub fn lasso_sign_search<T: Scalar>(
    p: &CompositeProblem<T>,
    x0: &[T],
    max_iter: usize,
) -> Result<Option<Vec<T>>> {
    let (a, y, _, gamma) = lasso_parts(p)?;
    check_dim(a.cols(), x0.len())?;
    let d = x0.len();
    let tol = T::of(1e-9) * gamma.max(T::of(1e-300));
    let objective = |x: &[T]| {
        let r = vector::sub(&a.mul_vec(x), y);
        T::of(0.5) * vector::dot(&r, &r) + gamma * vector::norm1(x)
    };
    let mut x = x0.to_vec();
    let mut theta: Vec<T> = x.iter().map(|v| if *v == T::zero() { T::zero() } else { v.signum() }).collect();
    for _ in 0..max_iter {
        let g = a.tr_mul_vec(&vector::sub(&a.mul_vec(&x), y));
        let active_ok = (0..d)
            .filter(|&i| x[i] != T::zero())
            .all(|i| (g[i] + gamma * theta[i]).abs() <= tol);
        if active_ok {
            let mut best: Option<(usize, T)> = None;
            for i in (0..d).filter(|&i| x[i] == T::zero()) {
                if best.map_or(true, |(_, v)| g[i].abs() > v) {
                    best = Some((i, g[i].abs()));
                }
            }
            match best {
                Some((j, v)) if v > gamma + tol => theta[j] = -g[j].signum(),
                _ => return lasso_polish(p, &x),
            }
        }
        let support: Vec<usize> = (0..d).filter(|&i| theta[i] != T::zero()).collect();
        let th: Vec<T> = support.iter().map(|&i| theta[i]).collect();
        let Some(z) = sign_fixed_solve(a, y, gamma, &support, &th)? else {
            return Ok(None);
        };
        // candidate steps: the full step and every zero crossing
        let mut steps = vec![T::one()];
        for (k, &i) in support.iter().enumerate() {
            if x[i] != T::zero() && z[k].signum() != theta[i] {
                let t = x[i] / (x[i] - z[k]);
                if t > T::zero() && t < T::one() {
                    steps.push(t);
                }
            }
        }
        let mut best_x = x.clone();
        let mut best_f = T::infinity();
        for &t in &steps {
            let mut cand = x.clone();
            for (k, &i) in support.iter().enumerate() {
                let v = x[i] + t * (z[k] - x[i]);
                // snap the coordinate that crosses at this step
                let crosses = x[i] != T::zero() && (x[i] / (x[i] - z[k]) - t).abs() <= T::epsilon() * T::of(16.0);
                cand[i] = if crosses { T::zero() } else { v };
            }
            let f = objective(&cand);
            if f < best_f {
                best_f = f;
                best_x = cand;
            }
        }
        x = best_x;
        for i in 0..d {
            theta[i] = if x[i] == T::zero() { T::zero() } else { x[i].signum() };
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests;
