//! Instrumented proximal gradient method.

use std::collections::BTreeSet;

use crate::error::{check_dim, Error, Result};
use crate::linalg::vector;
use crate::problem::CompositeProblem;
use crate::scalar::Scalar;

pub type IndexSet = BTreeSet<usize>;

/// Coordinates with `|x_i|` above this count as active.
pub const ACTIVE_TOL: f64 = 1e-10;
/// Slack allowed on per-step descent and on `F*` comparisons.
pub const DESCENT_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepPolicy<T> {
    /// `1/L` with `L` the global smoothness constant.
    GlobalL,
    Fixed(T),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub step_policy: StepPolicy<T>,
    pub max_iter: usize,
    pub gradmap_tol: T,
    /// Full iterates are stored every `record_every` steps (and at the end);
    /// scalar diagnostics are stored at every step.
    pub record_every: usize,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            step_policy: StepPolicy::GlobalL,
            max_iter: 10_000,
            gradmap_tol: T::of(1e-9),
            record_every: 1,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::Input("max_iter must be at least 1".into()));
        }
        if !(self.gradmap_tol > T::zero()) {
            return Err(Error::Input("gradmap_tol must be positive".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Input("record_every must be at least 1".into()));
        }
        if let StepPolicy::Fixed(s) = self.step_policy {
            if !(s > T::zero() && s.is_finite()) {
                return Err(Error::Input(format!("step must be positive, got {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterateRecord<T> {
    pub k: usize,
    pub x: Option<Vec<T>>,
    pub objective: T,
    pub gradmap_norm: T,
    pub active_set: IndexSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Tolerance,
    MaxIter,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub records: Vec<IterateRecord<T>>,
    pub terminated_by: Termination,
    pub step: T,
    pub final_x: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn objectives(&self) -> Vec<T> {
        self.records.iter().map(|r| r.objective).collect()
    }

    pub fn final_objective(&self) -> T {
        self.records.last().map_or(T::nan(), |r| r.objective)
    }

    pub fn converged(&self) -> bool {
        self.terminated_by == Termination::Tolerance
    }

    /// `F(x_k) − F(x_ref)` for every record holding its iterate, via
    /// [`CompositeProblem::objective_gap`].
    pub fn gaps(&self, p: &CompositeProblem<T>, x_ref: &[T]) -> Result<Vec<Option<T>>> {
        self.records
            .iter()
            .map(|r| r.x.as_ref().map(|x| p.objective_gap(x, x_ref)).transpose())
            .collect()
    }
}

pub fn active_set<T: Scalar>(x: &[T], tol: T) -> IndexSet {
    x.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > tol)
        .map(|(i, _)| i)
        .collect()
}

pub fn resolve_step<T: Scalar>(p: &CompositeProblem<T>, policy: StepPolicy<T>) -> Result<T> {
    match policy {
        StepPolicy::Fixed(s) => Ok(s),
        StepPolicy::GlobalL => {
            let l = p.smoothness_constant()?;
            if !(l > T::zero()) {
                return Err(Error::Degenerate("smooth part has zero curvature".into()));
            }
            Ok(T::one() / l)
        }
    }
}

/// Runs `x_{k+1} = prox(x_k − step·∇f(x_k), step)` from `x0`, recording
/// `k = 0, 1, …` until `‖G_step(x_k)‖ ≤ gradmap_tol` or `k = max_iter`.
pub fn run<T: Scalar>(
    p: &CompositeProblem<T>,
    cfg: &SolverConfig<T>,
    x0: &[T],
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    check_dim(p.dim(), x0.len())?;
    if !vector::all_finite(x0) {
        return Err(Error::Input("x0 has a non-finite entry".into()));
    }
    if !p.reg.value(x0)?.is_finite() {
        return Err(Error::Input("x0 lies outside the domain of g".into()));
    }
    let step = resolve_step(p, cfg.step_policy)?;
    let tol_active = T::of(ACTIVE_TOL);
    let mut records = Vec::new();
    let mut x = x0.to_vec();
    let mut k = 0;
    loop {
        let objective = p.objective(&x)?;
        if !objective.is_finite() {
            return Err(Error::Numerical {
                message: format!("objective is not finite at iteration {k}"),
                residual: objective.as_f64(),
            });
        }
        let grad = p.gradient_f(&x)?;
        let next = p.prox_step(&x, &grad, step)?;
        let gm: Vec<T> = x.iter().zip(&next).map(|(&a, &b)| (a - b) / step).collect();
        let gradmap_norm = vector::norm2(&gm);
        if !gradmap_norm.is_finite() {
            return Err(Error::Numerical {
                message: format!("gradient mapping is not finite at iteration {k}"),
                residual: gradmap_norm.as_f64(),
            });
        }
        let terminated = if gradmap_norm <= cfg.gradmap_tol {
            Some(Termination::Tolerance)
        } else if k == cfg.max_iter {
            Some(Termination::MaxIter)
        } else {
            None
        };
        let keep_x = terminated.is_some() || k % cfg.record_every == 0;
        records.push(IterateRecord {
            k,
            x: keep_x.then(|| x.clone()),
            objective,
            gradmap_norm,
            active_set: active_set(&x, tol_active),
        });
        if let Some(terminated_by) = terminated {
            return Ok(Trajectory {
                records,
                terminated_by,
                step,
                final_x: x,
            });
        }
        x = next;
        k += 1;
    }
}

/// Long run used to stand in for the unknown optimum: tolerance `1e-12` and
/// ten times the iteration budget of `cfg`. Only the final iterate is kept.
pub fn reference_solve<T: Scalar>(
    p: &CompositeProblem<T>,
    cfg: &SolverConfig<T>,
    x0: &[T],
) -> Result<Trajectory<T>> {
    let max_iter = cfg.max_iter.saturating_mul(10);
    let ref_cfg = SolverConfig {
        step_policy: cfg.step_policy,
        max_iter,
        gradmap_tol: T::of(1e-12),
        record_every: max_iter.max(1),
    };
    run(p, &ref_cfg, x0)
}

/// `(F_{k+1} − F*)/(F_k − F*)` over consecutive records, `0/0 = 0`.
pub fn contraction_factors<T: Scalar>(t: &Trajectory<T>, f_star: T) -> Result<Vec<T>> {
    let slack = T::of(DESCENT_SLACK);
    let mut gaps = Vec::with_capacity(t.records.len());
    for r in &t.records {
        if f_star > r.objective + slack {
            return Err(Error::Input(format!(
                "F* = {f_star} exceeds the objective {} at iteration {}",
                r.objective, r.k
            )));
        }
        gaps.push((r.objective - f_star).max(T::zero()));
    }
    Ok(contraction_factors_from_gaps(&gaps))
}

/// Contraction factors from a sequence of optimality gaps (clamped at zero).
pub fn contraction_factors_from_gaps<T: Scalar>(gaps: &[T]) -> Vec<T> {
    gaps.windows(2)
        .map(|w| {
            let (a, b) = (w[0].max(T::zero()), w[1].max(T::zero()));
            if a == T::zero() {
                if b == T::zero() {
                    T::zero()
                } else {
                    T::infinity()
                }
            } else {
                b / a
            }
        })
        .collect()
}
