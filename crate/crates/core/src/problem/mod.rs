//! Composite objectives `F(x) = f(Ax) + g(x)`.

mod polyhedral;
mod prox;

pub use polyhedral::{PolyhedralSystem, DYKSTRA_MAX_CYCLES, DYKSTRA_TOL};
pub use prox::{project_box_hyperplane, soft_threshold, soft_threshold_vec};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{smoothness_constant, symmetric_eigen, vector, DenseMatrix};
use crate::scalar::Scalar;

/// Indicator constraints count as satisfied up to this violation.
pub const INDICATOR_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmoothKind {
    LeastSquares,
    LeastSquaresNormalized,
    QuadraticForm,
}

#[derive(Clone, Debug)]
pub enum SmoothPart<T> {
    /// `½‖Ax − y‖²`, divided by `n` when `normalized`.
    LeastSquares {
        a: DenseMatrix<T>,
        y: Vec<T>,
        normalized: bool,
    },
    /// `½xᵀQx − linearᵀx`.
    QuadraticForm { q: DenseMatrix<T>, linear: Vec<T> },
}

#[derive(Clone, Debug)]
pub enum Regularizer<T> {
    Zero,
    L1 { eta: T },
    PolyhedralIndicator(PolyhedralSystem<T>),
    /// `{x : labelsᵀx = 0, 0 ≤ x ≤ c_cap}`
    BoxHyperplaneIndicator { labels: Vec<T>, c_cap: T },
}

impl<T: Scalar> Regularizer<T> {
    pub fn l1(eta: T) -> Result<Self> {
        if !(eta > T::zero() && eta.is_finite()) {
            return Err(Error::Input(format!("eta must be positive, got {eta}")));
        }
        Ok(Self::L1 { eta })
    }

    pub fn box_hyperplane(labels: Vec<T>, c_cap: T) -> Result<Self> {
        if !(c_cap > T::zero() && c_cap.is_finite()) {
            return Err(Error::Input(format!("C must be positive, got {c_cap}")));
        }
        if labels.iter().any(|&l| l != T::one() && l != -T::one()) {
            return Err(Error::Input("labels must be ±1".into()));
        }
        Ok(Self::BoxHyperplaneIndicator { labels, c_cap })
    }

    pub fn is_indicator(&self) -> bool {
        matches!(
            self,
            Self::PolyhedralIndicator(_) | Self::BoxHyperplaneIndicator { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::L1 { .. } => "l1",
            Self::PolyhedralIndicator(_) => "polyhedral_indicator",
            Self::BoxHyperplaneIndicator { .. } => "box_hyperplane_indicator",
        }
    }

    /// Largest constraint violation of an indicator; zero otherwise.
    pub fn violation(&self, x: &[T]) -> Result<T> {
        match self {
            Self::Zero | Self::L1 { .. } => Ok(T::zero()),
            Self::PolyhedralIndicator(sys) => sys.residual_norm(x),
            Self::BoxHyperplaneIndicator { labels, c_cap } => {
                check_dim(labels.len(), x.len())?;
                let mut v = vector::dot(labels, x).abs();
                for &xi in x {
                    v = v.max(-xi).max(xi - *c_cap);
                }
                Ok(v)
            }
        }
    }

    pub fn value(&self, x: &[T]) -> Result<T> {
        match self {
            Self::Zero => Ok(T::zero()),
            Self::L1 { eta } => Ok(*eta * vector::norm1(x)),
            _ => Ok(if self.violation(x)? > T::of(INDICATOR_TOL) {
                T::infinity()
            } else {
                T::zero()
            }),
        }
    }

    /// `prox_{λg}(v)`.
    pub fn prox(&self, v: &[T], lambda: T) -> Result<Vec<T>> {
        if !(lambda > T::zero()) {
            return Err(Error::Input(format!("prox step must be positive, got {lambda}")));
        }
        match self {
            Self::Zero => Ok(v.to_vec()),
            Self::L1 { eta } => Ok(soft_threshold_vec(v, lambda * *eta)),
            Self::PolyhedralIndicator(sys) => sys.project(v),
            Self::BoxHyperplaneIndicator { labels, c_cap } => {
                check_dim(labels.len(), v.len())?;
                project_box_hyperplane(v, labels, *c_cap)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompositeProblem<T> {
    pub smooth: SmoothPart<T>,
    pub reg: Regularizer<T>,
    /// Strong convexity of the outer loss on the range of `A`, when known.
    pub strong_convexity_alpha: Option<T>,
}

impl<T: Scalar> CompositeProblem<T> {
    pub fn least_squares(
        a: DenseMatrix<T>,
        y: Vec<T>,
        normalized: bool,
        reg: Regularizer<T>,
    ) -> Result<Self> {
        check_dim(a.rows(), y.len())?;
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::Input("design matrix is empty".into()));
        }
        if !vector::all_finite(&y) {
            return Err(Error::Input("targets have a non-finite entry".into()));
        }
        let p = Self {
            smooth: SmoothPart::LeastSquares { a, y, normalized },
            reg,
            strong_convexity_alpha: None,
        };
        p.check_reg_dim()?;
        Ok(p)
    }

    pub fn lasso(a: DenseMatrix<T>, y: Vec<T>, eta: T, normalized: bool) -> Result<Self> {
        Self::least_squares(a, y, normalized, Regularizer::l1(eta)?)
    }

    /// Requires `q` symmetric positive semidefinite to `1e-10` (relative).
    pub fn quadratic(q: DenseMatrix<T>, linear: Vec<T>, reg: Regularizer<T>) -> Result<Self> {
        check_dim(q.rows(), linear.len())?;
        let eig = symmetric_eigen(&q)?;
        let scale = q.max_abs().max(T::one());
        if eig.values[0] < -T::of(1e-10) * scale {
            return Err(Error::Input(format!(
                "quadratic form is not positive semidefinite (λ_min = {})",
                eig.values[0]
            )));
        }
        let p = Self {
            smooth: SmoothPart::QuadraticForm { q, linear },
            reg,
            strong_convexity_alpha: None,
        };
        p.check_reg_dim()?;
        Ok(p)
    }

    /// Dual soft-margin SVM written as a minimization:
    /// `½αᵀQα − 𝟙ᵀα` over `{yᵀα = 0, 0 ≤ α ≤ C}` with `Q = ZZᵀ`, `Z = diag(y)X`.
    pub fn svm_dual(features: &DenseMatrix<T>, labels: &[T], c_cap: T) -> Result<Self> {
        check_dim(features.rows(), labels.len())?;
        let reg = Regularizer::box_hyperplane(labels.to_vec(), c_cap)?;
        let has_pos = labels.iter().any(|&l| l > T::zero());
        let has_neg = labels.iter().any(|&l| l < T::zero());
        if !(has_pos && has_neg) {
            return Err(Error::Input("SVM labels contain a single class".into()));
        }
        let mut z = features.clone();
        for i in 0..z.rows() {
            for j in 0..z.cols() {
                z.set(i, j, z.get(i, j) * labels[i]);
            }
        }
        let q = z.outer_gram();
        Self::quadratic(q, vec![T::one(); labels.len()], reg)
    }

    pub fn with_strong_convexity(mut self, alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) {
            return Err(Error::Input(format!("alpha must be positive, got {alpha}")));
        }
        self.strong_convexity_alpha = Some(alpha);
        Ok(self)
    }

    fn check_reg_dim(&self) -> Result<()> {
        match &self.reg {
            Regularizer::PolyhedralIndicator(sys) => check_dim(self.dim(), sys.dim()),
            Regularizer::BoxHyperplaneIndicator { labels, .. } => {
                check_dim(self.dim(), labels.len())
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match &self.smooth {
            SmoothPart::LeastSquares { a, .. } => a.cols(),
            SmoothPart::QuadraticForm { q, .. } => q.rows(),
        }
    }

    pub fn smooth_kind(&self) -> SmoothKind {
        match &self.smooth {
            SmoothPart::LeastSquares {
                normalized: false, ..
            } => SmoothKind::LeastSquares,
            SmoothPart::LeastSquares { normalized: true, .. } => SmoothKind::LeastSquaresNormalized,
            SmoothPart::QuadraticForm { .. } => SmoothKind::QuadraticForm,
        }
    }

    /// Design matrix of a least-squares problem.
    pub fn design(&self) -> Option<&DenseMatrix<T>> {
        match &self.smooth {
            SmoothPart::LeastSquares { a, .. } => Some(a),
            SmoothPart::QuadraticForm { .. } => None,
        }
    }

    pub fn targets(&self) -> Option<&[T]> {
        match &self.smooth {
            SmoothPart::LeastSquares { y, .. } => Some(y),
            SmoothPart::QuadraticForm { .. } => None,
        }
    }

    pub fn is_normalized(&self) -> bool {
        matches!(self.smooth, SmoothPart::LeastSquares { normalized: true, .. })
    }

    pub fn eta(&self) -> Option<T> {
        match self.reg {
            Regularizer::L1 { eta } => Some(eta),
            _ => None,
        }
    }

    /// `1/n` for the normalized loss, `1` otherwise.
    fn loss_scale(&self) -> T {
        match &self.smooth {
            SmoothPart::LeastSquares {
                a, normalized: true, ..
            } => T::one() / T::of_usize(a.rows()),
            _ => T::one(),
        }
    }

    pub fn smooth_value(&self, x: &[T]) -> Result<T> {
        check_dim(self.dim(), x.len())?;
        Ok(match &self.smooth {
            SmoothPart::LeastSquares { a, y, .. } => {
                let r = vector::sub(&a.mul_vec(x), y);
                T::of(0.5) * self.loss_scale() * vector::dot(&r, &r)
            }
            SmoothPart::QuadraticForm { q, linear } => {
                T::of(0.5) * vector::dot(x, &q.mul_vec(x)) - vector::dot(linear, x)
            }
        })
    }

    /// `F(x)`; `+∞` outside the domain of an indicator.
    pub fn objective(&self, x: &[T]) -> Result<T> {
        let g = self.reg.value(x)?;
        Ok(self.smooth_value(x)? + g)
    }

    /// Gradient of the smooth part with respect to `x`.
    pub fn gradient_f(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim(), x.len())?;
        Ok(match &self.smooth {
            SmoothPart::LeastSquares { a, y, .. } => {
                let r = vector::sub(&a.mul_vec(x), y);
                let g = a.tr_mul_vec(&r);
                let s = self.loss_scale();
                if s == T::one() {
                    g
                } else {
                    vector::scale(&g, s)
                }
            }
            SmoothPart::QuadraticForm { q, linear } => vector::sub(&q.mul_vec(x), linear),
        })
    }

    pub fn prox(&self, v: &[T], lambda: T) -> Result<Vec<T>> {
        check_dim(self.dim(), v.len())?;
        self.reg.prox(v, lambda)
    }

    /// One proximal gradient step `prox(x − step·∇f(x), step)`.
    pub fn prox_step(&self, x: &[T], grad: &[T], step: T) -> Result<Vec<T>> {
        let mut v = x.to_vec();
        vector::axpy(-step, grad, &mut v);
        self.prox(&v, step)
    }

    /// `G_λ(x) = (x − prox(x − λ∇f(x), λ))/λ`.
    pub fn gradient_mapping(&self, x: &[T], lambda: T) -> Result<Vec<T>> {
        let grad = self.gradient_f(x)?;
        if matches!(self.reg, Regularizer::Zero) {
            return Ok(grad);
        }
        let next = self.prox_step(x, &grad, lambda)?;
        Ok(x.iter()
            .zip(&next)
            .map(|(&a, &b)| (a - b) / lambda)
            .collect())
    }

    /// `D_g(x, α)`, evaluated through the closed-form minimizer
    /// `y* = prox(x − ∇f/α, 1/α)` of the inner problem.
    pub fn generalized_gradient_size(&self, x: &[T], alpha: T) -> Result<T> {
        if !(alpha > T::zero()) {
            return Err(Error::Input(format!("alpha must be positive, got {alpha}")));
        }
        let gx = self.reg.value(x)?;
        if !gx.is_finite() {
            return Err(Error::Domain("g(x) is infinite".into()));
        }
        let grad = self.gradient_f(x)?;
        if matches!(self.reg, Regularizer::Zero) {
            return Ok(vector::dot(&grad, &grad));
        }
        let ystar = self.prox_step(x, &grad, T::one() / alpha)?;
        let d = vector::sub(&ystar, x);
        let dg = match &self.reg {
            Regularizer::L1 { eta } => {
                *eta * ystar
                    .iter()
                    .zip(x)
                    .map(|(&a, &b)| a.abs() - b.abs())
                    .sum::<T>()
            }
            _ => T::zero(),
        };
        let inner = vector::dot(&grad, &d) + T::of(0.5) * alpha * vector::dot(&d, &d) + dg;
        Ok((-T::of(2.0) * alpha * inner).max(T::zero()))
    }

    /// Global Lipschitz constant of `∇f`.
    pub fn smoothness_constant(&self) -> Result<T> {
        match &self.smooth {
            SmoothPart::LeastSquares { a, normalized, .. } => smoothness_constant(a, *normalized),
            SmoothPart::QuadraticForm { q, .. } => {
                let ev = symmetric_eigen(q)?.values;
                Ok(ev[ev.len() - 1].max(T::zero()))
            }
        }
    }

    /// Strong convexity of the outer loss on the range of the data map:
    /// the stored value, else `1` (`1/n` normalized).
    pub fn strong_convexity(&self) -> T {
        self.strong_convexity_alpha.unwrap_or_else(|| self.loss_scale())
    }

    /// `F(x) − F(x_ref)` computed from the difference `Δ = x − x_ref`, which
    /// keeps relative accuracy when both objectives are large and close.
    pub fn objective_gap(&self, x: &[T], x_ref: &[T]) -> Result<T> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), x_ref.len())?;
        let delta = vector::sub(x, x_ref);
        let smooth = match &self.smooth {
            SmoothPart::LeastSquares { a, y, .. } => {
                let ad = a.mul_vec(&delta);
                let r_ref = vector::sub(&a.mul_vec(x_ref), y);
                self.loss_scale() * (vector::dot(&ad, &r_ref) + T::of(0.5) * vector::dot(&ad, &ad))
            }
            SmoothPart::QuadraticForm { q, linear } => {
                let qd = q.mul_vec(&delta);
                let g_ref = vector::sub(&q.mul_vec(x_ref), linear);
                vector::dot(&delta, &g_ref) + T::of(0.5) * vector::dot(&delta, &qd)
            }
        };
        let reg = match &self.reg {
            Regularizer::Zero => T::zero(),
            Regularizer::L1 { eta } => {
                *eta * x.iter().zip(x_ref).map(|(&a, &b)| a.abs() - b.abs()).sum::<T>()
            }
            r => {
                let gx = r.value(x)?;
                if gx.is_finite() {
                    T::zero()
                } else {
                    T::infinity()
                }
            }
        };
        Ok(smooth + reg)
    }
}
