use crate::error::{check_dim, Error, Result};
use crate::linalg::{nnls, pseudo_inverse, symmetric_eigen, vector, DenseMatrix};
use crate::scalar::Scalar;

/// Cycle cap for Dykstra's alternating projection.
pub const DYKSTRA_MAX_CYCLES: usize = 10_000;
/// Dykstra stops once a full cycle moves the iterate by less than this.
pub const DYKSTRA_TOL: f64 = 1e-11;
/// Up to this dimension projections go through the exact least-distance
/// solve first and Dykstra only as a fallback.
pub const EXACT_PROJECTION_DIM: usize = 40;

/// `{x : Gx = h, Mx ≤ r}`. Either block may have zero rows.
#[derive(Clone, Debug)]
pub struct PolyhedralSystem<T> {
    g_eq: DenseMatrix<T>,
    h_eq: Vec<T>,
    m_ineq: DenseMatrix<T>,
    r_ineq: Vec<T>,
    dim: usize,
    g_pinv: Option<DenseMatrix<T>>,
    row_norms_sq: Vec<T>,
}

impl<T: Scalar> PolyhedralSystem<T> {
    pub fn new(
        g_eq: DenseMatrix<T>,
        h_eq: Vec<T>,
        m_ineq: DenseMatrix<T>,
        r_ineq: Vec<T>,
    ) -> Result<Self> {
        check_dim(g_eq.rows(), h_eq.len())?;
        check_dim(m_ineq.rows(), r_ineq.len())?;
        let dim = if g_eq.rows() > 0 { g_eq.cols() } else { m_ineq.cols() };
        if g_eq.rows() > 0 && m_ineq.rows() > 0 {
            check_dim(g_eq.cols(), m_ineq.cols())?;
        }
        if dim == 0 {
            return Err(Error::Input("polyhedral system has no variables".into()));
        }
        if !vector::all_finite(&h_eq) || !vector::all_finite(&r_ineq) {
            return Err(Error::Input("right-hand side has a non-finite entry".into()));
        }
        let g_pinv = if g_eq.rows() > 0 && g_eq.max_abs() > T::zero() {
            Some(pseudo_inverse(&g_eq)?)
        } else {
            None
        };
        let row_norms_sq = (0..m_ineq.rows())
            .map(|i| vector::dot(m_ineq.row(i), m_ineq.row(i)))
            .collect();
        let g_eq = if g_eq.rows() == 0 { DenseMatrix::zeros(0, dim) } else { g_eq };
        let m_ineq = if m_ineq.rows() == 0 { DenseMatrix::zeros(0, dim) } else { m_ineq };
        Ok(Self {
            g_eq,
            h_eq,
            m_ineq,
            r_ineq,
            dim,
            g_pinv,
            row_norms_sq,
        })
    }

    pub fn equality(g: DenseMatrix<T>, h: Vec<T>) -> Result<Self> {
        let d = g.cols();
        Self::new(g, h, DenseMatrix::zeros(0, d), Vec::new())
    }

    pub fn inequality(m: DenseMatrix<T>, r: Vec<T>) -> Result<Self> {
        let d = m.cols();
        Self::new(DenseMatrix::zeros(0, d), Vec::new(), m, r)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_eq(&self) -> usize {
        self.g_eq.rows()
    }

    pub fn n_ineq(&self) -> usize {
        self.m_ineq.rows()
    }

    pub fn n_rows(&self) -> usize {
        self.n_eq() + self.n_ineq()
    }

    pub fn g_eq(&self) -> &DenseMatrix<T> {
        &self.g_eq
    }

    pub fn h_eq(&self) -> &[T] {
        &self.h_eq
    }

    pub fn m_ineq(&self) -> &DenseMatrix<T> {
        &self.m_ineq
    }

    pub fn r_ineq(&self) -> &[T] {
        &self.r_ineq
    }

    /// `(Gx − h ; [Mx − r]₊)`.
    pub fn residual(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim, x.len())?;
        let mut out = Vec::with_capacity(self.n_rows());
        for (gx, h) in self.g_eq.mul_vec(x).into_iter().zip(&self.h_eq) {
            out.push(gx - *h);
        }
        for (mx, r) in self.m_ineq.mul_vec(x).into_iter().zip(&self.r_ineq) {
            out.push((mx - *r).max(T::zero()));
        }
        Ok(out)
    }

    pub fn residual_norm(&self, x: &[T]) -> Result<T> {
        Ok(vector::norm2(&self.residual(x)?))
    }

    pub fn is_feasible(&self, x: &[T], tol: T) -> Result<bool> {
        Ok(self.residual_norm(x)? <= tol)
    }

    fn project_affine(&self, x: &mut [T]) {
        if let Some(pinv) = &self.g_pinv {
            let r: Vec<T> = self
                .g_eq
                .mul_vec(x)
                .into_iter()
                .zip(&self.h_eq)
                .map(|(a, b)| a - *b)
                .collect();
            let corr = pinv.mul_vec(&r);
            for (xi, c) in x.iter_mut().zip(corr) {
                *xi = *xi - c;
            }
        }
    }

    fn project_halfspace(&self, i: usize, x: &mut [T]) -> Result<()> {
        let row = self.m_ineq.row(i);
        let nsq = self.row_norms_sq[i];
        if nsq == T::zero() {
            if self.r_ineq[i] < T::zero() {
                return Err(Error::Input(format!("inequality row {i} is 0 ≤ {}", self.r_ineq[i])));
            }
            return Ok(());
        }
        let viol = vector::dot(row, x) - self.r_ineq[i];
        if viol > T::zero() {
            vector::axpy(-viol / nsq, row, x);
        }
        Ok(())
    }

    /// Euclidean projection. Dykstra's alternating projection over the affine
    /// block and each halfspace, except in low dimension where the exact
    /// least-distance solve runs first. Feasible inputs are returned as is.
    pub fn project(&self, v: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim, v.len())?;
        if self.n_ineq() == 0 {
            let mut x = v.to_vec();
            self.project_affine(&mut x);
            let res = self.residual_norm(&x)?;
            let scale = T::one() + vector::norm_inf(&self.h_eq);
            if res > T::of(1e-8) * scale {
                return Err(Error::Numerical {
                    message: "equality block is inconsistent".into(),
                    residual: res.as_f64(),
                });
            }
            return Ok(x);
        }
        if self.residual_norm(v)? == T::zero() {
            return Ok(v.to_vec());
        }
        if self.dim <= EXACT_PROJECTION_DIM {
            if let Ok(x) = self.project_least_distance(v) {
                return Ok(x);
            }
        }
        let n_sets = self.n_ineq() + usize::from(self.g_pinv.is_some());
        let mut incr = vec![vec![T::zero(); self.dim]; n_sets];
        let mut x = v.to_vec();
        let tol = T::of(DYKSTRA_TOL);
        let mut moved = T::infinity();
        for _ in 0..DYKSTRA_MAX_CYCLES {
            let prev = x.clone();
            let mut set = 0;
            if self.g_pinv.is_some() {
                let mut y = vector::add(&x, &incr[set]);
                let before = y.clone();
                self.project_affine(&mut y);
                incr[set] = vector::sub(&before, &y);
                x = y;
                set += 1;
            }
            for i in 0..self.n_ineq() {
                let mut y = vector::add(&x, &incr[set]);
                let before = y.clone();
                self.project_halfspace(i, &mut y)?;
                incr[set] = vector::sub(&before, &y);
                x = y;
                set += 1;
            }
            moved = vector::dist2(&x, &prev);
            if moved < tol {
                return Ok(x);
            }
        }
        // narrow vertex cones stall the alternating scheme; finish exactly
        self.project_least_distance(v).map_err(|_| Error::Numerical {
            message: format!("Dykstra projection did not converge (last move {:e})", moved.as_f64()),
            residual: self.residual_norm(&x).map_or(f64::NAN, |r| r.as_f64()),
        })
    }

    /// Projection as a least-distance program on the affine block's null
    /// space, solved through nonnegative least squares.
    pub(crate) fn project_least_distance(&self, v: &[T]) -> Result<Vec<T>> {
        let mut x0 = v.to_vec();
        self.project_affine(&mut x0);
        let basis = self.null_space_basis()?;
        let k = basis.cols();
        let b: Vec<T> = self
            .m_ineq
            .mul_vec(&x0)
            .iter()
            .zip(&self.r_ineq)
            .map(|(mx, r)| *r - *mx)
            .collect();
        if k == 0 {
            return if b.iter().all(|&bi| bi >= -T::of(1e-9)) {
                Ok(x0)
            } else {
                Err(Error::Degenerate("polyhedron is empty".into()))
            };
        }
        let c = self.m_ineq.matmul(&basis)?;
        // min ‖z‖ s.t. Cz ≤ b, via E = [−Cᵀ; −bᵀ], f = e_{k+1}
        let m = c.rows();
        let mut e = DenseMatrix::zeros(k + 1, m);
        for i in 0..m {
            for j in 0..k {
                e.set(j, i, -c.get(i, j));
            }
            e.set(k, i, -b[i]);
        }
        let mut f = vec![T::zero(); k + 1];
        f[k] = T::one();
        let u = nnls(&e, &f)?;
        let r = vector::sub(&e.mul_vec(&u), &f);
        if !(r[k].abs() > T::of(1e-12)) {
            return Err(Error::Degenerate("polyhedron is empty".into()));
        }
        let z: Vec<T> = r[..k].iter().map(|&ri| -ri / r[k]).collect();
        let mut x = vector::add(&x0, &basis.mul_vec(&z));
        if let Some(polished) = self.polish_projection(v, &x)? {
            x = polished;
        }
        let scale = T::one() + vector::norm_inf(&self.r_ineq) + vector::norm_inf(&self.h_eq);
        if self.residual_norm(&x)? > T::of(1e-8) * scale {
            return Err(Error::Numerical {
                message: "least-distance projection is infeasible".into(),
                residual: self.residual_norm(&x)?.as_f64(),
            });
        }
        Ok(x)
    }

    /// Exact projection onto the rows active at `x`, kept only when the
    /// KKT conditions check out: feasible and nonnegative multipliers.
    fn polish_projection(&self, v: &[T], x: &[T]) -> Result<Option<Vec<T>>> {
        let scale = T::one() + vector::norm_inf(v) + vector::norm_inf(&self.r_ineq);
        let tol = T::of(1e-9) * scale;
        let active: Vec<usize> = (0..self.n_ineq())
            .filter(|&i| vector::dot(self.m_ineq.row(i), x) >= self.r_ineq[i] - tol)
            .collect();
        let n_eq = self.n_eq();
        if n_eq + active.len() == 0 {
            return Ok(None);
        }
        let mut c = self.g_eq.clone();
        let mut d = self.h_eq.clone();
        if !active.is_empty() {
            c = c.vstack(&self.m_ineq.select_rows(&active))?;
            d.extend(active.iter().map(|&i| self.r_ineq[i]));
        }
        let resid = vector::sub(&c.mul_vec(v), &d);
        let pinv = pseudo_inverse(&c)?;
        let corr = pinv.mul_vec(&resid);
        let lambda = pinv.tr_mul_vec(&corr);
        if lambda[n_eq..].iter().any(|&l| l < -tol) {
            return Ok(None);
        }
        let y = vector::sub(v, &corr);
        if self.residual_norm(&y)? > T::of(1e-12) * scale {
            return Ok(None);
        }
        Ok(Some(y))
    }

    /// Orthonormal columns spanning `ker G` (all of ℝᵈ without equalities).
    fn null_space_basis(&self) -> Result<DenseMatrix<T>> {
        if self.g_pinv.is_none() {
            return Ok(DenseMatrix::identity(self.dim));
        }
        let eig = symmetric_eigen(&self.g_eq.gram())?;
        let top = eig.values[self.dim - 1];
        let tol = T::of(1e-10) * top;
        let keep: Vec<usize> = (0..self.dim).filter(|&j| eig.values[j] <= tol).collect();
        Ok(eig.vectors.select_columns(&keep))
    }

    pub fn distance(&self, v: &[T]) -> Result<T> {
        let p = self.project(v)?;
        Ok(vector::dist2(v, &p))
    }
}
