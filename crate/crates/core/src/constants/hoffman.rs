use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{default_zero_tol, sigma_min_plus, svd, symmetric_eigen, vector, DenseMatrix};
use crate::problem::PolyhedralSystem;
use crate::scalar::Scalar;
use crate::solver::IndexSet;

use super::region::{Region, Restriction};

/// Row cap for exact enumeration.
pub const DEFAULT_SIZE_CAP: usize = 18;
/// Samples whose residual is at or below this are skipped.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HoffmanMethod {
    ClosedForm,
    Enumerated,
    SampledLowerBound,
}

impl HoffmanMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::ClosedForm => "closed_form",
            Self::Enumerated => "enumerated",
            Self::SampledLowerBound => "sampled_lower_bound",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoffmanEstimate<T> {
    pub value: T,
    pub method: HoffmanMethod,
    pub restriction: Restriction<T>,
    /// Samples that entered the maximum (sampled estimates only).
    pub samples_used: usize,
}

impl<T> HoffmanEstimate<T> {
    fn exact(value: T, method: HoffmanMethod, restriction: Restriction<T>) -> Self {
        Self {
            value,
            method,
            restriction,
            samples_used: 0,
        }
    }
}

/// `1/σ_min⁺(G)` for the system `Gx = h`.
pub fn hoffman_equality<T: Scalar>(g: &DenseMatrix<T>) -> Result<HoffmanEstimate<T>> {
    let s = sigma_min_plus(g)?;
    Ok(HoffmanEstimate::exact(
        T::one() / s,
        HoffmanMethod::ClosedForm,
        Restriction::Global,
    ))
}

/// `1/σ_min⁺(A_S)`, or `(σ_min⁺(A_S)²/n)⁻¹` when `normalized`.
pub fn restricted_hoffman_support<T: Scalar>(
    a: &DenseMatrix<T>,
    support: &IndexSet,
    normalized: bool,
) -> Result<HoffmanEstimate<T>> {
    if support.is_empty() {
        return Err(Error::Input("support is empty".into()));
    }
    if let Some(&i) = support.iter().next_back() {
        if i >= a.cols() {
            return Err(Error::Input(format!("support index {i} out of range")));
        }
    }
    let idx: Vec<usize> = support.iter().copied().collect();
    let s = sigma_min_plus(&a.select_columns(&idx))?;
    let value = if normalized {
        T::of_usize(a.rows()) / (s * s)
    } else {
        T::one() / s
    };
    Ok(HoffmanEstimate::exact(
        value,
        HoffmanMethod::ClosedForm,
        Restriction::SupportFace {
            support: support.clone(),
        },
    ))
}

/// Equality block replaced by `Σ_r V_rᵀ`, which has independent rows and the
/// same residual norm on consistent right-hand sides.
fn reduced_equality_rows<T: Scalar>(g: &DenseMatrix<T>) -> Result<Vec<Vec<T>>> {
    if g.rows() == 0 || g.max_abs() == T::zero() {
        return Ok(Vec::new());
    }
    let dec = svd(g)?;
    let tol = default_zero_tol(dec.s[0]);
    Ok(dec
        .s
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tol)
        .map(|(k, &s)| (0..g.cols()).map(|j| s * dec.v.get(j, k)).collect())
        .collect())
}

struct Enumerator<'a, T> {
    rows: &'a [Vec<T>],
    /// rows before this index are equality rows (free sign)
    n_eq: usize,
    dim: usize,
    best: T,
    found: bool,
}

impl<T: Scalar> Enumerator<'_, T> {
    /// Depth-first over subsets in index order, keeping an orthonormal basis
    /// of the chosen rows so dependent extensions are pruned immediately.
    fn visit(&mut self, start: usize, chosen: &mut Vec<usize>, basis: &mut Vec<Vec<T>>) -> Result<()> {
        if !chosen.is_empty() {
            self.evaluate(chosen)?;
        }
        if basis.len() == self.dim {
            return Ok(());
        }
        for i in start..self.rows.len() {
            let row = &self.rows[i];
            let nr = vector::norm2(row);
            if nr == T::zero() {
                continue;
            }
            let mut r = row.clone();
            for b in basis.iter() {
                let c = vector::dot(&r, b);
                vector::axpy(-c, b, &mut r);
            }
            let nres = vector::norm2(&r);
            if nres <= T::of(1e-10) * nr {
                continue;
            }
            basis.push(vector::scale(&r, T::one() / nres));
            chosen.push(i);
            self.visit(i + 1, chosen, basis)?;
            chosen.pop();
            basis.pop();
        }
        Ok(())
    }

    /// Smallest `λ(A_J A_Jᵀ)` whose eigenvector can be signed nonnegative on
    /// the inequality rows of `J`.
    fn evaluate(&mut self, chosen: &[usize]) -> Result<()> {
        let k = chosen.len();
        let mut gram = DenseMatrix::zeros(k, k);
        for (a, &i) in chosen.iter().enumerate() {
            for (b, &j) in chosen.iter().enumerate().skip(a) {
                let v = vector::dot(&self.rows[i], &self.rows[j]);
                gram.set(a, b, v);
                gram.set(b, a, v);
            }
        }
        let eig = symmetric_eigen(&gram)?;
        let sign_tol = T::of(1e-12);
        for (idx, &lambda) in eig.values.iter().enumerate() {
            if lambda >= self.best && self.found {
                break;
            }
            let v = eig.vectors.column(idx);
            let ineq = chosen.iter().zip(&v).filter(|(&i, _)| i >= self.n_eq).map(|(_, &x)| x);
            let (mut nonneg, mut nonpos) = (true, true);
            for x in ineq {
                nonneg &= x >= -sign_tol;
                nonpos &= x <= sign_tol;
            }
            if nonneg || nonpos {
                self.best = lambda.max(T::zero());
                self.found = true;
                break;
            }
        }
        Ok(())
    }
}

/// Exact Hoffman constant `max_J 1/ρ(J)` over linearly independent row
/// subsets `J`, where `ρ(J) = min ‖A_Jᵀv‖` over unit `v` that are
/// nonnegative on the inequality rows.
pub fn hoffman_enumerated<T: Scalar>(
    sys: &PolyhedralSystem<T>,
    size_cap: usize,
) -> Result<HoffmanEstimate<T>> {
    if sys.n_rows() > size_cap {
        return Err(Error::Size {
            rows: sys.n_rows(),
            cap: size_cap,
        });
    }
    let mut rows = reduced_equality_rows(sys.g_eq())?;
    let n_eq = rows.len();
    for i in 0..sys.n_ineq() {
        rows.push(sys.m_ineq().row(i).to_vec());
    }
    let mut e = Enumerator {
        rows: &rows,
        n_eq,
        dim: sys.dim(),
        best: T::infinity(),
        found: false,
    };
    e.visit(0, &mut Vec::new(), &mut Vec::new())?;
    if !e.found || !(e.best > T::zero()) {
        return Err(Error::Degenerate("no row subset with positive ρ".into()));
    }
    Ok(HoffmanEstimate::exact(
        T::one() / e.best.sqrt(),
        HoffmanMethod::Enumerated,
        Restriction::Global,
    ))
}

/// Sampled lower bound `max dist(x, X)/‖residual(x)‖` over points drawn from
/// `region`, with distances supplied by `distance`.
pub fn hoffman_sampled_with<T: Scalar>(
    sys: &PolyhedralSystem<T>,
    region: &Region<T>,
    n_samples: usize,
    seed: u64,
    mut distance: impl FnMut(&[T]) -> Result<T>,
) -> Result<HoffmanEstimate<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        points.push(region.sample(&mut rng));
    }
    let (value, used) = hoffman_over_points(sys, &points, &mut distance)?;
    Ok(HoffmanEstimate {
        value,
        method: HoffmanMethod::SampledLowerBound,
        restriction: region.restriction.clone(),
        samples_used: used,
    })
}

/// Maximum Hoffman ratio over explicit points; also returns how many points
/// had a residual above the floor.
pub fn hoffman_over_points<T: Scalar>(
    sys: &PolyhedralSystem<T>,
    points: &[Vec<T>],
    mut distance: impl FnMut(&[T]) -> Result<T>,
) -> Result<(T, usize)> {
    let floor = T::of(RESIDUAL_FLOOR);
    let mut best = T::zero();
    let mut used = 0;
    for x in points {
        let res = sys.residual_norm(x)?;
        if res <= floor {
            continue;
        }
        used += 1;
        best = best.max(distance(x)? / res);
    }
    if used == 0 {
        return Err(Error::InsufficientSamples(
            "no sample had a positive residual".into(),
        ));
    }
    Ok((best, used))
}

/// Sampled lower bound around the feasible point obtained by projecting the
/// origin, with Dykstra distances.
pub fn hoffman_sampled<T: Scalar>(
    sys: &PolyhedralSystem<T>,
    restriction: Restriction<T>,
    n_samples: usize,
    seed: u64,
) -> Result<HoffmanEstimate<T>> {
    let center = sys.project(&vec![T::zero(); sys.dim()])?;
    let region = Region::new(restriction, center)?;
    hoffman_sampled_with(sys, &region, n_samples, seed, |x| sys.distance(x))
}
