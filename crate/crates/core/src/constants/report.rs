use crate::analytics::{lasso_optimality_data, KKT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{
    default_zero_tol, orthogonal_complement, singular_values, smoothness_constant,
    symmetric_eigen, DenseMatrix,
};
use crate::problem::{CompositeProblem, PolyhedralSystem, Regularizer, SmoothPart};
use crate::scalar::Scalar;
use crate::solver::{active_set, IndexSet, Trajectory, ACTIVE_TOL};

use super::conversions::{
    eb_from_pl, eb_polyhedral_nonsmooth, firm_convexity_lb_lasso, pl_from_eb,
    pl_from_hoffman_indicator,
};
use super::hoffman::{
    hoffman_enumerated, hoffman_equality, hoffman_sampled_with, restricted_hoffman_support,
    HoffmanEstimate, HoffmanMethod, DEFAULT_SIZE_CAP,
};
use super::measured::{measured_pl, OptimalSet};
use super::region::{Region, Restriction};

/// Where a PL constant came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NuProvenance {
    /// `α/H²` for an indicator (or zero) regularizer.
    IndicatorHoffman,
    /// Error-bound constant of a polyhedral regularizer, converted to PL.
    PolyhedralEb,
    /// Sampled infimum of the PL ratio.
    Measured,
}

impl NuProvenance {
    pub fn name(self) -> &'static str {
        match self {
            Self::IndicatorHoffman => "indicator_hoffman",
            Self::PolyhedralEb => "polyhedral_eb",
            Self::Measured => "measured_pl",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReportOptions {
    pub n_samples: usize,
    pub seed: u64,
    pub size_cap: usize,
    pub kkt_tol: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            n_samples: 2000,
            seed: 0,
            size_cap: DEFAULT_SIZE_CAP,
            kkt_tol: KKT_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsReport<T> {
    pub restriction: Restriction<T>,
    pub l: T,
    pub l_k: T,
    pub h: Option<HoffmanEstimate<T>>,
    pub h_k: Option<HoffmanEstimate<T>>,
    pub nu: T,
    pub nu_provenance_global: NuProvenance,
    pub nu_k: T,
    pub nu_provenance: NuProvenance,
    pub mu_k: T,
    pub gamma_lb: Option<T>,
    pub delta_star: Option<T>,
    pub kappa: T,
    pub kappa_k: T,
    pub b_norm: Option<T>,
}

struct Global<T> {
    l: T,
    h: Option<HoffmanEstimate<T>>,
    nu: T,
    prov: NuProvenance,
}

struct Local<T> {
    l_k: T,
    h_k: Option<HoffmanEstimate<T>>,
    nu_k: T,
    prov: NuProvenance,
}

impl<T: Scalar> Local<T> {
    fn same_as(g: &Global<T>) -> Self {
        Self {
            l_k: g.l,
            h_k: g.h.clone(),
            nu_k: g.nu,
            prov: g.prov,
        }
    }
}

/// Geometric constants of `p` globally and on `restriction`, anchored at the
/// final iterate of a converged `reference` run.
pub fn constants_report<T: Scalar>(
    p: &CompositeProblem<T>,
    restriction: &Restriction<T>,
    reference: &Trajectory<T>,
    opts: &ReportOptions,
) -> Result<ConstantsReport<T>> {
    if !reference.converged() {
        return Err(Error::Precondition("reference run did not converge".into()));
    }
    restriction.validate(p.dim())?;
    let x_hat = &reference.final_x;
    let f_hat = reference.final_objective();
    let f0 = reference.records[0].objective;
    let mut gamma_lb = None;
    let mut delta_star = None;
    let mut b_norm = None;
    let (global, local) = match (&p.smooth, &p.reg) {
        (SmoothPart::LeastSquares { a, normalized, .. }, Regularizer::L1 { eta }) => {
            let data = lasso_optimality_data(p, x_hat, T::of(opts.kkt_tol))?;
            let l = p.smoothness_constant()?;
            let alpha = p.strong_convexity();
            let sys = data.optimal_set_system(a)?;
            let support = active_set(x_hat, T::of(ACTIVE_TOL));
            let optimal = if unique_lasso_solution(a, &support)? {
                OptimalSet::Singleton(x_hat.clone())
            } else {
                OptimalSet::Polyhedron(sys.clone())
            };
            let h = system_hoffman(&sys, x_hat, &optimal, opts)?;
            let gamma = firm_convexity_lb_lasso(f0, *eta, data.delta_star)?;
            let bn = data.b_norm();
            let mu = eb_polyhedral_nonsmooth(l, alpha, h.value, bn, gamma)?;
            let global = Global {
                l,
                h: Some(h),
                nu: pl_from_eb(mu, l)?,
                prov: NuProvenance::PolyhedralEb,
            };
            gamma_lb = Some(gamma);
            delta_star = Some(data.delta_star);
            b_norm = Some(bn);
            let local = match restriction {
                Restriction::Global => Local::same_as(&global),
                Restriction::SupportFace { support } => {
                    let h_k = restricted_hoffman_support(a, support, false)?;
                    let a_s = a.select_columns(&support.iter().copied().collect::<Vec<_>>());
                    Local {
                        l_k: smoothness_constant(&a_s, *normalized)?,
                        nu_k: pl_from_hoffman_indicator(alpha, h_k.value)?,
                        h_k: Some(h_k),
                        prov: NuProvenance::IndicatorHoffman,
                    }
                }
                r => measured_local(p, r, x_hat, f_hat, Some((&sys, &optimal)), l, opts)?,
            };
            (global, local)
        }
        (SmoothPart::QuadraticForm { q, .. }, Regularizer::BoxHyperplaneIndicator { labels, .. }) => {
            let l = p.smoothness_constant()?;
            let nu = compressed_curvature(q, labels)?;
            let global = Global {
                l,
                h: Some(closed_form(T::one() / nu.sqrt(), Restriction::Global)),
                nu,
                prov: NuProvenance::IndicatorHoffman,
            };
            let local = match restriction {
                Restriction::Global => Local::same_as(&global),
                Restriction::SupportFace { support } => {
                    let idx: Vec<usize> = support.iter().copied().collect();
                    let q_s = q.principal(&idx);
                    let y_s: Vec<T> = idx.iter().map(|&i| labels[i]).collect();
                    let nu_k = compressed_curvature(&q_s, &y_s)?;
                    let ev = symmetric_eigen(&q_s)?.values;
                    Local {
                        l_k: ev[ev.len() - 1],
                        h_k: Some(closed_form(T::one() / nu_k.sqrt(), restriction.clone())),
                        nu_k,
                        prov: NuProvenance::IndicatorHoffman,
                    }
                }
                r => measured_local(p, r, x_hat, f_hat, None, l, opts)?,
            };
            (global, local)
        }
        (SmoothPart::LeastSquares { a, normalized, .. }, Regularizer::Zero) => {
            let l = p.smoothness_constant()?;
            let alpha = p.strong_convexity();
            let h = hoffman_equality(a)?;
            let global = Global {
                l,
                nu: pl_from_hoffman_indicator(alpha, h.value)?,
                h: Some(h),
                prov: NuProvenance::IndicatorHoffman,
            };
            let local = match restriction {
                Restriction::Global => Local::same_as(&global),
                Restriction::SupportFace { support } => {
                    let h_k = restricted_hoffman_support(a, support, false)?;
                    let a_s = a.select_columns(&support.iter().copied().collect::<Vec<_>>());
                    Local {
                        l_k: smoothness_constant(&a_s, *normalized)?,
                        nu_k: pl_from_hoffman_indicator(alpha, h_k.value)?,
                        h_k: Some(h_k),
                        prov: NuProvenance::IndicatorHoffman,
                    }
                }
                r => measured_local(p, r, x_hat, f_hat, None, l, opts)?,
            };
            (global, local)
        }
        (SmoothPart::LeastSquares { a, .. }, Regularizer::PolyhedralIndicator(set)) => {
            let l = p.smoothness_constant()?;
            let alpha = p.strong_convexity();
            let g = a.vstack(set.g_eq())?;
            let mut h_rhs = a.mul_vec(x_hat);
            h_rhs.extend_from_slice(set.h_eq());
            let sys = PolyhedralSystem::new(g, h_rhs, set.m_ineq().clone(), set.r_ineq().to_vec())?;
            let optimal = OptimalSet::Polyhedron(sys.clone());
            let h = system_hoffman(&sys, x_hat, &optimal, opts)?;
            let global = Global {
                l,
                nu: pl_from_hoffman_indicator(alpha, h.value)?,
                h: Some(h),
                prov: NuProvenance::IndicatorHoffman,
            };
            let local = match restriction {
                Restriction::Global => Local::same_as(&global),
                r => measured_local(p, r, x_hat, f_hat, Some((&sys, &optimal)), l, opts)?,
            };
            (global, local)
        }
        _ => {
            let l = p.smoothness_constant()?;
            let region = Region::new(Restriction::Global, x_hat.clone())?;
            let nu = measured_pl(p, &region, opts.n_samples, opts.seed, f_hat)?;
            let global = Global {
                l,
                h: None,
                nu,
                prov: NuProvenance::Measured,
            };
            let local = match restriction {
                Restriction::Global => Local::same_as(&global),
                r => measured_local(p, r, x_hat, f_hat, None, l, opts)?,
            };
            (global, local)
        }
    };
    Ok(ConstantsReport {
        restriction: restriction.clone(),
        l: global.l,
        l_k: local.l_k,
        mu_k: eb_from_pl(local.nu_k, global.l)?,
        kappa: global.l / global.nu,
        kappa_k: local.l_k / local.nu_k,
        h: global.h,
        h_k: local.h_k,
        nu: global.nu,
        nu_provenance_global: global.prov,
        nu_k: local.nu_k,
        nu_provenance: local.prov,
        gamma_lb,
        delta_star,
        b_norm,
    })
}

fn closed_form<T: Scalar>(value: T, restriction: Restriction<T>) -> HoffmanEstimate<T> {
    HoffmanEstimate {
        value,
        method: HoffmanMethod::ClosedForm,
        restriction,
        samples_used: 0,
    }
}

/// `β̂` is the unique LASSO solution when `A_Â` has full column rank (the
/// margin `δ*` is positive by construction of the classification).
fn unique_lasso_solution<T: Scalar>(a: &DenseMatrix<T>, support: &IndexSet) -> Result<bool> {
    if support.is_empty() {
        return Ok(true);
    }
    if support.len() > a.rows() {
        return Ok(false);
    }
    let idx: Vec<usize> = support.iter().copied().collect();
    let s = singular_values(&a.select_columns(&idx))?;
    Ok(s[s.len() - 1] > default_zero_tol(s[0]))
}

/// Enumerated when the system is small enough, sampled around `center`
/// otherwise.
fn system_hoffman<T: Scalar>(
    sys: &PolyhedralSystem<T>,
    center: &[T],
    optimal: &OptimalSet<T>,
    opts: &ReportOptions,
) -> Result<HoffmanEstimate<T>> {
    if sys.n_rows() <= opts.size_cap {
        return hoffman_enumerated(sys, opts.size_cap);
    }
    let region = Region::new(Restriction::Global, center.to_vec())?;
    hoffman_sampled_with(sys, &region, opts.n_samples, opts.seed, |x| optimal.distance(x))
}

/// `λ_min⁺` of `Q` compressed onto `{yᵀΔ = 0}`.
fn compressed_curvature<T: Scalar>(q: &DenseMatrix<T>, labels: &[T]) -> Result<T> {
    if labels.len() < 2 {
        return Err(Error::Degenerate(
            "hyperplane leaves no free direction".into(),
        ));
    }
    let basis = orthogonal_complement(labels)?;
    let compressed = basis.transpose().matmul(&q.matmul(&basis)?)?;
    let sym = symmetrize(&compressed);
    let ev = symmetric_eigen(&sym)?.values;
    let top = ev[ev.len() - 1];
    let tol = default_zero_tol(top.max(T::zero()));
    ev.into_iter()
        .find(|&v| v > tol && v > T::zero())
        .ok_or_else(|| Error::Degenerate("quadratic form vanishes on the hyperplane".into()))
}

fn symmetrize<T: Scalar>(m: &DenseMatrix<T>) -> DenseMatrix<T> {
    let mut out = m.clone();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set(i, j, (m.get(i, j) + m.get(j, i)) * T::of(0.5));
        }
    }
    out
}

fn measured_local<T: Scalar>(
    p: &CompositeProblem<T>,
    restriction: &Restriction<T>,
    x_hat: &[T],
    f_hat: T,
    system: Option<(&PolyhedralSystem<T>, &OptimalSet<T>)>,
    l: T,
    opts: &ReportOptions,
) -> Result<Local<T>> {
    let region = Region::new(restriction.clone(), x_hat.to_vec())?;
    let h_k = system
        .map(|(sys, optimal)| {
            hoffman_sampled_with(sys, &region, opts.n_samples, opts.seed, |x| {
                optimal.distance(x)
            })
        })
        .transpose()?;
    Ok(Local {
        l_k: l,
        h_k,
        nu_k: measured_pl(p, &region, opts.n_samples, opts.seed, f_hat)?,
        prov: NuProvenance::Measured,
    })
}
