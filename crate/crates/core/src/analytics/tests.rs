use super::*;
use crate::linalg::{sample_ensemble, EnsembleKind, EnsembleSpec};
use crate::solver::{reference_solve, run, IterateRecord, SolverConfig, Termination};
use rand::{seq::index::sample, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn set(v: &[usize]) -> IndexSet {
    v.iter().copied().collect()
}

fn toy() -> CompositeProblem<f64> {
    CompositeProblem::lasso(DenseMatrix::identity(2), vec![3.0, 0.5], 1.0, false).unwrap()
}

/// Planted sparse regression with `η = 2.5‖Aᵀε‖∞`.
fn planted(n: usize, d: usize, s: usize, seed: u64) -> (CompositeProblem<f64>, f64) {
    let a: DenseMatrix<f64> =
        sample_ensemble(&EnsembleSpec::new(EnsembleKind::Gaussian, n, d, seed)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
    let mut beta = vec![0.0; d];
    for i in sample(&mut rng, d, s) {
        beta[i] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    let noise: Vec<f64> = (0..n).map(|_| 0.1 * rng.sample::<f64, _>(StandardNormal)).collect();
    let y = vector::add(&a.mul_vec(&beta), &noise);
    let eta = 2.5 * vector::norm_inf(&a.tr_mul_vec(&noise));
    (CompositeProblem::lasso(a, y, eta, false).unwrap(), eta)
}

fn record(k: usize, x: Vec<f64>, objective: f64) -> IterateRecord<f64> {
    IterateRecord {
        k,
        active_set: active_set(&x, 1e-10),
        x: Some(x),
        objective,
        gradmap_norm: 0.0,
    }
}

fn traj(records: Vec<IterateRecord<f64>>) -> Trajectory<f64> {
    let final_x = records.last().unwrap().x.clone().unwrap();
    Trajectory {
        records,
        terminated_by: Termination::Tolerance,
        step: 1.0,
        final_x,
    }
}

#[test]
fn jaccard_examples() {
    assert_eq!(jaccard(&set(&[1, 2]), &set(&[1, 2])), 1.0);
    assert_eq!(jaccard(&set(&[1, 2]), &set(&[3, 4])), 0.0);
    assert!((jaccard(&set(&[1, 2]), &set(&[2, 3])) - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(jaccard(&set(&[]), &set(&[])), 1.0);
}

#[test]
fn cone_ratio_examples() {
    let s = set(&[0]);
    assert_eq!(cone_ratio(&[1.5, 0.0], &[1.0, 0.0], &s).unwrap(), 0.0);
    assert!((cone_ratio::<f64>(&[1.2, 0.1], &[1.0, 0.0], &s).unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(cone_ratio(&[1.0, 0.1], &[1.0, 0.0], &s).unwrap(), f64::INFINITY);
    assert_eq!(cone_ratio(&[1.0, 0.0], &[1.0, 0.0], &s).unwrap(), 0.0);
    assert!(matches!(cone_ratio(&[1.0], &[1.0], &set(&[])), Err(Error::Input(_))));
}

#[test]
fn cone_lemma_trivial_cases() {
    let beta = vec![1.0, 0.0, 0.0];
    let t = traj(vec![record(0, beta.clone(), 2.0)]);
    let m = cone_lemma_check(&t, &beta, 1.0, 2.0).unwrap();
    assert!(m.all_hold());
    assert!(m.rows[0].rhs >= 0.0);
    // Δ_Â = 0.1, Δ_Âᶜ = 0.4 = 4‖Δ_Â‖₁, δ = 0
    let t = traj(vec![record(0, vec![1.1, 0.4, 0.0], 2.0)]);
    let m = cone_lemma_check(&t, &beta, 1.0, 2.0).unwrap();
    assert_eq!(m.violations, 1);
    assert!(!m.rows[0].holds);
    assert!(cone_lemma_check(&t, &beta, 1.0, 5.0).is_err());
}

#[test]
fn cone_lemma_holds_along_ista() {
    let (p, eta) = planted(50, 100, 5, 21);
    let cfg = SolverConfig {
        max_iter: 20_000,
        gradmap_tol: 1e-9,
        ..SolverConfig::default()
    };
    let x0 = vec![0.0; 100];
    let reference = reference_solve(&p, &cfg, &x0).unwrap();
    assert!(reference.converged());
    let beta_hat = reference.final_x.clone();
    let t = run(&p, &cfg, &x0).unwrap();
    let gaps = t.gaps(&p, &beta_hat).unwrap();
    let m = cone_lemma_from_gaps(&t, &beta_hat, eta, &gaps).unwrap();
    assert_eq!(m.violations, 0);
    let support = active_set(&beta_hat, 1e-10);
    let tail = &t.records[t.records.len().saturating_sub(50)..];
    for r in tail {
        assert!(cone_ratio(r.x.as_ref().unwrap(), &beta_hat, &support).unwrap() <= 1.0);
    }
    let time = identification_time(&t, &support).unwrap();
    assert!(time > 0);
    let before = &t.records[time - 1];
    assert!(jaccard(&before.active_set, &support) < 1.0);
}

#[test]
fn identification_examples() {
    let r = set(&[0]);
    let t = traj(vec![record(0, vec![1.0, 0.0], 1.0), record(1, vec![2.0, 0.0], 0.5)]);
    assert_eq!(identification_time(&t, &r), Some(0));
    let t = traj(vec![record(0, vec![0.0, 1.0], 1.0), record(1, vec![0.0, 2.0], 0.5)]);
    assert_eq!(identification_time(&t, &r), None);
    let t = traj(vec![
        record(0, vec![1.0, 0.0], 1.0),
        record(1, vec![1.0, 1.0], 0.8),
        record(2, vec![2.0, 0.0], 0.5),
    ]);
    assert_eq!(identification_time(&t, &r), Some(2));
}

#[test]
fn toy_optimality_data() {
    let d = lasso_optimality_data(&toy(), &[2.0, 0.0], 1e-7).unwrap();
    assert_eq!(d.s_hat, vec![1.0, 0.5]);
    assert_eq!(d.iplus, set(&[0]));
    assert_eq!(d.i0, set(&[1]));
    assert!(d.iminus.is_empty());
    assert_eq!(d.delta_star, 0.5);
    assert_eq!(d.b_norm(), 2f64.sqrt());
}

#[test]
fn all_active_has_infinite_margin() {
    // A = I, y = (3, −2), η = 1 ⇒ β̂ = (2, −1), ŝ = (1, −1)
    let p = CompositeProblem::lasso(DenseMatrix::identity(2), vec![3.0, -2.0], 1.0, false).unwrap();
    let d = lasso_optimality_data(&p, &[2.0, -1.0], 1e-7).unwrap();
    assert!(d.i0.is_empty());
    assert_eq!(d.delta_star, f64::INFINITY);
    assert_eq!(d.b_norm(), 1.0);
    assert_eq!(d.b_matrix().rows(), 2);
}

#[test]
fn optimality_errors() {
    assert!(matches!(
        lasso_optimality_data(&toy(), &[1.0, 0.0], 1e-7),
        Err(Error::NotOptimal(_))
    ));
    // y = (3, 1): the zero coordinate sits exactly at |ŝ| = η, so it lands in I₊
    let p = CompositeProblem::lasso(DenseMatrix::identity(2), vec![3.0, 1.0], 1.0, false).unwrap();
    let d = lasso_optimality_data(&p, &[2.0, 0.0], 1e-7).unwrap();
    assert_eq!(d.iplus, set(&[0, 1]));
    // η below the tolerance: ŝ = 0 is within tolerance of both +η and −η
    let p = CompositeProblem::lasso(DenseMatrix::identity(2), vec![3.0, 0.0], 1e-8, false).unwrap();
    assert!(matches!(
        lasso_optimality_data(&p, &[3.0 - 1e-8, 0.0], 1e-7),
        Err(Error::Classification(_))
    ));
    let ls = CompositeProblem::least_squares(
        DenseMatrix::identity(2),
        vec![0.0; 2],
        false,
        crate::problem::Regularizer::Zero,
    )
    .unwrap();
    assert!(lasso_optimality_data(&ls, &[0.0, 0.0], 1e-7).is_err());
}

#[test]
fn margin_matches_direct_scan() {
    let (p, eta) = planted(40, 60, 4, 5);
    let beta = reference_solve(&p, &SolverConfig::default(), &vec![0.0; 60]).unwrap().final_x;
    let d = lasso_optimality_data(&p, &beta, 1e-7).unwrap();
    let a = p.design().unwrap();
    let r = vector::sub(p.targets().unwrap(), &a.mul_vec(&beta));
    let mut margin = f64::INFINITY;
    for j in 0..60 {
        let s: f64 = (0..40).map(|i| a.get(i, j) * r[i]).sum();
        if beta[j] == 0.0 {
            margin = margin.min(eta - s.abs());
        }
    }
    assert!((d.delta_star - margin).abs() < 1e-9);
    let parts = d.i0.len() + d.iplus.len() + d.iminus.len();
    assert_eq!(parts, 60);
    assert!(d.i0.is_disjoint(&d.iplus) && d.i0.is_disjoint(&d.iminus));
}

#[test]
fn b_matrix_rows_are_signed_units() {
    let (p, _) = planted(30, 50, 3, 9);
    let beta = reference_solve(&p, &SolverConfig::default(), &vec![0.0; 50]).unwrap().final_x;
    let d = lasso_optimality_data(&p, &beta, 1e-7).unwrap();
    let b = d.b_matrix();
    for i in 0..b.rows() {
        let nz: Vec<f64> = b.row(i).iter().copied().filter(|v| *v != 0.0).collect();
        assert!(nz == vec![1.0] || nz == vec![-1.0]);
    }
    let norm = crate::linalg::operator_norm(&b).unwrap();
    assert!((norm - d.b_norm()).abs() < 1e-12);
    assert!(norm <= 2f64.sqrt() + 1e-12);
    let sys = d.optimal_set_system(p.design().unwrap()).unwrap();
    assert!(sys.residual_norm(&beta).unwrap() < 1e-9);
}

#[test]
fn polish_recovers_reference() {
    let (p, _) = planted(40, 80, 4, 13);
    let cfg = SolverConfig::default();
    let reference = reference_solve(&p, &cfg, &vec![0.0; 80]).unwrap();
    let rough = run(
        &p,
        &SolverConfig {
            gradmap_tol: 1e-3,
            ..cfg
        },
        &vec![0.0; 80],
    )
    .unwrap();
    let polished = lasso_polish(&p, &rough.final_x).unwrap().expect("support identified");
    let err = vector::dist2(&polished, &reference.final_x);
    assert!(err < 1e-9, "{err}");
    assert!(lasso_polish(&p, &vec![0.0; 80]).unwrap().is_none());
}

#[test]
fn sign_search_matches_long_runs() {
    for seed in 0..4 {
        let (p, _) = planted(30, 60, 4, 40 + seed);
        let reference = reference_solve(&p, &SolverConfig::default(), &vec![0.0; 60]).unwrap();
        assert!(reference.converged());
        let exact = lasso_sign_search(&p, &vec![0.0; 60], 500)
            .unwrap()
            .expect("certified");
        assert!(vector::dist2(&exact, &reference.final_x) < 1e-8);
    }
    // orthonormal design: soft thresholding of y
    let s = lasso_sign_search(&toy(), &[0.0, 0.0], 10).unwrap().unwrap();
    assert_eq!(s, vec![2.0, 0.0]);
    let (p, _) = planted(10, 20, 2, 3);
    let normalized = CompositeProblem::lasso(p.design().unwrap().clone(), p.targets().unwrap().to_vec(), 0.05, true).unwrap();
    let exact = lasso_sign_search(&normalized, &vec![0.0; 20], 500).unwrap().unwrap();
    let g = normalized.gradient_mapping(&exact, 1e-3).unwrap();
    assert!(vector::norm2(&g) < 1e-9);
}
