use super::*;
use crate::error::Error;

fn m(rows: &[&[f64]]) -> DenseMatrix<f64> {
    DenseMatrix::from_rows(rows).unwrap()
}

fn gaussian(n: usize, d: usize, seed: u64) -> DenseMatrix<f64> {
    sample_ensemble(&EnsembleSpec::new(EnsembleKind::Gaussian, n, d, seed)).unwrap()
}

/// Eigenvalues of a symmetric 2×2 matrix from the characteristic polynomial.
fn eig2(a: f64, b: f64, d: f64) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    (mean + r, mean - r)
}

fn power_iteration(g: &DenseMatrix<f64>, iters: usize) -> f64 {
    let mut x = vec![1.0; g.cols()];
    let mut lambda = 0.0;
    for _ in 0..iters {
        let y = g.mul_vec(&x);
        let n = vector::norm2(&y);
        lambda = vector::dot(&x, &y) / vector::dot(&x, &x);
        x = vector::scale(&y, 1.0 / n);
    }
    lambda
}

#[test]
fn identity_singular_values() {
    assert_eq!(singular_values(&DenseMatrix::<f64>::identity(2)).unwrap(), vec![1.0, 1.0]);
}

#[test]
fn diagonal_singular_values() {
    let s = singular_values(&DenseMatrix::from_diag(&[3.0, 0.0])).unwrap();
    assert_eq!(s, vec![3.0, 0.0]);
}

#[test]
fn singular_values_match_gram_eigenvalues() {
    let a = gaussian(3, 2, 11);
    let g = a.gram();
    let (l1, l2) = eig2(g.get(0, 0), g.get(0, 1), g.get(1, 1));
    let s = singular_values(&a).unwrap();
    assert!((s[0] * s[0] - l1).abs() <= 1e-10 * l1);
    assert!((s[1] * s[1] - l2).abs() <= 1e-10 * l1);
}

#[test]
fn singular_values_wide_and_tall_agree_with_jacobi_eigen() {
    for &(r, c) in &[(7, 4), (4, 7), (6, 6)] {
        let a = gaussian(r, c, 3 + r as u64);
        let s = singular_values(&a).unwrap();
        assert_eq!(s.len(), r.min(c));
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        let g = if r >= c { a.gram() } else { a.outer_gram() };
        let mut ev = symmetric_eigen(&g).unwrap().values;
        ev.reverse();
        for (sv, e) in s.iter().zip(&ev) {
            assert!((sv * sv - e).abs() <= 1e-10 * ev[0], "{sv} vs {e}");
        }
    }
}

#[test]
fn non_finite_entry_is_rejected() {
    assert!(matches!(
        DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
        Err(Error::Input(_))
    ));
}

#[test]
fn smallest_nonzero_examples() {
    let d = DenseMatrix::from_diag(&[2.0, 0.5]);
    assert_eq!(smallest_nonzero_singular(&d, 1e-12).unwrap(), 0.5);
    let d = DenseMatrix::from_diag(&[3.0, 0.0]);
    assert_eq!(smallest_nonzero_singular(&d, 1e-12).unwrap(), 3.0);
    let r1 = DenseMatrix::<f64>::outer(&[1.0, 2.0], &[2.0, 0.0, 1.0]);
    assert!((smallest_nonzero_singular(&r1, 1e-12).unwrap() - 5.0).abs() < 1e-12);
    let z = DenseMatrix::<f64>::zeros(2, 2);
    assert!(matches!(smallest_nonzero_singular(&z, 1e-12), Err(Error::Degenerate(_))));
    assert!(matches!(sigma_min_plus(&z), Err(Error::Degenerate(_))));
}

#[test]
fn smoothness_examples() {
    assert_eq!(smoothness_constant(&DenseMatrix::<f64>::identity(2), false).unwrap(), 1.0);
    assert_eq!(smoothness_constant(&DenseMatrix::from_diag(&[3.0, 1.0]), false).unwrap(), 9.0);
    let a = gaussian(4, 2, 5);
    let l = smoothness_constant(&a, true).unwrap();
    let oracle = power_iteration(&a.gram(), 500) / 4.0;
    assert!((l - oracle).abs() <= 1e-10 * oracle);
}

#[test]
fn rademacher_entries_are_signs() {
    let a: DenseMatrix<f64> =
        sample_ensemble(&EnsembleSpec::new(EnsembleKind::Rademacher, 30, 20, 1)).unwrap();
    assert!(a.as_slice().iter().all(|&v| v == 1.0 || v == -1.0));
}

#[test]
fn ensembles_are_deterministic() {
    for kind in [EnsembleKind::Gaussian, EnsembleKind::Rademacher, EnsembleKind::Spiked] {
        let spec = EnsembleSpec::new(kind, 8, 5, 42).with_rho(0.3);
        let a: DenseMatrix<f64> = sample_ensemble(&spec).unwrap();
        let b: DenseMatrix<f64> = sample_ensemble(&spec).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn spiked_column_correlation() {
    let spec = EnsembleSpec::new(EnsembleKind::Spiked, 2000, 5, 9).with_rho(0.8);
    let a: DenseMatrix<f64> = sample_ensemble(&spec).unwrap();
    let cols: Vec<Vec<f64>> = (0..5).map(|j| a.column(j)).collect();
    let centered: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| {
            let mu = c.iter().sum::<f64>() / c.len() as f64;
            c.iter().map(|v| v - mu).collect()
        })
        .collect();
    let mut total = 0.0;
    let mut count = 0.0;
    for i in 0..5 {
        for j in (i + 1)..5 {
            let r = vector::dot(&centered[i], &centered[j])
                / (vector::norm2(&centered[i]) * vector::norm2(&centered[j]));
            total += r;
            count += 1.0;
        }
    }
    assert!((total / count - 0.8).abs() < 0.05);
}

#[test]
fn rho_out_of_range() {
    for rho in [-0.1, 1.0, 1.5] {
        let spec = EnsembleSpec::new(EnsembleKind::Spiked, 3, 3, 0).with_rho(rho);
        assert!(matches!(sample_ensemble::<f64>(&spec), Err(Error::Input(_))));
    }
}

#[test]
fn pseudo_inverse_of_rank_deficient() {
    let a = m(&[&[1.0, 2.0], &[2.0, 4.0], &[0.0, 0.0]]);
    let p = pseudo_inverse(&a).unwrap();
    // A A⁺ A = A
    let back = a.matmul(&p).unwrap().matmul(&a).unwrap();
    for (x, y) in back.as_slice().iter().zip(a.as_slice()) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn svd_reconstructs() {
    let a = gaussian(5, 3, 21);
    let Svd { u, s, v } = svd(&a).unwrap();
    for i in 0..5 {
        for j in 0..3 {
            let r: f64 = (0..3).map(|k| u.get(i, k) * s[k] * v.get(j, k)).sum();
            assert!((r - a.get(i, j)).abs() < 1e-12);
        }
    }
}

#[test]
fn complement_is_orthonormal_and_orthogonal() {
    let w = [1.0f64, -1.0, 1.0, 1.0];
    let b = orthogonal_complement(&w).unwrap();
    let g = b.gram();
    for i in 0..3 {
        assert!(vector::dot(&b.column(i), &w).abs() < 1e-14);
        for j in 0..3 {
            let e = if i == j { 1.0 } else { 0.0 };
            assert!((g.get(i, j) - e).abs() < 1e-14);
        }
    }
}

#[test]
fn text_round_trip() {
    let a = gaussian(3, 2, 4);
    let back: DenseMatrix<f64> = parse_matrix(&format_matrix(&a)).unwrap();
    assert_eq!(a, back);
    let v: Vec<f64> = parse_vector("# comment\n1 3\n1 2 3\n").unwrap();
    assert_eq!(v, vec![1.0, 2.0, 3.0]);
    let v: Vec<f64> = parse_vector(&format_vector(&[0.1, -2.5])).unwrap();
    assert_eq!(v, vec![0.1, -2.5]);
}

#[test]
fn text_errors_name_the_line() {
    let err = parse_matrix::<f64>("2 2\n1 2\n3 x\n").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }));
    assert!(parse_matrix::<f64>("2 2\n1 2\n").is_err());
    assert!(parse_matrix::<f64>("").is_err());
    assert!(parse_vector::<f64>("2 2\n1 2\n3 4\n").is_err());
}

#[test]
fn f32_path_works() {
    let a: DenseMatrix<f32> = DenseMatrix::from_diag(&[3.0, 1.0]);
    assert_eq!(singular_values(&a).unwrap(), vec![3.0f32, 1.0]);
}
