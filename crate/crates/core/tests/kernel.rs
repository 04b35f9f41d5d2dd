mod common;

use common::{gaussian, orthogonal, rel_diff, rng};
use rand::Rng;
use sigbound::kernel::{
    parse_dmat, singular_values, solve_square, solve_square_transposed, spectral_norm, svd_full, sym_eig_min,
    sym_eigs, to_dmat_string, DenseMatrix,
};

#[test]
fn gaussian_svd_matches_gram_eigenvalues() {
    for seed in 0..20 {
        let a = gaussian(&mut rng(seed), 6, 4);
        let sigma = singular_values(&a).unwrap();
        let eigs = sym_eigs(&a.tr_matmul(&a).unwrap()).unwrap();
        for (s, l) in sigma.iter().zip(&eigs) {
            assert!(rel_diff(s * s, *l) <= 1e-10, "seed {seed}: {s}² vs {l}");
        }
    }
}

#[test]
fn svd_factors_reconstruct_and_are_orthonormal() {
    for seed in 0..10 {
        let mut rng = rng(seed);
        let (m, n) = (rng.random_range(4..40), rng.random_range(1..5));
        let a = gaussian(&mut rng, m.max(n), n);
        let f = svd_full(&a).unwrap();
        let back = f.reconstruct();
        assert!(back.sub(&a).unwrap().max_abs() <= 1e-13 * f.sigma()[0]);
        let u = f.u().to_dense();
        let utu = u.tr_matmul(&u).unwrap();
        assert!(utu.sub(&DenseMatrix::identity(u.cols())).unwrap().max_abs() <= 1e-13);
        let vtv = f.v().tr_matmul(f.v()).unwrap();
        assert!(vtv.sub(&DenseMatrix::identity(n)).unwrap().max_abs() <= 1e-13);
    }
}

#[test]
fn eigensolver_recovers_prescribed_spectrum() {
    for seed in 0..10 {
        let mut rng = rng(seed);
        let n = rng.random_range(2..30);
        let q = orthogonal(&mut rng, n);
        let mut lambda: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let s = q.matmul(&DenseMatrix::diag(&lambda)).unwrap().matmul_tr(&q).unwrap();
        lambda.sort_by(|a, b| b.total_cmp(a));
        let got = sym_eigs(&s).unwrap();
        for (g, l) in got.iter().zip(&lambda) {
            assert!((g - l).abs() <= 1e-12 * 5.0 * n as f64, "{g} vs {l}");
        }
    }
}

#[test]
fn spectral_norm_agrees_with_gram_route() {
    for seed in 0..20 {
        let mut rng = rng(seed);
        let (m, n) = (rng.random_range(1..30), rng.random_range(1..30));
        let a = gaussian(&mut rng, m, n);
        let norm = spectral_norm(&a).unwrap();
        let gram_max = sym_eigs(&a.matmul_tr(&a).unwrap()).unwrap()[0];
        assert!(rel_diff(norm * norm, gram_max) <= 1e-12);
        // ‖A‖₂ ≤ ‖A‖_F ≤ √rank·‖A‖₂
        let fro = a.frobenius_norm();
        assert!(norm <= fro * (1.0 + 1e-15));
        assert!(fro <= (a.rows().min(a.cols()) as f64).sqrt() * norm * (1.0 + 1e-15));
    }
}

#[test]
fn random_solves_have_small_residuals() {
    for seed in 0..20 {
        let mut rng = rng(seed);
        let m = gaussian(&mut rng, 8, 8);
        let b = gaussian(&mut rng, 8, 3);
        let x = solve_square(&m, &b).unwrap();
        let residual = m.matmul(&x).unwrap().sub(&b).unwrap().max_abs();
        assert!(residual <= 1e-12 * m.max_abs() * x.max_abs() * 8.0);
        let y = solve_square_transposed(&m, &b).unwrap();
        let residual = m.tr_matmul(&y).unwrap().sub(&b).unwrap().max_abs();
        assert!(residual <= 1e-12 * m.max_abs() * y.max_abs() * 8.0);
    }
}

#[test]
fn singular_values_are_orthogonally_invariant() {
    for seed in 0..10 {
        let mut rng = rng(seed);
        let a = gaussian(&mut rng, 12, 5);
        let p = orthogonal(&mut rng, 12);
        let q = orthogonal(&mut rng, 5);
        let rotated = p.matmul(&a).unwrap().matmul(&q).unwrap();
        let s = singular_values(&a).unwrap();
        let t = singular_values(&rotated).unwrap();
        for (x, y) in s.iter().zip(&t) {
            assert!((x - y).abs() <= 1e-13 * s[0]);
        }
    }
}

#[test]
fn eigenvalues_shift_with_the_diagonal() {
    let mut rng = rng(3);
    let g = gaussian(&mut rng, 7, 7);
    let s = g.add(&g.transpose()).unwrap();
    let base = sym_eigs(&s).unwrap();
    let shifted = sym_eigs(&s.shift_diagonal(2.5)).unwrap();
    for (b, x) in base.iter().zip(&shifted) {
        assert!((b + 2.5 - x).abs() <= 1e-13 * 10.0);
    }
}

#[test]
fn gram_matrices_have_nonnegative_spectrum() {
    for seed in 0..10 {
        let a = gaussian(&mut rng(seed), 3, 6);
        let gram = a.tr_matmul(&a).unwrap();
        // rank 3 in dimension 6: three zero eigenvalues up to rounding
        let min = sym_eig_min(&gram).unwrap();
        assert!(min >= -1e-13 * sym_eigs(&gram).unwrap()[0], "{min}");
    }
}

#[test]
fn dmat_text_is_byte_stable() {
    let a = gaussian(&mut rng(11), 5, 3);
    let text = to_dmat_string(&a);
    let back = parse_dmat(&text, "mem").unwrap();
    assert_eq!(back, a);
    assert_eq!(to_dmat_string(&back), text);
}
