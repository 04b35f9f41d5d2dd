//! Dense singular value decomposition.
//!
//! `A·P = Q·R` by column-pivoted Householder QR, then one-sided Jacobi
//! rotations applied to the columns of `Rᵀ` until they are mutually
//! orthogonal to working precision. Pivoting makes `Rᵀ` a column-scaled,
//! well-conditioned matrix, so the Jacobi phase typically needs only a handful
//! of sweeps. With `Rᵀ·J = Ũ·Σ` the factors of `A` are `U = Q·diag(J, I)`
//! and `V = P·Ũ`.

use super::matrix::{norm2, DenseMatrix};
use super::qr::HouseholderQr;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Orthogonal `m × m` factor kept in factored form: the Householder
/// reflectors of a QR factorization followed by an `n × n` orthogonal block,
/// `U = Q·diag(inner, I_{m−n})`.
#[derive(Clone, Debug)]
pub struct OrthogonalFactor {
    qr: HouseholderQr,
    inner: DenseMatrix,
}

impl OrthogonalFactor {
    /// Order `m` of the factor.
    pub fn order(&self) -> usize {
        self.qr.rows()
    }

    /// Number of leading columns carried by the inner block (`n`).
    pub fn rank_block(&self) -> usize {
        self.inner.rows()
    }

    /// First `n` columns of `U`.
    pub fn thin(&self) -> DenseMatrix {
        let (m, n) = (self.order(), self.rank_block());
        let mut out = DenseMatrix::zeros(m, n);
        for j in 0..n {
            out.col_mut(j)[..n].copy_from_slice(self.inner.col(j));
        }
        self.qr.apply_q(&mut out);
        out
    }

    /// All `m × m` entries. Costs `O(m²·n)`; meant for small problems and tests.
    pub fn to_dense(&self) -> DenseMatrix {
        let (m, n) = (self.order(), self.rank_block());
        let mut out = DenseMatrix::zeros(m, m);
        for j in 0..n {
            out.col_mut(j)[..n].copy_from_slice(self.inner.col(j));
        }
        for j in n..m {
            out.set(j, j, 1.0);
        }
        self.qr.apply_q(&mut out);
        out
    }

    /// `Uᵀ·b` for `b` with `m` rows.
    pub fn transpose_apply(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let (m, n) = (self.order(), self.rank_block());
        if b.rows() != m {
            return Err(Error::shape("transpose_apply", format!("{m} rows"), format!("{} rows", b.rows())));
        }
        let mut out = b.clone();
        self.qr.apply_qt(&mut out);
        let top = out.block(0..n, 0..out.cols());
        let rotated = self.inner.tr_matmul(&top)?;
        for j in 0..out.cols() {
            out.col_mut(j)[..n].copy_from_slice(rotated.col(j));
        }
        Ok(out)
    }

    /// `U·b` for `b` with `m` rows.
    pub fn apply(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let (m, n) = (self.order(), self.rank_block());
        if b.rows() != m {
            return Err(Error::shape("apply", format!("{m} rows"), format!("{} rows", b.rows())));
        }
        let mut out = b.clone();
        let top = out.block(0..n, 0..out.cols());
        let rotated = self.inner.matmul(&top)?;
        for j in 0..out.cols() {
            out.col_mut(j)[..n].copy_from_slice(rotated.col(j));
        }
        self.qr.apply_q(&mut out);
        Ok(out)
    }
}

/// Full SVD `A = U·diag(sigma)·Vᵀ` of an `m × n` matrix, `m ≥ n`.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    u: OrthogonalFactor,
    sigma: Vec<f64>,
    v: DenseMatrix,
}

impl SvdFactors {
    /// Pairs orthogonal factors with a prescribed non-increasing, nonnegative
    /// spectrum of matching length.
    pub fn new(u: OrthogonalFactor, sigma: Vec<f64>, v: DenseMatrix) -> Result<Self> {
        let n = u.rank_block();
        if sigma.len() != n || v.shape() != (n, n) {
            return Err(Error::shape(
                "SvdFactors::new",
                format!("{n} singular values and a {n}x{n} V"),
                format!("{} values and a {}x{} V", sigma.len(), v.rows(), v.cols()),
            ));
        }
        if sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::contract("SvdFactors::new", "singular values must be finite and nonnegative"));
        }
        if sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::contract("SvdFactors::new", "singular values must be non-increasing"));
        }
        Ok(Self { u, sigma, v })
    }

    pub fn u(&self) -> &OrthogonalFactor {
        &self.u
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn rows(&self) -> usize {
        self.u.order()
    }

    pub fn cols(&self) -> usize {
        self.v.rows()
    }

    /// `U·diag(sigma)·Vᵀ` restricted to the thin factor.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut scaled_vt = self.v.transpose();
        for (i, &s) in self.sigma.iter().enumerate() {
            for j in 0..scaled_vt.cols() {
                let x = scaled_vt.get(i, j);
                scaled_vt.set(i, j, s * x);
            }
        }
        self.u
            .thin()
            .matmul(&scaled_vt)
            .expect("thin U and Vᵀ are conformal by construction")
    }
}

/// Full SVD of `a` (`rows ≥ cols`).
pub fn svd_full(a: &DenseMatrix) -> Result<SvdFactors> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::contract("svd_full", format!("needs rows >= cols, got {m}x{n}")));
    }
    if n == 0 {
        return Err(Error::contract("svd_full", "matrix has no columns"));
    }
    if !a.is_finite() {
        return Err(Error::contract("svd_full", "matrix has non-finite entries"));
    }
    let qr = HouseholderQr::new(a, true);
    let mut x = qr.r_transpose();
    let mut j = DenseMatrix::identity(n);
    jacobi_orthogonalize(&mut x, Some(&mut j))?;

    let norms: Vec<f64> = (0..n).map(|c| norm2(x.col(c))).collect();
    let order = descending_order(&norms);
    let sigma: Vec<f64> = order.iter().map(|&c| norms[c]).collect();

    // left block J, columns permuted into sorted order
    let inner = DenseMatrix::from_fn(n, n, |i, c| j.get(i, order[c]));

    // right factor: normalized columns of Rᵀ·J, rows un-permuted by P
    let mut u_tilde = DenseMatrix::zeros(n, n);
    let mut missing = Vec::new();
    for (c, &src) in order.iter().enumerate() {
        let s = norms[src];
        if s > 0.0 && s.is_normal() {
            let col = u_tilde.col_mut(c);
            for (dst, &xv) in col.iter_mut().zip(x.col(src)) {
                *dst = xv / s;
            }
        } else {
            missing.push(c);
        }
    }
    complete_orthonormal(&mut u_tilde, &missing);
    let perm = qr.perm();
    let mut v = DenseMatrix::zeros(n, n);
    for c in 0..n {
        for i in 0..n {
            v.set(perm[i], c, u_tilde.get(i, c));
        }
    }

    SvdFactors::new(OrthogonalFactor { qr, inner }, sigma, v)
}

/// Singular values only, in non-increasing order. Accepts any shape.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Ok(Vec::new());
    }
    if !a.is_finite() {
        return Err(Error::contract("singular_values", "matrix has non-finite entries"));
    }
    if a.rows() < a.cols() {
        return singular_values(&a.transpose());
    }
    if a.cols() == 1 {
        return Ok(vec![norm2(a.col(0))]);
    }
    let qr = HouseholderQr::new(a, true);
    let mut x = qr.r_transpose();
    jacobi_orthogonalize(&mut x, None)?;
    let mut sigma: Vec<f64> = (0..x.cols()).map(|c| norm2(x.col(c))).collect();
    sigma.sort_by(|p, q| q.total_cmp(p));
    Ok(sigma)
}

/// Largest singular value.
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    if m.rows() == 1 || m.cols() == 1 {
        return Ok(norm2(m.as_slice()));
    }
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// One-sided Jacobi: rotates column pairs of `g` until every pair satisfies
/// `|g_pᵀ g_q| ≤ tol·‖g_p‖·‖g_q‖`, accumulating the rotations into `acc`.
fn jacobi_orthogonalize(g: &mut DenseMatrix, mut acc: Option<&mut DenseMatrix>) -> Result<usize> {
    let n = g.cols();
    let tol = f64::EPSILON * (g.rows() as f64).sqrt();
    for sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (gp, gq) = g.col_pair_mut(p, q);
                let (alpha, beta, gamma) = gram_entries(gp, gq);
                if gamma == 0.0 || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.abs() <= tol * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = 1.0_f64.copysign(zeta) / (zeta.abs() + 1.0_f64.hypot(zeta));
                let c = 1.0 / 1.0_f64.hypot(t);
                let s = c * t;
                rotate(gp, gq, c, s);
                if let Some(acc) = acc.as_deref_mut() {
                    let (ap, aq) = acc.col_pair_mut(p, q);
                    rotate(ap, aq, c, s);
                }
            }
        }
        if !rotated {
            return Ok(sweep + 1);
        }
    }
    Err(Error::NoConvergence {
        algorithm: "one-sided Jacobi SVD",
        iterations: MAX_SWEEPS,
    })
}

fn gram_entries(p: &[f64], q: &[f64]) -> (f64, f64, f64) {
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for (&x, &y) in p.iter().zip(q) {
        a += x * x;
        b += y * y;
        c += x * y;
    }
    (a, b, c)
}

fn rotate(p: &mut [f64], q: &mut [f64], c: f64, s: f64) {
    for (x, y) in p.iter_mut().zip(q.iter_mut()) {
        let (xv, yv) = (*x, *y);
        *x = c * xv - s * yv;
        *y = s * xv + c * yv;
    }
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

/// Fills the listed columns of `q` with unit vectors orthogonal to all other
/// columns (two rounds of Gram–Schmidt against the canonical basis).
fn complete_orthonormal(q: &mut DenseMatrix, missing: &[usize]) {
    let n = q.rows();
    let mut filled: Vec<bool> = (0..q.cols()).map(|c| !missing.contains(&c)).collect();
    for &c in missing {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for k in 0..n {
            let mut cand = vec![0.0; n];
            cand[k] = 1.0;
            for _ in 0..2 {
                for other in 0..q.cols() {
                    if filled[other] {
                        let proj = super::matrix::dot(q.col(other), &cand);
                        super::matrix::axpy(-proj, q.col(other), &mut cand);
                    }
                }
            }
            let nrm = norm2(&cand);
            if best.as_ref().is_none_or(|(bn, _)| nrm > *bn) {
                best = Some((nrm, cand));
            }
        }
        let (nrm, cand) = best.expect("n >= 1");
        for (dst, v) in q.col_mut(c).iter_mut().zip(cand) {
            *dst = v / nrm;
        }
        filled[c] = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const U64: f64 = f64::EPSILON / 2.0;

    fn orthogonality_error(q: &DenseMatrix) -> f64 {
        let g = q.tr_matmul(q).unwrap();
        let n = g.rows();
        spectral_norm(&g.sub(&DenseMatrix::identity(n)).unwrap()).unwrap()
    }

    fn check_factors(a: &DenseMatrix) {
        let f = svd_full(a).unwrap();
        let (m, n) = a.shape();
        assert!(orthogonality_error(&f.u().to_dense()) <= 100.0 * U64 * m as f64);
        assert!(orthogonality_error(f.v()) <= 100.0 * U64 * n as f64);
        let resid = spectral_norm(&f.reconstruct().sub(a).unwrap()).unwrap();
        let anorm = f.sigma()[0];
        assert!(resid <= 100.0 * U64 * anorm * m.max(n) as f64, "resid {resid:e}");
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let f = svd_full(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(f.sigma(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn stacked_diagonal() {
        let a = DenseMatrix::from_rows(&[&[3.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let f = svd_full(&a).unwrap();
        assert_eq!(f.sigma(), &[3.0, 1.0]);
        check_factors(&a);
    }

    #[test]
    fn rank_deficient_input_keeps_orthogonal_factors() {
        let a = DenseMatrix::from_fn(6, 4, |i, j| if j == 2 { 0.0 } else { (i + 2 * j) as f64 });
        let f = svd_full(&a).unwrap();
        assert!(f.sigma()[3].abs() < 1e-12);
        check_factors(&a);
        check_factors(&DenseMatrix::zeros(3, 2));
    }

    #[test]
    fn factored_u_matches_dense_products() {
        let a = DenseMatrix::from_fn(7, 3, |i, j| ((i * 5 + j * 3) % 7) as f64 - 3.0);
        let f = svd_full(&a).unwrap();
        let u = f.u().to_dense();
        let b = DenseMatrix::from_fn(7, 2, |i, j| (i as f64) * 0.5 - (j as f64));
        let ut_b = f.u().transpose_apply(&b).unwrap();
        let dense = u.tr_matmul(&b).unwrap();
        assert!(ut_b.sub(&dense).unwrap().max_abs() < 1e-13);
        let u_b = f.u().apply(&b).unwrap();
        assert!(u_b.sub(&u.matmul(&b).unwrap()).unwrap().max_abs() < 1e-13);
        assert!(f.u().thin().sub(&u.block(0..7, 0..3)).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn graded_matrix_keeps_relative_accuracy_of_tiny_values() {
        // columns scaled over 12 orders of magnitude
        let scales = [1e6, 1e2, 1e-2, 1e-6];
        let a = DenseMatrix::from_fn(5, 4, |i, j| if i == j { scales[j] } else { 0.0 });
        let s = singular_values(&a).unwrap();
        for (got, want) in s.iter().zip(scales) {
            assert!(((got - want) / want).abs() < 1e-15);
        }
    }

    #[test]
    fn wide_and_vector_inputs() {
        let a = DenseMatrix::from_rows(&[&[3.0, 4.0]]).unwrap();
        assert_eq!(spectral_norm(&a).unwrap(), 5.0);
        assert_eq!(singular_values(&a).unwrap(), vec![5.0]);
        assert!(svd_full(&a).is_err());
        assert_eq!(spectral_norm(&DenseMatrix::from_rows(&[&[-2.5]]).unwrap()).unwrap(), 2.5);
    }
}
