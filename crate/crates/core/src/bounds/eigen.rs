//! Smallest eigenvalues of a blocked symmetric positive semi-definite matrix:
//! the exact fixed-point characterisation and four computable lower bounds.

use super::gram::BlockedGram;
use crate::error::{Error, Result};
use crate::kernel::{norm2, solve_square, spectral_norm, sym_eig_min, sym_eigs, DenseMatrix};

const FIXED_POINT_TOL: f64 = 1e-14;
const FIXED_POINT_CAP: usize = 200;
const BISECTION_CAP: usize = 2000;

/// The smallest eigenvalue of `B` for a trailing block of size one, as the
/// solution of `λ = β − bᵀ(B11 − λI)⁻¹b` on `[0, β]`.
///
/// Requires `β < λmin(B11)`.
pub fn lambda_min_exact(gram: &BlockedGram) -> Result<f64> {
    require_single("lambda_min_exact", gram)?;
    Ok(cluster_lambdas_exact(gram)?[0])
}

/// The `r` smallest eigenvalues of `B`, in non-increasing order. Entry `j`
/// solves `λ = λ_j(B22 − B12ᵀ(B11 − λI)⁻¹B12)` on `[0, ‖B22‖₂]`.
///
/// Requires `‖B22‖₂ < λmin(B11)`. Each equation is solved by fixed-point
/// iteration from zero; if that stalls, by bisection on the bracket.
pub fn cluster_lambdas_exact(gram: &BlockedGram) -> Result<Vec<f64>> {
    let b22_norm = spectral_norm(gram.b22())?;
    let b11_min = sym_eig_min(gram.b11())?;
    if b22_norm >= b11_min {
        return Err(Error::Gate {
            op: "cluster_lambdas_exact",
            reason: format!("needs ‖B22‖₂ < λmin(B11), got {b22_norm:e} >= {b11_min:e}"),
        });
    }
    (0..gram.r()).map(|j| solve_fixed_point(gram, j, b22_norm)).collect()
}

/// `λ ↦ λ_j(B22 − B12ᵀ(B11 − λI)⁻¹B12)`, a non-increasing function of λ.
fn secular(gram: &BlockedGram, j: usize, lambda: f64) -> Result<f64> {
    let shifted = gram.b11().shift_diagonal(-lambda);
    let x = solve_square(&shifted, gram.b12())?;
    let schur = gram.b22().sub(&gram.b12().tr_matmul(&x)?)?;
    Ok(sym_eigs(&schur)?[j])
}

fn solve_fixed_point(gram: &BlockedGram, j: usize, b22_norm: f64) -> Result<f64> {
    let mut lambda = 0.0;
    for _ in 0..FIXED_POINT_CAP {
        let next = secular(gram, j, lambda)?;
        if (next - lambda).abs() <= FIXED_POINT_TOL * b22_norm.max(next.abs()) {
            return Ok(next);
        }
        lambda = next;
    }
    bisect(gram, j, b22_norm)
}

/// Bisection on `g(λ) = λ − secular(λ)`, increasing with `g(0) ≤ 0 ≤ g(‖B22‖₂)`.
fn bisect(gram: &BlockedGram, j: usize, b22_norm: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0_f64, b22_norm);
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= FIXED_POINT_TOL * b22_norm.max(mid.abs()) || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if mid - secular(gram, j, mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::FixedPoint {
        op: "cluster_lambdas_exact",
        reason: format!("bisection did not close the bracket for index {j}"),
    })
}

/// Lower bound on `λmin(B)` for a trailing block of size one:
/// `β − bᵀB11⁻¹b − β‖B11⁻¹b‖₂² / (1 − β‖B11⁻¹‖₂)`.
///
/// Requires `β < λmin(B11)`.
pub fn bound_single_first(gram: &BlockedGram) -> Result<f64> {
    require_single("bound_single_first", gram)?;
    let beta = gram.b22().get(0, 0);
    Ok(dominant_bound("bound_single_first", gram.b11(), gram.b12(), gram.b22(), beta)?[0])
}

/// Lower bound on `λmin(B)` that only inverts the dominant part `C11` of
/// `B11 = C11 + C12`: `β − bᵀC11⁻¹b − β‖C11⁻¹b‖₂² / (1 − β‖C11⁻¹‖₂)`.
///
/// Requires `λmin(C11) > β` and `C12` positive semi-definite.
pub fn bound_single_dominant(c11: &DenseMatrix, c12: &DenseMatrix, b: &DenseMatrix, beta: f64) -> Result<f64> {
    let gram = BlockedGram::with_split(c11.clone(), c12.clone(), b.clone(), DenseMatrix::diag(&[beta]))?;
    let (c11, _) = gram.split().expect("split was supplied");
    Ok(dominant_bound("bound_single_dominant", c11, gram.b12(), gram.b22(), beta)?[0])
}

/// Lower bounds on the `r` smallest eigenvalues of `B`, entry `j` being
/// `λ_j(Z_j)` with
///
/// `Z_j = B22 − B12ᵀB11⁻¹B12 − ‖B22‖₂·B12ᵀB11⁻¹(B11 − λ_{n−r+j}(B)·I)⁻¹B12`.
///
/// The eigenvalue inside `Z_j` comes from [`cluster_lambdas_exact`].
pub fn bound_cluster_first(gram: &BlockedGram) -> Result<Vec<f64>> {
    let lambdas = cluster_lambdas_exact(gram)?;
    let b22_norm = spectral_norm(gram.b22())?;
    let b12 = gram.b12();
    let x = solve_square(gram.b11(), b12)?;
    let schur = gram.b22().sub(&b12.tr_matmul(&x)?)?;
    lambdas
        .iter()
        .enumerate()
        .map(|(j, &lambda)| {
            let y = solve_square(&gram.b11().shift_diagonal(-lambda), b12)?;
            let z = schur.sub(&x.tr_matmul(&y)?.scale(b22_norm))?.symmetrize()?;
            Ok(sym_eigs(&z)?[j])
        })
        .collect()
}

/// Lower bounds on the `r` smallest eigenvalues of `B` that only invert the
/// dominant part `C11`:
///
/// `λ_j(B22 − B12ᵀC11⁻¹B12) − ‖B22‖₂‖C11⁻¹B12‖₂² / (1 − ‖B22‖₂‖C11⁻¹‖₂)`.
///
/// Requires `λmin(C11) > ‖B22‖₂` and `C12` positive semi-definite.
pub fn bound_cluster_dominant(
    c11: &DenseMatrix,
    c12: &DenseMatrix,
    b12: &DenseMatrix,
    b22: &DenseMatrix,
) -> Result<Vec<f64>> {
    let gram = BlockedGram::with_split(c11.clone(), c12.clone(), b12.clone(), b22.clone())?;
    let (c11, _) = gram.split().expect("split was supplied");
    let b22_norm = spectral_norm(gram.b22())?;
    dominant_bound("bound_cluster_dominant", c11, gram.b12(), gram.b22(), b22_norm)
}

/// Shared evaluation of the single and cluster bounds with inverted block `m11`.
fn dominant_bound(
    op: &'static str,
    m11: &DenseMatrix,
    b12: &DenseMatrix,
    b22: &DenseMatrix,
    b22_norm: f64,
) -> Result<Vec<f64>> {
    let m11_min = sym_eig_min(m11)?;
    if m11_min <= b22_norm {
        return Err(Error::Gate {
            op,
            reason: format!("needs λmin of the inverted block > ‖B22‖₂, got {m11_min:e} <= {b22_norm:e}"),
        });
    }
    let x = solve_square(m11, b12)?;
    let schur = b22.sub(&b12.tr_matmul(&x)?)?;
    let x_norm = if x.cols() == 1 { norm2(x.col(0)) } else { spectral_norm(&x)? };
    let denom = 1.0 - b22_norm / m11_min;
    assert!(denom > 0.0, "gate guarantees a positive denominator");
    let correction = b22_norm * x_norm * x_norm / denom;
    let eigs = if schur.rows() == 1 { vec![schur.get(0, 0)] } else { sym_eigs(&schur)? };
    Ok(eigs.into_iter().map(|e| e - correction).collect())
}

fn require_single(op: &'static str, gram: &BlockedGram) -> Result<()> {
    if gram.r() != 1 {
        return Err(Error::contract(op, format!("needs a trailing block of size 1, got {}", gram.r())));
    }
    Ok(())
}
