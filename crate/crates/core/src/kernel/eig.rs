//! Symmetric eigenvalues by cyclic two-sided Jacobi rotations.

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 30;
const OFF_TOL: f64 = 1e-14;

/// Eigenvalues of the symmetric part `(S + Sᵀ)/2`, in non-increasing order.
///
/// Works for indefinite input. Sweeps stop once the off-diagonal Frobenius
/// norm falls below `1e-14·‖S‖_F`.
pub fn sym_eigs(s: &DenseMatrix) -> Result<Vec<f64>> {
    if !s.is_square() {
        return Err(Error::contract(
            "sym_eigs",
            format!("needs a square matrix, got {}x{}", s.rows(), s.cols()),
        ));
    }
    let mut a = s.symmetrize()?;
    let n = a.rows();
    let target = OFF_TOL * a.frobenius_norm();

    let mut converged = off_diagonal_norm(&a) <= target;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let tau = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = 1.0_f64.copysign(tau) / (tau.abs() + 1.0_f64.hypot(tau));
                let c = 1.0 / 1.0_f64.hypot(t);
                let sn = t * c;
                rotate_symmetric(&mut a, p, q, c, sn);
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&a) <= target;
    }
    if !converged {
        return Err(Error::NoConvergence {
            algorithm: "cyclic Jacobi eigensolver",
            iterations: MAX_SWEEPS,
        });
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    eigs.sort_by(|x, y| y.total_cmp(x));
    Ok(eigs)
}

/// Smallest eigenvalue of the symmetric part.
pub fn sym_eig_min(s: &DenseMatrix) -> Result<f64> {
    Ok(*sym_eigs(s)?.last().expect("matrices are non-empty"))
}

/// Largest eigenvalue of the symmetric part.
pub fn sym_eig_max(s: &DenseMatrix) -> Result<f64> {
    Ok(sym_eigs(s)?[0])
}

/// `A ← JᵀAJ` for the plane rotation acting on indices `p < q`, with the
/// `(p, q)` entry set to exactly zero afterwards.
fn rotate_symmetric(a: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    let (app, aqq, apq) = (a.get(p, p), a.get(q, q), a.get(p, q));
    {
        let (cp, cq) = a.col_pair_mut(p, q);
        for k in 0..n {
            let (x, y) = (cp[k], cq[k]);
            cp[k] = c * x - s * y;
            cq[k] = s * x + c * y;
        }
    }
    for k in 0..n {
        let (x, y) = (a.get(p, k), a.get(q, k));
        a.set(p, k, c * x - s * y);
        a.set(q, k, s * x + c * y);
    }
    let t = s / c;
    a.set(p, p, app - t * apq);
    a.set(q, q, aqq + t * apq);
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut scale = 0.0_f64;
    let mut sum = 1.0_f64;
    for j in 0..n {
        for (i, &v) in a.col(j).iter().enumerate() {
            if i == j || v == 0.0 {
                continue;
            }
            let av = v.abs();
            if av > scale {
                sum = 1.0 + sum * (scale / av).powi(2);
                scale = av;
            } else {
                sum += (av / scale).powi(2);
            }
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        scale * sum.sqrt()
    }
}
