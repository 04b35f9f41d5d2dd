//! Square linear solves by LU factorization with partial pivoting.

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Solves `M·X = RHS` for square `M`.
///
/// A pivot whose magnitude falls below `n·ε·max|M|` is treated as singular to
/// working precision and reported with its index and magnitude.
pub fn solve_square(m: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    let n = m.rows();
    if !m.is_square() {
        return Err(Error::contract(
            "solve_square",
            format!("needs a square matrix, got {}x{}", m.rows(), m.cols()),
        ));
    }
    if rhs.rows() != n {
        return Err(Error::shape("solve_square", format!("{n} right-hand-side rows"), format!("{}", rhs.rows())));
    }
    let lu = Lu::new(m)?;
    Ok(lu.solve(rhs))
}

/// Solves `Mᵀ·X = RHS` for square `M`.
pub fn solve_square_transposed(m: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    solve_square(&m.transpose(), rhs)
}

struct Lu {
    lu: DenseMatrix,
    piv: Vec<usize>,
}

impl Lu {
    fn new(m: &DenseMatrix) -> Result<Self> {
        let n = m.rows();
        let mut lu = m.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let threshold = n as f64 * f64::EPSILON * m.max_abs();
        for k in 0..n {
            let col = lu.col(k);
            let (p, mag) = (k..n)
                .map(|i| (i, col[i].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if mag <= threshold || mag == 0.0 {
                return Err(Error::Singular { index: k, magnitude: mag });
            }
            if p != k {
                piv.swap(k, p);
                for j in 0..n {
                    let (a, b) = (lu.get(k, j), lu.get(p, j));
                    lu.set(k, j, b);
                    lu.set(p, j, a);
                }
            }
            let pivot = lu.get(k, k);
            for v in &mut lu.col_mut(k)[k + 1..] {
                *v /= pivot;
            }
            for j in k + 1..n {
                let ukj = lu.get(k, j);
                if ukj == 0.0 {
                    continue;
                }
                let (ck, cj) = lu.col_pair_mut(k, j);
                for i in k + 1..n {
                    cj[i] -= ck[i] * ukj;
                }
            }
        }
        Ok(Self { lu, piv })
    }

    fn solve(&self, rhs: &DenseMatrix) -> DenseMatrix {
        let n = self.lu.rows();
        let mut x = DenseMatrix::zeros(n, rhs.cols());
        for c in 0..rhs.cols() {
            let b = rhs.col(c);
            let col = x.col_mut(c);
            for (i, &p) in self.piv.iter().enumerate() {
                col[i] = b[p];
            }
            for k in 0..n {
                let xk = col[k];
                if xk != 0.0 {
                    let lk = self.lu.col(k);
                    for i in k + 1..n {
                        col[i] -= lk[i] * xk;
                    }
                }
            }
            for k in (0..n).rev() {
                let uk = self.lu.col(k);
                col[k] /= uk[k];
                let xk = col[k];
                if xk != 0.0 {
                    for i in 0..k {
                        col[i] -= uk[i] * xk;
                    }
                }
            }
        }
        x
    }
}
