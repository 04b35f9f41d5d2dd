//! Householder QR with optional column pivoting.

use super::matrix::{axpy, dot, norm2, DenseMatrix};

/// Compact Householder QR of an `m × n` matrix with `m ≥ n`: `A·P = Q·R`.
///
/// Reflector `k` is `H_k = I − τ_k·v_k·v_kᵀ` with `v_k[k] = 1` implicit and the
/// tail stored below the diagonal of `factors`. `R` occupies the upper triangle.
#[derive(Clone, Debug)]
pub(crate) struct HouseholderQr {
    factors: DenseMatrix,
    tau: Vec<f64>,
    /// Column `j` of `A·P` is column `perm[j]` of `A`.
    perm: Vec<usize>,
}

// columns of the right-hand side processed together when applying Q
const APPLY_BLOCK: usize = 16;

impl HouseholderQr {
    pub(crate) fn new(a: &DenseMatrix, pivot: bool) -> Self {
        let (m, n) = a.shape();
        assert!(m >= n, "HouseholderQr needs rows >= cols");
        let mut f = a.clone();
        let mut tau = vec![0.0; n];
        let mut perm: Vec<usize> = (0..n).collect();

        let mut vn1: Vec<f64> = (0..n).map(|j| norm2(f.col(j))).collect();
        let mut vn2 = vn1.clone();
        let tol3z = f64::EPSILON.sqrt();

        for k in 0..n {
            if pivot {
                let p = k + argmax(&vn1[k..]);
                if p != k {
                    let (ck, cp) = f.col_pair_mut(k, p);
                    ck.swap_with_slice(cp);
                    perm.swap(k, p);
                    vn1[p] = vn1[k];
                    vn2[p] = vn2[k];
                }
            }

            tau[k] = make_reflector(&mut f.col_mut(k)[k..]);

            for j in k + 1..n {
                let (vk, cj) = f.col_pair_mut(k, j);
                apply_reflector(tau[k], &vk[k..], &mut cj[k..]);
            }

            if pivot {
                // LAPACK-style norm downdating with recomputation on cancellation
                for j in k + 1..n {
                    if vn1[j] == 0.0 {
                        continue;
                    }
                    let ratio = f.get(k, j).abs() / vn1[j];
                    let temp = (1.0 - ratio * ratio).max(0.0);
                    let temp2 = temp * (vn1[j] / vn2[j]).powi(2);
                    if temp2 <= tol3z {
                        vn1[j] = norm2(&f.col(j)[k + 1..]);
                        vn2[j] = vn1[j];
                    } else {
                        vn1[j] *= temp.sqrt();
                    }
                }
            }
        }
        Self { factors: f, tau, perm }
    }

    pub(crate) fn rows(&self) -> usize {
        self.factors.rows()
    }

    pub(crate) fn cols(&self) -> usize {
        self.factors.cols()
    }

    pub(crate) fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// The `n × n` upper-triangular factor.
    #[cfg(test)]
    pub(crate) fn r(&self) -> DenseMatrix {
        let n = self.cols();
        DenseMatrix::from_fn(n, n, |i, j| if i <= j { self.factors.get(i, j) } else { 0.0 })
    }

    /// `Rᵀ`, the lower-triangular transpose.
    pub(crate) fn r_transpose(&self) -> DenseMatrix {
        let n = self.cols();
        DenseMatrix::from_fn(n, n, |i, j| if j <= i { self.factors.get(j, i) } else { 0.0 })
    }

    /// `b ← Qᵀ·b`.
    pub(crate) fn apply_qt(&self, b: &mut DenseMatrix) {
        assert_eq!(b.rows(), self.rows());
        let n = self.cols();
        for c0 in (0..b.cols()).step_by(APPLY_BLOCK) {
            let c1 = (c0 + APPLY_BLOCK).min(b.cols());
            for k in 0..n {
                if self.tau[k] == 0.0 {
                    continue;
                }
                let v = &self.factors.col(k)[k..];
                for c in c0..c1 {
                    apply_reflector(self.tau[k], v, &mut b.col_mut(c)[k..]);
                }
            }
        }
    }

    /// `b ← Q·b`.
    pub(crate) fn apply_q(&self, b: &mut DenseMatrix) {
        assert_eq!(b.rows(), self.rows());
        let n = self.cols();
        for c0 in (0..b.cols()).step_by(APPLY_BLOCK) {
            let c1 = (c0 + APPLY_BLOCK).min(b.cols());
            for k in (0..n).rev() {
                if self.tau[k] == 0.0 {
                    continue;
                }
                let v = &self.factors.col(k)[k..];
                for c in c0..c1 {
                    apply_reflector(self.tau[k], v, &mut b.col_mut(c)[k..]);
                }
            }
        }
    }
}

fn argmax(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in x.iter().enumerate() {
        if v > x[best] {
            best = i;
        }
    }
    best
}

/// Overwrites `x` with `[β, v_tail]` and returns τ so that
/// `(I − τ·v·vᵀ)·x = β·e₁` with `v = [1, v_tail]`.
fn make_reflector(x: &mut [f64]) -> f64 {
    if x.len() <= 1 {
        return 0.0;
    }
    let alpha = x[0];
    let xnorm = norm2(&x[1..]);
    if xnorm == 0.0 {
        return 0.0;
    }
    let beta = -alpha.hypot(xnorm).copysign(alpha);
    let tau = (beta - alpha) / beta;
    let inv = 1.0 / (alpha - beta);
    for xi in &mut x[1..] {
        *xi *= inv;
    }
    x[0] = beta;
    tau
}

/// `y ← (I − τ·v·vᵀ)·y` where `v[0] = 1` is implicit (the stored `v[0]` is ignored).
fn apply_reflector(tau: f64, v: &[f64], y: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let w = tau * (y[0] + dot(&v[1..], &y[1..]));
    y[0] -= w;
    axpy(-w, &v[1..], &mut y[1..]);
}
