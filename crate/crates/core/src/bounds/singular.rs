//! Lower bounds for the smallest singular values of `A + E` in terms of the
//! singular values of `A` and the rotated blocks of `E`.

use super::gram::BlockedGram;
use crate::error::{Error, Result};
use crate::kernel::{norm2, singular_values, solve_square, solve_square_transposed, spectral_norm, sym_eigs, DenseMatrix};
use crate::precision::RotatedPerturbation;

/// The two hypotheses under which the bounds hold, with signed slack.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssumptionStatus {
    /// `σ_{n−r} > 4‖E‖₂`: the large cluster sits well above the perturbation.
    pub gap_ok: bool,
    /// `σ_{n−r+1} < ‖E‖₂`: the small cluster is below the perturbation level.
    pub small_ok: bool,
    /// `σ_{n−r} − 4‖E‖₂`.
    pub gap_margin: f64,
    /// `‖E‖₂ − σ_{n−r+1}`.
    pub small_margin: f64,
}

impl AssumptionStatus {
    pub fn passes(&self) -> bool {
        self.gap_ok && self.small_ok
    }
}

/// Whether a failing gate aborts the bound computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GatePolicy {
    /// Refuse with [`Error::Gate`] when an assumption fails.
    Enforce,
    /// Evaluate the formulas anyway; the report still carries the status.
    Override,
}

/// Lower bounds for `σ_{n−r+j}(A+E)²`, `j = 1..r`, with the pieces they are
/// made of.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub r: usize,
    /// `λ_j(G − R₃) − r4`, non-increasing in `j`; may be negative.
    pub bounds: Vec<f64>,
    /// `λ_j(G)` for the leading term `G = E32ᵀE32 + (Σ₂+E22)ᵀ(Σ₂+E22)`.
    pub leading: Vec<f64>,
    /// `‖R₃‖₂` for the third-order term `R₃ = E12ᵀW + WᵀE12`.
    pub r3_norm: f64,
    /// Fourth-order remainder.
    pub r4: f64,
    /// `‖W‖₂` for `W = (Σ₁+E11)⁻ᵀ(E21ᵀ(Σ₂+E22) + E31ᵀE32)`.
    pub w_norm: f64,
    /// `‖(Σ₁+E11)⁻¹‖₂`.
    pub f_inv_norm: f64,
    /// `1 − 4‖E‖₂²‖(Σ₁+E11)⁻¹‖₂²`, the denominator inside `r4`.
    pub denominator: f64,
    pub status: AssumptionStatus,
}

impl BoundReport {
    /// Square roots of the bounds, `None` where a bound is negative.
    pub fn singular_value_bounds(&self) -> Vec<Option<f64>> {
        self.bounds.iter().map(|&b| (b >= 0.0).then(|| b.sqrt())).collect()
    }
}

/// Evaluates both gates against the actual `‖E‖₂` carried by `p`.
pub fn check_assumptions(sigma: &[f64], p: &RotatedPerturbation) -> Result<AssumptionStatus> {
    let (_, r) = check_sizes("check_assumptions", sigma, p)?;
    Ok(gates(sigma, r, p.norm))
}

/// Evaluates both gates with the a priori estimate `‖E‖₂ ≈ u·σ_max` in
/// place of a measured perturbation, as one would before demoting.
pub fn check_assumptions_nominal(sigma: &[f64], r: usize, unit_roundoff: f64) -> Result<AssumptionStatus> {
    let n = sigma.len();
    if r == 0 || r >= n {
        return Err(Error::contract("check_assumptions_nominal", format!("cluster size r = {r} outside 1..{n}")));
    }
    Ok(gates(sigma, r, unit_roundoff * sigma[0]))
}

fn gates(sigma: &[f64], r: usize, e_norm: f64) -> AssumptionStatus {
    let n = sigma.len();
    let gap_margin = sigma[n - r - 1] - 4.0 * e_norm;
    let small_margin = e_norm - sigma[n - r];
    AssumptionStatus {
        gap_ok: gap_margin > 0.0,
        small_ok: small_margin > 0.0,
        gap_margin,
        small_margin,
    }
}

fn check_sizes(op: &'static str, sigma: &[f64], p: &RotatedPerturbation) -> Result<(usize, usize)> {
    let n = sigma.len();
    if p.n() != n {
        return Err(Error::shape(op, format!("perturbation with {n} columns"), format!("{}", p.n())));
    }
    if p.r == 0 || p.r >= n {
        return Err(Error::contract(op, format!("cluster size r = {} outside 1..{n}", p.r)));
    }
    Ok((n, p.r))
}

fn enforce(op: &'static str, status: &AssumptionStatus, policy: GatePolicy) -> Result<()> {
    if policy == GatePolicy::Enforce && !status.passes() {
        return Err(Error::Gate {
            op,
            reason: format!(
                "gap margin {:e} ({}), small-cluster margin {:e} ({})",
                status.gap_margin,
                if status.gap_ok { "ok" } else { "violated" },
                status.small_margin,
                if status.small_ok { "ok" } else { "violated" },
            ),
        });
    }
    Ok(())
}

/// Bound for the smallest singular value (`r = 1`), evaluated with vector
/// arithmetic:
///
/// ```text
/// w     = (Σ₁+E11)⁻ᵀ (e21 (σ_n + e22) + E31ᵀ e32)
/// r3    = 2 e12ᵀ w
/// r4    = ‖w‖² + 4‖E‖² ‖(Σ₁+E11)⁻¹(e12 + w)‖² / (1 − 4‖E‖² ‖(Σ₁+E11)⁻¹‖²)
/// bound = ‖e32‖² + (σ_n + e22)² − r3 − r4
/// ```
///
/// where `e21` is read as a column.
pub fn singular_bound_single(sigma: &[f64], p: &RotatedPerturbation, policy: GatePolicy) -> Result<BoundReport> {
    const OP: &str = "singular_bound_single";
    let (n, r) = check_sizes(OP, sigma, p)?;
    if r != 1 {
        return Err(Error::contract(OP, format!("needs r = 1, got {r}")));
    }
    let status = check_assumptions(sigma, p)?;
    enforce(OP, &status, policy)?;
    let k = n - 1;
    let f = diag_plus(&sigma[..k], &p.e11);
    let s_e22 = sigma[k] + p.e22.get(0, 0);
    let e32: &[f64] = p.e32.col(0);

    let rhs: Vec<f64> = (0..k)
        .map(|i| p.e21.get(0, i) * s_e22 + dot(p.e31.col(i), e32))
        .collect();
    let w = solve_square_transposed(&f, &DenseMatrix::column(&rhs))?;
    let w = w.col(0);
    let r3 = 2.0 * dot(p.e12.col(0), w);

    let e12_plus_w: Vec<f64> = p.e12.col(0).iter().zip(w).map(|(a, b)| a + b).collect();
    let x = solve_square(&f, &DenseMatrix::column(&e12_plus_w))?;
    let f_inv_norm = inverse_norm(&f)?;
    let e2 = p.norm * p.norm;
    let denominator = 1.0 - 4.0 * e2 * f_inv_norm * f_inv_norm;
    let w_norm = norm2(w);
    let x_norm = norm2(x.col(0));
    let r4 = w_norm * w_norm + 4.0 * e2 * x_norm * x_norm / denominator;

    let e32_norm = norm2(e32);
    let leading = e32_norm * e32_norm + s_e22 * s_e22;
    Ok(BoundReport {
        r: 1,
        bounds: vec![leading - r3 - r4],
        leading: vec![leading],
        r3_norm: r3.abs(),
        r4,
        w_norm,
        f_inv_norm,
        denominator,
        status,
    })
}

/// Bounds for the `r` smallest singular values:
///
/// ```text
/// W        = (Σ₁+E11)⁻ᵀ (E21ᵀ(Σ₂+E22) + E31ᵀE32)
/// R₃       = E12ᵀW + WᵀE12
/// G        = E32ᵀE32 + (Σ₂+E22)ᵀ(Σ₂+E22)
/// r4       = ‖W‖² + 4‖E‖² ‖(Σ₁+E11)⁻¹(E12 + W)‖² / (1 − 4‖E‖² ‖(Σ₁+E11)⁻¹‖²)
/// bounds_j = λ_j(G − R₃) − r4
/// ```
pub fn singular_bound_cluster(sigma: &[f64], p: &RotatedPerturbation, policy: GatePolicy) -> Result<BoundReport> {
    const OP: &str = "singular_bound_cluster";
    let (n, r) = check_sizes(OP, sigma, p)?;
    let status = check_assumptions(sigma, p)?;
    enforce(OP, &status, policy)?;
    let k = n - r;
    let f = diag_plus(&sigma[..k], &p.e11);
    let s2_e22 = diag_plus(&sigma[k..], &p.e22);

    let rhs = p.e21.tr_matmul(&s2_e22)?.add(&p.e31.tr_matmul(&p.e32)?)?;
    let w = solve_square_transposed(&f, &rhs)?;
    let e12t_w = p.e12.tr_matmul(&w)?;
    let r3 = e12t_w.add(&e12t_w.transpose())?;
    let g = p.e32.tr_matmul(&p.e32)?.add(&s2_e22.tr_matmul(&s2_e22)?)?;

    let x = solve_square(&f, &p.e12.add(&w)?)?;
    let f_inv_norm = inverse_norm(&f)?;
    let e2 = p.norm * p.norm;
    let denominator = 1.0 - 4.0 * e2 * f_inv_norm * f_inv_norm;
    let w_norm = spectral_norm(&w)?;
    let x_norm = spectral_norm(&x)?;
    let r4 = w_norm * w_norm + 4.0 * e2 * x_norm * x_norm / denominator;

    let bounds = sym_eigs(&g.sub(&r3)?)?.into_iter().map(|l| l - r4).collect();
    Ok(BoundReport {
        r,
        bounds,
        leading: sym_eigs(&g)?,
        r3_norm: spectral_norm(&r3)?,
        r4,
        w_norm,
        f_inv_norm,
        denominator,
        status,
    })
}

/// Gram matrix `(A+E)ᵀ(A+E)` in the rotated basis, `[Σ+E11 E12; E21 Σ₂+E22;
/// E31 E32]ᵀ` times itself, partitioned at `n − r` and split as
/// `B11 = C11 + C12` with `C11 = (Σ₁+E11)ᵀ(Σ₁+E11)` and
/// `C12 = E21ᵀE21 + E31ᵀE31`.
pub fn perturbed_gram(sigma: &[f64], p: &RotatedPerturbation) -> Result<BlockedGram> {
    let (n, r) = check_sizes("perturbed_gram", sigma, p)?;
    let k = n - r;
    let f = diag_plus(&sigma[..k], &p.e11);
    let s2_e22 = diag_plus(&sigma[k..], &p.e22);
    let c11 = f.tr_matmul(&f)?;
    let c12 = p.e21.tr_matmul(&p.e21)?.add(&p.e31.tr_matmul(&p.e31)?)?;
    let b12 = f
        .tr_matmul(&p.e12)?
        .add(&p.e21.tr_matmul(&s2_e22)?)?
        .add(&p.e31.tr_matmul(&p.e32)?)?;
    let b22 = p
        .e12
        .tr_matmul(&p.e12)?
        .add(&s2_e22.tr_matmul(&s2_e22)?)?
        .add(&p.e32.tr_matmul(&p.e32)?)?;
    BlockedGram::with_split(c11, c12, b12, b22)
}

/// `diag(values) + m` for square `m`.
fn diag_plus(values: &[f64], m: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| if i == j { values[i] + m.get(i, j) } else { m.get(i, j) })
}

fn inverse_norm(f: &DenseMatrix) -> Result<f64> {
    let smallest = *singular_values(f)?.last().expect("non-empty block");
    Ok(1.0 / smallest)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
