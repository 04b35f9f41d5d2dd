use crate::error::{Error, Result};
use crate::kernel::{spectral_norm, sym_eig_min, DenseMatrix};

const SYMMETRY_TOL: f64 = 1e-12;

/// A symmetric matrix partitioned as
///
/// ```text
///   B = [ B11   B12 ]   B11: (n−r)×(n−r)
///       [ B12ᵀ  B22 ]   B22: r×r
/// ```
///
/// optionally with a split `B11 = C11 + C12`, `C11` positive definite and
/// `C12` positive semi-definite.
#[derive(Clone, Debug)]
pub struct BlockedGram {
    b11: DenseMatrix,
    b12: DenseMatrix,
    b22: DenseMatrix,
    split: Option<(DenseMatrix, DenseMatrix)>,
}

impl BlockedGram {
    pub fn new(b11: DenseMatrix, b12: DenseMatrix, b22: DenseMatrix) -> Result<Self> {
        let k = b11.rows();
        let r = b22.rows();
        if !b11.is_square() || !b22.is_square() || b12.shape() != (k, r) {
            return Err(Error::shape(
                "BlockedGram",
                format!("square B11, square B22 and B12 of {k}x{r}"),
                format!(
                    "B11 {}x{}, B12 {}x{}, B22 {}x{}",
                    b11.rows(),
                    b11.cols(),
                    b12.rows(),
                    b12.cols(),
                    b22.rows(),
                    b22.cols()
                ),
            ));
        }
        if k == 0 || r == 0 {
            return Err(Error::contract("BlockedGram", "both diagonal blocks must be non-empty"));
        }
        Ok(Self {
            b11: symmetric("B11", &b11)?,
            b12,
            b22: symmetric("B22", &b22)?,
            split: None,
        })
    }

    /// `B11 = C11 + C12`, checking that `C11` is positive definite and `C12`
    /// positive semi-definite up to roundoff.
    pub fn with_split(c11: DenseMatrix, c12: DenseMatrix, b12: DenseMatrix, b22: DenseMatrix) -> Result<Self> {
        let c11 = symmetric("C11", &c11)?;
        let c12 = symmetric("C12", &c12)?;
        let b11 = c11.add(&c12)?;
        let mut gram = Self::new(b11, b12, b22)?;
        if sym_eig_min(&c11)? <= 0.0 {
            return Err(Error::contract("BlockedGram", "C11 is not positive definite"));
        }
        let c12_norm = spectral_norm(&c12)?;
        let c12_min = sym_eig_min(&c12)?;
        if c12_min < -100.0 * f64::EPSILON / 2.0 * c12_norm {
            return Err(Error::contract(
                "BlockedGram",
                format!("C12 is not positive semi-definite: smallest eigenvalue {c12_min:e}"),
            ));
        }
        gram.split = Some((c11, c12));
        Ok(gram)
    }

    /// Partitions a full symmetric matrix with a trailing block of size `r`.
    pub fn from_matrix(b: &DenseMatrix, r: usize) -> Result<Self> {
        if !b.is_square() {
            return Err(Error::contract("BlockedGram", "matrix must be square"));
        }
        let n = b.rows();
        if r == 0 || r >= n {
            return Err(Error::contract("BlockedGram", format!("trailing block size {r} outside 1..{n}")));
        }
        let k = n - r;
        Self::new(b.block(0..k, 0..k), b.block(0..k, k..n), b.block(k..n, k..n))
    }

    pub fn b11(&self) -> &DenseMatrix {
        &self.b11
    }

    pub fn b12(&self) -> &DenseMatrix {
        &self.b12
    }

    pub fn b22(&self) -> &DenseMatrix {
        &self.b22
    }

    /// `(C11, C12)` when a split was supplied.
    pub fn split(&self) -> Option<(&DenseMatrix, &DenseMatrix)> {
        self.split.as_ref().map(|(a, b)| (a, b))
    }

    /// Size of the trailing block.
    pub fn r(&self) -> usize {
        self.b22.rows()
    }

    /// Order of the full matrix.
    pub fn dim(&self) -> usize {
        self.b11.rows() + self.b22.rows()
    }

    /// The full symmetric matrix `B`.
    pub fn to_matrix(&self) -> DenseMatrix {
        let b21 = self.b12.transpose();
        DenseMatrix::from_blocks(&[&[&self.b11, &self.b12], &[&b21, &self.b22]])
            .expect("blocks are conformal by construction")
    }
}

fn symmetric(name: &str, m: &DenseMatrix) -> Result<DenseMatrix> {
    if !m.is_square() {
        return Err(Error::contract("BlockedGram", format!("{name} is not square")));
    }
    let asym = m.sub(&m.transpose())?.frobenius_norm();
    if asym > SYMMETRY_TOL * m.frobenius_norm() {
        return Err(Error::contract(
            "BlockedGram",
            format!("{name} is not symmetric: ‖M − Mᵀ‖_F = {asym:e}"),
        ));
    }
    m.symmetrize()
}
