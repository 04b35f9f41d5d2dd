//! Demotion of binary64 matrices to binary32/binary16 and the perturbation it
//! induces, expressed in the singular-vector basis of the original matrix.
//!
//! Rounding is done on the binary64 bit pattern: the significand is shifted to
//! the target quantum and rounded to nearest, ties to even, with subnormal
//! targets honoured. No host half-precision type is involved, so results do
//! not depend on platform float16 support.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernel::{spectral_norm, DenseMatrix, SvdFactors};

/// Storage precision a matrix is demoted to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrecisionLevel {
    Double,
    Single,
    Half,
}

/// Layout of an IEEE binary format: precision in bits (implicit bit
/// included) and the normal exponent range.
#[derive(Clone, Copy, Debug)]
struct Format {
    precision: u32,
    emin: i32,
    emax: i32,
}

impl Format {
    fn max_finite(self) -> f64 {
        // (2 − 2^(1−p))·2^emax, exact in binary64 for both targets
        (2.0 - exp2(1 - self.precision as i32)) * exp2(self.emax)
    }
}

impl PrecisionLevel {
    pub const ALL: [PrecisionLevel; 3] = [PrecisionLevel::Double, PrecisionLevel::Single, PrecisionLevel::Half];

    /// `2⁻⁵³`, `2⁻²⁴` or `2⁻¹¹`.
    pub fn unit_roundoff(self) -> f64 {
        match self {
            PrecisionLevel::Double => exp2(-53),
            PrecisionLevel::Single => exp2(-24),
            PrecisionLevel::Half => exp2(-11),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PrecisionLevel::Double => "double",
            PrecisionLevel::Single => "single",
            PrecisionLevel::Half => "half",
        }
    }

    fn format(self) -> Option<Format> {
        match self {
            PrecisionLevel::Double => None,
            PrecisionLevel::Single => Some(Format { precision: 24, emin: -126, emax: 127 }),
            PrecisionLevel::Half => Some(Format { precision: 11, emin: -14, emax: 15 }),
        }
    }

    /// Largest finite value of the format.
    pub fn max_finite(self) -> f64 {
        self.format().map_or(f64::MAX, Format::max_finite)
    }

    /// Rounds `x` to the nearest value of this format, ties to even.
    /// Values beyond the finite range come back as signed infinity.
    pub fn round(self, x: f64) -> f64 {
        match self.format() {
            None => x,
            Some(f) => round_to_format(x, f),
        }
    }
}

impl fmt::Display for PrecisionLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PrecisionLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "double" | "binary64" | "f64" => Ok(PrecisionLevel::Double),
            "single" | "binary32" | "f32" => Ok(PrecisionLevel::Single),
            "half" | "binary16" | "f16" => Ok(PrecisionLevel::Half),
            other => Err(Error::contract(
                "PrecisionLevel",
                format!("unknown level `{other}`, expected double, single or half"),
            )),
        }
    }
}

/// `2^e` for `e` in the binary64 normal range, built from its bit pattern.
fn exp2(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

fn round_to_format(x: f64, f: Format) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let bits = x.to_bits();
    let negative = bits >> 63 == 1;
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if biased == 0 {
        // binary64 subnormals are far below half the smallest target subnormal
        return if negative { -0.0 } else { 0.0 };
    }
    let exponent = biased - 1023;
    let significand = frac | (1u64 << 52);

    // |x| = significand · 2^(exponent − 52); target spacing is 2^quantum
    let quantum = exponent.max(f.emin) - (f.precision as i32 - 1);
    let shift = quantum - (exponent - 52);
    let magnitude = if shift <= 0 {
        return x;
    } else if shift >= 54 {
        0.0
    } else {
        let shift = shift as u32;
        let mut q = significand >> shift;
        let rem = significand & ((1u64 << shift) - 1);
        let half = 1u64 << (shift - 1);
        if rem > half || (rem == half && q & 1 == 1) {
            q += 1;
        }
        // q ≤ 2^p and 2^quantum is a normal binary64 number: the product is exact
        q as f64 * exp2(quantum)
    };
    let magnitude = if magnitude > f.max_finite() { f64::INFINITY } else { magnitude };
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

/// Rounds every entry of `a` to `level` and embeds the result back in binary64.
///
/// Fails if any entry overflows the target format.
pub fn demote(a: &DenseMatrix, level: PrecisionLevel) -> Result<DenseMatrix> {
    if level == PrecisionLevel::Double {
        return Ok(a.clone());
    }
    let rounded = a.map(|x| level.round(x));
    let mut offenders = Vec::new();
    let mut count = 0;
    for j in 0..rounded.cols() {
        for (i, v) in rounded.col(j).iter().enumerate() {
            if !v.is_finite() {
                count += 1;
                if offenders.len() < 16 {
                    offenders.push((i, j));
                }
            }
        }
    }
    if count > 0 {
        return Err(Error::Overflow {
            level: level.name(),
            count,
            indices: offenders,
        });
    }
    Ok(rounded)
}

/// `E = Ademoted − A`, entrywise. The subtraction is exact for demoted
/// matrices (Sterbenz), so `A + E` reproduces `Ademoted` bit for bit.
pub fn perturbation(a: &DenseMatrix, demoted: &DenseMatrix) -> Result<DenseMatrix> {
    demoted.sub(a)
}

/// The perturbation in the singular-vector basis, `Ê = Uᵀ·E·V`, cut into the
/// blocks
///
/// ```text
///          n−r    r
///   n−r  [ E11   E12 ]
///   r    [ E21   E22 ]
///   m−n  [ E31   E32 ]
/// ```
///
/// together with `‖E‖₂`. When `m = n` the third block row is empty.
#[derive(Clone, Debug)]
pub struct RotatedPerturbation {
    pub e11: DenseMatrix,
    pub e12: DenseMatrix,
    pub e21: DenseMatrix,
    pub e22: DenseMatrix,
    pub e31: DenseMatrix,
    pub e32: DenseMatrix,
    /// `‖E‖₂`.
    pub norm: f64,
    /// Size of the small cluster.
    pub r: usize,
}

impl RotatedPerturbation {
    /// Partitions an already rotated `m × n` matrix. `norm` is its spectral norm.
    pub fn from_rotated(hat: &DenseMatrix, r: usize) -> Result<Self> {
        let norm = spectral_norm(hat)?;
        Self::partition(hat, r, norm)
    }

    fn partition(hat: &DenseMatrix, r: usize, norm: f64) -> Result<Self> {
        let (m, n) = hat.shape();
        if r == 0 || r > n {
            return Err(Error::contract("rotate_blocks", format!("cluster size r = {r} outside 1..={n}")));
        }
        if m < n {
            return Err(Error::contract("rotate_blocks", format!("needs m >= n, got {m}x{n}")));
        }
        let k = n - r;
        Ok(Self {
            e11: hat.block(0..k, 0..k),
            e12: hat.block(0..k, k..n),
            e21: hat.block(k..n, 0..k),
            e22: hat.block(k..n, k..n),
            e31: hat.block(n..m, 0..k),
            e32: hat.block(n..m, k..n),
            norm,
            r,
        })
    }

    /// Rows of the original matrix.
    pub fn m(&self) -> usize {
        self.e11.rows() + self.e21.rows() + self.e31.rows()
    }

    /// Columns of the original matrix.
    pub fn n(&self) -> usize {
        self.e11.cols() + self.e12.cols()
    }

    /// Reassembles the full rotated matrix `Ê`.
    pub fn to_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_blocks(&[&[&self.e11, &self.e12], &[&self.e21, &self.e22], &[&self.e31, &self.e32]])
            .expect("blocks are conformal by construction")
    }

    /// The blocks of `t·E`.
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            e11: self.e11.scale(t),
            e12: self.e12.scale(t),
            e21: self.e21.scale(t),
            e22: self.e22.scale(t),
            e31: self.e31.scale(t),
            e32: self.e32.scale(t),
            norm: self.norm * t.abs(),
            r: self.r,
        }
    }
}

/// Rotates `e` into the basis of `factors` and partitions it for a trailing
/// cluster of size `r`.
pub fn rotate_blocks(factors: &SvdFactors, e: &DenseMatrix, r: usize) -> Result<RotatedPerturbation> {
    let (m, n) = (factors.rows(), factors.cols());
    if e.shape() != (m, n) {
        return Err(Error::shape("rotate_blocks", format!("{m}x{n}"), format!("{}x{}", e.rows(), e.cols())));
    }
    if r == 0 || r > n {
        return Err(Error::contract("rotate_blocks", format!("cluster size r = {r} outside 1..={n}")));
    }
    let hat = factors.u().transpose_apply(e)?.matmul(factors.v())?;
    RotatedPerturbation::partition(&hat, r, spectral_norm(e)?)
}
