//! Two-cluster singular spectra and test matrices with known factors.
//!
//! A spectrum has a large cluster of `k1` values spread over
//! `[10^(s1−d1), 10^s1]` and, `g` decades further down, a small cluster of
//! `k2` values spread over `[10^(s1−d1−g−d2), 10^(s1−d1−g)]`. Cluster
//! endpoints are fixed; interior values are drawn uniformly on the linear
//! scale of the interval.
//!
//! Randomness comes from ChaCha20 seeded with `seed_from_u64(seed)`.
//! Stream 0 feeds the Gaussian matrix whose singular vectors become the
//! factors of `A` (Box–Muller, entries filled column-major); stream 1 feeds
//! the uniform interior values of the spectrum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::kernel::{svd_full, DenseMatrix, SvdFactors};

const GAUSSIAN_STREAM: u64 = 0;
const UNIFORM_STREAM: u64 = 1;

/// Parameters of a two-cluster spectrum plus the seed for its interior values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClusterSpec {
    /// Decimal exponent of the largest singular value.
    pub s1: i32,
    /// Gap, in decades, between the two clusters.
    pub g: i32,
    /// Number of values in the large cluster.
    pub k1: usize,
    /// Number of values in the small cluster.
    pub k2: usize,
    /// Spread, in decades, of the large cluster.
    pub d1: i32,
    /// Spread, in decades, of the small cluster.
    pub d2: i32,
    pub seed: u64,
}

impl ClusterSpec {
    /// Total number of singular values, `k1 + k2`.
    pub fn n(&self) -> usize {
        self.k1 + self.k2
    }

    pub fn validate(&self) -> Result<()> {
        if self.k1 == 0 {
            return Err(Error::contract("ClusterSpec", "k1 must be at least 1; the largest value is undefined otherwise"));
        }
        for (name, v) in [("g", self.g), ("d1", self.d1), ("d2", self.d2)] {
            if v < 0 {
                return Err(Error::contract("ClusterSpec", format!("{name} must be nonnegative, got {v}")));
            }
        }
        if self.s1 > 308 {
            return Err(Error::contract("ClusterSpec", format!("10^{} overflows binary64", self.s1)));
        }
        let low = self.s1 as i64 - self.d1 as i64 - self.g as i64 - self.d2 as i64;
        if low < -307 {
            return Err(Error::contract(
                "ClusterSpec",
                format!("10^{low} is not a normal binary64 number"),
            ));
        }
        Ok(())
    }
}

/// A non-increasing positive spectrum whose last `split` entries form the
/// small cluster.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumModel {
    sigma: Vec<f64>,
    split: usize,
    spec: Option<ClusterSpec>,
}

impl SpectrumModel {
    /// Wraps an arbitrary spectrum; `split` is the size of the trailing cluster.
    pub fn new(sigma: Vec<f64>, split: usize) -> Result<Self> {
        if sigma.is_empty() {
            return Err(Error::contract("SpectrumModel", "spectrum is empty"));
        }
        if split > sigma.len() {
            return Err(Error::contract(
                "SpectrumModel",
                format!("split {split} exceeds spectrum length {}", sigma.len()),
            ));
        }
        if sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::contract("SpectrumModel", "values must be finite and positive"));
        }
        if sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::contract("SpectrumModel", "values must be non-increasing"));
        }
        Ok(Self { sigma, split, spec: None })
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    /// Size `r` of the small cluster.
    pub fn split(&self) -> usize {
        self.split
    }

    /// The generating parameters, when the spectrum came from [`create_sigmas`].
    pub fn spec(&self) -> Option<&ClusterSpec> {
        self.spec.as_ref()
    }

    pub fn large_cluster(&self) -> &[f64] {
        &self.sigma[..self.n() - self.split]
    }

    pub fn small_cluster(&self) -> &[f64] {
        &self.sigma[self.n() - self.split..]
    }

    pub fn max(&self) -> f64 {
        self.sigma[0]
    }

    pub fn min(&self) -> f64 {
        self.sigma[self.n() - 1]
    }
}

/// `10^e`, correctly rounded.
pub fn pow10(e: i64) -> f64 {
    format!("1e{e}").parse().expect("decimal exponent literal always parses")
}

/// Builds the two-cluster spectrum described by `spec`, sorted non-increasing.
pub fn create_sigmas(spec: &ClusterSpec) -> Result<SpectrumModel> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    rng.set_stream(UNIFORM_STREAM);

    let s1 = spec.s1 as i64;
    let (d1, g, d2) = (spec.d1 as i64, spec.g as i64, spec.d2 as i64);
    let mut sigma = cluster(spec.k1, pow10(s1), pow10(s1 - d1), &mut rng);
    if spec.k2 > 0 {
        let top = s1 - d1 - g;
        sigma.extend(cluster(spec.k2, pow10(top), pow10(top - d2), &mut rng));
    }
    sigma.sort_by(|a, b| b.total_cmp(a));
    Ok(SpectrumModel {
        sigma,
        split: spec.k2,
        spec: Some(*spec),
    })
}

/// `k` values: `hi`, then `lo` if `k > 1`, with `k − 2` interior draws from
/// `Uniform([lo, hi])`.
fn cluster(k: usize, hi: f64, lo: f64, rng: &mut ChaCha20Rng) -> Vec<f64> {
    let mut values = vec![0.0; k];
    values[0] = hi;
    if k > 1 {
        values[k - 1] = lo;
    }
    for v in values.iter_mut().take(k.saturating_sub(1)).skip(1) {
        let u: f64 = rng.random();
        *v = (lo + (hi - lo) * u).clamp(lo, hi);
    }
    values
}

/// An `m × n` matrix built from a prescribed spectrum, with its factors.
#[derive(Clone, Debug)]
pub struct FactoredMatrix {
    a: DenseMatrix,
    factors: SvdFactors,
    spectrum: SpectrumModel,
}

impl FactoredMatrix {
    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    /// `U`, `V` from the Gaussian sample and the prescribed spectrum as `Σ`.
    pub fn factors(&self) -> &SvdFactors {
        &self.factors
    }

    pub fn spectrum(&self) -> &SpectrumModel {
        &self.spectrum
    }

    pub fn into_parts(self) -> (DenseMatrix, SvdFactors, SpectrumModel) {
        (self.a, self.factors, self.spectrum)
    }

    /// Same singular vectors, different spectrum of the same length.
    pub fn with_spectrum(&self, spectrum: SpectrumModel) -> Result<Self> {
        build(self.factors.u().clone(), self.factors.v().clone(), spectrum)
    }
}

/// Standard Gaussian `m × n` sample from stream 0 of the ChaCha20 generator
/// seeded with `seed`.
pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(GAUSSIAN_STREAM);
    let mut data = Vec::with_capacity(m * n);
    while data.len() < m * n {
        let (z0, z1) = box_muller(&mut rng);
        data.push(z0);
        if data.len() < m * n {
            data.push(z1);
        }
    }
    DenseMatrix::new(m, n, data).expect("Box-Muller output is finite and the length matches")
}

fn box_muller(rng: &mut ChaCha20Rng) -> (f64, f64) {
    // 1 − U lies in (0, 1], keeping the logarithm finite
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    let radius = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (radius * c, radius * s)
}

/// `A = U·diag(sigma)·Vᵀ` with `U`, `V` the singular vectors of an `m × n`
/// Gaussian sample. The same `(spectrum, m, seed)` gives a bit-identical `A`.
pub fn assemble(spectrum: &SpectrumModel, m: usize, seed: u64) -> Result<FactoredMatrix> {
    let n = spectrum.n();
    if m < n {
        return Err(Error::contract("assemble", format!("needs m >= n, got m = {m}, n = {n}")));
    }
    let sample = svd_full(&gaussian_matrix(m, n, seed))?;
    build(sample.u().clone(), sample.v().clone(), spectrum.clone())
}

fn build(u: crate::kernel::OrthogonalFactor, v: DenseMatrix, spectrum: SpectrumModel) -> Result<FactoredMatrix> {
    let factors = SvdFactors::new(u, spectrum.sigma().to_vec(), v)?;
    let a = factors.reconstruct();
    Ok(FactoredMatrix { a, factors, spectrum })
}
