//! Instance generators and independent oracles shared by the integration
//! and acceptance tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sigbound::bounds::{check_assumptions, BlockedGram};
use sigbound::kernel::{singular_values, solve_square, spectral_norm, DenseMatrix};
use sigbound::matgen::{assemble, gaussian_matrix, FactoredMatrix, SpectrumModel};
use sigbound::precision::{demote, perturbation, rotate_blocks, PrecisionLevel, RotatedPerturbation};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DenseMatrix {
    gaussian_matrix(rows, cols, rng.random())
}

/// Random orthogonal `n × n` matrix: the left singular factor of a Gaussian.
pub fn orthogonal(rng: &mut impl Rng, n: usize) -> DenseMatrix {
    let g = gaussian(rng, n, n);
    sigbound::kernel::svd_full(&g).unwrap().u().to_dense()
}

/// Log-uniform draw in `[lo, hi]`.
pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

/// A perturbed instance whose rotated perturbation passes both gates.
pub struct GatedInstance {
    pub built: FactoredMatrix,
    /// The (possibly scaled) perturbation actually applied.
    pub e: DenseMatrix,
    pub p: RotatedPerturbation,
    pub level: PrecisionLevel,
    pub scale: f64,
    /// Singular values of `A + E` computed in binary64.
    pub perturbed_sigma: Vec<f64>,
}

impl GatedInstance {
    pub fn sigma(&self) -> &[f64] {
        self.built.spectrum().sigma()
    }

    pub fn r(&self) -> usize {
        self.p.r
    }
}

/// Draws a demotion instance with `n ∈ [8, 64]`, `m/n ∈ {2, 4, 16}`, a level
/// in {Single, Half} and a scaling `t ∈ {1, 1e−1, 1e−2}` of the demotion
/// error, placing the cluster boundary around the measured `t‖E‖₂` so the
/// gates pass. Returns `None` when the re-measured gates still fail.
pub fn gated_instance(seed: u64) -> Option<GatedInstance> {
    let mut rng = rng(seed);
    let n = rng.random_range(8..=64);
    let m = n * [2, 4, 16][rng.random_range(0..3)];
    let level = [PrecisionLevel::Single, PrecisionLevel::Half][rng.random_range(0..2)];
    let scale = [1.0, 1e-1, 1e-2][rng.random_range(0..3)];
    let r = rng.random_range(1..=(n / 8).max(1));
    let top = log_uniform(&mut rng, 1e-2, 1e3);

    // first pass: measure the demotion error for a placeholder spectrum
    let placeholder: Vec<f64> = (0..n).map(|i| top * 10f64.powf(-(i as f64) / n as f64)).collect();
    let built = assemble(&SpectrumModel::new(placeholder, r).unwrap(), m, rng.random()).unwrap();
    let eta = scale * spectral_norm(&perturbation(built.a(), &demote(built.a(), level).unwrap()).unwrap()).unwrap();

    let floor = eta * rng.random_range(8.0..40.0);
    let mut sigma: Vec<f64> = (0..n - r)
        .map(|i| if i == 0 { top.max(2.0 * floor) } else { log_uniform(&mut rng, floor, top.max(2.0 * floor)) })
        .collect();
    sigma[n - r - 1] = floor;
    let small_top = eta * rng.random_range(0.05..0.5);
    sigma.extend((0..r).map(|_| log_uniform(&mut rng, small_top * 1e-3, small_top)));
    sigma.sort_by(|a, b| b.total_cmp(a));

    let built = built.with_spectrum(SpectrumModel::new(sigma, r).unwrap()).unwrap();
    let e = perturbation(built.a(), &demote(built.a(), level).unwrap()).unwrap().scale(scale);
    let p = rotate_blocks(built.factors(), &e, r).unwrap();
    if !check_assumptions(built.spectrum().sigma(), &p).unwrap().passes() {
        return None;
    }
    let perturbed_sigma = singular_values(&built.a().add(&e).unwrap()).unwrap();
    Some(GatedInstance { built, e, p, level, scale, perturbed_sigma })
}

/// The first `count` gated instances from consecutive seeds starting at
/// `first_seed`, with the number of seeds consumed.
pub fn gated_instances(first_seed: u64, count: usize) -> (Vec<GatedInstance>, u64) {
    let mut out = Vec::with_capacity(count);
    let mut seed = first_seed;
    while out.len() < count {
        if let Some(inst) = gated_instance(seed) {
            out.push(inst);
        }
        seed += 1;
        assert!(seed - first_seed < 20 * count as u64, "gated instances are too rare");
    }
    (out, seed - first_seed)
}

/// A random PSD matrix in blocked form with `‖B22‖₂ < 0.5·λmin(B11)`:
/// `B11` has eigenvalues in `[1, 10]`, and `B22 = B12ᵀB11⁻¹B12 + S` with a
/// positive definite Schur complement `S`, so `rank(B) = dim`.
pub struct PsdInstance {
    pub gram: BlockedGram,
    /// `B11 = C11 + C12` with `C12` positive semi-definite.
    pub c11: DenseMatrix,
    pub c12: DenseMatrix,
}

pub fn psd_instance(seed: u64) -> PsdInstance {
    let mut rng = rng(seed);
    let dim = rng.random_range(2..=50);
    let r = rng.random_range(1..=5.min(dim - 1));
    let k = dim - r;

    let q = orthogonal(&mut rng, k);
    let eigs: Vec<f64> = (0..k).map(|_| rng.random_range(1.0..10.0)).collect();
    let b11 = q.matmul(&DenseMatrix::diag(&eigs)).unwrap().matmul_tr(&q).unwrap().symmetrize().unwrap();
    let b11_min = eigs.iter().copied().fold(f64::INFINITY, f64::min);

    // a small PSD piece split off B11, leaving C11 = B11 − C12 comfortably definite
    let w = gaussian(&mut rng, k, 2);
    let c12 = w.matmul_tr(&w).unwrap().scale(rng.random_range(0.0..0.1) / k as f64).symmetrize().unwrap();
    let c11 = b11.sub(&c12).unwrap().symmetrize().unwrap();

    let target = rng.random_range(0.01..0.45) * b11_min;
    let raw_b12 = gaussian(&mut rng, k, r);
    let qs = orthogonal(&mut rng, r);
    let s_eigs: Vec<f64> = (0..r).map(|_| rng.random_range(0.2..1.0)).collect();
    let raw_s = qs.matmul(&DenseMatrix::diag(&s_eigs)).unwrap().matmul_tr(&qs).unwrap();
    let coupling = rng.random_range(0.05..0.8);
    // scale both parts so ‖B22‖₂ lands near `target`
    let b12_unit = raw_b12.scale(1.0 / spectral_norm(&raw_b12).unwrap());
    let schur_part = b12_unit.tr_matmul(&solve_square(&b11, &b12_unit).unwrap()).unwrap();
    let s_unit = raw_s.scale(1.0 / spectral_norm(&raw_s).unwrap());
    let alpha = coupling * target / spectral_norm(&schur_part).unwrap();
    let b12 = b12_unit.scale(alpha.sqrt());
    let b22 = schur_part
        .scale(alpha)
        .add(&s_unit.scale((1.0 - coupling) * target))
        .unwrap()
        .symmetrize()
        .unwrap();
    let gram = BlockedGram::new(b11, b12, b22).unwrap();
    PsdInstance { gram, c11, c12 }
}

/// Relative difference `|a − b| / |b|` (absolute when `b = 0`).
pub fn rel_diff(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Every finite non-negative binary16 value, in increasing order, decoded
/// from its bit pattern with the textbook formula.
pub fn half_table() -> Vec<f64> {
    (0u32..0x7c00)
        .map(half_from_bits)
        .collect()
}

/// Round to nearest binary16, ties to the even bit pattern, by table lookup.
pub fn half_oracle(table: &[f64], x: f64) -> f64 {
    if x.is_nan() {
        return x;
    }
    let a = x.abs();
    let max = *table.last().unwrap();
    let magnitude = if a >= 65520.0 {
        f64::INFINITY
    } else if a >= max {
        max
    } else {
        // table[k] ≤ a < table[k + 1]
        let k = table.partition_point(|&v| v <= a) - 1;
        let (lo, hi) = (table[k], table[k + 1]);
        let (below, above) = (a - lo, hi - a);
        if below < above || (below == above && k % 2 == 0) {
            lo
        } else {
            hi
        }
    };
    magnitude.copysign(x)
}

/// Round to nearest binary32 using the host conversion.
pub fn single_oracle(x: f64) -> f64 {
    x as f32 as f64
}

/// Binary64 test patterns weighted towards the interesting regions of a
/// target format: its normal and subnormal ranges, exact midpoints between
/// neighbouring values and their one-ulp neighbours, overflow thresholds,
/// binary64 subnormals, and fully random bits.
pub fn rounding_patterns(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = rng(seed);
    // overflow thresholds, exact
    let specials = [65504.0, 65519.999, 65520.0, -65520.0, f32::MAX as f64, 3.4028235677973366e38];
    let mut out: Vec<f64> = specials.into_iter().take(count).collect();
    let sign = |rng: &mut ChaCha8Rng| if rng.random::<bool>() { 1u64 << 63 } else { 0 };
    while out.len() < count {
        let frac = rng.random::<u64>() & ((1u64 << 52) - 1);
        let x = match rng.random_range(0..10) {
            // half range, normal and subnormal, plus just beyond
            0 | 1 => {
                let e = rng.random_range(1023 - 30..=1023 + 17u64);
                f64::from_bits(sign(&mut rng) | e << 52 | frac)
            }
            // single range
            2 | 3 => {
                let e = rng.random_range(1023 - 155..=1023 + 129u64);
                f64::from_bits(sign(&mut rng) | e << 52 | frac)
            }
            // midpoints of half values and their neighbours
            4 | 5 => {
                let bits = rng.random_range(0..0x7bffu32);
                let table_lo = half_from_bits(bits);
                let table_hi = half_from_bits(bits + 1);
                let mid = 0.5 * (table_lo + table_hi);
                let nudged = match rng.random_range(0..3) {
                    0 => mid,
                    1 => f64::from_bits(mid.to_bits() + 1),
                    _ => f64::from_bits(mid.to_bits().saturating_sub(1)),
                };
                if rng.random() {
                    -nudged
                } else {
                    nudged
                }
            }
            // midpoints of single values and their neighbours
            6 | 7 => {
                let bits = rng.random_range(0..0x7f7f_ffffu32);
                let lo = f32::from_bits(bits) as f64;
                let hi = f32::from_bits(bits + 1) as f64;
                let mid = 0.5 * (lo + hi);
                let nudged = match rng.random_range(0..3) {
                    0 => mid,
                    1 => f64::from_bits(mid.to_bits() + 1),
                    _ => f64::from_bits(mid.to_bits().saturating_sub(1)),
                };
                if rng.random() {
                    -nudged
                } else {
                    nudged
                }
            }
            // binary64 subnormals and zeros
            8 => {
                if rng.random_range(0..4) == 0 {
                    f64::from_bits(sign(&mut rng))
                } else {
                    f64::from_bits(sign(&mut rng) | frac)
                }
            }
            _ => f64::from_bits(rng.random::<u64>()),
        };
        if x.is_finite() {
            out.push(x);
        }
    }
    out
}

fn half_from_bits(bits: u32) -> f64 {
    let exp = (bits >> 10) as i32;
    let frac = (bits & 0x3ff) as f64;
    if exp == 0 {
        frac * 2f64.powi(-24)
    } else {
        (1.0 + frac / 1024.0) * 2f64.powi(exp - 15)
    }
}
