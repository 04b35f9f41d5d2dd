mod common;

use common::{rel_diff, rng};
use rand::Rng;
use sigbound::kernel::{singular_values, spectral_norm, to_dmat_string};
use sigbound::matgen::{assemble, create_sigmas, ClusterSpec, SpectrumModel};
use sigbound::Error;

fn spec(s1: i32, d1: i32, g: i32, d2: i32, k1: usize, k2: usize, seed: u64) -> ClusterSpec {
    ClusterSpec { s1, g, k1, k2, d1, d2, seed }
}

#[test]
fn single_small_value_layout() {
    let s = create_sigmas(&spec(2, 6, 3, 0, 255, 1, 7)).unwrap();
    let sigma = s.sigma();
    assert_eq!(sigma.len(), 256);
    assert_eq!(sigma[0], 1e2);
    assert_eq!(sigma[254], 1e-4);
    assert_eq!(sigma[255], 1e-7);
    assert!(sigma[..255].iter().all(|&x| (1e-4..=1e2).contains(&x)));
    assert_eq!(s.split(), 1);
}

#[test]
fn trivial_spectrum() {
    let s = create_sigmas(&spec(0, 0, 0, 0, 1, 0, 0)).unwrap();
    assert_eq!(s.sigma(), &[1.0]);
}

#[test]
fn cluster_endpoints_and_membership() {
    let s = create_sigmas(&spec(5, 6, 2, 2, 228, 28, 3)).unwrap();
    let sigma = s.sigma();
    for endpoint in [1e5, 1e-1, 1e-3, 1e-5] {
        assert!(sigma.contains(&endpoint), "{endpoint} missing");
    }
    let small = s.small_cluster();
    assert_eq!(small.len(), 28);
    assert!(small.iter().all(|&x| (1e-5..=1e-3).contains(&x)));
    let interior = small.iter().filter(|&&x| x > 1e-5 && x < 1e-3).count();
    assert_eq!(interior, 26);
    // gap of g decades between the clusters
    assert!(sigma[227] / sigma[228] >= 1e2 * (1.0 - 1e-15));
}

#[test]
fn zero_spread_gives_multiplicity() {
    let s = create_sigmas(&spec(1, 0, 2, 0, 4, 3, 9)).unwrap();
    assert_eq!(s.sigma(), &[10.0, 10.0, 10.0, 10.0, 0.1, 0.1, 0.1]);
}

#[test]
fn empty_large_cluster_is_rejected() {
    assert!(matches!(create_sigmas(&spec(0, 0, 0, 0, 0, 3, 0)), Err(Error::Contract { .. })));
}

#[test]
fn assembly_round_trips_through_the_svd() {
    for seed in 0..20 {
        let mut rng = rng(seed);
        let s1 = rng.random_range(-2..4);
        let cluster = spec(s1, rng.random_range(0..5), rng.random_range(0..4), rng.random_range(0..3), 6, 2, seed);
        let spectrum = create_sigmas(&cluster).unwrap();
        let built = assemble(&spectrum, 64, seed).unwrap();
        let computed = singular_values(built.a()).unwrap();
        // relative agreement needs ε·κ(A) well below the tolerance
        if spectrum.max() / spectrum.min() <= 1e4 {
            for (c, s) in computed.iter().zip(spectrum.sigma()) {
                assert!(rel_diff(*c, *s) <= 1e-10, "seed {seed}: {c} vs {s}");
            }
        }
        // absolute overlap bound 100·u·σ₀·max(m, n)
        let worst = computed.iter().zip(spectrum.sigma()).map(|(c, s)| (c - s).abs()).fold(0.0, f64::max);
        assert!(worst <= 100.0 * f64::EPSILON / 2.0 * spectrum.max() * 64.0);
        // the stored factors reproduce A
        let back = built.factors().reconstruct();
        let err = spectral_norm(&back.sub(built.a()).unwrap()).unwrap();
        assert!(err <= 100.0 * f64::EPSILON / 2.0 * spectrum.max() * 64.0);
    }
}

#[test]
fn assembly_is_deterministic() {
    let spectrum = create_sigmas(&spec(1, 3, 1, 1, 10, 3, 5)).unwrap();
    let first = to_dmat_string(assemble(&spectrum, 40, 5).unwrap().a());
    let second = to_dmat_string(assemble(&spectrum, 40, 5).unwrap().a());
    assert_eq!(first, second);
    let other = to_dmat_string(assemble(&spectrum, 40, 6).unwrap().a());
    assert_ne!(first, other);
}

#[test]
fn rank_one_assembly_is_a_unit_column() {
    let spectrum = SpectrumModel::new(vec![1.0], 0).unwrap();
    let built = assemble(&spectrum, 1, 0).unwrap();
    assert_eq!(built.a().get(0, 0).abs(), 1.0);
    let tall = assemble(&spectrum, 5, 0).unwrap();
    assert!((tall.a().frobenius_norm() - 1.0).abs() <= 1e-15);
}

#[test]
fn short_matrices_are_rejected() {
    let spectrum = create_sigmas(&spec(0, 1, 0, 0, 4, 0, 0)).unwrap();
    assert!(assemble(&spectrum, 3, 0).is_err());
}
