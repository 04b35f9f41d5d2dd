mod common;

use common::{gated_instance, half_oracle, half_table, psd_instance, rel_diff};
use proptest::prelude::*;
use sigbound::bounds::{check_assumptions, cluster_lambdas_exact, singular_bound_cluster, GatePolicy};
use sigbound::harness::{format_hex, parse_hex};
use sigbound::kernel::{parse_dmat, singular_values, svd_full, sym_eigs, to_dmat_string, DenseMatrix};
use sigbound::matgen::{create_sigmas, pow10, ClusterSpec};
use sigbound::precision::PrecisionLevel;

fn finite() -> impl Strategy<Value = f64> {
    any::<u64>().prop_map(f64::from_bits).prop_filter("finite", |x| x.is_finite())
}

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(m, n)| {
        prop::collection::vec(-1e3f64..1e3, m * n).prop_map(move |data| DenseMatrix::new(m, n, data).unwrap())
    })
}

proptest! {
    #[test]
    fn half_rounding_matches_table(x in finite()) {
        let table = half_table();
        prop_assert_eq!(PrecisionLevel::Half.round(x).to_bits(), half_oracle(&table, x).to_bits());
    }

    #[test]
    fn single_rounding_matches_host(x in finite()) {
        prop_assert_eq!(PrecisionLevel::Single.round(x).to_bits(), (x as f32 as f64).to_bits());
    }

    #[test]
    fn rounding_is_idempotent_and_monotone(a in finite(), b in finite()) {
        for level in PrecisionLevel::ALL {
            let (ra, rb) = (level.round(a), level.round(b));
            prop_assert_eq!(level.round(ra).to_bits(), ra.to_bits());
            if a <= b {
                prop_assert!(ra <= rb);
            }
        }
    }

    #[test]
    fn rounding_error_is_relative_in_the_normal_range(mag in -14.0f64..15.9, frac in 1.0f64..2.0, neg: bool) {
        let x = if neg { -frac } else { frac } * 2f64.powf(mag.floor());
        for level in [PrecisionLevel::Single, PrecisionLevel::Half] {
            let r = level.round(x);
            prop_assert!((r - x).abs() <= level.unit_roundoff() * x.abs());
        }
    }

    #[test]
    fn hex_floats_round_trip(x in finite()) {
        prop_assert_eq!(parse_hex(&format_hex(x)).unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn dmat_round_trips(a in matrix(6, 6)) {
        prop_assert_eq!(parse_dmat(&to_dmat_string(&a), "prop").unwrap(), a);
    }

    #[test]
    fn singular_values_are_sorted_and_reconstruct(a in matrix(8, 5)) {
        let sigma = singular_values(&a).unwrap();
        prop_assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(sigma.iter().all(|s| *s >= 0.0));
        // Σσ² = ‖A‖_F²
        let sum: f64 = sigma.iter().map(|s| s * s).sum();
        let fro = a.frobenius_norm().powi(2);
        prop_assert!((sum - fro).abs() <= 1e-12 * fro.max(1e-300));
        if a.rows() >= a.cols() {
            let f = svd_full(&a).unwrap();
            let err = f.reconstruct().sub(&a).unwrap().max_abs();
            prop_assert!(err <= 1e-12 * sigma[0].max(1e-300));
        }
    }

    #[test]
    fn eigenvalues_sum_to_the_trace(a in matrix(7, 7)) {
        let s = a.tr_matmul(&a).unwrap().shift_diagonal(-1.0);
        let eigs = sym_eigs(&s).unwrap();
        let trace: f64 = (0..s.rows()).map(|i| s.get(i, i)).sum();
        let total: f64 = eigs.iter().sum();
        prop_assert!((trace - total).abs() <= 1e-10 * (1.0 + eigs[0].abs()) * s.rows() as f64);
        prop_assert!(eigs.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn spectra_follow_the_cluster_layout(
        s1 in -5i32..6, d1 in 0i32..6, g in 0i32..4, d2 in 0i32..4,
        k1 in 1usize..40, k2 in 0usize..10, seed: u64,
    ) {
        let spec = ClusterSpec { s1, g, k1, k2, d1, d2, seed };
        let model = create_sigmas(&spec).unwrap();
        let sigma = model.sigma();
        prop_assert_eq!(sigma.len(), k1 + k2);
        prop_assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(sigma[0], pow10(s1 as i64));
        if k1 > 1 {
            prop_assert_eq!(sigma[k1 - 1], pow10((s1 - d1) as i64));
        }
        if k2 >= 1 {
            prop_assert_eq!(sigma[k1], pow10((s1 - d1 - g) as i64));
            prop_assert!(sigma[k1 - 1] / sigma[k1] >= pow10(g as i64) * (1.0 - 1e-15));
        }
        if k2 > 1 {
            prop_assert_eq!(sigma[k1 + k2 - 1], pow10((s1 - d1 - g - d2) as i64));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, ..ProptestConfig::default() })]

    #[test]
    fn fixed_point_matches_eigensolver(seed in 0u64..1_000_000) {
        let inst = psd_instance(seed);
        let lambdas = cluster_lambdas_exact(&inst.gram).unwrap();
        let eigs = sym_eigs(&inst.gram.to_matrix()).unwrap();
        for (l, e) in lambdas.iter().zip(&eigs[eigs.len() - lambdas.len()..]) {
            prop_assert!(rel_diff(*l, *e) <= 1e-10);
        }
    }

    #[test]
    fn remainders_shrink_with_the_perturbation(seed in 0u64..1_000_000, t in 0.05f64..1.0) {
        let Some(inst) = gated_instance(seed) else { return Ok(()) };
        let scaled = inst.p.scaled(t);
        let status = check_assumptions(inst.sigma(), &scaled).unwrap();
        prop_assume!(status.passes());
        let rep = singular_bound_cluster(inst.sigma(), &scaled, GatePolicy::Enforce).unwrap();
        prop_assert!(rep.w_norm <= 2.0 / 3.0 * scaled.norm + 1e-12);
        prop_assert!(rep.r3_norm <= 2.0 * scaled.norm * rep.w_norm * (1.0 + 1e-12));
    }
}
