use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::verify::{SQUARED_SLACK, WEYL_SLACK};
use crate::bounds::{check_assumptions, check_assumptions_nominal, singular_bound_cluster, AssumptionStatus, BoundReport, GatePolicy};
use crate::error::Result;
use crate::kernel::{singular_values, spectral_norm};
use crate::matgen::{assemble, create_sigmas};
use crate::precision::{demote, perturbation, rotate_blocks, PrecisionLevel};

/// Outcome of one generate → demote → bound run.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub label: String,
    pub seed: u64,
    pub level: PrecisionLevel,
    pub m: usize,
    /// Size of the small cluster (`k2`).
    pub r: usize,
    /// Constructed spectrum.
    pub exact: Vec<f64>,
    /// Singular values of `A` as computed in binary64.
    pub double: Vec<f64>,
    /// Singular values of the demoted matrix, computed in binary64.
    pub demoted: Vec<f64>,
    pub min_exact: f64,
    pub min_double: f64,
    pub min_demoted: f64,
    /// Mean of the `r` smallest values; `None` when there is no small cluster.
    pub avg_small_exact: Option<f64>,
    pub avg_small_double: Option<f64>,
    pub avg_small_demoted: Option<f64>,
    /// `‖E‖₂` for the demotion perturbation.
    pub e_norm: f64,
    /// `max_j |σ_j(A+E) − σ_j(A)| − ‖E‖₂`; non-positive when Weyl's
    /// inequality holds for the computed values.
    pub weyl_max_violation: f64,
    /// `max_j |σ_j(A) − sigma_j|` between computed and constructed values.
    pub double_overlap: f64,
    /// Gate evaluation with the measured `‖E‖₂`; `None` when there is no
    /// small cluster.
    pub status: Option<AssumptionStatus>,
    /// Gate evaluation with the estimate `‖E‖₂ ≈ u·σ_max`.
    pub nominal_status: Option<AssumptionStatus>,
    /// Present when the gates pass, or when forced.
    pub bound_report: Option<BoundReport>,
    /// Bounds were evaluated although a gate failed.
    pub bounds_forced: bool,
}

impl ExperimentReport {
    /// Invariants that must hold on every run, as human-readable failures:
    /// Weyl's inequality for the computed spectra, agreement of the binary64
    /// spectrum with the constructed one, and bound validity when the gates
    /// pass.
    pub fn invariant_failures(&self) -> Vec<String> {
        let mut failures = Vec::new();
        if self.weyl_max_violation > WEYL_SLACK * self.e_norm {
            failures.push(format!(
                "Weyl inequality exceeded by {:e} (‖E‖ = {:e})",
                self.weyl_max_violation, self.e_norm
            ));
        }
        let n = self.exact.len();
        let overlap_cap = 1e-10 * self.exact[0] * self.m.max(n) as f64;
        if self.double_overlap > overlap_cap {
            failures.push(format!(
                "binary64 spectrum deviates from the constructed one by {:e} > {overlap_cap:e}",
                self.double_overlap
            ));
        }
        if let (Some(report), Some(status)) = (&self.bound_report, self.status) {
            if status.passes() {
                let slack = SQUARED_SLACK * self.demoted[0] * self.demoted[0];
                for (j, (b, s)) in report.bounds.iter().zip(&self.demoted[n - self.r..]).enumerate() {
                    if *b > s * s + slack {
                        failures.push(format!("bound {} = {b:e} exceeds σ² = {:e}", j + 1, s * s));
                    }
                }
            }
        }
        failures
    }

    /// Per-index rows `(index, exact, double, demoted, sqrt(bound))`; the
    /// bound column covers the small cluster and is `None` where a bound is
    /// negative or absent.
    pub fn spectrum_rows(&self) -> Vec<SpectrumRow> {
        let n = self.exact.len();
        let roots = self.bound_report.as_ref().map(|b| b.singular_value_bounds());
        (0..n)
            .map(|i| {
                let bound = roots.as_ref().and_then(|roots| {
                    let offset = i.checked_sub(n - self.r)?;
                    roots.get(offset).copied().flatten()
                });
                SpectrumRow {
                    index: i + 1,
                    exact: self.exact[i],
                    double: self.double[i],
                    demoted: self.demoted[i],
                    bound,
                }
            })
            .collect()
    }
}

/// One line of the per-index table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumRow {
    /// 1-based index into the non-increasing spectrum.
    pub index: usize,
    pub exact: f64,
    pub double: f64,
    pub demoted: f64,
    pub bound: Option<f64>,
}

/// Runs trial 0 of `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_trial(config, 0)
}

/// Runs trial `k` of `config` (seed `config.seed + k`).
pub fn run_trial(config: &ExperimentConfig, k: usize) -> Result<ExperimentReport> {
    config.validate()?;
    let spec = config.trial_spec(k);
    let seed = config.trial_seed(k);
    let spectrum = create_sigmas(&spec)?;
    let built = assemble(&spectrum, config.m, seed)?;
    let a = built.a();
    let double = singular_values(a)?;
    let a_demoted = demote(a, config.level)?;
    let demoted = singular_values(&a_demoted)?;
    let e = perturbation(a, &a_demoted)?;
    let e_norm = spectral_norm(&e)?;

    let exact = spectrum.sigma().to_vec();
    let r = spectrum.split();
    let weyl_max_violation = max_abs_diff(&demoted, &double) - e_norm;
    let double_overlap = max_abs_diff(&double, &exact);

    let nominal_status = if r == 0 || r == exact.len() {
        None
    } else {
        Some(check_assumptions_nominal(&exact, r, config.level.unit_roundoff())?)
    };
    let (status, bound_report, bounds_forced) = if nominal_status.is_none() {
        (None, None, false)
    } else {
        let p = rotate_blocks(built.factors(), &e, r)?;
        let status = check_assumptions(&exact, &p)?;
        if status.passes() || config.force_bounds {
            let report = singular_bound_cluster(&exact, &p, GatePolicy::Override)?;
            (Some(status), Some(report), !status.passes())
        } else {
            (Some(status), None, false)
        }
    };

    Ok(ExperimentReport {
        label: config.label.clone(),
        seed,
        level: config.level,
        m: config.m,
        r,
        min_exact: last(&exact),
        min_double: last(&double),
        min_demoted: last(&demoted),
        avg_small_exact: tail_mean(&exact, r),
        avg_small_double: tail_mean(&double, r),
        avg_small_demoted: tail_mean(&demoted, r),
        exact,
        double,
        demoted,
        e_norm,
        weyl_max_violation,
        double_overlap,
        status,
        nominal_status,
        bound_report,
        bounds_forced,
    })
}

/// Runs all trials of `config` on the rayon pool, in seed order.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<ExperimentReport>> {
    config.validate()?;
    (0..config.trials).into_par_iter().map(|k| run_trial(config, k)).collect()
}

/// Median over trials of the headline quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialMedians {
    pub min_exact: f64,
    pub min_double: f64,
    pub min_demoted: f64,
    pub avg_small_exact: Option<f64>,
    pub avg_small_demoted: Option<f64>,
}

impl TrialMedians {
    pub fn of(reports: &[ExperimentReport]) -> Self {
        let pick = |f: &dyn Fn(&ExperimentReport) -> f64| median(reports.iter().map(f).collect());
        let pick_opt = |f: &dyn Fn(&ExperimentReport) -> Option<f64>| {
            let values: Option<Vec<f64>> = reports.iter().map(f).collect();
            values.filter(|v| !v.is_empty()).map(median)
        };
        Self {
            min_exact: pick(&|r| r.min_exact),
            min_double: pick(&|r| r.min_double),
            min_demoted: pick(&|r| r.min_demoted),
            avg_small_exact: pick_opt(&|r| r.avg_small_exact),
            avg_small_demoted: pick_opt(&|r| r.avg_small_demoted),
        }
    }
}

/// Median, averaging the middle pair for even lengths. NaN for empty input.
pub fn median(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

fn last(v: &[f64]) -> f64 {
    *v.last().expect("spectra are non-empty")
}

fn tail_mean(v: &[f64], r: usize) -> Option<f64> {
    (r > 0).then(|| v[v.len() - r..].iter().sum::<f64>() / r as f64)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
