//! Exact expressions and lower bounds for the smallest eigenvalues of a
//! blocked Gram matrix and the smallest singular values of `A + E`.

mod eigen;
mod gram;
mod singular;

pub use eigen::{
    bound_cluster_dominant, bound_cluster_first, bound_single_dominant, bound_single_first, cluster_lambdas_exact,
    lambda_min_exact,
};
pub use gram::BlockedGram;
pub use singular::{
    check_assumptions, check_assumptions_nominal, perturbed_gram, singular_bound_cluster, singular_bound_single, AssumptionStatus, BoundReport,
    GatePolicy,
};
