//! Finite-temperature states of two-dimensional lattice models as vectorized
//! projected entangled-pair operators, annealed from infinite temperature with
//! the simple update and measured with a corner transfer matrix environment.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ctm;
pub mod error;
pub mod evolution;
mod linalg;
pub mod models;
pub mod observables;
pub mod operator;
pub mod oracle;
pub mod pepo;
pub mod tensor;

pub use ctm::{ctm_converge, one_site_rdm, reduced_site_tensor, CtmEnvironment, ReducedSiteTensor};
pub use error::{Error, Result};
pub use evolution::{anneal, build_gate, resume, simple_update_bond, AnnealSchedule, Checkpoint, TwoSiteGate};
pub use models::{hardcore_bh, ising_model, softcore_bh, Model, ModelKind};
pub use observables::{expect_one_site, measure, onsager_magnetization, ObservableRecord};
pub use operator::OperatorMatrix;
pub use pepo::{
    exact_ising_pepo, identity_pepo, Bond, Snapshot, Sublattice, VectorizedPepo,
};
pub use tensor::{contract, truncated_svd, DenseTensor, SvdResult};
