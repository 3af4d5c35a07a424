//! Exact divisor theory on metric graphs.
//!
//! Metric graphs are given by finite models with rational edge lengths and
//! every computation is done in exact rational arithmetic: reduced
//! divisors, Baker–Norine ranks, Riemann–Roch, tropical Jacobians and
//! certificates of hyperellipticity.

pub mod clifford;
pub mod divisor;
pub mod error;
pub mod generate;
pub mod io;
pub mod jacobian;
pub mod metric_graph;
pub mod rank;
pub mod rational;
pub mod reduction;
pub mod report;

pub use divisor::{div_of_function, validate_pl, Divisor, PlFunction};
pub use error::{Error, Result};
pub use jacobian::{abel_jacobi, are_equivalent, equivalence_witness, is_lattice_member, period_basis, AjVector, PeriodLattice};
pub use metric_graph::{
    build_model, canonical_divisor, genus, rank_determining_set, refine_with_points, unit_subdivision, Model, ModelSpec,
    PointRef, RankDeterminingSet,
};
pub use rank::{rank_finite, rank_metric, RankCertificate, RankMethod, RankOptions};
pub use rational::Q;
