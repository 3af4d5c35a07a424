//! Reduced divisors: Dhar burning on finite models, reduction on the metric
//! graph, and the subset characterisation of reducedness.

pub mod finite;
pub mod saturation;
pub mod metric;

pub use finite::{apply_script, dhar_burnt_set, is_q_reduced, q_reduce, ChipGraph, FiringScript, ReductionResult};
pub use saturation::{fire_closed_set, is_p_reduced, is_singleton_system, move_to_vertex, saturated_set};
pub use metric::{has_effective_rep, p_reduce_by_subdivision, p_reduce_metric, MetricEngine};
