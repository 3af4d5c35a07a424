//! Hyperelliptic metric graphs: involutions with tree quotients, explicit
//! g¹₂ certificates, their multiples, and the verification harness.

pub mod g12;
pub mod harness;
pub mod involution;

pub use g12::{compose_rg12, find_g12, tree_with_loops_g12, G12Certificate, G12Source, G12Wire};
pub use harness::{clifford_theorem_harness, HarnessReport};
pub use involution::{find_involutions, has_hyperelliptic_involution, quotient_is_tree, Involution, InvolutionSet};
