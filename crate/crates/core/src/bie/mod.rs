//! Nyström boundary-integral discretization and the forward solver.

mod dtn;
mod forward;
mod layer;
mod mesh;
pub mod quadrature;

pub use dtn::{dtn_matrix, dtn_matrix_with_noise, healthy_matrix, to_real_trig, Basis, DtnOperator, FluxNoise, ModeSet};
pub use forward::{solve_forward, ForwardOperator, ForwardSolution, InclusionBc, MAX_CONDITION};
pub use layer::{
    assemble_double_layer, assemble_log_modified_double_layer, assemble_modified_double_layer, assemble_normal_derivative, assemble_single_layer,
    fundamental_solution, LayerKind, LayerOperator, Potential, Target,
};
pub use mesh::NystromMesh;

#[allow(unused_imports)]
pub(crate) use forward::{condition_number, point_in_polygon};
