//! Distribution-based analysis of constitutive laws on second-order
//! non-holonomic frame jets: groupoid arithmetic, a small law language with
//! exact derivatives, pointwise symmetry solvers, grid-level classification,
//! leaf decomposition and homogeneity checks.

pub mod dsl;
pub mod error;
pub mod field;
pub mod foliation;
pub mod homogeneity;
pub mod jet;
pub mod material;
pub mod numerics;
pub mod rng;
pub mod tensor;

pub use dsl::{catalog, evaluate, parse_law, CoordLayout, LawEvaluation, LawExpr, CATALOG_NAMES};
pub use error::{Error, Result};
pub use field::{analyze_grid, BodyGrid, Classification, FieldReport};
pub use foliation::{flow_containment_check, label_leaves, FlowCheck, LeafLabeling};
pub use homogeneity::{
    homogeneous_section_at, leafwise_homogeneity, solve_homogeneity, HomogeneityOptions,
    HomogeneityReport, HomogeneityVerdict,
};
pub use jet::{
    compose, identity_jet, inverse, is_holonomic, left_translate_tangent, project_to_1jets, Jet,
    ProjectionMode, TangentJet,
};
pub use material::{
    assemble_holonomic, assemble_nonholonomic, embedding_matrix, is_material_isomorphism,
    solve_point, CoefficientVector, DistributionSample, HolonomicCoefficientVector, SolverConfig,
};
pub use numerics::{nullspace, subspace_compare, Subspace, SubspaceRelation};
pub use rng::Rng;
pub use tensor::Tensor3;
