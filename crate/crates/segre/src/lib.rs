//! Exact linear algebra on finite subsets of Segre varieties: defects,
//! circuits, kernels, rational normal curves of multidegree (1,...,1), and
//! exhaustive classification of small dependent configurations over prime
//! fields.

pub mod classifier;
pub mod cli;
pub mod curves;
pub mod io;
pub mod error;
pub mod field;
pub mod geometry;
pub mod linalg;
pub mod pgl2;
pub mod segre;

pub use classifier::{
    enumerate_sets, verify_bounds, verify_prop_e2, verify_prop_e301, verify_thm_e3, BoundsCheck,
    EnumOutcome, EnumTask, Filters, Reduction, VerificationReport,
};
pub use curves::{
    construct_example_n2, construct_extremal_n400, construct_p2p1_circuit, enumerate_b_k,
    fit_multidegree_one, CircuitKind, Multidegree, RncCurve,
};
pub use error::{Result, SegreError};
pub use field::{FieldSpec, Scalar};
pub use geometry::{MPoint, Pattern, PointSet, ProjPoint, Shape};
pub use linalg::{span_intersect, LinearSubspace, Matrix};
pub use pgl2::{fit_pgl2, projectively_equivalent, Mobius};
pub use segre::{
    analyze, check_lemma_ee0, circuit_partition_point, defect, defect_pattern,
    elementary_decrease, elementary_increase, embed_matrix, essential_partition,
    irredundantly_spans, span_of,
    is_circuit, is_minimal, is_nondegenerate, is_strongly_essential, linear_project,
    minimal_subspace, segre_embed, x_rank, DefectReport, LemmaReport, MinimalSubspace,
    RankWitness,
};
