//! Execution plans (naive, fused, space-blocked, wavefront), their expansion
//! into a command stream, and a replay-based legality checker.

pub mod plan;
pub mod stream;
pub mod validate;

pub use plan::{field_groups, make_space_plan, make_wavefront_plan, FieldGroup, Plan, SpacePlan, WavefrontPlan};
pub use stream::{enumerate_updates, Command, SparseHooks, UpdateStream};
pub use validate::{
    validate_schedule, DependenceSpec, GroupDeps, Read, SparseFootprint, ValidationReport, Violation, ViolationKind,
};
