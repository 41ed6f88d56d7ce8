//! Fault localization for loop-unrolled integer programs.
//!
//! Given a program annotated with a pre- and postcondition and a
//! counterexample input, the analysis walks the control-flow graph along the
//! counterexample path, tries flipping up to `k` branch conditions, and
//! enumerates bounded-size minimal correction sets (MCS) of the resulting
//! infeasible constraint systems. Each MCS names a set of statements whose
//! removal makes the path consistent with the postcondition.
//!
//! The constraint layer, solver and MCS enumerator are generic over the
//! integer type (see [`Scalar`]); the aliases below fix it to `i64`.

pub mod bench;
pub mod cfg;
pub mod constraints;
pub mod corpus;
pub mod expr;
pub mod lang;
pub mod localize;
pub mod mcs;
pub mod num;
pub mod oracle;
pub mod report;
pub mod solver;

pub use num::Scalar;

pub type LinExpr = expr::LinExpr<constraints::VersionedVar, i64>;
pub type Constraint = constraints::Constraint<i64>;
pub type Formula = constraints::Formula<i64>;
pub type Env = constraints::Env<i64>;
pub type Store = solver::Store<i64>;
pub type Verdict = solver::Verdict<i64>;
pub type Mcs = mcs::Mcs<i64>;
pub type McsReport = localize::McsReport<i64>;
