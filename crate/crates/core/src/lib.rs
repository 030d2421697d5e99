//! Exact evaluation of equivariant index formulas for Dirac-type operators on
//! good orbifolds `G\M`.
//!
//! The crate evaluates the fixed-point index formula grouped by conjugacy
//! classes of finite-order elements and by conjugacy classes of finite cyclic
//! subgroups, the twisted pairing form of the same formula, and the
//! per-subgroup decomposition of the operator's class. Every number is
//! cross-checked against closed-form kernel characters in [`oracle`].

pub mod charform;
pub mod error;
pub mod exact_arith;
pub mod groups;
pub mod index_engine;
pub mod oracle;
pub mod strata;
pub mod suite;

pub use error::{Error, Result};
pub use exact_arith::{Cyclotomic, Rational};
pub use groups::{CyclicClass, GroupElement, GroupModel, Representation};
pub use index_engine::{Grouping, IndexReport};

pub use strata::{ManifoldModel, ModelId, Operator, SpinLift, Twist};
