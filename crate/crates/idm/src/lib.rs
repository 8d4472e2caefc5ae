//! Interval debt model toolkit.
//!
//! Debts between banks carry an amount and a payment window. This crate
//! validates payment schedules, solves the tractable bailout problems
//! exactly, brute-forces the hard ones on small instances and generates
//! instances from classic NP-complete problems.

pub mod model;
pub mod lp;
pub mod validity;
pub mod tree;
pub mod oracle;
pub mod reductions;
pub mod io;
pub mod cli;

pub use model::{
    build_instance, money, ratio, BailoutVector, Debt, DebtId, DebtSpec, DebtTerms, IdmInstance,
    InstanceBuilder, ModelError, Money, NodeId, Schedule, Time, TimeMap,
};
pub use validity::Variant;
