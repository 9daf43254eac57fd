//! Stability-aware exploration of ML models: certification, querying,
//! verification, synthesis and optimization over ∃∀ formulas decided by a
//! δ-complete interval kernel.

pub mod doe;
pub mod exec;
pub mod explore;
pub mod expr;
pub mod model;
pub mod num;
pub mod refine;
pub mod solver;
pub mod spec;
