//! Topological dynamics on countable ordinal spaces below ω^ω: orbit
//! analysis, ultrafilter iterates `f^p`, and continuity checks.

pub mod arith;
pub mod continuity;
pub mod dsl;
pub mod dynamics;
pub mod fixtures;
pub mod iterates;
pub mod ordinal;
pub mod repro;
pub mod ultrafilter;
