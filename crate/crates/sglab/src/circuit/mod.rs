//! Generalized circuits over `[0, 1]`, valid colorings, and the compiler
//! embedding a colored circuit into a 2-player turn-based discounted game
//! whose near-equilibrium policies encode near-satisfying assignments.

mod analyze;
mod coloring;
mod compile;
pub mod gadgets;
mod model;
mod normalize;

pub use analyze::{check_assignment, extract_assignment, unimprovable_gap, CheckReport};
pub use coloring::{check_coloring, make_valid_coloring, ColoringReport, ColoringStats};
pub use compile::{
    compile, rescale_to_half_discount, CompileMeta, CompileParams, CompiledGame, GateConstants,
};
pub use model::{
    Assignment, CircuitFile, Coloring, Gate, GateFile, GeneralizedCircuit, NodeId,
};
pub use normalize::normalize_circuit;

/// The coloring compatibility map: the per-input scale a valid coloring
/// must satisfy for a scaled-sum gate parameter.
pub fn coloring_scale(param: f64) -> f64 {
    if param.abs() >= 0.5 {
        2.0 * param
    } else if param >= 0.0 {
        1.0
    } else {
        -1.0
    }
}
