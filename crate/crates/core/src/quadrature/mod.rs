//! Integration engines: adaptive 1-D rules, oscillatory splitting,
//! eps -> 0 extrapolation and wave-vector grids.

mod adaptive;
mod kgrid;
mod rules;
mod value;

pub use adaptive::{
    apply_rule, integrate, integrate_breaks, integrate_oscillatory, integrate_to_infinity,
    phase_breakpoints, richardson_to_zero, CutoffPolicy, Extrapolation, QuadResult, QuadSpec,
};
pub use kgrid::{evaluate_grid, integrate_k_space, Geometry, GridSum, KGrid, KSpaceResult};
pub use rules::{gauss_legendre, gk15_nodes, gk21_nodes, GaussKronrod, RuleNode, GK15, GK21};
pub use value::{compensated_sum, CompensatedSum, QuadValue};
