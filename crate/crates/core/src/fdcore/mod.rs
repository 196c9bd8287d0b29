//! Finite-difference weights, operator assembly and banded solves.

mod banded;
mod operator;
mod weights;

pub use banded::{solve_banded, BandLu, BandMatrix};
pub use operator::{
    assemble_bdf4_matrix, operator_window, Bdf4Matrix, Coefficients, DiscreteOperator, OperatorStencils, Stencil,
    OPERATOR_BANDWIDTH,
};
pub use weights::{fd_weights, fornberg_table, lagrange_eval, lagrange_eval_with_slope};
