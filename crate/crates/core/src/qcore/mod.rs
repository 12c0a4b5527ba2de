//! Complex linear-algebra substrate: pure states, density matrices, tensor
//! products, partial traces and diagonal propagators. Energies are in units
//! with ħ = 1.

mod density;
mod state;

pub use density::{partial_trace, DensityMatrix, HERMITIAN_TOL, PSD_TOL, TRACE_TOL};
pub use state::{
    evolve_diagonal, inner_product, tensor_product, Amplitude, StateVector, ZERO_NORM,
};
