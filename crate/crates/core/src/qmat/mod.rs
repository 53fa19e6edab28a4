//! Dense complex linear algebra for operators on up to nine qubits.
//!
//! Qubit ordering is fixed across the crate: qubit 0 is the leftmost label
//! in a ket `|q0 q1 q2 ...⟩`, i.e. the most significant bit of the
//! computational-basis index. `|011⟩` is index 3 and `|100⟩` is index 4.

mod eig;
mod matrix;
mod state;

pub use eig::{
    eig_hermitian, eigvals_hermitian, Spectrum, HERMITIAN_TOL, MAX_SWEEPS, OFF_DIAGONAL_TOL,
};
pub use matrix::{kron, kron_all, max_norm_distance, pauli, ComplexMatrix, C64, I, ONE, ZERO};
pub use state::{
    partial_trace, partial_transpose, DensityMatrix, PureState, PSD_TOL, STRUCTURE_TOL,
};

/// Bit of `qubit` in basis index `x` of an `n`-qubit register.
#[inline]
pub fn qubit_bit(x: usize, qubit: usize, n: usize) -> usize {
    (x >> (n - 1 - qubit)) & 1
}

/// Basis-state mask of `qubit` in an `n`-qubit register.
#[inline]
pub fn qubit_mask(qubit: usize, n: usize) -> usize {
    1 << (n - 1 - qubit)
}
