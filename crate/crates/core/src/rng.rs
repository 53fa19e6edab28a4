//! Seeded randomness with a fixed, portable algorithm.
//!
//! Every random draw in the toolkit (multinomial shot sampling, random
//! optimizer starts, random test states) goes through [`SplitMix64`], so a
//! given seed produces bit-identical results on every platform and can be
//! reproduced by an implementation in any other language:
//!
//! ```text
//! state  <- state + 0x9E3779B97F4A7C15          (wrapping)
//! z      <- state
//! z      <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 (wrapping)
//! z      <- (z ^ (z >> 27)) * 0x94D049BB133111EB (wrapping)
//! output <- z ^ (z >> 31)
//! ```
//!
//! Uniform doubles take the top 53 bits: `(output >> 11) * 2^-53`, which lies
//! in `[0, 1)`.

use crate::qmat::{ComplexMatrix, DensityMatrix, PureState, C64};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform double in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal draw (Box-Muller, one output per pair of uniforms).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0, 1]
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn complex_normal(&mut self) -> C64 {
        C64::new(self.normal(), self.normal())
    }
}

/// Haar-random pure state on `n_qubits` (normalized complex Gaussian vector).
pub fn random_pure_state(n_qubits: usize, rng: &mut SplitMix64) -> PureState {
    let dim = 1usize << n_qubits;
    let amps: Vec<C64> = (0..dim).map(|_| rng.complex_normal()).collect();
    PureState::normalized(n_qubits, amps).expect("Gaussian vector is nonzero")
}

/// Random full-rank density matrix `G G† / tr(G G†)` with `G` Ginibre.
pub fn random_density(n_qubits: usize, rng: &mut SplitMix64) -> DensityMatrix {
    let dim = 1usize << n_qubits;
    let g = ComplexMatrix::from_fn(dim, |_, _| rng.complex_normal());
    let mut rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    rho.scale_mut(C64::new(1.0 / tr, 0.0));
    DensityMatrix::new_unchecked_psd(n_qubits, rho.hermitian_part())
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian(dim: usize, rng: &mut SplitMix64) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| rng.complex_normal()).hermitian_part()
}
