use super::eig::eigvals_hermitian;
use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Tolerance for Hermiticity, trace and norm checks on states.
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Most negative eigenvalue a density matrix may carry.
pub const PSD_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite operator on `n_qubits`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let n_qubits = check_structure(&mat)?;
        let min = eigvals_hermitian(&mat)?.last().copied().unwrap_or(f64::NAN);
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min:e} below -{PSD_TOL:e}"
            )));
        }
        Ok(Self { n_qubits, mat })
    }

    /// Skips the eigenvalue check for matrices that are positive by
    /// construction (projectors, partial traces, CP-map outputs).
    pub(crate) fn new_unchecked_psd(n_qubits: usize, mat: ComplexMatrix) -> Self {
        debug_assert_eq!(mat.dim(), 1 << n_qubits);
        debug_assert!(mat.is_hermitian(1e-9));
        Self { n_qubits, mat }
    }

    /// Validates structure only (Hermitian, unit trace), with the positivity
    /// check left to the caller.
    pub fn new_psd_by_construction(mat: ComplexMatrix) -> Result<Self> {
        let n_qubits = check_structure(&mat)?;
        Ok(Self { n_qubits, mat })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            n_qubits: psi.n_qubits,
            mat: ComplexMatrix::outer(&psi.amps, &psi.amps),
        }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        Self {
            n_qubits,
            mat: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// Product state `ρ_A ⊗ ρ_B`.
    pub fn tensor(&self, other: &DensityMatrix) -> Self {
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            mat: super::matrix::kron(&self.mat, &other.mat),
        }
    }

    /// `p ρ + (1 - p) I/d`
    pub fn with_white_noise(&self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadParams(format!(
                "mixing weight {p} outside [0, 1]"
            )));
        }
        let dim = self.mat.dim();
        let mut mat = self.mat.scale_real(p);
        mat.add_scaled_mut(
            &ComplexMatrix::identity(dim),
            C64::new((1.0 - p) / dim as f64, 0.0),
        );
        Ok(Self {
            n_qubits: self.n_qubits,
            mat,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    /// Reduced state on the qubits in `keep` (result ordered ascending).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    /// Partial transpose with respect to qubit `cut`.
    pub fn partial_transpose(&self, cut: usize) -> Result<ComplexMatrix> {
        partial_transpose(self, cut)
    }
}

fn check_structure(mat: &ComplexMatrix) -> Result<usize> {
    let n_qubits = mat.qubit_count().ok_or_else(|| {
        Error::InvalidState(format!("dimension {} is not a power of two", mat.dim()))
    })?;
    if n_qubits == 0 {
        return Err(Error::InvalidState(
            "a state needs at least one qubit".into(),
        ));
    }
    let defect = mat.hermitian_defect();
    if defect > STRUCTURE_TOL {
        return Err(Error::InvalidState(format!(
            "not Hermitian (defect {defect:e})"
        )));
    }
    let tr = mat.trace().re;
    if (tr - 1.0).abs() > STRUCTURE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} is not 1")));
    }
    Ok(n_qubits)
}

/// Normalized state vector over `n_qubits` qubits; qubit 0 is the most
/// significant bit of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl PureState {
    pub fn new(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        check_len(n_qubits, amps.len())?;
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STRUCTURE_TOL {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(n_qubits: usize, mut amps: Vec<C64>) -> Result<Self> {
        check_len(n_qubits, amps.len())?;
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        for z in &mut amps {
            *z /= norm;
        }
        Ok(Self { n_qubits, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = C64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Basis state from a bit string such as `"0110"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let n = bits.len();
        let index = usize::from_str_radix(bits, 2)
            .map_err(|_| Error::Parse(format!("`{bits}` is not a bit string")))?;
        if n == 0 {
            return Err(Error::Parse("empty bit string".into()));
        }
        Ok(Self::basis(n, index))
    }

    /// `|a⟩ ⊗ |b⟩`
    pub fn tensor(&self, other: &PureState) -> Self {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            amps,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

fn check_len(n_qubits: usize, len: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits >= usize::BITS as usize || len != 1 << n_qubits {
        return Err(Error::InvalidState(format!(
            "{len} amplitudes do not describe {n_qubits} qubits"
        )));
    }
    Ok(())
}

/// Traces out every qubit not listed in `keep`. The kept qubits appear in
/// ascending order in the result.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(Error::BadIndex(
            "partial trace must keep at least one qubit".into(),
        ));
    }
    if let Some(&bad) = keep.iter().find(|&&q| q >= n) {
        return Err(Error::BadIndex(format!(
            "qubit {bad} out of range for {n}-qubit state"
        )));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let scatter = |bits: usize, positions: &[usize]| -> usize {
        let m = positions.len();
        positions
            .iter()
            .enumerate()
            .map(|(j, &q)| ((bits >> (m - 1 - j)) & 1) << (n - 1 - q))
            .sum()
    };
    let kd = 1usize << keep.len();
    let td = 1usize << traced.len();
    let keep_idx: Vec<usize> = (0..kd).map(|i| scatter(i, &keep)).collect();
    let trace_idx: Vec<usize> = (0..td).map(|t| scatter(t, &traced)).collect();

    let m = &rho.mat;
    let out = ComplexMatrix::from_fn(kd, |r, c| {
        trace_idx
            .iter()
            .map(|&t| m[(keep_idx[r] | t, keep_idx[c] | t)])
            .sum()
    });
    Ok(DensityMatrix::new_unchecked_psd(keep.len(), out))
}

/// `ρ^{T_cut}`: transposition of qubit `cut` only. Involutive and
/// trace-preserving; the result need not be positive.
pub fn partial_transpose(rho: &DensityMatrix, cut: usize) -> Result<ComplexMatrix> {
    if cut >= rho.n_qubits {
        return Err(Error::BadIndex(format!(
            "cut {cut} out of range for {}-qubit state",
            rho.n_qubits
        )));
    }
    rho.mat.partial_transpose(cut)
}
