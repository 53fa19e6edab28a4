//! Partial-transpose tests for three-qubit states: exact PT spectra, the
//! structural physical approximation (SPA) of partial transposition,
//! multi-copy power traces with their shift-operator form, and recovery of
//! a spectrum from its power sums.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{
    eig_hermitian, eigvals_hermitian, kron, pauli, ComplexMatrix, DensityMatrix, Spectrum, C64,
};
use crate::states::DctParams;

/// `ρ^{T_X}` counts as positive when its smallest eigenvalue is at least
/// `-PPT_TOL`.
pub const PPT_TOL: f64 = 1e-10;

/// Largest copy number for which the shift operator is built explicitly
/// (`8^3 = 512`).
pub const MAX_SHIFT_COPIES: usize = 3;

/// Number of power sums needed to pin down an `8 × 8` spectrum.
pub const SPECTRUM_TRACES: usize = 8;

/// Which party is transposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cut {
    A,
    B,
    C,
}

impl Cut {
    pub const ALL: [Cut; 3] = [Cut::A, Cut::B, Cut::C];

    pub fn qubit(self) -> usize {
        match self {
            Cut::A => 0,
            Cut::B => 1,
            Cut::C => 2,
        }
    }

    pub fn from_qubit(q: usize) -> Result<Self> {
        match q {
            0 => Ok(Cut::A),
            1 => Ok(Cut::B),
            2 => Ok(Cut::C),
            _ => Err(Error::BadIndex(format!("no cut for qubit {q}"))),
        }
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

fn require_three_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.n_qubits() != 3 {
        return Err(Error::DimMismatch(8, rho.dim()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PTReport {
    pub cut: Cut,
    pub spectrum: Spectrum,
    pub is_ppt: bool,
    pub min_eigenvalue: f64,
    /// `|min_eigenvalue| ≤ PPT_TOL`: positive only up to tolerance.
    pub on_boundary: bool,
}

impl PTReport {
    pub fn from_matrix(cut: Cut, pt: &ComplexMatrix) -> Result<Self> {
        let eigenvalues = eigvals_hermitian(pt)?;
        let min = eigenvalues.last().copied().unwrap_or(f64::NAN);
        Ok(Self {
            cut,
            spectrum: Spectrum {
                eigenvalues,
                eigenvectors: None,
            },
            is_ppt: min >= -PPT_TOL,
            min_eigenvalue: min,
            on_boundary: min.abs() <= PPT_TOL,
        })
    }
}

pub fn pt_spectrum(rho: &DensityMatrix, cut: Cut) -> Result<PTReport> {
    require_three_qubits(rho)?;
    PTReport::from_matrix(cut, &rho.partial_transpose(cut.qubit())?)
}

/// Reports for cuts A, B, C in that order.
pub fn pt_reports(rho: &DensityMatrix) -> Result<Vec<PTReport>> {
    Cut::ALL.iter().map(|&c| pt_spectrum(rho, c)).collect()
}

/// The DCT distillability bits `s_k = [λ_k < Δ/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkBits {
    pub s01: bool,
    pub s10: bool,
    pub s11: bool,
}

impl SkBits {
    /// Whether `ρ^{T_X}` is predicted to be negative.
    pub fn predicts_npt(&self, cut: Cut) -> bool {
        match cut {
            Cut::A => self.s10,
            Cut::B => self.s01,
            Cut::C => self.s11,
        }
    }

    pub fn npt_count(&self) -> usize {
        [self.s01, self.s10, self.s11]
            .iter()
            .filter(|&&s| s)
            .count()
    }
}

/// `s_k = 1` iff `λ_k < Δ/2`. The comparison uses the same tolerance as the
/// spectral PPT test, since the PT eigenvalues of the pair block are
/// `λ_k ± Δ/2`; a tie within `PPT_TOL` gives `s_k = 0`.
pub fn dct_sk_classify(p: &DctParams) -> SkBits {
    let half = p.delta() / 2.0;
    let bit = |l: f64| l - half < -PPT_TOL;
    SkBits {
        s01: bit(p.lambda01()),
        s10: bit(p.lambda10()),
        s11: bit(p.lambda11()),
    }
}

/// Permutation that moves `cut` to qubit 2, where the canonical SPA acts.
/// Each is its own inverse.
fn spa_frame(cut: Cut) -> [usize; 3] {
    match cut {
        Cut::A => [2, 1, 0],
        Cut::B => [0, 2, 1],
        Cut::C => [0, 1, 2],
    }
}

fn in_frame(m: &ComplexMatrix, cut: Cut) -> Result<ComplexMatrix> {
    m.permute_qubits(&spa_frame(cut))
}

/// SPA of `I ⊗ (I ⊗ T)` in the defining affine form: with the transposed
/// qubit moved to position 2, `(8/9) ρ_0 ⊗ I/4 + (1/9) ρ^{T_2}`.
pub fn spa_affine(rho: &DensityMatrix, cut: Cut) -> Result<DensityMatrix> {
    require_three_qubits(rho)?;
    DensityMatrix::new(spa_affine_matrix(rho.matrix(), cut)?)
}

/// [`spa_affine`] on any Hermitian unit-trace `8 × 8` matrix, such as an
/// unprojected tomographic estimate.
pub fn spa_affine_matrix(m: &ComplexMatrix, cut: Cut) -> Result<ComplexMatrix> {
    let canon = DensityMatrix::new_psd_by_construction(in_frame(m, cut)?)?;
    if canon.n_qubits() != 3 {
        return Err(Error::DimMismatch(8, canon.dim()));
    }
    let rho0 = canon.partial_trace(&[0])?;
    let mut out = kron(rho0.matrix(), &ComplexMatrix::identity(4)).scale_real(2.0 / 9.0);
    out.add_scaled_mut(&canon.partial_transpose(2)?, C64::new(1.0 / 9.0, 0.0));
    Ok(in_frame(&out, cut)?.hermitian_part())
}

/// Weights of the two branches of the SPA operator-sum form: the local
/// depolarizing branch `Λ₁ ⊗ Λ₂` and the flipped branch `I ⊗ σ_xσ_z Λ₁ σ_zσ_x`.
pub const SPA_WEIGHTS: (f64, f64) = (2.0 / 3.0, 1.0 / 3.0);

/// Kraus operators on three qubits (canonical frame) for the given branch
/// weights. `Λ₁(σ) = (1/3)Σ_{i=x,y,z} σ_i σ σ_i` acts on qubit 1 and the full
/// twirl `Λ₂` on qubit 2 in the first branch; the second branch applies
/// `σ_xσ_z Λ₁(·) σ_zσ_x` to qubit 2.
pub fn spa_kraus_operators(weights: (f64, f64)) -> Vec<ComplexMatrix> {
    let id = pauli::id();
    let mut ops = Vec::with_capacity(15);
    let w1 = (weights.0 / 12.0).sqrt();
    for i in 1..4 {
        for j in 0..4 {
            let k = kron(&kron(&id, &pauli::by_index(i)), &pauli::by_index(j));
            ops.push(k.scale_real(w1));
        }
    }
    let w2 = (weights.1 / 3.0).sqrt();
    let xz = &pauli::x() * &pauli::z();
    for i in 1..4 {
        let local = &xz * &pauli::by_index(i);
        ops.push(kron(&kron(&id, &id), &local).scale_real(w2));
    }
    ops
}

/// Applies `Σ K ρ K†` in the canonical frame of `cut` with arbitrary branch
/// weights. Not trace preserving unless the weights sum to one.
pub fn spa_kraus_weighted(
    rho: &DensityMatrix,
    cut: Cut,
    weights: (f64, f64),
) -> Result<ComplexMatrix> {
    require_three_qubits(rho)?;
    spa_kraus_matrix(rho.matrix(), cut, weights)
}

/// Operator-sum application on any `8 × 8` matrix.
pub fn spa_kraus_matrix(m: &ComplexMatrix, cut: Cut, weights: (f64, f64)) -> Result<ComplexMatrix> {
    if m.dim() != 8 {
        return Err(Error::DimMismatch(8, m.dim()));
    }
    let canon = in_frame(m, cut)?;
    let mut out = ComplexMatrix::zeros(8);
    for k in spa_kraus_operators(weights) {
        out.add_scaled_mut(&(&(&k * &canon) * &k.adjoint()), C64::new(1.0, 0.0));
    }
    in_frame(&out, cut)
}

/// SPA of partial transposition implemented as an explicit local channel.
pub fn spa_kraus(rho: &DensityMatrix, cut: Cut) -> Result<DensityMatrix> {
    let out = spa_kraus_weighted(rho, cut, SPA_WEIGHTS)?;
    DensityMatrix::new(out.hermitian_part())
}

/// Recovers `ρ^{T_X}` from an SPA output alone: the untouched qubit's
/// marginal survives the channel, so `ρ^{T} = 9ρ' - 2 ρ'_0 ⊗ I`.
pub fn spa_recover_pt(spa_out: &DensityMatrix, cut: Cut) -> Result<ComplexMatrix> {
    require_three_qubits(spa_out)?;
    spa_recover_pt_matrix(spa_out.matrix(), cut)
}

pub fn spa_recover_pt_matrix(spa_out: &ComplexMatrix, cut: Cut) -> Result<ComplexMatrix> {
    let canon = DensityMatrix::new_psd_by_construction(in_frame(spa_out, cut)?)?;
    if canon.n_qubits() != 3 {
        return Err(Error::DimMismatch(8, canon.dim()));
    }
    let rho0 = canon.partial_trace(&[0])?;
    let mut pt = canon.matrix().scale_real(9.0);
    pt.add_scaled_mut(
        &kron(rho0.matrix(), &ComplexMatrix::identity(4)),
        C64::new(-2.0, 0.0),
    );
    in_frame(&pt, cut)
}

/// `p_k = tr(ρ^k)` for `k = 1..=K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerTraces {
    pub values: Vec<f64>,
}

impl PowerTraces {
    /// `p_k`, 1-based.
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }
}

/// Power sums of any Hermitian matrix by repeated multiplication.
pub fn matrix_power_traces(m: &ComplexMatrix, k_max: usize) -> Vec<f64> {
    let mut values = Vec::with_capacity(k_max);
    let mut acc = m.clone();
    for k in 1..=k_max {
        if k > 1 {
            acc = &acc * m;
        }
        values.push(acc.trace().re);
    }
    values
}

pub fn power_traces(rho: &DensityMatrix, k_max: usize) -> Result<PowerTraces> {
    if k_max == 0 {
        return Err(Error::BadParams("need at least one power".into()));
    }
    Ok(PowerTraces {
        values: matrix_power_traces(rho.matrix(), k_max),
    })
}

/// Direction in which one party's copies are cycled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftDirection {
    /// `|x₁ x₂ … x_k⟩ → |x_k x₁ … x_{k-1}⟩`
    Forward,
    Reverse,
}

/// The permutation `V_A ⊗ V_B ⊗ V_C` on `k` copies of three qubits. Copies
/// are stored copy-major: party `X` of copy `c` is qubit `3c + X`.
pub fn shift_operator(k: usize, directions: [ShiftDirection; 3]) -> Result<ComplexMatrix> {
    if k == 0 {
        return Err(Error::BadParams("k must be positive".into()));
    }
    if k > MAX_SHIFT_COPIES {
        return Err(Error::TooLarge(k));
    }
    let n = 3 * k;
    let dim = 1usize << n;
    let copy_value = |x: usize, c: usize| (x >> (3 * (k - 1 - c))) & 7;
    let mut v = ComplexMatrix::zeros(dim);
    for x in 0..dim {
        let mut y = 0usize;
        for c in 0..k {
            let mut value = 0usize;
            for (party, dir) in directions.iter().enumerate() {
                // forward: new copy c holds what copy c-1 held
                let src = match dir {
                    ShiftDirection::Forward => (c + k - 1) % k,
                    ShiftDirection::Reverse => (c + 1) % k,
                };
                let bit = 2 - party;
                value |= copy_value(x, src) & (1 << bit);
            }
            y |= value << (3 * (k - 1 - c));
        }
        v[(y, x)] = C64::new(1.0, 0.0);
    }
    Ok(v)
}

/// `Re tr[ρ^{⊗k} (V_A ⊗ V_B ⊗ V_C)]`. All parties forward gives `tr ρ^k`;
/// reversing one party `X` gives `tr (ρ^{T_X})^k`.
pub fn shift_operator_check(
    rho: &DensityMatrix,
    k: usize,
    directions: [ShiftDirection; 3],
) -> Result<f64> {
    require_three_qubits(rho)?;
    let v = shift_operator(k, directions)?;
    let mut copies = rho.matrix().clone();
    for _ in 1..k {
        copies = kron(&copies, rho.matrix());
    }
    Ok(copies.trace_product(&v).re)
}

/// The eight outcome probabilities `P_ijl` of the three parties' shift
/// measurements on `k` copies, expanded over marginal power traces.
pub fn probs_from_traces(rho: &DensityMatrix, k: usize) -> Result<[f64; 8]> {
    require_three_qubits(rho)?;
    if k == 0 {
        return Err(Error::BadParams("k must be positive".into()));
    }
    // t[mask]: tr(ρ_S^k) for the parties in mask (bit 2 = A, 1 = B, 0 = C)
    let mut t = [1.0; 8];
    for (mask, slot) in t.iter_mut().enumerate().skip(1) {
        let keep: Vec<usize> = (0..3).filter(|q| (mask >> (2 - q)) & 1 == 1).collect();
        let marginal = rho.partial_trace(&keep)?;
        *slot = *matrix_power_traces(marginal.matrix(), k)
            .last()
            .expect("k ≥ 1");
    }
    let mut probs = [0.0; 8];
    for (outcome, p) in probs.iter_mut().enumerate() {
        *p = (0..8)
            .map(|mask| {
                let sign = if (outcome & mask).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                sign * t[mask]
            })
            .sum::<f64>()
            / 8.0;
        if *p < -PPT_TOL {
            return Err(Error::NegativeProbability { outcome, value: *p });
        }
    }
    Ok(probs)
}

/// `Σ (-1)^{i+j+l} P_ijl`, which returns the full-state trace `tr ρ^k`.
pub fn signed_sum(probs: &[f64; 8]) -> f64 {
    probs
        .iter()
        .enumerate()
        .map(|(o, p)| if o.count_ones() % 2 == 0 { *p } else { -*p })
        .sum()
}

/// Elementary symmetric polynomials `e_0..=e_n` from power sums `p_1..=p_n`
/// via Newton's identities `k e_k = Σ_{i=1}^{k} (-1)^{i-1} e_{k-i} p_i`.
pub fn newton_elementary(power_sums: &[f64]) -> Vec<f64> {
    let n = power_sums.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for k in 1..=n {
        let mut acc = 0.0;
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * e[k - i] * power_sums[i - 1];
        }
        e[k] = acc / k as f64;
    }
    e
}

/// Coefficients (highest degree first) of `Π (λ - λ_i) = Σ (-1)^k e_k λ^{n-k}`.
pub fn characteristic_polynomial(power_sums: &[f64]) -> Vec<f64> {
    newton_elementary(power_sums)
        .iter()
        .enumerate()
        .map(|(k, e)| if k % 2 == 0 { *e } else { -*e })
        .collect()
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, c| acc * x + c)
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    coeffs[..n]
        .iter()
        .enumerate()
        .map(|(i, c)| c * (n - i) as f64)
        .collect()
}

/// Roots closer than this are treated as one cluster when repairing
/// multiple roots.
const CLUSTER_GAP: f64 = 1e-4;

fn bisect(coeffs: &[f64], mut a: f64, mut b: f64) -> Option<f64> {
    let (mut fa, fb) = (horner(coeffs, a), horner(coeffs, b));
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = horner(coeffs, m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Real roots of a polynomial whose roots are all real, ascending, repeated
/// by multiplicity, searched in `[lo, hi]`.
///
/// The roots of `q'` split `[lo, hi]` into `deg q` intervals with one root
/// of `q` each (Rolle). Roots are found recursively from the derivative
/// down: bisection where `q` changes sign, otherwise the endpoint where `|q|`
/// is smaller, which is where a multiple root sits.
///
/// Rounding splits an `m`-fold root by about `δ^{1/m}`, so a lone bisected
/// root next to endpoint picks can be far off. Such clusters are replaced
/// by the root of `q^{(m-1)}` inside them, which is simple and therefore
/// well conditioned.
pub fn real_roots(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let critical = real_roots(&derivative(coeffs), lo, hi);
    let mut knots = Vec::with_capacity(deg + 1);
    knots.push(lo);
    knots.extend(critical.iter().map(|&c| c.clamp(lo, hi)));
    knots.push(hi);
    let found: Vec<(f64, bool)> = knots
        .windows(2)
        .map(|w| match bisect(coeffs, w[0], w[1]) {
            Some(r) => (r, false),
            None => {
                let (fa, fb) = (horner(coeffs, w[0]), horner(coeffs, w[1]));
                (if fa.abs() <= fb.abs() { w[0] } else { w[1] }, true)
            }
        })
        .collect();

    let mut roots: Vec<f64> = found.iter().map(|r| r.0).collect();
    let mut start = 0;
    while start < found.len() {
        let mut end = start + 1;
        while end < found.len() && found[end].0 - found[end - 1].0 < CLUSTER_GAP {
            end += 1;
        }
        let m = end - start;
        if m > 1 && found[start..end].iter().any(|r| r.1) {
            let mut d = coeffs.to_vec();
            for _ in 0..m - 1 {
                d = derivative(&d);
            }
            let (a, b) = (found[start].0 - CLUSTER_GAP, found[end - 1].0 + CLUSTER_GAP);
            if let Some(center) = bisect(&d, a, b) {
                roots[start..end].iter_mut().for_each(|r| *r = center);
            }
        }
        start = end;
    }
    roots
}

/// Eigenvalues of an `8 × 8` unit-trace positive matrix from `p_1..p_8`.
///
/// Fails with `IllConditioned` if a recovered root leaves
/// `[-1e-6, 1 + 1e-6]` or the roots do not reproduce the power sums to
/// `1e-6`; the latter is how complex roots (inconsistent input) show up.
pub fn spectrum_from_traces(traces: &PowerTraces) -> Result<Spectrum> {
    if traces.values.len() != SPECTRUM_TRACES {
        return Err(Error::BadParams(format!(
            "need {SPECTRUM_TRACES} power traces, got {}",
            traces.values.len()
        )));
    }
    let poly = characteristic_polynomial(&traces.values);
    let mut roots = real_roots(&poly, -1.0, 2.0);
    for &r in &roots {
        if !(-1e-6..=1.0 + 1e-6).contains(&r) {
            return Err(Error::IllConditioned(format!("root {r} outside [0, 1]")));
        }
    }
    for (k, &p) in traces.values.iter().enumerate() {
        let recomputed: f64 = roots.iter().map(|r| r.powi(k as i32 + 1)).sum();
        if (recomputed - p).abs() > 1e-6 {
            return Err(Error::IllConditioned(format!(
                "roots give p_{} = {recomputed}, expected {p}",
                k + 1
            )));
        }
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    Ok(Spectrum {
        eigenvalues: roots,
        eigenvectors: None,
    })
}

/// Eigenvalues of `ρ` for comparison with [`spectrum_from_traces`].
pub fn direct_spectrum(rho: &DensityMatrix) -> Result<Spectrum> {
    let mut s = eig_hermitian(rho.matrix())?;
    s.eigenvectors = None;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{max_norm_distance, PureState};
    use crate::rng::{random_density, SplitMix64};
    use crate::states::{abls_direct, dct_direct, AblsParams};

    fn ghz() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![C64::new(0.0, 0.0); 8];
        amps[0] = C64::new(h, 0.0);
        amps[7] = C64::new(h, 0.0);
        PureState::new(3, amps).unwrap().to_density()
    }

    #[test]
    fn ghz_pt_min_is_minus_half() {
        for c in Cut::ALL {
            let r = pt_spectrum(&ghz(), c).unwrap();
            assert!((r.min_eigenvalue + 0.5).abs() < 1e-12);
            assert!(!r.is_ppt);
        }
    }

    #[test]
    fn abls_is_ppt() {
        for r in pt_reports(&abls_direct(&AblsParams::optimal())).unwrap() {
            assert!(r.is_ppt, "{r:?}");
        }
    }

    #[test]
    fn eq24_pattern() {
        let p = DctParams::eq24();
        let reports = pt_reports(&dct_direct(&p)).unwrap();
        assert!(!reports[0].is_ppt);
        assert!(reports[1].is_ppt && reports[2].is_ppt);
        let s = dct_sk_classify(&p);
        assert_eq!(
            s,
            SkBits {
                s01: false,
                s10: true,
                s11: false
            }
        );
        assert!(reports[1].on_boundary && reports[2].on_boundary);
    }

    #[test]
    fn spa_fixes_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(3);
        for c in Cut::ALL {
            let out = spa_affine(&rho, c).unwrap();
            assert!(max_norm_distance(out.matrix(), rho.matrix()).unwrap() < 1e-15);
        }
    }

    #[test]
    fn spa_forms_agree() {
        let mut rng = SplitMix64::new(17);
        for _ in 0..5 {
            let rho = random_density(3, &mut rng);
            for c in Cut::ALL {
                let a = spa_affine(&rho, c).unwrap();
                let k = spa_kraus(&rho, c).unwrap();
                assert!(max_norm_distance(a.matrix(), k.matrix()).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn swapped_weights_do_not_give_spa() {
        let mut rng = SplitMix64::new(2);
        let rho = random_density(3, &mut rng);
        let swapped = spa_kraus_weighted(&rho, Cut::C, (1.0 / 3.0, 2.0 / 3.0)).unwrap();
        let affine = spa_affine(&rho, Cut::C).unwrap();
        assert!(max_norm_distance(&swapped, affine.matrix()).unwrap() > 1e-3);
    }

    #[test]
    fn full_twirl_depolarizes() {
        let mut rng = SplitMix64::new(4);
        let sigma = random_density(1, &mut rng);
        let mut out = ComplexMatrix::zeros(2);
        for i in 0..4 {
            let s = pauli::by_index(i);
            out.add_scaled_mut(&(&(&s * sigma.matrix()) * &s), C64::new(0.25, 0.0));
        }
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(max_norm_distance(&out, &half).unwrap() < 1e-15);
    }

    #[test]
    fn spa_recovers_pt() {
        let rho = abls_direct(&AblsParams::optimal());
        for c in Cut::ALL {
            let out = spa_affine(&rho, c).unwrap();
            let pt = spa_recover_pt(&out, c).unwrap();
            let direct = rho.partial_transpose(c.qubit()).unwrap();
            assert!(max_norm_distance(&pt, &direct).unwrap() < 1e-12);
        }
    }

    #[test]
    fn power_traces_basics() {
        let t = power_traces(&DensityMatrix::maximally_mixed(3), 4).unwrap();
        for (k, v) in t.values.iter().enumerate() {
            assert!((v - 8f64.powi(-(k as i32))).abs() < 1e-15);
        }
        let pure = power_traces(&PureState::basis(3, 5).to_density(), 3).unwrap();
        assert!(pure.values.iter().all(|v| (v - 1.0).abs() < 1e-15));
        assert!(power_traces(&DensityMatrix::maximally_mixed(3), 0).is_err());
    }

    #[test]
    fn shift_operator_identities() {
        use ShiftDirection::{Forward as F, Reverse as R};
        let rho = abls_direct(&AblsParams::new(0.5, 1.5, 2.0).unwrap());
        let fwd = shift_operator_check(&rho, 2, [F; 3]).unwrap();
        assert!((fwd - power_traces(&rho, 2).unwrap().values[1]).abs() < 1e-12);
        let rev = shift_operator_check(&rho, 3, [R, F, F]).unwrap();
        let pt = rho.partial_transpose(0).unwrap();
        assert!((rev - matrix_power_traces(&pt, 3)[2]).abs() < 1e-12);
        assert_eq!(shift_operator(4, [F; 3]).unwrap_err(), Error::TooLarge(4));
        let mixed = shift_operator_check(&DensityMatrix::maximally_mixed(3), 2, [F; 3]).unwrap();
        assert!((mixed - 0.125).abs() < 1e-15);
    }

    #[test]
    fn shift_operator_is_a_permutation() {
        let v = shift_operator(3, [ShiftDirection::Forward; 3]).unwrap();
        assert!(v.unitarity_defect() < 1e-15);
        let back = shift_operator(3, [ShiftDirection::Reverse; 3]).unwrap();
        assert!(max_norm_distance(&back, &v.adjoint()).unwrap() == 0.0);
    }

    #[test]
    fn probs_examples() {
        let p1 = probs_from_traces(&ghz(), 1).unwrap();
        assert!((p1[0] - 1.0).abs() < 1e-15 && p1[1..].iter().all(|p| p.abs() < 1e-15));
        let product = PureState::from_bits("011").unwrap().to_density();
        assert!((probs_from_traces(&product, 3).unwrap()[0] - 1.0).abs() < 1e-14);
        let rho = abls_direct(&AblsParams::optimal());
        let probs = probs_from_traces(&rho, 2).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let p2 = power_traces(&rho, 2).unwrap().values[1];
        assert!((signed_sum(&probs) - p2).abs() < 1e-12);
    }

    #[test]
    fn newton_on_known_roots() {
        let roots = [0.5, 0.25, 0.25];
        let sums: Vec<f64> = (1..=3)
            .map(|k| roots.iter().map(|r: &f64| r.powi(k)).sum())
            .collect();
        let poly = characteristic_polynomial(&sums);
        // (x - 1/2)(x - 1/4)^2 = x^3 - x^2 + 5/16 x - 1/32
        let want = [1.0, -1.0, 5.0 / 16.0, -1.0 / 32.0];
        for (a, b) in poly.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let mut found = real_roots(&poly, -1.0, 2.0);
        found.sort_by(f64::total_cmp);
        for (a, b) in found.iter().zip([0.25, 0.25, 0.5]) {
            assert!((a - b).abs() < 1e-7, "{found:?}");
        }
    }

    #[test]
    fn spectrum_examples() {
        let mixed = power_traces(&DensityMatrix::maximally_mixed(3), 8).unwrap();
        let s = spectrum_from_traces(&mixed).unwrap();
        assert!(
            s.eigenvalues.iter().all(|l| (l - 0.125).abs() < 1e-6),
            "{s:?}"
        );
        let pure = power_traces(&PureState::basis(3, 2).to_density(), 8).unwrap();
        let s = spectrum_from_traces(&pure).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-6);
        assert!(s.eigenvalues[1..].iter().all(|l| l.abs() < 1e-6));
        let rho = abls_direct(&AblsParams::optimal());
        let s = spectrum_from_traces(&power_traces(&rho, 8).unwrap()).unwrap();
        let d = direct_spectrum(&rho).unwrap();
        for (a, b) in s.eigenvalues.iter().zip(&d.eigenvalues) {
            assert!((a - b).abs() < 1e-6, "{s:?} vs {d:?}");
        }
    }

    #[test]
    fn spectrum_rejects_inconsistent_sums() {
        let bad = PowerTraces {
            values: vec![1.0, 2.0, 0.5, 0.1, 0.1, 0.1, 0.1, 0.1],
        };
        assert!(matches!(
            spectrum_from_traces(&bad),
            Err(Error::IllConditioned(_))
        ));
        assert!(spectrum_from_traces(&PowerTraces { values: vec![1.0] }).is_err());
    }
}
