//! The entanglement witness `W = W̄ - εI` for the ABLS family.
//!
//! `W̄` is the sum of the kernel projector of `ρ` and the partially
//! transposed kernel projectors of the three `ρ^{T_X}`. It has zero
//! expectation on `ρ` and on nothing else of interest, and `ε` is the
//! smallest value `W̄` takes on a product vector, so `W` is non-negative on
//! separable states and equals `-ε` on `ρ`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{compare_minima, Minimum, NelderMead};
use crate::qmat::{eig_hermitian, kron_all, ComplexMatrix, DensityMatrix, PureState, C64};
use crate::rng::SplitMix64;
use crate::states::{abls_direct, AblsParams};
use crate::tomo::{Axis, MeasSetting};

/// Eigenvalues with modulus below this count as kernel.
pub const KERNEL_TOL: f64 = 1e-9;

/// Number of settings in the witness decomposition.
pub const N_SETTINGS: usize = 4;

const LATTICE_PER_AXIS: usize = 4;
const RANDOM_STARTS: usize = 64;
const START_SEED: u64 = 0x0057_17E5_5EED;

/// Projector onto the kernel (eigenvalues within [`KERNEL_TOL`] of zero) of
/// a Hermitian matrix. Zero if the kernel is trivial.
pub fn kernel_projector(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = eig_hermitian(m)?;
    let mut proj = ComplexMatrix::zeros(m.dim());
    for v in spec.vectors_where(|l| l.abs() <= KERNEL_TOL) {
        proj.add_scaled_mut(&ComplexMatrix::outer(&v, &v), C64::new(1.0, 0.0));
    }
    Ok(proj)
}

/// `W̄ = P + Q_A^{T_A} + Q_B^{T_B} + Q_C^{T_C}` built from the kernels of
/// `ρ` and its partial transposes.
pub fn wbar_generic(rho: &DensityMatrix) -> Result<ComplexMatrix> {
    if rho.n_qubits() != 3 {
        return Err(Error::DimMismatch(8, rho.dim()));
    }
    let mut w = kernel_projector(rho.matrix())?;
    for cut in 0..3 {
        let q = kernel_projector(&rho.partial_transpose(cut)?)?;
        w.add_scaled_mut(&q.partial_transpose(cut)?, C64::new(1.0, 0.0));
    }
    Ok(w.hermitian_part())
}

/// Diagonal and corner entries of `W̄` in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCoefficients {
    /// `⟨x|W̄|x⟩` for basis index `x = 0..8`.
    pub diagonal: [f64; 8],
    /// `⟨000|W̄|111⟩ = -κ`.
    pub corner: f64,
}

impl WitnessCoefficients {
    /// The closed form evaluated at any `a, b, c > 0`, including points such
    /// as `a = b = c = 1` where the state itself is undefined.
    pub fn from_raw(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::BadParams(format!("{name} = {v} violates a,b,c > 0")));
            }
        }
        let (ka, kb, kc) = (
            1.0 / (1.0 + a * a),
            1.0 / (1.0 + b * b),
            1.0 / (1.0 + c * c),
        );
        let diagonal = [0.5, ka, kb, kc, c * c * kc, b * b * kb, a * a * ka, 0.5];
        let corner = -(0.5 + c * kc + b * kb + a * ka);
        Ok(Self { diagonal, corner })
    }

    pub fn new(p: &AblsParams) -> Self {
        Self::from_raw(p.a(), p.b(), p.c()).expect("valid parameters are positive")
    }

    /// `κ = 1/2 + c/(1+c²) + b/(1+b²) + a/(1+a²)`.
    pub fn kappa(&self) -> f64 {
        -self.corner
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::from_diag(&self.diagonal);
        m[(0, 7)] = C64::new(self.corner, 0.0);
        m[(7, 0)] = C64::new(self.corner, 0.0);
        m
    }

    /// `tr W̄`, which is 4 for every parameter choice.
    pub fn trace(&self) -> f64 {
        self.diagonal.iter().sum()
    }

    /// `⟨e,f,g|W̄|e,f,g⟩` for `|e⟩ = cos θ_e|0⟩ + e^{iφ_e} sin θ_e|1⟩` etc.
    pub fn product_value(&self, angles: [f64; 3], phases: [f64; 3]) -> f64 {
        let [(se, ce), (sf, cf), (sg, cg)] = angles.map(f64::sin_cos);
        let amp = |x: usize| -> f64 {
            let pick = |bit: usize, c: f64, s: f64| if bit == 0 { c } else { s };
            pick((x >> 2) & 1, ce, se) * pick((x >> 1) & 1, cf, sf) * pick(x & 1, cg, sg)
        };
        let diag: f64 = (0..8).map(|x| self.diagonal[x] * amp(x).powi(2)).sum();
        let phase = (phases[0] + phases[1] + phases[2]).cos();
        diag + 2.0 * self.corner * phase * amp(0) * amp(7)
    }
}

/// `W̄` from the closed form.
pub fn wbar_explicit(p: &AblsParams) -> ComplexMatrix {
    WitnessCoefficients::new(p).matrix()
}

/// `⟨e,f,g|W̄|e,f,g⟩` for real product vectors (all phases zero).
pub fn epsilon_objective(p: &AblsParams, angles: [f64; 3]) -> f64 {
    WitnessCoefficients::new(p).product_value(angles, [0.0; 3])
}

/// The real product vector `|e⟩|f⟩|g⟩` with the given angles and phases.
pub fn product_state(angles: [f64; 3], phases: [f64; 3]) -> PureState {
    let local = |t: f64, ph: f64| {
        PureState::new(
            1,
            vec![C64::new(t.cos(), 0.0), C64::from_polar(t.sin(), ph)],
        )
        .expect("unit norm by construction")
    };
    local(angles[0], phases[0])
        .tensor(&local(angles[1], phases[1]))
        .tensor(&local(angles[2], phases[2]))
}

/// Maps angles to a representative in `[0, π)³` with at most one angle in
/// `(π/2, π)`. The objective has period `π` in each angle and is unchanged
/// when two angles are reflected `θ → π - θ` together.
pub fn canonical_angles(angles: [f64; 3]) -> [f64; 3] {
    let mut t = angles.map(|x| x.rem_euclid(PI));
    let mut pending: Option<usize> = None;
    for i in 0..3 {
        if t[i] > FRAC_PI_2 {
            match pending.take() {
                Some(j) => {
                    t[j] = PI - t[j];
                    t[i] = PI - t[i];
                }
                None => pending = Some(i),
            }
        }
    }
    t
}

/// Result of the `ε` minimization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonMinimum {
    pub epsilon: f64,
    pub angles: [f64; 3],
}

fn optimizer_starts() -> Vec<Vec<f64>> {
    let step = PI / LATTICE_PER_AXIS as f64;
    let mut starts = Vec::with_capacity(LATTICE_PER_AXIS.pow(3) + RANDOM_STARTS);
    for i in 0..LATTICE_PER_AXIS {
        for j in 0..LATTICE_PER_AXIS {
            for k in 0..LATTICE_PER_AXIS {
                starts.push([i, j, k].iter().map(|&n| (n as f64 + 0.5) * step).collect());
            }
        }
    }
    let mut rng = SplitMix64::new(START_SEED);
    for _ in 0..RANDOM_STARTS {
        starts.push((0..3).map(|_| rng.uniform(0.0, PI)).collect());
    }
    starts
}

/// `ε = inf ⟨e,f,g|W̄|e,f,g⟩` by multi-start Nelder-Mead over the three
/// angles, together with the eight computational-basis corners.
///
/// Starts run in parallel; the reduction (smallest value, then smallest
/// canonical angles) makes the result independent of scheduling.
pub fn epsilon_min(p: &AblsParams) -> EpsilonMinimum {
    let coeffs = WitnessCoefficients::new(p);
    let f = |x: &[f64]| coeffs.product_value([x[0], x[1], x[2]], [0.0; 3]);
    let nm = NelderMead::default();
    let canon = |m: Minimum| {
        let angles = canonical_angles([m.x[0], m.x[1], m.x[2]]);
        Minimum {
            value: f(&angles),
            x: angles.to_vec(),
            iterations: m.iterations,
        }
    };

    let mut candidates: Vec<Minimum> = optimizer_starts()
        .par_iter()
        .map(|s| canon(nm.minimize(f, s)))
        .collect();
    for corner in 0..8usize {
        let x: Vec<f64> = (0..3)
            .map(|q| {
                if (corner >> (2 - q)) & 1 == 1 {
                    FRAC_PI_2
                } else {
                    0.0
                }
            })
            .collect();
        candidates.push(canon(Minimum {
            value: f(&x),
            x,
            iterations: 0,
        }));
    }
    let best = candidates
        .into_iter()
        .min_by(compare_minima)
        .expect("non-empty candidate list");
    EpsilonMinimum {
        epsilon: best.value,
        angles: [best.x[0], best.x[1], best.x[2]],
    }
}

/// `W = W̄ - εI`.
pub fn witness_operator(p: &AblsParams, epsilon: f64) -> ComplexMatrix {
    let mut w = wbar_explicit(p);
    w.add_scaled_mut(&ComplexMatrix::identity(8), C64::new(-epsilon, 0.0));
    w
}

/// `tr(Wρ)` for any three-qubit state.
pub fn expectation(w: &ComplexMatrix, rho: &DensityMatrix) -> Result<f64> {
    if w.dim() != rho.dim() {
        return Err(Error::DimMismatch(w.dim(), rho.dim()));
    }
    Ok(w.trace_product(rho.matrix()).re)
}

/// `tr(Wρ)` on the matching ABLS state, with `ε` from [`epsilon_min`].
pub fn witness_value(p: &AblsParams) -> f64 {
    let eps = epsilon_min(p).epsilon;
    witness_value_with(p, eps)
}

/// `tr(Wρ)` on the matching ABLS state for a given `ε`.
pub fn witness_value_with(p: &AblsParams, epsilon: f64) -> f64 {
    expectation(&witness_operator(p, epsilon), &abls_direct(p)).expect("both are 8x8")
}

/// White-noise threshold `p* = 1 - 2ε`: `ρ_p = pρ + (1-p)I/8` is detected
/// for `p > p*`. Follows from `tr W̄ = 4` and `tr(W̄ρ) = 0`.
pub fn noise_threshold(epsilon: f64) -> f64 {
    1.0 - 2.0 * epsilon
}

/// Locates the sign change of `tr(Wρ_p)` in `p ∈ [0, 1]` by bisection on
/// explicitly mixed density matrices. Independent of the closed form in
/// [`noise_threshold`].
pub fn noise_threshold_bisection(p: &AblsParams, epsilon: f64, tol: f64) -> Result<f64> {
    let w = witness_operator(p, epsilon);
    let rho = abls_direct(p);
    let value = |mix: f64| -> Result<f64> { expectation(&w, &rho.with_white_noise(mix)?) };
    let (mut lo, mut hi) = (0.0, 1.0);
    if value(lo)? < 0.0 || value(hi)? >= 0.0 {
        return Err(Error::BadParams(
            "witness does not change sign on the white-noise line".into(),
        ));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if value(mid)? < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One measurement setting and the weights of its eight outcome projectors.
///
/// The operator it contributes is `Σ_o coefficients[o] Π_o`, where `Π_o` is
/// the product projector onto outcome `o` (bit 0 = `+1` eigenvalue).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingTerm {
    pub setting: MeasSetting,
    pub coefficients: [f64; 8],
}

impl SettingTerm {
    pub fn operator(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(8);
        for (o, &w) in self.coefficients.iter().enumerate() {
            if w != 0.0 {
                m.add_scaled_mut(&self.setting.projector(o), C64::new(w, 0.0));
            }
        }
        m
    }

    /// `Σ_o coefficients[o] · probabilities[o]`.
    pub fn contribution(&self, probabilities: &[f64; 8]) -> f64 {
        self.coefficients
            .iter()
            .zip(probabilities)
            .map(|(w, q)| w * q)
            .sum()
    }
}

fn parity_signs(scale: f64) -> [f64; 8] {
    std::array::from_fn(|o| {
        if (o as u32).count_ones() % 2 == 0 {
            scale
        } else {
            -scale
        }
    })
}

fn diagonal_term(coeffs: &WitnessCoefficients, epsilon: f64) -> SettingTerm {
    SettingTerm {
        setting: MeasSetting::uniform(Axis::Z),
        coefficients: coeffs.diagonal.map(|d| d - epsilon),
    }
}

/// The four-setting decomposition of `W`: `σ_z⊗³` carries the diagonal,
/// and the coherence uses
/// `|000⟩⟨111| + h.c. = ½σ_x⊗³ - (√2/4)M₊ - (√2/4)M₋` with
/// `M± = ((σ_x ± σ_y)/√2)⊗³`.
pub fn pauli_settings(p: &AblsParams, epsilon: f64) -> Vec<SettingTerm> {
    let coeffs = WitnessCoefficients::new(p);
    let kappa = coeffs.kappa();
    let rotated = std::f64::consts::SQRT_2 / 4.0 * kappa;
    vec![
        diagonal_term(&coeffs, epsilon),
        SettingTerm {
            setting: MeasSetting::uniform(Axis::X),
            coefficients: parity_signs(-0.5 * kappa),
        },
        SettingTerm {
            setting: MeasSetting::uniform(Axis::P),
            coefficients: parity_signs(rotated),
        },
        SettingTerm {
            setting: MeasSetting::uniform(Axis::M),
            coefficients: parity_signs(rotated),
        },
    ]
}

/// The alternative five-setting form
/// `|000⟩⟨111| + h.c. = ¼(σxσxσx - σxσyσy - σyσxσy - σyσyσx)`, whose settings
/// are all among the 27 tomography settings.
pub fn tomographic_settings(p: &AblsParams, epsilon: f64) -> Vec<SettingTerm> {
    let coeffs = WitnessCoefficients::new(p);
    let kappa = coeffs.kappa();
    let mut terms = vec![diagonal_term(&coeffs, epsilon)];
    for (axes, sign) in [
        ([Axis::X, Axis::X, Axis::X], -1.0),
        ([Axis::X, Axis::Y, Axis::Y], 1.0),
        ([Axis::Y, Axis::X, Axis::Y], 1.0),
        ([Axis::Y, Axis::Y, Axis::X], 1.0),
    ] {
        terms.push(SettingTerm {
            setting: MeasSetting::new(axes),
            coefficients: parity_signs(sign * 0.25 * kappa),
        });
    }
    terms
}

/// Sums the operators of a decomposition.
pub fn assemble(terms: &[SettingTerm]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(8);
    for t in terms {
        m.add_scaled_mut(&t.operator(), C64::new(1.0, 0.0));
    }
    m
}

/// The product `(n̂·σ)⊗³` observable of a uniform setting, for checking the
/// decomposition against explicit Pauli products.
pub fn setting_observable(axes: [Axis; 3]) -> ComplexMatrix {
    let obs: Vec<ComplexMatrix> = axes.iter().map(|a| a.observable()).collect();
    kron_all(&obs)
}

/// Summary of the witness construction at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub params: AblsParams,
    pub epsilon: f64,
    pub minimizer_angles: [f64; 3],
    pub witness_value: f64,
    pub noise_threshold: f64,
    pub n_settings: usize,
}

impl WitnessReport {
    pub fn compute(p: &AblsParams) -> Self {
        let min = epsilon_min(p);
        Self {
            params: *p,
            epsilon: min.epsilon,
            minimizer_angles: min.angles,
            witness_value: witness_value_with(p, min.epsilon),
            noise_threshold: noise_threshold(min.epsilon),
            n_settings: N_SETTINGS,
        }
    }
}

/// Which family of product vectors attains `ε` along `a = b = 1/c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// A computational-basis vector such as `|110⟩`, value `a²/(1+a²)`.
    Corner,
    /// Equal angles `θ_e = θ_f = θ_g`.
    Symmetric,
}

/// Minimum of the objective restricted to equal angles, over `[0, π/2]`.
pub fn symmetric_minimum(p: &AblsParams) -> (f64, f64) {
    let coeffs = WitnessCoefficients::new(p);
    let f = |t: f64| coeffs.product_value([t; 3], [0.0; 3]);
    const GRID: usize = 2000;
    let h = FRAC_PI_2 / GRID as f64;
    let best = (0..=GRID)
        .min_by(|&i, &j| f(i as f64 * h).total_cmp(&f(j as f64 * h)))
        .unwrap_or(0);
    let (mut lo, mut hi) = (
        (best as f64 - 1.0).max(0.0) * h,
        (best as f64 + 1.0).min(GRID as f64) * h,
    );
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-12 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if f(x1) <= f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let t = 0.5 * (lo + hi);
    (f(t), t)
}

/// One row of the `ε(a)` sweep along `a = b = 1/c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub a: f64,
    pub epsilon: f64,
    pub branch: Branch,
    pub theta_e: f64,
    pub theta_f: f64,
    pub theta_g: f64,
    pub p_star: f64,
}

pub fn sweep_point(a: f64) -> Result<SweepRow> {
    let p = AblsParams::symmetric(a)?;
    let min = epsilon_min(&p);
    let corner = a * a / (1.0 + a * a);
    let (sym, _) = symmetric_minimum(&p);
    Ok(SweepRow {
        a,
        epsilon: min.epsilon,
        branch: if corner <= sym {
            Branch::Corner
        } else {
            Branch::Symmetric
        },
        theta_e: min.angles[0],
        theta_f: min.angles[1],
        theta_g: min.angles[2],
        p_star: noise_threshold(min.epsilon),
    })
}

/// Points `start, start + step, ...` up to `stop` (inclusive within half a
/// step). Empty if the range is empty or the step is not positive.
pub fn sweep_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !start.is_finite() || !stop.is_finite() || step.is_nan() || step <= 0.0 || stop < start {
        return Vec::new();
    }
    let n = ((stop - start) / step + 0.5).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

/// Evaluates the sweep in parallel and returns rows sorted by `a`.
pub fn sweep(a_values: &[f64]) -> Result<Vec<SweepRow>> {
    let mut rows = a_values
        .par_iter()
        .map(|&a| sweep_point(a))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(rows)
}

/// First `a` at which the branch changes from corner to symmetric.
pub fn crossover(rows: &[SweepRow]) -> Option<f64> {
    rows.windows(2)
        .find(|w| w[0].branch == Branch::Corner && w[1].branch == Branch::Symmetric)
        .map(|w| w[1].a)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "a", "epsilon", "branch", "theta_e", "theta_f", "theta_g", "p_star",
    ])
    .map_err(|e| Error::Parse(e.to_string()))?;
    for r in rows {
        let branch = match r.branch {
            Branch::Corner => "corner",
            Branch::Symmetric => "symmetric",
        };
        w.write_record([
            format!("{:.6}", r.a),
            format!("{:.16e}", r.epsilon),
            branch.to_string(),
            format!("{:.16e}", r.theta_e),
            format!("{:.16e}", r.theta_f),
            format!("{:.16e}", r.theta_g),
            format!("{:.16e}", r.p_star),
        ])
        .map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}
