//! Simulated local measurements on three qubits: outcome probabilities,
//! seeded shot sampling, linear-inversion tomography from the 27 `xyz`
//! settings, and witness estimation from counts.
//!
//! Outcome `o` of a setting is a 3-bit index in the usual qubit order; bit
//! value 0 means the `+1` eigenvalue of that qubit's axis.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{eigvals_hermitian, kron_all, pauli, ComplexMatrix, DensityMatrix, C64, PSD_TOL};
use crate::rng::SplitMix64;
use crate::states::AblsParams;
use crate::witness::{pauli_settings, SettingTerm};

/// Number of free real parameters of a three-qubit state, `(2·2·2)² - 1`.
pub const FREE_PARAMETERS: usize = 63;

/// Local measurement direction in the `xy` plane or along `z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
    /// `(σ_x + σ_y)/√2`
    P,
    /// `(σ_x - σ_y)/√2`
    M,
}

impl Axis {
    pub const XYZ: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn label(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
            Axis::P => 'p',
            Axis::M => 'm',
        }
    }

    pub fn from_label(c: char) -> Result<Self> {
        Ok(match c {
            'x' => Axis::X,
            'y' => Axis::Y,
            'z' => Axis::Z,
            'p' => Axis::P,
            'm' => Axis::M,
            _ => return Err(Error::Parse(format!("unknown axis '{c}'"))),
        })
    }

    /// Eigenvector for outcome `bit` (0 is the `+1` eigenvalue).
    pub fn eigenvector(self, bit: usize) -> [C64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phase = match self {
            Axis::Z => {
                return if bit == 0 {
                    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
                } else {
                    [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
                }
            }
            Axis::X => 0.0,
            Axis::Y => std::f64::consts::FRAC_PI_2,
            Axis::P => std::f64::consts::FRAC_PI_4,
            Axis::M => -std::f64::consts::FRAC_PI_4,
        };
        let sign = if bit == 0 { 1.0 } else { -1.0 };
        [C64::new(h, 0.0), C64::from_polar(sign * h, phase)]
    }

    pub fn observable(self) -> ComplexMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Axis::X => pauli::x(),
            Axis::Y => pauli::y(),
            Axis::Z => pauli::z(),
            Axis::P => (&pauli::x() + &pauli::y()).scale_real(h),
            Axis::M => (&pauli::x() - &pauli::y()).scale_real(h),
        }
    }

    /// Rank-one projector for outcome `bit`.
    pub fn projector(self, bit: usize) -> ComplexMatrix {
        let v = self.eigenvector(bit);
        ComplexMatrix::outer(&v, &v)
    }

    fn pauli_index(self) -> Option<usize> {
        match self {
            Axis::X => Some(1),
            Axis::Y => Some(2),
            Axis::Z => Some(3),
            _ => None,
        }
    }
}

/// One axis per qubit. Serialized as a three-letter label such as `"xyz"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MeasSetting {
    pub axes: [Axis; 3],
}

impl MeasSetting {
    pub fn new(axes: [Axis; 3]) -> Self {
        Self { axes }
    }

    pub fn uniform(axis: Axis) -> Self {
        Self { axes: [axis; 3] }
    }

    /// The 27 settings `{x,y,z}³` in lexicographic order.
    pub fn tomography() -> Vec<MeasSetting> {
        let mut out = Vec::with_capacity(27);
        for a in Axis::XYZ {
            for b in Axis::XYZ {
                for c in Axis::XYZ {
                    out.push(MeasSetting::new([a, b, c]));
                }
            }
        }
        out
    }

    pub fn label(&self) -> String {
        self.axes.iter().map(|a| a.label()).collect()
    }

    pub fn observable(&self) -> ComplexMatrix {
        let obs: Vec<ComplexMatrix> = self.axes.iter().map(|a| a.observable()).collect();
        kron_all(&obs)
    }

    /// Product vector of outcome `o`.
    pub fn outcome_vector(&self, o: usize) -> Vec<C64> {
        let [e, f, g] = [0, 1, 2].map(|q| self.axes[q].eigenvector((o >> (2 - q)) & 1));
        let mut v = Vec::with_capacity(8);
        for x in e {
            for y in f {
                for z in g {
                    v.push(x * y * z);
                }
            }
        }
        v
    }

    pub fn projector(&self, o: usize) -> ComplexMatrix {
        let v = self.outcome_vector(o);
        ComplexMatrix::outer(&v, &v)
    }
}

impl fmt::Display for MeasSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for MeasSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 3 {
            return Err(Error::Parse(format!("setting '{s}' must have three axes")));
        }
        Ok(Self::new([
            Axis::from_label(chars[0])?,
            Axis::from_label(chars[1])?,
            Axis::from_label(chars[2])?,
        ]))
    }
}

impl TryFrom<String> for MeasSetting {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MeasSetting> for String {
    fn from(s: MeasSetting) -> String {
        s.label()
    }
}

/// Probabilities of the eight joint outcomes of `setting` on `rho`.
pub fn expectation(rho: &DensityMatrix, setting: &MeasSetting) -> Result<[f64; 8]> {
    if rho.n_qubits() != 3 {
        return Err(Error::DimMismatch(8, rho.dim()));
    }
    Ok(std::array::from_fn(|o| {
        let v = setting.outcome_vector(o);
        rho.matrix().sandwich(&v, &v).re
    }))
}

/// Counts recorded for one setting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotData {
    pub axes: MeasSetting,
    pub shots: u64,
    pub counts: [u64; 8],
    pub seed: u64,
}

impl ShotData {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::Parse(format!(
                "setting {}: shots must be positive",
                self.axes
            )));
        }
        let total: u64 = self.counts.iter().sum();
        if total != self.shots {
            return Err(Error::Parse(format!(
                "setting {}: counts sum to {total}, expected {}",
                self.axes, self.shots
            )));
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Frequencies {
        let n = self.shots as f64;
        Frequencies {
            setting: self.axes,
            probabilities: self.counts.map(|c| c as f64 / n),
        }
    }
}

/// Relative outcome frequencies of one setting; exact probabilities are the
/// infinite-shot case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frequencies {
    pub setting: MeasSetting,
    pub probabilities: [f64; 8],
}

impl Frequencies {
    pub fn exact(rho: &DensityMatrix, setting: MeasSetting) -> Result<Self> {
        Ok(Self {
            setting,
            probabilities: expectation(rho, &setting)?,
        })
    }
}

/// Draws `shots` outcomes independently from `probabilities`.
///
/// Each shot takes one uniform `u` from [`SplitMix64`] seeded with `seed`
/// and selects the first outcome whose cumulative probability exceeds `u`.
pub fn sample_probabilities(probabilities: &[f64; 8], shots: u64, seed: u64) -> [u64; 8] {
    let clipped = probabilities.map(|p| p.max(0.0));
    let total: f64 = clipped.iter().sum();
    let mut cumulative = [0.0; 8];
    let mut acc = 0.0;
    for (c, p) in cumulative.iter_mut().zip(clipped) {
        acc += p / total;
        *c = acc;
    }
    let mut rng = SplitMix64::new(seed);
    let mut counts = [0u64; 8];
    for _ in 0..shots {
        let u = rng.next_f64();
        let o = cumulative.iter().position(|&c| u < c).unwrap_or(7);
        counts[o] += 1;
    }
    counts
}

pub fn sample(
    rho: &DensityMatrix,
    setting: &MeasSetting,
    shots: u64,
    seed: u64,
) -> Result<ShotData> {
    if shots == 0 {
        return Err(Error::BadParams("shots must be at least 1".into()));
    }
    let probs = expectation(rho, setting)?;
    Ok(ShotData {
        axes: *setting,
        shots,
        counts: sample_probabilities(&probs, shots, seed),
        seed,
    })
}

/// Samples every setting, the `i`-th with seed `seed + i`.
pub fn sample_settings(
    rho: &DensityMatrix,
    settings: &[MeasSetting],
    shots: u64,
    seed: u64,
) -> Result<Vec<ShotData>> {
    settings
        .par_iter()
        .enumerate()
        .map(|(i, s)| sample(rho, s, shots, seed.wrapping_add(i as u64)))
        .collect()
}

/// Linear-inversion estimate and the Pauli moments behind it.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    /// Hermitian, unit trace; positive only if `projected`.
    pub matrix: ComplexMatrix,
    /// `λ_{ijk} = tr(ρ σ_i⊗σ_j⊗σ_k)` indexed `16i + 4j + k` with 0 = identity.
    pub moments: [f64; 64],
    pub min_eigenvalue_before_projection: f64,
    pub projected: bool,
}

impl Reconstruction {
    /// Number of moments estimated from data (all but `λ_000 = 1`).
    pub fn free_parameters(&self) -> usize {
        self.moments.len() - 1
    }

    /// The estimate as a state. Fails when it is not positive and was not
    /// projected.
    pub fn density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.matrix.clone())
    }
}

/// Pauli moments from frequencies of the `xyz` settings. `λ_{ijk}` with
/// identity slots is averaged over every setting that agrees on the
/// non-identity slots, so each setting contributes to eight moments.
pub fn pauli_moments(freqs: &[Frequencies]) -> Result<[f64; 64]> {
    let mut sums = [0.0; 64];
    let mut hits = [0usize; 64];
    for f in freqs {
        let Some(idx) = f
            .setting
            .axes
            .map(Axis::pauli_index)
            .into_iter()
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        for mask in 0..8usize {
            // mask bit set: that qubit keeps its Pauli, otherwise identity
            let keep = |q: usize| (mask >> (2 - q)) & 1 == 1;
            let slot: usize = (0..3)
                .map(|q| if keep(q) { idx[q] } else { 0 } << (2 * (2 - q)))
                .sum();
            let moment: f64 = (0..8)
                .map(|o| {
                    let parity = (0..3)
                        .filter(|&q| keep(q) && (o >> (2 - q)) & 1 == 1)
                        .count();
                    let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
                    sign * f.probabilities[o]
                })
                .sum();
            sums[slot] += moment;
            hits[slot] += 1;
        }
    }
    for setting in MeasSetting::tomography() {
        let idx = setting.axes.map(|a| a.pauli_index().unwrap_or(0));
        let slot = 16 * idx[0] + 4 * idx[1] + idx[2];
        if hits[slot] == 0 {
            return Err(Error::MissingSetting(setting.label()));
        }
    }
    let mut moments = [0.0; 64];
    for k in 0..64 {
        moments[k] = sums[k] / hits[k] as f64;
    }
    moments[0] = 1.0;
    Ok(moments)
}

/// `ρ = (1/8) Σ λ_{ijk} σ_i⊗σ_j⊗σ_k`, optionally followed by clipping
/// negative eigenvalues and renormalizing.
pub fn reconstruct_frequencies(freqs: &[Frequencies], project: bool) -> Result<Reconstruction> {
    let moments = pauli_moments(freqs)?;
    let mut m = ComplexMatrix::zeros(8);
    for (k, &lambda) in moments.iter().enumerate() {
        if lambda == 0.0 {
            continue;
        }
        let term = kron_all(&[
            pauli::by_index(k / 16),
            pauli::by_index((k / 4) % 4),
            pauli::by_index(k % 4),
        ]);
        m.add_scaled_mut(&term, C64::new(lambda / 8.0, 0.0));
    }
    let m = m.hermitian_part();
    let spec = crate::qmat::eig_hermitian(&m)?;
    let min_before = spec.min();
    let matrix = if project && min_before < -PSD_TOL {
        let clipped: Vec<f64> = spec.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let vecs = spec
            .eigenvectors
            .as_ref()
            .expect("eig_hermitian keeps vectors");
        let mut out = ComplexMatrix::zeros(8);
        for (j, &l) in clipped.iter().enumerate() {
            if l > 0.0 {
                let v = vecs.column(j);
                out.add_scaled_mut(&ComplexMatrix::outer(&v, &v), C64::new(l / total, 0.0));
            }
        }
        out.hermitian_part()
    } else {
        m
    };
    Ok(Reconstruction {
        matrix,
        moments,
        min_eigenvalue_before_projection: min_before,
        projected: project && min_before < -PSD_TOL,
    })
}

/// Linear inversion from recorded counts of all 27 `xyz` settings.
pub fn reconstruct(data: &[ShotData], project: bool) -> Result<Reconstruction> {
    for d in data {
        d.validate()?;
    }
    let freqs: Vec<Frequencies> = data.iter().map(ShotData::frequencies).collect();
    reconstruct_frequencies(&freqs, project)
}

/// `Σ` over terms of coefficient-weighted frequencies. Every term's setting
/// must be present.
pub fn estimate_from_frequencies(terms: &[SettingTerm], freqs: &[Frequencies]) -> Result<f64> {
    terms
        .iter()
        .map(|t| {
            let f = freqs
                .iter()
                .find(|f| f.setting == t.setting)
                .ok_or_else(|| Error::MissingSetting(t.setting.label()))?;
            Ok(t.contribution(&f.probabilities))
        })
        .sum()
}

/// Estimate of `tr(Wρ)` from the four witness settings.
pub fn witness_from_counts(data: &[ShotData], p: &AblsParams, epsilon: f64) -> Result<f64> {
    for d in data {
        d.validate()?;
    }
    let freqs: Vec<Frequencies> = data.iter().map(ShotData::frequencies).collect();
    estimate_from_frequencies(&pauli_settings(p, epsilon), &freqs)
}

/// Smallest partial-transpose eigenvalue over the three cuts.
pub fn min_pt_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    let mut min = f64::INFINITY;
    for cut in 0..3 {
        let ev = eigvals_hermitian(&m.partial_transpose(cut)?)?;
        min = min.min(ev.iter().copied().fold(f64::INFINITY, f64::min));
    }
    Ok(min)
}

/// Percentile bootstrap interval for a statistic of the reconstruction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapInterval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub resamples: usize,
}

/// Resamples every setting's counts from its empirical frequencies and
/// reports the 2.5% and 97.5% percentiles of the minimum partial-transpose
/// eigenvalue of the unprojected reconstruction.
pub fn bootstrap_min_pt(
    data: &[ShotData],
    resamples: usize,
    seed: u64,
) -> Result<BootstrapInterval> {
    let estimate = min_pt_eigenvalue(&reconstruct(data, false)?.matrix)?;
    let mut values = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let resampled: Vec<ShotData> = data
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let s = seed.wrapping_add((r as u64) << 32).wrapping_add(i as u64);
                    ShotData {
                        counts: sample_probabilities(&d.frequencies().probabilities, d.shots, s),
                        seed: s,
                        ..d.clone()
                    }
                })
                .collect();
            min_pt_eigenvalue(&reconstruct(&resampled, false)?.matrix)
        })
        .collect::<Result<Vec<f64>>>()?;
    values.sort_by(f64::total_cmp);
    let pick = |q: f64| {
        if values.is_empty() {
            estimate
        } else {
            values[((values.len() - 1) as f64 * q).round() as usize]
        }
    };
    Ok(BootstrapInterval {
        estimate,
        lower: pick(0.025),
        upper: pick(0.975),
        resamples,
    })
}

/// Parses JSON lines, one [`ShotData`] per non-empty line.
pub fn parse_shot_lines(text: &str) -> Result<Vec<ShotData>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            let d: ShotData = serde_json::from_str(l)
                .map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
            d.validate()?;
            Ok(d)
        })
        .collect()
}

pub fn to_shot_lines(data: &[ShotData]) -> String {
    let mut out = String::new();
    for d in data {
        out.push_str(&serde_json::to_string(d).expect("ShotData serializes"));
        out.push('\n');
    }
    out
}
