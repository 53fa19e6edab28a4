//! End-to-end certification: PT spectra, witness, SPA, power traces and
//! spectrum recovery for one state, with every internal cross-check
//! recorded next to the verdict.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::SCHEMA_VERSION;
use crate::pptlab::{
    dct_sk_classify, matrix_power_traces, probs_from_traces, shift_operator_check, signed_sum,
    spa_affine_matrix, spa_kraus_matrix, spa_recover_pt_matrix, spectrum_from_traces, Cut,
    PTReport, PowerTraces, ShiftDirection, SkBits, SPA_WEIGHTS, SPECTRUM_TRACES,
};
use crate::qmat::{eigvals_hermitian, max_norm_distance, ComplexMatrix, DensityMatrix, Spectrum};
use crate::states::{abls_direct, abls_network, dct_direct, dct_network, AblsParams, DctParams};
use crate::tomo::{
    bootstrap_min_pt, estimate_from_frequencies, reconstruct, BootstrapInterval, Frequencies,
    ShotData,
};
use crate::witness::{
    assemble, expectation, noise_threshold_bisection, pauli_settings, tomographic_settings,
    wbar_explicit, wbar_generic, witness_operator, WitnessReport,
};

/// A parameterized state family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Abls(AblsParams),
    Dct(DctParams),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Abls(_) => "abls",
            Family::Dct(_) => "dct",
        }
    }

    pub fn direct(&self) -> DensityMatrix {
        match self {
            Family::Abls(p) => abls_direct(p),
            Family::Dct(p) => dct_direct(p),
        }
    }

    pub fn network(&self) -> Result<DensityMatrix> {
        match self {
            Family::Abls(p) => abls_network(p),
            Family::Dct(p) => dct_network(p),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// Entangled, yet no pair of parties can distill a singlet.
    BoundEntangled,
    /// A partial transpose is negative and the bound-entanglement pattern
    /// does not hold.
    Npt,
    /// Nothing detected; this is not a proof of separability.
    SeparableUnknown,
}

/// One internal consistency check: `value ≤ tolerance` passes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaReport {
    pub cut: Cut,
    pub min_eigenvalue: f64,
    /// Smallest eigenvalue of `ρ^{T_X}` read back from the SPA output.
    pub recovered_pt_min_eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionSummary {
    pub settings: usize,
    pub min_eigenvalue_before_projection: f64,
    pub projected: bool,
    pub min_pt_bootstrap: Option<BootstrapInterval>,
    /// Which decomposition produced `witness_estimate`.
    pub witness_settings: Vec<String>,
    pub witness_estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub schema: u32,
    pub state_family: String,
    pub params: Option<Family>,
    pub witness: Option<WitnessReport>,
    pub pt: Vec<PTReport>,
    pub spa: Vec<SpaReport>,
    pub power_traces: PowerTraces,
    pub spectrum_from_traces: Option<Spectrum>,
    pub spectrum_note: Option<String>,
    pub sk: Option<SkBits>,
    pub reconstruction: Option<ReconstructionSummary>,
    pub checks: Vec<CheckResult>,
    pub verdict: Verdict,
}

impl CertReport {
    pub fn checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn npt_cuts(&self) -> Vec<Cut> {
        self.pt
            .iter()
            .filter(|r| !r.is_ppt)
            .map(|r| r.cut)
            .collect()
    }
}

/// Measurements shared by every input: PT spectra, SPA per cut, power
/// traces and spectrum recovery, with their cross-checks.
struct StateAnalysis {
    pt: Vec<PTReport>,
    spa: Vec<SpaReport>,
    power_traces: PowerTraces,
    spectrum: Option<Spectrum>,
    spectrum_note: Option<String>,
}

fn analyze(
    m: &ComplexMatrix,
    is_state: bool,
    checks: &mut Vec<CheckResult>,
) -> Result<StateAnalysis> {
    let mut pt = Vec::with_capacity(3);
    let mut spa = Vec::with_capacity(3);
    for cut in Cut::ALL {
        let transposed = m.partial_transpose(cut.qubit())?;
        let report = PTReport::from_matrix(cut, &transposed)?;

        let affine = spa_affine_matrix(m, cut)?;
        let kraus = spa_kraus_matrix(m, cut, SPA_WEIGHTS)?;
        checks.push(CheckResult::new(
            format!("spa_kraus_vs_affine_{cut}"),
            max_norm_distance(&affine, &kraus)?,
            1e-10,
        ));
        let recovered = spa_recover_pt_matrix(&affine, cut)?;
        checks.push(CheckResult::new(
            format!("spa_recovered_pt_{cut}"),
            max_norm_distance(&recovered, &transposed)?,
            1e-9,
        ));
        let min_of = |x: &ComplexMatrix| -> Result<f64> {
            Ok(eigvals_hermitian(x)?.last().copied().unwrap_or(f64::NAN))
        };
        spa.push(SpaReport {
            cut,
            min_eigenvalue: min_of(&affine)?,
            recovered_pt_min_eigenvalue: min_of(&recovered)?,
        });
        pt.push(report);
    }

    let power_traces = PowerTraces {
        values: matrix_power_traces(m, SPECTRUM_TRACES),
    };

    // multi-copy identities need a density matrix; structure is enough
    let rho = DensityMatrix::new_psd_by_construction(m.clone())?;
    use ShiftDirection::{Forward as F, Reverse as R};
    let forward = shift_operator_check(&rho, 2, [F; 3])?;
    checks.push(CheckResult::new(
        "shift_k2_forward",
        (forward - power_traces.values[1]).abs(),
        1e-10,
    ));
    for (cut, dirs) in Cut::ALL.iter().zip([[R, F, F], [F, R, F], [F, F, R]]) {
        let shifted = shift_operator_check(&rho, 2, dirs)?;
        let direct = matrix_power_traces(&m.partial_transpose(cut.qubit())?, 2)[1];
        checks.push(CheckResult::new(
            format!("shift_k2_reverse_{cut}"),
            (shifted - direct).abs(),
            1e-10,
        ));
    }
    if is_state {
        let probs = probs_from_traces(&rho, 2)?;
        checks.push(CheckResult::new(
            "probs_signed_sum_k2",
            (signed_sum(&probs) - power_traces.values[1]).abs(),
            1e-12,
        ));
    }

    let (spectrum, spectrum_note) = match spectrum_from_traces(&power_traces) {
        Ok(s) => {
            let direct = eigvals_hermitian(m)?;
            let err = s
                .eigenvalues
                .iter()
                .zip(&direct)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            checks.push(CheckResult::new("spectrum_from_traces", err, 1e-6));
            (Some(s), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };

    Ok(StateAnalysis {
        pt,
        spa,
        power_traces,
        spectrum,
        spectrum_note,
    })
}

fn witness_checks(
    p: &AblsParams,
    report: &WitnessReport,
    rho: &DensityMatrix,
    checks: &mut Vec<CheckResult>,
) -> Result<()> {
    let wbar = wbar_explicit(p);
    checks.push(CheckResult::new(
        "wbar_on_state",
        expectation(&wbar, rho)?.abs(),
        1e-10,
    ));
    checks.push(CheckResult::new(
        "wbar_generic_vs_explicit",
        max_norm_distance(&wbar_generic(rho)?, &wbar)?,
        1e-9,
    ));
    let w = witness_operator(p, report.epsilon);
    checks.push(CheckResult::new(
        "witness_four_settings",
        max_norm_distance(&assemble(&pauli_settings(p, report.epsilon)), &w)?,
        1e-12,
    ));
    checks.push(CheckResult::new(
        "witness_tomographic_settings",
        max_norm_distance(&assemble(&tomographic_settings(p, report.epsilon)), &w)?,
        1e-12,
    ));
    let bisected = noise_threshold_bisection(p, report.epsilon, 1e-10)?;
    checks.push(CheckResult::new(
        "noise_threshold_bisection",
        (bisected - report.noise_threshold).abs(),
        1e-6,
    ));
    Ok(())
}

fn witness_rule(pt: &[PTReport], witness_value: f64) -> Verdict {
    if pt.iter().any(|r| !r.is_ppt) {
        Verdict::Npt
    } else if witness_value < 0.0 {
        Verdict::BoundEntangled
    } else {
        Verdict::SeparableUnknown
    }
}

/// A singlet can be distilled between two parties exactly when both of
/// their partial transposes are negative, so a single negative cut means
/// bound entanglement.
fn dct_rule(pt: &[PTReport]) -> Verdict {
    match pt.iter().filter(|r| !r.is_ppt).count() {
        0 => Verdict::SeparableUnknown,
        1 => Verdict::BoundEntangled,
        _ => Verdict::Npt,
    }
}

/// Certifies the direct construction of a family member, cross-checked
/// against its network.
pub fn certify_family(family: &Family) -> Result<CertReport> {
    let rho = family.direct();
    let mut checks = vec![CheckResult::new(
        "network_vs_direct",
        max_norm_distance(family.network()?.matrix(), rho.matrix())?,
        1e-10,
    )];
    let analysis = analyze(rho.matrix(), true, &mut checks)?;

    let (witness, sk, verdict) = match family {
        Family::Abls(p) => {
            let report = WitnessReport::compute(p);
            witness_checks(p, &report, &rho, &mut checks)?;
            let verdict = witness_rule(&analysis.pt, report.witness_value);
            (Some(report), None, verdict)
        }
        Family::Dct(p) => {
            let sk = dct_sk_classify(p);
            let disagreements = analysis
                .pt
                .iter()
                .filter(|r| sk.predicts_npt(r.cut) == r.is_ppt)
                .count();
            checks.push(CheckResult::new("sk_vs_spectra", disagreements as f64, 0.0));
            (None, Some(sk), dct_rule(&analysis.pt))
        }
    };

    Ok(CertReport {
        schema: SCHEMA_VERSION,
        state_family: family.name().into(),
        params: Some(*family),
        witness,
        pt: analysis.pt,
        spa: analysis.spa,
        power_traces: analysis.power_traces,
        spectrum_from_traces: analysis.spectrum,
        spectrum_note: analysis.spectrum_note,
        sk,
        reconstruction: None,
        checks,
        verdict,
    })
}

/// Options for [`certify_counts`].
#[derive(Clone, Debug)]
pub struct CountsOptions {
    /// Parameters defining the witness to evaluate.
    pub witness_params: AblsParams,
    pub project: bool,
    /// `(resamples, seed)` for the bootstrap interval of the minimum PT
    /// eigenvalue.
    pub bootstrap: Option<(usize, u64)>,
}

/// Certifies a state known only through measurement counts. The 27 `xyz`
/// settings are required for reconstruction; the witness is estimated from
/// the four witness settings when present and from the tomographic
/// decomposition otherwise.
pub fn certify_counts(data: &[ShotData], opts: &CountsOptions) -> Result<CertReport> {
    let rec = reconstruct(data, opts.project)?;
    let mut checks = Vec::new();
    let analysis = analyze(
        &rec.matrix,
        rec.projected || rec.min_eigenvalue_before_projection >= -crate::qmat::PSD_TOL,
        &mut checks,
    )?;

    let p = opts.witness_params;
    let report = WitnessReport::compute(&p);
    let freqs: Vec<Frequencies> = data.iter().map(ShotData::frequencies).collect();
    let four = pauli_settings(&p, report.epsilon);
    let (terms, estimate) = match estimate_from_frequencies(&four, &freqs) {
        Ok(v) => (four, v),
        Err(_) => {
            let five = tomographic_settings(&p, report.epsilon);
            let v = estimate_from_frequencies(&five, &freqs)?;
            (five, v)
        }
    };
    let bootstrap = match opts.bootstrap {
        Some((n, seed)) => Some(bootstrap_min_pt(data, n, seed)?),
        None => None,
    };
    let verdict = witness_rule(&analysis.pt, estimate);

    Ok(CertReport {
        schema: SCHEMA_VERSION,
        state_family: "counts".into(),
        params: None,
        witness: Some(report),
        pt: analysis.pt,
        spa: analysis.spa,
        power_traces: analysis.power_traces,
        spectrum_from_traces: analysis.spectrum,
        spectrum_note: analysis.spectrum_note,
        sk: None,
        reconstruction: Some(ReconstructionSummary {
            settings: data.len(),
            min_eigenvalue_before_projection: rec.min_eigenvalue_before_projection,
            projected: rec.projected,
            min_pt_bootstrap: bootstrap,
            witness_settings: terms.iter().map(|t| t.setting.label()).collect(),
            witness_estimate: estimate,
        }),
        checks,
        verdict,
    })
}
