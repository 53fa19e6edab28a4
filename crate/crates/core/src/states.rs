//! The two three-qubit state families and the six-qubit networks that
//! purify them.
//!
//! Each family is built twice: by assembling the density matrix directly,
//! and by running its purification network from `|000000⟩` and tracing out
//! the three ancillas (qubits 3, 4, 5). The two routes are independent and
//! must agree to `1e-10`.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Control, Gate};
use crate::error::{Error, Result};
use crate::qmat::{kron, pauli, ComplexMatrix, DensityMatrix, PureState, C64};

/// Minimum separation `|ab - c|` accepted for the ABLS family.
pub const ABLS_DEGENERACY_TOL: f64 = 1e-9;
/// Tolerance on the DCT normalization condition.
pub const DCT_NORMALIZATION_TOL: f64 = 1e-12;
/// Smallest `γ = √(λ0⁺ + λ0⁻)` for which the DCT network is built.
pub const DCT_MIN_GAMMA: f64 = 1e-9;

const SYSTEM: [usize; 3] = [0, 1, 2];

/// Parameters `a, b, c > 0` with `ab ≠ c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAbls")]
pub struct AblsParams {
    a: f64,
    b: f64,
    c: f64,
}

#[derive(Deserialize)]
struct RawAbls {
    a: f64,
    b: f64,
    c: f64,
}

impl TryFrom<RawAbls> for AblsParams {
    type Error = Error;

    fn try_from(r: RawAbls) -> Result<Self> {
        Self::new(r.a, r.b, r.c)
    }
}

impl AblsParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::BadParams(format!("{name} = {v} violates a,b,c > 0")));
            }
        }
        if (a * b - c).abs() <= ABLS_DEGENERACY_TOL {
            return Err(Error::BadParams(format!(
                "ab≠c violated: ab = {}, c = {c}",
                a * b
            )));
        }
        Ok(Self { a, b, c })
    }

    /// The symmetric line `a = b = 1/c`.
    pub fn symmetric(a: f64) -> Result<Self> {
        Self::new(a, a, 1.0 / a)
    }

    /// `a = b = 0.3460, c = 1/0.3460`, where the witness tolerates the most
    /// white noise along the symmetric line.
    pub fn optimal() -> Self {
        Self::symmetric(0.3460).expect("optimal preset is valid")
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `N = 2 + a + b + c + 1/a + 1/b + 1/c`
    pub fn normalization(&self) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        2.0 + a + b + c + 1.0 / a + 1.0 / b + 1.0 / c
    }

    pub fn gate_constants(&self) -> AblsGateConstants {
        let (a, b, c) = (self.a, self.b, self.c);
        let n1 = (b / (1.0 + b)).sqrt();
        let n2 = 1.0 / (1.0 + b).sqrt();
        let n3 = (c / (1.0 + a * c)).sqrt();
        let n4 = (a / (a + c)).sqrt();
        // α N1 N2 = β N3 N4 and α² + β² = 1, positive root
        let ratio = n1 * n2 / (n3 * n4);
        let alpha = 1.0 / (1.0 + ratio * ratio).sqrt();
        let beta = alpha * ratio;
        AblsGateConstants {
            n1,
            n2,
            n3,
            n4,
            alpha,
            beta,
        }
    }
}

/// Normalization constants of the ABLS preparation gates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AblsGateConstants {
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub n4: f64,
    pub alpha: f64,
    pub beta: f64,
}

fn real2(m00: f64, m01: f64, m10: f64, m11: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_rows([[m00, m01], [m10, m11]])
}

/// Direct assembly of
/// `(2|GHZ⟩⟨GHZ| + a|001⟩⟨001| + b|010⟩⟨010| + c|011⟩⟨011|
///   + 1/c|100⟩⟨100| + 1/b|101⟩⟨101| + 1/a|110⟩⟨110|) / N`.
pub fn abls_direct(p: &AblsParams) -> DensityMatrix {
    let (a, b, c) = (p.a, p.b, p.c);
    let n = p.normalization();
    let diag = [1.0, a, b, c, 1.0 / c, 1.0 / b, 1.0 / a, 1.0];
    let mut m = ComplexMatrix::from_diag(&diag.map(|d| d / n));
    m[(0, 7)] = C64::new(1.0 / n, 0.0);
    m[(7, 0)] = C64::new(1.0 / n, 0.0);
    DensityMatrix::new(m).expect("ABLS matrix is a valid state for valid parameters")
}

/// The three-qubit pure state produced by the preparation stage,
/// `(|000⟩ + √a|001⟩ + √b|010⟩ + √c|011⟩ + |100⟩/√c + |101⟩/√b + |110⟩/√a + |111⟩)/√N`.
pub fn abls_prepared_state(p: &AblsParams) -> PureState {
    let (a, b, c) = (p.a, p.b, p.c);
    let amps = [
        1.0,
        a.sqrt(),
        b.sqrt(),
        c.sqrt(),
        1.0 / c.sqrt(),
        1.0 / b.sqrt(),
        1.0 / a.sqrt(),
        1.0,
    ];
    let s = 1.0 / p.normalization().sqrt();
    PureState::new(3, amps.iter().map(|&x| C64::new(x * s, 0.0)).collect())
        .expect("prepared ABLS state is normalized")
}

/// Preparation stage on qubits 0..3 of an `n_qubits` register:
/// `LU`, `CU(3,1)`, `CU(3,2)`, `CNOT(1,3)` (1-based labels).
pub fn abls_preparation_circuit(p: &AblsParams, n_qubits: usize) -> Result<Circuit> {
    let (a, b, c) = (p.a, p.b, p.c);
    let k = p.gate_constants();

    let lu1 = real2(1.0, 1.0 / b.sqrt(), 1.0 / b.sqrt(), -1.0).scale_real(k.n1);
    let lu2 = real2(1.0, b.sqrt(), b.sqrt(), -1.0).scale_real(k.n2);
    // column 0 of the third factor fixes the post-LU product (α|0⟩ + β|1⟩)
    let lu3 = real2(k.alpha, k.beta, k.beta, -k.alpha);
    let lu = kron(&kron(&lu1, &lu2), &lu3);

    let x31 = a.sqrt() - (1.0 / (b * c)).sqrt();
    let y31 = (a / b).sqrt() + (1.0 / c).sqrt();
    let cu31 = real2(x31, y31, y31, -x31).scale_real(k.n1 * k.n3);

    let x32 = 1.0 - (b * c / a).sqrt();
    let y32 = b.sqrt() + (c / a).sqrt();
    let cu32 = real2(x32, y32, y32, -x32).scale_real(k.n2 * k.n4);

    let mut circ = Circuit::new(n_qubits)?;
    circ.push(Gate::new("LU", lu, SYSTEM.to_vec(), vec![])?)?;
    circ.push(Gate::new("CU31", cu31, vec![0], vec![Control::on_one(2)])?)?;
    circ.push(Gate::new("CU32", cu32, vec![1], vec![Control::on_one(2)])?)?;
    circ.push(Gate::cnot(0, 2)?)?;
    Ok(circ)
}

/// Purification stage on the six-qubit register: copy CNOTs onto the
/// ancillas, `CNOT(4,5)`, `CNOT(4,6)` and the three-control Toffoli onto
/// ancilla 4 (1-based labels). `toffoli_phases` selects the
/// generalized Toffoli variant. The system branches `|000⟩` and `|111⟩`
/// end with the same ancilla state, so the traced-out state is unchanged
/// only when `θ(000) = θ(111)`; otherwise the GHZ coherence picks up
/// `e^{i(θ(000) - θ(111))}`.
pub fn abls_purification_circuit(toffoli_phases: Option<Vec<f64>>) -> Result<Circuit> {
    let mut circ = Circuit::new(6)?;
    for q in SYSTEM {
        circ.push(Gate::cnot(q, q + 3)?)?;
    }
    circ.push(Gate::cnot(3, 4)?)?;
    circ.push(Gate::cnot(3, 5)?)?;
    let mut toffoli = Gate::toffoli3([0, 1, 2], 3)?;
    if let Some(phases) = toffoli_phases {
        toffoli = toffoli.with_control_phases(phases)?;
    }
    circ.push(toffoli)?;
    Ok(circ)
}

/// The complete six-qubit ABLS network.
pub fn abls_network_circuit(p: &AblsParams, toffoli_phases: Option<Vec<f64>>) -> Result<Circuit> {
    let mut circ = abls_preparation_circuit(p, 6)?;
    circ.extend(&abls_purification_circuit(toffoli_phases)?)?;
    Ok(circ)
}

/// Six-qubit output of the ABLS network.
pub fn abls_purification(p: &AblsParams) -> Result<PureState> {
    abls_network_circuit(p, None)?.run(&PureState::basis(6, 0))
}

/// ABLS state obtained by simulating the network and discarding the
/// ancillas.
pub fn abls_network(p: &AblsParams) -> Result<DensityMatrix> {
    let psi = abls_purification(p)?;
    psi.to_density().partial_trace(&SYSTEM)
}

/// Eigenvalue weights of the DCT family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDct")]
pub struct DctParams {
    lambda0_plus: f64,
    lambda0_minus: f64,
    lambda01: f64,
    lambda10: f64,
    lambda11: f64,
}

#[derive(Deserialize)]
struct RawDct {
    lambda0_plus: f64,
    lambda0_minus: f64,
    lambda01: f64,
    lambda10: f64,
    lambda11: f64,
}

impl TryFrom<RawDct> for DctParams {
    type Error = Error;

    fn try_from(r: RawDct) -> Result<Self> {
        Self::new(
            r.lambda0_plus,
            r.lambda0_minus,
            r.lambda01,
            r.lambda10,
            r.lambda11,
        )
    }
}

impl DctParams {
    pub fn new(
        lambda0_plus: f64,
        lambda0_minus: f64,
        lambda01: f64,
        lambda10: f64,
        lambda11: f64,
    ) -> Result<Self> {
        let named = [
            ("lambda0_plus", lambda0_plus),
            ("lambda0_minus", lambda0_minus),
            ("lambda01", lambda01),
            ("lambda10", lambda10),
            ("lambda11", lambda11),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::BadParams(format!(
                    "{name} = {v} must be non-negative"
                )));
            }
        }
        let total = lambda0_plus + lambda0_minus + 2.0 * (lambda01 + lambda10 + lambda11);
        if (total - 1.0).abs() > DCT_NORMALIZATION_TOL {
            return Err(Error::BadParams(format!(
                "normalization λ0⁺ + λ0⁻ + 2(λ01 + λ10 + λ11) = {total} ≠ 1"
            )));
        }
        if lambda0_plus < lambda0_minus {
            return Err(Error::BadParams(format!(
                "Δ = λ0⁺ - λ0⁻ = {} must be non-negative",
                lambda0_plus - lambda0_minus
            )));
        }
        Ok(Self {
            lambda0_plus,
            lambda0_minus,
            lambda01,
            lambda10,
            lambda11,
        })
    }

    /// `λ0⁺ = 1/3, λ0⁻ = λ10 = 0, λ01 = λ11 = 1/6`: NPT only across A|BC.
    pub fn eq24() -> Self {
        Self::new(1.0 / 3.0, 0.0, 1.0 / 6.0, 0.0, 1.0 / 6.0).expect("preset is valid")
    }

    pub fn lambda0_plus(&self) -> f64 {
        self.lambda0_plus
    }

    pub fn lambda0_minus(&self) -> f64 {
        self.lambda0_minus
    }

    pub fn lambda01(&self) -> f64 {
        self.lambda01
    }

    pub fn lambda10(&self) -> f64 {
        self.lambda10
    }

    pub fn lambda11(&self) -> f64 {
        self.lambda11
    }

    /// `Δ = λ0⁺ - λ0⁻`
    pub fn delta(&self) -> f64 {
        self.lambda0_plus - self.lambda0_minus
    }

    /// `γ = √(λ0⁺ + λ0⁻)`
    pub fn gamma(&self) -> f64 {
        (self.lambda0_plus + self.lambda0_minus).sqrt()
    }
}

/// Direct assembly: diagonal `(g, λ11, λ01, λ10, λ10, λ01, λ11, g)` with
/// `g = (λ0⁺ + λ0⁻)/2` and corner coherences `Δ/2`.
pub fn dct_direct(p: &DctParams) -> DensityMatrix {
    let g = 0.5 * (p.lambda0_plus + p.lambda0_minus);
    let diag = [
        g, p.lambda11, p.lambda01, p.lambda10, p.lambda10, p.lambda01, p.lambda11, g,
    ];
    let mut m = ComplexMatrix::from_diag(&diag);
    let corner = C64::new(0.5 * p.delta(), 0.0);
    m[(0, 7)] = corner;
    m[(7, 0)] = corner;
    DensityMatrix::new(m).expect("DCT matrix is a valid state for valid parameters")
}

/// GHZ-basis vector `|Ψ_k^±⟩ = (|k1 k2 0⟩ ± |k̄1 k̄2 1⟩)/√2` for `k ∈ 0..4`.
pub fn dct_basis_vector(k: usize, plus: bool) -> PureState {
    assert!(k < 4, "k must be a two-bit label");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![C64::new(0.0, 0.0); 8];
    let first = k << 1;
    let second = ((!k & 0b11) << 1) | 1;
    amps[first] = C64::new(h, 0.0);
    amps[second] = C64::new(if plus { h } else { -h }, 0.0);
    PureState::new(3, amps).expect("normalized")
}

/// Three-qubit state reached before the ancillas are touched:
/// `γ/√2(|000⟩+|100⟩) + √λ01(|010⟩+|110⟩) + √λ10(|011⟩+|111⟩) + √λ11(|001⟩+|101⟩)`.
pub fn dct_prepared_state(p: &DctParams) -> PureState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let g = p.gamma() * h;
    let (l01, l10, l11) = (p.lambda01.sqrt(), p.lambda10.sqrt(), p.lambda11.sqrt());
    let amps = [g, l11, l01, l10, g, l11, l01, l10];
    PureState::new(3, amps.iter().map(|&x| C64::new(x, 0.0)).collect())
        .expect("prepared DCT state is normalized")
}

/// Real Schmidt decomposition `C = α₊ v₊ u₊ᵀ + α₋ v₋ u₋ᵀ` of the two-qubit
/// amplitude matrix `C = [[γ, √(2λ11)], [√(2λ01), √(2λ10)]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DctSchmidt {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub u_plus: [f64; 2],
    pub u_minus: [f64; 2],
    pub v_plus: [f64; 2],
    pub v_minus: [f64; 2],
}

impl DctSchmidt {
    pub fn amplitude_matrix(p: &DctParams) -> [[f64; 2]; 2] {
        [
            [p.gamma(), (2.0 * p.lambda11).sqrt()],
            [(2.0 * p.lambda01).sqrt(), (2.0 * p.lambda10).sqrt()],
        ]
    }

    /// `α±² = ½(1 ± √(1 - 4 det CᵀC))`, the closed form for a unit-trace
    /// `CᵀC`.
    pub fn coefficients_squared(p: &DctParams) -> (f64, f64) {
        let (g, l01, l10, l11) = (p.gamma(), p.lambda01, p.lambda10, p.lambda11);
        let det = (g * g + 2.0 * l01) * (2.0 * l10 + 2.0 * l11)
            - (g * (2.0 * l11).sqrt() + 2.0 * (l01 * l10).sqrt()).powi(2);
        let root = (1.0 - 4.0 * det).max(0.0).sqrt();
        (0.5 * (1.0 + root), (0.5 * (1.0 - root)).max(0.0))
    }

    pub fn compute(p: &DctParams) -> Result<Self> {
        let c = Self::amplitude_matrix(p);
        let ctc = [
            [
                c[0][0] * c[0][0] + c[1][0] * c[1][0],
                c[0][0] * c[0][1] + c[1][0] * c[1][1],
            ],
            [
                c[0][0] * c[0][1] + c[1][0] * c[1][1],
                c[0][1] * c[0][1] + c[1][1] * c[1][1],
            ],
        ];
        let (ap2, _) = Self::coefficients_squared(p);
        let alpha_plus = ap2.sqrt();
        // α₊α₋ = |det C| avoids the cancellation in the closed form for α₋
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        let alpha_minus = det.abs() / alpha_plus;

        let u_plus = sign_fixed(symmetric_eigvec(ctc, ap2));
        let u_minus = sign_fixed([-u_plus[1], u_plus[0]]);
        let apply = |u: [f64; 2]| {
            [
                c[0][0] * u[0] + c[0][1] * u[1],
                c[1][0] * u[0] + c[1][1] * u[1],
            ]
        };
        let cu = apply(u_plus);
        let v_plus = [cu[0] / alpha_plus, cu[1] / alpha_plus];
        // in two dimensions v₋ is fixed up to sign by v₊; the sign makes
        // ⟨v₋|C|u₋⟩ = α₋ non-negative (any sign works when C has rank one)
        let perp = [-v_plus[1], v_plus[0]];
        let cm = apply(u_minus);
        let v_minus = if perp[0] * cm[0] + perp[1] * cm[1] < 0.0 {
            [-perp[0], -perp[1]]
        } else {
            perp
        };

        let s = Self {
            alpha_plus,
            alpha_minus,
            u_plus,
            u_minus,
            v_plus,
            v_minus,
        };
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let rebuilt =
                    alpha_plus * v_plus[i] * u_plus[j] + alpha_minus * v_minus[i] * u_minus[j];
                worst = worst.max((rebuilt - c[i][j]).abs());
            }
        }
        let dot = v_plus[0] * v_minus[0] + v_plus[1] * v_minus[1];
        let norm_v = (v_plus[0].hypot(v_plus[1]) - 1.0)
            .abs()
            .max((v_minus[0].hypot(v_minus[1]) - 1.0).abs());
        if worst > 1e-10 || dot.abs() > 1e-10 || norm_v > 1e-10 {
            return Err(Error::SchmidtFailure(format!(
                "reconstruction error {worst:e}, ⟨v₊|v₋⟩ = {dot:e}"
            )));
        }
        Ok(s)
    }

    /// `V₂ = (|v₊⟩, |v₋⟩)` as columns.
    pub fn v_matrix(&self) -> ComplexMatrix {
        real2(
            self.v_plus[0],
            self.v_minus[0],
            self.v_plus[1],
            self.v_minus[1],
        )
    }

    /// `U₂ = (|u₊⟩, |u₋⟩)` as columns.
    pub fn u_matrix(&self) -> ComplexMatrix {
        real2(
            self.u_plus[0],
            self.u_minus[0],
            self.u_plus[1],
            self.u_minus[1],
        )
    }
}

/// Unit eigenvector of the symmetric 2×2 matrix `m` for eigenvalue `mu`.
fn symmetric_eigvec(m: [[f64; 2]; 2], mu: f64) -> [f64; 2] {
    let c1 = [m[0][1], mu - m[0][0]];
    let c2 = [mu - m[1][1], m[1][0]];
    let n1 = c1[0].hypot(c1[1]);
    let n2 = c2[0].hypot(c2[1]);
    let (v, n) = if n1 >= n2 { (c1, n1) } else { (c2, n2) };
    if n < 1e-14 {
        // m is a multiple of the identity
        return [1.0, 0.0];
    }
    [v[0] / n, v[1] / n]
}

/// Flips the sign so the first nonzero component is positive.
fn sign_fixed(v: [f64; 2]) -> [f64; 2] {
    let lead = if v[0].abs() > 1e-14 { v[0] } else { v[1] };
    if lead < 0.0 {
        [-v[0], -v[1]]
    } else {
        v
    }
}

/// Three-qubit preparation on qubits 0..3 of an `n_qubits` register:
/// `LU₁`, `CNOT(2,3)`, `LU₂ = I ⊗ V₂ ⊗ U₂`, `LU₃ = H ⊗ I ⊗ I`.
pub fn dct_preparation_circuit(p: &DctParams, n_qubits: usize) -> Result<Circuit> {
    let s = DctSchmidt::compute(p)?;
    let lu1 = real2(s.alpha_plus, s.alpha_minus, s.alpha_minus, -s.alpha_plus);
    let lu2 = kron(&s.v_matrix(), &s.u_matrix());
    let mut circ = Circuit::new(n_qubits)?;
    circ.push(Gate::single("LU1", lu1, 1)?)?;
    circ.push(Gate::cnot(1, 2)?)?;
    circ.push(Gate::new("LU2", lu2, vec![1, 2], vec![])?)?;
    circ.push(Gate::hadamard(0))?;
    Ok(circ)
}

/// Purification stage: copy CNOTs, the doubly controlled `U` on ancilla 0
/// (open controls on qubits 1, 2), a Toffoli on pattern `|100⟩`, then
/// `CNOT(1,2)` and `CNOT(1,3)` (1-based labels).
pub fn dct_purification_circuit(p: &DctParams) -> Result<Circuit> {
    let gamma = p.gamma();
    if gamma <= DCT_MIN_GAMMA {
        return Err(Error::BadParams(format!(
            "γ = {gamma:e} too small to build the controlled-U gate"
        )));
    }
    let (sp, sm) = (p.lambda0_plus.sqrt(), p.lambda0_minus.sqrt());
    let u = real2(sm, sp, sp, -sm).scale_real(1.0 / gamma);

    let mut circ = Circuit::new(6)?;
    for q in SYSTEM {
        circ.push(Gate::cnot(q, q + 3)?)?;
    }
    circ.push(Gate::new(
        "CCU",
        u,
        vec![3],
        vec![Control::on_zero(1), Control::on_zero(2)],
    )?)?;
    circ.push(Gate::controlled_not(
        vec![Control::on_one(0), Control::on_zero(1), Control::on_zero(2)],
        3,
    )?)?;
    circ.push(Gate::cnot(0, 1)?)?;
    circ.push(Gate::cnot(0, 2)?)?;
    Ok(circ)
}

pub fn dct_network_circuit(p: &DctParams) -> Result<Circuit> {
    let mut circ = dct_preparation_circuit(p, 6)?;
    circ.extend(&dct_purification_circuit(p)?)?;
    Ok(circ)
}

pub fn dct_purification(p: &DctParams) -> Result<PureState> {
    dct_network_circuit(p)?.run(&PureState::basis(6, 0))
}

/// DCT state obtained by simulating the network and discarding the
/// ancillas.
pub fn dct_network(p: &DctParams) -> Result<DensityMatrix> {
    dct_purification(p)?.to_density().partial_trace(&SYSTEM)
}

/// Plain-text matrix print, one row per line, real and imaginary parts to
/// six decimals.
pub fn pretty_print(rho: &DensityMatrix) -> String {
    let m = rho.matrix();
    let mut out = String::new();
    for r in 0..m.dim() {
        let cells: Vec<String> = m
            .row(r)
            .iter()
            .map(|z| {
                if z.im == 0.0 {
                    format!("{:>10.6}", z.re)
                } else {
                    format!("{:>10.6}{:+.6}i", z.re, z.im)
                }
            })
            .collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// Pauli `X` on every qubit, used to relate open and filled controls.
pub fn x_layer(qubits: &[usize], n_qubits: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n_qubits)?;
    for &q in qubits {
        c.push(Gate::single("X", pauli::x(), q)?)?;
    }
    Ok(c)
}
