//! Gate-level pure-state simulation.
//!
//! Gates carry their own unitary block, ordered target qubits and a list of
//! controls, each of which fires on `|1⟩` (filled circle) or `|0⟩` (open
//! circle). [`Gate::apply`] walks the state vector with bit masks and never
//! materializes a `2^n × 2^n` matrix; [`Gate::expand`] builds that matrix
//! from Kronecker products and control projectors and is kept as an
//! independent reference for testing.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::qmat::{kron, kron_all, pauli, ComplexMatrix, PureState, C64, ONE};

/// Maximum register size accepted by the simulator.
pub const MAX_QUBITS: usize = 9;

/// Gates must satisfy `‖U†U - I‖_max` below this.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    /// Fires when the control qubit is `|1⟩`.
    OnOne,
    /// Fires when the control qubit is `|0⟩`.
    OnZero,
}

impl Polarity {
    fn fires_on(self) -> usize {
        match self {
            Polarity::OnOne => 1,
            Polarity::OnZero => 0,
        }
    }

    fn symbol(self) -> char {
        match self {
            Polarity::OnOne => '+',
            Polarity::OnZero => '-',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn on_one(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::OnOne,
        }
    }

    pub fn on_zero(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::OnZero,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    name: String,
    unitary: ComplexMatrix,
    targets: Vec<usize>,
    controls: Vec<Control>,
    /// Optional phase `θ(pattern)` applied to every amplitude according to
    /// the values of the control qubits (first control is the MSB of
    /// `pattern`), whether or not the block fires.
    control_phases: Option<Vec<f64>>,
}

impl Gate {
    pub fn new(
        name: impl Into<String>,
        unitary: ComplexMatrix,
        targets: Vec<usize>,
        controls: Vec<Control>,
    ) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::BadGate(format!("invalid gate name `{name}`")));
        }
        if targets.is_empty() {
            return Err(Error::BadGate(format!("gate `{name}` has no targets")));
        }
        if unitary.dim() != 1 << targets.len() {
            return Err(Error::BadGate(format!(
                "gate `{name}`: {}-dimensional block for {} targets",
                unitary.dim(),
                targets.len()
            )));
        }
        let mut qubits: Vec<usize> = targets
            .iter()
            .copied()
            .chain(controls.iter().map(|c| c.qubit))
            .collect();
        qubits.sort_unstable();
        if qubits.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadGate(format!(
                "gate `{name}`: targets and controls must be pairwise distinct"
            )));
        }
        let defect = unitary.unitarity_defect();
        if defect > UNITARITY_TOL {
            return Err(Error::NonUnitaryGate { name, defect });
        }
        Ok(Self {
            name,
            unitary,
            targets,
            controls,
            control_phases: None,
        })
    }

    /// Uncontrolled gate on one qubit.
    pub fn single(name: impl Into<String>, unitary: ComplexMatrix, target: usize) -> Result<Self> {
        Self::new(name, unitary, vec![target], Vec::new())
    }

    pub fn x(target: usize) -> Self {
        Self::new("X", pauli::x(), vec![target], Vec::new()).expect("X is unitary")
    }

    pub fn hadamard(target: usize) -> Self {
        Self::new("H", pauli::hadamard(), vec![target], Vec::new()).expect("H is unitary")
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        Self::new(
            "CNOT",
            pauli::x(),
            vec![target],
            vec![Control::on_one(control)],
        )
    }

    /// NOT on `target` conditioned on arbitrary control polarities.
    pub fn controlled_not(controls: Vec<Control>, target: usize) -> Result<Self> {
        let name = if controls.len() == 3 {
            "TOFFOLI3"
        } else {
            "CNOT"
        };
        Self::new(name, pauli::x(), vec![target], controls)
    }

    /// Three-control Toffoli `|a,b,c⟩|f⟩ → |a,b,c⟩|a·b·c ⊕ f⟩`.
    pub fn toffoli3(controls: [usize; 3], target: usize) -> Result<Self> {
        let all = [controls[0], controls[1], controls[2], target];
        for i in 0..4 {
            for j in i + 1..4 {
                if all[i] == all[j] {
                    return Err(Error::BadIndex(format!(
                        "Toffoli qubits {all:?} are not distinct"
                    )));
                }
            }
        }
        Self::controlled_not(
            controls.iter().map(|&q| Control::on_one(q)).collect(),
            target,
        )
    }

    /// Attaches the generalized-Toffoli phase function, one angle per
    /// control pattern.
    pub fn with_control_phases(mut self, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != 1 << self.controls.len() {
            return Err(Error::BadGate(format!(
                "gate `{}`: {} phases for {} controls",
                self.name,
                phases.len(),
                self.controls.len()
            )));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::BadGate("non-finite control phase".into()));
        }
        self.control_phases = Some(phases);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn control_phases(&self) -> Option<&[f64]> {
        self.control_phases.as_deref()
    }

    /// Largest qubit index the gate touches.
    pub fn max_qubit(&self) -> usize {
        self.targets
            .iter()
            .copied()
            .chain(self.controls.iter().map(|c| c.qubit))
            .max()
            .unwrap_or(0)
    }

    fn check_register(&self, n_qubits: usize) -> Result<()> {
        if self.max_qubit() >= n_qubits {
            return Err(Error::BadGate(format!(
                "gate `{}` touches qubit {} of a {n_qubits}-qubit register",
                self.name,
                self.max_qubit()
            )));
        }
        Ok(())
    }

    /// Applies the gate to a state vector.
    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        let mut out = state.clone();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    pub fn apply_in_place(&self, state: &mut PureState) -> Result<()> {
        let n = state.n_qubits();
        self.check_register(n)?;
        let amps = state.amplitudes_mut();

        let mask = |q: usize| 1usize << (n - 1 - q);
        let target_masks: Vec<usize> = self.targets.iter().map(|&q| mask(q)).collect();
        let target_all: usize = target_masks.iter().sum();
        let t = self.targets.len();
        let block = 1usize << t;
        // offsets[s]: basis-index offset of target sub-state s (targets[0] is the MSB of s)
        let offsets: Vec<usize> = (0..block)
            .map(|s| {
                (0..t)
                    .filter(|j| (s >> (t - 1 - j)) & 1 == 1)
                    .map(|j| target_masks[j])
                    .sum()
            })
            .collect();
        let control_masks: Vec<(usize, usize)> = self
            .controls
            .iter()
            .map(|c| (mask(c.qubit), c.polarity.fires_on()))
            .collect();

        let u = &self.unitary;
        let mut buf = vec![C64::new(0.0, 0.0); block];
        for base in 0..amps.len() {
            if base & target_all != 0 {
                continue;
            }
            let fires = control_masks
                .iter()
                .all(|&(m, on)| usize::from(base & m != 0) == on);
            if fires {
                for (s, &off) in offsets.iter().enumerate() {
                    buf[s] = amps[base | off];
                }
                for (r, &off) in offsets.iter().enumerate() {
                    amps[base | off] = u.row(r).iter().zip(&buf).map(|(a, b)| a * b).sum();
                }
            }
        }

        if let Some(phases) = &self.control_phases {
            let k = control_masks.len();
            for (x, amp) in amps.iter_mut().enumerate() {
                let pattern = control_masks
                    .iter()
                    .enumerate()
                    .filter(|(_, (m, _))| x & m != 0)
                    .map(|(j, _)| 1usize << (k - 1 - j))
                    .sum::<usize>();
                *amp *= C64::from_polar(1.0, phases[pattern]);
            }
        }
        Ok(())
    }

    /// Full `2^n × 2^n` matrix of the gate, assembled as
    /// `Σ_patterns e^{iθ} (⊗ control projectors) ⊗ (U or I) ⊗ I_rest` in the
    /// frame (controls, targets, others) and then relabeled.
    pub fn expand(&self, n_qubits: usize) -> Result<ComplexMatrix> {
        self.check_register(n_qubits)?;
        let k = self.controls.len();
        let others: Vec<usize> = (0..n_qubits)
            .filter(|q| !self.targets.contains(q) && !self.controls.iter().any(|c| c.qubit == *q))
            .collect();
        let rest = ComplexMatrix::identity(1 << others.len());
        let id_t = ComplexMatrix::identity(self.unitary.dim());

        let mut framed = ComplexMatrix::zeros(1 << n_qubits);
        for pattern in 0..1usize << k {
            let bits: Vec<usize> = (0..k).map(|j| (pattern >> (k - 1 - j)) & 1).collect();
            let projs: Vec<ComplexMatrix> = bits.iter().map(|&b| pauli::projector(b)).collect();
            let fires = self
                .controls
                .iter()
                .zip(&bits)
                .all(|(c, &b)| b == c.polarity.fires_on());
            let block = if fires { &self.unitary } else { &id_t };
            let term = kron(&kron(&kron_all(&projs), block), &rest);
            let phase = self
                .control_phases
                .as_ref()
                .map_or(ONE, |p| C64::from_polar(1.0, p[pattern]));
            framed.add_scaled_mut(&term, phase);
        }

        // frame qubit f is physical qubit order[f]
        let order: Vec<usize> = self
            .controls
            .iter()
            .map(|c| c.qubit)
            .chain(self.targets.iter().copied())
            .chain(others.iter().copied())
            .collect();
        let mut inverse = vec![0; n_qubits];
        for (f, &q) in order.iter().enumerate() {
            inverse[q] = f;
        }
        framed.permute_qubits(&inverse)
    }

    /// Same gate with every control polarity inverted.
    pub fn with_flipped_controls(&self) -> Self {
        let mut g = self.clone();
        for c in &mut g.controls {
            c.polarity = match c.polarity {
                Polarity::OnOne => Polarity::OnZero,
                Polarity::OnZero => Polarity::OnOne,
            };
        }
        g
    }

    fn emits_matrix(&self) -> bool {
        let is_x = self.unitary == pauli::x();
        match self.name.as_str() {
            "X" | "CNOT" | "TOFFOLI3" => !is_x,
            "H" => self.unitary != pauli::hadamard(),
            _ => true,
        }
    }

    /// One line of the circuit text format:
    /// `NAME targets=[..] controls=[(q,±)..] [phases=[..]] [matrix=[[re,im],..]]`.
    pub fn to_line(&self) -> String {
        let mut line = String::new();
        let targets: Vec<String> = self.targets.iter().map(usize::to_string).collect();
        let controls: Vec<String> = self
            .controls
            .iter()
            .map(|c| format!("({},{})", c.qubit, c.polarity.symbol()))
            .collect();
        write!(
            line,
            "{} targets=[{}] controls=[{}]",
            self.name,
            targets.join(","),
            controls.join(",")
        )
        .unwrap();
        if let Some(phases) = &self.control_phases {
            let p: Vec<String> = phases.iter().map(|x| fmt_f64(*x)).collect();
            write!(line, " phases=[{}]", p.join(",")).unwrap();
        }
        if self.emits_matrix() {
            let entries: Vec<String> = self
                .unitary
                .as_slice()
                .iter()
                .map(|z| format!("[{},{}]", fmt_f64(z.re), fmt_f64(z.im)))
                .collect();
            write!(line, " matrix=[{}]", entries.join(",")).unwrap();
        }
        line
    }

    /// Parses one line produced by [`Gate::to_line`].
    pub fn from_line(line: &str) -> Result<Self> {
        let line = line.trim();
        let (name, rest) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::Parse(format!("gate line `{line}` has no fields")))?;
        let fields = split_fields(rest)?;
        let field = |key: &str| {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
        };

        let targets = parse_list(field("targets").ok_or_else(|| missing("targets"))?)?
            .iter()
            .map(|s| parse_usize(s))
            .collect::<Result<Vec<_>>>()?;
        let controls = parse_list(field("controls").ok_or_else(|| missing("controls"))?)?
            .iter()
            .map(|s| parse_control(s))
            .collect::<Result<Vec<_>>>()?;
        let unitary = match field("matrix") {
            Some(m) => parse_matrix(m)?,
            None => match name {
                "X" | "CNOT" | "TOFFOLI3" => pauli::x(),
                "H" => pauli::hadamard(),
                other => {
                    return Err(Error::Parse(format!(
                        "gate `{other}` needs an explicit matrix"
                    )))
                }
            },
        };
        let gate = Self::new(name, unitary, targets, controls)?;
        match field("phases") {
            Some(p) => {
                let phases = parse_list(p)?
                    .iter()
                    .map(|s| parse_f64(s))
                    .collect::<Result<Vec<_>>>()?;
                gate.with_control_phases(phases)
            }
            None => Ok(gate),
        }
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn missing(key: &str) -> Error {
    Error::Parse(format!("missing `{key}=` field"))
}

/// Splits `key=[...] key=[...]` with bracket matching.
fn split_fields(s: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut rest = s.trim_start();
    while !rest.is_empty() {
        let (key, after) = rest
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value near `{rest}`")))?;
        if !after.starts_with('[') {
            return Err(Error::Parse(format!("value of `{key}` must be bracketed")));
        }
        let mut depth = 0usize;
        let mut end = None;
        for (i, ch) in after.char_indices() {
            match ch {
                '[' => depth += 1,
                ']' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(i);
                        break;
                    }
                }
                _ => {}
            }
        }
        let end = end.ok_or_else(|| Error::Parse(format!("unbalanced brackets in `{key}`")))?;
        out.push((key.trim().to_string(), after[..=end].to_string()));
        rest = after[end + 1..].trim_start();
    }
    Ok(out)
}

/// Top-level comma-separated items of `[a,b,(c,d),[e,f]]`.
fn parse_list(s: &str) -> Result<Vec<String>> {
    let inner = s
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("`{s}` is not a bracketed list")))?;
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in inner.chars() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            _ => {}
        }
        if ch == ',' && depth == 0 {
            items.push(std::mem::take(&mut cur));
        } else {
            cur.push(ch);
        }
    }
    if !cur.trim().is_empty() {
        items.push(cur);
    }
    Ok(items.into_iter().map(|x| x.trim().to_string()).collect())
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Parse(format!("`{s}` is not a qubit index")))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Parse(format!("`{s}` is not a number")))
}

fn parse_control(s: &str) -> Result<Control> {
    let inner = s
        .strip_prefix('(')
        .and_then(|x| x.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("control `{s}` must look like (q,+)")))?;
    let (q, pol) = inner
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("control `{s}` must look like (q,+)")))?;
    let polarity = match pol.trim() {
        "+" => Polarity::OnOne,
        "-" => Polarity::OnZero,
        other => return Err(Error::Parse(format!("unknown polarity `{other}`"))),
    };
    Ok(Control {
        qubit: parse_usize(q.trim())?,
        polarity,
    })
}

fn parse_matrix(s: &str) -> Result<ComplexMatrix> {
    let entries = parse_list(s)?
        .iter()
        .map(|e| {
            let pair = parse_list(e)?;
            match pair.as_slice() {
                [re, im] => Ok(C64::new(parse_f64(re)?, parse_f64(im)?)),
                _ => Err(Error::Parse(format!("matrix entry `{e}` is not [re,im]"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let dim = (entries.len() as f64).sqrt().round() as usize;
    ComplexMatrix::from_vec(dim, entries).map_err(|e| Error::Parse(e.to_string()))
}

/// Ordered gate list over a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::BadGate(format!(
                "register of {n_qubits} qubits outside 1..={MAX_QUBITS}"
            )));
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.check_register(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    /// Appends every gate of `other`, which may act on a smaller register.
    pub fn extend(&mut self, other: &Circuit) -> Result<&mut Self> {
        for g in &other.gates {
            self.push(g.clone())?;
        }
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Applies the gates in order.
    pub fn run(&self, initial: &PureState) -> Result<PureState> {
        if initial.n_qubits() != self.n_qubits {
            return Err(Error::DimMismatch(
                1 << initial.n_qubits(),
                1 << self.n_qubits,
            ));
        }
        let mut state = initial.clone();
        for g in &self.gates {
            g.apply_in_place(&mut state)?;
        }
        Ok(state)
    }

    /// Product of the expanded gate matrices (slow reference path).
    pub fn unitary(&self) -> Result<ComplexMatrix> {
        let mut u = ComplexMatrix::identity(1 << self.n_qubits);
        for g in &self.gates {
            u = &g.expand(self.n_qubits)? * &u;
        }
        Ok(u)
    }

    /// Text dump: a `qubits=N` header followed by one gate per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("qubits={}\n", self.n_qubits);
        for g in &self.gates {
            s.push_str(&g.to_line());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty circuit text".into()))?;
        let n = header
            .strip_prefix("qubits=")
            .ok_or_else(|| Error::Parse(format!("expected `qubits=N` header, got `{header}`")))
            .and_then(parse_usize)?;
        let mut c = Circuit::new(n)?;
        for line in lines {
            c.push(Gate::from_line(line)?)?;
        }
        Ok(c)
    }
}
