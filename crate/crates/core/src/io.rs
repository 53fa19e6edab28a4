//! JSON output with a fixed float format, and the state-file schema.
//!
//! Every `f64` is written as `{:.16e}` (17 significant digits), which
//! round-trips bit-exactly and makes output byte-identical across runs.

use std::io;

use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, Serializer};

use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, DensityMatrix, C64};

/// Version of every JSON document written by the toolkit.
pub const SCHEMA_VERSION: u32 = 1;

/// serde_json's compact layout, with floats printed in scientific
/// notation with 17 significant digits.
#[derive(Clone, Copy, Debug, Default)]
pub struct FixedFloatFormatter;

impl Formatter for FixedFloatFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes with [`FixedFloatFormatter`]. Non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, FixedFloatFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

/// Dense matrix as `{n_qubits, entries: [[re, im], ...]}`, row-major.
#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct MatrixJson {
    pub n_qubits: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        let n_qubits = m
            .qubit_count()
            .ok_or_else(|| Error::InvalidMatrix(format!("dimension {} is not 2^n", m.dim())))?;
        Ok(Self {
            n_qubits,
            entries: m.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        })
    }

    pub fn from_state(rho: &DensityMatrix) -> Self {
        Self::from_matrix(rho.matrix()).expect("states have qubit dimension")
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let dim = 1usize
            .checked_shl(self.n_qubits as u32)
            .filter(|_| self.n_qubits <= 16)
            .ok_or_else(|| Error::Parse(format!("n_qubits = {} too large", self.n_qubits)))?;
        if self.entries.len() != dim * dim {
            return Err(Error::Parse(format!(
                "expected {} entries for {} qubits, found {}",
                dim * dim,
                self.n_qubits,
                self.entries.len()
            )));
        }
        ComplexMatrix::from_vec(
            dim,
            self.entries.iter().map(|[r, i]| C64::new(*r, *i)).collect(),
        )
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_matrix()?)
    }
}

/// A standalone state file.
#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct StateFile {
    pub schema: u32,
    #[serde(flatten)]
    pub state: MatrixJson,
}

impl StateFile {
    pub fn new(rho: &DensityMatrix) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            state: MatrixJson::from_state(rho),
        }
    }
}

pub fn parse_state(text: &str) -> Result<DensityMatrix> {
    let f: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if f.schema != SCHEMA_VERSION {
        return Err(Error::Parse(format!("unsupported schema {}", f.schema)));
    }
    f.state.to_state()
}
