//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Inputs further than this from Hermitian are rejected.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Convergence threshold on the off-diagonal Frobenius norm, relative to
/// `max(1, ‖M‖_F)`.
pub const OFF_DIAGONAL_TOL: f64 = 1e-13;

pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order, optionally with eigenvectors stored as
/// the columns of a matrix in the same order.
///
/// Within a degenerate cluster the order of eigenvectors is arbitrary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Option<ComplexMatrix>,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    /// `Σ λ_i v_i v_i†`; `None` when eigenvectors were not kept.
    pub fn reconstruct(&self) -> Option<ComplexMatrix> {
        let v = self.eigenvectors.as_ref()?;
        let lambda = ComplexMatrix::from_diag(&self.eigenvalues);
        Some(&(v * &lambda) * &v.adjoint())
    }

    /// Eigenvector columns whose eigenvalue satisfies `pred`.
    pub fn vectors_where(&self, pred: impl Fn(f64) -> bool) -> Vec<Vec<C64>> {
        let Some(v) = &self.eigenvectors else {
            return Vec::new();
        };
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| pred(l))
            .map(|(i, _)| v.column(i))
            .collect()
    }
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian
/// matrix.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<Spectrum> {
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let threshold = OFF_DIAGONAL_TOL * a.frobenius_norm().max(1.0);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Some(eigenvectors),
    })
}

/// Eigenvalues only, descending.
pub fn eigvals_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>> {
    eig_hermitian(m).map(|s| s.eigenvalues)
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                acc += a[(r, c)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// One Jacobi step `A <- J† A J`, `V <- V J`, annihilating `A[p,q]`.
///
/// `J` first rotates the phase of column `q` so the pivot becomes real, then
/// applies the real symmetric Jacobi rotation.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phase = (apq / mag).conj();

    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = phase * (-s);
    let jqq = phase * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}
