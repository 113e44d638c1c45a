//! Reference spectra computed with nalgebra, independent of the iteration code.

use nalgebra::DMatrix;
pub use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const ORACLE_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Sorted by modulus, largest first.
    pub eigenvalues: Vec<Complex<f64>>,
    /// Eigenvalue with the largest real part.
    pub max_real: f64,
}

impl Spectrum {
    pub fn min_real(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    /// Real parts in ascending order.
    pub fn real_parts_sorted(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.eigenvalues.iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        r
    }
}

fn to_dmatrix(m: &Matrix) -> DMatrix<f64> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |i, j| m.get(i, j))
}

fn check_cap(m: &Matrix) -> Result<()> {
    if m.dim() > ORACLE_CAP {
        Err(Error::OracleSizeCap { size: m.dim(), cap: ORACLE_CAP })
    } else {
        Ok(())
    }
}

pub fn eigen_oracle(m: &Matrix) -> Result<Spectrum> {
    check_cap(m)?;
    let mut eigenvalues: Vec<Complex<f64>> = to_dmatrix(m).complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)));
    let max_real = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(Spectrum { eigenvalues, max_real })
}

/// Unit null vector of `M - lambda I` from the smallest singular triple,
/// with its largest-magnitude component made positive.
pub fn oracle_eigenvector(m: &Matrix, lambda: f64) -> Result<Vec<f64>> {
    check_cap(m)?;
    let n = m.dim();
    let shifted = to_dmatrix(m) - DMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::SingularSystem("oracle svd"))?;
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .ok_or(Error::ZeroVector)?;
    let mut v: Vec<f64> = v_t.row(k).iter().copied().collect();
    crate::linalg::sign_normalize(&mut v);
    Ok(v)
}
