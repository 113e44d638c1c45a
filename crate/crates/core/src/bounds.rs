//! Certified two-sided eigenvalue bounds.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::iteration::IterationTrace;
use crate::linalg::{norm_inf, Matrix};
use crate::tri_initials::phi_and_h;
use crate::tridiag::TriQ;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsPair {
    pub lower: f64,
    pub upper: f64,
    pub witness: Vec<f64>,
}

impl BoundsPair {
    pub fn ratio(&self) -> f64 {
        self.upper / self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CwMode {
    /// Brackets the Perron root of `M`.
    MatrixA,
    /// Brackets `lambda_min(-M)` for a Q-matrix `M`.
    QMatrix,
}

fn check_positive(x: &[f64]) -> Result<()> {
    match x.iter().position(|&v| !(v > 0.0)) {
        Some(i) => Err(Error::NonpositiveVector { index: i, value: x[i] }),
        None => Ok(()),
    }
}

fn range(r: impl Iterator<Item = f64>) -> (f64, f64) {
    r.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// `min_i (Mx)_i / x_i` and `max_i (Mx)_i / x_i` (with `-M` in Q-matrix mode).
pub fn collatz_wielandt(m: &Matrix, x: &[f64], mode: CwMode) -> Result<BoundsPair> {
    check_len(m.dim(), x.len())?;
    check_positive(x)?;
    let sign = match mode {
        CwMode::MatrixA => 1.0,
        CwMode::QMatrix => -1.0,
    };
    let mx = m.mul_vec(x);
    let (lower, upper) = range(mx.iter().zip(x).map(|(a, b)| sign * a / b));
    Ok(BoundsPair { lower, upper, witness: x.to_vec() })
}

/// Returns `v` with its sign fixed so it is positive, or `None` when some
/// component is negligible or the signs are mixed.
fn positive_version(v: &[f64]) -> Option<Vec<f64>> {
    let cut = 1e-12 * norm_inf(v);
    if v.iter().any(|x| x.abs() < cut || *x == 0.0) {
        return None;
    }
    if v.iter().all(|&x| x > 0.0) {
        Some(v.to_vec())
    } else if v.iter().all(|&x| x < 0.0) {
        Some(v.iter().map(|x| -x).collect())
    } else {
        None
    }
}

/// Collatz–Wielandt bounds at every recorded positive iterate, as
/// `(step, bounds)`. Steps with mixed-sign or near-zero components are skipped.
pub fn ratio_certificate(m: &Matrix, trace: &IterationTrace, mode: CwMode) -> Result<Vec<(usize, BoundsPair)>> {
    let mut out = Vec::new();
    for s in &trace.steps {
        if let Some(v) = s.v.as_deref().and_then(positive_version) {
            out.push((s.k, collatz_wielandt(m, &v, mode)?));
        }
    }
    if out.is_empty() {
        return Err(Error::NoPositiveIterate);
    }
    Ok(out)
}

/// Bounds for a birth–death matrix killed only at the last state, using the
/// test function `g_i = phi_i sum_{k<=i} mu_k f_k + sum_{k>i} mu_k phi_k f_k`:
/// `lower = inf f/g`, `upper = min(z, sup f/g)`.
pub fn refined_birthdeath_bounds(t: &TriQ, f: &[f64], z: f64) -> Result<BoundsPair> {
    check_len(t.size(), f.len())?;
    if !t.is_case1() {
        return Err(Error::InvalidParameter("refined bounds need killing at the last state only".into()));
    }
    check_positive(f)?;
    let s = phi_and_h(t)?;
    let mu = s.mu.weights();
    let phi = &s.phi;
    let n = f.len();
    let mut tail = vec![0.0; n + 1];
    for k in (0..n).rev() {
        tail[k] = tail[k + 1] + mu[k] * phi[k] * f[k];
    }
    let mut head = 0.0;
    let ratios: Vec<f64> = (0..n)
        .map(|i| {
            head += mu[i] * f[i];
            f[i] / (phi[i] * head + tail[i + 1])
        })
        .collect();
    let (lower, sup) = range(ratios.into_iter());
    Ok(BoundsPair { lower, upper: z.min(sup), witness: f.to_vec() })
}
