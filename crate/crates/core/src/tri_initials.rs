//! Initial vectors and shifts for tridiagonal Q-matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iteration::{InitialPair, Provenance};
use crate::linalg::{norm2, shift_to_q, Matrix, Measure};
use crate::tridiag::TriQ;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriCase {
    /// Killing only at the last state.
    Case1,
    Case2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriSequences {
    pub mu: Measure,
    /// `r_0..r_{N-1}`; all ones in case 1.
    pub r: Vec<f64>,
    /// `h_0..h_{N+1}`.
    pub h: Vec<f64>,
    pub phi: Vec<f64>,
    pub case: TriCase,
}

/// `mu_0 = 1`, `mu_n = mu_{n-1} b_{n-1} / a_n`.
pub fn mu_sequence(t: &TriQ) -> Measure {
    let mut mu = Vec::with_capacity(t.size());
    mu.push(1.0);
    for n in 1..t.size() {
        mu.push(mu[n - 1] * t.b(n - 1) / t.a(n));
    }
    Measure::new(mu).expect("positive rates give a positive measure")
}

pub fn phi_and_h(t: &TriQ) -> Result<TriSequences> {
    if t.is_conservative() {
        return Err(Error::TrivialSpectrum);
    }
    if t.is_case1() {
        Ok(case1(t))
    } else {
        general_case(t)
    }
}

fn case1(t: &TriQ) -> TriSequences {
    let n = t.last();
    let mu = mu_sequence(t);
    let w = mu.weights();
    let mut phi = vec![0.0; n + 1];
    let mut acc = 0.0;
    for k in (0..=n).rev() {
        let b = if k == n { t.c(n) } else { t.b(k) };
        acc += 1.0 / (w[k] * b);
        phi[k] = acc;
    }
    let mut h = vec![1.0; n + 2];
    h[n + 1] = t.c(n);
    TriSequences { mu, r: vec![1.0; n], h, phi, case: TriCase::Case1 }
}

/// The `r`/`h` construction, valid for any killing pattern with `c` not
/// identically zero. On case-1 input it reproduces [`phi_and_h`] exactly.
pub fn general_case(t: &TriQ) -> Result<TriSequences> {
    if t.is_conservative() {
        return Err(Error::TrivialSpectrum);
    }
    let n = t.last();
    let mu = mu_sequence(t);
    let w = mu.weights();
    let mut r = Vec::with_capacity(n);
    for m in 0..n {
        let (a, b, c) = (t.a(m), t.b(m), t.c(m));
        let rm = if m == 0 { 1.0 + c / b } else { 1.0 + ((a + c) / b - a / (b * r[m - 1])) };
        if !(rm > 0.0) {
            return Err(Error::NonpositiveR { index: m, value: rm });
        }
        r.push(rm);
    }
    let mut h = vec![1.0; n + 2];
    for m in 1..=n {
        h[m] = h[m - 1] * r[m - 1];
    }
    h[n + 1] = if n == 0 { t.c(0) } else { t.c(n) * h[n] + t.a(n) * (h[n - 1] - h[n]) };
    if !(h[n + 1] > 0.0) {
        return Err(Error::NonpositiveR { index: n + 1, value: h[n + 1] });
    }
    let mut phi = vec![0.0; n + 1];
    let mut acc = 0.0;
    for k in (0..=n).rev() {
        let b = if k == n { 1.0 } else { t.b(k) };
        acc += 1.0 / (h[k] * h[k + 1] * w[k] * b);
        phi[k] = acc;
    }
    let case = if t.is_case1() { TriCase::Case1 } else { TriCase::Case2 };
    Ok(TriSequences { mu, r, h, phi, case })
}

/// `max_n [ sqrt(phi_n) sum_{k<=n} mu_k h_k^2 sqrt(phi_k)
///        + phi_n^{-1/2} sum_{j>n} mu_j h_j^2 phi_j^{3/2} ]`.
pub fn delta1_from(s: &TriSequences) -> Result<f64> {
    let w = s.mu.weights();
    let n = s.phi.len();
    let mut suffix = vec![0.0; n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1] + w[j] * s.h[j] * s.h[j] * s.phi[j].powf(1.5);
    }
    let mut prefix = 0.0;
    let mut best = f64::NEG_INFINITY;
    for m in 0..n {
        let sp = s.phi[m].sqrt();
        prefix += w[m] * s.h[m] * s.h[m] * sp;
        best = best.max(sp * prefix + suffix[m + 1] / sp);
    }
    if !best.is_finite() || best <= 0.0 {
        return Err(Error::InvalidParameter(format!("delta1 evaluated to {best}")));
    }
    Ok(best)
}

pub fn delta1(t: &TriQ) -> Result<f64> {
    delta1_from(&phi_and_h(t)?)
}

/// How the initial shift is formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriMode {
    /// `z0 = 1/delta1`, `v0` normalized in l2.
    Pure,
    /// `z0 = xi/delta1 + (1 - xi) (v0, -Q v0)_mu`, `v0` normalized in `L^2(mu)`.
    Improved(f64),
}

impl Default for TriMode {
    fn default() -> Self {
        TriMode::Improved(0.875)
    }
}

/// `v0 ∝ (h_i sqrt(phi_i))`.
pub fn initial_vector(s: &TriSequences) -> Vec<f64> {
    s.phi.iter().zip(&s.h).map(|(p, h)| h * p.sqrt()).collect()
}

pub fn initials_tridiagonal(t: &TriQ, mode: TriMode) -> Result<InitialPair> {
    let s = phi_and_h(t)?;
    let d = delta1_from(&s)?;
    let vt = initial_vector(&s);
    match mode {
        TriMode::Pure => {
            let nv = norm2(&vt);
            Ok(InitialPair {
                v0: vt.iter().map(|x| x / nv).collect(),
                z0: 1.0 / d,
                measure: None,
                provenance: Provenance::Tridiagonal { xi: None },
            })
        }
        TriMode::Improved(xi) => {
            if !(0.0..=1.0).contains(&xi) {
                return Err(Error::InvalidParameter(format!("xi = {xi} outside [0, 1]")));
            }
            let mu = s.mu;
            let nv = mu.norm(&vt)?;
            let v0: Vec<f64> = vt.iter().map(|x| x / nv).collect();
            let rq = mu.inner(&v0, &t.apply_neg(&v0))?;
            Ok(InitialPair {
                z0: xi / d + (1.0 - xi) * rq,
                v0,
                measure: Some(mu),
                provenance: Provenance::Tridiagonal { xi: Some(xi) },
            })
        }
    }
}

/// Shifts a tridiagonal matrix with positive off-diagonals to a Q-matrix and
/// builds its initial pair on `-Q`. Returns `(T, m, pair)` where the shift for
/// the original matrix is `m - z`.
pub fn initials_tridiagonal_matrix(a: &Matrix, mode: TriMode) -> Result<(TriQ, f64, InitialPair)> {
    let (q, m) = shift_to_q(a)?;
    let t = TriQ::from_matrix(&q)?;
    let pair = initials_tridiagonal(&t, mode)?;
    Ok((t, m, pair))
}
