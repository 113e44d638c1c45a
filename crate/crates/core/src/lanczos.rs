//! Two-sided Lanczos tridiagonalization `T = Q̃* A Q`.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, norm2, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanczosResult {
    /// Diagonal `c_k`, subdiagonal `T[k+1,k] = b_k`, superdiagonal `T[k,k+1] = a_k`.
    pub t: Matrix,
    /// Columns `q_1, q_2, ...`.
    pub q: Matrix,
    /// Columns `q̃_1, q̃_2, ...`.
    pub q_tilde: Matrix,
    /// Set when `b_k` vanished and the run stopped early; `t` then has
    /// `breakdown_at + 1` rows.
    pub breakdown_at: Option<usize>,
    /// All off-diagonal entries of `t` are positive.
    pub eligible: bool,
}

/// Runs `c_k = q̃_k* A q_k`, `r_k = (A - c_k) q_k - a_{k-1} q_{k-1}`,
/// `r̃_k = (A* - c_k) q̃_k - b_{k-1} q̃_{k-1}`, `b_k = ||r_k||`,
/// `a_k = r̃_k* r_k / b_k`, `q_{k+1} = r_k / b_k`, `q̃_{k+1} = r̃_k / a_k`.
pub fn lanczos_tridiagonalize(a: &Matrix, q1: &[f64], qt1: &[f64]) -> Result<LanczosResult> {
    let n = a.dim();
    check_len(n, q1.len())?;
    check_len(n, qt1.len())?;
    if (dot(q1, qt1) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter("starting vectors must satisfy q̃*q = 1".into()));
    }
    let at = a.transpose();
    let scale = a.norm_inf().max(f64::MIN_POSITIVE);
    let mut qs: Vec<Vec<f64>> = vec![q1.to_vec()];
    let mut qts: Vec<Vec<f64>> = vec![qt1.to_vec()];
    let (mut diag, mut sub, mut sup) = (Vec::new(), Vec::new(), Vec::new());
    let mut breakdown_at = None;
    for k in 0..n {
        let (q, qt) = (&qs[k], &qts[k]);
        let aq = a.mul_vec(q);
        let c = dot(qt, &aq);
        diag.push(c);
        if k + 1 == n {
            break;
        }
        let atq = at.mul_vec(qt);
        let mut r: Vec<f64> = aq.iter().zip(q).map(|(x, y)| x - c * y).collect();
        let mut rt: Vec<f64> = atq.iter().zip(qt).map(|(x, y)| x - c * y).collect();
        if k > 0 {
            let (ap, bp): (f64, f64) = (sup[k - 1], sub[k - 1]);
            r.iter_mut().zip(&qs[k - 1]).for_each(|(x, y)| *x -= ap * y);
            rt.iter_mut().zip(&qts[k - 1]).for_each(|(x, y)| *x -= bp * y);
        }
        let b = norm2(&r);
        if b < 1e-12 * scale {
            breakdown_at = Some(k);
            break;
        }
        let ak = dot(&rt, &r) / b;
        if ak.abs() < 1e-12 * scale {
            return Err(Error::Breakdown(k));
        }
        sub.push(b);
        sup.push(ak);
        qs.push(r.iter().map(|x| x / b).collect());
        qts.push(rt.iter().map(|x| x / ak).collect());
    }
    let m = diag.len();
    let t = Matrix::from_fn(m, |i, j| {
        if i == j {
            diag[i]
        } else if i == j + 1 {
            sub[j]
        } else if j == i + 1 {
            sup[i]
        } else {
            0.0
        }
    });
    let cols = |vs: &Vec<Vec<f64>>| {
        let mut out = Matrix::zeros(n);
        for (j, v) in vs.iter().enumerate() {
            for i in 0..n {
                out.set(i, j, v[i]);
            }
        }
        out
    };
    let eligible = sub.iter().chain(&sup).all(|&x| x > 0.0);
    Ok(LanczosResult { t, q: cols(&qs), q_tilde: cols(&qts), breakdown_at, eligible })
}

/// Default start `q_1 = q̃_1 = e_0`.
pub fn lanczos_default(a: &Matrix) -> Result<LanczosResult> {
    let mut e0 = vec![0.0; a.dim()];
    e0[0] = 1.0;
    lanczos_tridiagonalize(a, &e0, &e0)
}
