//! The next-to-maximal eigenpair `(lambda_1, g_1)` of a conservative
//! Q-matrix, found by iterating in the orthogonal complement of constants.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::general::{embedding_chain, solve_x, stationary_measure};
use crate::iteration::{inverse_iteration, rqi, InitialPair, IterationOptions, IterationTrace, Norm, Provenance, ShiftedOperator};
use crate::linalg::{Matrix, Measure};
use crate::tri_initials::mu_sequence;
use crate::tridiag::TriQ;

pub const DEFAULT_NEXT_XI: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NextVariant {
    /// `z0 = (vbar0, -Q vtilde0)_mu / ||vbar0||_mu^2`.
    Quotient,
    /// `z0 = 1/epsilon1`.
    Epsilon,
    /// `xi/epsilon1 + (1 - xi) * quotient`.
    Combo(f64),
}

impl NextVariant {
    fn label(&self) -> &'static str {
        match self {
            NextVariant::Quotient => "quotient",
            NextVariant::Epsilon => "epsilon",
            NextVariant::Combo(_) => "combo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NextContext {
    pub mu: Measure,
    pub pi: Vec<f64>,
    /// `phi_0 = 0`, `phi_n = sum_{j<n} 1/(mu_j b_j)`.
    pub phi: Vec<f64>,
    pub v_tilde: Vec<f64>,
    pub v_bar: Vec<f64>,
}

fn check_conservative_matrix(q: &Matrix) -> Result<()> {
    for (i, s) in q.row_sums().into_iter().enumerate() {
        let scale: f64 = q.row(i).iter().map(|x| x.abs()).sum();
        if s.abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::NonConservative { row: i, sum: s });
        }
    }
    Ok(())
}

pub fn next_context(t: &TriQ) -> Result<NextContext> {
    if !t.is_conservative() {
        let row = t.kill().iter().position(|&c| c != 0.0).unwrap_or(0);
        return Err(Error::NonConservative { row, sum: -t.c(row) });
    }
    if t.size() < 2 {
        return Err(Error::InvalidParameter("needs at least two states".into()));
    }
    let mu = mu_sequence(t);
    let w = mu.weights();
    let mut phi = vec![0.0; t.size()];
    for n in 1..t.size() {
        phi[n] = phi[n - 1] + 1.0 / (w[n - 1] * t.b(n - 1));
    }
    let v_tilde: Vec<f64> = phi.iter().map(|p| p.sqrt()).collect();
    let v_bar = mu.center(&v_tilde);
    Ok(NextContext { pi: mu.as_probability(), mu, phi, v_tilde, v_bar })
}

/// `max_i [sum_{j>i} mu_j vbar0(j)] / [mu_i b_i (vtilde0(i+1) - vtilde0(i))]`.
pub fn epsilon1_from(t: &TriQ, ctx: &NextContext) -> Result<f64> {
    let w = ctx.mu.weights();
    let n = t.size();
    let mut tail = 0.0;
    let mut best = f64::NEG_INFINITY;
    for i in (0..n - 1).rev() {
        tail += w[i + 1] * ctx.v_bar[i + 1];
        let gap = ctx.v_tilde[i + 1] - ctx.v_tilde[i];
        if !(gap > 0.0) {
            return Err(Error::NotIncreasing(i));
        }
        best = best.max(tail / (w[i] * t.b(i) * gap));
    }
    Ok(best)
}

pub fn epsilon1(t: &TriQ) -> Result<f64> {
    epsilon1_from(t, &next_context(t)?)
}

fn centered_quotient(mu: &Measure, v_bar: &[f64], neg_q_vt: &[f64]) -> f64 {
    mu.inner_unchecked(v_bar, neg_q_vt) / mu.inner_unchecked(v_bar, v_bar)
}

pub fn initials_next_tridiagonal(t: &TriQ, variant: NextVariant) -> Result<InitialPair> {
    let ctx = next_context(t)?;
    let mu = &ctx.mu;
    let quotient = || centered_quotient(mu, &ctx.v_bar, &t.apply_neg(&ctx.v_tilde));
    let (z0, xi) = match variant {
        NextVariant::Quotient => (quotient(), None),
        NextVariant::Epsilon => (1.0 / epsilon1_from(t, &ctx)?, None),
        NextVariant::Combo(xi) => {
            if !(0.0..=1.0).contains(&xi) {
                return Err(Error::InvalidParameter(format!("xi = {xi} outside [0, 1]")));
            }
            (xi / epsilon1_from(t, &ctx)? + (1.0 - xi) * quotient(), Some(xi))
        }
    };
    let nv = mu.norm(&ctx.v_bar)?;
    Ok(InitialPair {
        v0: ctx.v_bar.iter().map(|x| x / nv).collect(),
        z0,
        measure: Some(ctx.mu.clone()),
        provenance: Provenance::Next { variant: variant.label().into(), xi, r0: None },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NextGeneralMode {
    /// Shift minimizing the centered quotient over the `r` grid.
    Scan,
    /// Shift `lambda_0(Q_1)` of the killed auxiliary matrix.
    Killed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NextGeneralOptions {
    /// Factor applied to `q_NN` to build `Q_1`.
    pub c: f64,
    /// Grid points on `[0, 1]`; the best one is refined by golden-section search.
    pub r_grid: usize,
    pub mode: NextGeneralMode,
}

impl Default for NextGeneralOptions {
    fn default() -> Self {
        NextGeneralOptions { c: 1000.0, r_grid: 1001, mode: NextGeneralMode::Scan }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NextGeneralInitials {
    pub pair: InitialPair,
    pub r0: f64,
    pub scan_z0: f64,
    pub x: Vec<f64>,
    pub mu: Measure,
    pub q1: Matrix,
    /// `lambda_0(-Q_1)`, computed in killed mode.
    pub lambda0_q1: Option<f64>,
}

/// `Q` with its last diagonal entry multiplied by `c`.
pub fn killed_matrix(q: &Matrix, c: f64) -> Matrix {
    let mut q1 = q.clone();
    let n = q.dim() - 1;
    q1.set(n, n, c * q.get(n, n));
    q1
}

pub fn initials_next_general(q: &Matrix, opts: &NextGeneralOptions) -> Result<NextGeneralInitials> {
    check_conservative_matrix(q)?;
    let n = q.dim();
    if n < 2 {
        return Err(Error::InvalidParameter("needs at least two states".into()));
    }
    if !(opts.c > 1.0) {
        return Err(Error::InvalidParameter(format!("c = {} must exceed 1", opts.c)));
    }
    if opts.r_grid < 2 {
        return Err(Error::InvalidParameter("r grid needs at least two points".into()));
    }
    let q1 = killed_matrix(q, opts.c);
    let x = solve_x(&embedding_chain(&q1, &vec![1.0; n])?)?;
    let mu = stationary_measure(q)?;
    let neg_q = q.neg();
    let tail: Vec<f64> = x[1..].iter().map(|xi| (1.0 - xi).max(0.0).sqrt()).collect();

    let objective = |r: f64| {
        let mut vt = Vec::with_capacity(n);
        vt.push(r);
        vt.extend_from_slice(&tail);
        let vb = mu.center(&vt);
        (centered_quotient(&mu, &vb, &neg_q.mul_vec(&vt)), vb)
    };

    let step = 1.0 / (opts.r_grid - 1) as f64;
    let mut best: Option<(f64, f64)> = None;
    for k in 0..opts.r_grid {
        let r = k as f64 * step;
        let (z, _) = objective(r);
        if z.is_finite() && best.is_none_or(|b| z < b.0) {
            best = Some((z, r));
        }
    }
    let (z_grid, r_grid_best) = best.ok_or(Error::DegenerateScan)?;
    let refined = refine_min(|r| objective(r).0, (r_grid_best - step).max(0.0), (r_grid_best + step).min(1.0));
    let r0 = if objective(refined).0 <= z_grid { refined } else { r_grid_best };
    let (scan_z0, vb) = objective(r0);
    let nv = mu.norm(&vb)?;
    let v0: Vec<f64> = vb.iter().map(|x| x / nv).collect();

    let (z0, lambda0_q1, label) = match opts.mode {
        NextGeneralMode::Scan => (scan_z0, None, "scan"),
        NextGeneralMode::Killed => {
            let l = killed_lambda0(&q1)?;
            (l, Some(l), "killed")
        }
    };
    Ok(NextGeneralInitials {
        pair: InitialPair {
            v0,
            z0,
            measure: Some(mu.clone()),
            provenance: Provenance::Next { variant: label.into(), xi: None, r0: Some(r0) },
        },
        r0,
        scan_z0,
        x,
        mu,
        q1,
        lambda0_q1,
    })
}

/// Golden-section search for a minimizer of `f` on `[lo, hi]`.
fn refine_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > 1e-12 {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// `lambda_min(-Q_1)`: inverse iteration at shift 0 from the constant vector,
/// polished by RQI. `-Q_1` is a nonsingular M-matrix, so the Perron direction
/// of its inverse dominates.
fn killed_lambda0(q1: &Matrix) -> Result<f64> {
    let neg = q1.neg();
    let n = q1.dim();
    let opts = IterationOptions { tol: 1e-12, max_iter: 1000, track_vectors: false, ..IterationOptions::default() };
    let warm = inverse_iteration(&neg, 0.0, &vec![1.0; n], &opts)?;
    let opts = IterationOptions { tol: 1e-14, ..opts };
    let trace = rqi(&neg, &warm.final_vector, warm.last_z(), &opts)?;
    Ok(trace.last_z())
}

/// Operator whose solves are projected onto the complement of constants in
/// `L^2(mu)`.
pub struct Centered<'a, O: ?Sized> {
    pub inner: &'a O,
    pub mu: &'a Measure,
}

impl<O: ShiftedOperator + ?Sized> ShiftedOperator for Centered<'_, O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.inner.apply(v)
    }

    fn shifted_solve(&self, z: f64, v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.mu.center(&self.inner.shifted_solve(z, v)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NextTrace {
    pub trace: IterationTrace,
    /// Largest `|(v_k, 1)_mu| / ||v_k||_mu` over the run.
    pub max_drift: f64,
    pub orthogonality_lost: bool,
}

pub const DRIFT_TOL: f64 = 1e-8;

/// Weighted RQI for `lambda_1`. The orthogonality of iterates to constants is
/// monitored; with `reproject` each solve is also re-centered.
pub fn rqi_next<O: ShiftedOperator + ?Sized>(
    op: &O,
    init: &InitialPair,
    mu: &Measure,
    opts: &IterationOptions,
    reproject: bool,
) -> Result<NextTrace> {
    check_len(op.dim(), init.v0.len())?;
    let drift = |v: &[f64]| mu.inner_unchecked(v, &vec![1.0; v.len()]).abs() / mu.inner_unchecked(v, v).sqrt();
    if drift(&init.v0) > 1e-10 {
        return Err(Error::InvalidParameter("initial vector is not centered".into()));
    }
    let opts = IterationOptions {
        norm: Norm::Weighted(mu.clone()),
        sign_check: false,
        track_vectors: true,
        ..opts.clone()
    };
    let trace = if reproject {
        rqi(&Centered { inner: op, mu }, &init.v0, init.z0, &opts)?
    } else {
        rqi(op, &init.v0, init.z0, &opts)?
    };
    let max_drift = trace
        .steps
        .iter()
        .filter_map(|s| s.v.as_deref())
        .map(drift)
        .fold(0.0, f64::max);
    Ok(NextTrace { orthogonality_lost: max_drift > DRIFT_TOL, max_drift, trace })
}
