//! Power iteration, fixed-shift inverse iteration and Rayleigh quotient
//! iteration, each recording an auditable trace.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{norm1, norm2, quotient, sign_normalize, Matrix, Measure};
use crate::tri_initials::mu_sequence;
use crate::tridiag::TriQ;

/// Magnitude below which a component is ignored by the sign check.
pub const SIGN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    L1,
    L2,
    Weighted(Measure),
}

impl Norm {
    pub fn of(&self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => norm1(v),
            Norm::L2 => norm2(v),
            Norm::Weighted(mu) => mu.inner_unchecked(v, v).sqrt(),
        }
    }

    pub fn normalized(&self, v: &[f64]) -> Result<Vec<f64>> {
        if let Norm::Weighted(mu) = self {
            check_len(mu.len(), v.len())?;
        }
        let s = self.of(v);
        if s == 0.0 || !s.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(v.iter().map(|x| x / s).collect())
    }

    /// Weight of the Rayleigh quotient: the measure for weighted norms,
    /// the unit weight otherwise.
    pub fn measure(&self) -> Option<&Measure> {
        match self {
            Norm::Weighted(mu) => Some(mu),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationOptions {
    pub norm: Norm,
    /// Relative tolerance on successive shifts.
    pub tol: f64,
    pub max_iter: usize,
    pub track_vectors: bool,
    /// Flag iterates with strictly mixed signs.
    pub sign_check: bool,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions { norm: Norm::L2, tol: 1e-10, max_iter: 100, track_vectors: true, sign_check: true }
    }
}

impl IterationOptions {
    pub fn with_norm(norm: Norm) -> Self {
        IterationOptions { norm, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    Tridiagonal { xi: Option<f64> },
    UniformChoiceI,
    ChoiceII,
    ChoiceIII { symmetrized: bool },
    General { xi: Option<f64>, anchor: usize, h_skipped: bool, x_skipped: bool },
    Next { variant: String, xi: Option<f64>, r0: Option<f64> },
    Given,
}

/// Initial vector and shift. When `measure` is set, `v0` is normalized in
/// `L^2(measure)` and iterations should use that norm; otherwise in l2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialPair {
    pub v0: Vec<f64>,
    pub z0: f64,
    pub measure: Option<Measure>,
    pub provenance: Provenance,
}

impl InitialPair {
    pub fn given(v0: Vec<f64>, z0: f64) -> Result<Self> {
        Ok(InitialPair { v0: Norm::L2.normalized(&v0)?, z0, measure: None, provenance: Provenance::Given })
    }

    pub fn norm(&self) -> Norm {
        match &self.measure {
            Some(mu) => Norm::Weighted(mu.clone()),
            None => Norm::L2,
        }
    }

    /// Default options with the norm matching this pair.
    pub fn options(&self) -> IterationOptions {
        IterationOptions::with_norm(self.norm())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub k: usize,
    pub z: f64,
    pub v: Option<Vec<f64>>,
    pub residual: f64,
    pub mixed_sign: bool,
    /// The shift used to produce this step was perturbed off a singular value.
    pub perturbed: bool,
    /// Entrywise range of `w_k / v_{k-1}` (inverse iteration only).
    pub ratio_range: Option<(f64, f64)>,
}

impl Step {
    pub fn flags(&self) -> Vec<&'static str> {
        let mut f = Vec::new();
        if self.mixed_sign {
            f.push("mixed_sign");
        }
        if self.perturbed {
            f.push("perturbed");
        }
        f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converged { step: usize },
    MaxIter,
    SingularShift { step: usize },
}

/// Overall classification of a run; a collapse takes precedence over the
/// engine outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIter,
    Collapse(usize),
    SingularShift(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub steps: Vec<Step>,
    pub outcome: Outcome,
    pub collapse_at: Option<usize>,
    pub final_vector: Vec<f64>,
}

impl IterationTrace {
    pub fn z_values(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.z).collect()
    }

    pub fn z(&self, k: usize) -> Option<f64> {
        self.steps.get(k).map(|s| s.z)
    }

    pub fn last_z(&self) -> f64 {
        self.steps.last().map(|s| s.z).unwrap_or(f64::NAN)
    }

    pub fn vector(&self, k: usize) -> Option<&[f64]> {
        self.steps.get(k).and_then(|s| s.v.as_deref())
    }

    pub fn converged(&self) -> bool {
        matches!(self.outcome, Outcome::Converged { .. })
    }

    pub fn status(&self) -> Status {
        if let Some(k) = self.collapse_at {
            return Status::Collapse(k);
        }
        match self.outcome {
            Outcome::Converged { .. } => Status::Converged,
            Outcome::MaxIter => Status::MaxIter,
            Outcome::SingularShift { step } => Status::SingularShift(step),
        }
    }

    /// Final `(z, v)`.
    pub fn eigenpair(&self) -> (f64, Vec<f64>) {
        (self.last_z(), self.final_vector.clone())
    }
}

/// Linear operator `M` able to solve `(M - z I) w = v`.
pub trait ShiftedOperator {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[f64]) -> Vec<f64>;
    fn shifted_solve(&self, z: f64, v: &[f64]) -> Result<Vec<f64>>;
}

impl ShiftedOperator for Matrix {
    fn dim(&self) -> usize {
        Matrix::dim(self)
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.mul_vec(v)
    }

    fn shifted_solve(&self, z: f64, v: &[f64]) -> Result<Vec<f64>> {
        crate::linalg::dense_shifted_solve(self, z, v)
    }
}

/// `-Q` for a tridiagonal `Q`, solved with the O(N) banded path.
#[derive(Debug, Clone, Copy)]
pub struct NegTri<'a>(pub &'a TriQ);

impl ShiftedOperator for NegTri<'_> {
    fn dim(&self) -> usize {
        self.0.size()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.0.apply_neg(v)
    }

    fn shifted_solve(&self, z: f64, v: &[f64]) -> Result<Vec<f64>> {
        self.0.solve_neg_shifted(z, v)
    }
}

fn mixed_sign(v: &[f64]) -> bool {
    let pos = v.iter().any(|&x| x > SIGN_EPS);
    let neg = v.iter().any(|&x| x < -SIGN_EPS);
    pos && neg
}

fn residual(mv: &[f64], v: &[f64], z: f64, norm: &Norm) -> f64 {
    let r: Vec<f64> = mv.iter().zip(v).map(|(a, b)| a - z * b).collect();
    norm.of(&r) / norm.of(v)
}

fn close(z: f64, prev: f64, tol: f64) -> bool {
    (z - prev).abs() <= tol * z.abs().max(1.0)
}

struct Recorder<'o> {
    opts: &'o IterationOptions,
    steps: Vec<Step>,
    collapse_at: Option<usize>,
}

impl<'o> Recorder<'o> {
    fn new(opts: &'o IterationOptions) -> Self {
        Recorder { opts, steps: Vec::new(), collapse_at: None }
    }

    fn push(&mut self, k: usize, z: f64, v: &[f64], residual: f64, perturbed: bool, ratio_range: Option<(f64, f64)>) {
        let mixed = self.opts.sign_check && mixed_sign(v);
        if mixed && self.collapse_at.is_none() {
            self.collapse_at = Some(k);
        }
        self.steps.push(Step {
            k,
            z,
            v: self.opts.track_vectors.then(|| v.to_vec()),
            residual,
            mixed_sign: mixed,
            perturbed,
            ratio_range,
        });
    }

    fn finish(self, outcome: Outcome, v: Vec<f64>) -> IterationTrace {
        IterationTrace { steps: self.steps, outcome, collapse_at: self.collapse_at, final_vector: v }
    }
}

/// `v_k = A v_{k-1} / ||A v_{k-1}||`, `z_k = ||A v_k||` in the configured norm.
pub fn power_iteration(a: &Matrix, v0: &[f64], opts: &IterationOptions) -> Result<IterationTrace> {
    opts.validate()?;
    check_len(a.dim(), v0.len())?;
    if let Some(i) = v0.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::NonpositiveVector { index: i, value: v0[i] });
    }
    let norm = &opts.norm;
    let mut v = norm.normalized(v0)?;
    let mut rec = Recorder::new(opts);
    let mut prev = f64::NAN;
    for k in 0..=opts.max_iter {
        let av = a.mul_vec(&v);
        let z = norm.of(&av);
        rec.push(k, z, &v, residual(&av, &v, z, norm), false, None);
        if k > 0 && close(z, prev, opts.tol) {
            return Ok(rec.finish(Outcome::Converged { step: k }, v));
        }
        if k == opts.max_iter {
            break;
        }
        if z == 0.0 {
            return Err(Error::ZeroVector);
        }
        v = av.iter().map(|x| x / z).collect();
        prev = z;
    }
    Ok(rec.finish(Outcome::MaxIter, v))
}

/// Solves `(M - z) w = v`, retrying once with a slightly perturbed shift.
fn solve_with_retry<O: ShiftedOperator + ?Sized>(op: &O, z: f64, v: &[f64]) -> Result<(Vec<f64>, bool)> {
    match op.shifted_solve(z, v) {
        Ok(w) if w.iter().all(|x| x.is_finite()) => Ok((w, false)),
        Ok(_) | Err(Error::SingularShift { .. }) => {
            let z2 = z + 1e-12 * (1.0 + z.abs());
            let w = op.shifted_solve(z2, v)?;
            if w.iter().all(|x| x.is_finite()) {
                Ok((w, true))
            } else {
                Err(Error::SingularShift { shift: z2, column: 0 })
            }
        }
        Err(e) => Err(e),
    }
}

/// Fixed-shift inverse iteration `v_k ∝ (M - z I)^{-1} v_{k-1}`. The recorded
/// `z_k` is the Rayleigh quotient of `v_k`; `ratio_range` tracks the entrywise
/// ratios `w_k / v_{k-1}`, which tend to `1 / (lambda - z)`.
pub fn inverse_iteration<O: ShiftedOperator + ?Sized>(
    op: &O,
    z: f64,
    v0: &[f64],
    opts: &IterationOptions,
) -> Result<IterationTrace> {
    opts.validate()?;
    check_len(op.dim(), v0.len())?;
    let norm = &opts.norm;
    let mu = norm.measure();
    let mut v = norm.normalized(v0)?;
    let mut rec = Recorder::new(opts);
    let mv = op.apply(&v);
    let mut zk = quotient(&v, &mv, mu)?;
    rec.push(0, zk, &v, residual(&mv, &v, zk, norm), false, None);
    for k in 1..=opts.max_iter {
        let w = match op.shifted_solve(z, &v) {
            Ok(w) => w,
            Err(Error::SingularShift { .. }) => {
                return Ok(rec.finish(Outcome::SingularShift { step: k }, v));
            }
            Err(e) => return Err(e),
        };
        let ratios = w.iter().zip(&v).filter(|(_, b)| b.abs() > SIGN_EPS).map(|(a, b)| a / b);
        let range = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
        v = norm.normalized(&w)?;
        let mv = op.apply(&v);
        let prev = zk;
        zk = quotient(&v, &mv, mu)?;
        rec.push(k, zk, &v, residual(&mv, &v, zk, norm), false, Some(range));
        if close(zk, prev, opts.tol) {
            return Ok(rec.finish(Outcome::Converged { step: k }, v));
        }
    }
    Ok(rec.finish(Outcome::MaxIter, v))
}

/// Rayleigh quotient iteration `(M - z_{k-1} I) w_k = v_{k-1}`,
/// `v_k = w_k / ||w_k||`, `z_k = (v_k, M v_k)_mu` where `mu` is the measure of
/// a weighted norm and the unit weight otherwise.
pub fn rqi<O: ShiftedOperator + ?Sized>(
    op: &O,
    v0: &[f64],
    z0: f64,
    opts: &IterationOptions,
) -> Result<IterationTrace> {
    opts.validate()?;
    check_len(op.dim(), v0.len())?;
    if !z0.is_finite() {
        return Err(Error::InvalidParameter(format!("initial shift {z0} is not finite")));
    }
    let norm = &opts.norm;
    let mu = norm.measure();
    let mut v = norm.normalized(v0)?;
    let mut rec = Recorder::new(opts);
    let mv = op.apply(&v);
    let mut z = z0;
    let res = residual(&mv, &v, z, norm);
    rec.push(0, z, &v, res, false, None);
    if res <= opts.tol * z.abs().max(1.0) {
        return Ok(rec.finish(Outcome::Converged { step: 0 }, v));
    }
    for k in 1..=opts.max_iter {
        let (w, perturbed) = match solve_with_retry(op, z, &v) {
            Ok(x) => x,
            Err(Error::SingularShift { .. }) => return Ok(rec.finish(Outcome::SingularShift { step: k }, v)),
            Err(e) => return Err(e),
        };
        let mut next = norm.normalized(&w)?;
        sign_normalize(&mut next);
        let mv = op.apply(&next);
        let zk = quotient(&next, &mv, mu)?;
        if !zk.is_finite() {
            return Ok(rec.finish(Outcome::SingularShift { step: k }, v));
        }
        v = next;
        let res = residual(&mv, &v, zk, norm);
        rec.push(k, zk, &v, res, perturbed, None);
        let done = close(zk, z, opts.tol) || res <= opts.tol * zk.abs().max(1.0);
        z = zk;
        if done {
            return Ok(rec.finish(Outcome::Converged { step: k }, v));
        }
    }
    Ok(rec.finish(Outcome::MaxIter, v))
}

/// `rqi` seeded from an [`InitialPair`], using the pair's norm.
pub fn rqi_from(op: &(impl ShiftedOperator + ?Sized), init: &InitialPair, opts: &IterationOptions) -> Result<IterationTrace> {
    rqi(op, &init.v0, init.z0, opts)
}

/// `II(f)(i) = (1/f_i) sum_{j >= i} 1/(mu_j b_j) sum_{k <= j} mu_k f_k` for a
/// birth–death matrix killed only at the last state (`b_N := c_N`).
pub fn ii_operator(t: &TriQ, f: &[f64]) -> Result<Vec<f64>> {
    check_len(t.size(), f.len())?;
    if !t.is_case1() || t.c(t.last()) <= 0.0 {
        return Err(Error::InvalidParameter("II operator needs killing at the last state only".into()));
    }
    if let Some(i) = f.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::NonpositiveVector { index: i, value: f[i] });
    }
    let mu = mu_sequence(t);
    let mu = mu.weights();
    let n = t.size();
    let b = |j: usize| if j == n - 1 { t.c(j) } else { t.b(j) };
    let mut inner = vec![0.0; n];
    let mut acc = 0.0;
    for j in 0..n {
        acc += mu[j] * f[j];
        inner[j] = acc / (mu[j] * b(j));
    }
    let mut out = vec![0.0; n];
    let mut tail = 0.0;
    for i in (0..n).rev() {
        tail += inner[i];
        out[i] = tail / f[i];
    }
    Ok(out)
}
