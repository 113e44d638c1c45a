//! Dense vectors and matrices, Q-matrix classification, weighted inner
//! products and a row-pivoted shifted solver.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

const PIVOT_TOL: f64 = 1e-14;

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m.set(i, i, x);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::NotSquare);
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare);
            }
            data.extend(row);
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        Ok(Matrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.n + j] = x;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n);
        (0..self.n).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn neg(&self) -> Self {
        Matrix { n: self.n, data: self.data.iter().map(|x| -x).collect() }
    }

    /// `self + s I`.
    pub fn add_identity(&self, s: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] += s;
        }
        m
    }

    pub fn scaled(&self, s: f64) -> Self {
        Matrix { n: self.n, data: self.data.iter().map(|x| s * x).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Infinity norm (maximal absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `Diag(h)^{-1} M Diag(h)`.
    pub fn h_transform(&self, h: &[f64]) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j) * h[j] / h[i])
    }

    /// Symmetric permutation: entry `(i, j)` of the result is `M[p[i], p[j]]`.
    pub fn permuted(&self, p: &[usize]) -> Self {
        Self::from_fn(self.n, |i, j| self.get(p[i], p[j]))
    }

    pub fn mat_mul(&self, other: &Matrix) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a != 0.0 {
                    for j in 0..n {
                        out.data[i * n + j] += a * other.get(k, j);
                    }
                }
            }
        }
        out
    }

    /// Strong connectivity of the graph `i -> j` whenever `i != j` and `M[i, j] > 0`.
    pub fn is_irreducible(&self) -> bool {
        let n = self.n;
        if n == 1 {
            return true;
        }
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let w = if forward { self.get(i, j) } else { self.get(j, i) };
                    if j != i && w > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    /// Solves `self x = b` by row-pivoted elimination.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        dense_shifted_solve(self, 0.0, b).map_err(|e| match e {
            Error::SingularShift { .. } => Error::SingularSystem("dense solve"),
            other => other,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixClass {
    QMatrix,
    Nonnegative,
    Shiftable,
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub class: MatrixClass,
    pub irreducible: bool,
}

impl Classification {
    /// Usable as input to the maximal-eigenpair algorithms.
    pub fn is_valid_seed(&self) -> bool {
        self.class != MatrixClass::Invalid && self.irreducible
    }
}

/// Classifies `m`. A matrix that is both a Q-matrix and nonnegative (only the
/// zero matrix) is reported as a Q-matrix.
pub fn validate_q(m: &Matrix) -> Classification {
    let n = m.dim();
    let mut offdiag_ok = true;
    let mut all_nonneg = true;
    for i in 0..n {
        for j in 0..n {
            let x = m.get(i, j);
            if x < 0.0 {
                all_nonneg = false;
                if i != j {
                    offdiag_ok = false;
                }
            }
        }
    }
    let class = if !offdiag_ok {
        MatrixClass::Invalid
    } else if m.row_sums().iter().all(|&s| s <= 0.0) {
        MatrixClass::QMatrix
    } else if all_nonneg {
        MatrixClass::Nonnegative
    } else {
        MatrixClass::Shiftable
    };
    Classification { class, irreducible: offdiag_ok && m.is_irreducible() }
}

/// Returns `(Q, m)` with `Q = A - m I` and `m` the maximal row sum when that
/// is positive; otherwise `m = 0` and `Q = A`.
pub fn shift_to_q(a: &Matrix) -> Result<(Matrix, f64)> {
    check_offdiag(a)?;
    let m = a.row_sums().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if m > 0.0 {
        Ok((a.add_identity(-m), m))
    } else {
        Ok((a.clone(), 0.0))
    }
}

pub(crate) fn check_offdiag(a: &Matrix) -> Result<()> {
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            if i != j && a.get(i, j) < 0.0 {
                return Err(Error::NegativeOffDiagonal { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Positive weights defining `L^2(mu)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    weights: Vec<f64>,
}

impl Measure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::ZeroVector);
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite(i));
            }
            if w <= 0.0 {
                return Err(Error::NonpositiveVector { index: i, value: w });
            }
        }
        Ok(Measure { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Measure { weights: vec![1.0; n] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn as_probability(&self) -> Vec<f64> {
        let t = self.total();
        self.weights.iter().map(|w| w / t).collect()
    }

    /// `(u, v)_mu`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        check_len(self.len(), u.len())?;
        check_len(self.len(), v.len())?;
        Ok(self.inner_unchecked(u, v))
    }

    pub fn norm(&self, u: &[f64]) -> Result<f64> {
        Ok(self.inner(u, u)?.sqrt())
    }

    pub(crate) fn inner_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weights.iter().zip(u).zip(v).map(|((w, a), b)| w * a * b).sum()
    }

    /// `u - (u, 1)_mu / mu(E)`, the component orthogonal to constants.
    pub fn center(&self, u: &[f64]) -> Vec<f64> {
        let mean = self.weights.iter().zip(u).map(|(w, x)| w * x).sum::<f64>() / self.total();
        u.iter().map(|x| x - mean).collect()
    }
}

pub fn weighted_inner_product(u: &[f64], v: &[f64], mu: &Measure) -> Result<f64> {
    mu.inner(u, v)
}

pub fn weighted_norm(u: &[f64], mu: &Measure) -> Result<f64> {
    mu.norm(u)
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm1(u: &[f64]) -> f64 {
    u.iter().map(|x| x.abs()).sum()
}

pub fn norm2(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

pub fn norm_inf(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Scales `v` so its largest-magnitude component is positive.
pub fn sign_normalize(v: &mut [f64]) {
    let mut k = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[k].abs() {
            k = i;
        }
    }
    if v.get(k).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// `(v, M v)_mu / (v, v)_mu`; `mu = None` means the unit measure.
pub fn rayleigh_quotient(v: &[f64], m: &Matrix, mu: Option<&Measure>) -> Result<f64> {
    check_len(m.dim(), v.len())?;
    let mv = m.mul_vec(v);
    quotient(v, &mv, mu)
}

pub(crate) fn quotient(v: &[f64], mv: &[f64], mu: Option<&Measure>) -> Result<f64> {
    let (num, den) = match mu {
        Some(mu) => {
            check_len(mu.len(), v.len())?;
            (mu.inner_unchecked(v, mv), mu.inner_unchecked(v, v))
        }
        None => (dot(v, mv), dot(v, v)),
    };
    if den == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(num / den)
}

/// Solves `(M - z I) w = v` with row-pivoted Gaussian elimination followed
/// by up to three steps of iterative refinement with compensated residuals.
pub fn dense_shifted_solve(m: &Matrix, z: f64, v: &[f64]) -> Result<Vec<f64>> {
    check_len(m.dim(), v.len())?;
    let lu = Lu::factor(m, z)?;
    let mut w = lu.solve(v);
    let mut last = f64::INFINITY;
    for _ in 0..3 {
        let d = lu.solve(&residual(m, z, v, &w));
        let (dn, wn) = (norm_inf(&d), norm_inf(&w));
        if !dn.is_finite() || dn > 0.5 * wn || dn > 0.5 * last {
            break;
        }
        w.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
        if dn <= f64::EPSILON * wn {
            break;
        }
        last = dn;
    }
    Ok(w)
}

/// `v - (M - z I) w` accumulated with error-free transformations.
fn residual(m: &Matrix, z: f64, v: &[f64], w: &[f64]) -> Vec<f64> {
    let n = m.dim();
    (0..n)
        .map(|i| {
            let mut acc = Compensated::new(v[i]);
            for j in 0..n {
                acc.add_product(-m.get(i, j), w[j]);
            }
            acc.add_product(z, w[i]);
            acc.value()
        })
        .collect()
}

/// Dot-product accumulator with twice-working-precision error terms.
struct Compensated {
    sum: f64,
    err: f64,
}

impl Compensated {
    fn new(x: f64) -> Self {
        Compensated { sum: x, err: 0.0 }
    }

    fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        let pe = a.mul_add(b, -p);
        let t = self.sum + p;
        let bp = t - self.sum;
        self.err += (self.sum - (t - bp)) + (p - bp) + pe;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.err
    }
}

struct Lu {
    n: usize,
    a: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(m: &Matrix, z: f64) -> Result<Self> {
        let n = m.dim();
        let mut a = m.data.clone();
        for i in 0..n {
            a[i * n + i] -= z;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut scale: Vec<f64> = (0..n)
            .map(|i| a[i * n..(i + 1) * n].iter().fold(0.0, |s: f64, x| s.max(x.abs())))
            .collect();
        for col in 0..n {
            let mut p = col;
            for r in col + 1..n {
                if a[r * n + col].abs() > a[p * n + col].abs() {
                    p = r;
                }
            }
            let pivot = a[p * n + col];
            if pivot == 0.0 || pivot.abs() < PIVOT_TOL * scale[p] || !pivot.is_finite() {
                return Err(Error::SingularShift { shift: z, column: col });
            }
            if p != col {
                for j in 0..n {
                    a.swap(p * n + j, col * n + j);
                }
                perm.swap(p, col);
                scale.swap(p, col);
            }
            for r in col + 1..n {
                let f = a[r * n + col] / pivot;
                a[r * n + col] = f;
                if f != 0.0 {
                    for j in col + 1..n {
                        a[r * n + j] -= f * a[col * n + j];
                    }
                }
            }
        }
        Ok(Lu { n, a, perm })
    }

    fn solve(&self, v: &[f64]) -> Vec<f64> {
        let (n, a) = (self.n, &self.a);
        let mut b: Vec<f64> = self.perm.iter().map(|&p| v[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| a[i * n + j] * b[j]).sum();
            b[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i * n + j] * b[j]).sum();
            b[i] = (b[i] - s) / a[i * n + i];
        }
        b
    }
}
