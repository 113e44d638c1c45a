//! Initial pairs for general matrices: uniform choices, the tridiagonal
//! comparison shift, and the H-transform / hitting-probability construction.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::iteration::{InitialPair, Provenance};
use crate::linalg::{check_offdiag, norm2, shift_to_q, Matrix, Measure};
use crate::tri_initials::{initials_tridiagonal, TriMode};
use crate::tridiag::TriQ;

/// Uniform-vector seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UniformChoice {
    /// `z0 = max_i A_i`, an upper bound of the Perron root.
    I,
    /// `z0 = v0* A v0`; prone to converging to a non-maximal eigenvalue.
    II,
}

/// Seed for iterating directly on `A`.
pub fn initials_uniform(a: &Matrix, choice: UniformChoice) -> Result<InitialPair> {
    let n = a.dim();
    let v0 = vec![1.0 / (n as f64).sqrt(); n];
    let (z0, provenance) = match choice {
        UniformChoice::I => {
            check_offdiag(a)?;
            (a.row_sums().into_iter().fold(f64::NEG_INFINITY, f64::max), Provenance::UniformChoiceI)
        }
        UniformChoice::II => (crate::linalg::rayleigh_quotient(&v0, a, None)?, Provenance::ChoiceII),
    };
    Ok(InitialPair { v0, z0, measure: None, provenance })
}

/// Shift from the tridiagonal part of `A` (of `(A + A*)/2` when `symmetrize`):
/// `m - 1/delta1`, where `m` is the maximal row sum of that part.
pub fn choice3_z0(a: &Matrix, symmetrize: bool) -> Result<f64> {
    let n = a.dim();
    let part = Matrix::from_fn(n, |i, j| {
        if i.abs_diff(j) > 1 {
            0.0
        } else if symmetrize {
            0.5 * (a.get(i, j) + a.get(j, i))
        } else {
            a.get(i, j)
        }
    });
    for i in 0..n.saturating_sub(1) {
        if !(part.get(i, i + 1) > 0.0 && part.get(i + 1, i) > 0.0) {
            return Err(Error::ZeroCoupling(i, i + 1));
        }
    }
    let (q, m) = shift_to_q(&part)?;
    let t = TriQ::from_matrix(&q)?;
    let pair = initials_tridiagonal(&t, TriMode::Pure)?;
    Ok(m - pair.z0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HSolution {
    pub h: Vec<f64>,
    /// Rows `0..N-1` were conservative, so `h ≡ 1` without solving.
    pub skipped: bool,
    /// The solved `h` had a nonpositive component and was replaced by ones.
    pub fallback: bool,
}

/// `h_0 = 1` and rows `0..N-1` of `Q h = 0`.
pub fn solve_h(q: &Matrix) -> Result<HSolution> {
    let n = q.dim();
    let sums = q.row_sums();
    let tol = |i: usize| 1e-12 * q.row(i).iter().map(|x| x.abs()).sum::<f64>();
    if n == 1 || (0..n - 1).all(|i| sums[i].abs() <= tol(i)) {
        return Ok(HSolution { h: vec![1.0; n], skipped: true, fallback: false });
    }
    let m = Matrix::from_fn(n - 1, |i, j| q.get(i, j + 1));
    let rhs: Vec<f64> = (0..n - 1).map(|i| -q.get(i, 0)).collect();
    let rest = m.solve(&rhs).map_err(|_| Error::SingularSystem("h equation"))?;
    let mut h = Vec::with_capacity(n);
    h.push(1.0);
    h.extend(rest);
    if h.iter().any(|&x| !(x > 0.0)) {
        return Ok(HSolution { h: vec![1.0; n], skipped: false, fallback: true });
    }
    Ok(HSolution { h, skipped: false, fallback: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingChain {
    pub p: Matrix,
    pub anchor: usize,
    /// Rows whose sum is below one, with their sums.
    pub substochastic_rows: Vec<(usize, f64)>,
}

/// `P = Diag((q_i h_i)^{-1}) Q Diag(h) + I` with a zero diagonal.
pub fn embedding_chain(q: &Matrix, h: &[f64]) -> Result<EmbeddingChain> {
    let n = q.dim();
    check_len(n, h.len())?;
    for i in 0..n {
        if !(q.get(i, i) < 0.0) {
            return Err(Error::ZeroDiagonal(i));
        }
    }
    let p = Matrix::from_fn(n, |i, j| if i == j { 0.0 } else { q.get(i, j) * h[j] / (-q.get(i, i) * h[i]) });
    let substochastic_rows = p
        .row_sums()
        .into_iter()
        .enumerate()
        .filter(|&(_, s)| s < 1.0 - 1e-12)
        .collect();
    Ok(EmbeddingChain { p, anchor: 0, substochastic_rows })
}

impl EmbeddingChain {
    pub fn with_anchor(mut self, anchor: usize) -> Self {
        self.anchor = anchor;
        self
    }
}

/// `x_anchor = 1` and `x_i = sum_j p_ij x_j` for `i != anchor`.
pub fn solve_x(chain: &EmbeddingChain) -> Result<Vec<f64>> {
    let n = chain.p.dim();
    let k = chain.anchor;
    if k >= n {
        return Err(Error::InvalidParameter(format!("anchor {k} out of range")));
    }
    let idx: Vec<usize> = (0..n).filter(|&i| i != k).collect();
    let mut x = vec![1.0; n];
    if idx.is_empty() {
        return Ok(x);
    }
    let m = Matrix::from_fn(idx.len(), |r, c| {
        let (i, j) = (idx[r], idx[c]);
        (if i == j { 1.0 } else { 0.0 }) - chain.p.get(i, j)
    });
    let rhs: Vec<f64> = idx.iter().map(|&i| chain.p.get(i, k)).collect();
    let sol = m.solve(&rhs).map_err(|_| Error::SingularSystem("hitting equation"))?;
    for (r, &i) in idx.iter().enumerate() {
        x[i] = sol[r];
    }
    Ok(x)
}

/// Starting from `E_0 = {N}`, grows level sets along positive entries
/// `a_ij` (`i` new, `j` in the previous level) and returns the state of the
/// last level attaining the minimal connecting entry. Ties go to the
/// smallest index.
pub fn level_set_anchor(a: &Matrix) -> Result<usize> {
    let n = a.dim();
    let mut assigned = vec![false; n];
    assigned[n - 1] = true;
    let mut prev = vec![n - 1];
    let mut last_pair: (Vec<usize>, Vec<usize>) = (vec![n - 1], vec![]);
    let mut count = 1;
    loop {
        let next: Vec<usize> = (0..n)
            .filter(|&i| !assigned[i] && prev.iter().any(|&j| a.get(i, j) > 0.0))
            .collect();
        if next.is_empty() {
            break;
        }
        for &i in &next {
            assigned[i] = true;
        }
        count += next.len();
        last_pair = (next.clone(), prev);
        prev = next;
    }
    if count < n {
        return Err(Error::Reducible);
    }
    let (em, em1) = last_pair;
    if em1.is_empty() {
        return Ok(em[0]);
    }
    let mut best = (f64::INFINITY, usize::MAX);
    for &i in &em {
        for &j in &em1 {
            let w = a.get(i, j);
            if w > 0.0 && (w < best.0 || (w == best.0 && i < best.1)) {
                best = (w, i);
            }
        }
    }
    Ok(best.1)
}

/// Solves `mu M = 0` with `mu_0 = 1` using columns `0..N-1`.
pub fn stationary_measure(m: &Matrix) -> Result<Measure> {
    let n = m.dim();
    if n == 1 {
        return Measure::new(vec![1.0]);
    }
    let sys = Matrix::from_fn(n - 1, |j, i| m.get(i + 1, j));
    let rhs: Vec<f64> = (0..n - 1).map(|j| -m.get(0, j)).collect();
    let rest = sys.solve(&rhs).map_err(|_| Error::SingularSystem("stationary equation"))?;
    let mut mu = vec![1.0];
    mu.extend(rest);
    Measure::new(mu)
}

/// Stationary measure of the H-transform with the last-row killing removed.
pub fn stationary_mu(q: &Matrix, h: &[f64]) -> Result<Measure> {
    check_len(q.dim(), h.len())?;
    let mut qt = q.h_transform(h);
    let n = q.dim();
    let s: f64 = qt.row(n - 1).iter().sum();
    qt.set(n - 1, n - 1, qt.get(n - 1, n - 1) - s);
    stationary_measure(&qt)
}

/// `(1/(1 - x_1)) max_n [ sqrt(x_n) sum_{k<=n} mu_k sqrt(x_k)
///                       + x_n^{-1/2} sum_{j>n} mu_j x_j^{3/2} ]`.
pub fn delta1_general(x: &[f64], mu: &Measure) -> Result<f64> {
    check_len(mu.len(), x.len())?;
    if x.len() < 2 {
        return Err(Error::InvalidParameter("needs at least two states".into()));
    }
    if !(x[1] < 1.0) {
        return Err(Error::DegenerateHitting(x[1]));
    }
    let w = mu.weights();
    let n = x.len();
    let mut suffix = vec![0.0; n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1] + w[j] * x[j].powf(1.5);
    }
    let mut prefix = 0.0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..n {
        let s = x[k].sqrt();
        prefix += w[k] * s;
        best = best.max(s * prefix + suffix[k + 1] / s);
    }
    Ok(best / (1.0 - x[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    Index(usize),
    LevelSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneralMode {
    /// `z0 = v0* (-Q) v0` with `v0` normalized in l2.
    Auto,
    /// `z0 = 1/delta1` with `v0` normalized in l2.
    Delta1,
    /// `z0 = xi/delta1 + (1 - xi)(v0, -Q v0)_mu` with `v0` normalized in `L^2(mu)`.
    Xi(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralOptions {
    pub mode: GeneralMode,
    pub anchor: Anchor,
    /// Ratio below which the hitting probabilities are replaced by ones.
    pub skip_threshold: f64,
}

impl Default for GeneralOptions {
    fn default() -> Self {
        GeneralOptions { mode: GeneralMode::Auto, anchor: Anchor::Index(0), skip_threshold: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingProfile {
    pub x: Vec<f64>,
    pub h: Vec<f64>,
    pub mu: Measure,
}

/// Everything produced by the general construction. `pair` seeds iteration on
/// `-Q`; the corresponding shift for `A` is `m - z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralInitials {
    pub pair: InitialPair,
    pub q: Matrix,
    pub m: f64,
    pub profile: HittingProfile,
    pub chain: EmbeddingChain,
    pub delta1: Option<f64>,
    pub h_fallback: bool,
}

/// Step-2 jump test: killing seen from the last state is small compared to
/// its transitions.
fn hitting_skip(q: &Matrix, h: &[f64], threshold: f64) -> bool {
    let n = q.dim();
    let last = n - 1;
    let c_n = -q.row(last).iter().sum::<f64>();
    let (mut lhs, mut rhs) = (c_n, 0.0);
    for j in 0..last {
        lhs += q.get(last, j) * (1.0 - h[j] / h[last]);
        rhs += q.get(last, j) * h[j] / h[last];
    }
    lhs < threshold * rhs
}

pub fn initials_general(a: &Matrix, opts: &GeneralOptions) -> Result<GeneralInitials> {
    let n = a.dim();
    if n < 2 {
        return Err(Error::InvalidParameter("needs at least two states".into()));
    }
    if !a.is_irreducible() {
        return Err(Error::Reducible);
    }
    let (q, m) = shift_to_q(a)?;
    let hs = solve_h(&q)?;
    let h = hs.h;
    let anchor = match opts.anchor {
        Anchor::Index(i) if i < n => i,
        Anchor::Index(i) => return Err(Error::InvalidParameter(format!("anchor {i} out of range"))),
        Anchor::LevelSet => level_set_anchor(a)?,
    };
    let chain = embedding_chain(&q, &h)?.with_anchor(anchor);
    let x_skipped = !hs.skipped && hitting_skip(&q, &h, opts.skip_threshold);
    let x = if x_skipped { vec![1.0; n] } else { solve_x(&chain)? };
    let mu = stationary_mu(&q, &h)?;
    let vt: Vec<f64> = h.iter().zip(&x).map(|(hi, xi)| hi * xi.max(0.0).sqrt()).collect();
    let neg_q = q.neg();
    let provenance = |xi| Provenance::General { xi, anchor, h_skipped: hs.skipped, x_skipped };
    let (pair, delta1) = match opts.mode {
        GeneralMode::Auto => {
            let nv = norm2(&vt);
            let v0: Vec<f64> = vt.iter().map(|v| v / nv).collect();
            let z0 = crate::linalg::rayleigh_quotient(&v0, &neg_q, None)?;
            (InitialPair { v0, z0, measure: None, provenance: provenance(None) }, None)
        }
        GeneralMode::Delta1 => {
            let d = delta1_general(&x, &mu)?;
            let nv = norm2(&vt);
            let v0: Vec<f64> = vt.iter().map(|v| v / nv).collect();
            (InitialPair { v0, z0: 1.0 / d, measure: None, provenance: provenance(Some(1.0)) }, Some(d))
        }
        GeneralMode::Xi(xi) => {
            if !(0.0..=1.0).contains(&xi) {
                return Err(Error::InvalidParameter(format!("xi = {xi} outside [0, 1]")));
            }
            let d = delta1_general(&x, &mu)?;
            let nv = mu.norm(&vt)?;
            let v0: Vec<f64> = vt.iter().map(|v| v / nv).collect();
            let rq = mu.inner(&v0, &neg_q.mul_vec(&v0))?;
            let z0 = xi / d + (1.0 - xi) * rq;
            (InitialPair { v0, z0, measure: Some(mu.clone()), provenance: provenance(Some(xi)) }, Some(d))
        }
    };
    Ok(GeneralInitials {
        pair,
        q,
        m,
        profile: HittingProfile { x, h, mu },
        chain,
        delta1,
        h_fallback: hs.fallback,
    })
}
