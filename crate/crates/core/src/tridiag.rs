//! Tridiagonal Q-matrices (birth–death generators with killing) and their
//! O(N) shifted solver.

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{check_len, Error, Result};
use crate::linalg::Matrix;

const PIVOT_TOL: f64 = 1e-14;

/// Tridiagonal Q-matrix on states `0..=N` with down rates `a`, up rates `b`
/// and killing rates `c`. Row `i` is `(a_i, -(a_i + b_i + c_i), b_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriQ {
    /// `a[0] = 0`, `a[i] > 0` for `1 <= i <= N`.
    a: Vec<f64>,
    /// `b[N] = 0`, `b[i] > 0` for `0 <= i < N`.
    b: Vec<f64>,
    c: Vec<f64>,
}

impl TriQ {
    /// `down = (a_1..a_N)`, `up = (b_0..b_{N-1})`, `kill = (c_0..c_N)`.
    pub fn new(down: Vec<f64>, up: Vec<f64>, kill: Vec<f64>) -> Result<Self> {
        if kill.is_empty() {
            return Err(Error::InvalidTridiagonal("no states".into()));
        }
        let n = kill.len() - 1;
        if down.len() != n || up.len() != n {
            return Err(Error::InvalidTridiagonal(format!(
                "expected {n} down and up rates, got {} and {}",
                down.len(),
                up.len()
            )));
        }
        for (i, &x) in down.iter().enumerate() {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidTridiagonal(format!("a_{} = {x} must be positive", i + 1)));
            }
        }
        for (i, &x) in up.iter().enumerate() {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidTridiagonal(format!("b_{i} = {x} must be positive")));
            }
        }
        for (i, &x) in kill.iter().enumerate() {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::InvalidTridiagonal(format!("c_{i} = {x} must be nonnegative")));
            }
        }
        let mut a = Vec::with_capacity(n + 1);
        a.push(0.0);
        a.extend(down);
        let mut b = up;
        b.push(0.0);
        Ok(TriQ { a, b, c: kill })
    }

    /// Reads a tridiagonal Q-matrix. Row-sum defects become killing rates;
    /// defects within `1e-12` of the row scale are treated as zero.
    pub fn from_matrix(q: &Matrix) -> Result<Self> {
        let n = q.dim();
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > 1 && q.get(i, j) != 0.0 {
                    return Err(Error::InvalidTridiagonal(format!("entry ({i}, {j}) is off the band")));
                }
            }
        }
        let down = (1..n).map(|i| q.get(i, i - 1)).collect();
        let up = (0..n - 1).map(|i| q.get(i, i + 1)).collect();
        let kill = (0..n)
            .map(|i| {
                let s: f64 = q.row(i).iter().sum();
                let scale = q.row(i).iter().map(|x| x.abs()).sum::<f64>();
                if s.abs() <= 1e-12 * scale {
                    0.0
                } else {
                    -s
                }
            })
            .collect();
        Self::new(down, up, kill)
    }

    /// Number of states `N + 1`.
    pub fn size(&self) -> usize {
        self.c.len()
    }

    /// Index of the last state, `N`.
    pub fn last(&self) -> usize {
        self.c.len() - 1
    }

    /// `a_i` with `a_0 = 0`.
    pub fn a(&self, i: usize) -> f64 {
        self.a[i]
    }

    /// `b_i` with `b_N = 0`.
    pub fn b(&self, i: usize) -> f64 {
        self.b[i]
    }

    pub fn c(&self, i: usize) -> f64 {
        self.c[i]
    }

    pub fn down(&self) -> &[f64] {
        &self.a
    }

    pub fn up(&self) -> &[f64] {
        &self.b
    }

    pub fn kill(&self) -> &[f64] {
        &self.c
    }

    pub fn is_conservative(&self) -> bool {
        self.c.iter().all(|&x| x == 0.0)
    }

    /// Killing only at the last state.
    pub fn is_case1(&self) -> bool {
        self.c[..self.last()].iter().all(|&x| x == 0.0)
    }

    /// `q_i = a_i + b_i + c_i`.
    pub fn q(&self, i: usize) -> f64 {
        self.a[i] + self.b[i] + self.c[i]
    }

    pub fn scaled(&self, s: f64) -> Self {
        let f = |v: &Vec<f64>| v.iter().map(|x| s * x).collect();
        TriQ { a: f(&self.a), b: f(&self.b), c: f(&self.c) }
    }

    pub fn to_matrix(&self) -> Matrix {
        let n = self.size();
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.set(i, i, -self.q(i));
            if i > 0 {
                m.set(i, i - 1, self.a[i]);
            }
            if i + 1 < n {
                m.set(i, i + 1, self.b[i]);
            }
        }
        m
    }

    /// `(-Q) v`.
    pub fn apply_neg(&self, v: &[f64]) -> Vec<f64> {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut s = self.q(i) * v[i];
                if i > 0 {
                    s -= self.a[i] * v[i - 1];
                }
                if i + 1 < n {
                    s -= self.b[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solves `(-Q - z I) w = v` in O(N) with partial pivoting.
    pub fn solve_neg_shifted(&self, z: f64, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.size(), v.len())?;
        let n = self.size();
        let d: Vec<f64> = (0..n).map(|i| self.q(i) - z).collect();
        let dl: Vec<f64> = (1..n).map(|i| -self.a[i]).collect();
        let du: Vec<f64> = (0..n - 1).map(|i| -self.b[i]).collect();
        tridiagonal_solve(dl, d, du, v.to_vec(), z)
    }
}

/// Pivoted tridiagonal elimination (the LAPACK `gtsv` scheme). `dl` is the
/// subdiagonal, `du` the superdiagonal. `shift` is reported on failure.
pub(crate) fn tridiagonal_solve(
    mut dl: Vec<f64>,
    mut d: Vec<f64>,
    mut du: Vec<f64>,
    mut b: Vec<f64>,
    shift: f64,
) -> Result<Vec<f64>> {
    let n = d.len();
    let scale = d
        .iter()
        .chain(&dl)
        .chain(&du)
        .fold(0.0, |m: f64, x| m.max(x.abs()));
    let tiny = |p: f64| p == 0.0 || !p.is_finite() || p.abs() < PIVOT_TOL * scale;
    let singular = |column| Error::SingularShift { shift, column };
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if tiny(d[i]) {
                return Err(singular(i));
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = 0.0;
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let t = d[i + 1];
            d[i + 1] = du[i] - f * t;
            if i + 2 < n {
                dl[i] = du[i + 1];
                du[i + 1] = -f * dl[i];
            } else {
                dl[i] = 0.0;
            }
            du[i] = t;
            let t = b[i];
            b[i] = b[i + 1];
            b[i + 1] = t - f * b[i + 1];
        }
    }
    if tiny(d[n - 1]) {
        return Err(singular(n - 1));
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
    }
    Ok(b)
}

/// Solves `(-Q - z I) w = v` through the explicit `G`-recursion
/// representation, with `b_N` replaced by `c_N`. Costs O(N^3). The
/// representation subtracts large nearly equal quantities, so it is evaluated
/// in double-double arithmetic.
pub fn tridiag_solve_g(t: &TriQ, z: f64, v: &[f64]) -> Result<Vec<f64>> {
    check_len(t.size(), v.len())?;
    let n_last = t.last();
    let c_n = t.c(n_last);
    if c_n <= 0.0 {
        return Err(Error::InvalidParameter("G-recursion needs c_N > 0".into()));
    }
    let zero = TwoFloat::from(0.0);
    let one = TwoFloat::from(1.0);
    let mut b = t.up().to_vec();
    b[n_last] = c_n;
    let a = t.down();
    let c = t.kill();
    let alpha = |i: usize, l: usize| -> TwoFloat {
        let k = i + l;
        let num = TwoFloat::from(c[k]) - z;
        let num = if l == 1 { num + a[k] } else { num };
        num / b[k]
    };

    // gd[i][k] = G^{(i)}_{k,k}, k = 0..=N-i.
    let mut gd: Vec<Vec<TwoFloat>> = Vec::with_capacity(n_last + 1);
    for i in 0..=n_last {
        let len = n_last - i;
        let mut diag = Vec::with_capacity(len + 1);
        diag.push(one);
        if len >= 1 {
            let mut col: Vec<TwoFloat> = (0..=len).map(|l| if l == 0 { zero } else { alpha(i, l) }).collect();
            diag.push(col[1]);
            for k in 2..=len {
                let prev = col[k - 1];
                for l in k..=len {
                    col[l] += alpha(i + k - 1, l - k + 1) * prev;
                }
                diag.push(col[k]);
            }
        }
        gd.push(diag);
    }

    // Prefix sums of gd[j] give sum_{k=0}^{m-j} G^{(j)}_{k,k}.
    let prefix: Vec<Vec<TwoFloat>> = gd
        .iter()
        .map(|d| {
            d.iter()
                .scan(zero, |s, x| {
                    *s += *x;
                    Some(*s)
                })
                .collect()
        })
        .collect();
    let n_of = |h: &[TwoFloat], m: isize| -> TwoFloat {
        if m < 0 {
            return zero;
        }
        let m = m as usize;
        (0..=m).fold(zero, |s, j| s + h[j] / b[j] * prefix[j][m - j])
    };
    let big_m =
        |h: &[TwoFloat]| -> TwoFloat { (0..n_last).fold(zero, |s, j| s + h[j] / b[j] * gd[j][n_last - j]) * c_n };

    let cz: Vec<TwoFloat> = c.iter().map(|&x| TwoFloat::from(x) - z).collect();
    let vv: Vec<TwoFloat> = v.iter().map(|&x| TwoFloat::from(x)).collect();
    let denom = big_m(&cz) + c_n - z;
    let d = f64::from(denom);
    if d == 0.0 || !d.is_finite() {
        return Err(Error::SingularShift { shift: z, column: n_last });
    }
    let coef = (big_m(&vv) + v[n_last]) / denom;
    Ok((0..=n_last)
        .map(|m| f64::from(coef * (n_of(&cz, m as isize - 1) + 1.0) - n_of(&vv, m as isize - 1)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_shifted_solve;

    fn small() -> TriQ {
        TriQ::new(vec![1.0, 4.0, 2.0], vec![3.0, 0.5, 2.0], vec![0.2, 0.0, 0.0, 1.5]).unwrap()
    }

    #[test]
    fn expansion() {
        let q = small().to_matrix();
        assert_eq!(q.row(0), &[-3.2, 3.0, 0.0, 0.0]);
        assert_eq!(q.row(3), &[0.0, 0.0, 2.0, -3.5]);
        let back = TriQ::from_matrix(&q).unwrap();
        assert_eq!(back.down(), small().down());
        assert_eq!(back.up(), small().up());
        for (x, y) in back.kill().iter().zip(small().kill()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn banded_matches_dense() {
        let t = small();
        let v = [1.0, -2.0, 0.5, 3.0];
        for z in [-1.0, 0.3, 2.0, 7.5] {
            let w = t.solve_neg_shifted(z, &v).unwrap();
            let d = dense_shifted_solve(&t.to_matrix().neg(), z, &v).unwrap();
            for (x, y) in w.iter().zip(&d) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn g_recursion_matches_dense() {
        let t = small();
        let v = [1.0, -2.0, 0.5, 3.0];
        let w = tridiag_solve_g(&t, 0.1, &v).unwrap();
        let d = dense_shifted_solve(&t.to_matrix().neg(), 0.1, &v).unwrap();
        for (x, y) in w.iter().zip(&d) {
            assert!((x - y).abs() < 1e-12 * y.abs(), "{x} vs {y}");
        }
    }

    #[test]
    fn single_state() {
        let t = TriQ::new(vec![], vec![], vec![2.0]).unwrap();
        assert_eq!(tridiag_solve_g(&t, 0.5, &[3.0]).unwrap(), vec![2.0]);
        assert_eq!(t.solve_neg_shifted(0.5, &[3.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(TriQ::new(vec![0.0], vec![1.0], vec![0.0, 1.0]).is_err());
        assert!(TriQ::new(vec![1.0], vec![1.0], vec![-1.0, 1.0]).is_err());
        assert!(TriQ::new(vec![1.0], vec![], vec![0.0, 1.0]).is_err());
    }
}
