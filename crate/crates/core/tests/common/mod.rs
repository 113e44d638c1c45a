#![allow(dead_code)]

use eigmax::bench::{generate_family, Family};
use eigmax::{Matrix, TriQ};
use proptest::prelude::*;

pub fn rows(r: &[&[f64]]) -> Matrix {
    Matrix::from_rows(r.iter().map(|x| x.to_vec()).collect()).unwrap()
}

/// Agreement within one unit in the sixth significant digit of `expected`.
pub fn sig6(actual: f64, expected: f64) -> bool {
    if expected == 0.0 {
        return actual.abs() < 1e-12;
    }
    let unit = 10f64.powi(expected.abs().log10().floor() as i32 - 5);
    (actual - expected).abs() <= unit * (1.0 + 1e-9)
}

/// Birth–death matrix with `a_i = i^2`, `b_i = (i+1)^2`, killing 64 at state 7.
pub fn quad8() -> TriQ {
    generate_family(Family::QuadraticBd, 7).unwrap()
}

/// Same rates as [`quad8`] but conservative.
pub fn quad8_conservative() -> TriQ {
    let down = (1..=7).map(|i| (i * i) as f64).collect();
    let up = (1..=7).map(|i| (i * i) as f64).collect();
    TriQ::new(down, up, vec![0.0; 8]).unwrap()
}

pub fn pair2() -> Matrix {
    rows(&[&[0.25, 0.40], &[0.14, 0.12]])
}

pub fn dense3() -> Matrix {
    rows(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 1.0], &[3.0, 2.0, 1.0]])
}

pub fn grid4() -> Matrix {
    Matrix::from_fn(4, |i, j| (4 * i + j + 1) as f64)
}

pub fn sparse4() -> Matrix {
    rows(&[&[1.0, 2.0, 0.0, 0.0], &[3.0, 14.0, 11.0, 0.0], &[9.0, 10.0, 11.0, 1.0], &[5.0, 6.0, 7.0, 8.0]])
}

pub fn branched5(b4: f64) -> Matrix {
    rows(&[
        &[-3.0, 2.0, 0.0, 1.0, 0.0],
        &[4.0, -7.0, 3.0, 0.0, 0.0],
        &[0.0, 5.0, -5.0, 0.0, 0.0],
        &[10.0, 0.0, 0.0, -16.0, 6.0],
        &[0.0, 0.0, 0.0, 11.0, -11.0 - b4],
    ])
}

pub fn path5(b4: f64) -> Matrix {
    rows(&[
        &[-5.0, 5.0, 0.0, 0.0, 0.0],
        &[3.0, -7.0, 4.0, 0.0, 0.0],
        &[0.0, 2.0, -3.0, 1.0, 0.0],
        &[0.0, 0.0, 10.0, -16.0, 6.0],
        &[0.0, 0.0, 0.0, 11.0, -11.0 - b4],
    ])
}

pub fn qa() -> Matrix {
    rows(&[
        &[-30.0, 30.0, 0.0, 0.0],
        &[1.0 / 5.0, -17.0, 84.0 / 5.0, 0.0],
        &[11.0 / 28.0, 275.0 / 42.0, -20.0, 1097.0 / 84.0],
        &[55.0 / 3291.0, 330.0 / 1097.0, 588.0 / 1097.0, -2809.0 / 3291.0],
    ])
}

pub fn qb() -> Matrix {
    rows(&[
        &[-57.0, 118.0 / 27.0, 91.0 / 9.0, 1148.0 / 27.0],
        &[135.0 / 59.0, -52.0, 637.0 / 59.0, 2296.0 / 59.0],
        &[243.0 / 91.0, 590.0 / 91.0, -47.0, 492.0 / 13.0],
        &[351.0 / 287.0, 118.0 / 41.0, 195.0 / 41.0, -62.0 / 7.0],
    ])
}

/// Multiples of 1/16 in `[0.125, 10]`; row sums stay exact.
fn rate() -> impl Strategy<Value = f64> {
    (2u32..=160).prop_map(|k| k as f64 / 16.0)
}

/// Birth–death matrix on `lo..=hi` states killed only at the last state.
pub fn case1_triq(lo: usize, hi: usize) -> impl Strategy<Value = TriQ> {
    (lo..=hi).prop_flat_map(|size| {
        (prop::collection::vec(rate(), size - 1), prop::collection::vec(rate(), size - 1), rate()).prop_map(
            move |(down, up, c)| {
                let mut kill = vec![0.0; size];
                kill[size - 1] = c;
                TriQ::new(down, up, kill).unwrap()
            },
        )
    })
}

/// Irreducible Q-matrix with every off-diagonal entry positive and killing
/// somewhere.
pub fn dense_q(lo: usize, hi: usize) -> impl Strategy<Value = Matrix> {
    (lo..=hi).prop_flat_map(|n| {
        (prop::collection::vec(rate(), n * n), prop::collection::vec(0.0f64..2.0, n), 0..n).prop_map(
            move |(off, mut kill, k)| {
                kill[k] += 0.5;
                Matrix::from_fn(n, |i, j| {
                    if i == j {
                        -(0..n).filter(|&l| l != i).map(|l| off[i * n + l]).sum::<f64>() - kill[i]
                    } else {
                        off[i * n + j]
                    }
                })
            },
        )
    })
}

pub fn positive_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..10.0, n)
}

/// Largest absolute difference after pairing each eigenvalue of `a` with
/// the nearest unused one of `b`.
pub fn spectral_distance(a: &[eigmax::oracle::Complex<f64>], b: &[eigmax::oracle::Complex<f64>]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}
