//! Birth–death test families and the size sweep.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bounds::refined_birthdeath_bounds;
use crate::error::{Error, Result};
use crate::iteration::{rqi, IterationOptions, NegTri};
use crate::tri_initials::{initials_tridiagonal, TriMode};
use crate::tridiag::TriQ;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `a_i = i^2`, `b_i = (i+1)^2`, killing `(N+1)^2` at the last state.
    QuadraticBd,
    /// Constant rates `a`, `b` and killing `c_n` at the last state.
    CustomBd { a: f64, b: f64, c_n: f64 },
}

/// Family member with states `0..=n`.
pub fn generate_family(family: Family, n: usize) -> Result<TriQ> {
    if n < 1 {
        return Err(Error::InvalidParameter("family size N must be at least 1".into()));
    }
    let mut kill = vec![0.0; n + 1];
    match family {
        Family::QuadraticBd => {
            kill[n] = ((n + 1) * (n + 1)) as f64;
            let down = (1..=n).map(|i| (i * i) as f64).collect();
            let up = (0..n).map(|i| ((i + 1) * (i + 1)) as f64).collect();
            TriQ::new(down, up, kill)
        }
        Family::CustomBd { a, b, c_n } => {
            kill[n] = c_n;
            TriQ::new(vec![a; n], vec![b; n], kill)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    /// Number of states `N + 1`.
    pub size: usize,
    pub z: [f64; 3],
    /// Refined upper/lower bound ratio at `v_2`.
    pub ratio: f64,
    pub millis: f64,
}

/// Runs two RQI steps on one family member with the O(N) tridiagonal path.
pub fn bench_row(family: Family, size: usize, mode: TriMode) -> Result<BenchRow> {
    if size < 2 {
        return Err(Error::InvalidParameter("size must be at least 2".into()));
    }
    let start = Instant::now();
    let t = generate_family(family, size - 1)?;
    let pair = initials_tridiagonal(&t, mode)?;
    let opts = IterationOptions { tol: f64::MIN_POSITIVE, max_iter: 2, ..pair.options() };
    let trace = rqi(&NegTri(&t), &pair.v0, pair.z0, &opts)?;
    let z: Vec<f64> = trace.z_values();
    if z.len() < 3 {
        return Err(Error::InvalidParameter(format!("iteration stopped after {} steps", z.len())));
    }
    let v2 = trace.final_vector.clone();
    let bounds = refined_birthdeath_bounds(&t, &v2, z[2])?;
    Ok(BenchRow { size, z: [z[0], z[1], z[2]], ratio: bounds.ratio(), millis: start.elapsed().as_secs_f64() * 1e3 })
}

/// Rows in the order of `sizes`, computed on up to `jobs` threads.
pub fn bench_sweep(family: Family, sizes: &[usize], mode: TriMode, jobs: usize) -> Result<Vec<BenchRow>> {
    let jobs = jobs.max(1);
    let mut out: Vec<Option<Result<BenchRow>>> = vec![None; sizes.len()];
    for (chunk_sizes, chunk_out) in sizes.chunks(jobs).zip(out.chunks_mut(jobs)) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk_sizes
                .iter()
                .map(|&n| s.spawn(move || bench_row(family, n, mode)))
                .collect();
            for (slot, h) in chunk_out.iter_mut().zip(handles) {
                *slot = Some(h.join().unwrap_or_else(|_| Err(Error::InvalidParameter("worker panicked".into()))));
            }
        });
    }
    out.into_iter().map(|r| r.expect("every slot is filled")).collect()
}

pub fn format_table(rows: &[BenchRow]) -> String {
    let mut s = format!("{:>8} {:>12} {:>12} {:>12} {:>12} {:>10}\n", "N+1", "z0", "z1", "z2", "ratio-1", "ms");
    for r in rows {
        s.push_str(&format!(
            "{:>8} {:>12.6} {:>12.6} {:>12.6} {:>12.3e} {:>10.2}\n",
            r.size,
            r.z[0],
            r.z[1],
            r.z[2],
            r.ratio - 1.0,
            r.millis
        ));
    }
    s
}
