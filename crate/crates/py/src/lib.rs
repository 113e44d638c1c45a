//! Python bindings: matrices are lists of rows, results are dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use eigmax::bounds::{collatz_wielandt, CwMode};
use eigmax::general::{initials_general, initials_uniform, GeneralMode, GeneralOptions, UniformChoice};
use eigmax::iteration::{rqi, IterationOptions, NegTri};
use eigmax::lanczos::lanczos_default;
use eigmax::next::{initials_next_general, initials_next_tridiagonal, rqi_next, NextGeneralMode, NextGeneralOptions, NextVariant};
use eigmax::tri_initials::{initials_tridiagonal_matrix, TriMode};
use eigmax::{IterationTrace, Matrix, Status, TriQ};

fn err(e: eigmax::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(rows).map_err(err)
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Converged => "converged",
        Status::MaxIter => "max_iter",
        Status::Collapse(_) => "collapse",
        Status::SingularShift(_) => "singular_shift",
    }
}

fn trace_dict<'py>(py: Python<'py>, trace: &IterationTrace, map: impl Fn(f64) -> f64) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    let (z, v) = trace.eigenpair();
    d.set_item("eigenvalue", map(z))?;
    d.set_item("vector", v)?;
    d.set_item("estimates", trace.z_values().into_iter().map(&map).collect::<Vec<_>>())?;
    d.set_item("z", trace.z_values())?;
    d.set_item("status", status_name(trace.status()))?;
    d.set_item("collapse_at", trace.collapse_at)?;
    Ok(d)
}

/// Maximal eigenpair. `strategy` is `tridiag`, `general`, `uniform-I` or
/// `uniform-II`; `xi=None` selects the pure shift for `tridiag` and the
/// automatic one for `general`.
#[pyfunction]
#[pyo3(signature = (a, strategy="general", xi=None, tol=1e-10, max_iter=100))]
fn solve<'py>(
    py: Python<'py>,
    a: Vec<Vec<f64>>,
    strategy: &str,
    xi: Option<f64>,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let a = matrix(a)?;
    let with = |o: IterationOptions| IterationOptions { tol, max_iter, ..o };
    match strategy {
        "tridiag" => {
            let mode = xi.map_or(TriMode::Pure, TriMode::Improved);
            let (t, m, pair) = initials_tridiagonal_matrix(&a, mode).map_err(err)?;
            let tr = rqi(&NegTri(&t), &pair.v0, pair.z0, &with(pair.options())).map_err(err)?;
            trace_dict(py, &tr, |z| m - z)
        }
        "general" => {
            let mode = xi.map_or(GeneralMode::Auto, GeneralMode::Xi);
            let g = initials_general(&a, &GeneralOptions { mode, ..GeneralOptions::default() }).map_err(err)?;
            let tr = rqi(&g.q.neg(), &g.pair.v0, g.pair.z0, &with(g.pair.options())).map_err(err)?;
            let m = g.m;
            trace_dict(py, &tr, |z| m - z)
        }
        "uniform-I" | "uniform-II" => {
            let choice = if strategy == "uniform-I" { UniformChoice::I } else { UniformChoice::II };
            let pair = initials_uniform(&a, choice).map_err(err)?;
            let tr = rqi(&a, &pair.v0, pair.z0, &with(pair.options())).map_err(err)?;
            trace_dict(py, &tr, |z| z)
        }
        other => Err(PyValueError::new_err(format!("unknown strategy {other:?}"))),
    }
}

/// Next-to-maximal eigenvalue of `-Q` for a conservative Q-matrix.
/// `variant` is `quotient`, `epsilon`, `combo`, `scan` or `killed`.
#[pyfunction]
#[pyo3(signature = (q, variant="combo", xi=0.4, c=1000.0, tol=1e-10, max_iter=100))]
fn next_eigenpair<'py>(
    py: Python<'py>,
    q: Vec<Vec<f64>>,
    variant: &str,
    xi: f64,
    c: f64,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let q = matrix(q)?;
    let with = |o: IterationOptions| IterationOptions { tol, max_iter, ..o };
    let run = match variant {
        "quotient" | "epsilon" | "combo" => {
            let v = match variant {
                "quotient" => NextVariant::Quotient,
                "epsilon" => NextVariant::Epsilon,
                _ => NextVariant::Combo(xi),
            };
            let t = TriQ::from_matrix(&q).map_err(err)?;
            let pair = initials_next_tridiagonal(&t, v).map_err(err)?;
            let mu = pair.measure.clone().expect("tridiagonal next pair carries its measure");
            rqi_next(&NegTri(&t), &pair, &mu, &with(pair.options()), false).map_err(err)?
        }
        "scan" | "killed" => {
            let mode = if variant == "scan" { NextGeneralMode::Scan } else { NextGeneralMode::Killed };
            let g = initials_next_general(&q, &NextGeneralOptions { c, mode, ..NextGeneralOptions::default() })
                .map_err(err)?;
            rqi_next(&q.neg(), &g.pair, &g.mu, &with(g.pair.options()), false).map_err(err)?
        }
        other => return Err(PyValueError::new_err(format!("unknown variant {other:?}"))),
    };
    let d = trace_dict(py, &run.trace, |z| z)?;
    d.set_item("max_drift", run.max_drift)?;
    Ok(d)
}

/// Collatz–Wielandt `(lower, upper)`; `mode` is `a` or `q`.
#[pyfunction]
#[pyo3(signature = (m, x, mode="a"))]
fn bounds(m: Vec<Vec<f64>>, x: Vec<f64>, mode: &str) -> PyResult<(f64, f64)> {
    let mode = match mode {
        "a" => CwMode::MatrixA,
        "q" => CwMode::QMatrix,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let b = collatz_wielandt(&matrix(m)?, &x, mode).map_err(err)?;
    Ok((b.lower, b.upper))
}

#[pyfunction]
fn lanczos(a: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    Ok(lanczos_default(&matrix(a)?).map_err(err)?.t.rows())
}

#[pymodule]
fn eigmax_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(next_eigenpair, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(lanczos, m)?)?;
    Ok(())
}
