use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use cuspforge::certify::{certify, error_exit_code, run_main_pipeline};
use cuspforge::covering::{branched_cover, finite_cover};
use cuspforge::hyperbolic::{build_quad, constants_h0_l0};
use cuspforge::io::{parse_itri, parse_ncrd, write_itri, write_ncrd};
use cuspforge::normal::{euler_characteristic, reconstruct};
use cuspforge::surface::construct_nonlinking_surface;
use cuspforge::triangulation::Triangulation;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn tri(text: &str) -> PyResult<Triangulation> {
    parse_itri(text).map_err(err)
}

/// Edge indices by class.
#[pyfunction]
fn edge_indices(itri: &str) -> PyResult<Vec<usize>> {
    Ok(tri(itri)?.edge_classes().iter().map(|c| c.index).collect())
}

#[pyfunction]
fn cusp_count(itri: &str) -> PyResult<usize> {
    Ok(tri(itri)?.cusp_classes().len())
}

#[pyfunction]
fn is_negatively_curved(itri: &str) -> PyResult<bool> {
    Ok(tri(itri)?.is_negatively_curved().0)
}

#[pyfunction]
fn unique_common_simplex(itri: &str) -> PyResult<bool> {
    Ok(tri(itri)?.unique_common_simplex().0)
}

/// `(itri text, degree)` of the finite cover.
#[pyfunction]
fn cover(itri: &str) -> PyResult<(String, usize)> {
    let c = finite_cover(&tri(itri)?).map_err(err)?;
    Ok((write_itri(&c.total), c.degree))
}

#[pyfunction]
#[pyo3(signature = (itri, target_index = 6))]
fn branch_cover(itri: &str, target_index: usize) -> PyResult<String> {
    let b = branched_cover(&tri(itri)?, target_index).map_err(err)?;
    Ok(write_itri(&b.cover.total))
}

/// `(h0, l0, quad side, quad corner)`.
#[pyfunction]
fn geom_constants() -> PyResult<(f64, f64, f64, f64)> {
    let (h0, l0) = constants_h0_l0();
    let q = build_quad((0, 1)).map_err(err)?;
    Ok((h0, l0, q.side_length, q.corner_angle))
}

/// Surface coordinates as `.ncrd` text.
#[pyfunction]
fn construct_surface(itri: &str) -> PyResult<String> {
    let c = construct_nonlinking_surface(&tri(itri)?).map_err(err)?;
    Ok(write_ncrd(&c.coords))
}

#[pyfunction]
fn euler_characteristic_of(itri: &str, ncrd: &str) -> PyResult<i64> {
    let t = tri(itri)?;
    let x = parse_ncrd(ncrd).map_err(err)?;
    let d = reconstruct(&t, &x).map_err(err)?;
    Ok(euler_characteristic(&d).map_err(err)?.chi)
}

/// Certificate text for a surface.
#[pyfunction]
fn certify_surface(itri: &str, ncrd: &str) -> PyResult<String> {
    let x = parse_ncrd(ncrd).map_err(err)?;
    Ok(certify(&tri(itri)?, &x).to_text())
}

/// `(exit code, certificate text)`; the text is empty when the pipeline
/// stops early.
#[pyfunction]
#[pyo3(signature = (itri, force_curvature = false))]
fn pipeline(py: Python<'_>, itri: &str, force_curvature: bool) -> PyResult<(i32, String)> {
    let t = tri(itri)?;
    let r = py.detach(|| run_main_pipeline(&t, force_curvature));
    Ok(match r {
        Ok(r) => (r.exit_code(), r.certificate.to_text()),
        Err(e) => (error_exit_code(&e), String::new()),
    })
}

#[pymodule]
fn cuspforge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(edge_indices, m)?)?;
    m.add_function(wrap_pyfunction!(cusp_count, m)?)?;
    m.add_function(wrap_pyfunction!(is_negatively_curved, m)?)?;
    m.add_function(wrap_pyfunction!(unique_common_simplex, m)?)?;
    m.add_function(wrap_pyfunction!(cover, m)?)?;
    m.add_function(wrap_pyfunction!(branch_cover, m)?)?;
    m.add_function(wrap_pyfunction!(geom_constants, m)?)?;
    m.add_function(wrap_pyfunction!(construct_surface, m)?)?;
    m.add_function(wrap_pyfunction!(euler_characteristic_of, m)?)?;
    m.add_function(wrap_pyfunction!(certify_surface, m)?)?;
    m.add_function(wrap_pyfunction!(pipeline, m)?)?;
    Ok(())
}
