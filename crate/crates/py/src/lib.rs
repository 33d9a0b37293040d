use bispectral::verify::default_grid;
use bispectral::{
    anti_isomorphism, bispectral_quadruple, classify, eval_psi, parse_operator, parse_poly, symmetry_report,
    verify_bispectral, AutomorphismWord, ElementaryFactor, IntegralRep, QuadError, QuadratureSpec, VerificationTask,
    WeylElement,
};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

create_exception!(bispectral_py, DivergentError, PyValueError);
create_exception!(bispectral_py, TruncationError, PyRuntimeError);

fn quad_err(e: QuadError) -> PyErr {
    match e {
        QuadError::Divergent(_) => DivergentError::new_err(e.to_string()),
        QuadError::TruncationFailure { .. } => TruncationError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Element of the Weyl algebra in `x` and `D`, normal-ordered.
#[pyclass(name = "Operator", frozen, eq, from_py_object)]
#[derive(Clone, Debug, PartialEq)]
pub struct PyOperator {
    inner: WeylElement,
}

#[pymethods]
impl PyOperator {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_operator(text).map_err(value_err)? })
    }

    #[staticmethod]
    fn x() -> Self {
        Self { inner: WeylElement::x() }
    }

    #[staticmethod]
    fn d() -> Self {
        Self { inner: WeylElement::d() }
    }

    fn __add__(&self, other: &Self) -> Self {
        Self { inner: &self.inner + &other.inner }
    }

    fn __sub__(&self, other: &Self) -> Self {
        Self { inner: &self.inner - &other.inner }
    }

    fn __mul__(&self, other: &Self) -> Self {
        Self { inner: self.inner.multiply(&other.inner) }
    }

    fn __pow__(&self, n: u32, _modulo: Option<u32>) -> Self {
        Self { inner: self.inner.pow(n) }
    }

    fn commutator(&self, other: &Self) -> Self {
        Self { inner: self.inner.commutator(&other.inner) }
    }

    /// `(order, degree)`; raises for the zero operator.
    fn order_and_degree(&self) -> PyResult<(u32, u32)> {
        self.inner.order_and_degree().map_err(value_err)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Operator('{}')", self.inner)
    }
}

/// Automorphism word `exp(ad p_1(x)) exp(ad q_1(D)) ...`.
#[pyclass(name = "Word", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyWord {
    inner: AutomorphismWord,
}

#[pymethods]
impl PyWord {
    /// `factors` is a list of `("p" | "q", polynomial text)`.
    #[new]
    fn new(factors: Vec<(String, String)>) -> PyResult<Self> {
        let factors = factors
            .into_iter()
            .map(|(kind, text)| {
                let poly = parse_poly(&text).map_err(value_err)?;
                match kind.as_str() {
                    "p" => Ok(ElementaryFactor::ad_x(poly)),
                    "q" => Ok(ElementaryFactor::ad_d(poly)),
                    other => Err(PyValueError::new_err(format!("factor kind must be 'p' or 'q', got '{other}'"))),
                }
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self { inner: AutomorphismWord::from_factors(factors) })
    }

    #[staticmethod]
    fn from_pairs(pairs: Vec<(String, String)>) -> PyResult<Self> {
        Self::new(pairs.into_iter().flat_map(|(p, q)| [("p".to_string(), p), ("q".to_string(), q)]).collect())
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn apply(&self, op: &PyOperator) -> PyOperator {
        PyOperator { inner: self.inner.apply(&op.inner) }
    }

    fn inverse(&self) -> Self {
        Self { inner: self.inner.inverse() }
    }

    /// `b(P)`, written in `x, D` letters standing for `z, Dz`.
    fn anti_isomorphism(&self, op: &PyOperator) -> PyOperator {
        PyOperator { inner: anti_isomorphism(&self.inner, &op.inner) }
    }

    /// `{"L", "Lambda", "D", "Delta"}` as canonical strings.
    fn quadruple<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (name, text) in bispectral_quadruple(&self.inner).canonical_strings() {
            d.set_item(name, text)?;
        }
        Ok(d)
    }

    fn classify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = classify(&self.inner);
        let d = PyDict::new(py);
        d.set_item("verdict", c.verdict.to_string())?;
        d.set_item("detail", &c.detail)?;
        let matrix = c.matrix.as_ref().map(|m| m.clone().map(|row| row.map(|v| v.to_string())));
        d.set_item("matrix", matrix)?;
        d.set_item("determinant", c.determinant().map(|v| v.to_string()))?;
        Ok(d)
    }

    /// `(psi, est_error)` at one point.
    #[pyo3(signature = (x, z, contours=None, allow_high_m=false))]
    fn eval_psi(
        &self,
        py: Python<'_>,
        x: Complex64,
        z: Complex64,
        contours: Option<Vec<(i64, i64)>>,
        allow_high_m: bool,
    ) -> PyResult<(Complex64, f64)> {
        let rep = IntegralRep::new(&self.inner, contours.as_deref()).map_err(quad_err)?;
        let spec = QuadratureSpec { allow_high_m, ..Default::default() };
        let r = py.detach(|| eval_psi(&rep, x, z, &spec)).map_err(quad_err)?;
        Ok((r.value, r.est_error))
    }

    /// Runs the grid verification and returns a summary dictionary.
    #[pyo3(signature = (grid=None, probes=None, tol=None, contours=None))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        grid: Option<Vec<(Complex64, Complex64)>>,
        probes: Option<Vec<PyOperator>>,
        tol: Option<f64>,
        contours: Option<Vec<(i64, i64)>>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let task = VerificationTask {
            word: self.inner.clone(),
            grid: grid.unwrap_or_else(default_grid),
            spec: QuadratureSpec::default(),
            probes: probes.unwrap_or_default().into_iter().map(|p| p.inner).collect(),
            contours,
            tolerance: tol,
        };
        let report = py.detach(|| verify_bispectral(&task)).map_err(quad_err)?;
        let d = PyDict::new(py);
        d.set_item("pass", report.pass)?;
        d.set_item("tolerance", report.tolerance)?;
        d.set_item("max_residual", report.max_residual())?;
        d.set_item("inconclusive", report.inconclusive.len())?;
        let rows = PyList::empty(py);
        for r in &report.residuals {
            let row = PyDict::new(py);
            row.set_item("x", Complex64::new(r.x.re, r.x.im))?;
            row.set_item("z", Complex64::new(r.z.re, r.z.im))?;
            row.set_item("identity", r.identity.to_string())?;
            row.set_item("residual", r.residual)?;
            row.set_item("scale", r.scale)?;
            rows.append(row)?;
        }
        d.set_item("residuals", rows)?;
        Ok(d)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Word({})", self.inner)
    }
}

/// Canonical text of a polynomial.
#[pyfunction]
fn canonical_poly(text: &str) -> PyResult<String> {
    Ok(parse_poly(text).map_err(value_err)?.to_string())
}

/// Symmetry checks for the cubic eigenfunctions `psi_kl`.
#[pyfunction]
fn symmetry<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
    let r = py
        .detach(|| symmetry_report(&QuadratureSpec::default(), &default_grid()))
        .map_err(quad_err)?;
    let d = PyDict::new(py);
    let defects = PyDict::new(py);
    for (name, v) in &r.defects {
        defects.set_item(name, v)?;
    }
    d.set_item("defects", defects)?;
    d.set_item("transpose_defect", r.transpose_defect)?;
    d.set_item("witness", r.witness)?;
    d.set_item("singular_values", r.singular_values.clone())?;
    d.set_item("rank", r.rank)?;
    d.set_item("gap", r.gap)?;
    Ok(d)
}

#[pymodule]
fn bispectral_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperator>()?;
    m.add_class::<PyWord>()?;
    m.add_function(wrap_pyfunction!(canonical_poly, m)?)?;
    m.add_function(wrap_pyfunction!(symmetry, m)?)?;
    m.add("DivergentError", m.py().get_type::<DivergentError>())?;
    m.add("TruncationError", m.py().get_type::<TruncationError>())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operators_compose_without_python() {
        let (x, d) = (PyOperator::x(), PyOperator::d());
        assert_eq!(d.commutator(&x).__str__(), "1");
        let w = PyWord::from_pairs(vec![("t^3/3".into(), "t^3/3".into())]).unwrap();
        assert_eq!(w.m(), 1);
        assert_eq!(w.inverse().apply(&w.apply(&x)), x);
        assert_eq!(canonical_poly("t^3/3").unwrap(), "1/3*t^3");
    }
}
