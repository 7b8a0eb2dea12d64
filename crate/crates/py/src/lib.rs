use std::collections::BTreeMap;
use std::sync::Arc;

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use frobtor_core::lauricella::equal_weight_ratio;
use frobtor_core::rational::{format_q, format_qvec};
use frobtor_core::{
    build_root_system, potential, BasePoint, Complex64, Error, FiberAlgebra as CoreAlgebra, Multiplicity,
    PotentialContext, RootSystemSpec, RunConfig, TangentVec, WeightedSystem,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Consistency(_) | Error::SingularPoint { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn system(family: &str, rank: usize) -> PyResult<RootSystemSpec> {
    RootSystemSpec::new(family.parse().map_err(to_py)?, rank).map_err(to_py)
}

fn json_to_py(py: Python<'_>, text: String) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Runs the check suite and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (family, rank, k=Complex64::new(1.0, 0.0), k_prime=Complex64::new(0.0, 0.0), points=8, seed=42, triples=20, fd_step=1e-5, tol=None, metric_scale=1.0))]
#[allow(clippy::too_many_arguments)]
fn verify(
    py: Python<'_>,
    family: &str,
    rank: usize,
    k: Complex64,
    k_prime: Complex64,
    points: usize,
    seed: u64,
    triples: usize,
    fd_step: f64,
    tol: Option<BTreeMap<String, f64>>,
    metric_scale: f64,
) -> PyResult<Py<PyAny>> {
    let cfg = RunConfig {
        points,
        seed,
        triples,
        fd_step,
        tol_overrides: tol.unwrap_or_default(),
        metric_scale,
        ..RunConfig::new(system(family, rank)?, Multiplicity::new(k, k_prime))
    };
    let report = py.detach(|| frobtor_core::run_suite(&cfg)).map_err(to_py)?;
    json_to_py(py, report.to_json())
}

/// The root datum as a dict of exact rational strings.
#[pyfunction]
fn roots(py: Python<'_>, family: &str, rank: usize) -> PyResult<Py<PyAny>> {
    let dump = build_root_system(system(family, rank)?).dump();
    json_to_py(py, serde_json::to_string(&dump).expect("serializable"))
}

#[pyfunction]
fn li3(z: Complex64) -> PyResult<Complex64> {
    potential::li3(z).map_err(to_py)
}

/// `(q, q', q'', q''')` at `w`.
#[pyfunction]
fn q_eval(w: Complex64) -> PyResult<(Complex64, Complex64, Complex64, Complex64)> {
    let v = potential::q_eval(w).map_err(to_py)?;
    Ok((v.q, v.q1, v.q2, v.q3))
}

/// Exact identities of the weighted hyperplane configuration; weights as `"1,2/3,5"`.
#[pyfunction]
fn lauricella(py: Python<'_>, weights: &str) -> PyResult<Py<PyAny>> {
    let sys = WeightedSystem::parse(weights).map_err(to_py)?;
    let v = sys.symmetry_test();
    let d = pyo3::types::PyDict::new(py);
    d.set_item("weights", format_qvec(sys.weights()))?;
    d.set_item("symmetric", v.symmetric)?;
    d.set_item("triples_checked", v.triples_checked)?;
    d.set_item(
        "witness",
        v.witness
            .map(|w| (w.indices, format_q(&w.lhs), format_q(&w.rhs))),
    )?;
    d.set_item("type_a_ratio", equal_weight_ratio(&sys).map(|r| format_q(&r)))?;
    Ok(d.into_any().unbind())
}

/// The fiber algebra at multiplicity `(k, k_prime)`. Tangent vectors are
/// lists of `rank + 1` complex numbers in the frame `p_1, .., p_n, e`.
#[pyclass(name = "FiberAlgebra", frozen)]
struct PyFiberAlgebra {
    pot: PotentialContext,
}

impl PyFiberAlgebra {
    fn alg(&self) -> &CoreAlgebra {
        self.pot.algebra()
    }

    fn vector(&self, v: Vec<Complex64>) -> PyResult<TangentVec> {
        let n = self.alg().rank();
        if v.len() != n + 1 {
            return Err(PyValueError::new_err(format!("expected {} components, got {}", n + 1, v.len())));
        }
        Ok(TangentVec::new(v[..n].to_vec(), v[n]))
    }

    fn point(&self, x: Vec<Complex64>, s: Complex64) -> PyResult<BasePoint> {
        if x.len() != self.alg().rank() {
            return Err(PyValueError::new_err(format!("expected {} coordinates", self.alg().rank())));
        }
        Ok(BasePoint::new(x, s))
    }
}

fn components(v: &TangentVec) -> Vec<Complex64> {
    let mut out = v.h_part.clone();
    out.push(v.lambda);
    out
}

#[pymethods]
impl PyFiberAlgebra {
    #[new]
    #[pyo3(signature = (family, rank, k=Complex64::new(1.0, 0.0), k_prime=Complex64::new(0.0, 0.0)))]
    fn new(family: &str, rank: usize, k: Complex64, k_prime: Complex64) -> PyResult<Self> {
        let datum = Arc::new(build_root_system(system(family, rank)?));
        let alg = CoreAlgebra::new(datum, Multiplicity::new(k, k_prime)).map_err(to_py)?;
        Ok(Self {
            pot: PotentialContext::new(alg),
        })
    }

    #[getter]
    fn rank(&self) -> usize {
        self.alg().rank()
    }

    #[getter]
    fn metric_scalar(&self) -> Complex64 {
        self.alg().metric_scalar()
    }

    #[getter]
    fn c_kappa(&self) -> Complex64 {
        self.alg().c_kappa()
    }

    #[getter]
    fn degenerate(&self) -> bool {
        self.alg().degenerate()
    }

    fn product(&self, x: Vec<Complex64>, s: Complex64, u: Vec<Complex64>, v: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        let p = self.point(x, s)?;
        let out = self.alg().product(&p, &self.vector(u)?, &self.vector(v)?).map_err(to_py)?;
        Ok(components(&out))
    }

    fn metric(&self, u: Vec<Complex64>, v: Vec<Complex64>) -> PyResult<Complex64> {
        Ok(self.alg().metric(&self.vector(u)?, &self.vector(v)?))
    }

    fn phi(&self, x: Vec<Complex64>, s: Complex64) -> PyResult<Complex64> {
        self.pot.phi_eval(&self.point(x, s)?).map_err(to_py)
    }

    fn third_derivative(
        &self,
        x: Vec<Complex64>,
        s: Complex64,
        u: Vec<Complex64>,
        v: Vec<Complex64>,
        w: Vec<Complex64>,
    ) -> PyResult<Complex64> {
        let p = self.point(x, s)?;
        self.pot
            .third_derivative(&p, &self.vector(u)?, &self.vector(v)?, &self.vector(w)?)
            .map_err(to_py)
    }

    /// `None` when the metric is degenerate.
    fn wdvv_residual(&self, x: Vec<Complex64>, s: Complex64) -> PyResult<Option<f64>> {
        self.pot.wdvv_residual(&self.point(x, s)?).map_err(to_py)
    }
}

#[pymodule]
fn frobtor(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", frobtor_core::VERSION)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(roots, m)?)?;
    m.add_function(wrap_pyfunction!(li3, m)?)?;
    m.add_function(wrap_pyfunction!(q_eval, m)?)?;
    m.add_function(wrap_pyfunction!(lauricella, m)?)?;
    m.add_class::<PyFiberAlgebra>()?;
    Ok(())
}
