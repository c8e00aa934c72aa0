//! Python bindings: algebras, local data and their last jumps, local
//! counting, Heisenberg counters, and the global asymptotics constants.
//! Rationals cross the boundary as (numerator, denominator) pairs.

use std::sync::Arc;

use num_rational::Ratio;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use wildcount::lie::TensorAlgebra;

type Q = Ratio<i64>;

fn err(e: wildcount::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn q_pair(q: Q) -> (i64, i64) {
    (*q.numer(), *q.denom())
}

fn q_from(pair: (i64, i64)) -> PyResult<Q> {
    if pair.1 == 0 {
        return Err(PyValueError::new_err("zero denominator"));
    }
    Ok(Q::new(pair.0, pair.1))
}

/// A finite Lie Z_p-algebra of nilpotency class <= 2.
#[pyclass(frozen)]
struct Algebra {
    spec: wildcount::LieAlgebraSpec,
}

#[pymethods]
impl Algebra {
    /// The generalized Heisenberg algebra h_k over F_p.
    #[staticmethod]
    fn heisenberg(p: u64, k: usize) -> PyResult<Self> {
        let spec = wildcount::LieAlgebraSpec::heisenberg(p, k);
        spec.validate().map_err(err)?;
        Ok(Algebra { spec })
    }

    /// Abelian algebra with cyclic factors Z/p^n for the given orders.
    #[staticmethod]
    fn abelian(p: u64, orders: Vec<u32>) -> PyResult<Self> {
        let spec = wildcount::LieAlgebraSpec::abelian(p, orders);
        spec.validate().map_err(err)?;
        Ok(Algebra { spec })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Algebra { spec: wildcount::LieAlgebraSpec::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.spec).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn p(&self) -> u64 {
        self.spec.p
    }

    #[getter]
    fn order(&self) -> u128 {
        self.spec.group_size()
    }

    /// r = log_p |G[p]|.
    fn r(&self) -> PyResult<u32> {
        Ok(self.spec.subobjects().map_err(err)?.r)
    }

    /// The periodicity constant M: 1 if G[p] is abelian, 1 + 1/p otherwise.
    fn m_constant(&self) -> PyResult<(i64, i64)> {
        Ok(q_pair(self.spec.subobjects().map_err(err)?.m_constant))
    }

    fn __repr__(&self) -> String {
        format!("Algebra(p={}, orders={:?})", self.spec.p, self.spec.orders)
    }
}

/// A local datum D = sum_b D_b pi^{-b} over GF(p^d)((pi)).
#[pyclass(frozen)]
struct Datum {
    inner: wildcount::LocalDatum,
}

#[pymethods]
impl Datum {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Datum { inner: wildcount::LocalDatum::from_json(text).map_err(err)? })
    }

    /// Support entry b -> coefficient vectors, as in the JSON format.
    #[staticmethod]
    fn new(algebra: &Algebra, d: u32, support: Vec<(u64, Vec<Vec<u64>>)>) -> PyResult<Self> {
        let field = wildcount::FieldParams::new(algebra.spec.p, d).map_err(err)?;
        let alg = Arc::new(TensorAlgebra::new(algebra.spec.clone(), field).map_err(err)?);
        let mut entries = Vec::new();
        for (b, vecs) in support {
            entries.push((b, alg.from_coeff_vectors(&vecs).map_err(err)?));
        }
        Ok(Datum { inner: wildcount::LocalDatum::new(alg, entries).map_err(err)? })
    }

    /// Exact last jump, from the ramification equations.
    fn lastjump(&self) -> (i64, i64) {
        q_pair(wildcount::lastjump(&self.inner))
    }

    /// The same invariant through the independent functional oracle.
    fn lastjump_oracle(&self) -> (i64, i64) {
        q_pair(wildcount::lastjump_oracle(&self.inner))
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn __repr__(&self) -> String {
        format!("Datum(support={:?})", self.inner.support.keys().collect::<Vec<_>>())
    }
}

fn tensor(algebra: &Algebra, d: u32) -> PyResult<Arc<TensorAlgebra>> {
    let field = wildcount::FieldParams::new(algebra.spec.p, d).map_err(err)?;
    Ok(Arc::new(TensorAlgebra::new(algebra.spec.clone(), field).map_err(err)?))
}

/// Number of local data over GF(p^d)((pi)) with last jump < v.
#[pyfunction]
#[pyo3(signature = (algebra, d, v, jobs = 1))]
fn count_lastjump_lt(algebra: &Algebra, d: u32, v: (i64, i64), jobs: usize) -> PyResult<u128> {
    wildcount::count_lastjump_lt(&tensor(algebra, d)?, q_from(v)?, jobs).map_err(err)
}

/// Number of local data with last jump exactly v.
#[pyfunction]
#[pyo3(signature = (algebra, d, v, jobs = 1))]
fn count_lastjump_eq(algebra: &Algebra, d: u32, v: (i64, i64), jobs: usize) -> PyResult<u128> {
    wildcount::count_lastjump_eq(&tensor(algebra, d)?, q_from(v)?, jobs).map_err(err)
}

/// Exact jump distribution up to v_max: list of ((num, den), count).
#[pyfunction]
#[pyo3(signature = (algebra, d, v_max, jobs = 1))]
fn jump_distribution(
    algebra: &Algebra,
    d: u32,
    v_max: (i64, i64),
    jobs: usize,
) -> PyResult<Vec<((i64, i64), u128)>> {
    let dist =
        wildcount::jump_distribution(&tensor(algebra, d)?, q_from(v_max)?, jobs).map_err(err)?;
    Ok(dist.into_iter().map(|(v, c)| (q_pair(v), c)).collect())
}

/// |A_{k,m}(F_{p^d})| by exhaustive enumeration.
#[pyfunction]
fn a_km_bruteforce(k: usize, m: u32, p: u64, d: u32) -> PyResult<u64> {
    let field = wildcount::FieldParams::new(p, d).map_err(err)?;
    wildcount::a_km_bruteforce(k, m, &field).map_err(err)
}

/// |A_{k,m}(F_{p^d})| through the exact character-sum identity.
#[pyfunction]
fn a_km_charsum(k: usize, m: u32, p: u64, d: u32) -> PyResult<u64> {
    let field = wildcount::FieldParams::new(p, d).map_err(err)?;
    wildcount::a_km_charsum(k, m, &field).map_err(err)
}

/// Stable value of |A_{k,m}| for m >= k, as a union of isotropic subspaces.
#[pyfunction]
fn a_km_stable(k: usize, p: u64, d: u32) -> PyResult<u64> {
    let field = wildcount::FieldParams::new(p, d).map_err(err)?;
    wildcount::a_km_stable(k, &field).map_err(err)
}

/// (brute force, closed form) count of maximal isotropic subspaces of F_p^2k.
#[pyfunction]
fn isotropic_count(p: u64, k: usize) -> PyResult<(u64, u64)> {
    wildcount::isotropic_count(p, k).map_err(err)
}

/// Global Euler-product coefficients a_N over F_q(T), as ((num, den), a_N).
#[pyfunction]
#[pyo3(signature = (algebra, q, n_max, jobs = 1))]
fn global_series(
    algebra: &Algebra,
    q: u64,
    n_max: u32,
    jobs: usize,
) -> PyResult<Vec<((i64, i64), u128)>> {
    let series = wildcount::euler_product(&algebra.spec, q, n_max, jobs).map_err(err)?;
    let lattice = series.lattice as i64;
    Ok(series
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(j, &c)| (q_pair(Q::new(j as i64, lattice)), c))
        .collect())
}

fn report_to_py(py: Python<'_>, rep: wildcount::AsymptoticsReport) -> PyResult<Py<pyo3::types::PyDict>> {
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("A", q_pair(rep.a))?;
    dict.set_item("B", rep.b)?;
    dict.set_item("M", q_pair(rep.m))?;
    dict.set_item("S", rep.s.iter().map(|&n| q_pair(n)).collect::<Vec<_>>())?;
    dict.set_item("hypothesis_ok", rep.hypothesis_ok)?;
    dict.set_item("flags", rep.flags)?;
    Ok(dict.unbind())
}

/// Asymptotics constants for the Heisenberg family h_k over F_p.
#[pyfunction]
fn heisenberg_constants(py: Python<'_>, p: u64, k: u32) -> PyResult<Py<pyo3::types::PyDict>> {
    report_to_py(py, wildcount::heisenberg_constants(p, k).map_err(err)?)
}

/// Generic counting constants A = (r+1)/M, B = 1 for an algebra.
#[pyfunction]
fn main_theorem_constants(py: Python<'_>, algebra: &Algebra) -> PyResult<Py<pyo3::types::PyDict>> {
    report_to_py(py, wildcount::main_theorem_constants(&algebra.spec).map_err(err)?)
}

/// A, S, B, M from rows (n, b_n, e_n, k_n); pass k_n = None for a vanishing
/// error term. All rationals are (num, den) pairs.
#[pyfunction]
fn analytic_constants(
    py: Python<'_>,
    rows: Vec<((i64, i64), u128, (i64, i64), Option<(i64, i64)>)>,
) -> PyResult<Py<pyo3::types::PyDict>> {
    let rows = rows
        .into_iter()
        .map(|(n, b, e, k)| {
            Ok(wildcount::AsymptoticsRow {
                n: q_from(n)?,
                b,
                e: q_from(e)?,
                k: k.map(q_from).transpose()?,
            })
        })
        .collect::<PyResult<Vec<_>>>()?;
    let rep = wildcount::analytic_constants(&wildcount::AsymptoticsInput { rows }).map_err(err)?;
    report_to_py(py, rep)
}

#[pymodule]
fn wildcount_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Algebra>()?;
    m.add_class::<Datum>()?;
    m.add_function(wrap_pyfunction!(count_lastjump_lt, m)?)?;
    m.add_function(wrap_pyfunction!(count_lastjump_eq, m)?)?;
    m.add_function(wrap_pyfunction!(jump_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(a_km_bruteforce, m)?)?;
    m.add_function(wrap_pyfunction!(a_km_charsum, m)?)?;
    m.add_function(wrap_pyfunction!(a_km_stable, m)?)?;
    m.add_function(wrap_pyfunction!(isotropic_count, m)?)?;
    m.add_function(wrap_pyfunction!(global_series, m)?)?;
    m.add_function(wrap_pyfunction!(heisenberg_constants, m)?)?;
    m.add_function(wrap_pyfunction!(main_theorem_constants, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_constants, m)?)?;
    Ok(())
}
