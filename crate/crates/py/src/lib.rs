use kneading_core::fixed::Fixed;
use kneading_core::interval::{self, FamilyKind, SearchOptions};
use kneading_core::kneading::{self, ResonantSpec};
use kneading_core::odometer::{self, PointKind};
use kneading_core::rational::Rational;
use kneading_core::simplex::{self, Certificate};
use num_bigint::BigUint;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(
    kneadlab,
    KneadingError,
    PyException,
    "Domain error raised by the workbench."
);

fn err(e: kneading_core::Error) -> PyErr {
    KneadingError::new_err(format!("{}: {e}", e.kind()))
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    let cls = py.import("fractions")?.getattr("Fraction")?;
    cls.call1((r.numer().clone(), r.denom().clone()))
}

/// A kneading map `Q`: builtin, explicit table or resonant spec.
#[pyclass(frozen, skip_from_py_object, module = "kneadlab")]
#[derive(Clone)]
pub struct KneadingMap {
    inner: kneading::KneadingMap,
}

#[pymethods]
impl KneadingMap {
    /// `fibonacci`, `zero`, `doubling`, `finite:m`, `countable` or `cantor`.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        let inner = kneading::builtin_spec(name).map_err(err)?.into_map();
        Ok(KneadingMap { inner })
    }

    #[staticmethod]
    fn table(values: Vec<u64>) -> PyResult<Self> {
        Ok(KneadingMap {
            inner: kneading::KneadingMap::table(values).map_err(err)?,
        })
    }

    /// Resonant map from spec JSON.
    #[staticmethod]
    fn from_spec_json(text: &str) -> PyResult<Self> {
        let spec = ResonantSpec::from_json(text).map_err(err)?;
        Ok(KneadingMap {
            inner: kneading::KneadingMap::resonant(spec),
        })
    }

    fn value(&self, k: u64) -> PyResult<u64> {
        self.inner.value(k).map_err(err)
    }

    /// `S_0 .. S_k`.
    fn cutting_times(&self, k: u64) -> PyResult<Vec<BigUint>> {
        kneading::cutting_times(&self.inner, k).map_err(err)
    }

    /// `"admissible"`, `"violated"` or `"indeterminate"`.
    #[pyo3(signature = (horizon, window=None))]
    fn admissibility(&self, horizon: u64, window: Option<u64>) -> PyResult<&'static str> {
        Ok(kneading::is_admissible(&self.inner, horizon, window)
            .map_err(err)?
            .label())
    }

    fn is_resonant(&self) -> bool {
        self.inner.spec().is_some()
    }

    /// `b(0..=r)` of a resonant map.
    fn b(&self, r: usize) -> PyResult<Vec<usize>> {
        let spec = self.spec()?;
        (0..=r).map(|i| spec.b(i).map_err(err)).collect()
    }

    fn __repr__(&self) -> String {
        match self.inner.spec() {
            Some(s) => format!("KneadingMap(resonant {})", s.to_value()),
            None => "KneadingMap(..)".to_string(),
        }
    }
}

impl KneadingMap {
    fn spec(&self) -> PyResult<&ResonantSpec> {
        self.inner
            .spec()
            .ok_or_else(|| err(kneading_core::Error::Domain("needs a resonant map".into())))
    }
}

/// A point of the odometer `Omega_Q`.
#[pyclass(frozen, skip_from_py_object, module = "kneadlab")]
#[derive(Clone)]
pub struct OdometerPoint {
    inner: odometer::OdometerPoint,
}

#[pymethods]
impl OdometerPoint {
    #[new]
    #[pyo3(signature = (word, q, truncated=false))]
    fn new(word: &str, q: &KneadingMap, truncated: bool) -> PyResult<Self> {
        let kind = if truncated {
            PointKind::Truncated
        } else {
            PointKind::Finite
        };
        let inner = odometer::OdometerPoint::parse(word, kind, &q.inner).map_err(err)?;
        Ok(OdometerPoint { inner })
    }

    /// Greedy expansion of `n`.
    #[staticmethod]
    fn expand(n: BigUint, q: &KneadingMap) -> PyResult<Self> {
        Ok(OdometerPoint {
            inner: odometer::expand(&n, &q.inner).map_err(err)?,
        })
    }

    #[getter]
    fn word(&self) -> String {
        self.inner.to_string()
    }

    #[getter]
    fn value(&self) -> PyResult<BigUint> {
        self.inner.sigma().map_err(err)
    }

    fn successor(&self) -> PyResult<Self> {
        Ok(OdometerPoint {
            inner: odometer::successor(&self.inner).map_err(err)?,
        })
    }

    fn predecessor(&self) -> PyResult<Self> {
        Ok(OdometerPoint {
            inner: odometer::predecessor(&self.inner).map_err(err)?,
        })
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("OdometerPoint({:?})", self.inner.to_string())
    }
}

/// `(det A_r, 1 - alpha_r, |I_r|)` as fractions.
#[pyfunction]
fn det_a<'py>(
    py: Python<'py>,
    q: &KneadingMap,
    r: usize,
) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>, usize)> {
    let d = simplex::det_a(&q.inner, r).map_err(err)?;
    Ok((
        fraction(py, &d.determinant)?,
        fraction(py, &d.ratio_form)?,
        d.size,
    ))
}

#[pyfunction]
fn intertwine_holds(q: &KneadingMap, r: usize) -> PyResult<bool> {
    Ok(simplex::intertwine_check(&q.inner, r).map_err(err)?.holds())
}

#[pyfunction]
fn extreme_threads(q: &KneadingMap, depth: usize) -> PyResult<Vec<Vec<usize>>> {
    simplex::extreme_threads(q.spec()?, depth).map_err(err)
}

/// `("separated", delta)`, `("vacuous", None)` or `("insufficient", None)`.
#[pyfunction]
fn separation_certificate<'py>(
    py: Python<'py>,
    q: &KneadingMap,
    depth: usize,
    deep: usize,
) -> PyResult<(&'static str, Option<Bound<'py, PyAny>>)> {
    Ok(
        match simplex::separation_certificate(&q.inner, depth, deep).map_err(err)? {
            Certificate::Separated { delta, .. } => ("separated", Some(fraction(py, &delta)?)),
            Certificate::Vacuous => ("vacuous", None),
            Certificate::Insufficient(_) => ("insufficient", None),
        },
    )
}

/// A logistic or tent map at a fixed binary precision.
#[pyclass(frozen, module = "kneadlab")]
pub struct UnimodalMap {
    inner: interval::UnimodalMap,
}

#[pymethods]
impl UnimodalMap {
    /// `param` is a decimal, fraction or hex float string.
    #[new]
    #[pyo3(signature = (family, param, prec=256))]
    fn new(family: &str, param: &str, prec: u32) -> PyResult<Self> {
        let kind = FamilyKind::parse(family).map_err(err)?;
        let p = Fixed::parse(param, prec).map_err(err)?;
        Ok(UnimodalMap {
            inner: kind.build(p).map_err(err)?,
        })
    }

    /// Parameter as a hex float, exact.
    #[getter]
    fn parameter(&self) -> Option<String> {
        self.inner.parameter().map(Fixed::to_hex)
    }

    /// `Q(0..=k)` read off the critical orbit.
    fn kneading(&self, k: u64) -> PyResult<Vec<u64>> {
        Ok(
            interval::kneading_from_map(&self.inner, k, &interval::DnOptions::default())
                .map_err(err)?
                .q,
        )
    }

    /// Average of `ln|f'|` over `n` steps from `x0` (default `f(c)`), with
    /// decade checkpoints.
    #[pyo3(signature = (n, x0=None))]
    fn lyapunov(&self, n: u64, x0: Option<&str>) -> PyResult<(f64, Vec<(u64, f64)>)> {
        let x0 = match x0 {
            Some(t) => Fixed::parse(t, self.inner.precision()).map_err(err)?,
            None => self.inner.apply(self.inner.critical()),
        };
        let rep = interval::lyapunov(&self.inner, &x0, n, &interval::decade_checkpoints(n))
            .map_err(err)?;
        Ok((rep.average, rep.trace))
    }

    fn __repr__(&self) -> String {
        self.inner.describe()
    }
}

/// Bisection for a parameter whose kneading map starts with `Q(0..=k)` of
/// `target`.
#[pyfunction]
#[pyo3(signature = (family, target, k, prec=256))]
fn find_parameter(family: &str, target: &KneadingMap, k: u64, prec: u32) -> PyResult<UnimodalMap> {
    let kind = FamilyKind::parse(family).map_err(err)?;
    let fit =
        interval::find_parameter(kind, &target.inner, k, &SearchOptions::new(prec)).map_err(err)?;
    Ok(UnimodalMap {
        inner: kind.build(fit.parameter).map_err(err)?,
    })
}

#[pymodule]
fn kneadlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("KneadingError", m.py().get_type::<KneadingError>())?;
    m.add_class::<KneadingMap>()?;
    m.add_class::<OdometerPoint>()?;
    m.add_class::<UnimodalMap>()?;
    m.add_function(wrap_pyfunction!(det_a, m)?)?;
    m.add_function(wrap_pyfunction!(intertwine_holds, m)?)?;
    m.add_function(wrap_pyfunction!(extreme_threads, m)?)?;
    m.add_function(wrap_pyfunction!(separation_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(find_parameter, m)?)?;
    Ok(())
}
