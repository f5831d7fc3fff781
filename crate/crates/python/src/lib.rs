//! Python bindings: sequences, trigonometric polynomials, tail kernels, worst
//! cases and asymptotic reports.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use vpdev::asymptotic::{self as asym, AsymptoticOptions};
use vpdev::fourier;
use vpdev::report::{run_verify, VerifyOptions};
use vpdev::{ClassSpec, Exponent, ModulusOfContinuity, WorstCaseOptions};

fn err(e: vpdev::Error) -> PyErr {
    match e {
        vpdev::Error::Accuracy { .. } | vpdev::Error::Convergence(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn class(s: Option<f64>, omega: Option<&str>) -> PyResult<ClassSpec> {
    match (s, omega) {
        (Some(s), None) => Ok(ClassSpec::Us(Exponent::new(s).map_err(err)?)),
        (None, Some(w)) => Ok(ClassSpec::Homega(ModulusOfContinuity::from_spec(w).map_err(err)?)),
        _ => Err(PyValueError::new_err("give exactly one of s or omega")),
    }
}

/// A coefficient sequence ψ(k).
#[pyclass(name = "Sequence", frozen, from_py_object)]
#[derive(Clone)]
struct Sequence(vpdev::PsiSequence);

#[pymethods]
impl Sequence {
    /// Parses `geometric:q=0.5`, `neumann:q=0.5`, `polyharmonic:q=0.5,m=3` or `table:@path`.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        vpdev::PsiSequence::from_spec(spec).map(Sequence).map_err(err)
    }

    #[staticmethod]
    fn geometric(q: f64) -> PyResult<Self> {
        vpdev::PsiSequence::geometric(q).map(Sequence).map_err(err)
    }

    #[staticmethod]
    fn neumann(q: f64) -> PyResult<Self> {
        vpdev::PsiSequence::neumann(q).map(Sequence).map_err(err)
    }

    #[staticmethod]
    fn polyharmonic(q: f64, order: u32) -> PyResult<Self> {
        vpdev::PsiSequence::polyharmonic(q, order).map(Sequence).map_err(err)
    }

    #[getter]
    fn q(&self) -> f64 {
        self.0.q()
    }

    fn psi(&self, k: u64) -> PyResult<f64> {
        self.0.psi(k).map_err(err)
    }

    fn ratio(&self, k: u64) -> PyResult<f64> {
        self.0.ratio(k).map_err(err)
    }

    fn epsilon(&self, m: u64) -> PyResult<f64> {
        self.0.epsilon(m).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Sequence('{}')", self.0)
    }
}

/// `a0/2 + Σ (a_k cos kx + b_k sin kx)`.
#[pyclass(name = "TrigPoly", frozen, from_py_object)]
#[derive(Clone)]
struct TrigPoly(vpdev::TrigPoly);

#[pymethods]
impl TrigPoly {
    #[new]
    #[pyo3(signature = (a0, coeffs))]
    fn new(a0: f64, coeffs: Vec<(f64, f64)>) -> PyResult<Self> {
        vpdev::TrigPoly::new(a0, coeffs).map(TrigPoly).map_err(err)
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        vpdev::TrigPoly::from_csv(text).map(TrigPoly).map_err(err)
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    #[getter]
    fn a0(&self) -> f64 {
        self.0.a0()
    }

    #[getter]
    fn coeffs(&self) -> Vec<(f64, f64)> {
        self.0.coeffs().to_vec()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.0.degree()
    }

    fn __call__(&self, x: f64) -> f64 {
        self.0.eval(x)
    }

    fn vp(&self, n: u64, p: u64) -> PyResult<Self> {
        fourier::vp_image(&self.0, n, p).map(TrigPoly).map_err(err)
    }

    fn deviation(&self, n: u64, p: u64) -> PyResult<Self> {
        fourier::deviation_poly(&self.0, n, p).map(TrigPoly).map_err(err)
    }

    fn partial_sum(&self, k: usize) -> Self {
        TrigPoly(self.0.truncate(k))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("TrigPoly(degree={})", self.0.degree())
    }
}

/// `Σ_{k ≥ n−p+1} τ_{n,p}(k) ψ(k) cos(kt − βπ/2)`.
#[pyclass(name = "TailKernel", frozen)]
struct TailKernel(vpdev::TailKernel);

#[pymethods]
impl TailKernel {
    #[new]
    #[pyo3(signature = (seq, n, p, beta=0.0, tol=1e-12))]
    fn new(seq: &Sequence, n: u64, p: u64, beta: f64, tol: f64) -> PyResult<Self> {
        let spec = vpdev::TailKernelSpec::new(seq.0.clone(), n, p, beta).map_err(err)?;
        vpdev::TailKernel::new(&spec, tol).map(TailKernel).map_err(err)
    }

    /// `ψ(n−p+1)`.
    #[getter]
    fn scale(&self) -> f64 {
        self.0.scale()
    }

    fn __call__(&self, t: f64) -> f64 {
        self.0.eval(t)
    }

    fn normalized(&self, t: f64) -> f64 {
        self.0.eval_normalized(t)
    }

    fn sample(&self, grid: usize) -> Vec<f64> {
        (0..grid).map(|j| self.0.eval(std::f64::consts::TAU * j as f64 / grid as f64)).collect()
    }
}

#[pyclass(name = "WorstCase", frozen, get_all)]
struct WorstCase {
    value: f64,
    normalized: f64,
    method: String,
    error_estimate: f64,
    lower_bound: Option<f64>,
    upper_bound: Option<f64>,
    lp_grid: Option<usize>,
}

#[pymethods]
impl WorstCase {
    fn __repr__(&self) -> String {
        format!("WorstCase(value={:e}, method={}, error_estimate={:e})", self.value, self.method, self.error_estimate)
    }
}

#[pyclass(name = "AsymptoticReport", frozen, get_all)]
struct AsymptoticReport {
    theorem: String,
    main_term: f64,
    remainder_envelope: f64,
    exact_value: Option<f64>,
    ratio: Option<f64>,
    residual: Option<f64>,
    residual_ratio: Option<f64>,
    warnings: Vec<String>,
}

#[pymethods]
impl AsymptoticReport {
    fn __repr__(&self) -> String {
        format!("AsymptoticReport(theorem={}, main_term={:e}, ratio={:?})", self.theorem, self.main_term, self.ratio)
    }
}

fn options(tol: f64, grid: Option<usize>, lp_grid: Option<usize>) -> WorstCaseOptions {
    WorstCaseOptions { tol, grid, lp_grid, ..WorstCaseOptions::default() }
}

/// Exact worst-case deviation over `U_s` (give `s`) or `H_ω` (give `omega`).
#[pyfunction]
#[pyo3(signature = (seq, n, p, beta=0.0, s=None, omega=None, tol=1e-12, grid=None, lp_grid=None))]
#[allow(clippy::too_many_arguments)]
fn worstcase(
    seq: &Sequence,
    n: u64,
    p: u64,
    beta: f64,
    s: Option<f64>,
    omega: Option<&str>,
    tol: f64,
    grid: Option<usize>,
    lp_grid: Option<usize>,
) -> PyResult<WorstCase> {
    let r = vpdev::worstcase::worstcase(&seq.0, n, p, beta, &class(s, omega)?, &options(tol, grid, lp_grid))
        .map_err(err)?;
    let method = serde_json::to_value(r.method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    Ok(WorstCase {
        value: r.value,
        normalized: r.normalized,
        method,
        error_estimate: r.error_estimate,
        lower_bound: r.lower_bound,
        upper_bound: r.upper_bound,
        lp_grid: r.grid,
    })
}

/// Main term and remainder envelope; `theorem` is one of `1`, `2`, `3`, `cor1`, `cor2`.
#[pyfunction]
#[pyo3(signature = (theorem, seq, n, p, beta=0.0, s=None, omega=None, exact=true, tol=1e-12, lp_grid=None))]
#[allow(clippy::too_many_arguments)]
fn asymptotic(
    theorem: &str,
    seq: &Sequence,
    n: u64,
    p: u64,
    beta: f64,
    s: Option<f64>,
    omega: Option<&str>,
    exact: bool,
    tol: f64,
    lp_grid: Option<usize>,
) -> PyResult<AsymptoticReport> {
    let class = class(s, omega)?;
    let opts = AsymptoticOptions { worst: options(tol, None, lp_grid), exact };
    let r = match theorem {
        "1" => asym::thm1_transfer(&seq.0, n, p, beta, &class, &opts.worst),
        "2" | "3" => asym::theorem_eval(&seq.0, n, p, beta, &class, &opts),
        "cor1" | "cor2" => asym::corollary_eval(&seq.0, n, p, beta, &class, &opts),
        other => return Err(PyValueError::new_err(format!("unknown theorem '{other}'"))),
    }
    .map_err(err)?;
    if (theorem == "2" || theorem == "3" || theorem.starts_with("cor")) && r.theorem != theorem {
        return Err(PyValueError::new_err(format!("{theorem} does not apply to this sequence and class")));
    }
    Ok(AsymptoticReport {
        theorem: r.theorem,
        main_term: r.main_term,
        remainder_envelope: r.remainder_envelope,
        exact_value: r.exact_value,
        ratio: r.ratio,
        residual: r.residual,
        residual_ratio: r.residual_ratio,
        warnings: r.warnings,
    })
}

/// `K_{q,p}(s')` by quadrature.
#[pyfunction]
#[pyo3(signature = (q, p, s_prime, tol=1e-12))]
fn k_qp(q: f64, p: u64, s_prime: f64, tol: f64) -> PyResult<f64> {
    asym::k_qp(q, p, Exponent::new(s_prime).map_err(err)?, tol).map_err(err)
}

/// `2(1−q^{2p})/(1−q²)·K(q^p)`.
#[pyfunction]
fn k_qp_elliptic(q: f64, p: u64) -> PyResult<f64> {
    asym::k_qp_elliptic(q, p).map_err(err)
}

/// Complete elliptic integral of the first kind with modulus `rho`.
#[pyfunction]
fn elliptic_k(rho: f64) -> PyResult<f64> {
    vpdev::elliptic::elliptic_k(rho).map_err(err)
}

#[pyfunction]
fn sigma_exponent(s_prime: f64, p: u64) -> PyResult<u32> {
    Ok(asym::sigma_exponent(Exponent::new(s_prime).map_err(err)?, p))
}

#[pyfunction]
fn gamma_exponent(p: u64) -> u32 {
    asym::gamma_exponent(p)
}

/// Runs the identity checks; returns `(name, passed, detail)` triples.
#[pyfunction]
#[pyo3(signature = (only=None))]
fn verify(only: Option<Vec<String>>) -> PyResult<Vec<(String, bool, String)>> {
    let only = only
        .unwrap_or_default()
        .iter()
        .map(|s| s.parse())
        .collect::<vpdev::Result<Vec<_>>>()
        .map_err(err)?;
    let report = run_verify(&VerifyOptions { only, perturb_kqp: 0.0 }).map_err(err)?;
    Ok(report.results.into_iter().map(|r| (r.check.to_string(), r.passed, r.detail)).collect())
}

#[pymodule]
fn pyvpdev(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Sequence>()?;
    m.add_class::<TrigPoly>()?;
    m.add_class::<TailKernel>()?;
    m.add_class::<WorstCase>()?;
    m.add_class::<AsymptoticReport>()?;
    m.add_function(wrap_pyfunction!(worstcase, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(k_qp, m)?)?;
    m.add_function(wrap_pyfunction!(k_qp_elliptic, m)?)?;
    m.add_function(wrap_pyfunction!(elliptic_k, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
