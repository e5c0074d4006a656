//! Python bindings for the `heralded_gate` crate, importable as `pyheralded`.

use heralded_gate::cli::{parse_config, to_json, write_config};
use heralded_gate::measurement::{self, parse_count_records, BasisPair, CountRecord, TargetClass};
use heralded_gate::montecarlo::{self, ExperimentConfig, RunReport};
use heralded_gate::noise::{self, ErrorModel};
use heralded_gate::protocol::{self, PrepSetting};
use heralded_gate::qcore::{self, DensityMatrix, Tensor};
use heralded_gate::rates::{self, RateBudget};
use heralded_gate::tomography::{self, MleOptions, TomographyInput};
use heralded_gate::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: Error) -> PyErr {
    match e {
        Error::NoProgress { .. } | Error::Tomography(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn target_from_label(label: &str) -> PyResult<TargetClass> {
    TargetClass::ALL
        .into_iter()
        .find(|t| t.label() == label || format!("{t:?}") == label)
        .ok_or_else(|| PyValueError::new_err(format!("unknown target `{label}`")))
}

#[pyclass(name = "PureState", module = "pyheralded", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPureState(qcore::PureState);

#[pymethods]
impl PyPureState {
    /// Normalizes the given amplitudes.
    #[new]
    fn new(amplitudes: Vec<Complex64>) -> PyResult<Self> {
        qcore::PureState::new(amplitudes).map(Self).map_err(err)
    }

    #[staticmethod]
    fn basis(dim: usize, index: usize) -> PyResult<Self> {
        if index >= dim {
            return Err(PyValueError::new_err(format!("index {index} out of range for dim {dim}")));
        }
        Ok(Self(qcore::PureState::basis(dim, index)))
    }

    /// Single-qubit state cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
    #[staticmethod]
    fn qubit(theta: f64, phi: f64) -> PyResult<Self> {
        let p = PrepSetting::new(theta, phi).map_err(err)?;
        Ok(Self(protocol::prepare_qubit(&p)))
    }

    /// One of `0`, `1`, `0+1`, `0-1`, `0+i`, `0-i`.
    #[staticmethod]
    fn from_label(label: &str) -> PyResult<Self> {
        let p = PrepSetting::from_label(label)
            .ok_or_else(|| PyValueError::new_err(format!("unknown state label `{label}`")))?;
        Ok(Self(protocol::prepare_qubit(&p)))
    }

    #[staticmethod]
    fn bell(name: &str) -> PyResult<Self> {
        let s = match name {
            "psi_minus" => qcore::bell::psi_minus(),
            "psi_plus" => qcore::bell::psi_plus(),
            "phi_minus" => qcore::bell::phi_minus(),
            "phi_plus" => qcore::bell::phi_plus(),
            _ => return Err(PyValueError::new_err(format!("unknown Bell state `{name}`"))),
        };
        Ok(Self(s))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn amplitudes(&self) -> Vec<Complex64> {
        self.0.amplitudes().iter().copied().collect()
    }

    fn inner(&self, other: &PyPureState) -> PyResult<Complex64> {
        self.0.inner(&other.0).map_err(err)
    }

    fn tensor(&self, other: &PyPureState) -> Self {
        Self(self.0.tensor(&other.0))
    }

    fn to_density(&self) -> PyDensityMatrix {
        PyDensityMatrix(self.0.to_density())
    }

    fn __repr__(&self) -> String {
        format!("PureState(dim={}, amplitudes={:?})", self.0.dim(), self.amplitudes())
    }
}

#[pyclass(name = "DensityMatrix", module = "pyheralded", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix(DensityMatrix);

#[pymethods]
impl PyDensityMatrix {
    /// Builds from a square list of rows; the matrix must be Hermitian, PSD
    /// and unit-trace.
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        DensityMatrix::from_rows(&rows).map(Self).map_err(err)
    }

    #[staticmethod]
    fn maximally_mixed(dim: usize) -> Self {
        Self(DensityMatrix::maximally_mixed(dim))
    }

    /// `p |psi-><psi-| + (1 - p) I/4`.
    #[staticmethod]
    fn werner(p: f64) -> PyResult<Self> {
        let singlet = qcore::bell::psi_minus().to_density();
        singlet.mix(&DensityMatrix::maximally_mixed(4), p).map(Self).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn to_list(&self) -> Vec<Vec<Complex64>> {
        let d = self.0.dim();
        (0..d).map(|i| (0..d).map(|j| self.0.entry(i, j)).collect()).collect()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues()
    }

    fn tensor(&self, other: &PyDensityMatrix) -> Self {
        Self(self.0.tensor(&other.0))
    }

    fn partial_trace(&self, keep: Vec<usize>, dims: Vec<usize>) -> PyResult<Self> {
        qcore::partial_trace(&self.0, &keep, &dims).map(Self).map_err(err)
    }

    fn fidelity(&self, target: &PyPureState) -> PyResult<f64> {
        qcore::fidelity_pure(&self.0, &target.0).map_err(err)
    }

    /// Expectation of a Pauli string such as `"XX"` or `"ZI"`.
    fn pauli_expectation(&self, paulis: &str) -> PyResult<f64> {
        let mut op: Option<qcore::Operator> = None;
        for ch in paulis.chars() {
            let p = match ch.to_ascii_uppercase() {
                'I' => qcore::Pauli::I,
                'X' => qcore::Pauli::X,
                'Y' => qcore::Pauli::Y,
                'Z' => qcore::Pauli::Z,
                _ => return Err(PyValueError::new_err(format!("unknown Pauli `{ch}`"))),
            };
            let single = qcore::pauli(p);
            op = Some(match op {
                None => single,
                Some(acc) => acc.tensor(&single),
            });
        }
        let op = op.ok_or_else(|| PyValueError::new_err("empty Pauli string"))?;
        qcore::expectation(&self.0, &op).map_err(err)
    }

    fn concurrence(&self) -> PyResult<f64> {
        tomography::concurrence(&self.0).map_err(err)
    }

    fn entanglement_of_formation(&self) -> PyResult<f64> {
        tomography::entanglement_of_formation(&self.0).map_err(err)
    }

    /// Exact readout probabilities (++, +-, -+, --) for a basis pair like `"XY"`.
    #[pyo3(signature = (basis, eps_det = 0.0))]
    fn outcome_probabilities(&self, basis: &str, eps_det: f64) -> PyResult<[f64; 4]> {
        let b: BasisPair = basis.parse().map_err(err)?;
        measurement::outcome_probabilities(&self.0, b, eps_det).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dim={})", self.0.dim())
    }
}

#[pyclass(name = "ErrorModel", module = "pyheralded", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyErrorModel(ErrorModel);

#[pymethods]
impl PyErrorModel {
    #[new]
    #[pyo3(signature = (mode_overlap = 1.0, eps_det = 0.0, eps_sigma = 0.0, p_false_herald = 0.0))]
    fn new(mode_overlap: f64, eps_det: f64, eps_sigma: f64, p_false_herald: f64) -> PyResult<Self> {
        let em = ErrorModel { mode_overlap, eps_det, eps_sigma, p_false_herald };
        em.validate().map_err(err)?;
        Ok(Self(em))
    }

    #[staticmethod]
    fn ideal() -> Self {
        Self(ErrorModel::ideal())
    }

    #[staticmethod]
    fn calibrated() -> Self {
        Self(ErrorModel::calibrated())
    }

    #[getter]
    fn mode_overlap(&self) -> f64 {
        self.0.mode_overlap
    }
    #[getter]
    fn eps_det(&self) -> f64 {
        self.0.eps_det
    }
    #[getter]
    fn eps_sigma(&self) -> f64 {
        self.0.eps_sigma
    }
    #[getter]
    fn p_false_herald(&self) -> f64 {
        self.0.p_false_herald
    }
    #[getter]
    fn effective_sigma(&self) -> f64 {
        self.0.effective_sigma()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

#[pyclass(name = "RateBudget", module = "pyheralded", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyRateBudget(RateBudget);

#[pymethods]
impl PyRateBudget {
    #[new]
    #[pyo3(signature = (p_pi = 0.5, solid_angle_fraction = 0.02, t_fiber = 0.2, t_optics = 0.95, eta = 0.15, attempt_rate_hz = 0.0))]
    fn new(
        p_pi: f64,
        solid_angle_fraction: f64,
        t_fiber: f64,
        t_optics: f64,
        eta: f64,
        attempt_rate_hz: f64,
    ) -> PyResult<Self> {
        let b = RateBudget { p_pi, solid_angle_fraction, t_fiber, t_optics, eta, attempt_rate_hz };
        b.validate().map_err(err)?;
        Ok(Self(b))
    }

    fn per_photon_detection_prob(&self) -> f64 {
        rates::per_photon_detection_prob(&self.0)
    }

    fn gate_success_probability(&self, p_psi: f64) -> PyResult<f64> {
        rates::gate_success_probability(&self.0, p_psi).map_err(err)
    }

    fn expected_events(&self, p_psi: f64, duration_s: f64) -> PyResult<f64> {
        rates::expected_events(&self.0, p_psi, duration_s).map_err(err)
    }

    fn breakdown(&self) -> String {
        rates::breakdown(&self.0)
    }
}

#[pyclass(name = "ExperimentConfig", module = "pyheralded", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyExperimentConfig(ExperimentConfig);

#[pymethods]
impl PyExperimentConfig {
    /// Parses INI-style config text; an empty string gives the defaults.
    #[new]
    #[pyo3(signature = (text = ""))]
    fn new(text: &str) -> PyResult<Self> {
        parse_config(text).map(Self).map_err(err)
    }

    fn to_text(&self) -> String {
        write_config(&self.0)
    }

    /// Copy with a different seed.
    fn with_seed(&self, seed: u64) -> Self {
        Self(ExperimentConfig { seed, ..self.0.clone() })
    }

    /// Copy with a different error model.
    fn with_error_model(&self, model: &PyErrorModel) -> Self {
        Self(ExperimentConfig { error_model: model.0, ..self.0.clone() })
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }
    #[getter]
    fn fast_mode(&self) -> bool {
        self.0.fast_mode
    }
    #[getter]
    fn total_events(&self) -> u64 {
        self.0.total_events()
    }
    #[getter]
    fn error_model(&self) -> PyErrorModel {
        PyErrorModel(self.0.error_model)
    }
    #[getter]
    fn budget(&self) -> PyRateBudget {
        PyRateBudget(self.0.budget)
    }
}

#[pyclass(name = "RunReport", module = "pyheralded", frozen, skip_from_py_object)]
struct PyRunReport(RunReport);

#[pymethods]
impl PyRunReport {
    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }
    #[getter]
    fn complete(&self) -> bool {
        self.0.complete
    }
    #[getter]
    fn heralds(&self) -> u64 {
        self.0.herald_stats.heralds
    }
    #[getter]
    fn attempts(&self) -> u64 {
        self.0.herald_stats.attempts
    }
    #[getter]
    fn p_psi_empirical(&self) -> (f64, f64) {
        (self.0.herald_stats.p_psi_empirical, self.0.herald_stats.p_psi_std_error)
    }

    /// List of `(basis, [n_pp, n_pm, n_mp, n_mm])`.
    #[getter]
    fn records(&self) -> Vec<(String, [u64; 4])> {
        self.0.records.iter().map(|r| (r.basis.to_string(), r.counts)).collect()
    }

    /// `(value, std_error)` for a target label such as `"|01>-|10>"` or `"PsiMinus"`.
    fn fidelity(&self, target: &str) -> PyResult<Option<(f64, f64)>> {
        let t = target_from_label(target)?;
        Ok(self.0.fidelity(t).map(|f| (f.value, f.std_error)))
    }

    fn to_json(&self) -> String {
        to_json(&self.0)
    }
}

#[pyclass(name = "Reconstruction", module = "pyheralded", frozen, skip_from_py_object)]
struct PyReconstruction {
    #[pyo3(get)]
    rho: PyDensityMatrix,
    #[pyo3(get)]
    log_likelihood: f64,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    iterations: usize,
}

#[pyfunction]
fn p_psi_minus(q1: &PyPureState, q2: &PyPureState) -> PyResult<f64> {
    protocol::p_psi_minus(&q1.0, &q2.0).map_err(err)
}

/// `(post_state or None, norm_sq)` of the gate Kraus operator on `q1 (x) q2`.
#[pyfunction]
fn gate_kraus_apply(q1: &PyPureState, q2: &PyPureState) -> PyResult<(Option<PyPureState>, f64)> {
    let r = protocol::gate_kraus_apply(&q1.0, &q2.0).map_err(err)?;
    Ok((r.state.map(PyPureState), r.norm_sq))
}

/// `(coincidence probability, post_state or None)` after photon interference
/// with mode overlap `m`.
#[pyfunction]
#[pyo3(signature = (q1, q2, m = 1.0))]
fn herald(q1: &PyPureState, q2: &PyPureState, m: f64) -> PyResult<(f64, Option<PyDensityMatrix>)> {
    let h = protocol::herald_from_qubits(&q1.0, &q2.0, m).map_err(err)?;
    Ok((h.coincidence_probability, h.post_state.map(PyDensityMatrix)))
}

#[pyfunction]
fn noisy_herald(q1: &PyPureState, q2: &PyPureState, model: &PyErrorModel) -> PyResult<(f64, Option<PyDensityMatrix>)> {
    let h = noise::noisy_herald(&q1.0, &q2.0, &model.0).map_err(err)?;
    Ok((h.coincidence_probability, h.post_state.map(PyDensityMatrix)))
}

#[pyfunction]
fn entanglement_of_formation_from_concurrence(c: f64) -> f64 {
    tomography::entanglement_of_formation_from_concurrence(c)
}

/// Fidelity with a target class from per-basis count records.
#[pyfunction]
fn fidelity_from_counts(target: &str, records: Vec<(String, [u64; 4])>) -> PyResult<(f64, f64)> {
    let t = target_from_label(target)?;
    let mut parities = std::collections::BTreeMap::new();
    for (b, counts) in records {
        let basis: BasisPair = b.parse().map_err(err)?;
        parities.insert(basis, measurement::parity(&CountRecord::new(basis, counts)).map_err(err)?);
    }
    measurement::fidelity_from_parities(t, &parities).map_err(err)
}

/// Maximum-likelihood reconstruction from count-file text in the
/// `<b1> <b2> n_pp n_pm n_mp n_mm` format.
#[pyfunction]
#[pyo3(signature = (counts_text, eps_det = 0.0))]
fn reconstruct_mle(counts_text: &str, eps_det: f64) -> PyResult<PyReconstruction> {
    let records = parse_count_records(counts_text).map_err(err)?;
    let input = TomographyInput::new(records).map_err(err)?;
    let r = tomography::reconstruct_mle(&input, eps_det, &MleOptions::default()).map_err(err)?;
    Ok(PyReconstruction {
        rho: PyDensityMatrix(r.rho_hat),
        log_likelihood: r.log_likelihood,
        converged: r.converged,
        iterations: r.iterations,
    })
}

#[pyfunction]
fn run_experiment(config: &PyExperimentConfig) -> PyResult<PyRunReport> {
    montecarlo::run_experiment(&config.0).map(PyRunReport).map_err(err)
}

/// Rows of `(row, fidelity or None, heralds)` plus the rows 1-7 mean fidelity.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn reproduce_table1(config: &PyExperimentConfig) -> PyResult<(Vec<(usize, Option<(f64, f64)>, u64)>, f64)> {
    let t = montecarlo::reproduce_table1(&config.0).map_err(err)?;
    let rows = t.rows.iter().map(|r| (r.row, r.fidelity, r.report.herald_stats.heralds)).collect();
    Ok((rows, t.mean_fidelity()))
}

#[pymodule]
pub fn pyheralded(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPureState>()?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyErrorModel>()?;
    m.add_class::<PyRateBudget>()?;
    m.add_class::<PyExperimentConfig>()?;
    m.add_class::<PyRunReport>()?;
    m.add_class::<PyReconstruction>()?;
    m.add_function(wrap_pyfunction!(p_psi_minus, m)?)?;
    m.add_function(wrap_pyfunction!(gate_kraus_apply, m)?)?;
    m.add_function(wrap_pyfunction!(herald, m)?)?;
    m.add_function(wrap_pyfunction!(noisy_herald, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_of_formation_from_concurrence, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_from_counts, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct_mle, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce_table1, m)?)?;
    Ok(())
}
