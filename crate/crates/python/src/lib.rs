//! Python bindings: deployments, beam settings, the analytical ASE model and
//! the Monte Carlo oracles.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use beamase::mc::{self, CrossingSpec, McOptions};
use beamase::model::db_to_linear;
use beamase::sinr::{self, QuadratureSpec};
use beamase::{Band, Error, Evaluator, GainLaw, RateUnit};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter { .. } | Error::Parse { .. } => {
            PyValueError::new_err(e.to_string())
        }
        Error::NoConvergence { .. } | Error::Simulation(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
    }
}

/// Deployment in human units (m, km/h, GHz, MHz, dBm, dBm/Hz, ms, dB).
#[pyclass(name = "Deployment", get_all, set_all, from_py_object)]
#[derive(Clone)]
struct PyDeployment {
    isd_m: f64,
    speed_kmh: f64,
    freq_ghz: f64,
    bw_mhz: f64,
    tx_dbm: f64,
    noise_dbm_hz: f64,
    ssb_period_ms: f64,
    overhead_beam_ms: f64,
    overhead_cell_ms: f64,
    alpha_los: f64,
    alpha_nlos: f64,
    los_radius_m: f64,
    sinr_cap_db: f64,
    /// "sigma2" or "n0".
    noise_convention: String,
}

impl PyDeployment {
    fn to_rust(&self) -> PyResult<beamase::Deployment> {
        Ok(beamase::Deployment {
            isd_m: self.isd_m,
            speed_kmh: self.speed_kmh,
            freq_ghz: self.freq_ghz,
            bw_mhz: self.bw_mhz,
            tx_dbm: self.tx_dbm,
            noise_dbm_hz: self.noise_dbm_hz,
            ssb_period_ms: self.ssb_period_ms,
            overhead_beam_ms: self.overhead_beam_ms,
            overhead_cell_ms: self.overhead_cell_ms,
            alpha_los: self.alpha_los,
            alpha_nlos: self.alpha_nlos,
            los_radius_m: self.los_radius_m,
            sinr_cap_db: self.sinr_cap_db,
            noise_convention: self.noise_convention.parse().map_err(to_py)?,
        })
    }

    fn network(&self) -> PyResult<beamase::NetworkConfig> {
        self.to_rust()?.to_config().map_err(to_py)
    }
}

impl From<beamase::Deployment> for PyDeployment {
    fn from(d: beamase::Deployment) -> Self {
        Self {
            isd_m: d.isd_m,
            speed_kmh: d.speed_kmh,
            freq_ghz: d.freq_ghz,
            bw_mhz: d.bw_mhz,
            tx_dbm: d.tx_dbm,
            noise_dbm_hz: d.noise_dbm_hz,
            ssb_period_ms: d.ssb_period_ms,
            overhead_beam_ms: d.overhead_beam_ms,
            overhead_cell_ms: d.overhead_cell_ms,
            alpha_los: d.alpha_los,
            alpha_nlos: d.alpha_nlos,
            los_radius_m: d.los_radius_m,
            sinr_cap_db: d.sinr_cap_db,
            noise_convention: d.noise_convention.to_string(),
        }
    }
}

#[pymethods]
impl PyDeployment {
    /// Band preset ("fr1" or "fr2") at the given ISD and speed.
    #[staticmethod]
    #[pyo3(signature = (band, isd_m, speed_kmh))]
    fn preset(band: &str, isd_m: f64, speed_kmh: f64) -> PyResult<Self> {
        let band: Band = band.parse().map_err(to_py)?;
        Ok(beamase::Deployment::preset(band, isd_m, speed_kmh).into())
    }

    /// BS density in 1/m².
    fn density(&self) -> PyResult<f64> {
        Ok(self.network()?.lambda)
    }

    /// Raises ValueError when the deployment is not admissible.
    fn validate(&self) -> PyResult<()> {
        self.network().map(|_| ())
    }

    fn __repr__(&self) -> String {
        format!(
            "Deployment(isd_m={}, speed_kmh={}, freq_ghz={}, bw_mhz={}, tx_dbm={})",
            self.isd_m, self.speed_kmh, self.freq_ghz, self.bw_mhz, self.tx_dbm
        )
    }
}

#[pyclass(name = "BeamSetting", frozen, get_all, from_py_object)]
#[derive(Clone)]
struct PyBeamSetting {
    n: u32,
    beamwidth: f64,
    gain_main: f64,
    gain_side: f64,
}

#[pymethods]
impl PyBeamSetting {
    /// `2^n` beams; gains default to `2^n` and `2^-n`.
    #[new]
    #[pyo3(signature = (n, gain_main=None, gain_side=None))]
    fn new(n: u32, gain_main: Option<f64>, gain_side: Option<f64>) -> PyResult<Self> {
        let law = match (gain_main, gain_side) {
            (None, None) => GainLaw::Reciprocal,
            (main, side) => {
                let r = beamase::beam_setting(n).map_err(to_py)?;
                GainLaw::Custom {
                    main: main.unwrap_or(r.gain_main),
                    side: side.unwrap_or(r.gain_side),
                }
            }
        };
        let b = beamase::BeamSetting::new(n, law).map_err(to_py)?;
        Ok(Self {
            n: b.n,
            beamwidth: b.beamwidth,
            gain_main: b.gain_main,
            gain_side: b.gain_side,
        })
    }

    fn beam_count(&self) -> u64 {
        1 << self.n
    }

    fn __repr__(&self) -> String {
        format!(
            "BeamSetting(n={}, gain_main={}, gain_side={})",
            self.n, self.gain_main, self.gain_side
        )
    }
}

impl PyBeamSetting {
    fn to_rust(&self) -> PyResult<beamase::BeamSetting> {
        beamase::BeamSetting::new(
            self.n,
            GainLaw::Custom {
                main: self.gain_main,
                side: self.gain_side,
            },
        )
        .map_err(to_py)
    }
}

#[pyclass(name = "AseResult", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyAseResult {
    n: u32,
    density: f64,
    rate: f64,
    rate_error: f64,
    unit: String,
    overhead: f64,
    effective_ase: f64,
    p_bm: f64,
    mu_b: f64,
    mu_c: f64,
}

impl From<beamase::AseResult> for PyAseResult {
    fn from(r: beamase::AseResult) -> Self {
        Self {
            n: r.n,
            density: r.lambda,
            rate: r.rate,
            rate_error: r.rate_error,
            unit: r.unit.to_string(),
            overhead: r.overhead,
            effective_ase: r.effective_ase,
            p_bm: r.p_bm,
            mu_b: r.mobility.mu_b_eff,
            mu_c: r.mobility.mu_c,
        }
    }
}

#[pymethods]
impl PyAseResult {
    fn __repr__(&self) -> String {
        format!(
            "AseResult(n={}, rate={:.6e}, overhead={:.4}, effective_ase={:.6e})",
            self.n, self.rate, self.overhead, self.effective_ase
        )
    }
}

fn evaluator(log_base: &str, tol: f64) -> PyResult<Evaluator> {
    let unit: RateUnit = log_base.parse().map_err(to_py)?;
    let quad = QuadratureSpec::default().scaled(tol);
    quad.validate().map_err(to_py)?;
    Ok(Evaluator::new(quad, unit))
}

/// Effective ASE and its ingredients for one beam exponent.
#[pyfunction]
#[pyo3(signature = (deployment, n, log_base="nats", tol=1.0))]
fn evaluate(
    py: Python<'_>,
    deployment: &PyDeployment,
    n: u32,
    log_base: &str,
    tol: f64,
) -> PyResult<PyAseResult> {
    let cfg = deployment.network()?;
    let eval = evaluator(log_base, tol)?;
    let beams = beamase::beam_setting(n).map_err(to_py)?;
    py.detach(|| eval.effective_ase(&cfg, &beams))
        .map(Into::into)
        .map_err(to_py)
}

/// Returns `(n_star, degenerate, results)` over `n_min..=n_max`.
#[pyfunction]
#[pyo3(signature = (deployment, n_min=1, n_max=10, log_base="nats", tol=1.0))]
fn optimize(
    py: Python<'_>,
    deployment: &PyDeployment,
    n_min: u32,
    n_max: u32,
    log_base: &str,
    tol: f64,
) -> PyResult<(u32, bool, Vec<PyAseResult>)> {
    let cfg = deployment.network()?;
    let eval = evaluator(log_base, tol)?;
    let opt = py
        .detach(|| eval.optimal_n(&cfg, n_min, n_max))
        .map_err(to_py)?;
    Ok((
        opt.best_n,
        opt.degenerate,
        opt.results.into_iter().map(Into::into).collect(),
    ))
}

/// Analytical `P(SINR > beta)` with the threshold in dB.
#[pyfunction]
fn success_probability(
    py: Python<'_>,
    deployment: &PyDeployment,
    beams: &PyBeamSetting,
    beta_db: f64,
) -> PyResult<f64> {
    let cfg = deployment.network()?;
    let b = beams.to_rust()?;
    py.detach(|| {
        sinr::success_probability(&cfg, &b, db_to_linear(beta_db), &QuadratureSpec::default())
    })
    .map(|e| e.value)
    .map_err(to_py)
}

/// Ergodic rate in nats/s.
#[pyfunction]
fn ergodic_rate(py: Python<'_>, deployment: &PyDeployment, beams: &PyBeamSetting) -> PyResult<f64> {
    let cfg = deployment.network()?;
    let b = beams.to_rust()?;
    py.detach(|| sinr::ergodic_rate(&cfg, &b, &QuadratureSpec::default()))
        .map(|e| e.value)
        .map_err(to_py)
}

/// `(estimate, standard_error)`.
type Moment = (f64, f64);

/// Monte Carlo `P(SINR > beta)` per threshold (dB) plus the capped rate, each
/// as `(estimate, standard_error)`.
#[pyfunction]
#[pyo3(signature = (deployment, beams, thresholds_db, samples=100_000, seed=1))]
fn simulate_sinr(
    py: Python<'_>,
    deployment: &PyDeployment,
    beams: &PyBeamSetting,
    thresholds_db: Vec<f64>,
    samples: u64,
    seed: u64,
) -> PyResult<(Vec<Moment>, Moment)> {
    let cfg = deployment.network()?;
    let b = beams.to_rust()?;
    let th: Vec<f64> = thresholds_db.iter().map(|&d| db_to_linear(d)).collect();
    let s = py
        .detach(|| mc::simulate_sinr(&cfg, &b, &th, samples, seed, &McOptions::default()))
        .map_err(to_py)?;
    Ok((
        s.success
            .iter()
            .map(|e| (e.estimate, e.standard_error))
            .collect(),
        (s.rate.estimate, s.rate.standard_error),
    ))
}

/// Measured `(handovers per m, reselections per m)` along straight trajectories.
#[pyfunction]
#[pyo3(signature = (deployment, beams, length_m=1e6, replicas=16, seed=1))]
fn count_crossings(
    py: Python<'_>,
    deployment: &PyDeployment,
    beams: &PyBeamSetting,
    length_m: f64,
    replicas: u32,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let cfg = deployment.network()?;
    let b = beams.to_rust()?;
    let r = py
        .detach(|| mc::count_crossings(&cfg, &b, &CrossingSpec::new(length_m, replicas), seed))
        .map_err(to_py)?;
    Ok((
        r.handover_intensity.estimate,
        r.reselection_intensity.estimate,
    ))
}

#[pymodule]
#[pyo3(name = "beamase")]
fn beamase_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDeployment>()?;
    m.add_class::<PyBeamSetting>()?;
    m.add_class::<PyAseResult>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(success_probability, m)?)?;
    m.add_function(wrap_pyfunction!(ergodic_rate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_sinr, m)?)?;
    m.add_function(wrap_pyfunction!(count_crossings, m)?)?;
    Ok(())
}
