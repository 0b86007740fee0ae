//! Coverage and ergodic rate of the typical MT.
//!
//! The success probability conditioned on the serving gain is a double
//! integral: an outer one over the nearest-BS distance `r` and an inner one
//! over interferer distances `w > r` produced by the PGFL of the PPP. Links
//! shorter than the LOS radius use the LOS exponent, all others the NLOS one.

use std::cell::Cell;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mobility::misalignment_probability;
use crate::model::{BeamSetting, NetworkConfig};
use crate::quadrature::{self, Estimate, QuadFailure, Tolerance};

/// Mapping used for the `(edge, inf)` inner integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailStrategy {
    /// `w = edge / u`, integrate over `u in (0, 1]`.
    #[default]
    Reciprocal,
    /// Truncate at `edge * factor`.
    Truncate { factor: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub inner_rel: f64,
    pub outer_rel: f64,
    pub rate_rel: f64,
    /// Nearest-BS tail mass `exp(-lambda pi r_max^2)` left out of the outer integral.
    pub tail_mass: f64,
    pub tail: TailStrategy,
    /// Number of log-spaced breakpoints `Q_max / 10^k` seeding the rate integral.
    pub z_decades: u32,
    pub max_intervals: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            inner_rel: 1e-7,
            outer_rel: 1e-6,
            rate_rel: 1e-5,
            tail_mass: 1e-12,
            tail: TailStrategy::Reciprocal,
            z_decades: 6,
            max_intervals: 4000,
        }
    }
}

impl QuadratureSpec {
    /// Same settings with every relative tolerance multiplied by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.inner_rel *= factor;
        self.outer_rel *= factor;
        self.rate_rel *= factor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("inner_rel", self.inner_rel),
            ("outer_rel", self.outer_rel),
            ("rate_rel", self.rate_rel),
        ] {
            if !(v > 0.0 && v <= 1e-2) {
                return Err(Error::invalid(
                    name,
                    format!("must lie in (0, 1e-2], got {v}"),
                ));
            }
        }
        if !(self.tail_mass > 0.0 && self.tail_mass < 1e-3) {
            return Err(Error::invalid(
                "tail_mass",
                format!("must lie in (0, 1e-3), got {}", self.tail_mass),
            ));
        }
        if let TailStrategy::Truncate { factor } = self.tail {
            if factor < 2 {
                return Err(Error::invalid(
                    "tail",
                    "truncation factor must be at least 2",
                ));
            }
        }
        Ok(())
    }

    /// Outer truncation radius; always beyond the LOS radius.
    pub fn r_max(&self, cfg: &NetworkConfig) -> f64 {
        let r = ((1.0 / self.tail_mass).ln() / (PI * cfg.lambda)).sqrt();
        r.max(2.0 * cfg.los_radius)
    }

    fn inner_tol(&self) -> Tolerance {
        Tolerance {
            rel: self.inner_rel,
            abs: 1e-13,
            max_intervals: self.max_intervals,
        }
    }

    fn outer_tol(&self) -> Tolerance {
        Tolerance {
            rel: self.outer_rel,
            abs: 1e-12,
            max_intervals: self.max_intervals,
        }
    }
}

/// The bracketed interferer term of the PGFL, parameterised by
/// `scale = beta r^alpha_S / G_0`.
#[derive(Debug, Clone, Copy)]
struct Kernel {
    two_pi_lambda: f64,
    p_hit: f64,
    gain_main: f64,
    gain_side: f64,
}

impl Kernel {
    fn new(lambda: f64, beams: &BeamSetting) -> Self {
        Self {
            two_pi_lambda: 2.0 * PI * lambda,
            p_hit: beams.main_lobe_hit_probability(),
            gain_main: beams.gain_main,
            gain_side: beams.gain_side,
        }
    }

    #[inline]
    fn eval(&self, scale: f64, alpha_i: f64, w: f64) -> f64 {
        let s = scale * w.powf(-alpha_i);
        let xm = s * self.gain_main;
        let xs = s * self.gain_side;
        // 1 - p/(1+xm) - (1-p)/(1+xs), written without cancellation.
        let bracket = self.p_hit * xm / (1.0 + xm) + (1.0 - self.p_hit) * xs / (1.0 + xs);
        self.two_pi_lambda * bracket * w
    }
}

/// Interferer integrand `F(alpha_S, alpha_I, w)` at serving distance `r`,
/// threshold `beta` and serving gain `g0`.
#[allow(clippy::too_many_arguments)]
pub fn interference_factor(
    alpha_s: f64,
    alpha_i: f64,
    w: f64,
    r: f64,
    beta: f64,
    g0: f64,
    beams: &BeamSetting,
    lambda: f64,
) -> f64 {
    Kernel::new(lambda, beams).eval(beta * r.powf(alpha_s) / g0, alpha_i, w)
}

fn nearest_density(lambda: f64, r: f64) -> f64 {
    2.0 * PI * lambda * r * (-lambda * PI * r * r).exp()
}

/// Shared state of one `q_s` evaluation.
struct Conditional<'a> {
    cfg: &'a NetworkConfig,
    kernel: Kernel,
    quad: &'a QuadratureSpec,
    beta: f64,
    g0: f64,
    noise_coef: f64,
    worst_inner: Cell<f64>,
    inner_failure: Cell<Option<QuadFailure>>,
}

impl Conditional<'_> {
    fn note(&self, res: std::result::Result<Estimate, QuadFailure>) -> f64 {
        match res {
            Ok(e) => {
                self.worst_inner.set(self.worst_inner.get().max(e.error));
                e.value
            }
            Err(f) => {
                self.inner_failure.set(Some(f));
                f.estimate
            }
        }
    }

    fn finite(&self, scale: f64, alpha_i: f64, a: f64, b: f64) -> f64 {
        let k = self.kernel;
        self.note(quadrature::integrate(
            |w| k.eval(scale, alpha_i, w),
            a,
            b,
            self.quad.inner_tol(),
        ))
    }

    fn tail(&self, scale: f64, alpha_i: f64, edge: f64) -> f64 {
        let k = self.kernel;
        let res = match self.quad.tail {
            TailStrategy::Reciprocal => quadrature::integrate_to_infinity(
                |w| k.eval(scale, alpha_i, w),
                edge,
                self.quad.inner_tol(),
            ),
            TailStrategy::Truncate { factor } => quadrature::integrate_pieces(
                |w| k.eval(scale, alpha_i, w),
                &[edge, 2.0 * edge, edge * f64::from(factor)],
                self.quad.inner_tol(),
            ),
        };
        self.note(res)
    }

    /// Integrand of the outer integral for a serving link inside the LOS ball.
    fn los_integrand(&self, r: f64) -> f64 {
        let cfg = self.cfg;
        let rc = cfg.los_radius;
        let scale = self.beta * r.powf(cfg.alpha_los) / self.g0;
        let exponent =
            self.finite(scale, cfg.alpha_los, r, rc) + self.tail(scale, cfg.alpha_nlos, rc);
        nearest_density(cfg.lambda, r) * (-self.noise_coef * r.powf(cfg.alpha_los) - exponent).exp()
    }

    fn nlos_integrand(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let cfg = self.cfg;
        let ra = r.powf(cfg.alpha_nlos);
        let exponent = self.tail(self.beta * ra / self.g0, cfg.alpha_nlos, r);
        nearest_density(cfg.lambda, r) * (-self.noise_coef * ra - exponent).exp()
    }
}

fn no_convergence(quantity: &'static str, f: QuadFailure) -> Error {
    Error::NoConvergence {
        quantity,
        estimate: f.estimate,
        error: f.error,
    }
}

/// Success probability `P(SINR > beta)` given the serving antenna gain `g0`.
pub fn conditional_success(
    cfg: &NetworkConfig,
    beams: &BeamSetting,
    beta: f64,
    g0: f64,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(
            "beta",
            format!("must be positive, got {beta}"),
        ));
    }
    if !(g0.is_finite() && g0 > 0.0) {
        return Err(Error::invalid("g0", format!("must be positive, got {g0}")));
    }
    let derived = cfg.derived();
    let ctx = Conditional {
        cfg,
        kernel: Kernel::new(cfg.lambda, beams),
        quad,
        beta,
        g0,
        noise_coef: beta * derived.noise_power / (cfg.tx_power * derived.path_const * g0),
        worst_inner: Cell::new(0.0),
        inner_failure: Cell::new(None),
    };
    let rc = cfg.los_radius;
    let r_max = quad.r_max(cfg);

    let mut value = 0.0;
    let mut error = 0.0;
    if rc > 0.0 {
        let e = quadrature::integrate(|r| ctx.los_integrand(r), 0.0, rc, quad.outer_tol())
            .map_err(|f| no_convergence("LOS coverage integral", f))?;
        value += e.value;
        error += e.error;
    }
    // Seed the NLOS range with breakpoints around the bulk of the nearest-BS law.
    let bulk = 1.0 / cfg.lambda.sqrt();
    let mut points = vec![rc];
    points.extend(
        [0.25 * bulk, 0.5 * bulk, bulk]
            .into_iter()
            .filter(|&p| p > rc && p < r_max),
    );
    points.push(r_max);
    let e = quadrature::integrate_pieces(|r| ctx.nlos_integrand(r), &points, quad.outer_tol())
        .map_err(|f| no_convergence("NLOS coverage integral", f))?;
    value += e.value;
    error += e.error;

    if let Some(f) = ctx.inner_failure.get() {
        return Err(no_convergence("interference integral", f));
    }
    // exp(-I) moves by at most the inner absolute error, and the density
    // integrates to at most one.
    error += ctx.worst_inner.get() + quad.tail_mass;
    Ok(Estimate {
        value: value.clamp(0.0, 1.0),
        error,
    })
}

/// Mixture over the serving gain with an explicit misalignment probability.
pub fn success_probability_with(
    cfg: &NetworkConfig,
    beams: &BeamSetting,
    beta: f64,
    p_bm: f64,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    if !(0.0..=1.0).contains(&p_bm) {
        return Err(Error::invalid(
            "p_bm",
            format!("must lie in [0, 1], got {p_bm}"),
        ));
    }
    let main = conditional_success(cfg, beams, beta, beams.gain_main, quad)?;
    if p_bm == 0.0 {
        return Ok(main);
    }
    let side = conditional_success(cfg, beams, beta, beams.gain_side, quad)?;
    if p_bm == 1.0 {
        return Ok(side);
    }
    Ok(Estimate {
        value: (1.0 - p_bm) * main.value + p_bm * side.value,
        error: (1.0 - p_bm) * main.error + p_bm * side.error,
    })
}

/// Success probability of the typical MT with the mobility-driven
/// misalignment probability.
pub fn success_probability(
    cfg: &NetworkConfig,
    beams: &BeamSetting,
    beta: f64,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    success_probability_with(cfg, beams, beta, misalignment_probability(cfg, beams), quad)
}

/// Success probability sampled on a list of linear thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessCurve {
    pub n: u32,
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
}

/// Evaluates `p_s` at every threshold; points are computed in parallel and
/// the result does not depend on the evaluation order.
pub fn success_curve(
    cfg: &NetworkConfig,
    beams: &BeamSetting,
    thresholds: &[f64],
    quad: &QuadratureSpec,
) -> Result<SuccessCurve> {
    let p_bm = misalignment_probability(cfg, beams);
    let values = thresholds
        .par_iter()
        .map(|&beta| success_probability_with(cfg, beams, beta, p_bm, quad).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuccessCurve {
        n: beams.n,
        thresholds: thresholds.to_vec(),
        values,
    })
}

/// `W * int_0^Q p_s(z) / (1 + z) dz` for an arbitrary success function, in nats/s.
pub fn capped_rate<F>(
    mut p_s: F,
    bandwidth: f64,
    sinr_cap: f64,
    quad: &QuadratureSpec,
) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<Estimate>,
{
    let mut points = vec![0.0];
    for k in (1..=quad.z_decades).rev() {
        points.push(sinr_cap / 10f64.powi(k as i32));
    }
    points.push(sinr_cap);

    let mut failure = None;
    let mut worst = 0.0f64;
    let tol = Tolerance {
        rel: quad.rate_rel,
        abs: 1e-12,
        max_intervals: quad.max_intervals,
    };
    let res = quadrature::integrate_pieces(
        |z| {
            if z <= 0.0 {
                return 1.0;
            }
            match p_s(z) {
                Ok(e) => {
                    worst = worst.max(e.error);
                    e.value / (1.0 + z)
                }
                Err(err) => {
                    failure.get_or_insert(err);
                    0.0
                }
            }
        },
        &points,
        tol,
    );
    if let Some(err) = failure {
        return Err(err);
    }
    let e = res.map_err(|f| no_convergence("rate integral", f))?;
    Ok(Estimate {
        value: bandwidth * e.value,
        error: bandwidth * (e.error + worst * sinr_cap.ln_1p()),
    })
}

/// Ergodic rate with the SINR capped at `Q_max`, in nats/s.
pub fn ergodic_rate(
    cfg: &NetworkConfig,
    beams: &BeamSetting,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    let p_bm = misalignment_probability(cfg, beams);
    ergodic_rate_with(cfg, beams, p_bm, quad)
}

pub fn ergodic_rate_with(
    cfg: &NetworkConfig,
    beams: &BeamSetting,
    p_bm: f64,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    quad.validate()?;
    capped_rate(
        |z| success_probability_with(cfg, beams, z, p_bm, quad),
        cfg.bandwidth,
        cfg.sinr_cap,
        quad,
    )
}
