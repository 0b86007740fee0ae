//! SINR of the typical MT at the origin by direct simulation.
//!
//! BS distances are drawn in increasing order through the radial
//! construction of a PPP: the squared distance of the k-th closest point is
//! `Gamma_k / (pi lambda)` with `Gamma_k` a sum of k unit exponentials. The
//! first point is the serving BS. Every link gets an i.i.d. unit-mean
//! exponential fade. The serving gain is the side lobe with the misalignment
//! probability; each interferer hits the MT with its main lobe with
//! probability `2^-n`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::{deterministic_reduce, stream, McEstimate};
use crate::error::{Error, Result};
use crate::mobility::misalignment_probability;
use crate::model::{BeamSetting, NetworkConfig};
use crate::sinr::QuadratureSpec;

/// Fewest realizations accepted by the estimators.
pub const MIN_SAMPLES: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    /// Simulation disk radius; derived from the configuration when `None`.
    pub window_radius: Option<f64>,
    /// Share of the mean interference allowed to fall outside the window.
    pub tail_fraction: f64,
    pub interference: bool,
    pub noise: bool,
    /// Overrides the mobility-driven misalignment probability.
    pub p_bm: Option<f64>,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            window_radius: None,
            tail_fraction: 1e-3,
            interference: true,
            noise: true,
            p_bm: None,
        }
    }
}

/// Radius beyond which the mean interference seen from the mean nearest-BS
/// distance drops below `tail_fraction` of its total. Uses the NLOS law
/// only, which overstates the tail whenever a LOS ball is present.
pub fn interference_window_radius(cfg: &NetworkConfig, tail_fraction: f64) -> f64 {
    let mean_nearest = 0.5 / cfg.lambda.sqrt();
    mean_nearest * tail_fraction.powf(-1.0 / (cfg.alpha_nlos - 2.0))
}

/// Simulation disk radius used when [`McOptions::window_radius`] is unset.
pub fn default_window_radius(cfg: &NetworkConfig, tail_fraction: f64) -> f64 {
    interference_window_radius(cfg, tail_fraction)
        .max(5.0 * QuadratureSpec::default().r_max(cfg))
        .max(10.0 * cfg.los_radius)
}

#[inline]
fn path_gain(cfg: &NetworkConfig, k: f64, d2: f64) -> f64 {
    let alpha = if d2 < cfg.los_radius * cfg.los_radius {
        cfg.alpha_los
    } else {
        cfg.alpha_nlos
    };
    k * d2.powf(-0.5 * alpha)
}

/// An explicit link-level snapshot: distances and antenna gains of the
/// serving BS and of every interferer.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub serving_distance: f64,
    pub serving_gain: f64,
    /// `(distance, antenna gain)` per interferer.
    pub interferers: Vec<(f64, f64)>,
}

impl Snapshot {
    /// SINR for the given fades (serving first, then one per interferer).
    pub fn sinr(&self, cfg: &NetworkConfig, fades: &[f64]) -> f64 {
        assert_eq!(fades.len(), self.interferers.len() + 1);
        let d = cfg.derived();
        let gain = |dist: f64| path_gain(cfg, d.path_const, dist * dist);
        let signal = cfg.tx_power * self.serving_gain * fades[0] * gain(self.serving_distance);
        let interference: f64 = self
            .interferers
            .iter()
            .zip(&fades[1..])
            .map(|(&(dist, g), &h)| cfg.tx_power * g * h * gain(dist))
            .sum();
        signal / (d.noise_power + interference)
    }
}

struct Sampler<'a> {
    cfg: &'a NetworkConfig,
    path_const: f64,
    noise: f64,
    pi_lambda: f64,
    radius_sq: f64,
    p_bm: f64,
    p_hit: f64,
    gain_main: f64,
    gain_side: f64,
    interference: bool,
}

impl Sampler<'_> {
    /// One SINR draw plus the number of empty windows that were redrawn.
    fn draw<R: Rng>(&self, rng: &mut R) -> (f64, u64) {
        let mut resampled = 0;
        let first = loop {
            let g: f64 = Exp1.sample(rng);
            if g / self.pi_lambda <= self.radius_sq {
                break g;
            }
            resampled += 1;
        };
        let serving_gain = if rng.random::<f64>() < self.p_bm {
            self.gain_side
        } else {
            self.gain_main
        };
        let fade: f64 = Exp1.sample(rng);
        let signal = self.cfg.tx_power
            * serving_gain
            * fade
            * path_gain(self.cfg, self.path_const, first / self.pi_lambda);

        let mut interference = 0.0;
        if self.interference {
            let mut gamma = first;
            loop {
                gamma += Distribution::<f64>::sample(&Exp1, rng);
                let d2 = gamma / self.pi_lambda;
                if d2 > self.radius_sq {
                    break;
                }
                let g = if rng.random::<f64>() < self.p_hit {
                    self.gain_main
                } else {
                    self.gain_side
                };
                let h: f64 = Exp1.sample(rng);
                interference += g * h * path_gain(self.cfg, self.path_const, d2);
            }
            interference *= self.cfg.tx_power;
        }
        (signal / (self.noise + interference), resampled)
    }
}

/// Success fractions at several thresholds and the capped rate, all from one
/// set of realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrStudy {
    pub thresholds: Vec<f64>,
    pub success: Vec<McEstimate>,
    /// `W * E[ln(1 + min(SINR, Q_max))]`, nats/s.
    pub rate: McEstimate,
    /// Realizations redrawn because the window held no BS.
    pub resampled: u64,
    pub window_radius: f64,
}

#[derive(Default)]
struct Acc {
    hits: Vec<u64>,
    rate_sum: f64,
    rate_sq: f64,
    resampled: u64,
}

pub fn simulate_sinr(
    cfg: &NetworkConfig,
    beams: &BeamSetting,
    thresholds: &[f64],
    samples: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<SinrStudy> {
    cfg.validate()?;
    if samples < MIN_SAMPLES {
        return Err(Error::invalid(
            "samples",
            format!("need at least {MIN_SAMPLES} realizations, got {samples}"),
        ));
    }
    let radius = opts
        .window_radius
        .unwrap_or_else(|| default_window_radius(cfg, opts.tail_fraction));
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid(
            "window_radius",
            format!("must be positive, got {radius}"),
        ));
    }
    let p_bm = opts
        .p_bm
        .unwrap_or_else(|| misalignment_probability(cfg, beams));
    let d = cfg.derived();
    let sampler = Sampler {
        cfg,
        path_const: d.path_const,
        noise: if opts.noise { d.noise_power } else { 0.0 },
        pi_lambda: PI * cfg.lambda,
        radius_sq: radius * radius,
        p_bm,
        p_hit: beams.main_lobe_hit_probability(),
        gain_main: beams.gain_main,
        gain_side: beams.gain_side,
        interference: opts.interference,
    };
    let cap = cfg.sinr_cap;
    let w = cfg.bandwidth;
    let acc = deterministic_reduce(
        samples,
        |i, acc: &mut Acc| {
            if acc.hits.is_empty() {
                acc.hits = vec![0; thresholds.len()];
            }
            let mut rng = stream(seed, i);
            let (sinr, resampled) = sampler.draw(&mut rng);
            acc.resampled += resampled;
            for (hit, &beta) in acc.hits.iter_mut().zip(thresholds) {
                *hit += u64::from(sinr > beta);
            }
            let r = w * sinr.min(cap).ln_1p();
            acc.rate_sum += r;
            acc.rate_sq += r * r;
        },
        |total, part| {
            if total.hits.is_empty() {
                total.hits = vec![0; part.hits.len()];
            }
            for (t, p) in total.hits.iter_mut().zip(&part.hits) {
                *t += p;
            }
            total.rate_sum += part.rate_sum;
            total.rate_sq += part.rate_sq;
            total.resampled += part.resampled;
        },
    );
    if acc.resampled > 0 {
        log::info!(
            "{} realizations had an empty window and were redrawn",
            acc.resampled
        );
    }
    let success = acc
        .hits
        .iter()
        .map(|&h| McEstimate::from_moments(h as f64, h as f64, samples, seed))
        .collect();
    Ok(SinrStudy {
        thresholds: thresholds.to_vec(),
        success,
        rate: McEstimate::from_moments(acc.rate_sum, acc.rate_sq, samples, seed),
        resampled: acc.resampled,
        window_radius: radius,
    })
}

/// Fraction of realizations with `SINR > beta`.
pub fn simulate_success_prob(
    cfg: &NetworkConfig,
    beams: &BeamSetting,
    beta: f64,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    let s = simulate_sinr(cfg, beams, &[beta], samples, seed, &McOptions::default())?;
    Ok(s.success[0])
}

/// Average of `W ln(1 + min(SINR, Q_max))`, nats/s.
pub fn simulate_rate(
    cfg: &NetworkConfig,
    beams: &BeamSetting,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    Ok(simulate_sinr(cfg, beams, &[], samples, seed, &McOptions::default())?.rate)
}
