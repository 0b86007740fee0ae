//! Analytical model against the Monte Carlo oracles.

use std::f64::consts::PI;
use std::fmt;

use crate::error::Result;
use crate::mc::{count_crossings, simulate_sinr, CrossingSpec, McOptions};
use crate::mobility::misalignment_probability;
use crate::model::{db_to_linear, BeamSetting, GainLaw, NetworkConfig};
use crate::sinr::{ergodic_rate_with, success_curve, QuadratureSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationPlan {
    pub samples: u64,
    pub seed: u64,
    pub quad: QuadratureSpec,
    /// Multiplies the main-lobe gain of the analytical model only.
    pub gain_factor: f64,
    pub thresholds_db: Vec<f64>,
    pub success_exponents: Vec<u32>,
    /// Exponent whose realizations also feed the rate check.
    pub rate_exponent: Option<u32>,
    pub crossing_exponents: Vec<u32>,
    pub trajectory_m: f64,
    pub trajectory_replicas: u32,
    /// Relative tolerance of the crossing intensities.
    pub crossing_rel: f64,
    /// Absolute floor of the success-probability tolerance.
    pub success_abs: f64,
    /// Relative tolerance floor of the rate check.
    pub rate_rel: f64,
    /// Standard errors allowed on every MC comparison.
    pub sigmas: f64,
}

impl ValidationPlan {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            quad: QuadratureSpec::default(),
            gain_factor: 1.0,
            thresholds_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            success_exponents: vec![2, 4, 6],
            rate_exponent: Some(4),
            crossing_exponents: vec![1, 2, 3, 4, 6],
            trajectory_m: 1e6,
            trajectory_replicas: 16,
            crossing_rel: 0.02,
            success_abs: 0.01,
            rate_rel: 0.03,
            sigmas: 3.0,
        }
    }
}

/// One comparison of an analytical target against an estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub target: f64,
    pub estimate: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn deviation(&self) -> f64 {
        (self.estimate - self.target).abs()
    }

    pub fn passed(&self) -> bool {
        self.deviation() <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<34} {:>13.6e} {:>13.6e} {:>11.3e} {}",
            self.name,
            self.target,
            self.estimate,
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Measured reselection and handover intensities against `2^n sqrt(lambda)/pi`
/// and `4 sqrt(lambda)/pi`, two checks per exponent.
pub fn crossing_checks(cfg: &NetworkConfig, plan: &ValidationPlan) -> Result<Vec<Check>> {
    let root = cfg.lambda.sqrt();
    let spec = CrossingSpec::new(plan.trajectory_m, plan.trajectory_replicas);
    let mut out = Vec::new();
    for &n in &plan.crossing_exponents {
        let beams = BeamSetting::new(n, GainLaw::Reciprocal)?;
        let rep = count_crossings(cfg, &beams, &spec, plan.seed)?;
        let beam_target = f64::from(beams.beam_count()) * root / PI;
        let cell_target = 4.0 * root / PI;
        out.push(Check {
            name: format!("reselections/m n={n}"),
            target: beam_target,
            estimate: rep.reselection_intensity.estimate,
            tolerance: plan.crossing_rel * beam_target,
        });
        out.push(Check {
            name: format!("handovers/m n={n}"),
            target: cell_target,
            estimate: rep.handover_intensity.estimate,
            tolerance: plan.crossing_rel * cell_target,
        });
    }
    Ok(out)
}

/// Success probabilities on the threshold grid and, for the rate exponent,
/// the capped ergodic rate. One set of realizations per exponent serves
/// every check of that exponent.
pub fn oracle_checks(cfg: &NetworkConfig, plan: &ValidationPlan) -> Result<Vec<Check>> {
    let thresholds: Vec<f64> = plan
        .thresholds_db
        .iter()
        .map(|&b| db_to_linear(b))
        .collect();
    let mut exponents = plan.success_exponents.clone();
    if let Some(r) = plan.rate_exponent {
        if !exponents.contains(&r) {
            exponents.push(r);
        }
    }
    let mut out = Vec::new();
    for n in exponents {
        let truth = BeamSetting::new(n, GainLaw::Reciprocal)?;
        let model = BeamSetting::new(
            n,
            GainLaw::Custom {
                main: truth.gain_main * plan.gain_factor,
                side: truth.gain_side,
            },
        )?;
        let study = simulate_sinr(
            cfg,
            &truth,
            &thresholds,
            plan.samples,
            plan.seed,
            &McOptions::default(),
        )?;
        if plan.success_exponents.contains(&n) {
            let curve = success_curve(cfg, &model, &thresholds, &plan.quad)?;
            for ((db, p), mc) in plan
                .thresholds_db
                .iter()
                .zip(&curve.values)
                .zip(&study.success)
            {
                out.push(Check {
                    name: format!("p_s n={n} beta={db}dB"),
                    target: *p,
                    estimate: mc.estimate,
                    tolerance: plan.success_abs.max(plan.sigmas * mc.standard_error),
                });
            }
        }
        if plan.rate_exponent == Some(n) {
            let p_bm = misalignment_probability(cfg, &model);
            let rate = ergodic_rate_with(cfg, &model, p_bm, &plan.quad)?;
            out.push(Check {
                name: format!("rate nats/s n={n}"),
                target: rate.value,
                estimate: study.rate.estimate,
                tolerance: (plan.rate_rel * rate.value)
                    .max(plan.sigmas * study.rate.standard_error),
            });
        }
    }
    Ok(out)
}

/// Every check of the plan: crossings first, then the SINR oracle.
pub fn run_checks(cfg: &NetworkConfig, plan: &ValidationPlan) -> Result<Vec<Check>> {
    let mut checks = crossing_checks(cfg, plan)?;
    checks.extend(oracle_checks(cfg, plan)?);
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Band, Deployment};

    fn quick(cfg: &NetworkConfig, gain: f64) -> Vec<Check> {
        let mut plan = ValidationPlan::new(4000, 3);
        plan.gain_factor = gain;
        plan.success_exponents = vec![4];
        plan.crossing_exponents = vec![2];
        plan.trajectory_m = 2e5;
        plan.trajectory_replicas = 8;
        plan.crossing_rel = 0.05;
        run_checks(cfg, &plan).unwrap()
    }

    #[test]
    fn small_run_passes() {
        let cfg = Deployment::preset(Band::Fr2, 125.0, 30.0)
            .to_config()
            .unwrap();
        let checks = quick(&cfg, 1.0);
        assert_eq!(checks.len(), 2 + 7 + 1);
        for c in &checks {
            assert!(c.passed(), "{c}");
        }
    }

    #[test]
    fn doubled_gain_is_caught() {
        let cfg = Deployment::preset(Band::Fr2, 125.0, 30.0)
            .to_config()
            .unwrap();
        let checks = quick(&cfg, 2.0);
        assert!(checks
            .iter()
            .any(|c| c.name.starts_with("p_s") && !c.passed()));
    }

    #[test]
    fn check_verdict() {
        let c = Check {
            name: "x".into(),
            target: 1.0,
            estimate: 1.1,
            tolerance: 0.05,
        };
        assert!(!c.passed());
        assert!(c.to_string().ends_with("FAIL"));
    }
}
