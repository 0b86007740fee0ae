//! Boundary-crossing intensities of a straight-line MT in a Poisson-Voronoi
//! network, beam misalignment, and the resulting time overhead.

use std::f64::consts::PI;

use crate::model::{BeamSetting, NetworkConfig};

/// Misalignment probabilities above this are reported as a warning.
const MISALIGNMENT_WARN: f64 = 0.99;

/// Linear (per m) and time (per s) intensity of a crossing process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intensity {
    pub per_meter: f64,
    pub per_second: f64,
}

/// Cell boundary crossings (handovers): `4 sqrt(lambda) / pi` per metre.
pub fn handover_intensity(cfg: &NetworkConfig) -> Intensity {
    let per_meter = 4.0 * cfg.lambda.sqrt() / PI;
    Intensity {
        per_meter,
        per_second: per_meter * cfg.speed,
    }
}

/// Beam boundary crossings inside a cell: `2^n sqrt(lambda) / pi` per metre.
pub fn beam_reselection_intensity(cfg: &NetworkConfig, beams: &BeamSetting) -> Intensity {
    let per_meter = f64::from(beams.beam_count()) * cfg.lambda.sqrt() / PI;
    Intensity {
        per_meter,
        per_second: per_meter * cfg.speed,
    }
}

/// Probability that the MT has left its reference beam since the last SSB.
pub fn misalignment_probability(cfg: &NetworkConfig, beams: &BeamSetting) -> f64 {
    let mu = beam_reselection_intensity(cfg, beams).per_meter;
    let p = -(-cfg.speed * cfg.ssb_period * mu).exp_m1();
    if p > MISALIGNMENT_WARN {
        log::warn!(
            "beam misalignment probability {p:.4} for n = {}: the MT crosses several beams per SSB period",
            beams.n
        );
    }
    p
}

/// Reselection rate once reselections skipped between two SSBs are folded in:
/// `1 / max(tau, 1/mu)`. A stationary MT (`mu = 0`) never reselects.
pub fn capped_reselection_rate(mu_time: f64, ssb_period: f64) -> f64 {
    if mu_time <= 0.0 {
        0.0
    } else {
        1.0 / ssb_period.max(1.0 / mu_time)
    }
}

pub fn effective_reselection_rate(cfg: &NetworkConfig, beams: &BeamSetting) -> f64 {
    let mu = beam_reselection_intensity(cfg, beams).per_second;
    capped_reselection_rate(mu, cfg.ssb_period)
}

/// Fraction of time lost to beam alignment and handover beam sweeping.
/// Not clamped; values above one are legal here.
pub fn overhead_fraction(cfg: &NetworkConfig, beams: &BeamSetting) -> f64 {
    effective_reselection_rate(cfg, beams) * cfg.overhead_beam
        + handover_intensity(cfg).per_second * cfg.overhead_cell
}

/// Every mobility-derived quantity for one `(config, n)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityProfile {
    pub mu_s_cell: f64,
    pub mu_c: f64,
    pub mu_s_beam: f64,
    pub mu_t_beam: f64,
    pub mu_b_eff: f64,
    pub p_bm: f64,
    pub overhead: f64,
}

impl MobilityProfile {
    pub fn new(cfg: &NetworkConfig, beams: &BeamSetting) -> Self {
        let cell = handover_intensity(cfg);
        let beam = beam_reselection_intensity(cfg, beams);
        let mu_b_eff = capped_reselection_rate(beam.per_second, cfg.ssb_period);
        Self {
            mu_s_cell: cell.per_meter,
            mu_c: cell.per_second,
            mu_s_beam: beam.per_meter,
            mu_t_beam: beam.per_second,
            mu_b_eff,
            p_bm: misalignment_probability(cfg, beams),
            overhead: mu_b_eff * cfg.overhead_beam + cell.per_second * cfg.overhead_cell,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{beam_setting, lambda_from_isd, Band, Deployment};
    use approx::assert_relative_eq;

    fn cfg(isd: f64, kmh: f64) -> NetworkConfig {
        Deployment::preset(Band::Fr2, isd, kmh).to_config().unwrap()
    }

    #[test]
    fn handover_examples() {
        let mut c = cfg(125.0, 0.0);
        c.lambda = 1e-4;
        let h = handover_intensity(&c);
        assert_relative_eq!(h.per_meter, 0.012732, max_relative = 1e-4);
        assert_eq!(h.per_second, 0.0);

        let c = cfg(250.0, 30.0);
        assert_relative_eq!(c.lambda, 2.0372e-5, max_relative = 1e-4);
        let h = handover_intensity(&c);
        assert_relative_eq!(h.per_meter, 0.005746, max_relative = 1e-3);
        assert_relative_eq!(h.per_second, h.per_meter * 30.0 / 3.6, max_relative = 1e-14);
    }

    #[test]
    fn reselection_examples() {
        let mut c = cfg(125.0, 30.0);
        c.lambda = 1e-4;
        let two = beam_reselection_intensity(&c, &beam_setting(1).unwrap());
        assert_relative_eq!(two.per_meter, 2.0 * 0.01 / PI, max_relative = 1e-14);
        let eight = beam_reselection_intensity(&c, &beam_setting(3).unwrap());
        assert_relative_eq!(eight.per_meter, 0.025465, max_relative = 1e-4);
    }

    #[test]
    fn misalignment_limits() {
        let b = beam_setting(6).unwrap();
        assert_eq!(misalignment_probability(&cfg(125.0, 0.0), &b), 0.0);

        // Pick the speed that makes the exponent ln 2.
        let mut c = cfg(125.0, 30.0);
        let mu = beam_reselection_intensity(&c, &b).per_meter;
        c.speed = std::f64::consts::LN_2 / (c.ssb_period * mu);
        assert_relative_eq!(misalignment_probability(&c, &b), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn misalignment_regression_anchor() {
        // ISD 125 m, n = 6, 30 km/h, tau = 20 ms.
        let c = cfg(125.0, 30.0);
        let b = beam_setting(6).unwrap();
        let x = (30.0 / 3.6) * 0.02 * 64.0 * lambda_from_isd(125.0).sqrt() / PI;
        // Independent route: alternating series of 1 - exp(-x).
        let mut series = 0.0;
        let mut term = x;
        for k in 1..30 {
            series += term;
            term *= -x / f64::from(k + 1);
        }
        let p = misalignment_probability(&c, &b);
        assert_relative_eq!(p, series, max_relative = 1e-13);
        assert_relative_eq!(p, 0.030184600616021063, max_relative = 1e-12);
    }

    #[test]
    fn capped_rate() {
        assert_eq!(capped_reselection_rate(10.0, 0.02), 10.0);
        assert_eq!(capped_reselection_rate(100.0, 0.02), 50.0);
        assert_relative_eq!(
            capped_reselection_rate(50.0, 0.02),
            50.0,
            max_relative = 1e-15
        );
        assert_eq!(capped_reselection_rate(0.0, 0.02), 0.0);
    }

    #[test]
    fn overhead_cases() {
        let b = beam_setting(8).unwrap();
        assert_eq!(overhead_fraction(&cfg(250.0, 0.0), &b), 0.0);

        let fast = Deployment::preset(Band::Fr1, 250.0, 120.0)
            .to_config()
            .unwrap();
        let t8 = overhead_fraction(&fast, &b);
        let t9 = overhead_fraction(&fast, &beam_setting(9).unwrap());
        assert!(t8 > 0.0 && t9 >= t8);

        let mut c = cfg(125.0, 30.0);
        c.overhead_cell = 0.0;
        let base = overhead_fraction(&c, &b);
        c.overhead_beam *= 2.0;
        assert_relative_eq!(overhead_fraction(&c, &b), 2.0 * base, max_relative = 1e-15);
    }

    #[test]
    fn profile_matches_free_functions() {
        let c = cfg(75.0, 30.0);
        let b = beam_setting(5).unwrap();
        let p = MobilityProfile::new(&c, &b);
        assert_eq!(p.p_bm, misalignment_probability(&c, &b));
        assert_eq!(p.mu_b_eff, effective_reselection_rate(&c, &b));
        assert_relative_eq!(p.overhead, overhead_fraction(&c, &b), max_relative = 1e-15);
        assert_relative_eq!(p.mu_s_beam / p.mu_s_cell, 32.0 / 4.0, max_relative = 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn misalignment_monotone_in_n_and_speed(
                isd in 50.0f64..2000.0, kmh in 0.5f64..200.0, n in 1u32..12
            ) {
                let c = cfg(isd, kmh);
                let lo = beam_setting(n).unwrap();
                let hi = beam_setting(n + 1).unwrap();
                let p = misalignment_probability(&c, &lo);
                prop_assert!((0.0..1.0).contains(&p));
                prop_assert!(misalignment_probability(&c, &hi) > p);
                let faster = cfg(isd, kmh * 1.5);
                prop_assert!(misalignment_probability(&faster, &lo) > p);
            }

            #[test]
            fn capped_rate_respects_ssb(mu in 0.0f64..1e4, tau in 1e-3f64..1.0) {
                let r = capped_reselection_rate(mu, tau);
                prop_assert!(r * tau <= 1.0 + 1e-12);
                prop_assert!(r <= mu * (1.0 + 1e-12));
            }

            #[test]
            fn overhead_monotone(
                isd in 50.0f64..2000.0, kmh in 0.0f64..200.0, n in 1u32..12,
                tb in 0.0f64..0.1, tc in 0.0f64..0.1
            ) {
                let mut c = cfg(isd, kmh);
                c.overhead_beam = tb;
                c.overhead_cell = tc;
                let b = beam_setting(n).unwrap();
                let t = overhead_fraction(&c, &b);
                prop_assert!(t >= 0.0);
                prop_assert!(overhead_fraction(&c, &beam_setting(n + 1).unwrap()) >= t);
                let mut c2 = c; c2.speed *= 1.1;
                prop_assert!(overhead_fraction(&c2, &b) >= t);
                let mut c3 = c; c3.lambda *= 1.1;
                prop_assert!(overhead_fraction(&c3, &b) >= t);
                let mut c4 = c; c4.overhead_beam += 0.01;
                prop_assert!(overhead_fraction(&c4, &b) >= t);
                let mut c5 = c; c5.overhead_cell += 0.01;
                prop_assert!(overhead_fraction(&c5, &b) >= t);
            }

            #[test]
            fn sqrt_lambda_scaling(isd in 50.0f64..2000.0, n in 1u32..12) {
                let c = cfg(isd, 30.0);
                let mut c4 = c;
                c4.lambda *= 4.0;
                let b = beam_setting(n).unwrap();
                prop_assert_eq!(
                    handover_intensity(&c4).per_meter,
                    2.0 * handover_intensity(&c).per_meter
                );
                prop_assert_eq!(
                    beam_reselection_intensity(&c4, &b).per_meter,
                    2.0 * beam_reselection_intensity(&c, &b).per_meter
                );
            }
        }
    }
}
