//! Effective area spectral efficiency, the search over the beam exponent, and
//! parameter sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mobility::MobilityProfile;
use crate::model::{Band, BeamSetting, Deployment, GainLaw, NetworkConfig, MAX_BEAM_EXPONENT};
use crate::sinr::{ergodic_rate_with, QuadratureSpec};

/// Unit the ergodic rate is reported in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateUnit {
    #[default]
    Nats,
    Bits,
}

impl RateUnit {
    /// Multiplier applied to a rate expressed in nats.
    pub fn from_nats(self) -> f64 {
        match self {
            RateUnit::Nats => 1.0,
            RateUnit::Bits => std::f64::consts::LOG2_E,
        }
    }
}

impl FromStr for RateUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nats" => Ok(RateUnit::Nats),
            "bits" => Ok(RateUnit::Bits),
            other => Err(Error::invalid(
                "log_base",
                format!("expected nats or bits, got {other:?}"),
            )),
        }
    }
}

impl fmt::Display for RateUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateUnit::Nats => "nats",
            RateUnit::Bits => "bits",
        })
    }
}

/// Per-`n` evaluation of the overhead-adjusted ASE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AseResult {
    pub n: u32,
    pub lambda: f64,
    /// Ergodic rate per MT, in `unit`/s.
    pub rate: f64,
    pub rate_error: f64,
    pub unit: RateUnit,
    /// Unclamped overhead fraction.
    pub overhead: f64,
    /// `lambda * rate * max(0, 1 - overhead)`, in `unit`/s/m².
    pub effective_ase: f64,
    pub p_bm: f64,
    pub mobility: MobilityProfile,
}

/// `max(0, 1 - overhead)`, the fraction of time left for data.
pub fn useful_fraction(overhead: f64) -> f64 {
    (1.0 - overhead).max(0.0)
}

/// Evaluation settings shared by every ASE computation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Evaluator {
    pub quad: QuadratureSpec,
    pub unit: RateUnit,
    pub gain_law: GainLaw,
}

impl Evaluator {
    pub fn new(quad: QuadratureSpec, unit: RateUnit) -> Self {
        Self {
            quad,
            unit,
            gain_law: GainLaw::Reciprocal,
        }
    }

    pub fn effective_ase(&self, cfg: &NetworkConfig, beams: &BeamSetting) -> Result<AseResult> {
        cfg.validate()?;
        let mobility = MobilityProfile::new(cfg, beams);
        let rate = ergodic_rate_with(cfg, beams, mobility.p_bm, &self.quad)?;
        let scale = self.unit.from_nats();
        let rate_value = rate.value * scale;
        Ok(AseResult {
            n: beams.n,
            lambda: cfg.lambda,
            rate: rate_value,
            rate_error: rate.error * scale,
            unit: self.unit,
            overhead: mobility.overhead,
            effective_ase: cfg.lambda * rate_value * useful_fraction(mobility.overhead),
            p_bm: mobility.p_bm,
            mobility,
        })
    }

    /// Linear search over `n_min..=n_max`. Every `n` is evaluated; the
    /// smallest `n` attaining the maximum wins.
    pub fn optimal_n(&self, cfg: &NetworkConfig, n_min: u32, n_max: u32) -> Result<Optimum> {
        check_range(n_min, n_max)?;
        let results = (n_min..=n_max)
            .into_par_iter()
            .map(|n| {
                let beams = BeamSetting::new(n, self.gain_law)?;
                self.effective_ase(cfg, &beams)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Optimum::from_results(results))
    }

    /// One row per `(band, isd, speed, n)` in that order. Failed rows keep
    /// their error and the sweep carries on.
    pub fn sweep(
        &self,
        grid: &SweepGrid,
        base: impl Fn(Band, f64, f64) -> Deployment + Sync,
    ) -> Result<Vec<SweepRow>> {
        grid.validate()?;
        let mut points = Vec::new();
        for &band in &grid.bands {
            for &isd in &sorted(&grid.isds_m) {
                for &speed in &sorted(&grid.speeds_kmh) {
                    for n in grid.n_min..=grid.n_max {
                        points.push((band, isd, speed, n));
                    }
                }
            }
        }
        Ok(points
            .into_par_iter()
            .map(|(band, isd_m, speed_kmh, n)| {
                let outcome = base(band, isd_m, speed_kmh).to_config().and_then(|cfg| {
                    let beams = BeamSetting::new(n, self.gain_law)?;
                    self.effective_ase(&cfg, &beams)
                });
                SweepRow {
                    band,
                    isd_m,
                    speed_kmh,
                    n,
                    outcome,
                }
            })
            .collect())
    }
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn check_range(n_min: u32, n_max: u32) -> Result<()> {
    if n_min < 1 || n_max > MAX_BEAM_EXPONENT || n_min > n_max {
        return Err(Error::invalid(
            "n_range",
            format!("need 1 <= n_min <= n_max <= {MAX_BEAM_EXPONENT}, got [{n_min}, {n_max}]"),
        ));
    }
    Ok(())
}

/// Outcome of the linear search over `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub best_n: u32,
    /// Every `n` produced zero effective ASE; `best_n` is then `n_min`.
    pub degenerate: bool,
    pub results: Vec<AseResult>,
}

impl Optimum {
    pub fn from_results(results: Vec<AseResult>) -> Self {
        let mut best: Option<&AseResult> = None;
        for r in &results {
            if best.is_none_or(|b| r.effective_ase > b.effective_ase) {
                best = Some(r);
            }
        }
        let best = best.expect("non-empty n range");
        let degenerate = best.effective_ase <= 0.0;
        Self {
            best_n: if degenerate { results[0].n } else { best.n },
            degenerate,
            results,
        }
    }

    pub fn best(&self) -> &AseResult {
        self.results
            .iter()
            .find(|r| r.n == self.best_n)
            .expect("best n is part of the results")
    }
}

/// Axes of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub bands: Vec<Band>,
    pub isds_m: Vec<f64>,
    pub speeds_kmh: Vec<f64>,
    pub n_min: u32,
    pub n_max: u32,
}

impl SweepGrid {
    /// The ISD and speed axes analysed for one band, `n` in `1..=10`.
    pub fn band_defaults(band: Band) -> Self {
        Self {
            bands: vec![band],
            isds_m: band.isds().to_vec(),
            speeds_kmh: band.speeds().to_vec(),
            n_min: 1,
            n_max: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands.is_empty() || self.isds_m.is_empty() || self.speeds_kmh.is_empty() {
            return Err(Error::invalid(
                "grid",
                "every axis needs at least one value",
            ));
        }
        check_range(self.n_min, self.n_max)
    }

    pub fn len(&self) -> usize {
        self.bands.len()
            * self.isds_m.len()
            * self.speeds_kmh.len()
            * (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub band: Band,
    pub isd_m: f64,
    pub speed_kmh: f64,
    pub n: u32,
    pub outcome: Result<AseResult>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::beam_setting;
    use approx::assert_relative_eq;

    fn cfg(band: Band, isd: f64, kmh: f64) -> NetworkConfig {
        Deployment::preset(band, isd, kmh).to_config().unwrap()
    }

    #[test]
    fn clamp_zeroes_ase_when_overhead_dominates() {
        let mut c = cfg(Band::Fr2, 75.0, 30.0);
        c.overhead_beam = 1.0;
        let r = Evaluator::default()
            .effective_ase(&c, &beam_setting(6).unwrap())
            .unwrap();
        assert!(r.overhead >= 1.0);
        assert_eq!(r.effective_ase, 0.0);
    }

    #[test]
    fn stationary_ase_is_lambda_times_rate() {
        let c = cfg(Band::Fr1, 500.0, 0.0);
        let r = Evaluator::default()
            .effective_ase(&c, &beam_setting(4).unwrap())
            .unwrap();
        assert_eq!(r.overhead, 0.0);
        assert_eq!(r.p_bm, 0.0);
        assert_eq!(r.effective_ase, c.lambda * r.rate);
    }

    #[test]
    fn bits_are_rescaled_nats() {
        let c = cfg(Band::Fr2, 125.0, 3.0);
        let b = beam_setting(3).unwrap();
        let nats = Evaluator::new(QuadratureSpec::default(), RateUnit::Nats)
            .effective_ase(&c, &b)
            .unwrap();
        let bits = Evaluator::new(QuadratureSpec::default(), RateUnit::Bits)
            .effective_ase(&c, &b)
            .unwrap();
        assert_relative_eq!(
            bits.rate,
            nats.rate / std::f64::consts::LN_2,
            max_relative = 1e-14
        );
    }

    #[test]
    fn single_point_range() {
        let c = cfg(Band::Fr2, 125.0, 30.0);
        let opt = Evaluator::default().optimal_n(&c, 3, 3).unwrap();
        assert_eq!(opt.best_n, 3);
        assert_eq!(opt.results.len(), 1);
        assert!(Evaluator::default().optimal_n(&c, 0, 3).is_err());
        assert!(Evaluator::default().optimal_n(&c, 4, 3).is_err());
        assert!(Evaluator::default().optimal_n(&c, 1, 21).is_err());
    }

    fn fake(n: u32, ase: f64) -> AseResult {
        let c = cfg(Band::Fr1, 250.0, 30.0);
        AseResult {
            n,
            lambda: c.lambda,
            rate: 1.0,
            rate_error: 0.0,
            unit: RateUnit::Nats,
            overhead: 0.0,
            effective_ase: ase,
            p_bm: 0.0,
            mobility: MobilityProfile::new(&c, &beam_setting(n).unwrap()),
        }
    }

    #[test]
    fn ties_pick_smallest_n() {
        let opt =
            Optimum::from_results(vec![fake(2, 1.0), fake(3, 5.0), fake(4, 5.0), fake(5, 2.0)]);
        assert_eq!(opt.best_n, 3);
        assert!(!opt.degenerate);
    }

    #[test]
    fn degenerate_optimum_flags_n_min() {
        let opt = Optimum::from_results(vec![fake(4, 0.0), fake(5, 0.0)]);
        assert_eq!(opt.best_n, 4);
        assert!(opt.degenerate);
    }

    #[test]
    fn grid_cardinality() {
        assert_eq!(SweepGrid::band_defaults(Band::Fr1).len(), 90);
        assert_eq!(SweepGrid::band_defaults(Band::Fr2).len(), 60);
        let empty = SweepGrid {
            isds_m: vec![],
            ..SweepGrid::band_defaults(Band::Fr1)
        };
        assert!(empty.validate().is_err());
    }

    #[test]
    fn sweep_orders_rows_and_keeps_failures() {
        let grid = SweepGrid {
            bands: vec![Band::Fr2],
            isds_m: vec![125.0, -1.0],
            speeds_kmh: vec![30.0, 3.0],
            n_min: 2,
            n_max: 3,
        };
        let rows = Evaluator::default()
            .sweep(&grid, Deployment::preset)
            .unwrap();
        assert_eq!(rows.len(), 8);
        let keys: Vec<_> = rows.iter().map(|r| (r.isd_m, r.speed_kmh, r.n)).collect();
        assert_eq!(keys[0], (-1.0, 3.0, 2));
        assert_eq!(keys[7], (125.0, 30.0, 3));
        assert!(rows[..4].iter().all(|r| r.outcome.is_err()));
        assert!(rows[4..].iter().all(|r| r.outcome.is_ok()));
    }

    #[test]
    fn bandwidth_scaling_keeps_argmax() {
        let c = cfg(Band::Fr2, 125.0, 30.0);
        let mut wide = c;
        wide.bandwidth *= 3.0;
        wide.noise_density /= 3.0;
        let e = Evaluator::default();
        let a = e.optimal_n(&c, 4, 9).unwrap();
        let b = e.optimal_n(&wide, 4, 9).unwrap();
        assert_eq!(a.best_n, b.best_n);
        for (x, y) in a.results.iter().zip(&b.results) {
            assert_relative_eq!(y.effective_ase, 3.0 * x.effective_ase, max_relative = 1e-6);
        }
    }

    #[test]
    fn clamp_is_idempotent() {
        for t in [-0.5, 0.0, 0.3, 1.0, 2.5] {
            let once = useful_fraction(t);
            assert!(once >= 0.0);
            assert_eq!(once.max(0.0), once);
        }
    }
}
