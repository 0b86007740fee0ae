//! Network parameters, unit conversions and the sectorized beam model.
//!
//! Everything past this module works in SI linear units. Human units
//! (dBm, dB, GHz, MHz, km/h, ms) only appear in [`Deployment`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Largest admitted beam exponent; `2^n` gains are meaningless beyond this.
pub const MAX_BEAM_EXPONENT: u32 = 20;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh / 3.6
}

/// BS intensity whose mean inter-site distance `2/sqrt(pi*lambda)` equals `isd`.
pub fn lambda_from_isd(isd: f64) -> f64 {
    4.0 / (PI * isd * isd)
}

pub fn isd_from_lambda(lambda: f64) -> f64 {
    2.0 / (PI * lambda).sqrt()
}

/// Which noise power enters the SINR.
///
/// `Sigma2` uses the thermal noise over the whole band, `W * N0`. `N0` uses the
/// bare spectral density as if it were a power, which some derivations of the
/// coverage formula write instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseConvention {
    #[default]
    Sigma2,
    N0,
}

impl FromStr for NoiseConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sigma2" => Ok(Self::Sigma2),
            "n0" => Ok(Self::N0),
            other => Err(Error::invalid(
                "noise_convention",
                format!("expected sigma2 or n0, got {other:?}"),
            )),
        }
    }
}

impl fmt::Display for NoiseConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sigma2 => "sigma2",
            Self::N0 => "n0",
        })
    }
}

/// Physical and deployment parameters, all in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    /// BS intensity, per m².
    pub lambda: f64,
    /// MT speed, m/s.
    pub speed: f64,
    /// SSB period, s.
    pub ssb_period: f64,
    /// Transmit power, W.
    pub tx_power: f64,
    /// Bandwidth, Hz.
    pub bandwidth: f64,
    /// Noise spectral density, W/Hz.
    pub noise_density: f64,
    /// Carrier frequency, Hz.
    pub carrier_freq: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// LOS ball radius, m. Zero means every link is NLOS.
    pub los_radius: f64,
    /// Beam alignment time after a beam reselection, s.
    pub overhead_beam: f64,
    /// Beam sweeping time after a cell handover, s.
    pub overhead_cell: f64,
    /// SINR cap, linear.
    pub sinr_cap: f64,
    pub noise_convention: NoiseConvention,
}

fn require(name: &'static str, ok: bool, reason: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(name, reason()))
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| {
            require(name, v.is_finite() && v > 0.0, || {
                format!("must be finite and positive, got {v}")
            })
        };
        let nonneg = |name: &'static str, v: f64| {
            require(name, v.is_finite() && v >= 0.0, || {
                format!("must be finite and non-negative, got {v}")
            })
        };
        pos("lambda", self.lambda)?;
        nonneg("speed", self.speed)?;
        pos("ssb_period", self.ssb_period)?;
        pos("tx_power", self.tx_power)?;
        pos("bandwidth", self.bandwidth)?;
        nonneg("noise_density", self.noise_density)?;
        pos("carrier_freq", self.carrier_freq)?;
        pos("alpha_los", self.alpha_los)?;
        nonneg("los_radius", self.los_radius)?;
        nonneg("overhead_beam", self.overhead_beam)?;
        nonneg("overhead_cell", self.overhead_cell)?;
        pos("sinr_cap", self.sinr_cap)?;
        require(
            "alpha_nlos",
            self.alpha_nlos.is_finite() && self.alpha_nlos >= self.alpha_los,
            || {
                format!(
                    "must be at least alpha_los ({}), got {}",
                    self.alpha_los, self.alpha_nlos
                )
            },
        )?;
        // The aggregate interference of an infinite PPP diverges otherwise.
        require("alpha_nlos", self.alpha_nlos > 2.0, || {
            format!(
                "must exceed 2 for finite interference, got {}",
                self.alpha_nlos
            )
        })
    }

    /// Soft findings that do not prevent evaluation.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.los_radius > 0.0 && !(1.8..=2.5).contains(&self.alpha_los) {
            out.push(format!(
                "alpha_los = {} is outside the typical range [1.8, 2.5]",
                self.alpha_los
            ));
        }
        out
    }

    /// Folds the all-NLOS encoding: with no LOS ball the LOS exponent is unused
    /// and is pinned to the NLOS one.
    pub fn normalized(mut self) -> Self {
        if self.los_radius == 0.0 {
            self.alpha_los = self.alpha_nlos;
        }
        self
    }

    pub fn derived(&self) -> DerivedConstants {
        DerivedConstants::new(self)
    }

    pub fn isd(&self) -> f64 {
        isd_from_lambda(self.lambda)
    }
}

/// Constants computed once from a [`NetworkConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// `(c / (4 pi f_c))^2`.
    pub path_const: f64,
    /// Noise power entering the SINR, W (depends on the noise convention).
    pub noise_power: f64,
}

impl DerivedConstants {
    pub fn new(cfg: &NetworkConfig) -> Self {
        let k = SPEED_OF_LIGHT / (4.0 * PI * cfg.carrier_freq);
        let noise_power = match cfg.noise_convention {
            NoiseConvention::Sigma2 => cfg.bandwidth * cfg.noise_density,
            NoiseConvention::N0 => cfg.noise_density,
        };
        Self {
            path_const: k * k,
            noise_power,
        }
    }
}

/// 5G NR frequency range presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Band {
    Fr1,
    Fr2,
}

impl Band {
    pub fn name(self) -> &'static str {
        match self {
            Band::Fr1 => "fr1",
            Band::Fr2 => "fr2",
        }
    }

    /// Inter-site distances analysed for this band, m.
    pub fn isds(self) -> &'static [f64] {
        match self {
            Band::Fr1 => &[250.0, 500.0, 1000.0],
            Band::Fr2 => &[75.0, 125.0, 250.0],
        }
    }

    /// MT speeds analysed for this band, km/h.
    pub fn speeds(self) -> &'static [f64] {
        match self {
            Band::Fr1 => &[3.0, 30.0, 120.0],
            Band::Fr2 => &[3.0, 30.0],
        }
    }
}

impl FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fr1" => Ok(Band::Fr1),
            "fr2" => Ok(Band::Fr2),
            other => Err(Error::invalid("band", format!("unknown band {other:?}"))),
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Deployment description in human units, as it appears in config files and
/// on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deployment {
    pub isd_m: f64,
    pub speed_kmh: f64,
    pub freq_ghz: f64,
    pub bw_mhz: f64,
    pub tx_dbm: f64,
    pub noise_dbm_hz: f64,
    pub ssb_period_ms: f64,
    pub overhead_beam_ms: f64,
    pub overhead_cell_ms: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub los_radius_m: f64,
    pub sinr_cap_db: f64,
    pub noise_convention: NoiseConvention,
}

impl Deployment {
    /// Band preset at a given ISD and speed.
    pub fn preset(band: Band, isd_m: f64, speed_kmh: f64) -> Self {
        let common = Deployment {
            isd_m,
            speed_kmh,
            freq_ghz: 0.0,
            bw_mhz: 0.0,
            tx_dbm: 0.0,
            noise_dbm_hz: -174.0,
            ssb_period_ms: 20.0,
            overhead_beam_ms: 23.0,
            overhead_cell_ms: 43.0,
            alpha_los: 3.5,
            alpha_nlos: 3.5,
            los_radius_m: 0.0,
            sinr_cap_db: 30.0,
            noise_convention: NoiseConvention::Sigma2,
        };
        match band {
            Band::Fr1 => Deployment {
                freq_ghz: 3.5,
                bw_mhz: 100.0,
                tx_dbm: 43.0,
                ..common
            },
            Band::Fr2 => Deployment {
                freq_ghz: 28.0,
                bw_mhz: 400.0,
                tx_dbm: 36.0,
                alpha_los: 1.9,
                los_radius_m: 75.0,
                ..common
            },
        }
    }

    pub fn to_config(&self) -> Result<NetworkConfig> {
        config_from_deployment(self)
    }
}

/// Converts a human-unit deployment into a validated SI [`NetworkConfig`].
pub fn config_from_deployment(d: &Deployment) -> Result<NetworkConfig> {
    let fields = [
        ("isd", d.isd_m),
        ("speed", d.speed_kmh),
        ("carrier_freq", d.freq_ghz),
        ("bandwidth", d.bw_mhz),
        ("tx_power", d.tx_dbm),
        ("noise_density", d.noise_dbm_hz),
        ("ssb_period", d.ssb_period_ms),
        ("overhead_beam", d.overhead_beam_ms),
        ("overhead_cell", d.overhead_cell_ms),
        ("alpha_los", d.alpha_los),
        ("alpha_nlos", d.alpha_nlos),
        ("los_radius", d.los_radius_m),
        ("sinr_cap", d.sinr_cap_db),
    ];
    for (name, v) in fields {
        require(name, v.is_finite(), || format!("must be finite, got {v}"))?;
    }
    require("isd", d.isd_m > 0.0, || {
        format!("must be positive, got {} m", d.isd_m)
    })?;
    require("bandwidth", d.bw_mhz > 0.0, || {
        format!("must be positive, got {} MHz", d.bw_mhz)
    })?;
    require("ssb_period", d.ssb_period_ms > 0.0, || {
        format!("must be positive, got {} ms", d.ssb_period_ms)
    })?;

    let cfg = NetworkConfig {
        lambda: lambda_from_isd(d.isd_m),
        speed: kmh_to_ms(d.speed_kmh),
        ssb_period: d.ssb_period_ms * 1e-3,
        tx_power: dbm_to_watts(d.tx_dbm),
        bandwidth: d.bw_mhz * 1e6,
        noise_density: dbm_to_watts(d.noise_dbm_hz),
        carrier_freq: d.freq_ghz * 1e9,
        alpha_los: d.alpha_los,
        alpha_nlos: d.alpha_nlos,
        los_radius: d.los_radius_m,
        overhead_beam: d.overhead_beam_ms * 1e-3,
        overhead_cell: d.overhead_cell_ms * 1e-3,
        sinr_cap: db_to_linear(d.sinr_cap_db),
        noise_convention: d.noise_convention,
    }
    .normalized();
    cfg.validate()?;
    for w in cfg.warnings() {
        log::warn!("{w}");
    }
    Ok(cfg)
}

/// How the main and side lobe gains scale with the number of beams.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GainLaw {
    /// `G_m = 2^n`, `G_s = 2^-n`.
    #[default]
    Reciprocal,
    Custom {
        main: f64,
        side: f64,
    },
}

/// `2^n` beams per BS with a two-level sectorized gain pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSetting {
    pub n: u32,
    /// Angular width of each beam, rad.
    pub beamwidth: f64,
    pub gain_main: f64,
    pub gain_side: f64,
}

impl BeamSetting {
    pub fn new(n: u32, law: GainLaw) -> Result<Self> {
        require("n", (1..=MAX_BEAM_EXPONENT).contains(&n), || {
            format!("beam exponent must be in 1..={MAX_BEAM_EXPONENT}, got {n}")
        })?;
        let beams = f64::from(1u32 << n);
        let (gain_main, gain_side) = match law {
            GainLaw::Reciprocal => (beams, 1.0 / beams),
            GainLaw::Custom { main, side } => {
                require("gain_side", side.is_finite() && side > 0.0, || {
                    format!("must be positive, got {side}")
                })?;
                require("gain_main", main.is_finite() && main >= side, || {
                    format!("must be at least the side lobe gain {side}, got {main}")
                })?;
                (main, side)
            }
        };
        Ok(Self {
            n,
            beamwidth: PI / f64::from(1u32 << (n - 1)),
            gain_main,
            gain_side,
        })
    }

    pub fn beam_count(&self) -> u32 {
        1 << self.n
    }

    /// Probability that an interfering BS points its main lobe at the typical MT.
    pub fn main_lobe_hit_probability(&self) -> f64 {
        self.beamwidth / (2.0 * PI)
    }
}

/// Shorthand for the default gain law.
pub fn beam_setting(n: u32) -> Result<BeamSetting> {
    BeamSetting::new(n, GainLaw::Reciprocal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn isd_250_intensity() {
        let d = Deployment::preset(Band::Fr1, 250.0, 30.0);
        let cfg = d.to_config().unwrap();
        assert_relative_eq!(cfg.lambda, 2.0372e-5, max_relative = 1e-4);
        assert_relative_eq!(cfg.speed, 8.3333, max_relative = 1e-4);
    }

    #[test]
    fn db_conversions() {
        assert_relative_eq!(dbm_to_watts(43.0), 19.953, max_relative = 1e-4);
        assert_relative_eq!(db_to_linear(30.0), 1000.0, max_relative = 1e-12);
    }

    #[test]
    fn fr2_noise_power() {
        let cfg = Deployment::preset(Band::Fr2, 125.0, 30.0)
            .to_config()
            .unwrap();
        assert_relative_eq!(cfg.derived().noise_power, 1.592e-12, max_relative = 1e-3);
        assert_eq!(cfg.los_radius, 75.0);
        assert_eq!(cfg.alpha_los, 1.9);
        assert_relative_eq!(cfg.sinr_cap, 1000.0, max_relative = 1e-12);
    }

    #[test]
    fn fr1_is_all_nlos() {
        let cfg = Deployment::preset(Band::Fr1, 500.0, 3.0)
            .to_config()
            .unwrap();
        assert_eq!(cfg.los_radius, 0.0);
        assert_eq!(cfg.alpha_los, cfg.alpha_nlos);
    }

    #[test]
    fn rejects_bad_deployment() {
        let base = Deployment::preset(Band::Fr1, 250.0, 30.0);
        for d in [
            Deployment { isd_m: 0.0, ..base },
            Deployment {
                isd_m: -5.0,
                ..base
            },
            Deployment {
                bw_mhz: 0.0,
                ..base
            },
            Deployment {
                ssb_period_ms: 0.0,
                ..base
            },
            Deployment {
                speed_kmh: f64::NAN,
                ..base
            },
        ] {
            assert!(matches!(
                config_from_deployment(&d),
                Err(Error::InvalidParameter { .. })
            ));
        }
    }

    #[test]
    fn rejects_nlos_below_los() {
        let d = Deployment {
            alpha_los: 3.0,
            alpha_nlos: 2.5,
            ..Deployment::preset(Band::Fr2, 125.0, 30.0)
        };
        let err = config_from_deployment(&d).unwrap_err();
        assert!(err.to_string().contains("alpha_nlos"), "{err}");
    }

    #[test]
    fn alpha_los_outside_typical_range_only_warns() {
        let d = Deployment {
            alpha_los: 2.8,
            ..Deployment::preset(Band::Fr2, 125.0, 30.0)
        };
        let cfg = config_from_deployment(&d).unwrap();
        assert_eq!(cfg.warnings().len(), 1);
    }

    #[test]
    fn beam_setting_examples() {
        let b = beam_setting(3).unwrap();
        assert_relative_eq!(b.beamwidth, PI / 4.0, max_relative = 1e-15);
        assert_eq!(b.gain_main, 8.0);
        assert_eq!(b.gain_side, 0.125);

        let b = beam_setting(1).unwrap();
        assert_eq!(b.beamwidth, PI);
        assert_eq!((b.gain_main, b.gain_side), (2.0, 0.5));

        let b = beam_setting(8).unwrap();
        assert_relative_eq!(b.beamwidth, 2.0 * PI / 256.0, max_relative = 1e-15);
    }

    #[test]
    fn beam_setting_bounds() {
        assert!(beam_setting(0).is_err());
        assert!(beam_setting(21).is_err());
        assert!(beam_setting(20).is_ok());
        assert!(BeamSetting::new(
            2,
            GainLaw::Custom {
                main: 1.0,
                side: 2.0
            }
        )
        .is_err());
        assert!(BeamSetting::new(
            2,
            GainLaw::Custom {
                main: 2.0,
                side: 0.0
            }
        )
        .is_err());
        let b = BeamSetting::new(
            2,
            GainLaw::Custom {
                main: 3.0,
                side: 3.0,
            },
        )
        .unwrap();
        assert_eq!(b.gain_main, b.gain_side);
    }

    #[test]
    fn noise_convention_parse() {
        assert_eq!(
            "n0".parse::<NoiseConvention>().unwrap(),
            NoiseConvention::N0
        );
        assert_eq!(
            "Sigma2".parse::<NoiseConvention>().unwrap(),
            NoiseConvention::Sigma2
        );
        assert!("dbm".parse::<NoiseConvention>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn isd_round_trip(isd in 1.0f64..1e5) {
                let back = isd_from_lambda(lambda_from_isd(isd));
                prop_assert!(((back - isd) / isd).abs() < 1e-12);
            }

            #[test]
            fn beam_geometry(n in 1u32..=20) {
                let b = beam_setting(n).unwrap();
                let total = b.beamwidth * f64::from(b.beam_count());
                prop_assert!((total - 2.0 * PI).abs() < 4.0 * f64::EPSILON * 2.0 * PI);
                prop_assert_eq!(b.main_lobe_hit_probability(), 2f64.powi(-(n as i32)));
                prop_assert_eq!(b.gain_main * b.gain_side, 1.0);
                prop_assert!(b.gain_main >= b.gain_side && b.gain_side > 0.0);
            }

            #[test]
            fn conversion_is_pure(isd in 10.0f64..5000.0, v in 0.0f64..200.0) {
                let d = Deployment::preset(Band::Fr2, isd, v);
                let a = d.to_config().unwrap();
                let b = d.to_config().unwrap();
                prop_assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
                prop_assert_eq!(a.speed.to_bits(), b.speed.to_bits());
            }
        }
    }
}
