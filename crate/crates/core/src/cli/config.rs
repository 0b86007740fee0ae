//! Run configuration: a band preset, explicit field overrides and run
//! settings, stored as flat `key = value` text grouped under `[section]`
//! headers.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::ase::RateUnit;
use crate::error::{Error, Result};
use crate::model::{Band, Deployment, NetworkConfig, NoiseConvention};
use crate::sinr::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preset {
    Fr1,
    #[default]
    Fr2,
    /// No defaults; every deployment field must be given.
    Custom,
}

impl Preset {
    pub fn band(self) -> Option<Band> {
        match self {
            Preset::Fr1 => Some(Band::Fr1),
            Preset::Fr2 => Some(Band::Fr2),
            Preset::Custom => None,
        }
    }

    /// ISD used when none is given.
    pub fn reference_isd(self) -> Option<f64> {
        match self {
            Preset::Fr1 => Some(500.0),
            Preset::Fr2 => Some(125.0),
            Preset::Custom => None,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "custom" => Ok(Preset::Custom),
            other => Ok(match other.parse::<Band>()? {
                Band::Fr1 => Preset::Fr1,
                Band::Fr2 => Preset::Fr2,
            }),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.band() {
            Some(b) => b.fmt(f),
            None => f.write_str("custom"),
        }
    }
}

/// Deployment keys in file order.
pub const DEPLOYMENT_KEYS: [&str; 13] = [
    "isd_m",
    "speed_kmh",
    "freq_ghz",
    "bw_mhz",
    "tx_dbm",
    "noise_dbm_hz",
    "ssb_period_ms",
    "overhead_beam_ms",
    "overhead_cell_ms",
    "alpha_los",
    "alpha_nlos",
    "los_radius_m",
    "sinr_cap_db",
];

fn field<'a>(d: &'a mut Deployment, key: &str) -> Option<&'a mut f64> {
    Some(match key {
        "isd_m" => &mut d.isd_m,
        "speed_kmh" => &mut d.speed_kmh,
        "freq_ghz" => &mut d.freq_ghz,
        "bw_mhz" => &mut d.bw_mhz,
        "tx_dbm" => &mut d.tx_dbm,
        "noise_dbm_hz" => &mut d.noise_dbm_hz,
        "ssb_period_ms" => &mut d.ssb_period_ms,
        "overhead_beam_ms" => &mut d.overhead_beam_ms,
        "overhead_cell_ms" => &mut d.overhead_cell_ms,
        "alpha_los" => &mut d.alpha_los,
        "alpha_nlos" => &mut d.alpha_nlos,
        "los_radius_m" => &mut d.los_radius_m,
        "sinr_cap_db" => &mut d.sinr_cap_db,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Preset,
    /// Explicitly set deployment fields, keyed by [`DEPLOYMENT_KEYS`] names.
    pub overrides: Vec<(&'static str, f64)>,
    pub noise_convention: Option<NoiseConvention>,
    /// Multiplier on every quadrature tolerance.
    pub tol: f64,
    pub n: Option<u32>,
    pub n_min: u32,
    pub n_max: u32,
    pub samples: u64,
    pub seed: u64,
    /// Length of each crossing trajectory, m.
    pub trajectory_m: f64,
    pub trajectory_replicas: u32,
    pub out: Option<PathBuf>,
    pub log_base: RateUnit,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: Preset::default(),
            overrides: Vec::new(),
            noise_convention: None,
            tol: 1.0,
            n: None,
            n_min: 1,
            n_max: 10,
            samples: 100_000,
            seed: 1,
            trajectory_m: 1e6,
            trajectory_replicas: 16,
            out: None,
            log_base: RateUnit::Nats,
        }
    }
}

impl RunConfig {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.overrides
            .iter()
            .find(|(k, _)| *k == key)
            .map(|&(_, v)| v)
    }

    /// Sets a deployment field, replacing an earlier value.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let Some(key) = DEPLOYMENT_KEYS.iter().copied().find(|k| *k == key) else {
            return Err(Error::invalid(
                "deployment",
                format!("unknown field {key:?}"),
            ));
        };
        match self.overrides.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.overrides.push((key, value)),
        }
        Ok(())
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid(
                "tol",
                format!("must be a positive factor, got {}", self.tol),
            ));
        }
        let q = QuadratureSpec::default().scaled(self.tol);
        q.validate()?;
        Ok(q)
    }

    /// Deployment for `band` (or the configured preset) with overrides
    /// applied on top. `isd_m` and `speed_kmh` replace the overrides when given.
    pub fn deployment_at(
        &self,
        band: Option<Band>,
        isd_m: Option<f64>,
        speed_kmh: Option<f64>,
    ) -> Result<Deployment> {
        let band = band.or(self.preset.band());
        let mut d = match band {
            Some(b) => {
                let isd = self
                    .get("isd_m")
                    .or(self.preset.reference_isd())
                    .unwrap_or(b.isds()[0]);
                Deployment::preset(b, isd, self.get("speed_kmh").unwrap_or(30.0))
            }
            None => {
                let missing: Vec<&str> = DEPLOYMENT_KEYS
                    .iter()
                    .copied()
                    .filter(|k| self.get(k).is_none())
                    .collect();
                if !missing.is_empty() {
                    return Err(Error::invalid(
                        "band",
                        format!(
                            "custom preset needs every deployment field; missing {}",
                            missing.join(", ")
                        ),
                    ));
                }
                Deployment::preset(Band::Fr1, 0.0, 0.0)
            }
        };
        for &(k, v) in &self.overrides {
            *field(&mut d, k).expect("keys are checked on insert") = v;
        }
        if let Some(isd) = isd_m {
            d.isd_m = isd;
        }
        if let Some(v) = speed_kmh {
            d.speed_kmh = v;
        }
        if let Some(nc) = self.noise_convention {
            d.noise_convention = nc;
        }
        Ok(d)
    }

    pub fn deployment(&self) -> Result<Deployment> {
        self.deployment_at(None, None, None)
    }

    pub fn network(&self) -> Result<NetworkConfig> {
        self.deployment()?.to_config()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("unterminated section header {line:?}")))?;
                section = name.trim().to_string();
                if !["network", "quadrature", "search", "mc", "output"].contains(&section.as_str())
                {
                    return Err(err(format!("unknown section [{section}]")));
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = || value.parse::<f64>().map_err(|e| err(format!("{key}: {e}")));
            let int = || value.parse::<u64>().map_err(|e| err(format!("{key}: {e}")));
            let small =
                || -> Result<u32> { u32::try_from(int()?).map_err(|e| err(format!("{key}: {e}"))) };
            let wrap = |e: Error| err(e.to_string());
            match (section.as_str(), key) {
                ("network", "band") => cfg.preset = value.parse().map_err(wrap)?,
                ("network", "noise_convention") => {
                    cfg.noise_convention = Some(value.parse().map_err(wrap)?)
                }
                ("network", k) if DEPLOYMENT_KEYS.contains(&k) => cfg.set(k, num()?)?,
                ("quadrature", "tol") => cfg.tol = num()?,
                ("search", "n") => cfg.n = Some(small()?),
                ("search", "n_min") => cfg.n_min = small()?,
                ("search", "n_max") => cfg.n_max = small()?,
                ("mc", "samples") => cfg.samples = int()?,
                ("mc", "seed") => cfg.seed = int()?,
                ("mc", "trajectory_m") => cfg.trajectory_m = num()?,
                ("mc", "trajectory_replicas") => cfg.trajectory_replicas = small()?,
                ("output", "out") => cfg.out = Some(PathBuf::from(value)),
                ("output", "log_base") => cfg.log_base = value.parse().map_err(wrap)?,
                ("", _) => return Err(err(format!("{key} appears before any section header"))),
                (s, k) => return Err(err(format!("unknown key {k:?} in [{s}]"))),
            }
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[network]\nband = {}", self.preset);
        for key in DEPLOYMENT_KEYS {
            if let Some(v) = self.get(key) {
                let _ = writeln!(s, "{key} = {v}");
            }
        }
        if let Some(nc) = self.noise_convention {
            let _ = writeln!(s, "noise_convention = {nc}");
        }
        let _ = writeln!(s, "\n[quadrature]\ntol = {}", self.tol);
        s.push_str("\n[search]\n");
        if let Some(n) = self.n {
            let _ = writeln!(s, "n = {n}");
        }
        let _ = writeln!(s, "n_min = {}\nn_max = {}", self.n_min, self.n_max);
        let _ = writeln!(
            s,
            "\n[mc]\nsamples = {}\nseed = {}\ntrajectory_m = {}\ntrajectory_replicas = {}",
            self.samples, self.seed, self.trajectory_m, self.trajectory_replicas
        );
        s.push_str("\n[output]\n");
        if let Some(out) = &self.out {
            let _ = writeln!(s, "out = {}", out.display());
        }
        let _ = writeln!(s, "log_base = {}", self.log_base);
        s
    }
}
