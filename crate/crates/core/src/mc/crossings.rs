//! Handover and beam-reselection counts along a straight MT trajectory.
//!
//! The trajectory runs along the local x axis from `0` to `length` through a
//! PPP drawn in a strip padded by `10 / sqrt(lambda)` on every side. Along a
//! line the squared distance to BS `(a, b)` is `x^2 - 2 a x + a^2 + b^2`, so
//! the serving BS as a function of `x` is the lower envelope of straight
//! lines, built exactly with a monotone hull. Every envelope breakpoint inside
//! the trajectory is a handover. Within one serving segment the bearing from
//! the BS to the MT moves monotonically, and the number of beam boundaries it
//! sweeps is read off the beam index at the two segment ends.

use super::ppp::{PppRealization, Window};
use super::McEstimate;
use crate::error::{Error, Result};
use crate::model::{BeamSetting, NetworkConfig};

/// Strip padding in units of `1 / sqrt(lambda)`.
const PADDING: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingSpec {
    /// Length of each independent trajectory, m.
    pub length: f64,
    /// Independent trajectories; the standard errors come from their spread.
    pub replicas: u32,
    /// Direction of motion in the world frame, rad.
    pub heading: f64,
}

impl CrossingSpec {
    pub fn new(length: f64, replicas: u32) -> Self {
        Self {
            length,
            replicas,
            heading: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingReport {
    pub handovers: u64,
    pub reselections: u64,
    /// Total simulated trajectory length, m.
    pub total_length: f64,
    /// Handovers per metre.
    pub handover_intensity: McEstimate,
    /// Same-cell beam changes per metre.
    pub reselection_intensity: McEstimate,
}

/// Breakpoint where BS `q` (larger abscissa) starts to beat BS `p`.
fn switch_point(p: [f64; 2], q: [f64; 2]) -> f64 {
    0.5 * (p[0] + q[0]) + (q[1] * q[1] - p[1] * p[1]) / (2.0 * (q[0] - p[0]))
}

/// Serving segments `(bs index, x_from, x_to)` along `[0, length]`.
fn serving_segments(points: &[[f64; 2]], length: f64) -> Vec<(usize, f64, f64)> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[i][0]
            .total_cmp(&points[j][0])
            .then(points[i][1].abs().total_cmp(&points[j][1].abs()))
    });
    let mut hull: Vec<usize> = Vec::new();
    for j in order {
        if let Some(&last) = hull.last() {
            if points[last][0] == points[j][0] {
                continue;
            }
        }
        while hull.len() >= 2 {
            let k = hull[hull.len() - 1];
            let i = hull[hull.len() - 2];
            if switch_point(points[i], points[k]) >= switch_point(points[k], points[j]) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(j);
    }
    let mut out = Vec::new();
    for (t, &bs) in hull.iter().enumerate() {
        let from = if t == 0 {
            f64::NEG_INFINITY
        } else {
            switch_point(points[hull[t - 1]], points[bs])
        };
        let to = if t + 1 == hull.len() {
            f64::INFINITY
        } else {
            switch_point(points[bs], points[hull[t + 1]])
        };
        let (lo, hi) = (from.max(0.0), to.min(length));
        if lo < hi {
            out.push((bs, lo, hi));
        }
    }
    out
}

fn beam_index(bearing: f64, rotation: f64, beamwidth: f64) -> i64 {
    ((bearing - rotation) / beamwidth).floor() as i64
}

/// Counts on one trajectory: `(handovers, reselections)`.
fn count_one(
    lambda: f64,
    beams: &BeamSetting,
    length: f64,
    heading: f64,
    seed: u64,
    index: u64,
) -> Result<(u64, u64)> {
    let pad = PADDING / lambda.sqrt();
    let window = Window::Strip {
        x_min: -pad,
        x_max: length + pad,
        half_width: pad,
    };
    let ppp = PppRealization::sample(lambda, window, beams.beamwidth, seed, index)?;
    let segments = serving_segments(&ppp.points, length);
    if segments.is_empty() {
        return Err(Error::Simulation("no BS serves the trajectory".into()));
    }
    let handovers = (segments.len() - 1) as u64;
    let mut reselections = 0;
    for &(bs, from, to) in &segments {
        let [a, b] = ppp.points[bs];
        // Bearing from the BS to the MT in the world frame. The local bearing
        // never crosses the branch cut inside a segment.
        let bearing = |x: f64| (-b).atan2(x - a) + heading;
        let k0 = beam_index(bearing(from), ppp.rotations[bs], beams.beamwidth);
        let k1 = beam_index(bearing(to), ppp.rotations[bs], beams.beamwidth);
        reselections += k0.abs_diff(k1);
    }
    Ok((handovers, reselections))
}

/// Simulates `spec.replicas` independent trajectories and reports pooled
/// counts and per-metre intensities.
pub fn count_crossings(
    cfg: &NetworkConfig,
    beams: &BeamSetting,
    spec: &CrossingSpec,
    seed: u64,
) -> Result<CrossingReport> {
    cfg.validate()?;
    if !(spec.length > 0.0 && spec.length.is_finite()) {
        return Err(Error::invalid(
            "trajectory_length",
            format!("must be positive, got {}", spec.length),
        ));
    }
    if spec.replicas == 0 {
        return Err(Error::invalid("replicas", "need at least one trajectory"));
    }
    let diameter = cfg.isd();
    if spec.length < 100.0 * diameter {
        log::warn!(
            "trajectory of {:.0} m spans fewer than 100 mean cell diameters ({:.0} m)",
            spec.length,
            diameter
        );
    }
    // One trajectory per work item; counts are integers so the pooled sums
    // are exact regardless of scheduling.
    use rayon::prelude::*;
    let per_replica = (0..u64::from(spec.replicas))
        .into_par_iter()
        .map(|i| count_one(cfg.lambda, beams, spec.length, spec.heading, seed, i))
        .collect::<Result<Vec<_>>>()?;

    let len = spec.length;
    let moments = |pick: fn(&(u64, u64)) -> u64| {
        let (s, s2) = per_replica.iter().fold((0.0, 0.0), |(s, s2), c| {
            let x = pick(c) as f64 / len;
            (s + x, s2 + x * x)
        });
        let mut e = McEstimate::from_moments(s, s2, u64::from(spec.replicas), seed);
        if spec.replicas == 1 {
            // Poisson approximation when there is no spread to measure.
            e.standard_error = (pick(&per_replica[0]) as f64).sqrt() / len;
        }
        e
    };
    Ok(CrossingReport {
        handovers: per_replica.iter().map(|c| c.0).sum(),
        reselections: per_replica.iter().map(|c| c.1).sum(),
        total_length: len * f64::from(spec.replicas),
        handover_intensity: moments(|c| c.0),
        reselection_intensity: moments(|c| c.1),
    })
}

/// Reference counts from nearest-BS lookups on a fine grid of positions.
#[cfg(test)]
fn brute_force_counts(
    ppp: &PppRealization,
    beams: &BeamSetting,
    length: f64,
    step: f64,
) -> (u64, u64) {
    let mut handovers = 0;
    let mut reselections = 0;
    let mut prev: Option<(usize, i64)> = None;
    let steps = (length / step).ceil() as usize;
    for s in 0..=steps {
        let x = (s as f64 * step).min(length);
        let bs = ppp.nearest([x, 0.0]).unwrap();
        let [a, b] = ppp.points[bs];
        let k = beam_index((-b).atan2(x - a), ppp.rotations[bs], beams.beamwidth)
            .rem_euclid(i64::from(beams.beam_count()));
        if let Some((pb, pk)) = prev {
            if pb != bs {
                handovers += 1;
            } else if pk != k {
                reselections += 1;
            }
        }
        prev = Some((bs, k));
    }
    (handovers, reselections)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{beam_setting, Band, Deployment};
    use std::f64::consts::PI;

    #[test]
    fn envelope_picks_nearest() {
        let pts = [
            [0.0, 5.0],
            [10.0, 1.0],
            [10.0, -3.0],
            [20.0, 8.0],
            [30.0, 0.5],
        ];
        let segs = serving_segments(&pts, 30.0);
        for &(bs, from, to) in &segs {
            let mid = 0.5 * (from + to);
            let d = |p: [f64; 2]| (p[0] - mid).powi(2) + p[1].powi(2);
            let best = (0..pts.len())
                .min_by(|&i, &j| d(pts[i]).total_cmp(&d(pts[j])))
                .unwrap();
            assert_eq!(bs, best);
        }
        assert!(segs.iter().all(|s| s.0 != 2));
        assert_eq!(segs.len(), 4);
        assert_eq!(segs.first().unwrap().1, 0.0);
        assert_eq!(segs.last().unwrap().2, 30.0);
    }

    #[test]
    fn exact_counts_match_fine_stepping() {
        let lambda: f64 = 1e-4;
        let b = beam_setting(3).unwrap();
        let length = 3000.0;
        let pad = PADDING / lambda.sqrt();
        for idx in 0..4 {
            let ppp = PppRealization::sample(
                lambda,
                Window::Strip {
                    x_min: -pad,
                    x_max: length + pad,
                    half_width: pad,
                },
                b.beamwidth,
                21,
                idx,
            )
            .unwrap();
            let segs = serving_segments(&ppp.points, length);
            let mut resel = 0;
            for &(bs, from, to) in &segs {
                let [a, y] = ppp.points[bs];
                let k0 = beam_index((-y).atan2(from - a), ppp.rotations[bs], b.beamwidth);
                let k1 = beam_index((-y).atan2(to - a), ppp.rotations[bs], b.beamwidth);
                resel += k0.abs_diff(k1);
            }
            let (h, r) = brute_force_counts(&ppp, &b, length, 0.05);
            assert_eq!(h, (segs.len() - 1) as u64);
            assert_eq!(r, resel);
        }
    }

    #[test]
    fn two_beam_intensity() {
        let mut cfg = Deployment::preset(Band::Fr2, 125.0, 30.0)
            .to_config()
            .unwrap();
        cfg.lambda = 1e-4;
        let b = beam_setting(1).unwrap();
        let rep = count_crossings(&cfg, &b, &CrossingSpec::new(1e5, 8), 5).unwrap();
        let want_b = 2.0 * 0.01 / PI;
        let want_c = 4.0 * 0.01 / PI;
        let rb = rep.reselection_intensity;
        let rc = rep.handover_intensity;
        assert!(
            (rb.estimate - want_b).abs() < 4.0 * rb.standard_error,
            "{rb:?} vs {want_b}"
        );
        assert!(
            (rc.estimate - want_c).abs() < 4.0 * rc.standard_error,
            "{rc:?} vs {want_c}"
        );
        assert_eq!(rep.total_length, 8e5);
    }

    #[test]
    fn rejects_bad_spec() {
        let cfg = Deployment::preset(Band::Fr2, 125.0, 30.0)
            .to_config()
            .unwrap();
        let b = beam_setting(1).unwrap();
        assert!(count_crossings(&cfg, &b, &CrossingSpec::new(0.0, 1), 0).is_err());
        assert!(count_crossings(&cfg, &b, &CrossingSpec::new(1e4, 0), 0).is_err());
    }
}
