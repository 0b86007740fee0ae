use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::stream;
use crate::error::{Error, Result};

/// Observation window of a realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// Disk of the given radius around the origin.
    Disk { radius: f64 },
    /// Axis-aligned rectangle `[x_min, x_max] x [-half_width, half_width]`.
    Strip {
        x_min: f64,
        x_max: f64,
        half_width: f64,
    },
}

impl Window {
    pub fn area(&self) -> f64 {
        match *self {
            Window::Disk { radius } => PI * radius * radius,
            Window::Strip {
                x_min,
                x_max,
                half_width,
            } => (x_max - x_min) * 2.0 * half_width,
        }
    }
}

/// One draw of the BS process together with the random orientation of every
/// BS's beam partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PppRealization {
    pub window: Window,
    pub points: Vec<[f64; 2]>,
    /// Offset of the first beam boundary of each BS, uniform in `[0, beamwidth)`.
    pub rotations: Vec<f64>,
    pub seed: u64,
    pub index: u64,
}

impl PppRealization {
    pub fn sample(
        lambda: f64,
        window: Window,
        beamwidth: f64,
        seed: u64,
        index: u64,
    ) -> Result<Self> {
        let mean = lambda * window.area();
        let count = if mean > 0.0 {
            Poisson::new(mean)
                .map_err(|e| Error::Simulation(format!("poisson count: {e}")))?
                .sample(&mut stream(seed, index)) as usize
        } else {
            0
        };
        // Positions come from a second stream so the count draw cannot shift them.
        let mut rng = stream(seed ^ 0x9e37_79b9_7f4a_7c15, index);
        let mut points = Vec::with_capacity(count);
        let mut rotations = Vec::with_capacity(count);
        for _ in 0..count {
            let p = match window {
                Window::Disk { radius } => {
                    let r = radius * rng.random::<f64>().sqrt();
                    let t = 2.0 * PI * rng.random::<f64>();
                    [r * t.cos(), r * t.sin()]
                }
                Window::Strip {
                    x_min,
                    x_max,
                    half_width,
                } => [
                    rng.random_range(x_min..x_max),
                    rng.random_range(-half_width..half_width),
                ],
            };
            points.push(p);
            rotations.push(beamwidth * rng.random::<f64>());
        }
        Ok(Self {
            window,
            points,
            rotations,
            seed,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the point closest to `at`.
    pub fn nearest(&self, at: [f64; 2]) -> Option<usize> {
        self.points
            .iter()
            .map(|p| (p[0] - at[0]).powi(2) + (p[1] - at[1]).powi(2))
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_stay_in_window() {
        let disk = PppRealization::sample(1e-3, Window::Disk { radius: 300.0 }, 0.5, 1, 0).unwrap();
        assert!(disk.points.iter().all(|p| p[0].hypot(p[1]) <= 300.0));
        assert!(disk.rotations.iter().all(|&r| (0.0..0.5).contains(&r)));
        let strip = PppRealization::sample(
            1e-3,
            Window::Strip {
                x_min: -10.0,
                x_max: 500.0,
                half_width: 40.0,
            },
            1.0,
            1,
            0,
        )
        .unwrap();
        assert!(strip
            .points
            .iter()
            .all(|p| (-10.0..500.0).contains(&p[0]) && p[1].abs() <= 40.0));
    }

    #[test]
    fn count_is_poisson() {
        // Mean 100 points; over 400 windows the average count sits within a
        // few standard errors (sd 10 / sqrt(400) = 0.5).
        let w = Window::Disk {
            radius: (100.0 / (PI * 1e-3)).sqrt(),
        };
        let total: usize = (0..400)
            .map(|i| PppRealization::sample(1e-3, w, 1.0, 11, i).unwrap().len())
            .sum();
        let mean = total as f64 / 400.0;
        assert!((mean - 100.0).abs() < 2.0, "{mean}");
    }

    #[test]
    fn nearest_point() {
        let r = PppRealization {
            window: Window::Disk { radius: 10.0 },
            points: vec![[3.0, 0.0], [-1.0, 1.0], [0.0, -4.0]],
            rotations: vec![0.0; 3],
            seed: 0,
            index: 0,
        };
        assert_eq!(r.nearest([0.0, 0.0]), Some(1));
        assert_eq!(r.nearest([3.0, -1.0]), Some(0));
    }
}
