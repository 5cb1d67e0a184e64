//! Point grids and direction sets used by every sampled check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricModel;

/// Tensor-product grid with `per_axis` points per axis spanning `[lo, hi]`
/// (interior points only when `per_axis == 1`).
pub fn grid_points(lo: &[f64], hi: &[f64], per_axis: usize) -> Vec<Vec<f64>> {
    let n = lo.len();
    if per_axis == 0 {
        return Vec::new();
    }
    let coord = |axis: usize, k: usize| {
        if per_axis == 1 {
            0.5 * (lo[axis] + hi[axis])
        } else {
            lo[axis] + (hi[axis] - lo[axis]) * k as f64 / (per_axis - 1) as f64
        }
    };
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|axis| {
                    let k = idx % per_axis;
                    idx /= per_axis;
                    coord(axis, k)
                })
                .collect()
        })
        .collect()
}

/// Unit (Euclidean) directions: uniform angles for n = 2, a Fibonacci
/// lattice for n = 3, seeded Gaussian samples otherwise.
pub fn unit_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        2 => (0..count)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * k as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + n as u64);
            (0..count)
                .map(|_| {
                    let v: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
                    let len = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                    v.into_iter().map(|a| a / len).collect()
                })
                .collect()
        }
    }
}

pub(crate) fn gaussian(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

/// Rescale `u` onto the indicatrix `F(x, ·) = 1`; `None` if `F(x, u)` is not positive.
pub fn to_indicatrix(metric: &MetricModel, x: &[f64], u: &[f64]) -> Option<Vec<f64>> {
    let f = metric.f(x, u);
    (f > crate::tensors::MIN_F).then(|| u.iter().map(|v| v / f).collect())
}

/// Grid of chart points crossed with a set of indicatrix directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplePlan {
    pub per_axis: usize,
    /// Half-width of the sampling box for unbounded charts; bounded charts are clipped to it.
    pub extent: f64,
    /// Fraction of a ball radius kept when sampling ball-shaped charts.
    pub shrink: f64,
    pub directions: usize,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self { per_axis: 6, extent: 3.0, shrink: 0.9, directions: 16 }
    }
}

impl SamplePlan {
    pub fn new(per_axis: usize, extent: f64, directions: usize) -> Self {
        Self { per_axis, extent, shrink: 0.9, directions }
    }

    pub fn points(&self, metric: &MetricModel) -> Vec<Vec<f64>> {
        let (mut lo, mut hi) = metric.domain.sampling_box(self.extent);
        if let crate::domain::DomainShape::Ball { .. } = metric.domain.shape {
            lo.iter_mut().for_each(|v| *v *= self.shrink);
            hi.iter_mut().for_each(|v| *v *= self.shrink);
        }
        grid_points(&lo, &hi, self.per_axis)
            .into_iter()
            .filter(|x| metric.domain.contains(x))
            .collect()
    }

    pub fn unit_directions(&self, n: usize) -> Vec<Vec<f64>> {
        unit_directions(n, self.directions)
    }

    pub fn ensure_nonempty(&self, metric: &MetricModel) -> Result<()> {
        if self.directions == 0 || self.points(metric).is_empty() {
            Err(Error::EmptyPlan)
        } else {
            Ok(())
        }
    }
}

/// Seeded uniform points in the ball `|x| <= radius` intersected with the chart.
pub fn random_points_in_ball(metric: &MetricModel, radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = metric.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count && attempts < 1000 * count.max(1) {
        attempts += 1;
        let x: Vec<f64> = (0..n).map(|_| radius * (2.0 * rng.random::<f64>() - 1.0)).collect();
        if crate::domain::norm(&x) <= radius && metric.domain.contains(&x) {
            out.push(x);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts_and_corners() {
        let g = grid_points(&[-1.0, 0.0], &[1.0, 2.0], 3);
        assert_eq!(g.len(), 9);
        assert!(g.contains(&vec![-1.0, 0.0]));
        assert!(g.contains(&vec![1.0, 2.0]));
        assert!(g.contains(&vec![0.0, 1.0]));
    }

    #[test]
    fn directions_are_unit() {
        for n in 2..=4 {
            for d in unit_directions(n, 40) {
                let len: f64 = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((len - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fibonacci_lattice_is_balanced() {
        let dirs = unit_directions(3, 256);
        let mean: Vec<f64> = (0..3).map(|a| dirs.iter().map(|d| d[a]).sum::<f64>() / 256.0).collect();
        assert!(mean.iter().all(|m| m.abs() < 0.02));
    }

    #[test]
    fn random_points_are_seeded() {
        let m = MetricModel::euclidean(2);
        let a = random_points_in_ball(&m, 5.0, 10, 7);
        let b = random_points_in_ball(&m, 5.0, 10, 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|x| crate::domain::norm(x) <= 5.0));
    }
}
