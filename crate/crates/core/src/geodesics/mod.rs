//! Geodesics of the spray `ẍ^i + 2G^i(x, ẋ) = 0`, parameterized by arc length.

mod distance;
mod quadrature;
mod transport;
mod variation;

pub use distance::{distance, segment_length, DistanceOptions, DistanceResult};
pub use quadrature::{ricci_integral, simpson, QuadratureResult};
pub use transport::{orthonormal_frame, parallel_transport, transport_many, FrameField};
pub use variation::{second_variation, second_variation_with_frame, PhiPiece, Piecewise, VariationSpec};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::curvature::spray_at;
use crate::error::{Error, Result};
use crate::metric::MetricModel;
use crate::tensors::MIN_F;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathSample {
    pub s: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// Arc-length parameterized geodesic sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicPath {
    pub samples: Vec<PathSample>,
    pub total_length: f64,
    /// Set when the geodesic reached the chart boundary before the requested length.
    pub truncated: bool,
    /// Endpoint difference between step `h` and `h/2` runs, when requested.
    pub error_estimate: Option<f64>,
}

/// Fixed-step RK4 settings with a step-halving endpoint check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub step: f64,
    /// Endpoint tolerance for the `h` vs `h/2` comparison; `None` skips the check.
    pub tolerance: Option<f64>,
    pub max_halvings: u32,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { step: 1e-3, tolerance: Some(1e-8), max_halvings: 4 }
    }
}

impl StepControl {
    pub fn fixed(step: f64) -> Self {
        Self { step, tolerance: None, max_halvings: 0 }
    }
}

impl GeodesicPath {
    pub fn empty() -> Self {
        Self { samples: Vec::new(), total_length: 0.0, truncated: false, error_estimate: None }
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start(&self) -> Option<&PathSample> {
        self.samples.first()
    }

    pub fn end(&self) -> Option<&PathSample> {
        self.samples.last()
    }

    pub fn arc_lengths(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.s).collect()
    }

    /// Cubic Hermite interpolation of position and velocity at arc length `s`.
    pub fn point_at(&self, s: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let first = self.samples.first()?;
        let last = self.samples.last()?;
        if s < first.s || s > last.s {
            return None;
        }
        let k = self.samples.partition_point(|p| p.s <= s).clamp(1, self.samples.len().max(2) - 1);
        if self.samples.len() == 1 {
            return Some((first.x.clone(), first.v.clone()));
        }
        let a = &self.samples[k - 1];
        let b = &self.samples[k];
        let h = b.s - a.s;
        let t = (s - a.s) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let x = (0..a.x.len())
            .map(|i| h00 * a.x[i] + h10 * h * a.v[i] + h01 * b.x[i] + h11 * h * b.v[i])
            .collect();
        let v = (0..a.v.len()).map(|i| a.v[i] + t * (b.v[i] - a.v[i])).collect();
        Some((x, v))
    }

    /// `max_s |F(γ, γ′) − 1|`.
    pub fn max_speed_defect(&self, metric: &MetricModel) -> f64 {
        self.samples.iter().map(|p| (metric.f(&p.x, &p.v) - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Columns `s, x_1..x_n, v_1..v_n` with a header row.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let n = self.samples.first().map_or(0, |p| p.x.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["s".to_string()];
        header.extend((1..=n).map(|i| format!("x_{i}")));
        header.extend((1..=n).map(|i| format!("v_{i}")));
        w.write_record(&header)?;
        for p in &self.samples {
            let mut row = vec![format!("{:.12e}", p.s)];
            row.extend(p.x.iter().map(|v| format!("{v:.12e}")));
            row.extend(p.v.iter().map(|v| format!("{v:.12e}")));
            w.write_record(&row)?;
        }
        w.flush()
    }
}

type State = (Vec<f64>, Vec<f64>);

fn geodesic_rhs(metric: &MetricModel, x: &[f64], v: &[f64]) -> Result<State> {
    if !metric.domain.contains(x) {
        return Err(Error::OutsideDomain(x.to_vec()));
    }
    let g = spray_at(metric, x, v)?;
    Ok((v.to_vec(), g.iter().map(|gi| -2.0 * gi).collect()))
}

fn axpy(x: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + a * di).collect()
}

pub(crate) fn rk4_step(metric: &MetricModel, x: &[f64], v: &[f64], h: f64) -> Result<State> {
    let (k1x, k1v) = geodesic_rhs(metric, x, v)?;
    let (k2x, k2v) = geodesic_rhs(metric, &axpy(x, 0.5 * h, &k1x), &axpy(v, 0.5 * h, &k1v))?;
    let (k3x, k3v) = geodesic_rhs(metric, &axpy(x, 0.5 * h, &k2x), &axpy(v, 0.5 * h, &k2v))?;
    let (k4x, k4v) = geodesic_rhs(metric, &axpy(x, h, &k3x), &axpy(v, h, &k3v))?;
    let comb = |y: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
        (0..y.len()).map(|i| y[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i])).collect()
    };
    Ok((comb(x, &k1x, &k2x, &k3x, &k4x), comb(v, &k1v, &k2v, &k3v, &k4v)))
}

/// Uniform grid for `[0, length]` with spacing at most `step`.
pub(crate) fn uniform_steps(length: f64, step: f64) -> (usize, f64) {
    let count = ((length / step).ceil() as usize).max(1);
    (count, length / count as f64)
}

fn run_fixed(metric: &MetricModel, x0: &[f64], v0: &[f64], length: f64, step: f64) -> Result<GeodesicPath> {
    let (count, h) = uniform_steps(length, step);
    let mut samples = Vec::with_capacity(count + 1);
    samples.push(PathSample { s: 0.0, x: x0.to_vec(), v: v0.to_vec() });
    let (mut x, mut v) = (x0.to_vec(), v0.to_vec());
    let mut truncated = false;
    for k in 0..count {
        match rk4_step(metric, &x, &v, h) {
            Ok((nx, nv)) if metric.domain.contains(&nx) => {
                x = nx;
                v = nv;
                samples.push(PathSample { s: (k + 1) as f64 * h, x: x.clone(), v: v.clone() });
            }
            Ok(_) | Err(Error::OutsideDomain(_)) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let total_length = samples.last().map_or(0.0, |p| p.s);
    Ok(GeodesicPath { samples, total_length, truncated, error_estimate: None })
}

fn endpoint_gap(a: &GeodesicPath, b: &GeodesicPath) -> f64 {
    // compare at the common final arc length
    let s = a.total_length.min(b.total_length);
    match (a.point_at(s), b.point_at(s)) {
        (Some((xa, _)), Some((xb, _))) => xa.iter().zip(&xb).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt(),
        _ => f64::INFINITY,
    }
}

/// Unit-speed geodesic from `x0` in direction `y0` (renormalized so `F(x0, y0) = 1`).
pub fn integrate_geodesic(
    metric: &MetricModel,
    x0: &[f64],
    y0: &[f64],
    length: f64,
    control: &StepControl,
) -> Result<GeodesicPath> {
    metric.domain.check(x0)?;
    if y0.len() != x0.len() {
        return Err(Error::DimensionMismatch { expected: x0.len(), got: y0.len() });
    }
    let f = metric.f(x0, y0);
    if !(f >= MIN_F) {
        return Err(Error::ZeroDirection(f));
    }
    let v0: Vec<f64> = y0.iter().map(|v| v / f).collect();
    if !(length > 0.0) {
        return Ok(GeodesicPath {
            samples: vec![PathSample { s: 0.0, x: x0.to_vec(), v: v0 }],
            total_length: 0.0,
            truncated: false,
            error_estimate: None,
        });
    }
    let Some(tol) = control.tolerance else {
        return run_fixed(metric, x0, &v0, length, control.step);
    };
    let mut h = control.step;
    let mut coarse = run_fixed(metric, x0, &v0, length, h)?;
    for _ in 0..=control.max_halvings {
        let fine = run_fixed(metric, x0, &v0, length, h / 2.0)?;
        let err = endpoint_gap(&coarse, &fine);
        if err <= tol {
            coarse.error_estimate = Some(err);
            return Ok(coarse);
        }
        h /= 2.0;
        coarse = fine;
    }
    Err(Error::StepCollapse(h))
}
