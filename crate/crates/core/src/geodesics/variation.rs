//! Second variation of arc length for fixed-endpoint variations `U = φ E_i`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::transport::{orthonormal_frame, FrameField};
use super::{rk4_step, GeodesicPath};
use crate::curvature::{curvature_raw, spray_at};
use crate::error::{Error, Result};
use crate::metric::MetricModel;
use crate::tensors::{hessian_half, DerivativeEngine};

/// One closed-form piece of `φ`, written in the absolute arc length `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhiPiece {
    /// `Σ c_k s^k`
    Polynomial { coefficients: Vec<f64> },
    /// `A sin(ω s + θ)`
    Sine { amplitude: f64, frequency: f64, phase: f64 },
}

impl PhiPiece {
    pub fn value(&self, s: f64) -> f64 {
        match self {
            Self::Polynomial { coefficients } => coefficients.iter().rev().fold(0.0, |acc, c| acc * s + c),
            Self::Sine { amplitude, frequency, phase } => amplitude * (frequency * s + phase).sin(),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            Self::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * s + k as f64 * c),
            Self::Sine { amplitude, frequency, phase } => amplitude * frequency * (frequency * s + phase).cos(),
        }
    }

    fn scaled(&self, c: f64) -> Self {
        match self {
            Self::Polynomial { coefficients } => {
                Self::Polynomial { coefficients: coefficients.iter().map(|a| a * c).collect() }
            }
            Self::Sine { amplitude, frequency, phase } => {
                Self::Sine { amplitude: amplitude * c, frequency: *frequency, phase: *phase }
            }
        }
    }
}

/// Piecewise-smooth `φ` on `[0, r]`: piece `k` lives on `[breakpoints[k], breakpoints[k+1]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piecewise {
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<PhiPiece>,
}

impl Piecewise {
    /// `s` on `[0, 1]`, `1` on `[1, r − 1]`, `r − s` on `[r − 1, r]`; needs `r ≥ 2`.
    pub fn ramp_plateau(r: f64) -> Result<Self> {
        if !(r >= 2.0) {
            return Err(Error::InvalidVariation(format!("ramp-plateau needs r >= 2, got {r}")));
        }
        Ok(Self {
            breakpoints: vec![0.0, 1.0, r - 1.0, r],
            pieces: vec![
                PhiPiece::Polynomial { coefficients: vec![0.0, 1.0] },
                PhiPiece::Polynomial { coefficients: vec![1.0] },
                PhiPiece::Polynomial { coefficients: vec![r, -1.0] },
            ],
        })
    }

    /// `sin(kπ s / r)`.
    pub fn sine(r: f64, k: u32) -> Self {
        Self {
            breakpoints: vec![0.0, r],
            pieces: vec![PhiPiece::Sine { amplitude: 1.0, frequency: k as f64 * std::f64::consts::PI / r, phase: 0.0 }],
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { breakpoints: self.breakpoints.clone(), pieces: self.pieces.iter().map(|p| p.scaled(c)).collect() }
    }

    pub fn length(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(0.0)
    }

    fn piece_index(&self, s: f64) -> usize {
        self.breakpoints[1..self.breakpoints.len() - 1].partition_point(|b| *b <= s)
    }

    pub fn value(&self, s: f64) -> f64 {
        self.pieces[self.piece_index(s)].value(s)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        self.pieces[self.piece_index(s)].derivative(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidVariation(m));
        if self.pieces.is_empty() || self.breakpoints.len() != self.pieces.len() + 1 {
            return bad("need one more breakpoint than pieces".into());
        }
        if self.breakpoints[0] != 0.0 || self.breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("breakpoints must start at 0 and increase".into());
        }
        let r = self.length();
        let first = self.pieces[0].value(0.0);
        let last = self.pieces[self.pieces.len() - 1].value(r);
        if first.abs() > 1e-10 || last.abs() > 1e-10 {
            return bad(format!("phi must vanish at the endpoints, got {first} and {last}"));
        }
        for k in 0..self.pieces.len() - 1 {
            let b = &self.breakpoints[k + 1];
            let jump = (self.pieces[k].value(*b) - self.pieces[k + 1].value(*b)).abs();
            if jump > 1e-8 {
                return bad(format!("phi jumps by {jump} at s = {b}"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationSpec {
    pub phi: Piecewise,
    /// 1-based index of the frame field `E_i`.
    pub frame_index: usize,
}

fn check_geodesic(metric: &MetricModel, path: &GeodesicPath) -> Result<()> {
    if path.samples.len() < 2 {
        return Err(Error::NotGeodesic("path has fewer than two samples".into()));
    }
    let defect = path.max_speed_defect(metric);
    if defect > 1e-5 {
        return Err(Error::NotGeodesic(format!("speed defect {defect:.3e}")));
    }
    let m = path.samples.len();
    let stride = ((m - 1) / 64).max(1);
    for k in (0..m - 1).step_by(stride) {
        let (a, b) = (&path.samples[k], &path.samples[k + 1]);
        let h = b.s - a.s;
        if !(h > 0.0) {
            return Err(Error::NotGeodesic(format!("arc length does not increase at s = {}", a.s)));
        }
        // one RK4 step from `a` must land on `b`; the miss divided by h² is an acceleration residual
        let (x, v) = rk4_step(metric, &a.x, &a.v, h)?;
        let g = spray_at(metric, &a.x, &a.v)?;
        let scale = 1.0 + a.v.iter().chain(&g).fold(0.0f64, |acc, w| acc.max(w.abs()));
        let miss = x.iter().zip(&b.x).chain(v.iter().zip(&b.v)).fold(0.0f64, |acc, (p, q)| acc.max((p - q).abs()));
        let residual = miss / (h * h);
        if residual > 1e-4 * scale {
            return Err(Error::NotGeodesic(format!("geodesic equation residual {residual:.3e} at s = {}", a.s)));
        }
    }
    Ok(())
}

// 5-point Gauss–Legendre on [0, 1]
const GL: [(f64, f64); 5] = [
    (0.046_910_077_030_668, 0.118_463_442_528_095),
    (0.230_765_344_947_158, 0.239_314_335_249_683),
    (0.5, 0.284_444_444_444_444),
    (0.769_234_655_052_842, 0.239_314_335_249_683),
    (0.953_089_922_969_332, 0.118_463_442_528_095),
];

/// `L″(0)` with the frame built by [`orthonormal_frame`].
pub fn second_variation(metric: &MetricModel, path: &GeodesicPath, spec: &VariationSpec) -> Result<f64> {
    check_geodesic(metric, path)?;
    let frame = orthonormal_frame(metric, path)?;
    second_variation_with_frame(metric, path, &frame, spec)
}

/// `L″(0) = ∫ [φ′² g(E,E) − φ² F² R_jk E^j E^k − (d/ds (φ g(E, T)))²] ds`.
///
/// Frame-dependent samples are interpolated linearly between path samples;
/// `φ` is evaluated in closed form at Gauss nodes on every sub-interval.
pub fn second_variation_with_frame(
    metric: &MetricModel,
    path: &GeodesicPath,
    frame: &FrameField,
    spec: &VariationSpec,
) -> Result<f64> {
    spec.phi.validate()?;
    let n = path.samples.first().map_or(0, |p| p.x.len());
    if spec.frame_index == 0 || spec.frame_index > n {
        return Err(Error::FrameIndex { index: spec.frame_index, dimension: n });
    }
    let r = path.total_length;
    if (spec.phi.length() - r).abs() > 1e-6 * r.max(1.0) {
        return Err(Error::InvalidVariation(format!("phi is defined on [0, {}] but the path has length {r}", spec.phi.length())));
    }
    let a = spec.frame_index - 1;
    let engine = DerivativeEngine::default();
    // A = g(E,E), B = F² R_jk E^j E^k, P = g(E,T)
    let abp = path
        .samples
        .par_iter()
        .zip(&frame.frames)
        .map(|(p, fr)| {
            let e = &fr[a];
            let g = hessian_half(metric, &p.x, &p.v);
            let f2 = metric.f2(&p.x, &p.v);
            let rk = curvature_raw(metric, &engine, &p.x, &p.v, f2)?;
            let re = &rk * nalgebra::DVector::from_column_slice(e);
            let ge = &g * nalgebra::DVector::from_column_slice(e);
            let gee = ge.iter().zip(e).map(|(u, v)| u * v).sum::<f64>();
            let bee = f2 * ge.iter().zip(re.iter()).map(|(u, v)| u * v).sum::<f64>();
            let pet = ge.iter().zip(&p.v).map(|(u, v)| u * v).sum::<f64>();
            Ok((gee, bee, pet))
        })
        .collect::<Result<Vec<(f64, f64, f64)>>>()?;

    // cut every sample interval at the breakpoints of φ
    let mut cuts: Vec<f64> = path.arc_lengths();
    cuts.extend(spec.phi.breakpoints.iter().filter(|b| **b > 0.0 && **b < r));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);

    let s = path.arc_lengths();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let k = s.partition_point(|t| *t <= lo).clamp(1, s.len() - 1);
        let (s0, s1) = (s[k - 1], s[k]);
        let (q0, q1) = (abp[k - 1], abp[k]);
        let dp = (q1.2 - q0.2) / (s1 - s0);
        for (t, wt) in GL {
            let x = lo + t * (hi - lo);
            let u = (x - s0) / (s1 - s0);
            let aa = q0.0 + u * (q1.0 - q0.0);
            let bb = q0.1 + u * (q1.1 - q0.1);
            let pp = q0.2 + u * (q1.2 - q0.2);
            let phi = spec.phi.value(x);
            let dphi = spec.phi.derivative(x);
            let cross = dphi * pp + phi * dp;
            total += wt * (hi - lo) * (dphi * dphi * aa - phi * phi * bb - cross * cross);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesics::{integrate_geodesic, StepControl};
    use std::f64::consts::PI;

    fn spec(phi: Piecewise, i: usize) -> VariationSpec {
        VariationSpec { phi, frame_index: i }
    }

    #[test]
    fn euclidean_sine_variation() {
        let m = MetricModel::euclidean(2);
        let p = integrate_geodesic(&m, &[0.0, 0.0], &[1.0, 0.0], 2.0, &StepControl::default()).unwrap();
        let v = second_variation(&m, &p, &spec(Piecewise::sine(2.0, 1), 1)).unwrap();
        assert!((v - PI * PI / 4.0).abs() < 1e-4, "{v}");
    }

    #[test]
    fn tangential_variation_vanishes() {
        let m = MetricModel::unit_sphere(2);
        let p = integrate_geodesic(&m, &[0.2, 0.0], &[0.0, 1.0], 2.5, &StepControl::default()).unwrap();
        let v = second_variation(&m, &p, &spec(Piecewise::ramp_plateau(2.5).unwrap(), 2)).unwrap();
        assert!(v.abs() < 1e-6, "{v}");
    }

    #[test]
    fn sphere_past_conjugate_point_is_negative() {
        let m = MetricModel::unit_sphere(2);
        let r = 1.5 * PI;
        let p = integrate_geodesic(&m, &[0.5, 0.0], &[0.0, 1.0], r, &StepControl::default()).unwrap();
        let v = second_variation(&m, &p, &spec(Piecewise::sine(r, 1), 1)).unwrap();
        let expect = (PI * PI / (r * r) - 1.0) * r / 2.0;
        assert!(v < 0.0);
        assert!((v - expect).abs() < 1e-4, "{v} vs {expect}");
    }

    #[test]
    fn ramp_plateau_on_sphere_matches_closed_form() {
        let m = MetricModel::unit_sphere(3);
        let r = 2.5;
        let p = integrate_geodesic(&m, &[0.1, -0.3, 0.2], &[0.3, 0.5, -0.2], r, &StepControl::default()).unwrap();
        // ∫ φ′² − φ² = 2 − (2/3 + (r − 2))
        let expect = 2.0 - (2.0 / 3.0 + (r - 2.0));
        for i in 1..=2 {
            let v = second_variation(&m, &p, &spec(Piecewise::ramp_plateau(r).unwrap(), i)).unwrap();
            assert!((v - expect).abs() < 1e-5, "{v} vs {expect}");
        }
    }

    #[test]
    fn quadratic_in_phi() {
        let m = MetricModel::funk(2);
        let p = integrate_geodesic(&m, &[0.1, 0.1], &[0.2, 1.0], 1.0, &StepControl::default()).unwrap();
        let base = spec(Piecewise::sine(1.0, 2), 1);
        let v1 = second_variation(&m, &p, &base).unwrap();
        let v3 = second_variation(&m, &p, &spec(base.phi.scaled(3.0), 1)).unwrap();
        assert!((v3 - 9.0 * v1).abs() <= 1e-8 * v3.abs());
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = MetricModel::euclidean(2);
        let p = integrate_geodesic(&m, &[0.0, 0.0], &[1.0, 0.0], 2.0, &StepControl::fixed(1e-2)).unwrap();
        assert!(matches!(
            second_variation(&m, &p, &spec(Piecewise::sine(2.0, 1), 3)),
            Err(Error::FrameIndex { index: 3, dimension: 2 })
        ));
        let mut bent = p.clone();
        bent.samples.iter_mut().for_each(|q| q.x[1] = 0.3 * q.s * q.s);
        assert!(matches!(second_variation(&m, &bent, &spec(Piecewise::sine(2.0, 1), 1)), Err(Error::NotGeodesic(_))));
        let open = Piecewise {
            breakpoints: vec![0.0, 2.0],
            pieces: vec![PhiPiece::Polynomial { coefficients: vec![0.0, 1.0] }],
        };
        assert!(matches!(open.validate(), Err(Error::InvalidVariation(_))));
        let jump = Piecewise {
            breakpoints: vec![0.0, 1.0, 2.0],
            pieces: vec![
                PhiPiece::Polynomial { coefficients: vec![0.0, 1.0] },
                PhiPiece::Polynomial { coefficients: vec![2.0, -1.0] },
            ],
        };
        assert!(jump.validate().is_ok());
        let broken = Piecewise { pieces: vec![jump.pieces[0].clone(), PhiPiece::Polynomial { coefficients: vec![4.0, -2.0] }], ..jump };
        assert!(broken.validate().is_err());
    }
}
