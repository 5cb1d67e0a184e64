//! Forward distance by shooting: a fan of geodesics from `p` to locate `q`,
//! then damped Newton on the endpoint map `w ↦ exp_p(w)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{integrate_geodesic, GeodesicPath, StepControl};
use crate::domain::norm;
use crate::error::{Error, Result};
use crate::metric::MetricModel;
use crate::sampling::unit_directions;
use crate::tensors::MIN_F;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceOptions {
    /// Fan size; `None` picks 64 in the plane and 256 in space.
    pub fan_directions: Option<usize>,
    /// Number of closest fan rays handed to Newton.
    pub refine_best: usize,
    /// Chart-space endpoint miss accepted as converged.
    pub tolerance: f64,
    pub fan_step: f64,
    pub newton_step: f64,
    /// Step of the returned path.
    pub path_step: f64,
    pub max_iterations: usize,
    /// Fan rays run to this multiple of the straight-segment length.
    pub search_factor: f64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self {
            fan_directions: None,
            refine_best: 4,
            tolerance: 1e-6,
            fan_step: 1e-2,
            newton_step: 4e-3,
            path_step: 1e-3,
            max_iterations: 40,
            search_factor: 1.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceResult {
    pub distance: f64,
    #[serde(skip)]
    pub path: GeodesicPath,
    pub converged: bool,
    pub endpoint_miss: f64,
    /// Finsler length of the chart segment `p → q`, an upper bound for the distance.
    pub straight_length: f64,
}

// 5-point Gauss–Legendre on [-1, 1]
const GL_NODES: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
const GL_WEIGHTS: [f64; 5] =
    [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];

/// Finsler length of the straight chart segment from `p` to `q`.
pub fn segment_length(metric: &MetricModel, p: &[f64], q: &[f64]) -> Result<f64> {
    let d: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
    let panels = 64;
    let mut total = 0.0;
    for k in 0..panels {
        let (a, b) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
        for (t, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let s = 0.5 * (a + b) + 0.5 * (b - a) * t;
            let x: Vec<f64> = p.iter().zip(&d).map(|(pi, di)| pi + s * di).collect();
            metric.domain.check(&x)?;
            total += 0.5 * (b - a) * w * metric.f(&x, &d);
        }
    }
    Ok(total)
}

struct Shot {
    w: Vec<f64>,
    miss: f64,
}

fn endpoint(metric: &MetricModel, p: &[f64], w: &[f64], step: f64) -> Option<Vec<f64>> {
    let len = metric.f(p, w);
    if !(len >= MIN_F) {
        return None;
    }
    let path = integrate_geodesic(metric, p, w, len, &StepControl::fixed(step)).ok()?;
    (!path.truncated).then(|| path.end().map(|e| e.x.clone())).flatten()
}

fn gap(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Closest approach of one fan ray to `q`, refined between samples by golden section.
fn fan_shot(metric: &MetricModel, p: &[f64], q: &[f64], u: &[f64], length: f64, step: f64) -> Option<Shot> {
    let path = integrate_geodesic(metric, p, u, length, &StepControl::fixed(step)).ok()?;
    let dist = |x: &[f64]| norm(&gap(x, q));
    let (k, _) = path
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| (k, dist(&s.x)))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let lo = path.samples[k.saturating_sub(1)].s;
    let hi = path.samples[(k + 1).min(path.samples.len() - 1)].s;
    let at = |s: f64| path.point_at(s).map_or(f64::INFINITY, |(x, _)| dist(&x));
    let (mut a, mut b) = (lo, hi);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..40 {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if at(c) < at(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let s = 0.5 * (a + b);
    let v0 = &path.samples[0].v;
    Some(Shot { w: v0.iter().map(|v| v * s).collect(), miss: at(s) })
}

fn newton(metric: &MetricModel, p: &[f64], q: &[f64], start: Shot, opts: &DistanceOptions) -> Shot {
    let n = p.len();
    let mut w = start.w;
    let mut e = match endpoint(metric, p, &w, opts.newton_step) {
        Some(x) => gap(&x, q),
        None => return Shot { w, miss: f64::INFINITY },
    };
    let mut miss = norm(&e);
    for _ in 0..opts.max_iterations {
        if miss <= 0.1 * opts.tolerance {
            break;
        }
        let scale = norm(&w).max(1e-3);
        let mut jac = DMatrix::zeros(n, n);
        let mut ok = true;
        for j in 0..n {
            let h = 1e-6 * scale;
            let mut wp = w.clone();
            wp[j] += h;
            let mut wm = w.clone();
            wm[j] -= h;
            match (endpoint(metric, p, &wp, opts.newton_step), endpoint(metric, p, &wm, opts.newton_step)) {
                (Some(a), Some(b)) => {
                    for i in 0..n {
                        jac[(i, j)] = (a[i] - b[i]) / (2.0 * h);
                    }
                }
                _ => ok = false,
            }
        }
        if !ok {
            break;
        }
        let Some(delta) = jac.lu().solve(&DVector::from_column_slice(&e)) else { break };
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..12 {
            let trial: Vec<f64> = w.iter().zip(delta.iter()).map(|(a, d)| a - alpha * d).collect();
            if let Some(x) = endpoint(metric, p, &trial, opts.newton_step) {
                let et = gap(&x, q);
                let mt = norm(&et);
                if mt < miss {
                    w = trial;
                    e = et;
                    miss = mt;
                    improved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Shot { w, miss }
}

/// Forward distance `d(p, q)` and a minimizing geodesic.
///
/// `converged` is false when no shot reached `q` within the tolerance; the
/// closest shot is reported.
pub fn distance(metric: &MetricModel, p: &[f64], q: &[f64], opts: &DistanceOptions) -> Result<DistanceResult> {
    metric.domain.check(p)?;
    metric.domain.check(q)?;
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    if norm(&gap(p, q)) < 1e-15 {
        return Ok(DistanceResult {
            distance: 0.0,
            path: GeodesicPath::empty(),
            converged: true,
            endpoint_miss: 0.0,
            straight_length: 0.0,
        });
    }
    let n = p.len();
    let straight = segment_length(metric, p, q)?;
    let count = opts.fan_directions.unwrap_or(if n == 2 { 64 } else { 256 });
    let mut shots: Vec<Shot> = unit_directions(n, count)
        .par_iter()
        .filter_map(|u| fan_shot(metric, p, q, u, straight * opts.search_factor, opts.fan_step))
        .collect();
    // the straight segment direction is a good seed whenever geodesics bend little
    let dir = gap(q, p);
    if let Some(mut s) = fan_shot(metric, p, q, &dir, straight * opts.search_factor, opts.fan_step) {
        s.miss *= 0.5;
        shots.push(s);
    }
    shots.sort_by(|a, b| a.miss.total_cmp(&b.miss));
    shots.truncate(opts.refine_best.max(1));

    let refined: Vec<Shot> = shots.into_iter().map(|s| newton(metric, p, q, s, opts)).collect();
    let length = |s: &Shot| metric.f(p, &s.w);
    let best = refined
        .iter()
        .filter(|s| s.miss <= opts.tolerance)
        .min_by(|a, b| length(a).total_cmp(&length(b)))
        .or_else(|| refined.iter().min_by(|a, b| a.miss.total_cmp(&b.miss)))
        .ok_or(Error::EmptyPlan)?;

    let len = length(best);
    let path = integrate_geodesic(metric, p, &best.w, len, &StepControl::fixed(opts.path_step))?;
    let miss = path.end().map_or(f64::INFINITY, |e| norm(&gap(&e.x, q)));
    Ok(DistanceResult {
        distance: len,
        converged: miss <= opts.tolerance && !path.truncated,
        path,
        endpoint_miss: miss,
        straight_length: straight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn coincident_points() {
        let m = MetricModel::funk(2);
        let r = distance(&m, &[0.1, 0.2], &[0.1, 0.2], &DistanceOptions::default()).unwrap();
        assert_eq!(r.distance, 0.0);
        assert!(r.path.is_empty() && r.converged);
    }

    #[test]
    fn funk_forward_and_backward_from_origin() {
        let m = MetricModel::funk(2);
        let q = [0.3, 0.4];
        let fwd = distance(&m, &[0.0, 0.0], &q, &DistanceOptions::default()).unwrap();
        assert!(fwd.converged);
        assert!((fwd.distance + (1.0f64 - 0.5).ln()).abs() < 1e-4, "{}", fwd.distance);
        let back = distance(&m, &q, &[0.0, 0.0], &DistanceOptions::default()).unwrap();
        assert!((back.distance - 1.5f64.ln()).abs() < 1e-4, "{}", back.distance);
    }

    #[test]
    fn sphere_quarter_circle() {
        let m = MetricModel::unit_sphere(2);
        let r = distance(&m, &[0.0, 0.0], &[1.0, 0.0], &DistanceOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.distance - FRAC_PI_2).abs() < 1e-4, "{}", r.distance);
    }

    #[test]
    fn sphere_off_axis_pair_matches_chordal_formula() {
        let m = MetricModel::unit_sphere(2);
        let (p, q) = ([0.3, -0.2], [-0.4, 0.5]);
        let r = distance(&m, &p, &q, &DistanceOptions::default()).unwrap();
        let embed = |x: &[f64]| {
            let s = x[0] * x[0] + x[1] * x[1];
            [2.0 * x[0] / (1.0 + s), 2.0 * x[1] / (1.0 + s), (s - 1.0) / (1.0 + s)]
        };
        let (a, b) = (embed(&p), embed(&q));
        let expect = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).acos();
        assert!((r.distance - expect).abs() < 1e-5, "{} vs {expect}", r.distance);
        assert!(r.distance <= r.straight_length + 1e-9);
    }

    #[test]
    fn segment_length_is_euclidean_length_for_euclidean_metric() {
        let m = MetricModel::euclidean(3);
        let l = segment_length(&m, &[0.0, 0.0, 0.0], &[1.0, 2.0, 2.0]).unwrap();
        assert!((l - 3.0).abs() < 1e-12);
    }
}
