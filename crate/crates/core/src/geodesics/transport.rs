//! Chern parallel transport along a geodesic, and transported orthonormal frames.

use nalgebra::DMatrix;
use serde::Serialize;

use super::GeodesicPath;
use crate::curvature::{chern_with_inverse, spray_at};
use crate::error::{Error, Result};
use crate::metric::MetricModel;
use crate::tensors::hessian_half;

/// Frames `E_1..E_n` at each path sample, with `E_n = γ′`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameField {
    pub s: Vec<f64>,
    /// `frames[k][a]` is `E_{a+1}` at sample `k`.
    pub frames: Vec<Vec<Vec<f64>>>,
}

fn inner(g: &DMatrix<f64>, u: &[f64], w: &[f64]) -> f64 {
    let n = u.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += g[(i, j)] * u[i] * w[j];
        }
    }
    acc
}

impl FrameField {
    /// Largest `|g(E_a, E_b) − δ_ab|` over all samples.
    pub fn max_orthonormality_defect(&self, metric: &MetricModel, path: &GeodesicPath) -> f64 {
        let mut worst: f64 = 0.0;
        for (frame, p) in self.frames.iter().zip(&path.samples) {
            let g = hessian_half(metric, &p.x, &p.v);
            for (a, ea) in frame.iter().enumerate() {
                for (b, eb) in frame.iter().enumerate() {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((inner(&g, ea, eb) - delta).abs());
                }
            }
        }
        worst
    }
}

// state layout: x, v, then each transported vector
fn rhs(metric: &MetricModel, state: &[f64], n: usize) -> Result<Vec<f64>> {
    let (x, rest) = state.split_at(n);
    let (v, us) = rest.split_at(n);
    if !metric.domain.contains(x) {
        return Err(Error::OutsideDomain(x.to_vec()));
    }
    let g = spray_at(metric, x, v)?;
    let (chern, _) = chern_with_inverse(metric, x, v)?;
    let mut out = Vec::with_capacity(state.len());
    out.extend_from_slice(v);
    out.extend(g.iter().map(|gi| -2.0 * gi));
    for u in us.chunks(n) {
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                for k in 0..n {
                    acc += chern.get(i, j, k) * u[j] * v[k];
                }
            }
            out.push(-acc);
        }
    }
    Ok(out)
}

fn rk4(metric: &MetricModel, y: &[f64], h: f64, n: usize) -> Result<Vec<f64>> {
    let add = |a: &[f64], c: f64, d: &[f64]| -> Vec<f64> { a.iter().zip(d).map(|(p, q)| p + c * q).collect() };
    let k1 = rhs(metric, y, n)?;
    let k2 = rhs(metric, &add(y, 0.5 * h, &k1), n)?;
    let k3 = rhs(metric, &add(y, 0.5 * h, &k2), n)?;
    let k4 = rhs(metric, &add(y, h, &k3), n)?;
    Ok((0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

/// Transport several vectors at once; `out[k][a]` is vector `a` at sample `k`.
pub fn transport_many(metric: &MetricModel, path: &GeodesicPath, initial: &[Vec<f64>]) -> Result<Vec<Vec<Vec<f64>>>> {
    let first = path.start().ok_or_else(|| Error::NotGeodesic("empty path".into()))?;
    let n = first.x.len();
    if let Some(bad) = initial.iter().find(|u| u.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
    }
    let mut state: Vec<f64> = first.x.iter().chain(&first.v).copied().collect();
    for u in initial {
        state.extend_from_slice(u);
    }
    let unpack = |st: &[f64]| st[2 * n..].chunks(n).map(|c| c.to_vec()).collect::<Vec<_>>();
    let mut out = Vec::with_capacity(path.samples.len());
    out.push(unpack(&state));
    for w in path.samples.windows(2) {
        state = rk4(metric, &state, w[1].s - w[0].s, n)?;
        out.push(unpack(&state));
    }
    Ok(out)
}

/// Chern parallel transport of `u0` along `path`.
pub fn parallel_transport(metric: &MetricModel, path: &GeodesicPath, u0: &[f64]) -> Result<Vec<Vec<f64>>> {
    Ok(transport_many(metric, path, &[u0.to_vec()])?.into_iter().map(|mut v| v.remove(0)).collect())
}

/// `g_(γ,γ′)`-orthonormal frame at the start with `E_n = γ′`, transported along the path.
pub fn orthonormal_frame(metric: &MetricModel, path: &GeodesicPath) -> Result<FrameField> {
    let first = path.start().ok_or_else(|| Error::NotGeodesic("empty path".into()))?;
    let n = first.x.len();
    let g = hessian_half(metric, &first.x, &first.v);
    let t = first.v.clone();
    let tt = inner(&g, &t, &t);
    if !(tt > 0.0) {
        return Err(Error::NotGeodesic("zero initial velocity".into()));
    }
    let mut basis: Vec<Vec<f64>> = vec![t.iter().map(|a| a / tt.sqrt()).collect()];
    for e in 0..n {
        if basis.len() == n {
            break;
        }
        let mut w: Vec<f64> = (0..n).map(|i| if i == e { 1.0 } else { 0.0 }).collect();
        for b in &basis {
            let c = inner(&g, &w, b);
            w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
        }
        let len = inner(&g, &w, &w).sqrt();
        if len > 1e-8 {
            basis.push(w.into_iter().map(|a| a / len).collect());
        }
    }
    // E_n = γ′ goes last
    basis.rotate_left(1);
    let frames = transport_many(metric, path, &basis)?;
    Ok(FrameField { s: path.arc_lengths(), frames })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ChartDomain;
    use crate::geodesics::{integrate_geodesic, StepControl};
    use crate::metric::{OneForm, RiemannianKind};

    fn randers() -> MetricModel {
        MetricModel::randers(
            ChartDomain::ball(2, 1.0),
            RiemannianKind::Constant { matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]] },
            OneForm { constant: vec![0.3, 0.1], linear: Some(vec![vec![0.1, -0.2], vec![0.15, 0.05]]) },
        )
        .unwrap()
    }

    #[test]
    fn euclidean_transport_is_constant() {
        let m = MetricModel::euclidean(2);
        let p = integrate_geodesic(&m, &[0.0, 0.0], &[1.0, 1.0], 1.0, &StepControl::fixed(1e-2)).unwrap();
        let u = parallel_transport(&m, &p, &[0.3, -0.7]).unwrap();
        let last = u.last().unwrap();
        assert!((last[0] - 0.3).abs() < 1e-14 && (last[1] + 0.7).abs() < 1e-14);
    }

    #[test]
    fn transport_keeps_velocity_and_preserves_inner_products() {
        let m = randers();
        let p = integrate_geodesic(&m, &[-0.3, -0.2], &[1.0, 0.4], 0.8, &StepControl::default()).unwrap();
        let v0 = p.samples[0].v.clone();
        let out = transport_many(&m, &p, &[v0, vec![0.2, 0.9]]).unwrap();
        let mut drift: f64 = 0.0;
        let g0 = hessian_half(&m, &p.samples[0].x, &p.samples[0].v);
        let c0 = inner(&g0, &out[0][0], &out[0][1]);
        let n0 = inner(&g0, &out[0][1], &out[0][1]);
        for (k, s) in p.samples.iter().enumerate() {
            // γ′ is parallel along itself
            for i in 0..2 {
                drift = drift.max((out[k][0][i] - s.v[i]).abs());
            }
            let g = hessian_half(&m, &s.x, &s.v);
            drift = drift.max((inner(&g, &out[k][0], &out[k][1]) - c0).abs());
            drift = drift.max((inner(&g, &out[k][1], &out[k][1]) - n0).abs());
        }
        assert!(drift < 1e-6, "{drift}");
    }

    #[test]
    fn frame_stays_orthonormal_on_sphere_and_funk() {
        for m in [MetricModel::unit_sphere(3), MetricModel::funk(3)] {
            let p = integrate_geodesic(&m, &[0.1, 0.2, -0.1], &[0.5, -0.3, 0.6], 1.2, &StepControl::default()).unwrap();
            let f = orthonormal_frame(&m, &p).unwrap();
            assert_eq!(f.frames[0].len(), 3);
            let d = f.max_orthonormality_defect(&m, &p);
            assert!(d < 1e-6, "{d}");
            let last = p.samples.len() - 1;
            for i in 0..3 {
                assert!((f.frames[last][2][i] - p.samples[last].v[i]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn euclidean_frame_is_reordered_basis() {
        let m = MetricModel::euclidean(2);
        let p = integrate_geodesic(&m, &[0.0, 0.0], &[1.0, 0.0], 1.0, &StepControl::fixed(0.1)).unwrap();
        let f = orthonormal_frame(&m, &p).unwrap();
        assert_eq!(f.frames[0], vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }
}
