//! Connection and curvature objects: formal Christoffel symbols, spray
//! coefficients, the reduced curvature `R^i_k`, its trace, and the Chern
//! horizontal coefficients used for parallel transport.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dual::{seed2, Dual, D1, D2};
use crate::error::Result;
use crate::linalg::Tensor3;
use crate::metric::MetricModel;
use crate::tensors::{
    cartan_raw, eval_f, inverse_fundamental, metric_x_derivatives, spray_generic, DerivativeEngine, PointDirection,
    XDerivative,
};

/// `G^i`, `N^i_j = ∂G^i/∂y^j` and `∂²G^i/∂y^j∂y^k` at a point-direction.
#[derive(Clone, Debug, PartialEq)]
pub struct SprayData {
    pub g: Vec<f64>,
    pub n: DMatrix<f64>,
    pub gjk: Tensor3,
    pub base: PointDirection,
}

/// Reduced curvature `R^i_k` (carrying the `1/F²` factor) and its trace.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureData {
    pub r: DMatrix<f64>,
    pub ric: f64,
    pub base: PointDirection,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HorizontalCoefficients {
    pub gamma: Tensor3,
}

/// Everything the curvature formula needs from the spray, in one pass.
#[derive(Clone, Debug)]
pub(crate) struct SprayJet {
    pub g: Vec<f64>,
    pub n: DMatrix<f64>,
    pub gjk: Tensor3,
    /// `∂G^i/∂x^k`
    pub dx: DMatrix<f64>,
    /// `y^j ∂²G^i/∂x^j∂y^k`
    pub mixed: DMatrix<f64>,
}

/// `G^i(x, y)` with no domain checks; the integrators' hot path.
pub(crate) fn spray_at(metric: &MetricModel, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    spray_generic(metric, &DerivativeEngine::default(), x, y)
}

fn spray_y_derivatives(
    metric: &MetricModel,
    engine: &DerivativeEngine,
    x: &[f64],
    y: &[f64],
) -> Result<(Vec<f64>, DMatrix<f64>, Tensor3)> {
    let n = x.len();
    let xs: Vec<D2> = x.iter().map(|&v| seed2(v, 0.0, 0.0)).collect();
    let mut g = vec![0.0; n];
    let mut nmat = DMatrix::zeros(n, n);
    let mut gjk = Tensor3::zeros(n);
    for j in 0..n {
        for k in j..n {
            let ys: Vec<D2> = (0..n)
                .map(|a| seed2(y[a], (a == j) as u8 as f64, (a == k) as u8 as f64))
                .collect();
            let out = spray_generic(metric, engine, &xs, &ys)?;
            for i in 0..n {
                g[i] = out[i].re.re;
                nmat[(i, j)] = out[i].du.re;
                nmat[(i, k)] = out[i].re.du;
                gjk.set(i, j, k, out[i].du.du);
                gjk.set(i, k, j, out[i].du.du);
            }
        }
    }
    Ok((g, nmat, gjk))
}

/// `N^i_k` alone, via first-order duals in y.
pub(crate) fn connection_by_duals(metric: &MetricModel, engine: &DerivativeEngine, x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
    let n = x.len();
    let xs: Vec<D1> = x.iter().map(|&v| Dual::constant(v)).collect();
    let mut nmat = DMatrix::zeros(n, n);
    for k in 0..n {
        let ys: Vec<D1> = (0..n).map(|a| Dual::new(y[a], (a == k) as u8 as f64)).collect();
        let out = spray_generic(metric, engine, &xs, &ys)?;
        for i in 0..n {
            nmat[(i, k)] = out[i].du;
        }
    }
    Ok(nmat)
}

pub(crate) fn spray_jet(metric: &MetricModel, engine: &DerivativeEngine, x: &[f64], y: &[f64]) -> Result<SprayJet> {
    let n = x.len();
    let (g, nmat, gjk) = spray_y_derivatives(metric, engine, x, y)?;
    let mut dx = DMatrix::zeros(n, n);
    let mut mixed = DMatrix::zeros(n, n);
    match engine.x_mode {
        XDerivative::Exact => {
            let ys1: Vec<D1> = y.iter().map(|&v| Dual::constant(v)).collect();
            for k in 0..n {
                let xs: Vec<D1> = (0..n).map(|a| Dual::new(x[a], (a == k) as u8 as f64)).collect();
                let out = spray_generic(metric, engine, &xs, &ys1)?;
                for i in 0..n {
                    dx[(i, k)] = out[i].du;
                }
            }
            // x moves along y on ε₁, y^k on ε₂.
            let xs: Vec<D2> = (0..n).map(|a| seed2(x[a], y[a], 0.0)).collect();
            for k in 0..n {
                let ys: Vec<D2> = (0..n).map(|a| seed2(y[a], 0.0, (a == k) as u8 as f64)).collect();
                let out = spray_generic(metric, engine, &xs, &ys)?;
                for i in 0..n {
                    mixed[(i, k)] = out[i].du.du;
                }
            }
        }
        XDerivative::CentralDifference { .. } => {
            for j in 0..n {
                let h = engine.x_step(x[j]);
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[j] += h;
                xm[j] -= h;
                let gp = spray_generic(metric, engine, &xp, y)?;
                let gm = spray_generic(metric, engine, &xm, y)?;
                for i in 0..n {
                    dx[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
                }
                let np = connection_by_duals(metric, engine, &xp, y)?;
                let nm = connection_by_duals(metric, engine, &xm, y)?;
                mixed += (np - nm) * (y[j] / (2.0 * h));
            }
        }
    }
    Ok(SprayJet { g, n: nmat, gjk, dx, mixed })
}

/// Formal Christoffel symbols `γ^i_jk = ½ g^{is}(∂_k g_sj − ∂_s g_jk + ∂_j g_ks)`.
pub fn christoffel(metric: &MetricModel, pd: &PointDirection) -> Result<Tensor3> {
    christoffel_with(metric, pd, &DerivativeEngine::default())
}

pub fn christoffel_with(metric: &MetricModel, pd: &PointDirection, engine: &DerivativeEngine) -> Result<Tensor3> {
    let ginv = inverse_fundamental(metric, pd)?;
    Ok(christoffel_raw(metric, engine, &pd.x, &pd.y, &ginv))
}

fn christoffel_raw(
    metric: &MetricModel,
    engine: &DerivativeEngine,
    x: &[f64],
    y: &[f64],
    ginv: &DMatrix<f64>,
) -> Tensor3 {
    let n = x.len();
    let dg = metric_x_derivatives(metric, engine, x, y);
    // lowered first kind: Γ_sjk = ½(∂_k g_sj − ∂_s g_jk + ∂_j g_ks)
    let lowered = Tensor3::from_fn(n, |s, j, k| 0.5 * (dg[k][(s, j)] - dg[s][(j, k)] + dg[j][(k, s)]));
    Tensor3::from_fn(n, |i, j, k| (0..n).map(|s| ginv[(i, s)] * lowered.get(s, j, k)).sum())
}

/// Spray coefficients `G^i = ½ γ^i_jk y^j y^k` with their y-derivatives.
pub fn spray_coefficients(metric: &MetricModel, pd: &PointDirection) -> Result<SprayData> {
    spray_coefficients_with(metric, pd, &DerivativeEngine::default())
}

pub fn spray_coefficients_with(
    metric: &MetricModel,
    pd: &PointDirection,
    engine: &DerivativeEngine,
) -> Result<SprayData> {
    inverse_fundamental(metric, pd)?;
    let (g, n, gjk) = spray_y_derivatives(metric, engine, &pd.x, &pd.y)?;
    Ok(SprayData { g, n, gjk, base: pd.clone() })
}

/// Reduced curvature
/// `R^i_k = F⁻²(2 ∂_{x^k}G^i − y^j ∂²_{x^j y^k}G^i + 2 G^j ∂²_{y^j y^k}G^i − ∂_{y^j}G^i ∂_{y^k}G^j)`
/// and `ric = R^k_k`.
pub fn reduced_curvature(metric: &MetricModel, pd: &PointDirection) -> Result<CurvatureData> {
    reduced_curvature_with(metric, pd, &DerivativeEngine::default())
}

pub fn reduced_curvature_with(
    metric: &MetricModel,
    pd: &PointDirection,
    engine: &DerivativeEngine,
) -> Result<CurvatureData> {
    let f = eval_f(metric, pd)?;
    inverse_fundamental(metric, pd)?;
    let r = curvature_raw(metric, engine, &pd.x, &pd.y, f * f)?;
    let ric = r.trace();
    Ok(CurvatureData { r, ric, base: pd.clone() })
}

pub(crate) fn curvature_raw(
    metric: &MetricModel,
    engine: &DerivativeEngine,
    x: &[f64],
    y: &[f64],
    f2: f64,
) -> Result<DMatrix<f64>> {
    let n = x.len();
    let jet = spray_jet(metric, engine, x, y)?;
    let r = DMatrix::from_fn(n, n, |i, k| {
        let mut acc = 2.0 * jet.dx[(i, k)] - jet.mixed[(i, k)];
        for j in 0..n {
            acc += 2.0 * jet.g[j] * jet.gjk.get(i, j, k) - jet.n[(i, j)] * jet.n[(j, k)];
        }
        acc / f2
    });
    Ok(r)
}

/// Ricci scalar: trace of the reduced curvature, 0-homogeneous in y.
pub fn ricci_scalar(metric: &MetricModel, pd: &PointDirection) -> Result<f64> {
    Ok(reduced_curvature(metric, pd)?.ric)
}

pub fn ricci_scalar_with(metric: &MetricModel, pd: &PointDirection, engine: &DerivativeEngine) -> Result<f64> {
    Ok(reduced_curvature_with(metric, pd, engine)?.ric)
}

/// `ric(x, y)` without domain checks; `y` must have `F > 0`.
pub(crate) fn ricci_at(metric: &MetricModel, x: &[f64], y: &[f64]) -> Result<f64> {
    let f2 = metric.f2(x, y);
    Ok(curvature_raw(metric, &DerivativeEngine::default(), x, y, f2)?.trace())
}

/// `N^i_j = γ^i_jk y^k − C^i_jk γ^k_rs y^r y^s`.
pub(crate) fn nonlinear_connection_from(gamma: &Tensor3, cartan_up: &Tensor3, y: &[f64]) -> DMatrix<f64> {
    let n = y.len();
    let two_g = gamma.contract_jk(y, y);
    DMatrix::from_fn(n, n, |i, j| {
        let mut acc = 0.0;
        for k in 0..n {
            acc += gamma.get(i, j, k) * y[k] - cartan_up.get(i, j, k) * two_g[k];
        }
        acc
    })
}

/// Chern (= Cartan horizontal) coefficients
/// `Γ^i_jk = γ^i_jk − g^{il}(C_ljs N^s_k + C_lks N^s_j − C_jks N^s_l)`.
pub fn chern_coefficients(metric: &MetricModel, pd: &PointDirection) -> Result<HorizontalCoefficients> {
    let ginv = inverse_fundamental(metric, pd)?;
    Ok(HorizontalCoefficients { gamma: chern_raw(metric, &pd.x, &pd.y, &ginv) })
}

pub(crate) fn chern_raw(metric: &MetricModel, x: &[f64], y: &[f64], ginv: &DMatrix<f64>) -> Tensor3 {
    let engine = DerivativeEngine::default();
    let gamma = christoffel_raw(metric, &engine, x, y, ginv);
    if metric.is_riemannian() {
        return gamma;
    }
    let n = x.len();
    let c = cartan_raw(metric, x, y);
    let c_up = Tensor3::from_fn(n, |i, j, k| (0..n).map(|l| ginv[(i, l)] * c.get(l, j, k)).sum());
    let nl = nonlinear_connection_from(&gamma, &c_up, y);
    // T_ljk = C_ljs N^s_k + C_lks N^s_j − C_jks N^s_l
    let t = Tensor3::from_fn(n, |l, j, k| {
        (0..n)
            .map(|s| c.get(l, j, s) * nl[(s, k)] + c.get(l, k, s) * nl[(s, j)] - c.get(j, k, s) * nl[(s, l)])
            .sum()
    });
    Tensor3::from_fn(n, |i, j, k| gamma.get(i, j, k) - (0..n).map(|l| ginv[(i, l)] * t.get(l, j, k)).sum::<f64>())
}

/// Chern coefficients together with `g^{ij}`; shared by the transport and Lie-derivative code.
pub(crate) fn chern_with_inverse(metric: &MetricModel, x: &[f64], y: &[f64]) -> Result<(Tensor3, DMatrix<f64>)> {
    let g = crate::tensors::hessian_half(metric, x, y);
    let ginv = g.cholesky().ok_or(crate::error::Error::Singular)?.inverse();
    Ok((chern_raw(metric, x, y, &ginv), ginv))
}
