//! Lie derivatives along complete lifts and Ricci-soliton checks
//! `2F² ric + 𝓛_V̂ F² = 2λF²` (equality) or `≥` (inequality form).

mod field;

pub use field::{complete_lift, CompleteLift, VectorFieldModel};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{chern_with_inverse, connection_by_duals, ricci_at};
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::geodesics::GeodesicPath;
use crate::metric::MetricModel;
use crate::sampling::{to_indicatrix, SamplePlan};
use crate::tensors::{
    cartan_raw, hessian_half, metric_x_derivatives, DerivativeEngine, PointDirection, XDerivative,
};

/// `𝓛_V̂ F² = v^i ∂F²/∂x^i + y^j (∂v^i/∂x^j) ∂F²/∂y^i`.
pub fn lie_derivative_f2(metric: &MetricModel, field: &VectorFieldModel, pd: &PointDirection) -> Result<f64> {
    lie_derivative_f2_with(metric, field, pd, &DerivativeEngine::default())
}

pub fn lie_derivative_f2_with(
    metric: &MetricModel,
    field: &VectorFieldModel,
    pd: &PointDirection,
    engine: &DerivativeEngine,
) -> Result<f64> {
    field.validate(pd.dimension())?;
    Ok(lie_f2_at(metric, field, engine, &pd.x, &pd.y))
}

pub(crate) fn lie_f2_at(
    metric: &MetricModel,
    field: &VectorFieldModel,
    engine: &DerivativeEngine,
    x: &[f64],
    y: &[f64],
) -> f64 {
    let lift = complete_lift(field, x, y);
    match engine.x_mode {
        // one directional derivative along (v, Jy)
        XDerivative::Exact => {
            let xs: Vec<_> = x.iter().zip(&lift.horizontal).map(|(&a, &d)| Dual::new(a, d)).collect();
            let ys: Vec<_> = y.iter().zip(&lift.vertical).map(|(&a, &d)| Dual::new(a, d)).collect();
            metric.f2(&xs, &ys).du
        }
        XDerivative::CentralDifference { .. } => {
            let xs: Vec<_> = x.iter().map(|&a| Dual::constant(a)).collect();
            let ys: Vec<_> = y.iter().zip(&lift.vertical).map(|(&a, &d)| Dual::new(a, d)).collect();
            let vertical = metric.f2(&xs, &ys).du;
            let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let h = engine.x_step(scale);
            let vnorm = lift.horizontal.iter().map(|v| v * v).sum::<f64>().sqrt();
            if vnorm == 0.0 {
                return vertical;
            }
            let t = h / vnorm;
            let xp: Vec<f64> = x.iter().zip(&lift.horizontal).map(|(a, d)| a + t * d).collect();
            let xm: Vec<f64> = x.iter().zip(&lift.horizontal).map(|(a, d)| a - t * d).collect();
            vertical + (metric.f2(&xp, y) - metric.f2(&xm, y)) / (2.0 * t)
        }
    }
}

/// `𝓛_V̂ g_jk = ∇_j V_k + ∇_k V_j + 2 (∇_0 V^l) C_ljk` with the Cartan horizontal derivative,
/// `V_k = g_kl v^l` lowered at the reference direction.
pub fn lie_derivative_metric(
    metric: &MetricModel,
    field: &VectorFieldModel,
    pd: &PointDirection,
) -> Result<DMatrix<f64>> {
    field.validate(pd.dimension())?;
    let (x, y) = (&pd.x[..], &pd.y[..]);
    let n = x.len();
    let engine = DerivativeEngine::default();
    let g = hessian_half(metric, x, y);
    let (chern, _) = chern_with_inverse(metric, x, y)?;
    let c = cartan_raw(metric, x, y);
    let nl = connection_by_duals(metric, &engine, x, y)?;
    let dg = metric_x_derivatives(metric, &engine, x, y);
    let v = field.value(x);
    let jac = field.jacobian(x);
    let lowered: Vec<f64> = (0..n).map(|k| (0..n).map(|l| g[(k, l)] * v[l]).sum()).collect();

    // δ_j V_k = (∂_j g_kl − 2 N^s_j C_skl) v^l + g_kl ∂_j v^l
    let nabla = DMatrix::from_fn(n, n, |j, k| {
        let mut acc = 0.0;
        for l in 0..n {
            let mut dgl = dg[j][(k, l)];
            for s in 0..n {
                dgl -= 2.0 * nl[(s, j)] * c.get(s, k, l);
            }
            acc += dgl * v[l] + g[(k, l)] * jac[(l, j)];
        }
        for s in 0..n {
            acc -= chern.get(s, j, k) * lowered[s];
        }
        acc
    });
    // ∇_0 V^l = y^p (∂_p v^l + Γ^l_pm v^m)
    let nabla0: Vec<f64> = (0..n)
        .map(|l| {
            (0..n)
                .map(|p| y[p] * (jac[(l, p)] + (0..n).map(|m| chern.get(l, p, m) * v[m]).sum::<f64>()))
                .sum()
        })
        .collect();
    Ok(DMatrix::from_fn(n, n, |j, k| {
        let cartan: f64 = (0..n).map(|l| nabla0[l] * c.get(l, j, k)).sum();
        nabla[(j, k)] + nabla[(k, j)] + 2.0 * cartan
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonProblem {
    pub metric: MetricModel,
    pub field: VectorFieldModel,
    pub lambda: f64,
}

impl SolitonProblem {
    pub fn new(metric: MetricModel, field: VectorFieldModel, lambda: f64) -> Result<Self> {
        metric.validate()?;
        field.validate(metric.dimension())?;
        Ok(Self { metric, field, lambda })
    }

    pub fn regime(&self) -> Regime {
        if self.lambda > 0.0 {
            Regime::Shrinking
        } else if self.lambda < 0.0 {
            Regime::Expanding
        } else {
            Regime::Steady
        }
    }
}

/// `2F² ric + 𝓛_V̂ F² − 2λF²`.
pub fn soliton_residual(problem: &SolitonProblem, pd: &PointDirection) -> Result<f64> {
    problem.field.validate(pd.dimension())?;
    crate::tensors::inverse_fundamental(&problem.metric, pd)?;
    residual_at(problem, &pd.x, &pd.y)
}

pub(crate) fn residual_at(problem: &SolitonProblem, x: &[f64], y: &[f64]) -> Result<f64> {
    let m = &problem.metric;
    let f2 = m.f2(x, y);
    let ric = ricci_at(m, x, y)?;
    let lie = lie_f2_at(m, &problem.field, &DerivativeEngine::default(), x, y);
    Ok(2.0 * f2 * ric + lie - 2.0 * problem.lambda * f2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Shrinking,
    Steady,
    Expanding,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolitonClass {
    Equality,
    InequalityOnly,
    NotSatisfied,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolitonVerdict {
    pub lambda: f64,
    pub regime: Regime,
    pub class: SolitonClass,
    /// `shrinking`, `steady-inequality`, `not-satisfied`, ...
    pub label: String,
    pub max_abs_residual: f64,
    /// Largest positive part of `2λF² − 2F² ric − 𝓛F²`.
    pub max_deficit: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub worst_residual: Option<Witness>,
    pub worst_deficit: Option<Witness>,
}

impl SolitonVerdict {
    /// Whether the inequality hypothesis holds (equality or inequality-only).
    pub fn satisfies_inequality(&self) -> bool {
        self.class != SolitonClass::NotSatisfied
    }
}

pub fn default_tolerance(lambda: f64) -> f64 {
    1e-5 * lambda.abs().max(1.0)
}

pub fn classify(problem: &SolitonProblem, plan: &SamplePlan) -> Result<SolitonVerdict> {
    classify_with_tolerance(problem, plan, default_tolerance(problem.lambda))
}

/// Residuals on the plan's point grid crossed with indicatrix directions.
pub fn residual_samples(problem: &SolitonProblem, plan: &SamplePlan) -> Result<Vec<Witness>> {
    let m = &problem.metric;
    let n = m.dimension();
    problem.field.validate(n)?;
    let dirs = plan.unit_directions(n);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = plan
        .points(m)
        .into_iter()
        .flat_map(|x| dirs.iter().filter_map(move |u| to_indicatrix(m, &x, u).map(|y| (x.clone(), y))).collect::<Vec<_>>())
        .collect();
    if pairs.is_empty() {
        return Err(Error::EmptyPlan);
    }
    pairs
        .into_par_iter()
        .map(|(x, y)| {
            let residual = residual_at(problem, &x, &y)?;
            Ok(Witness { x, y, residual })
        })
        .collect()
}

pub fn classify_with_tolerance(problem: &SolitonProblem, plan: &SamplePlan, tol: f64) -> Result<SolitonVerdict> {
    let samples = residual_samples(problem, plan)?;
    Ok(verdict_from(problem, &samples, tol))
}

pub fn verdict_from(problem: &SolitonProblem, samples: &[Witness], tol: f64) -> SolitonVerdict {
    let worst_abs = samples.iter().max_by(|a, b| a.residual.abs().total_cmp(&b.residual.abs()));
    let most_negative = samples.iter().min_by(|a, b| a.residual.total_cmp(&b.residual));
    let max_abs_residual = worst_abs.map_or(0.0, |w| w.residual.abs());
    let max_deficit = most_negative.map_or(0.0, |w| (-w.residual).max(0.0));

    let class = if max_abs_residual <= tol {
        SolitonClass::Equality
    } else if max_deficit <= tol {
        SolitonClass::InequalityOnly
    } else {
        SolitonClass::NotSatisfied
    };
    let regime = problem.regime();
    let base = match regime {
        Regime::Shrinking => "shrinking",
        Regime::Steady => "steady",
        Regime::Expanding => "expanding",
    };
    let label = match class {
        SolitonClass::Equality => base.to_string(),
        SolitonClass::InequalityOnly => format!("{base}-inequality"),
        SolitonClass::NotSatisfied => "not-satisfied".to_string(),
    };
    SolitonVerdict {
        lambda: problem.lambda,
        regime,
        class,
        label,
        max_abs_residual,
        max_deficit,
        tolerance: tol,
        samples: samples.len(),
        worst_residual: worst_abs.cloned(),
        worst_deficit: most_negative.filter(|w| w.residual < 0.0).cloned(),
    }
}

/// Largest gap between `𝓛_V̂F²(γ, γ′)` and `2 d/ds g_(γ,γ′)(γ′, V)` over interior samples,
/// the derivative taken by centered differences.
pub fn geodesic_identity_defect(metric: &MetricModel, field: &VectorFieldModel, path: &GeodesicPath) -> Result<f64> {
    field.validate(metric.dimension())?;
    let pairing: Vec<f64> = path
        .samples
        .iter()
        .map(|p| {
            let g = hessian_half(metric, &p.x, &p.v);
            let v = field.value(&p.x);
            (0..v.len()).map(|i| (0..v.len()).map(|j| g[(i, j)] * p.v[i] * v[j]).sum::<f64>()).sum()
        })
        .collect();
    let engine = DerivativeEngine::default();
    let mut worst: f64 = 0.0;
    for k in 1..path.samples.len().saturating_sub(1) {
        let (a, b, c) = (&path.samples[k - 1], &path.samples[k], &path.samples[k + 1]);
        let rhs = 2.0 * (pairing[k + 1] - pairing[k - 1]) / (c.s - a.s);
        worst = worst.max((lie_f2_at(metric, field, &engine, &b.x, &b.v) - rhs).abs());
    }
    Ok(worst)
}
