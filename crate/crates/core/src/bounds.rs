//! Sampled estimates behind the diameter bound for shrinking solitons:
//! the local Ricci bound `H_p`, the field norm `‖V‖_x`, the Ricci-integral
//! inequality along minimal geodesics, and the bound on `d(p, q)` itself.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::ricci_at;
use crate::error::{Error, Result};
use crate::geodesics::{distance, integrate_geodesic, ricci_integral, DistanceOptions, StepControl};
use crate::metric::MetricModel;
use crate::sampling::{to_indicatrix, unit_directions, SamplePlan};
use crate::soliton::{classify, SolitonProblem, SolitonVerdict, VectorFieldModel};
use crate::tensors::hessian_half;

pub const SAFETY_FACTOR: f64 = 1.05;
pub const LEMMA_SLACK: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldNorm {
    pub value: f64,
    pub directions: usize,
    /// Pattern-search halvings spent refining the best grid direction.
    pub refinement_levels: usize,
}

fn g_norm(metric: &MetricModel, x: &[f64], y: &[f64], v: &[f64]) -> f64 {
    let g = hessian_half(metric, x, y);
    let n = v.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += g[(i, j)] * v[i] * v[j];
        }
    }
    acc.max(0.0).sqrt()
}

fn normalized(u: &[f64]) -> Vec<f64> {
    let len = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    u.iter().map(|a| a / len).collect()
}

/// `‖V‖_x = max_{y ∈ S_xM} √(g_(x,y)(V, V))`: a direction grid, then pattern search on the sphere.
pub fn field_norm(metric: &MetricModel, field: &VectorFieldModel, x: &[f64]) -> Result<FieldNorm> {
    let n = metric.dimension();
    field_norm_with(metric, field, x, if n == 2 { 64 } else { 256 })
}

pub fn field_norm_with(metric: &MetricModel, field: &VectorFieldModel, x: &[f64], count: usize) -> Result<FieldNorm> {
    metric.domain.check(x)?;
    let n = metric.dimension();
    field.validate(n)?;
    let v = field.value(x);
    if v.iter().all(|a| *a == 0.0) {
        return Ok(FieldNorm { value: 0.0, directions: count, refinement_levels: 0 });
    }
    if metric.is_riemannian() {
        // g does not depend on y
        return Ok(FieldNorm { value: g_norm(metric, x, &v, &v), directions: 1, refinement_levels: 0 });
    }
    let eval = |u: &[f64]| g_norm(metric, x, u, &v);
    let (mut best_u, mut best) = unit_directions(n, count)
        .into_iter()
        .map(|u| {
            let val = eval(&u);
            (u, val)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::EmptyPlan)?;
    let mut step = std::f64::consts::PI / count as f64;
    let mut levels = 0;
    while step > 1e-9 {
        let mut improved = false;
        for k in 0..n {
            for sign in [1.0, -1.0] {
                let mut u = best_u.clone();
                u[k] += sign * step;
                let u = normalized(&u);
                let val = eval(&u);
                if val > best {
                    best = val;
                    best_u = u;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            levels += 1;
        }
    }
    Ok(FieldNorm { value: best, directions: count, refinement_levels: levels })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BallOptions {
    /// Geodesic fan size; `None` picks 32 in the plane, 64 in space.
    pub fan_directions: Option<usize>,
    /// Points kept per fan ray, at `s = k / radial_samples`.
    pub radial_samples: usize,
    /// Indicatrix directions per sampled point; `None` picks 16 / 32.
    pub ricci_directions: Option<usize>,
    pub step: f64,
    pub safety_factor: f64,
}

impl Default for BallOptions {
    fn default() -> Self {
        Self { fan_directions: None, radial_samples: 8, ricci_directions: None, step: 1e-2, safety_factor: SAFETY_FACTOR }
    }
}

impl BallOptions {
    fn fan(&self, n: usize) -> usize {
        self.fan_directions.unwrap_or(if n == 2 { 32 } else { 64 })
    }

    fn ricci(&self, n: usize) -> usize {
        self.ricci_directions.unwrap_or(if n == 2 { 16 } else { 32 })
    }
}

/// Points of a unit forward (or backward) ball reached by a geodesic fan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallSample {
    pub center: Vec<f64>,
    pub radius: f64,
    pub backward: bool,
    pub points: Vec<Vec<f64>>,
    pub fan_directions: usize,
    pub radial_samples: usize,
}

/// Fan of unit-speed geodesics of `metric` (or its reverse) from `p`, sampled at `s < 1`.
///
/// A ray that reaches the chart edge early has left the manifold when the chart
/// covers it (Funk backward balls do this) and is kept as far as it goes; on a
/// truncated chart it means the ball cannot be sampled.
pub fn ball_sample(metric: &MetricModel, p: &[f64], backward: bool, opts: &BallOptions) -> Result<BallSample> {
    metric.domain.check(p)?;
    let m = if backward { metric.reverse() } else { metric.clone() };
    let n = m.dimension();
    let fan = opts.fan(n);
    let radial = opts.radial_samples.max(1);
    let rays = unit_directions(n, fan)
        .par_iter()
        .map(|u| {
            let path = integrate_geodesic(&m, p, u, 1.0, &StepControl::fixed(opts.step))?;
            if path.truncated && !m.chart_covers_manifold() {
                return Err(Error::BallExitsChart(p.to_vec()));
            }
            Ok((1..radial)
                .filter_map(|k| path.point_at(k as f64 / radial as f64).map(|(x, _)| x))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut points = vec![p.to_vec()];
    points.extend(rays.into_iter().flatten());
    Ok(BallSample { center: p.to_vec(), radius: 1.0, backward, points, fan_directions: fan, radial_samples: radial })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RicciSup {
    /// Largest sampled `|ric|`.
    pub raw: f64,
    /// `raw × safety_factor`.
    pub value: f64,
    pub safety_factor: f64,
    pub forward_points: usize,
    pub backward_points: usize,
    pub ricci_directions: usize,
}

/// `H_p`: sup of `|ric|` over the forward and backward unit balls at `p`, sampled.
pub fn local_ricci_sup(metric: &MetricModel, p: &[f64], opts: &BallOptions) -> Result<RicciSup> {
    let fwd = ball_sample(metric, p, false, opts)?;
    let bwd = ball_sample(metric, p, true, opts)?;
    let n = metric.dimension();
    let dirs = unit_directions(n, opts.ricci(n));
    let raw = fwd
        .points
        .par_iter()
        .chain(bwd.points.par_iter())
        .map(|x| {
            let mut worst: f64 = 0.0;
            for u in &dirs {
                if let Some(y) = to_indicatrix(metric, x, u) {
                    worst = worst.max(ricci_at(metric, x, &y)?.abs());
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(RicciSup {
        raw,
        value: raw * opts.safety_factor,
        safety_factor: opts.safety_factor,
        forward_points: fwd.points.len(),
        backward_points: bwd.points.len(),
        ricci_directions: dirs.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaStatus {
    Holds,
    Fails,
    /// `d(p, q) ≤ 1`
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub distance: f64,
    pub distance_converged: bool,
    pub integral: f64,
    pub integral_error: f64,
    /// Unscaled `H_p`, `H_q`.
    pub h_p: f64,
    pub h_q: f64,
    pub rhs: f64,
    pub status: LemmaStatus,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundOptions {
    pub ball: BallOptions,
    pub distance: DistanceOptions,
    /// Grid used for the soliton hypothesis gate.
    pub plan: SamplePlan,
    pub field_norm_directions: Option<usize>,
}

/// `∫₀^r ric(γ, γ′) ds ≤ 2(n − 1) + H_p + H_q` along the computed minimal geodesic, for `r > 1`.
pub fn lemma_check(metric: &MetricModel, p: &[f64], q: &[f64], opts: &BoundOptions) -> Result<LemmaReport> {
    let d = distance(metric, p, q, &opts.distance)?;
    let mut report = LemmaReport {
        p: p.to_vec(),
        q: q.to_vec(),
        distance: d.distance,
        distance_converged: d.converged,
        integral: 0.0,
        integral_error: 0.0,
        h_p: 0.0,
        h_q: 0.0,
        rhs: 0.0,
        status: LemmaStatus::NotApplicable,
    };
    if d.distance <= 1.0 {
        return Ok(report);
    }
    let integral = ricci_integral(metric, &d.path)?;
    let h_p = local_ricci_sup(metric, p, &opts.ball)?.raw;
    let h_q = local_ricci_sup(metric, q, &opts.ball)?.raw;
    let n = metric.dimension() as f64;
    report.integral = integral.value;
    report.integral_error = integral.error_estimate;
    report.h_p = h_p;
    report.h_q = h_q;
    report.rhs = 2.0 * (n - 1.0) + h_p + h_q;
    report.status = if integral.value <= report.rhs + LEMMA_SLACK { LemmaStatus::Holds } else { LemmaStatus::Fails };
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSampling {
    pub fan_directions: usize,
    pub radial_samples: usize,
    pub ricci_directions: usize,
    pub safety_factor: f64,
    pub field_norm_directions: usize,
    pub distance_tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub dimension: usize,
    pub lambda: f64,
    /// `H_p`, `H_q` including the safety factor.
    pub h_p: f64,
    pub h_q: f64,
    pub v_norm_p: f64,
    pub v_norm_q: f64,
    pub bound: f64,
    pub measured_distance: f64,
    pub distance_converged: bool,
    pub slack: f64,
    pub holds: bool,
    pub sampling: BoundSampling,
}

/// `max{1, (2(n − 1) + H_p + H_q + ‖V‖_p + ‖V‖_q) / λ}`.
pub fn diameter_bound(n: usize, lambda: f64, h_p: f64, h_q: f64, v_p: f64, v_q: f64) -> f64 {
    f64::max(1.0, (2.0 * (n as f64 - 1.0) + h_p + h_q + v_p + v_q) / lambda)
}

impl BoundReport {
    pub fn recompute_bound(&self) -> f64 {
        diameter_bound(self.dimension, self.lambda, self.h_p, self.h_q, self.v_norm_p, self.v_norm_q)
    }
}

fn gate(problem: &SolitonProblem, verdict: &SolitonVerdict) -> Result<()> {
    if !(problem.lambda > 0.0) {
        return Err(Error::HypothesisViolated(format!("lambda = {} is not positive", problem.lambda)));
    }
    if !verdict.satisfies_inequality() {
        return Err(Error::HypothesisViolated(format!(
            "soliton inequality fails: deficit {:.3e} exceeds tolerance {:.1e}",
            verdict.max_deficit, verdict.tolerance
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
struct PointData {
    h: f64,
    v_norm: f64,
}

fn point_data(problem: &SolitonProblem, x: &[f64], opts: &BoundOptions) -> Result<PointData> {
    let m = &problem.metric;
    let h = local_ricci_sup(m, x, &opts.ball)?.value;
    let count = opts.field_norm_directions.unwrap_or(if m.dimension() == 2 { 64 } else { 256 });
    let v_norm = field_norm_with(m, &problem.field, x, count)?.value;
    Ok(PointData { h, v_norm })
}

fn report_for(
    problem: &SolitonProblem,
    p: &[f64],
    q: &[f64],
    dp: &PointData,
    dq: &PointData,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    let m = &problem.metric;
    let n = m.dimension();
    let d = distance(m, p, q, &opts.distance)?;
    let bound = diameter_bound(n, problem.lambda, dp.h, dq.h, dp.v_norm, dq.v_norm);
    Ok(BoundReport {
        p: p.to_vec(),
        q: q.to_vec(),
        dimension: n,
        lambda: problem.lambda,
        h_p: dp.h,
        h_q: dq.h,
        v_norm_p: dp.v_norm,
        v_norm_q: dq.v_norm,
        bound,
        measured_distance: d.distance,
        distance_converged: d.converged,
        slack: bound - d.distance,
        holds: d.distance <= bound + opts.distance.tolerance,
        sampling: BoundSampling {
            fan_directions: opts.ball.fan(n),
            radial_samples: opts.ball.radial_samples,
            ricci_directions: opts.ball.ricci(n),
            safety_factor: opts.ball.safety_factor,
            field_norm_directions: opts.field_norm_directions.unwrap_or(if n == 2 { 64 } else { 256 }),
            distance_tolerance: opts.distance.tolerance,
        },
    })
}

/// Diameter bound for one pair, after checking `λ > 0` and the soliton inequality on `opts.plan`.
pub fn theorem_bound(problem: &SolitonProblem, p: &[f64], q: &[f64], opts: &BoundOptions) -> Result<BoundReport> {
    let verdict = classify(problem, &opts.plan)?;
    theorem_bound_with_verdict(problem, &verdict, p, q, opts)
}

pub fn theorem_bound_with_verdict(
    problem: &SolitonProblem,
    verdict: &SolitonVerdict,
    p: &[f64],
    q: &[f64],
    opts: &BoundOptions,
) -> Result<BoundReport> {
    gate(problem, verdict)?;
    let dp = point_data(problem, p, opts)?;
    let dq = point_data(problem, q, opts)?;
    report_for(problem, p, q, &dp, &dq, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairError {
    pub index: usize,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub verdict: SolitonVerdict,
    pub reports: Vec<BoundReport>,
    pub errors: Vec<PairError>,
    pub min_slack: Option<f64>,
    pub violations: usize,
}

impl SweepReport {
    pub fn all_hold(&self) -> bool {
        self.violations == 0 && self.errors.is_empty()
    }
}

type PointKey = Vec<u64>;

fn key(x: &[f64]) -> PointKey {
    x.iter().map(|v| v.to_bits()).collect()
}

/// Bound checks over many pairs; per-point estimates are shared and per-pair failures collected.
pub fn bound_sweep(problem: &SolitonProblem, pairs: &[(Vec<f64>, Vec<f64>)], opts: &BoundOptions) -> Result<SweepReport> {
    let verdict = classify(problem, &opts.plan)?;
    gate(problem, &verdict)?;

    let mut unique: Vec<&Vec<f64>> = Vec::new();
    let mut seen = HashMap::new();
    for (p, q) in pairs {
        for x in [p, q] {
            if seen.insert(key(x), ()).is_none() {
                unique.push(x);
            }
        }
    }
    let data: HashMap<PointKey, std::result::Result<PointData, String>> = unique
        .par_iter()
        .map(|x| (key(x), point_data(problem, x, opts).map_err(|e| e.to_string())))
        .collect();

    let outcomes: Vec<std::result::Result<BoundReport, String>> = pairs
        .par_iter()
        .map(|(p, q)| {
            let dp = data[&key(p)].clone()?;
            let dq = data[&key(q)].clone()?;
            report_for(problem, p, q, &dp, &dq, opts).map_err(|e| e.to_string())
        })
        .collect();

    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for (index, (out, (p, q))) in outcomes.into_iter().zip(pairs).enumerate() {
        match out {
            Ok(r) => reports.push(r),
            Err(message) => errors.push(PairError { index, p: p.clone(), q: q.clone(), message }),
        }
    }
    let min_slack = reports.iter().map(|r| r.slack).min_by(f64::total_cmp);
    let violations = reports.iter().filter(|r| !r.holds).count();
    Ok(SweepReport { verdict, reports, errors, min_slack, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ChartDomain;
    use crate::metric::{OneForm, RiemannianKind};

    fn randers(b: f64) -> MetricModel {
        MetricModel::randers(
            ChartDomain::all_space(2),
            RiemannianKind::Constant { matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]] },
            OneForm::constant(vec![b, 0.0]),
        )
        .unwrap()
    }

    #[test]
    fn field_norm_examples() {
        let e = MetricModel::euclidean(2);
        let zero = field_norm(&e, &VectorFieldModel::Zero, &[1.0, 2.0]).unwrap();
        assert_eq!(zero.value, 0.0);
        let radial = field_norm(&e, &VectorFieldModel::Radial { kappa: 1.0 }, &[3.0, 0.0]).unwrap();
        assert!((radial.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn randers_field_norm_matches_dense_grid() {
        let m = randers(0.3);
        let f = VectorFieldModel::Linear { a: vec![vec![0.0, 0.0], vec![0.0, 0.0]], c: vec![1.0, 0.0] };
        let x = [0.7, -0.2];
        let got = field_norm(&m, &f, &x).unwrap().value;
        let brute = unit_directions(2, 10_000).iter().map(|u| g_norm(&m, &x, u, &[1.0, 0.0])).fold(0.0, f64::max);
        assert!((got - brute).abs() < 1e-4, "{got} vs {brute}");
        assert!(got >= brute - 1e-12);
        let scaled = VectorFieldModel::Linear { a: vec![vec![0.0, 0.0], vec![0.0, 0.0]], c: vec![2.5, 0.0] };
        let twice = field_norm(&m, &scaled, &x).unwrap().value;
        assert!((twice - 2.5 * got).abs() < 1e-9);
    }

    #[test]
    fn ricci_sup_examples() {
        let opts = BallOptions::default();
        assert_eq!(local_ricci_sup(&MetricModel::euclidean(2), &[0.5, 0.5], &opts).unwrap().value, 0.0);
        let s = local_ricci_sup(&MetricModel::unit_sphere(2), &[0.2, -0.1], &opts).unwrap();
        assert!((s.value - 1.05).abs() < 1e-4, "{}", s.value);
        let f = local_ricci_sup(&MetricModel::funk(2), &[0.0, 0.0], &opts).unwrap();
        assert!((f.value - 0.2625).abs() < 1e-4, "{}", f.value);
        assert!(f.backward_points > 1 && f.forward_points > 1);
    }

    #[test]
    fn ball_points_lie_in_the_ball() {
        let m = MetricModel::funk(2);
        let p = [0.1, 0.2];
        let opts = BallOptions { fan_directions: Some(8), radial_samples: 4, ..Default::default() };
        let fwd = ball_sample(&m, &p, false, &opts).unwrap();
        let bwd = ball_sample(&m, &p, true, &opts).unwrap();
        let dopts = DistanceOptions::default();
        for x in fwd.points.iter().skip(1).step_by(5) {
            assert!(distance(&m, &p, x, &dopts).unwrap().distance < 1.0 + 1e-4);
        }
        for x in bwd.points.iter().skip(1).step_by(5) {
            assert!(distance(&m, x, &p, &dopts).unwrap().distance < 1.0 + 1e-4);
        }
    }

    #[test]
    fn ball_leaving_chart_is_an_error() {
        let m = MetricModel::unit_sphere(2);
        // this unit ball contains the projection pole
        let r = local_ricci_sup(&m, &[19.5, 0.0], &BallOptions::default());
        assert!(matches!(r, Err(Error::BallExitsChart(_))));
    }

    #[test]
    fn refining_the_fan_keeps_the_estimate() {
        let m = MetricModel::randers(
            ChartDomain::all_space(2),
            RiemannianKind::Constant { matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]] },
            OneForm { constant: vec![0.1, 0.0], linear: Some(vec![vec![0.02, 0.03], vec![-0.03, 0.01]]) },
        )
        .unwrap();
        let coarse = BallOptions { fan_directions: Some(12), radial_samples: 4, ..Default::default() };
        let fine = BallOptions { fan_directions: Some(24), radial_samples: 8, ..Default::default() };
        let a = local_ricci_sup(&m, &[0.3, 0.1], &coarse).unwrap();
        let b = local_ricci_sup(&m, &[0.3, 0.1], &fine).unwrap();
        assert!(b.value >= a.raw);
    }

    #[test]
    fn lemma_examples() {
        let opts = BoundOptions::default();
        let e = lemma_check(&MetricModel::euclidean(2), &[0.0, 0.0], &[3.0, 0.0], &opts).unwrap();
        assert_eq!(e.status, LemmaStatus::Holds);
        assert_eq!(e.integral, 0.0);
        let s = MetricModel::unit_sphere(2);
        let q = lemma_check(&s, &[0.0, 0.0], &[1.0, 0.0], &opts).unwrap();
        assert_eq!(q.status, LemmaStatus::Holds);
        assert!((q.integral - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
        assert!((q.rhs - 4.0).abs() < 1e-3);
        let short = lemma_check(&s, &[0.0, 0.0], &[0.2, 0.0], &opts).unwrap();
        assert_eq!(short.status, LemmaStatus::NotApplicable);
    }

    #[test]
    fn gaussian_bound() {
        let prob = SolitonProblem::new(MetricModel::euclidean(2), VectorFieldModel::Radial { kappa: 1.0 }, 1.0).unwrap();
        let r = theorem_bound(&prob, &[3.0, 0.0], &[0.0, 4.0], &BoundOptions::default()).unwrap();
        assert!((r.v_norm_p - 3.0).abs() < 1e-12 && (r.v_norm_q - 4.0).abs() < 1e-12);
        assert!((r.bound - 9.0).abs() < 1e-12);
        assert!((r.measured_distance - 5.0).abs() < 1e-6);
        assert!(r.holds);
        assert_eq!(r.recompute_bound(), r.bound);
        let same = theorem_bound(&prob, &[1.0, 1.0], &[1.0, 1.0], &BoundOptions::default()).unwrap();
        assert!(same.holds && same.measured_distance == 0.0);
    }

    #[test]
    fn hypothesis_gate() {
        let over = SolitonProblem::new(MetricModel::unit_sphere(2), VectorFieldModel::Zero, 10.0).unwrap();
        let opts = BoundOptions::default();
        assert!(matches!(theorem_bound(&over, &[0.0, 0.0], &[0.5, 0.0], &opts), Err(Error::HypothesisViolated(_))));
        let steady = SolitonProblem::new(MetricModel::euclidean(2), VectorFieldModel::Zero, 0.0).unwrap();
        assert!(matches!(bound_sweep(&steady, &[], &opts), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn sweep_collects_errors_and_handles_empty_lists() {
        let gauss = SolitonProblem::new(MetricModel::euclidean(2), VectorFieldModel::Radial { kappa: 2.0 }, 2.0).unwrap();
        let opts = BoundOptions::default();
        let empty = bound_sweep(&gauss, &[], &opts).unwrap();
        assert!(empty.reports.is_empty() && empty.all_hold() && empty.min_slack.is_none());
        let pairs = vec![(vec![1.0, 0.0], vec![-2.0, 1.0]), (vec![1.0, 0.0], vec![0.0, 3.0])];
        let sweep = bound_sweep(&gauss, &pairs, &opts).unwrap();
        assert_eq!(sweep.reports.len(), 2);
        assert!(sweep.all_hold());

        let sphere = SolitonProblem::new(MetricModel::unit_sphere(2), VectorFieldModel::Zero, 1.0).unwrap();
        // the second pair sits outside the chart
        let pairs = vec![(vec![0.1, 0.0], vec![0.0, 0.5]), (vec![0.1, 0.0], vec![25.0, 0.0])];
        let sweep = bound_sweep(&sphere, &pairs, &opts).unwrap();
        assert_eq!(sweep.reports.len(), 1);
        assert_eq!(sweep.errors.len(), 1);
        assert_eq!(sweep.errors[0].index, 1);
    }
}
