//! Pointwise tensors of a Finsler structure: `F`, `g_ij`, `g^ij`, `C_ijk`,
//! and the structure-axiom sweep.
//!
//! y-derivatives always come from nested duals. x-derivatives are taken by
//! duals too unless the [`DerivativeEngine`] asks for central differences.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dual::{lift, mixed2, mixed3, seed2, seed3, Dual, Real};
use crate::error::{Error, Result};
use crate::linalg::{solve_generic, Tensor3};
use crate::metric::MetricModel;
use crate::sampling::SamplePlan;

/// Directions with `F` below this are treated as zero.
pub const MIN_F: f64 = 1e-12;

/// How x-derivatives are taken.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum XDerivative {
    /// Forward-mode duals through the closed-form family expressions.
    Exact,
    /// Central differences with `h = scale · max(1, |x_i|) · ε^{1/3}`.
    CentralDifference { scale: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeEngine {
    pub x_mode: XDerivative,
}

impl Default for DerivativeEngine {
    fn default() -> Self {
        Self { x_mode: XDerivative::Exact }
    }
}

impl DerivativeEngine {
    pub fn central_difference() -> Self {
        Self { x_mode: XDerivative::CentralDifference { scale: 1.0 } }
    }

    pub fn central_difference_scaled(scale: f64) -> Self {
        Self { x_mode: XDerivative::CentralDifference { scale } }
    }

    pub(crate) fn x_step(&self, xi: f64) -> f64 {
        let scale = match self.x_mode {
            XDerivative::Exact => 1.0,
            XDerivative::CentralDifference { scale } => scale,
        };
        scale * xi.abs().max(1.0) * f64::EPSILON.cbrt()
    }
}

/// A chart point with a nonzero tangent direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointDirection {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PointDirection {
    /// Validated against the metric's domain and `F(x, y) >= MIN_F`.
    pub fn new(metric: &MetricModel, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = metric.dimension();
        if y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: y.len() });
        }
        metric.domain.check(&x)?;
        let f = metric.f(&x, &y);
        if !(f >= MIN_F) {
            return Err(Error::ZeroDirection(f));
        }
        Ok(Self { x, y })
    }

    /// Same point, `y` rescaled onto the indicatrix.
    pub fn on_indicatrix(metric: &MetricModel, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let pd = Self::new(metric, x, y)?;
        let f = metric.f(&pd.x, &pd.y);
        Ok(Self { y: pd.y.iter().map(|v| v / f).collect(), x: pd.x })
    }

    pub fn dimension(&self) -> usize {
        self.x.len()
    }

    #[cfg(test)]
    pub(crate) fn scaled(&self, lambda: f64) -> Self {
        Self { x: self.x.clone(), y: self.y.iter().map(|v| v * lambda).collect() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalTensor {
    pub g: DMatrix<f64>,
    pub base: PointDirection,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CartanTensor {
    pub c: Tensor3,
    pub base: PointDirection,
}

// ---------------------------------------------------------------------------
// Generic jets of F². These are the only places the families are differentiated.
// ---------------------------------------------------------------------------

/// `[F²]_{y^i y^j}` at generic scalar type.
pub(crate) fn f2_yy<T: Real>(metric: &MetricModel, x: &[T], y: &[T]) -> Vec<Vec<T>> {
    let n = x.len();
    let xs: Vec<Dual<Dual<T>>> = x.iter().map(|&v| Dual::constant(Dual::constant(v))).collect();
    let mut h = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let ys: Vec<_> = (0..n)
                .map(|a| seed2(y[a], if a == i { 1.0 } else { 0.0 }, if a == j { 1.0 } else { 0.0 }))
                .collect();
            let v = mixed2(&metric.f2(&xs, &ys));
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    h
}

/// `[F²]_{y^l}` at generic scalar type.
fn f2_y<T: Real>(metric: &MetricModel, x: &[T], y: &[T]) -> Vec<T> {
    let n = x.len();
    let xs = lift(x);
    (0..n)
        .map(|l| {
            let ys: Vec<Dual<T>> = (0..n)
                .map(|a| if a == l { Dual::var(y[a]) } else { Dual::constant(y[a]) })
                .collect();
            metric.f2(&xs, &ys).du
        })
        .collect()
}

/// Returns `(Σ_k y^k [F²]_{x^k y^l}, [F²]_{x^l})` for every `l`.
fn f2_x_parts<T: Real>(metric: &MetricModel, engine: &DerivativeEngine, x: &[T], y: &[T]) -> (Vec<T>, Vec<T>) {
    let n = x.len();
    match engine.x_mode {
        XDerivative::Exact => {
            // x moves along y (ε₂), y^l moves (ε₁).
            let xs: Vec<Dual<Dual<T>>> = (0..n)
                .map(|a| Dual::constant(Dual::new(x[a], y[a])))
                .collect();
            let mixed = (0..n)
                .map(|l| {
                    let ys: Vec<_> = (0..n)
                        .map(|a| {
                            let seed = if a == l { T::one() } else { T::zero() };
                            Dual::new(Dual::constant(y[a]), Dual::constant(seed))
                        })
                        .collect();
                    mixed2(&metric.f2(&xs, &ys))
                })
                .collect();
            let ys = lift(y);
            let dx = (0..n)
                .map(|l| {
                    let xs: Vec<Dual<T>> = (0..n)
                        .map(|a| if a == l { Dual::var(x[a]) } else { Dual::constant(x[a]) })
                        .collect();
                    metric.f2(&xs, &ys).du
                })
                .collect();
            (mixed, dx)
        }
        XDerivative::CentralDifference { .. } => {
            let mut mixed = vec![T::zero(); n];
            let mut dx = vec![T::zero(); n];
            for k in 0..n {
                let h = engine.x_step(x[k].value());
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[k] += T::cst(h);
                xm[k] -= T::cst(h);
                let inv = 1.0 / (2.0 * h);
                dx[k] = (metric.f2(&xp, y) - metric.f2(&xm, y)).scale(inv);
                let gp = f2_y(metric, &xp, y);
                let gm = f2_y(metric, &xm, y);
                for l in 0..n {
                    mixed[l] += y[k] * (gp[l] - gm[l]).scale(inv);
                }
            }
            (mixed, dx)
        }
    }
}

/// Spray coefficients `G^i = ¼ g^{il}(Σ_k y^k [F²]_{x^k y^l} − [F²]_{x^l})`,
/// the y-contraction of `½ γ^i_jk y^j y^k`, at generic scalar type.
pub(crate) fn spray_generic<T: Real>(
    metric: &MetricModel,
    engine: &DerivativeEngine,
    x: &[T],
    y: &[T],
) -> Result<Vec<T>> {
    let g: Vec<Vec<T>> = f2_yy(metric, x, y)
        .into_iter()
        .map(|r| r.into_iter().map(|v| v.scale(0.5)).collect())
        .collect();
    let (mixed, dx) = f2_x_parts(metric, engine, x, y);
    let rhs: Vec<T> = mixed.iter().zip(&dx).map(|(&m, &d)| (m - d).scale(0.25)).collect();
    solve_generic(g, rhs)
}

/// `∂g_ij/∂x^k`, returned as `dg[k]` (symmetric matrices).
pub(crate) fn metric_x_derivatives(
    metric: &MetricModel,
    engine: &DerivativeEngine,
    x: &[f64],
    y: &[f64],
) -> Vec<DMatrix<f64>> {
    let n = x.len();
    match engine.x_mode {
        XDerivative::Exact => (0..n)
            .map(|k| {
                let xs: Vec<_> = (0..n).map(|a| seed3(x[a], 0.0, 0.0, if a == k { 1.0 } else { 0.0 })).collect();
                let mut m = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in i..n {
                        let ys: Vec<_> = (0..n)
                            .map(|a| seed3(y[a], (a == i) as u8 as f64, (a == j) as u8 as f64, 0.0))
                            .collect();
                        let v = 0.5 * mixed3(&metric.f2(&xs, &ys));
                        m[(i, j)] = v;
                        m[(j, i)] = v;
                    }
                }
                m
            })
            .collect(),
        XDerivative::CentralDifference { .. } => (0..n)
            .map(|k| {
                let h = engine.x_step(x[k]);
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[k] += h;
                xm[k] -= h;
                let gp = hessian_half(metric, &xp, y);
                let gm = hessian_half(metric, &xm, y);
                (gp - gm) / (2.0 * h)
            })
            .collect(),
    }
}

/// `½ [F²]_{y^i y^j}` without any definiteness check.
pub(crate) fn hessian_half(metric: &MetricModel, x: &[f64], y: &[f64]) -> DMatrix<f64> {
    let h = f2_yy(metric, x, y);
    let n = x.len();
    DMatrix::from_fn(n, n, |i, j| 0.5 * h[i][j])
}

/// `C_ijk = ¼ [F²]_{y^i y^j y^k}` without checks.
pub(crate) fn cartan_raw(metric: &MetricModel, x: &[f64], y: &[f64]) -> Tensor3 {
    let n = x.len();
    let mut c = Tensor3::zeros(n);
    if metric.is_riemannian() {
        return c;
    }
    let xs: Vec<_> = x.iter().map(|&v| seed3(v, 0.0, 0.0, 0.0)).collect();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let ys: Vec<_> = (0..n)
                    .map(|a| seed3(y[a], (a == i) as u8 as f64, (a == j) as u8 as f64, (a == k) as u8 as f64))
                    .collect();
                let v = 0.25 * mixed3(&metric.f2(&xs, &ys));
                for (p, q, r) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                    c.set(p, q, r, v);
                }
            }
        }
    }
    c
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// `F(x, y)`.
pub fn eval_f(metric: &MetricModel, pd: &PointDirection) -> Result<f64> {
    metric.domain.check(&pd.x)?;
    let f = metric.f(&pd.x, &pd.y);
    if !(f >= MIN_F) {
        return Err(Error::ZeroDirection(f));
    }
    Ok(f)
}

/// `g_ij = ½ [F²]_{y^i y^j}`, checked positive definite.
pub fn fundamental_tensor(metric: &MetricModel, pd: &PointDirection) -> Result<FundamentalTensor> {
    metric.domain.check(&pd.x)?;
    let g = hessian_half(metric, &pd.x, &pd.y);
    if g.clone().cholesky().is_none() {
        let min = g.clone().symmetric_eigen().eigenvalues.min();
        return Err(Error::NotPositiveDefinite(min));
    }
    eval_f(metric, pd)?;
    Ok(FundamentalTensor { g, base: pd.clone() })
}

/// `C_ijk = ½ ∂g_jk/∂y^i`.
pub fn cartan_tensor(metric: &MetricModel, pd: &PointDirection) -> Result<CartanTensor> {
    fundamental_tensor(metric, pd)?;
    Ok(CartanTensor { c: cartan_raw(metric, &pd.x, &pd.y), base: pd.clone() })
}

/// `g^{ij}`.
pub fn inverse_fundamental(metric: &MetricModel, pd: &PointDirection) -> Result<DMatrix<f64>> {
    let g = fundamental_tensor(metric, pd)?.g;
    let ch = g.cholesky().ok_or(Error::Singular)?;
    Ok(ch.inverse())
}

/// `F̃(x, y) = F(x, −y)`.
pub fn reverse_metric(metric: &MetricModel) -> MetricModel {
    metric.reverse()
}

/// Outcome of sweeping the structure axioms over a sample plan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub samples: usize,
    /// Max of `|F(x,λy) − λF(x,y)| / (1 + λF)` over λ ∈ {0.5, 2, 7}.
    pub max_homogeneity_violation: f64,
    pub min_hessian_eigenvalue: f64,
    /// Max of `|g_ij y^i y^j − F²| / max(1, F²)`.
    pub max_euler_violation: f64,
    pub positivity_ok: bool,
    pub homogeneity_ok: bool,
    pub convexity_ok: bool,
    pub euler_ok: bool,
    pub failures: Vec<String>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.positivity_ok && self.homogeneity_ok && self.convexity_ok && self.euler_ok
    }
}

pub const HOMOGENEITY_TOL: f64 = 1e-10;
pub const EULER_TOL: f64 = 1e-9;

/// Check positivity, positive homogeneity and strong convexity on every sample.
pub fn verify_structure(metric: &MetricModel, plan: &SamplePlan) -> StructureReport {
    let n = metric.dimension();
    let points = plan.points(metric);
    let dirs = plan.unit_directions(n);
    let mut rep = StructureReport {
        samples: 0,
        max_homogeneity_violation: 0.0,
        min_hessian_eigenvalue: f64::INFINITY,
        max_euler_violation: 0.0,
        positivity_ok: true,
        homogeneity_ok: true,
        convexity_ok: true,
        euler_ok: true,
        failures: Vec::new(),
    };
    const MAX_LISTED: usize = 8;
    let note = |rep: &mut StructureReport, msg: String| {
        if rep.failures.len() < MAX_LISTED {
            rep.failures.push(msg);
        }
    };
    for x in &points {
        for u in &dirs {
            rep.samples += 1;
            let f = metric.f(x, u);
            if !(f > MIN_F) {
                rep.positivity_ok = false;
                note(&mut rep, format!("F <= 0 at x={x:?}, y={u:?} (F={f:e})"));
            }
            for lambda in [0.5, 2.0, 7.0] {
                let ly: Vec<f64> = u.iter().map(|v| v * lambda).collect();
                let viol = (metric.f(x, &ly) - lambda * f).abs() / (1.0 + (lambda * f).abs());
                rep.max_homogeneity_violation = rep.max_homogeneity_violation.max(viol);
            }
            let g = hessian_half(metric, x, u);
            let eig = g.clone().symmetric_eigen().eigenvalues.min();
            rep.min_hessian_eigenvalue = rep.min_hessian_eigenvalue.min(eig);
            if !(eig > 0.0) {
                if rep.convexity_ok || rep.failures.len() < MAX_LISTED {
                    note(&mut rep, format!("Hessian not positive definite at x={x:?}, y={u:?} (min eig {eig:e})"));
                }
                rep.convexity_ok = false;
            }
            let yv = DVector::from_column_slice(u);
            let gyy = yv.dot(&(&g * &yv));
            let f2 = metric.f2(x, u);
            rep.max_euler_violation = rep.max_euler_violation.max((gyy - f2).abs() / f2.abs().max(1.0));
        }
    }
    if rep.max_homogeneity_violation > HOMOGENEITY_TOL {
        rep.homogeneity_ok = false;
        let msg = format!("homogeneity violation {:e}", rep.max_homogeneity_violation);
        note(&mut rep, msg);
    }
    if rep.max_euler_violation > EULER_TOL {
        rep.euler_ok = false;
        let msg = format!("g(y,y) != F^2 by {:e}", rep.max_euler_violation);
        note(&mut rep, msg);
    }
    if rep.samples == 0 {
        rep.positivity_ok = false;
        note(&mut rep, "no samples in plan".into());
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ChartDomain;
    use crate::metric::{OneForm, RiemannianKind};

    fn identity(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect()
    }

    pub(crate) fn randers(b: f64) -> MetricModel {
        MetricModel::randers(
            ChartDomain::all_space(2),
            RiemannianKind::Constant { matrix: identity(2) },
            OneForm::constant(vec![b, 0.0]),
        )
        .unwrap()
    }

    /// Central-difference Hessian of ½F² in y.
    fn fd_hessian(m: &MetricModel, x: &[f64], y: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let h = 1e-4;
        let half = |yy: &[f64]| 0.5 * m.f2(x, yy);
        DMatrix::from_fn(n, n, |i, j| {
            let mut s = 0.0;
            for (si, sj, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                let mut yy = y.to_vec();
                yy[i] += si * h;
                yy[j] += sj * h;
                s += w * half(&yy);
            }
            s / (4.0 * h * h)
        })
    }

    #[test]
    fn euclidean_norm_and_homogeneity() {
        let m = MetricModel::euclidean(2);
        let pd = PointDirection::new(&m, vec![0.0, 0.0], vec![3.0, 4.0]).unwrap();
        assert_eq!(eval_f(&m, &pd).unwrap(), 5.0);
        assert_eq!(eval_f(&m, &pd.scaled(2.0)).unwrap(), 10.0);
    }

    #[test]
    fn zero_direction_and_outside_errors() {
        let m = MetricModel::funk(2);
        assert!(matches!(PointDirection::new(&m, vec![0.0, 0.0], vec![0.0, 0.0]), Err(Error::ZeroDirection(_))));
        assert!(matches!(PointDirection::new(&m, vec![1.5, 0.0], vec![1.0, 0.0]), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn euclidean_and_riemannian_fundamental_tensor() {
        let m = MetricModel::euclidean(3);
        let pd = PointDirection::new(&m, vec![1.0, 2.0, 3.0], vec![0.3, -1.0, 2.0]).unwrap();
        let g = fundamental_tensor(&m, &pd).unwrap().g;
        assert!((g - DMatrix::identity(3, 3)).amax() < 1e-15);

        let m = MetricModel::constant_riemannian(vec![vec![4.0, 0.0], vec![0.0, 9.0]]).unwrap();
        for y in [[1.0, 0.0], [0.2, -3.0]] {
            let pd = PointDirection::new(&m, vec![0.5, 0.5], y.to_vec()).unwrap();
            let g = fundamental_tensor(&m, &pd).unwrap().g;
            assert!((g[(0, 0)] - 4.0).abs() < 1e-14 && (g[(1, 1)] - 9.0).abs() < 1e-14 && g[(0, 1)].abs() < 1e-14);
            let inv = inverse_fundamental(&m, &pd).unwrap();
            assert!((inv[(0, 0)] - 0.25).abs() < 1e-14 && (inv[(1, 1)] - 1.0 / 9.0).abs() < 1e-14);
        }
    }

    #[test]
    fn randers_hessian_matches_finite_differences() {
        let m = randers(0.5);
        let pd = PointDirection::new(&m, vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        let g = fundamental_tensor(&m, &pd).unwrap().g;
        let fd = fd_hessian(&m, &pd.x, &pd.y);
        assert!((&g - &fd).amax() <= 1e-6, "{g} vs {fd}");
        let inv = inverse_fundamental(&m, &pd).unwrap();
        assert!((&inv * &g - DMatrix::identity(2, 2)).amax() <= 1e-10);
    }

    #[test]
    fn cartan_vanishes_for_riemannian_and_matches_fd_for_randers() {
        let s = MetricModel::unit_sphere(2);
        let pd = PointDirection::new(&s, vec![0.3, 0.1], vec![1.0, 2.0]).unwrap();
        assert_eq!(cartan_tensor(&s, &pd).unwrap().c.max_abs(), 0.0);

        let m = randers(0.5);
        // C vanishes when y is parallel to b, so probe off that ray
        let along_b = PointDirection::new(&m, vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        assert!(cartan_tensor(&m, &along_b).unwrap().c.max_abs() < 1e-12);
        let pd = PointDirection::new(&m, vec![0.0, 0.0], vec![0.6, 0.8]).unwrap();
        let c = cartan_tensor(&m, &pd).unwrap().c;
        assert!(c.max_abs() > 1e-3);
        let h = 1e-5;
        for i in 0..2 {
            let mut yp = pd.y.clone();
            let mut ym = pd.y.clone();
            yp[i] += h;
            ym[i] -= h;
            let dg = (hessian_half(&m, &pd.x, &yp) - hessian_half(&m, &pd.x, &ym)) / (2.0 * h);
            for j in 0..2 {
                for k in 0..2 {
                    assert!((c.get(i, j, k) - 0.5 * dg[(j, k)]).abs() < 1e-6);
                }
            }
        }
        // Euler identity C_ijk y^i = 0
        for j in 0..2 {
            for k in 0..2 {
                let s: f64 = (0..2).map(|i| c.get(i, j, k) * pd.y[i]).sum();
                assert!(s.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn structure_sweeps() {
        let plan = SamplePlan::new(5, 2.0, 24);
        let rep = verify_structure(&MetricModel::euclidean(2), &plan);
        assert!(rep.passed());
        assert!(rep.max_homogeneity_violation < 1e-12 && rep.max_euler_violation < 1e-12);

        let rep = verify_structure(&randers(0.5), &plan);
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.min_hessian_eigenvalue > 0.0);

        let bad = MetricModel::randers_unchecked(
            ChartDomain::all_space(2),
            RiemannianKind::Constant { matrix: identity(2) },
            OneForm::constant(vec![1.2, 0.0]),
        );
        let rep = verify_structure(&bad, &plan);
        assert!(!rep.convexity_ok);
        assert!(!rep.passed());
        assert!(matches!(
            fundamental_tensor(&bad, &PointDirection { x: vec![0.0, 0.0], y: vec![-1.0, 0.0] }),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn reverse_funk_is_structurally_valid() {
        let rep = verify_structure(&reverse_metric(&MetricModel::funk(2)), &SamplePlan::new(5, 1.0, 16));
        assert!(rep.passed(), "{rep:?}");
    }
}
