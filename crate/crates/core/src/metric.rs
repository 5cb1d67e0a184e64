//! Finsler structures on a single chart, declared from built-in families.
//!
//! Every family writes `F²(x, y)` once, generically over [`Real`], so the
//! derivative engine can evaluate it at any dual-number nesting.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::domain::{norm, ChartDomain};
use crate::dual::Real;
use crate::error::{Error, Result};

/// Riemannian background metrics `a_ij(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RiemannianKind {
    /// Constant symmetric positive definite matrix.
    Constant { matrix: Vec<Vec<f64>> },
    /// Round sphere of the given radius in the stereographic chart:
    /// `a_ij = 4 R² δ_ij / (1 + |x|²)²`.
    Sphere { radius: f64 },
    /// Poincaré ball model of hyperbolic space: `a_ij = 4 δ_ij / (1 − |x|²)²`.
    PoincareBall,
}

impl RiemannianKind {
    /// `a_ij(x) y^i y^j`.
    pub fn quadratic<T: Real>(&self, x: &[T], y: &[T]) -> T {
        match self {
            Self::Constant { matrix } => {
                let mut acc = T::zero();
                for (i, row) in matrix.iter().enumerate() {
                    for (j, &a) in row.iter().enumerate() {
                        if a != 0.0 {
                            acc += (y[i] * y[j]).scale(a);
                        }
                    }
                }
                acc
            }
            Self::Sphere { radius } => {
                let denom = T::one() + dot(x, x);
                (dot(y, y).scale(4.0 * radius * radius)) / (denom * denom)
            }
            Self::PoincareBall => {
                let denom = T::one() - dot(x, x);
                dot(y, y).scale(4.0) / (denom * denom)
            }
        }
    }

    /// `a_ij(x)` as a matrix.
    pub fn matrix_at(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        match self {
            Self::Constant { matrix } => DMatrix::from_fn(n, n, |i, j| matrix[i][j]),
            Self::Sphere { radius } => {
                let d = 1.0 + dot(x, x);
                DMatrix::identity(n, n) * (4.0 * radius * radius / (d * d))
            }
            Self::PoincareBall => {
                let d = 1.0 - dot(x, x);
                DMatrix::identity(n, n) * (4.0 / (d * d))
            }
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Self::Constant { matrix } => {
                if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidMetric(format!("constant metric must be {n}x{n}")));
                }
                let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
                if (&m - m.transpose()).amax() > 1e-12 {
                    return Err(Error::InvalidMetric("constant metric is not symmetric".into()));
                }
                if m.cholesky().is_none() {
                    return Err(Error::InvalidMetric("constant metric is not positive definite".into()));
                }
                Ok(())
            }
            Self::Sphere { radius } if *radius > 0.0 => Ok(()),
            Self::Sphere { .. } => Err(Error::InvalidMetric("sphere radius must be positive".into())),
            Self::PoincareBall => Ok(()),
        }
    }
}

/// Affine one-form `b(x) = c + B x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneForm {
    pub constant: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<Vec<Vec<f64>>>,
}

impl OneForm {
    pub fn constant(c: Vec<f64>) -> Self {
        Self { constant: c, linear: None }
    }

    pub fn at<T: Real>(&self, x: &[T]) -> Vec<T> {
        let mut b: Vec<T> = self.constant.iter().map(|&c| T::cst(c)).collect();
        if let Some(lin) = &self.linear {
            for (i, row) in lin.iter().enumerate() {
                for (j, &l) in row.iter().enumerate() {
                    if l != 0.0 {
                        b[i] += x[j].scale(l);
                    }
                }
            }
        }
        b
    }

    fn negated(&self) -> Self {
        Self {
            constant: self.constant.iter().map(|c| -c).collect(),
            linear: self.linear.as_ref().map(|m| m.iter().map(|r| r.iter().map(|v| -v).collect()).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Euclidean,
    Riemannian { metric: RiemannianKind },
    /// `F = √(a_ij y^i y^j) + b_i y^i`.
    Randers { a: RiemannianKind, b: OneForm },
    /// Funk metric on the unit ball.
    Funk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricModel {
    pub domain: ChartDomain,
    pub family: Family,
    /// Evaluates `F(x, −y)` when set.
    #[serde(default)]
    pub reversed: bool,
}

/// Rejection threshold for `‖b‖_a` on Randers declarations.
pub const RANDERS_NORM_LIMIT: f64 = 1.0 - 1e-6;
/// Default chart truncation for the stereographic sphere.
pub const SPHERE_CHART_RADIUS: f64 = 20.0;

impl MetricModel {
    pub fn euclidean(n: usize) -> Self {
        Self { domain: ChartDomain::all_space(n), family: Family::Euclidean, reversed: false }
    }

    pub fn riemannian(domain: ChartDomain, metric: RiemannianKind) -> Result<Self> {
        let m = Self { domain, family: Family::Riemannian { metric }, reversed: false };
        m.validate()?;
        Ok(m)
    }

    pub fn constant_riemannian(matrix: Vec<Vec<f64>>) -> Result<Self> {
        Self::riemannian(ChartDomain::all_space(matrix.len()), RiemannianKind::Constant { matrix })
    }

    /// Unit sphere in the stereographic chart, truncated to `|x| < 20`.
    pub fn unit_sphere(n: usize) -> Self {
        Self::riemannian(
            ChartDomain::ball(n, SPHERE_CHART_RADIUS),
            RiemannianKind::Sphere { radius: 1.0 },
        )
        .expect("unit sphere declaration is valid")
    }

    pub fn poincare_ball(n: usize) -> Self {
        Self::riemannian(ChartDomain::ball(n, 1.0).with_margin(1e-3), RiemannianKind::PoincareBall)
            .expect("poincare ball declaration is valid")
    }

    pub fn funk(n: usize) -> Self {
        Self { domain: ChartDomain::ball(n, 1.0).with_margin(1e-3), family: Family::Funk, reversed: false }
    }

    /// Randers metric, rejected when the sampled `‖b‖_a` reaches [`RANDERS_NORM_LIMIT`].
    pub fn randers(domain: ChartDomain, a: RiemannianKind, b: OneForm) -> Result<Self> {
        let m = Self::randers_unchecked(domain, a, b);
        m.validate()?;
        Ok(m)
    }

    /// Randers declaration without the `‖b‖_a < 1` gate; for diagnosing bad inputs.
    pub fn randers_unchecked(domain: ChartDomain, a: RiemannianKind, b: OneForm) -> Self {
        Self { domain, family: Family::Randers { a, b }, reversed: false }
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension
    }

    /// False when the chart is a truncation of a larger manifold (the stereographic sphere);
    /// then reaching the chart edge says nothing about the manifold.
    pub fn chart_covers_manifold(&self) -> bool {
        let sphere = |k: &RiemannianKind| matches!(k, RiemannianKind::Sphere { .. });
        match &self.family {
            Family::Riemannian { metric } => !sphere(metric),
            Family::Randers { a, .. } => !sphere(a),
            Family::Euclidean | Family::Funk => true,
        }
    }

    pub fn is_riemannian(&self) -> bool {
        matches!(self.family, Family::Euclidean | Family::Riemannian { .. })
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        let n = self.dimension();
        match &self.family {
            Family::Euclidean | Family::Funk => Ok(()),
            Family::Riemannian { metric } => metric.validate(n),
            Family::Randers { a, b } => {
                a.validate(n)?;
                if b.constant.len() != n || b.linear.as_ref().is_some_and(|m| m.len() != n || m.iter().any(|r| r.len() != n)) {
                    return Err(Error::InvalidMetric(format!("one-form must have {n} components")));
                }
                let worst = self.max_randers_norm(9, 10.0);
                if worst >= RANDERS_NORM_LIMIT {
                    return Err(Error::InvalidMetric(format!(
                        "Randers one-form has a-norm {worst:.6} >= {RANDERS_NORM_LIMIT}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Largest `‖b‖_a` on a grid with `per_axis` points per axis (0 for non-Randers).
    pub fn max_randers_norm(&self, per_axis: usize, extent: f64) -> f64 {
        let Family::Randers { a, b } = &self.family else {
            return 0.0;
        };
        let (lo, hi) = self.domain.sampling_box(extent);
        crate::sampling::grid_points(&lo, &hi, per_axis)
            .into_iter()
            .filter(|x| self.domain.contains(x))
            .map(|x| randers_norm(a, b, &x))
            .fold(0.0, f64::max)
    }

    /// Reverse structure `F̃(x, y) = F(x, −y)`.
    pub fn reverse(&self) -> Self {
        match &self.family {
            Family::Euclidean | Family::Riemannian { .. } => self.clone(),
            Family::Randers { a, b } => Self {
                domain: self.domain.clone(),
                family: Family::Randers { a: a.clone(), b: b.negated() },
                reversed: false,
            },
            Family::Funk => Self { reversed: !self.reversed, ..self.clone() },
        }
    }

    /// `F²(x, y)`.
    pub fn f2<T: Real>(&self, x: &[T], y: &[T]) -> T {
        if self.reversed {
            let ny: Vec<T> = y.iter().map(|&v| -v).collect();
            self.family_f2(x, &ny)
        } else {
            self.family_f2(x, y)
        }
    }

    /// `F(x, y)`, taken directly rather than through `F²` so sign problems of a bad declaration stay visible.
    pub fn f<T: Real>(&self, x: &[T], y: &[T]) -> T {
        if self.reversed {
            let ny: Vec<T> = y.iter().map(|&v| -v).collect();
            self.family_f(x, &ny)
        } else {
            self.family_f(x, y)
        }
    }

    fn family_f2<T: Real>(&self, x: &[T], y: &[T]) -> T {
        match &self.family {
            Family::Euclidean => dot(y, y),
            Family::Riemannian { metric } => metric.quadratic(x, y),
            Family::Randers { .. } | Family::Funk => {
                let f = self.family_f(x, y);
                f * f
            }
        }
    }

    fn family_f<T: Real>(&self, x: &[T], y: &[T]) -> T {
        match &self.family {
            Family::Euclidean => dot(y, y).sqrt(),
            Family::Riemannian { metric } => metric.quadratic(x, y).sqrt(),
            Family::Randers { a, b } => {
                let alpha = a.quadratic(x, y).sqrt();
                alpha + dot(&b.at(x), y)
            }
            Family::Funk => {
                let xx = dot(x, x);
                let xy = dot(x, y);
                let yy = dot(y, y);
                let d = T::one() - xx;
                ((d * yy + xy * xy).sqrt() + xy) / d
            }
        }
    }
}

/// `√(a^{ij} b_i b_j)` at `x`.
pub fn randers_norm(a: &RiemannianKind, b: &OneForm, x: &[f64]) -> f64 {
    let am = a.matrix_at(x);
    let bx = nalgebra::DVector::from_vec(b.at(x));
    match am.cholesky() {
        Some(ch) => bx.dot(&ch.solve(&bx)).max(0.0).sqrt(),
        None => f64::INFINITY,
    }
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (&u, &v) in a.iter().zip(b) {
        acc += u * v;
    }
    acc
}

/// Euclidean norm helper re-exported for callers that work in chart coordinates.
pub fn chart_norm(x: &[f64]) -> f64 {
    norm(x)
}
