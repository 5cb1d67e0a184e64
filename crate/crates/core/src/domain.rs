//! Single-chart coordinate domains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum DomainShape {
    AllSpace,
    Ball { radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

/// An open subset of `ℝⁿ` carrying the whole manifold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartDomain {
    pub dimension: usize,
    pub shape: DomainShape,
    /// Points closer than this to the boundary are rejected.
    pub margin: f64,
}

impl ChartDomain {
    pub const DEFAULT_MARGIN: f64 = 1e-6;

    pub fn all_space(dimension: usize) -> Self {
        Self { dimension, shape: DomainShape::AllSpace, margin: Self::DEFAULT_MARGIN }
    }

    pub fn ball(dimension: usize, radius: f64) -> Self {
        Self { dimension, shape: DomainShape::Ball { radius }, margin: Self::DEFAULT_MARGIN }
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self {
            dimension: lower.len(),
            shape: DomainShape::Box { lower, upper },
            margin: Self::DEFAULT_MARGIN,
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::InvalidMetric(format!("dimension must be at least 2, got {}", self.dimension)));
        }
        if !(self.margin > 0.0) {
            return Err(Error::InvalidMetric("boundary margin must be positive".into()));
        }
        match &self.shape {
            DomainShape::AllSpace => Ok(()),
            DomainShape::Ball { radius } if *radius > self.margin => Ok(()),
            DomainShape::Ball { radius } => Err(Error::InvalidMetric(format!("ball radius {radius} too small"))),
            DomainShape::Box { lower, upper } => {
                if lower.len() != self.dimension || upper.len() != self.dimension {
                    return Err(Error::DimensionMismatch { expected: self.dimension, got: lower.len().min(upper.len()) });
                }
                if lower.iter().zip(upper).any(|(l, u)| !(u - l > 2.0 * self.margin)) {
                    return Err(Error::InvalidMetric("box bounds are empty".into()));
                }
                Ok(())
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dimension || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match &self.shape {
            DomainShape::AllSpace => true,
            DomainShape::Ball { radius } => norm(x) < radius - self.margin,
            DomainShape::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *v > l + self.margin && *v < u - self.margin),
        }
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: x.len() });
        }
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(x.to_vec()))
        }
    }

    /// Axis-aligned box used when sampling; all-space charts use `[-extent, extent]ⁿ`.
    pub fn sampling_box(&self, extent: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.dimension;
        match &self.shape {
            DomainShape::AllSpace => (vec![-extent; n], vec![extent; n]),
            DomainShape::Ball { radius } => {
                let r = radius.min(extent);
                (vec![-r; n], vec![r; n])
            }
            DomainShape::Box { lower, upper } => (
                lower.iter().map(|l| l.max(-extent)).collect(),
                upper.iter().map(|u| u.min(extent)).collect(),
            ),
        }
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_rejects_boundary_band() {
        let d = ChartDomain::ball(2, 1.0).with_margin(1e-3);
        assert!(d.contains(&[0.5, 0.5]));
        assert!(!d.contains(&[0.9995, 0.0]));
        assert!(!d.contains(&[2.0, 0.0]));
        assert!(matches!(d.check(&[2.0, 0.0]), Err(Error::OutsideDomain(_))));
        assert!(matches!(d.check(&[0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn box_membership() {
        let d = ChartDomain::boxed(vec![-1.0, 0.0], vec![1.0, 2.0]);
        assert!(d.contains(&[0.0, 1.0]));
        assert!(!d.contains(&[0.0, -0.1]));
        assert!(!d.contains(&[f64::NAN, 1.0]));
    }

    #[test]
    fn dimension_one_is_invalid() {
        assert!(ChartDomain::all_space(1).validate().is_err());
        assert!(ChartDomain::all_space(3).validate().is_ok());
    }
}
