use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vector fields `V = v^i(x) ∂/∂x^i` with closed-form Jacobians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VectorFieldModel {
    Zero,
    /// `V = A x + c`
    Linear { a: Vec<Vec<f64>>, c: Vec<f64> },
    /// `V = κ x`
    Radial { kappa: f64 },
    /// `ω(−x₂, x₁)` in the plane, `ω a × x` in space.
    Rotation {
        rate: f64,
        #[serde(default)]
        axis: Option<Vec<f64>>,
    },
    /// `V = Q x` with `Q` symmetric, the gradient of `½ xᵀQx`.
    GradientQuadratic { q: Vec<Vec<f64>> },
}

impl VectorFieldModel {
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidField(m));
        let square = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        match self {
            Self::Zero | Self::Radial { .. } => Ok(()),
            Self::Linear { a, c } => {
                if !square(a) || c.len() != n {
                    return bad(format!("linear field needs an {n}x{n} matrix and an {n}-vector"));
                }
                Ok(())
            }
            Self::Rotation { axis, .. } => match (n, axis) {
                (2, None) => Ok(()),
                (3, Some(ax)) if ax.len() == 3 && ax.iter().any(|v| *v != 0.0) => Ok(()),
                (3, _) => bad("rotation in dimension 3 needs a nonzero axis".into()),
                (2, Some(_)) => bad("planar rotation takes no axis".into()),
                _ => bad(format!("rotation fields are defined for n = 2, 3, not {n}")),
            },
            Self::GradientQuadratic { q } => {
                if !square(q) {
                    return bad(format!("quadratic form must be {n}x{n}"));
                }
                for i in 0..n {
                    for j in 0..i {
                        if (q[i][j] - q[j][i]).abs() > 1e-12 {
                            return bad("quadratic form must be symmetric".into());
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Every supported field is affine: `V = M x + c`.
    fn affine(&self, n: usize) -> (DMatrix<f64>, Vec<f64>) {
        let from_rows = |m: &Vec<Vec<f64>>| DMatrix::from_fn(n, n, |i, j| m[i][j]);
        match self {
            Self::Zero => (DMatrix::zeros(n, n), vec![0.0; n]),
            Self::Linear { a, c } => (from_rows(a), c.clone()),
            Self::Radial { kappa } => (DMatrix::identity(n, n) * *kappa, vec![0.0; n]),
            Self::Rotation { rate, axis } => {
                let m = match axis {
                    Some(ax) => {
                        let len = ax.iter().map(|v| v * v).sum::<f64>().sqrt();
                        let (a, b, c) = (ax[0] / len, ax[1] / len, ax[2] / len);
                        DMatrix::from_row_slice(3, 3, &[0.0, -c, b, c, 0.0, -a, -b, a, 0.0])
                    }
                    None => DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
                };
                (m * *rate, vec![0.0; n])
            }
            Self::GradientQuadratic { q } => (from_rows(q), vec![0.0; n]),
        }
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        let (m, c) = self.affine(x.len());
        (0..x.len()).map(|i| c[i] + (0..x.len()).map(|j| m[(i, j)] * x[j]).sum::<f64>()).collect()
    }

    /// `∂v^i/∂x^j`.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        self.affine(x.len()).0
    }
}

/// Components of the complete lift `V̂ = v^i ∂/∂x^i + y^j (∂v^i/∂x^j) ∂/∂y^i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompleteLift {
    pub horizontal: Vec<f64>,
    pub vertical: Vec<f64>,
}

pub fn complete_lift(field: &VectorFieldModel, x: &[f64], y: &[f64]) -> CompleteLift {
    let jac = field.jacobian(x);
    let vertical = (0..y.len()).map(|i| (0..y.len()).map(|j| jac[(i, j)] * y[j]).sum()).collect();
    CompleteLift { horizontal: field.value(x), vertical }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fields() -> Vec<(VectorFieldModel, usize)> {
        vec![
            (VectorFieldModel::Zero, 2),
            (VectorFieldModel::Linear { a: vec![vec![1.0, 2.0], vec![-0.5, 0.3]], c: vec![0.1, -0.2] }, 2),
            (VectorFieldModel::Radial { kappa: 0.7 }, 3),
            (VectorFieldModel::Rotation { rate: 1.5, axis: None }, 2),
            (VectorFieldModel::Rotation { rate: 0.5, axis: Some(vec![1.0, 2.0, 2.0]) }, 3),
            (VectorFieldModel::GradientQuadratic { q: vec![vec![2.0, 0.5], vec![0.5, -1.0]] }, 2),
        ]
    }

    #[test]
    fn jacobians_match_differences() {
        for (f, n) in fields() {
            f.validate(n).unwrap();
            let x: Vec<f64> = (0..n).map(|i| 0.3 - 0.2 * i as f64).collect();
            let jac = f.jacobian(&x);
            for j in 0..n {
                let h = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let (vp, vm) = (f.value(&xp), f.value(&xm));
                for i in 0..n {
                    assert!(((vp[i] - vm[i]) / (2.0 * h) - jac[(i, j)]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn lift_examples() {
        let x = [0.4, -1.0];
        let y = [2.0, 0.5];
        let z = complete_lift(&VectorFieldModel::Zero, &x, &y);
        assert_eq!(z.horizontal, vec![0.0, 0.0]);
        assert_eq!(z.vertical, vec![0.0, 0.0]);
        let r = complete_lift(&VectorFieldModel::Radial { kappa: 1.0 }, &x, &y);
        assert_eq!(r.horizontal, x.to_vec());
        assert_eq!(r.vertical, y.to_vec());
        let a = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        let l = complete_lift(&VectorFieldModel::Linear { a, c: vec![1.0, 1.0] }, &x, &y);
        assert_eq!(l.horizontal, vec![0.4 - 2.0 + 1.0, 1.2 - 4.0 + 1.0]);
        assert_eq!(l.vertical, vec![3.0, 8.0]);
    }

    #[test]
    fn rejects_malformed_fields() {
        assert!(VectorFieldModel::Rotation { rate: 1.0, axis: None }.validate(3).is_err());
        assert!(VectorFieldModel::Rotation { rate: 1.0, axis: None }.validate(4).is_err());
        assert!(VectorFieldModel::GradientQuadratic { q: vec![vec![1.0, 2.0], vec![0.0, 1.0]] }.validate(2).is_err());
        assert!(VectorFieldModel::Linear { a: vec![vec![1.0]], c: vec![0.0] }.validate(2).is_err());
    }
}
