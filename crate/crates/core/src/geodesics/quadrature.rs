use rayon::prelude::*;
use serde::Serialize;

use super::GeodesicPath;
use crate::curvature::ricci_at;
use crate::error::Result;
use crate::metric::MetricModel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
}

fn trapezoid(s: &[f64], f: &[f64]) -> f64 {
    s.windows(2).zip(f.windows(2)).map(|(h, v)| 0.5 * (h[1] - h[0]) * (v[0] + v[1])).sum()
}

// Simpson on one pair of possibly unequal intervals.
fn simpson_pair(s: [f64; 3], f: [f64; 3]) -> f64 {
    let (h0, h1) = (s[1] - s[0], s[2] - s[1]);
    let h = h0 + h1;
    h / 6.0 * ((2.0 - h1 / h0) * f[0] + h * h / (h0 * h1) * f[1] + (2.0 - h0 / h1) * f[2])
}

/// Composite Simpson over sampled values; an odd number of intervals gets a
/// three-point closing correction on the last interval.
pub fn simpson(s: &[f64], f: &[f64]) -> f64 {
    let m = s.len().min(f.len());
    if m < 2 {
        return 0.0;
    }
    if m == 2 {
        return trapezoid(&s[..2], &f[..2]);
    }
    let intervals = m - 1;
    let even = intervals - intervals % 2;
    let mut total = 0.0;
    for k in (0..even).step_by(2) {
        total += simpson_pair([s[k], s[k + 1], s[k + 2]], [f[k], f[k + 1], f[k + 2]]);
    }
    if intervals % 2 == 1 {
        // integrate the quadratic through the last three samples over the final interval only
        let (a, b, c) = (m - 3, m - 2, m - 1);
        let (h0, h1) = (s[b] - s[a], s[c] - s[b]);
        total += h1 / 6.0
            * ((3.0 - h1 / (h0 + h1)) * f[c] + (3.0 + h1 / h0) * f[b] - h1 * h1 / (h0 * (h0 + h1)) * f[a]);
    }
    total
}

/// `∫ ric(γ, γ′) ds` along the samples of a unit-speed path.
pub fn ricci_integral(metric: &MetricModel, path: &GeodesicPath) -> Result<QuadratureResult> {
    let s = path.arc_lengths();
    let ric = path.samples.par_iter().map(|p| ricci_at(metric, &p.x, &p.v)).collect::<Result<Vec<f64>>>()?;
    let value = simpson(&s, &ric);
    // compare against the same rule on every other sample
    let error_estimate = if s.len() >= 5 {
        let s2: Vec<f64> = s.iter().step_by(2).copied().collect();
        let r2: Vec<f64> = ric.iter().step_by(2).copied().collect();
        let mut coarse = simpson(&s2, &r2);
        if (s.len() - 1) % 2 == 1 {
            coarse += simpson(&s[s.len() - 2..], &ric[ric.len() - 2..]);
        }
        (value - coarse).abs() / 15.0
    } else {
        (value - trapezoid(&s, &ric)).abs()
    };
    Ok(QuadratureResult { value, error_estimate })
}
