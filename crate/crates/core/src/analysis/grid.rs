//! Extrema of a real function over a finite grid standing in for the real line.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default grid spacing.
pub const DEFAULT_STEP: f64 = 1.0 / 64.0;
/// Half-width of the search window is `N + DEFAULT_MARGIN`.
pub const DEFAULT_MARGIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridExtrema {
    pub max: f64,
    pub argmax: f64,
    pub min: f64,
    pub argmin: f64,
}

impl GridExtrema {
    /// Largest modulus seen on the grid.
    pub fn sup_abs(&self) -> f64 {
        self.max.abs().max(self.min.abs())
    }
}

/// Sorted, duplicate-free points `-T + i step`, all half-integers in
/// `[-T, T]` and the probes lying in that interval.
pub fn grid_points(t_max: f64, step: f64, probes: &[f64]) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("grid step must be positive, got {step}")));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("window half-width must be positive, got {t_max}")));
    }
    let ratio = 2.0 * t_max / step;
    let count = if (ratio - ratio.round()).abs() < 1e-9 * ratio {
        ratio.round()
    } else {
        ratio.floor()
    } as u64;
    let mut points: Vec<f64> = (0..=count).map(|i| -t_max + i as f64 * step).collect();
    let first = (-t_max - 0.5).ceil() as i64;
    let last = (t_max - 0.5).floor() as i64;
    points.extend((first..=last).map(|j| j as f64 + 0.5));
    points.extend(probes.iter().copied().filter(|p| p.abs() <= t_max));
    points.sort_by(f64::total_cmp);
    points.dedup();
    Ok(points)
}

/// Maximum and minimum of `f` over [`grid_points`]; ties go to the smallest `t`.
pub fn sup_on_grid<F>(f: F, t_max: f64, step: f64) -> Result<GridExtrema>
where
    F: Fn(f64) -> f64 + Sync,
{
    sup_on_grid_with_probes(f, t_max, step, &[])
}

pub fn sup_on_grid_with_probes<F>(f: F, t_max: f64, step: f64, probes: &[f64]) -> Result<GridExtrema>
where
    F: Fn(f64) -> f64 + Sync,
{
    let points = grid_points(t_max, step, probes)?;
    Ok(extrema_over(&f, &points))
}

pub(crate) fn extrema_over<F>(f: &F, points: &[f64]) -> GridExtrema
where
    F: Fn(f64) -> f64 + Sync,
{
    let values: Vec<f64> = points.par_iter().map(|&t| f(t)).collect();
    let mut ext = GridExtrema {
        max: values[0],
        argmax: points[0],
        min: values[0],
        argmin: points[0],
    };
    for (&t, &v) in points.iter().zip(&values).skip(1) {
        if v > ext.max {
            ext.max = v;
            ext.argmax = t;
        }
        if v < ext.min {
            ext.min = v;
            ext.argmin = t;
        }
    }
    ext
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summation::sin_pi;

    #[test]
    fn zero_function_ties_to_left_end() {
        let e = sup_on_grid(|_| 0.0, 3.0, 0.1).unwrap();
        assert_eq!(e, GridExtrema { max: 0.0, argmax: -3.0, min: 0.0, argmin: -3.0 });
    }

    #[test]
    fn sine_extrema() {
        let e = sup_on_grid(sin_pi, 2.0, 1e-3).unwrap();
        assert_eq!(e.max, 1.0);
        assert!((e.argmax - 0.5).abs() < 1e-9 || (e.argmax + 1.5).abs() < 1e-9);
        assert!(e.argmax >= -1.5);
        assert_eq!(e.min, -1.0);
    }

    #[test]
    fn half_integers_and_probes_are_included() {
        let pts = grid_points(2.0, 0.3, &[0.123, 7.0]).unwrap();
        for h in [-1.5, -0.5, 0.5, 1.5] {
            assert!(pts.contains(&h));
        }
        assert!(pts.contains(&0.123));
        assert!(!pts.contains(&7.0));
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(pts[0], -2.0);
    }

    #[test]
    fn refinement_never_lowers_the_max() {
        let f = |t: f64| (3.1 * t).sin() + 0.5 * (7.3 * t).cos();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..6 {
            let e = sup_on_grid(f, 4.0, 0.5 / 2f64.powi(k)).unwrap();
            assert!(e.max >= prev);
            prev = e.max;
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(sup_on_grid(|t| t, 1.0, 0.0).is_err());
        assert!(sup_on_grid(|t| t, -1.0, 0.1).is_err());
    }
}
