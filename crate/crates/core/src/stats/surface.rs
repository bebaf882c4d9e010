//! Quadratic response surfaces `T(b, d)` and their extrema.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ols::{ols_fit, LinearFit};
use crate::error::Result;
use crate::fmt::sig6;

/// Relative size below which the Hessian determinant counts as zero.
const DEGENERATE_TOLERANCE: f64 = 1e-12;

/// `T = β0 + β1 b + β2 d + β3 b d + β4 b² + β5 d²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSurface {
    pub beta: [f64; 6],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Max,
    Min,
    Saddle,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryPoint {
    pub classification: Classification,
    /// `(b*, d*)`; absent when degenerate.
    pub point: Option<(f64, f64)>,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub b_lo: f64,
    pub b_hi: f64,
    pub d_lo: f64,
    pub d_hi: f64,
}

impl Rect {
    pub fn square(lo: f64, hi: f64) -> Self {
        Self {
            b_lo: lo,
            b_hi: hi,
            d_lo: lo,
            d_hi: hi,
        }
    }

    pub fn contains(&self, b: f64, d: f64) -> bool {
        (self.b_lo..=self.b_hi).contains(&b) && (self.d_lo..=self.d_hi).contains(&d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxExtrema {
    pub argmin: (f64, f64),
    pub min: f64,
    pub argmax: (f64, f64),
    pub max: f64,
}

pub const SURFACE_TERMS: [&str; 5] = ["b", "d", "b:d", "b^2", "d^2"];

impl QuadraticSurface {
    pub fn new(beta: [f64; 6]) -> Self {
        Self { beta }
    }

    pub fn eval(&self, b: f64, d: f64) -> f64 {
        let [b0, b1, b2, b3, b4, b5] = self.beta;
        b0 + b1 * b + b2 * d + b3 * b * d + b4 * b * b + b5 * d * d
    }

    pub fn gradient(&self, b: f64, d: f64) -> (f64, f64) {
        let [_, b1, b2, b3, b4, b5] = self.beta;
        (b1 + b3 * d + 2.0 * b4 * b, b2 + b3 * b + 2.0 * b5 * d)
    }

    pub fn hessian(&self) -> [[f64; 2]; 2] {
        let [_, _, _, b3, b4, b5] = self.beta;
        [[2.0 * b4, b3], [b3, 2.0 * b5]]
    }

    pub fn stationary_point(&self) -> StationaryPoint {
        let [_, b1, b2, b3, b4, b5] = self.beta;
        let det = 4.0 * b4 * b5 - b3 * b3;
        let scale = (4.0 * b4 * b5).abs().max(b3 * b3);
        if scale == 0.0 || det.abs() <= DEGENERATE_TOLERANCE * scale {
            return StationaryPoint {
                classification: Classification::Degenerate,
                point: None,
                value: None,
            };
        }
        let b = (-2.0 * b5 * b1 + b3 * b2) / det;
        let d = (-2.0 * b4 * b2 + b3 * b1) / det;
        let classification = if det < 0.0 {
            Classification::Saddle
        } else if b4 < 0.0 {
            Classification::Max
        } else {
            Classification::Min
        };
        StationaryPoint {
            classification,
            point: Some((b, d)),
            value: Some(self.eval(b, d)),
        }
    }

    /// Exact extrema over a closed rectangle: corners, the optimum of each
    /// edge's 1-D restriction, and the interior stationary point.
    pub fn extrema_on_box(&self, r: Rect) -> BoxExtrema {
        let [_, b1, b2, b3, b4, b5] = self.beta;
        let mut cands = vec![(r.b_lo, r.d_lo), (r.b_hi, r.d_lo), (r.b_lo, r.d_hi), (r.b_hi, r.d_hi)];
        for d in [r.d_lo, r.d_hi] {
            // T(b) = β4 b² + (β1 + β3 d) b + const
            if b4 != 0.0 {
                let b = -(b1 + b3 * d) / (2.0 * b4);
                if (r.b_lo..=r.b_hi).contains(&b) {
                    cands.push((b, d));
                }
            }
        }
        for b in [r.b_lo, r.b_hi] {
            if b5 != 0.0 {
                let d = -(b2 + b3 * b) / (2.0 * b5);
                if (r.d_lo..=r.d_hi).contains(&d) {
                    cands.push((b, d));
                }
            }
        }
        if let Some((b, d)) = self.stationary_point().point {
            if r.contains(b, d) {
                cands.push((b, d));
            }
        }
        let mut out = BoxExtrema {
            argmin: cands[0],
            min: self.eval(cands[0].0, cands[0].1),
            argmax: cands[0],
            max: self.eval(cands[0].0, cands[0].1),
        };
        for &(b, d) in &cands[1..] {
            let v = self.eval(b, d);
            if v < out.min {
                out.min = v;
                out.argmin = (b, d);
            }
            if v > out.max {
                out.max = v;
                out.argmax = (b, d);
            }
        }
        out
    }

    /// Samples `T̂` on an `(steps + 1)²` grid spanning the rectangle.
    pub fn write_grid_csv<W: Write>(&self, out: W, r: Rect, steps: usize) -> Result<()> {
        let steps = steps.max(1);
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["b", "d", "t_hat"])?;
        for i in 0..=steps {
            let b = r.b_lo + (r.b_hi - r.b_lo) * i as f64 / steps as f64;
            for j in 0..=steps {
                let d = r.d_lo + (r.d_hi - r.d_lo) * j as f64 / steps as f64;
                w.write_record([sig6(b), sig6(d), sig6(self.eval(b, d))])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Least-squares quadratic through `(b, d, T)` points.
pub fn fit_quadratic_surface(points: &[(f64, f64, f64)]) -> Result<(QuadraticSurface, LinearFit)> {
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|&(b, d, _)| vec![b, d, b * d, b * b, d * d])
        .collect();
    let y: Vec<f64> = points.iter().map(|p| p.2).collect();
    let fit = ols_fit(&SURFACE_TERMS, &rows, &y, true)?;
    let mut beta = [0.0; 6];
    beta.copy_from_slice(&fit.coefficients);
    Ok((QuadraticSurface { beta }, fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use approx::assert_relative_eq;

    const IC: [f64; 6] = [14.459, 7.511, 9.060, 1.671, -8.098, -9.313];

    #[test]
    fn info_correction_peak() {
        let s = QuadraticSurface::new(IC).stationary_point();
        assert_eq!(s.classification, Classification::Max);
        let (b, d) = s.point.unwrap();
        assert!((b - 0.519).abs() < 5e-4 && (d - 0.533).abs() < 5e-4, "{b} {d}");
        assert!((s.value.unwrap() - 18.82).abs() < 0.01);
    }

    #[test]
    fn info_correction_box() {
        let e = QuadraticSurface::new(IC).extrema_on_box(Rect::square(0.1, 1.0));
        assert_eq!(e.argmin, (1.0, 0.1));
        assert_relative_eq!(e.min, 14.85197, epsilon = 1e-5);
        assert!((e.max - 18.82).abs() < 0.01);
    }

    #[test]
    fn classification_cases() {
        let bowl = QuadraticSurface::new([0.0, 0.0, 0.0, 0.0, 1.0, 1.0]).stationary_point();
        assert_eq!(bowl.classification, Classification::Min);
        assert_eq!(bowl.point, Some((0.0, 0.0)));
        let saddle = QuadraticSurface::new([0.0, 0.0, 0.0, 1.0, 0.0, 0.0]).stationary_point();
        assert_eq!(saddle.classification, Classification::Saddle);
        let plane = QuadraticSurface::new([0.0, 1.0, 1.0, 0.0, 0.0, 0.0]).stationary_point();
        assert_eq!(plane.classification, Classification::Degenerate);
        assert_eq!(plane.point, None);
    }

    #[test]
    fn linear_box_corners() {
        let e = QuadraticSurface::new([0.0, 1.0, 1.0, 0.0, 0.0, 0.0]).extrema_on_box(Rect::square(0.0, 1.0));
        assert_eq!((e.min, e.argmin, e.max, e.argmax), (0.0, (0.0, 0.0), 2.0, (1.0, 1.0)));
    }

    #[test]
    fn fit_recovers_generator() {
        let truth = QuadraticSurface::new([1.0, 2.0, -1.0, 0.5, 3.0, -2.0]);
        let pts: Vec<_> = [0.0, 0.5, 1.0]
            .iter()
            .flat_map(|&b| [0.0, 0.5, 1.0].map(|d| (b, d, truth.eval(b, d))))
            .collect();
        let (s, _) = fit_quadratic_surface(&pts).unwrap();
        for (a, b) in s.beta.iter().zip(truth.beta) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn collinear_points_are_singular() {
        let pts: Vec<_> = (0..10).map(|i| (i as f64, i as f64, i as f64)).collect();
        assert!(matches!(fit_quadratic_surface(&pts), Err(Error::Singular { .. })));
    }

    #[test]
    fn grid_csv_shape() {
        let mut buf = Vec::new();
        QuadraticSurface::new(IC)
            .write_grid_csv(&mut buf, Rect::square(0.1, 1.0), 9)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 101);
        assert!(text.lines().nth(1).unwrap().starts_with("0.1,0.1,"));
    }
}
