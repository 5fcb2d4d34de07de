//! Ordinary least-squares line fit with standard errors.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_uncertainty: f64,
    pub intercept_uncertainty: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::Fit(format!("x has {} points, y has {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) || !sxx.is_finite() {
        return Err(Error::Fit("x values are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let s2 = ssr / (nf - 2.0);
    Ok(LinearFit {
        slope,
        intercept,
        slope_uncertainty: (s2 / sxx).sqrt(),
        intercept_uncertainty: (s2 * (1.0 / nf + mx * mx / sxx)).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let f = linear_fit(&x, &x).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-15);
        assert!(f.intercept.abs() < 1e-15);
        assert!(f.slope_uncertainty < 1e-15);
    }

    #[test]
    fn degenerate() {
        assert!(matches!(linear_fit(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::Fit(_))));
        assert!(linear_fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(linear_fit(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn residuals_orthogonal_to_x() {
        let x: Vec<f64> = (0..50).map(|k| k as f64 * 0.37).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0 + (v * 7.0).sin()).collect();
        let f = linear_fit(&x, &y).unwrap();
        let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * (b - f.intercept - f.slope * a)).sum();
        assert!(dot.abs() < 1e-10, "{dot}");
        assert!(f.slope_uncertainty > 0.0 && f.intercept_uncertainty > 0.0);
    }
}
