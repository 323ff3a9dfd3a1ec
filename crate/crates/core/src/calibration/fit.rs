//! Ordinary least-squares fits of affine coefficients from measurements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MeasurementSeries {
    /// xApp counts or loads.
    pub predictor: Vec<f64>,
    /// Measured KPI or resource values.
    pub response: Vec<f64>,
    /// Which coefficient pair the series fits, e.g. `delta_D`.
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the residuals.
    pub rms: f64,
}

impl MeasurementSeries {
    pub fn new(label: impl Into<String>, predictor: Vec<f64>, response: Vec<f64>) -> Self {
        Self {
            predictor,
            response,
            label: label.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.predictor.len() != self.response.len() {
            return Err(Error::DimensionMismatch(format!(
                "series '{}': {} predictors vs {} responses",
                self.label,
                self.predictor.len(),
                self.response.len()
            )));
        }
        if let Some(v) = self
            .predictor
            .iter()
            .chain(&self.response)
            .find(|v| !v.is_finite())
        {
            return Err(Error::InvalidParams(format!(
                "series '{}': non-finite value {v}",
                self.label
            )));
        }
        Ok(())
    }
}

/// Fits `response ≈ slope * predictor + intercept`.
pub fn fit_linear(series: &MeasurementSeries) -> Result<LinearFit> {
    series.validate()?;
    let x = &series.predictor;
    let y = &series.response;
    let n = x.len() as f64;

    let mut distinct = x.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "series '{}' needs at least 2 distinct predictors, got {}",
            series.label,
            distinct.len()
        )));
    }

    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mean_x) * (xi - mean_x);
        sxy += (xi - mean_x) * (yi - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let r = yi - (slope * xi + intercept);
            r * r
        })
        .sum();

    Ok(LinearFit {
        slope,
        intercept,
        rms: (sse / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn exact_affine_data() {
        let s = MeasurementSeries::new("delta_D", vec![0.0, 10.0, 20.0], vec![0.0, 105.5, 211.0]);
        let f = fit_linear(&s).unwrap();
        assert!(close(f.slope, 10.55, 1e-9));
        assert!(f.intercept.abs() < 1e-9);
        assert!(f.rms < 1e-9);
    }

    #[test]
    fn constant_data() {
        let s = MeasurementSeries::new("b", vec![1.0, 2.0], vec![5.0, 5.0]);
        let f = fit_linear(&s).unwrap();
        assert_eq!(f.slope, 0.0);
        assert_eq!(f.intercept, 5.0);
    }

    #[test]
    fn three_point_ols() {
        // normal equations: 3b + 3d = 7, 3b + 5d = 10
        let s = MeasurementSeries::new("x", vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 4.0]);
        let f = fit_linear(&s).unwrap();
        assert!(close(f.slope, 1.5, 1e-12));
        assert!(close(f.intercept, 5.0 / 6.0, 1e-12));
        // residuals 1/6, -1/3, 1/6
        assert!(close(f.rms, (1.0f64 / 18.0).sqrt(), 1e-12));
    }

    #[test]
    fn degenerate_series() {
        let one = MeasurementSeries::new("x", vec![3.0], vec![1.0]);
        assert!(matches!(fit_linear(&one), Err(Error::DegenerateFit(_))));
        let same = MeasurementSeries::new("x", vec![2.0, 2.0, 2.0], vec![1.0, 2.0, 3.0]);
        assert!(matches!(fit_linear(&same), Err(Error::DegenerateFit(_))));
        let empty = MeasurementSeries::default();
        assert!(matches!(fit_linear(&empty), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn mismatched_lengths() {
        let s = MeasurementSeries::new("x", vec![1.0, 2.0], vec![1.0]);
        assert!(matches!(fit_linear(&s), Err(Error::DimensionMismatch(_))));
    }
}
