use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// `log2(value) = intercept + slope · scale`, fitted by least squares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLinearFit {
    pub slope: f64,
    pub intercept: f64,
}

impl LogLinearFit {
    pub fn fit(scales: &[f64], values: &[f64]) -> Result<Self> {
        if scales.len() != values.len() {
            return Err(Error::Parameter(
                "scales and values differ in length".into(),
            ));
        }
        if scales.len() < 2 {
            return Err(Error::InsufficientData(
                "log-linear fit needs at least two points".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Parameter(format!("value {v} is not positive")));
        }
        let n = scales.len() as f64;
        let ys: Vec<f64> = values.iter().map(|v| v.log2()).collect();
        let mx = scales.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = scales.iter().map(|x| (x - mx) * (x - mx)).sum();
        if sxx == 0.0 {
            return Err(Error::InsufficientData(
                "log-linear fit needs at least two distinct scales".into(),
            ));
        }
        let sxy: f64 = scales
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum();
        let slope = sxy / sxx;
        Ok(LogLinearFit {
            slope,
            intercept: my - slope * mx,
        })
    }

    pub fn eval(&self, scale: f64) -> f64 {
        (self.intercept + self.slope * scale).exp2()
    }
}

/// Fits `log2(value)` against scale and evaluates the fit at `target_scale`.
pub fn extrapolate_property(scales: &[u32], values: &[f64], target_scale: u32) -> Result<f64> {
    let xs: Vec<f64> = scales.iter().map(|&s| s as f64).collect();
    Ok(LogLinearFit::fit(&xs, values)?.eval(target_scale as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn exact_exponential() {
        let scales: Vec<u32> = (8..=16).collect();
        let values: Vec<f64> = scales.iter().map(|&s| (s as f64).exp2()).collect();
        let got = extrapolate_property(&scales, &values, 28).unwrap();
        assert!((got / (1u64 << 28) as f64 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_values() {
        let got = extrapolate_property(&[3, 5, 9], &[7.5, 7.5, 7.5], 40).unwrap();
        assert!((got - 7.5).abs() < 1e-9);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let scales: Vec<u32> = (8..=24).collect();
        let values: Vec<f64> = scales
            .iter()
            .map(|&s| 3.0 * (0.9 * s as f64).exp2() * (1.0 + rng.random_range(-0.01..0.01)))
            .collect();
        let got = extrapolate_property(&scales, &values, 40).unwrap();
        let want = 3.0 * 36f64.exp2();
        assert!((got / want - 1.0).abs() < 0.10);
    }

    #[test]
    fn needs_two_points() {
        assert!(matches!(
            extrapolate_property(&[10], &[1.0], 20),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            extrapolate_property(&[10, 10], &[1.0, 2.0], 20),
            Err(Error::InsufficientData(_))
        ));
    }
}
