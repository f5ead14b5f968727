use serde::{Deserialize, Serialize};

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Mean and standard error of the mean of `xs` scaled by `scale`.
    pub fn from_samples(xs: &[f64], scale: f64) -> Self {
        let n = xs.len();
        if n == 0 {
            return Estimate::default();
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Estimate { value: scale * mean, stderr: scale * (var / n as f64).sqrt() }
    }

    /// Scaled proportion `scale · k/n` with its binomial standard error.
    pub fn proportion(k: usize, n: usize, scale: f64) -> Self {
        if n == 0 {
            return Estimate::default();
        }
        let p = k as f64 / n as f64;
        Estimate { value: scale * p, stderr: scale * (p * (1.0 - p) / n as f64).sqrt() }
    }
}

/// Least-squares line `y = intercept + slope · x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
