//! Summary statistics over independent runs.

/// z-score of a two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    /// Standard error of the mean (sample standard deviation over `√n`).
    pub std_err: f64,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

/// Mean with a normal-approximation 95% confidence interval `mean ± 1.96·SE`.
///
/// A single observation gets a zero-width interval. Returns `None` when empty.
pub fn mean_ci95(values: &[f64]) -> Option<MeanCi> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std_err = if n > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    Some(MeanCi {
        mean,
        std_err,
        lo: mean - Z95 * std_err,
        hi: mean + Z95 * std_err,
        n,
    })
}
