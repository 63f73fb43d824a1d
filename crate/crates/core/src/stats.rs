//! Sample statistics shared by the estimators.

use crate::sampling::SampleRng;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (`n - 1` denominator).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// `(mean, standard error of the mean)`.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    (mean(xs), (sample_variance(xs) / xs.len() as f64).sqrt())
}

/// Standardized distance of an estimate from a target. A zero standard
/// error gives 0 when the mean hits the target to 1e-12 and infinity
/// otherwise.
pub fn z_score(mean: f64, stderr: f64, target: f64) -> f64 {
    let gap = mean - target;
    if stderr > 0.0 {
        gap / stderr
    } else if gap.abs() <= 1e-12 {
        0.0
    } else {
        gap.signum() * f64::INFINITY
    }
}

/// z-statistic of the difference of two independent estimates.
pub fn two_sample_z(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    z_score(m1 - m2, (s1 * s1 + s2 * s2).sqrt(), 0.0)
}

/// Linear interpolation percentile of sorted data, `q` in `[0, 1]`.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

/// Percentile bootstrap of the sample variance.
/// Returns `(ci_lo, ci_hi, bootstrap standard deviation)`.
pub fn bootstrap_variance(xs: &[f64], resamples: usize, level: f64, rng: &mut SampleRng) -> (f64, f64, f64) {
    let n = xs.len();
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            let draw: Vec<f64> = (0..n).map(|_| xs[rng.index(n)]).collect();
            sample_variance(&draw)
        })
        .collect();
    let sd = sample_variance(&stats).sqrt();
    stats.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    (percentile_sorted(&stats, alpha / 2.0), percentile_sorted(&stats, 1.0 - alpha / 2.0), sd)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = mean(&lx);
    let my = mean(&ly);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}
