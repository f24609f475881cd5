use statrs::distribution::{Beta, ContinuousCDF};

/// Ordinary least-squares line `y = slope·x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Two-sided Clopper–Pearson interval for `successes` out of `trials` at
/// confidence `1 − alpha`.
pub fn clopper_pearson(successes: u64, trials: u64, alpha: f64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials, "need 0 <= successes <= trials, trials > 0");
    let (x, n) = (successes as f64, trials as f64);
    let lo = if successes == 0 {
        0.0
    } else {
        Beta::new(x, n - x + 1.0).expect("positive shape").inverse_cdf(alpha / 2.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        Beta::new(x + 1.0, n - x).expect("positive shape").inverse_cdf(1.0 - alpha / 2.0)
    };
    (lo, hi)
}
