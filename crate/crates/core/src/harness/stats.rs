use statrs::distribution::{ContinuousCDF, Normal};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the sample variance from the fourth central moment,
/// `√((m₄ − σ⁴(T−3)/(T−1))/T)`; no normality assumption.
pub fn variance_se(xs: &[f64]) -> f64 {
    let t = xs.len() as f64;
    let m = mean(xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / t;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / t;
    let v = m2 * t / (t - 1.0);
    ((m4 - v * v * (t - 3.0) / (t - 1.0)) / t).max(0.0).sqrt()
}

fn normal(mean: f64, sd: f64) -> Normal {
    Normal::new(mean, sd).expect("positive, finite standard deviation")
}

/// Kolmogorov–Smirnov distance between the empirical law of `xs` and
/// `N(mean, sd²)`.
pub fn ks_normal(xs: &[f64], mean: f64, sd: f64) -> f64 {
    let law = normal(mean, sd);
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let t = v.len() as f64;
    v.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = law.cdf(x);
        d.max((f - i as f64 / t).abs()).max(((i + 1) as f64 / t - f).abs())
    })
}

/// KS distance for an integer-valued statistic, compared at the half-integer
/// points between lattice values (continuity correction). The plain distance
/// of a lattice law to a continuous one is bounded below by half its largest
/// atom and does not measure the approach to normality.
pub fn ks_normal_lattice(xs: &[f64], mean: f64, sd: f64) -> f64 {
    let law = normal(mean, sd);
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let t = v.len() as f64;
    let (lo, hi) = (v[0].floor() as i64 - 1, v[v.len() - 1].ceil() as i64 + 1);
    let mut idx = 0;
    let mut d = 0.0f64;
    for k in lo..=hi {
        let cut = k as f64 + 0.5;
        while idx < v.len() && v[idx] < cut {
            idx += 1;
        }
        d = d.max((idx as f64 / t - law.cdf(cut)).abs());
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_se = if n > 2.0 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    LinearFit { slope, intercept, slope_se }
}
