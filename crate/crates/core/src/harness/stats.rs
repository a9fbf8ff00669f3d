//! Statistics of stationary time series and the profile fits.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{range_err, Error, Result};

/// Minimum post-burn-in length for a stationary summary.
pub const MIN_SERIES: usize = 30;

/// Fixed-count histogram over the observed range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// `bins` equal-width bins spanning `[min, max]`; the maximum lands in the
    /// last bin. A constant series yields one zero-width bin.
    pub fn new(data: &[f64], bins: usize) -> Self {
        let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if data.is_empty() || !(hi > lo) {
            return Histogram {
                edges: if data.is_empty() { vec![] } else { vec![lo, hi] },
                counts: if data.is_empty() { vec![] } else { vec![data.len()] },
            };
        }
        let mut edges: Vec<f64> = (0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect();
        edges[bins] = hi;
        Self::with_edges(data, edges)
    }

    /// Counts of `data` in the given ascending edges; values outside are dropped.
    pub fn with_edges(data: &[f64], edges: Vec<f64>) -> Self {
        let bins = edges.len() - 1;
        let (lo, hi) = (edges[0], edges[bins]);
        let mut counts = vec![0; bins];
        for &x in data {
            if x < lo || x > hi {
                continue;
            }
            let k = edges.partition_point(|&e| e <= x).saturating_sub(1).min(bins - 1);
            counts[k] += 1;
        }
        Histogram { edges, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Pearson χ² goodness of fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// χ² test of observed counts against bin probabilities. Adjacent bins are
/// pooled until each expected count reaches 5; `fitted` parameters are
/// subtracted from the degrees of freedom on top of the normalization.
pub fn chi_square_test(counts: &[usize], probs: &[f64], fitted: usize) -> Result<ChiSquare> {
    if counts.len() != probs.len() {
        return Err(Error::Dimension(format!("{} counts, {} probabilities", counts.len(), probs.len())));
    }
    let total: usize = counts.iter().sum();
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        obs += c as f64;
        exp += p * total as f64;
        if exp >= 5.0 {
            pooled.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => pooled.push((obs, exp)),
        }
    }
    if pooled.len() < fitted + 2 {
        return Err(Error::TooShort {
            need: fitted + 2,
            got: pooled.len(),
        });
    }
    let statistic = pooled
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else { 0.0 })
        .sum();
    let dof = pooled.len() - 1 - fitted;
    let p_value = 1.0 - ChiSquared::new(dof as f64).expect("dof > 0").cdf(statistic);
    Ok(ChiSquare {
        statistic,
        dof,
        p_value,
    })
}

/// Moment-matched normal distribution with its χ² goodness of fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub mean: f64,
    pub std: f64,
    /// `None` for a degenerate (zero-variance) series.
    pub goodness: Option<ChiSquare>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarySummary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Standard error of the mean from 20 batch means, which accounts for
    /// autocorrelation in the series.
    pub std_error: f64,
    pub histogram: Histogram,
    pub gaussian: GaussianFit,
    pub len: usize,
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn batch_std_error(x: &[f64]) -> f64 {
    let batches = 20.min(x.len());
    let size = x.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| x[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let (_, s) = mean_std(&means);
    s * (batches as f64 / (batches as f64 - 1.0)).sqrt() / (batches as f64).sqrt()
}

/// Summary of `series` after dropping the leading `burn_in_fraction`.
pub fn stationary_summary(series: &[f64], burn_in_fraction: f64, bins: usize) -> Result<StationarySummary> {
    if !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(range_err("burn-in fraction", format!("{burn_in_fraction} not in [0, 1)")));
    }
    let skip = (burn_in_fraction * series.len() as f64).floor() as usize;
    let kept = &series[skip..];
    if kept.len() < MIN_SERIES {
        return Err(Error::TooShort {
            need: MIN_SERIES,
            got: kept.len(),
        });
    }
    let (mean, std) = mean_std(kept);
    let histogram = Histogram::new(kept, bins.max(1));
    let goodness = if std > 0.0 && histogram.counts.len() > 1 {
        let normal = Normal::new(mean, std).expect("positive std");
        let e = &histogram.edges;
        let last = e.len() - 1;
        let probs: Vec<f64> = (0..histogram.counts.len())
            .map(|k| {
                let lo = if k == 0 { 0.0 } else { normal.cdf(e[k]) };
                let hi = if k + 1 == last { 1.0 } else { normal.cdf(e[k + 1]) };
                hi - lo
            })
            .collect();
        chi_square_test(&histogram.counts, &probs, 2).ok()
    } else {
        None
    };
    Ok(StationarySummary {
        mean,
        std,
        std_error: batch_std_error(kept),
        histogram,
        gaussian: GaussianFit { mean, std, goodness },
        len: kept.len(),
    })
}

/// Centred Pearson correlation coefficient.
pub fn pearson_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("series of lengths {} and {}", a.len(), b.len())));
    }
    if a.len() < MIN_SERIES {
        return Err(Error::TooShort {
            need: MIN_SERIES,
            got: a.len(),
        });
    }
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    if sa == 0.0 {
        return Err(Error::ZeroVariance("first series"));
    }
    if sb == 0.0 {
        return Err(Error::ZeroVariance("second series"));
    }
    let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / a.len() as f64;
    Ok((cov / (sa * sb)).clamp(-1.0, 1.0))
}

/// Coefficients of `S(ℓ) ≈ A + B sin(πℓ/N) + C sin(3πℓ/N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeSineFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// RMS residual over `ℓ = 1..N−1`.
    pub rms: f64,
}

impl ThreeSineFit {
    pub fn eval(&self, ell: f64, n: usize) -> f64 {
        let x = std::f64::consts::PI * ell / n as f64;
        self.a + self.b * x.sin() + self.c * (3.0 * x).sin()
    }
}

/// Least-squares three-sine fit of an entropy profile of length `n + 1`.
pub fn fit_profile_3sine(profile: &[f64], n: usize) -> Result<ThreeSineFit> {
    if profile.len() != n + 1 || n < 4 {
        return Err(Error::Dimension(format!("profile of length {} for n = {n}", profile.len())));
    }
    let rows = n - 1;
    let pi = std::f64::consts::PI;
    let design = DMatrix::from_fn(rows, 3, |r, c| {
        let x = pi * (r + 1) as f64 / n as f64;
        match c {
            0 => 1.0,
            1 => x.sin(),
            _ => (3.0 * x).sin(),
        }
    });
    let target = DVector::from_iterator(rows, profile[1..n].iter().copied());
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&target, 1e-14)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let resid = &design * &coef - &target;
    Ok(ThreeSineFit {
        a: coef[0],
        b: coef[1],
        c: coef[2],
        rms: (resid.norm_squared() / rows as f64).sqrt(),
    })
}

/// Time at which the quench front, bounced off the far end, catches up with
/// the obstacle: `2Nτ/(τ+1)`.
pub fn rebound_time(n: usize, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(range_err("dwell time", format!("need tau > 0, got {tau}")));
    }
    Ok(2.0 * n as f64 * tau / (tau + 1.0))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Dimension("need two or more matching points".into()));
    }
    if xs.iter().chain(ys).any(|&v| v <= 0.0) {
        return Err(range_err("log-log data", "values must be positive"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let (mx, _) = mean_std(&lx);
    let (my, _) = mean_std(&ly);
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal as NormalDist};

    #[test]
    fn constant_series() {
        let s = stationary_summary(&[2.5; 50], 0.1, 40).unwrap();
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.std, 0.0);
        assert_eq!(s.histogram.counts, vec![45]);
        assert!(s.gaussian.goodness.is_none());
    }

    #[test]
    fn too_short() {
        assert!(matches!(stationary_summary(&[1.0; 32], 0.1, 10), Err(Error::TooShort { .. })));
    }

    #[test]
    fn histogram_counts_everything() {
        let data: Vec<f64> = (0..1000).map(|k| (k as f64 * 0.37).sin()).collect();
        let h = Histogram::new(&data, 40);
        assert_eq!(h.total(), 1000);
        assert_eq!(h.edges.len(), 41);
    }

    #[test]
    fn gaussian_fit_recovers_parameters() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let dist = NormalDist::new(1.7, 0.4).unwrap();
        let data: Vec<f64> = (0..10_000).map(|_| dist.sample(&mut rng)).collect();
        let s = stationary_summary(&data, 0.0, 40).unwrap();
        assert!((s.gaussian.mean - 1.7).abs() / 1.7 < 0.03);
        assert!((s.gaussian.std - 0.4).abs() / 0.4 < 0.03);
        assert!(s.gaussian.goodness.unwrap().p_value > 0.01);
        assert_eq!(s.histogram.total(), s.len);
    }

    #[test]
    fn uniform_data_fails_gaussian_test() {
        let data: Vec<f64> = (0..10_000).map(|k| (k as f64 * 0.618_033_988_7).fract()).collect();
        let s = stationary_summary(&data, 0.0, 40).unwrap();
        assert!(s.gaussian.goodness.unwrap().p_value < 1e-6);
    }

    #[test]
    fn correlation_extremes() {
        let a: Vec<f64> = (0..100).map(|k| (k as f64).sqrt()).collect();
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert!((pearson_correlation(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson_correlation(&a, &neg).unwrap() + 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = a.iter().map(|v| 3.0 * v + 100.0).collect();
        assert!((pearson_correlation(&a, &shifted).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(pearson_correlation(&a, &[1.0; 100]), Err(Error::ZeroVariance(_))));
        assert!(pearson_correlation(&a[..10], &a[..10]).is_err());
    }

    #[test]
    fn three_sine_recovers_synthetic_profile() {
        let n = 64;
        let truth = ThreeSineFit { a: 0.3, b: 2.1, c: -0.45, rms: 0.0 };
        let profile: Vec<f64> = (0..=n).map(|l| truth.eval(l as f64, n)).collect();
        let fit = fit_profile_3sine(&profile, n).unwrap();
        assert!((fit.a - 0.3).abs() < 1e-10);
        assert!((fit.b - 2.1).abs() < 1e-10);
        assert!((fit.c + 0.45).abs() < 1e-10);
        assert!(fit.rms < 1e-10);

        let flat = fit_profile_3sine(&vec![1.25; n + 1], n).unwrap();
        assert!((flat.a - 1.25).abs() < 1e-10 && flat.b.abs() < 1e-10 && flat.c.abs() < 1e-10);
        assert!(fit_profile_3sine(&profile[..n], n).is_err());
    }

    #[test]
    fn rebound_limits() {
        assert_eq!(rebound_time(64, 1.0).unwrap(), 64.0);
        assert!((rebound_time(64, 1e9).unwrap() - 128.0).abs() < 1e-6);
        assert!(rebound_time(64, 0.0).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = (1..20).map(|k| k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-2.0)).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_pools_small_bins() {
        let counts = [1, 2, 40, 50, 45, 3, 0];
        let probs = [0.01, 0.02, 0.3, 0.35, 0.29, 0.02, 0.01];
        let c = chi_square_test(&counts, &probs, 0).unwrap();
        assert!(c.dof < 6);
        assert!(c.p_value > 0.01);
    }
}
