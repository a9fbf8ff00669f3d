//! Random Slater ensemble study: Monte Carlo block entropies against the
//! analytic laws, and block spectra against the Jacobi density.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::output::{Cell, Csv};
use super::stats::{chi_square_test, ChiSquare, Histogram};
use crate::error::{range_err, Result};
use crate::rse::{
    entropy_approx, entropy_exact, entropy_variance, jacobi_cdf, jacobi_density, jacobi_edge, page_law, sample_ensemble,
    EnsembleSample,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub ell: usize,
    pub mc_mean: f64,
    /// Standard error of `mc_mean`.
    pub mc_sem: f64,
    /// Unbiased sample variance.
    pub mc_variance: f64,
    pub exact: f64,
    pub approx: f64,
    pub page: f64,
    /// `None` at empty or full filling.
    pub variance_theory: Option<f64>,
    /// Block spectrum against the Jacobi density; half filling only.
    pub jacobi_fit: Option<ChiSquare>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub n: usize,
    pub m: usize,
    pub samples: usize,
    pub seed: u64,
    pub blocks: Vec<BlockReport>,
}

/// Histogram of `λ = 2ν − 1` with `bins` equal bins across the support
/// `[−λ₊, λ₊]` and one overflow bin on each side, tested against the Jacobi
/// density at filling `mu`.
pub fn jacobi_chi_square(lambdas: &[f64], mu: f64, bins: usize) -> Result<(Histogram, ChiSquare)> {
    if bins == 0 {
        return Err(range_err("bin count", "need at least one bin"));
    }
    let a = jacobi_edge(mu);
    let mut edges = vec![-1.0 - 1e-12];
    edges.extend((0..=bins).map(|k| -a + 2.0 * a * k as f64 / bins as f64));
    edges.push(1.0 + 1e-12);
    let hist = Histogram::with_edges(lambdas, edges);
    let cdf: Vec<f64> = hist.edges.iter().map(|&e| jacobi_cdf(mu, e)).collect::<Result<_>>()?;
    let probs: Vec<f64> = cdf.windows(2).map(|w| w[1] - w[0]).collect();
    let chi = chi_square_test(&hist.counts, &probs, 0)?;
    Ok((hist, chi))
}

fn mean_sem_var(x: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt(), var)
}

/// Samples the ensemble and compares each block with the analytic laws.
pub fn ensemble_report(
    n: usize,
    m: usize,
    ells: &[usize],
    samples: usize,
    seed: u64,
    bins: usize,
) -> Result<(EnsembleReport, EnsembleSample)> {
    if samples < 2 {
        return Err(range_err("sample count", "need at least two samples"));
    }
    for &ell in ells {
        if ell == 0 || 2 * ell > n {
            return Err(range_err("block size", format!("need 0 < ell <= n/2, got {ell} for n = {n}")));
        }
    }
    let sample = sample_ensemble(n, m, ells, samples, seed)?;
    let mut blocks = Vec::with_capacity(ells.len());
    for (b, &ell) in ells.iter().enumerate() {
        let (mc_mean, mc_sem, mc_variance) = mean_sem_var(&sample.entropies[b]);
        let jacobi_fit = if 2 * m == n {
            Some(jacobi_chi_square(&sample.lambdas[b], ell as f64 / n as f64, bins)?.1)
        } else {
            None
        };
        blocks.push(BlockReport {
            ell,
            mc_mean,
            mc_sem,
            mc_variance,
            exact: entropy_exact(ell, n, m)?,
            approx: entropy_approx(ell, n)?,
            page: page_law(ell, n)?,
            variance_theory: entropy_variance(ell, n, m).ok(),
            jacobi_fit,
        });
    }
    Ok((
        EnsembleReport {
            n,
            m,
            samples,
            seed,
            blocks,
        },
        sample,
    ))
}

/// Writes `rse_summary.csv`, `rse_entropies.csv` and `rse_spectrum.csv`.
pub fn write_ensemble(report: &EnsembleReport, sample: &EnsembleSample, bins: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let meta = |csv: &mut Csv| {
        csv.meta("n", report.n)
            .meta("m", report.m)
            .meta("samples", report.samples)
            .meta("seed", report.seed)
            .meta("version", env!("CARGO_PKG_VERSION"));
    };
    let mut files = Vec::new();

    let mut csv = Csv::new();
    meta(&mut csv);
    csv.header(&[
        "ell",
        "mc_mean",
        "mc_sem",
        "mc_variance",
        "exact",
        "approx",
        "page",
        "variance_theory",
        "chi2",
        "chi2_dof",
        "chi2_p",
    ]);
    for b in &report.blocks {
        let (chi, dof, p) = match b.jacobi_fit {
            Some(c) => (Cell::Float(c.statistic), Cell::from(c.dof), Cell::Float(c.p_value)),
            None => (Cell::Empty, Cell::Empty, Cell::Empty),
        };
        csv.row(&[
            b.ell.into(),
            b.mc_mean.into(),
            b.mc_sem.into(),
            b.mc_variance.into(),
            b.exact.into(),
            b.approx.into(),
            b.page.into(),
            b.variance_theory.into(),
            chi,
            dof,
            p,
        ])?;
    }
    files.push(dir.join("rse_summary.csv"));
    csv.write(files.last().unwrap())?;

    let mut csv = Csv::new();
    meta(&mut csv);
    csv.header(&["sample", "ell", "entropy"]);
    for s in 0..report.samples {
        for (b, &ell) in sample.ells.iter().enumerate() {
            csv.row(&[s.into(), ell.into(), sample.entropies[b][s].into()])?;
        }
    }
    files.push(dir.join("rse_entropies.csv"));
    csv.write(files.last().unwrap())?;

    let mut csv = Csv::new();
    meta(&mut csv);
    csv.header(&["ell", "lambda_lo", "lambda_hi", "count", "empirical_density", "jacobi_density"]);
    for (b, &ell) in sample.ells.iter().enumerate() {
        let mu = ell as f64 / report.n as f64;
        let (hist, _) = match jacobi_chi_square(&sample.lambdas[b], mu, bins) {
            Ok(h) => h,
            Err(_) => continue,
        };
        let total = hist.total() as f64;
        for (k, &c) in hist.counts.iter().enumerate() {
            let (lo, hi) = (hist.edges[k], hist.edges[k + 1]);
            let theory = if 2 * report.m == report.n {
                Cell::Float(jacobi_density(mu, 0.5 * (lo + hi))?)
            } else {
                Cell::Empty
            };
            csv.row(&[ell.into(), lo.into(), hi.into(), c.into(), (c as f64 / (total * (hi - lo))).into(), theory])?;
        }
    }
    files.push(dir.join("rse_spectrum.csv"));
    csv.write(files.last().unwrap())?;
    Ok(files)
}
