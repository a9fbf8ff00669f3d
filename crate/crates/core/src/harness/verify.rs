//! Analytic cross-checks and the reference curves used by the plotting
//! overlays.

use std::f64::consts::LN_2;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::output::Csv;
use super::stats::rebound_time;
use crate::error::Result;
use crate::floquet::ReferenceEnsemble;
use crate::quad::integrate;
use crate::rse::{
    digamma, entropy_approx, entropy_exact, entropy_variance, jacobi_cdf, jacobi_density, jacobi_edge, mean_h2_closed,
    mean_h2_quadrature, page_law, EULER_GAMMA,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Absolute deviation from the expected value.
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(name: impl Into<String>, error: f64, tolerance: f64) -> Check {
    Check {
        name: name.into(),
        error,
        tolerance,
        pass: error <= tolerance,
    }
}

/// `μ = 0.05, 0.10, …, 0.50`.
pub fn mu_grid() -> Vec<f64> {
    (1..=10).map(|k| 0.05 * k as f64).collect()
}

/// Runs every analytic check.
pub fn run_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for mu in mu_grid() {
        let d = (mean_h2_quadrature(mu)? - mean_h2_closed(mu)?).abs();
        out.push(check(format!("appendix identity mu={mu:.2}"), d, 1e-8));
    }
    for mu in [0.1, 0.25, 0.5] {
        let norm = jacobi_cdf(mu, jacobi_edge(mu))?;
        out.push(check(format!("jacobi normalization mu={mu}"), (norm - 1.0).abs(), 1e-10));
        let a = jacobi_edge(mu);
        let direct = integrate(|x| jacobi_density(mu, x).unwrap_or(0.0), -a, a, 1e-10)?;
        out.push(check(format!("jacobi density integral mu={mu}"), (direct - 1.0).abs(), 1e-6));
    }
    out.push(check("digamma(1) = -gamma", (digamma(1.0)? + EULER_GAMMA).abs(), 1e-14));
    out.push(check("digamma(1/2) = -gamma - 2 log 2", (digamma(0.5)? + EULER_GAMMA + 2.0 * LN_2).abs(), 1e-13));
    for x in [0.3, 2.7, 11.0, 150.5] {
        let d = (digamma(x + 1.0)? - digamma(x)? - 1.0 / x).abs();
        out.push(check(format!("digamma recurrence x={x}"), d, 1e-12));
    }
    // the exact mean and the uncorrelated estimate agree per site for large n
    let n = 4096;
    for ell in [n / 8, n / 4, n / 2] {
        let d = (entropy_exact(ell, n, n / 2)? - entropy_approx(ell, n)?).abs() / ell as f64;
        out.push(check(format!("exact vs approx per site n={n} ell={ell}"), d, 1e-6));
    }
    let half = entropy_exact(n / 2, n, n / 2)? / (n / 2) as f64;
    out.push(check("half-chain density -> 2 log 2 - 1", (half - (2.0 * LN_2 - 1.0)).abs(), 1e-6));
    out.push(check("entropy_exact(0) = 0", entropy_exact(0, 64, 32)?.abs(), 1e-10));
    let var_half = entropy_variance(16, 64, 32)?;
    let mu: f64 = 0.25;
    out.push(check(
        "half-filling variance reduces to log(1-mu)+mu+mu^2",
        (var_half - ((1.0 - mu).ln() + mu + mu * mu)).abs(),
        1e-14,
    ));
    for kind in [ReferenceEnsemble::Poisson, ReferenceEnsemble::Goe] {
        let mass = integrate(|s| kind.density(s), 0.0, 40.0, 1e-12)?;
        out.push(check(format!("{kind:?} spacing density normalization"), (mass - 1.0).abs(), 1e-10));
        let mean = integrate(|s| s * kind.density(s), 0.0, 40.0, 1e-12)?;
        out.push(check(format!("{kind:?} spacing density unit mean"), (mean - 1.0).abs(), 1e-10));
    }
    out.push(check(
        "tabulated Poisson r~ vs 2 log 2 - 1",
        (ReferenceEnsemble::Poisson.r_tilde_mean() - (2.0 * LN_2 - 1.0)).abs(),
        1e-2,
    ));
    out.push(check("rebound time at tau=1", (rebound_time(64, 1.0)? - 64.0).abs(), 1e-12));
    Ok(out)
}

/// Writes the reference curves; returns the file list.
pub fn write_reference(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();

    let mut csv = Csv::new();
    csv.meta("version", env!("CARGO_PKG_VERSION"));
    csv.header(&["mu", "closed", "quadrature", "abs_diff"]);
    for mu in mu_grid() {
        let (c, q) = (mean_h2_closed(mu)?, mean_h2_quadrature(mu)?);
        csv.row(&[mu.into(), c.into(), q.into(), (c - q).abs().into()])?;
    }
    files.push(dir.join("reference_quadrature.csv"));
    csv.write(files.last().unwrap())?;

    let mut csv = Csv::new();
    csv.meta("version", env!("CARGO_PKG_VERSION"));
    csv.header(&["mu", "lambda", "density", "cdf"]);
    for mu in [0.125, 0.25, 0.375, 0.5] {
        let a = jacobi_edge(mu);
        for k in 0..=200 {
            let lam = -a + 2.0 * a * k as f64 / 200.0;
            csv.row(&[mu.into(), lam.into(), jacobi_density(mu, lam)?.into(), jacobi_cdf(mu, lam)?.into()])?;
        }
    }
    files.push(dir.join("reference_jacobi.csv"));
    csv.write(files.last().unwrap())?;

    let mut csv = Csv::new();
    csv.meta("version", env!("CARGO_PKG_VERSION"));
    csv.header(&["s", "poisson_density", "goe_density", "poisson_cdf", "goe_cdf"]);
    for k in 0..=400 {
        let s = 4.0 * k as f64 / 400.0;
        let (p, g) = (ReferenceEnsemble::Poisson, ReferenceEnsemble::Goe);
        csv.row(&[s.into(), p.density(s).into(), g.density(s).into(), p.cdf(s).into(), g.cdf(s).into()])?;
    }
    files.push(dir.join("reference_spacing.csv"));
    csv.write(files.last().unwrap())?;

    let mut csv = Csv::new();
    csv.meta("version", env!("CARGO_PKG_VERSION"));
    csv.header(&["n", "ell", "approx", "exact", "page", "variance"]);
    for n in [64usize, 128, 256] {
        for ell in 1..=n / 2 {
            csv.row(&[
                n.into(),
                ell.into(),
                entropy_approx(ell, n)?.into(),
                entropy_exact(ell, n, n / 2)?.into(),
                page_law(ell, n)?.into(),
                entropy_variance(ell, n, n / 2)?.into(),
            ])?;
        }
    }
    files.push(dir.join("reference_rse.csv"));
    csv.write(files.last().unwrap())?;

    let mut csv = Csv::new();
    csv.meta("version", env!("CARGO_PKG_VERSION"));
    csv.header(&["n", "tau", "rebound_time"]);
    for n in [64usize, 128, 256] {
        for k in 0..=40 {
            let tau = 0.25 * (k + 1) as f64;
            csv.row(&[n.into(), tau.into(), rebound_time(n, tau)?.into()])?;
        }
    }
    files.push(dir.join("reference_rebound.csv"));
    csv.write(files.last().unwrap())?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_checks().unwrap() {
            assert!(c.pass, "{c:?}");
        }
    }
}
