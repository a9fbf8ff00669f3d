//! Random Slater ensemble.
//!
//! Slater determinants whose occupied subspace is Haar distributed. Block
//! correlation spectra follow the Jacobi ensemble; with `λ = 2ν − 1` and
//! `μ = ℓ/n` at half filling their density is
//! `ρ_μ(λ) = √(4μ(1−μ) − λ²) / (2πμ(1 − λ²))` on `|λ| ≤ 2√(μ(1−μ))`.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::entanglement::{binary_entropy, entropy_of_spectrum, subset_spectrum};
use crate::error::{range_err, Result};
use crate::evolve::ModeMatrix;
use crate::linalg::qr_positive;
use crate::quad::integrate;
use crate::C64;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Ensemble dimensions: `n` sites, `m` particles, block of `ell` sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RseParams {
    pub n: usize,
    pub m: usize,
    pub ell: usize,
}

impl RseParams {
    pub fn new(n: usize, m: usize, ell: usize) -> Result<Self> {
        if m > n {
            return Err(range_err("particle number", format!("m = {m} exceeds n = {n}")));
        }
        if ell == 0 || 2 * ell > n {
            return Err(range_err("block size", format!("need 0 < ell <= n/2, got {ell} for n = {n}")));
        }
        Ok(RseParams { n, m, ell })
    }

    /// Block filling `μ = ℓ/n`.
    pub fn mu(&self) -> f64 {
        self.ell as f64 / self.n as f64
    }
}

/// Haar-random `n × m` isometry: complex Gaussian entries orthonormalized by
/// QR, with the triangular factor's diagonal phases absorbed.
pub fn sample_random_slater<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<ModeMatrix> {
    if m > n {
        return Err(range_err("particle number", format!("m = {m} exceeds n = {n}")));
    }
    loop {
        let g = DMatrix::<C64>::from_fn(n, m, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let smallest = g
            .column_iter()
            .map(|c| c.norm())
            .fold(f64::INFINITY, f64::min);
        if m > 0 && smallest < 1e-12 {
            continue;
        }
        let q = qr_positive(g);
        if crate::linalg::isometry_defect(&q) < 1e-10 {
            return Ok(ModeMatrix::from_raw(q));
        }
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu <= 0.5) {
        return Err(range_err("block filling", format!("need 0 < mu <= 1/2, got {mu}")));
    }
    Ok(())
}

/// Support edge `λ₊(μ) = 2√(μ(1−μ))`.
pub fn jacobi_edge(mu: f64) -> f64 {
    2.0 * (mu * (1.0 - mu)).sqrt()
}

/// Limiting eigenvalue density of `λ = 2ν − 1`; zero outside the support.
pub fn jacobi_density(mu: f64, lambda: f64) -> Result<f64> {
    check_mu(mu)?;
    let a2 = 4.0 * mu * (1.0 - mu);
    let inside = a2 - lambda * lambda;
    if inside <= 0.0 || lambda.abs() >= 1.0 {
        return Ok(0.0);
    }
    Ok(inside.sqrt() / (2.0 * PI * mu * (1.0 - lambda * lambda)))
}

/// `ρ_μ(λ) dλ` under `λ = λ₊ sin θ`; smooth on `[−π/2, π/2]`.
fn density_in_angle(mu: f64, theta: f64) -> f64 {
    let a = jacobi_edge(mu);
    let c = theta.cos();
    let gap = (1.0 - 2.0 * mu).powi(2);
    // 1 − λ² = (1 − 2μ)² + a² cos²θ
    a * a * c * c / (2.0 * PI * mu * (gap + a * a * c * c))
}

pub(crate) fn h2_integrand(mu: f64, theta: f64) -> f64 {
    let nu = 0.5 * (1.0 + jacobi_edge(mu) * theta.sin());
    binary_entropy(nu.clamp(0.0, 1.0)).unwrap_or(0.0) * density_in_angle(mu, theta)
}

/// Cumulative Jacobi distribution `∫_{−λ₊}^{λ} ρ_μ`.
pub fn jacobi_cdf(mu: f64, lambda: f64) -> Result<f64> {
    check_mu(mu)?;
    let a = jacobi_edge(mu);
    if lambda <= -a {
        return Ok(0.0);
    }
    if lambda >= a {
        return Ok(1.0);
    }
    let upper = (lambda / a).asin();
    integrate(|t| density_in_angle(mu, t), -FRAC_PI_2, upper, 1e-13)
}

/// Mean binary entropy per block eigenvalue,
/// `log 2 − 1 − ((1−μ)/μ) log(1−μ)`.
pub fn mean_h2_closed(mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(LN_2 - 1.0 - (1.0 - mu) / mu * (-mu).ln_1p())
}

/// `∫ H₂((λ+1)/2) ρ_μ(λ) dλ` by adaptive quadrature in `θ`, `λ = λ₊ sin θ`.
pub fn mean_h2_quadrature(mu: f64) -> Result<f64> {
    check_mu(mu)?;
    integrate(|t| h2_integrand(mu, t), -FRAC_PI_2, FRAC_PI_2, 1e-12)
}

/// Uncorrelated-eigenvalue estimate `ℓ log 2 − ℓ − (n−ℓ) log(1 − ℓ/n)`.
pub fn entropy_approx(ell: usize, n: usize) -> Result<f64> {
    if 2 * ell > n {
        return Err(range_err("block size", format!("need ell <= n/2, got {ell} for n = {n}")));
    }
    let (l, nf) = (ell as f64, n as f64);
    Ok(l * LN_2 - l - (nf - l) * (-l / nf).ln_1p())
}

/// Digamma function `Ψ(x) = Γ'(x)/Γ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(range_err("digamma argument", format!("need x > 0, got {x}")));
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < 8.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let z = inv * inv;
    // Σ B_2k / (2k x^2k), k = 1..7
    let series = z
        * (1.0 / 12.0
            - z * (1.0 / 120.0
                - z * (1.0 / 252.0 - z * (1.0 / 240.0 - z * (1.0 / 132.0 - z * (691.0 / 32760.0 - z / 12.0))))));
    Ok(shift + x.ln() - 0.5 * inv - series)
}

fn check_exact(ell: usize, n: usize, m: usize) -> Result<()> {
    if n == 0 || m > n {
        return Err(range_err("particle number", format!("m = {m}, n = {n}")));
    }
    if 2 * ell > n {
        return Err(range_err("block size", format!("need ell <= n/2, got {ell} for n = {n}")));
    }
    Ok(())
}

/// Exact ensemble mean of the block entropy,
/// `1 − μ(1+n) − mμΨ(m) + nΨ(n) + μ(m−n)Ψ(n−m) + (ℓ−n)Ψ(n−ℓ+1)`.
pub fn entropy_exact(ell: usize, n: usize, m: usize) -> Result<f64> {
    check_exact(ell, n, m)?;
    let (l, nf, mf) = (ell as f64, n as f64, m as f64);
    let mu = l / nf;
    let particles = if m == 0 { 0.0 } else { mf * mu * digamma(mf)? };
    let holes = if m == n { 0.0 } else { mu * (mf - nf) * digamma(nf - mf)? };
    Ok(1.0 - mu * (1.0 + nf) - particles + nf * digamma(nf)? + holes + (l - nf) * digamma(nf - l + 1.0)?)
}

/// Leading-order ensemble variance of the block entropy. At half filling it
/// reduces to `log(1−μ) + μ + μ²`.
pub fn entropy_variance(ell: usize, n: usize, m: usize) -> Result<f64> {
    check_exact(ell, n, m)?;
    if m == 0 || m == n {
        return Err(range_err("particle number", "variance needs 0 < m < n"));
    }
    let mu = ell as f64 / n as f64;
    let fill = m as f64 / n as f64;
    let lg = (1.0 / fill - 1.0).ln();
    Ok((-mu).ln_1p() + mu + mu * mu + mu * mu * (2.0 * fill - 1.0) * lg + mu * (mu - 1.0) * (fill - 1.0) * fill * lg * lg)
}

/// Page's mean entropy of `ell` qubits out of `n`, `ℓ log 2 − 2^{−(n−2ℓ+1)}`.
pub fn page_law(ell: usize, n: usize) -> Result<f64> {
    if 2 * ell > n {
        return Err(range_err("block size", format!("need ell <= n/2, got {ell} for n = {n}")));
    }
    let exponent = n as i32 - 2 * ell as i32 + 1;
    Ok(ell as f64 * LN_2 - 0.5f64.powi(exponent))
}

/// Block statistics gathered from independent random Slater samples.
#[derive(Debug, Clone)]
pub struct EnsembleSample {
    pub n: usize,
    pub m: usize,
    pub ells: Vec<usize>,
    /// `entropies[b][s]`: entropy of the left block `ells[b]` in sample `s`.
    pub entropies: Vec<Vec<f64>>,
    /// `lambdas[b]`: pooled `2ν − 1` block eigenvalues for `ells[b]`.
    pub lambdas: Vec<Vec<f64>>,
}

/// Draws `samples` random Slater states and records left-block entropies and
/// spectra. Sample `s` uses stream `s` of a ChaCha generator seeded with
/// `seed`, so results do not depend on thread scheduling.
pub fn sample_ensemble(n: usize, m: usize, ells: &[usize], samples: usize, seed: u64) -> Result<EnsembleSample> {
    for &ell in ells {
        if ell > n {
            return Err(range_err("block size", format!("{ell} exceeds n = {n}")));
        }
    }
    let per_sample: Vec<Vec<Vec<f64>>> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let state = sample_random_slater(n, m, &mut rng)?;
            Ok(ells
                .iter()
                .map(|&ell| subset_spectrum(&state, &(0..ell).collect::<Vec<_>>()))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut entropies = vec![Vec::with_capacity(samples); ells.len()];
    let mut lambdas = vec![Vec::new(); ells.len()];
    for spectra in per_sample {
        for (b, nus) in spectra.into_iter().enumerate() {
            entropies[b].push(entropy_of_spectrum(&nus));
            lambdas[b].extend(nus.iter().map(|v| 2.0 * v - 1.0));
        }
    }
    Ok(EnsembleSample {
        n,
        m,
        ells: ells.to_vec(),
        entropies,
        lambdas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(RseParams::new(10, 11, 2).is_err());
        assert!(RseParams::new(10, 5, 6).is_err());
        assert!(RseParams::new(10, 5, 0).is_err());
        assert_eq!(RseParams::new(16, 8, 4).unwrap().mu(), 0.25);
    }

    #[test]
    fn sampler_is_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_random_slater(20, 7, &mut rng).unwrap();
        assert!(s.orthonormality_defect() < 1e-12);
        assert!(sample_random_slater(3, 4, &mut rng).is_err());
    }

    #[test]
    fn arcsine_law_at_half() {
        for lam in [-0.9, -0.3, 0.0, 0.5, 0.99] {
            let want = 1.0 / (PI * (1.0f64 - lam * lam).sqrt());
            assert!((jacobi_density(0.5, lam).unwrap() - want).abs() < 1e-12);
        }
        assert!(jacobi_density(0.0, 0.1).is_err());
        assert!(jacobi_density(0.6, 0.1).is_err());
    }

    #[test]
    fn density_vanishes_at_edges() {
        for mu in [0.1, 0.25, 0.4] {
            let a = jacobi_edge(mu);
            assert!(jacobi_density(mu, a * (1.0 - 1e-12)).unwrap() < 1e-4);
            assert_eq!(jacobi_density(mu, a * 1.01).unwrap(), 0.0);
            assert_eq!(jacobi_density(mu, -a * 1.01).unwrap(), 0.0);
        }
    }

    #[test]
    fn cdf_endpoints() {
        let a = jacobi_edge(0.2);
        assert_eq!(jacobi_cdf(0.2, -a).unwrap(), 0.0);
        assert!((jacobi_cdf(0.2, 0.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((jacobi_cdf(0.2, a * 0.999_999_9).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn closed_form_values() {
        assert!((mean_h2_closed(0.5).unwrap() - (2.0 * LN_2 - 1.0)).abs() < 1e-15);
        let quarter = LN_2 - 1.0 - 3.0 * (0.75f64).ln();
        assert!((mean_h2_closed(0.25).unwrap() - quarter).abs() < 1e-14);
        assert!((quarter - 0.556).abs() < 1e-3);
        assert!((mean_h2_closed(1e-9).unwrap() - LN_2).abs() < 1e-8);
        assert!(mean_h2_closed(0.7).is_err());
    }

    #[test]
    fn half_range_doubling() {
        for mu in [0.1, 0.3, 0.5] {
            let full = mean_h2_quadrature(mu).unwrap();
            let half = 2.0 * integrate(|t| h2_integrand(mu, t), 0.0, FRAC_PI_2, 1e-13).unwrap();
            assert!((full - half).abs() < 1e-10);
        }
    }

    #[test]
    fn quadrature_matches_closed_form_at_half() {
        assert!((mean_h2_quadrature(0.5).unwrap() - (2.0 * LN_2 - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn approx_law() {
        assert_eq!(entropy_approx(0, 64).unwrap(), 0.0);
        let n = 100;
        assert!((entropy_approx(50, n).unwrap() - n as f64 * (LN_2 - 0.5)).abs() < 1e-12);
        let via_mean = 64.0 * mean_h2_closed(0.25).unwrap();
        assert!((entropy_approx(64, 256).unwrap() - via_mean).abs() < 1e-10);
        assert!(entropy_approx(51, 100).is_err());
    }

    #[test]
    fn digamma_known_values() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-14);
        assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-14);
        assert!((digamma(0.5).unwrap() + EULER_GAMMA + 2.0 * LN_2).abs() < 1e-14);
        for x in [0.5, 3.7, 100.0] {
            let r = digamma(x + 1.0).unwrap() - digamma(x).unwrap() - 1.0 / x;
            assert!(r.abs() < 1e-12);
        }
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.5).is_err());
    }

    #[test]
    fn digamma_matches_independent_implementation() {
        for &x in &[0.1, 0.75, 1.4616321449683622, 2.5, 7.99, 8.0, 31.4, 1e4] {
            let ours = digamma(x).unwrap();
            let theirs = statrs::function::gamma::digamma(x);
            assert!((ours - theirs).abs() <= 1e-12 * theirs.abs().max(1.0), "x={x}: {ours} vs {theirs}");
        }
    }

    #[test]
    fn single_site_block_simplifies() {
        for n in [8usize, 32, 64, 256] {
            let full = entropy_exact(1, n, n / 2).unwrap();
            let nf = n as f64;
            let simple = -1.0 / nf + digamma(nf).unwrap() - digamma(nf / 2.0).unwrap();
            assert!((full - simple).abs() < 1e-12);
        }
        assert!(entropy_exact(0, 16, 8).unwrap().abs() < 1e-12);
        assert!(entropy_exact(9, 16, 8).is_err());
        assert!(entropy_exact(4, 16, 16).is_ok());
    }

    #[test]
    fn exact_law_close_to_approximation() {
        let exact = entropy_exact(128, 256, 128).unwrap();
        let approx = entropy_approx(128, 256).unwrap();
        assert!(((exact - approx) / exact).abs() <= 0.01);
    }

    #[test]
    fn exact_law_is_increasing_and_concave() {
        let n = 64;
        let s: Vec<f64> = (0..=n / 2).map(|l| entropy_exact(l, n, n / 2).unwrap()).collect();
        for l in 1..s.len() {
            assert!(s[l] > s[l - 1]);
        }
        for l in 1..s.len() - 1 {
            assert!(s[l + 1] - 2.0 * s[l] + s[l - 1] <= 1e-12);
        }
    }

    #[test]
    fn variance_half_filling() {
        let v = entropy_variance(32, 64, 32).unwrap();
        assert!((v - (0.5f64.ln() + 0.75)).abs() < 1e-14);
        assert!((v - 0.0569).abs() < 1e-4);
        assert!(entropy_variance(1, 1_000_000, 500_000).unwrap().abs() < 1e-11);
        assert!(entropy_variance(2, 16, 0).is_err());
    }

    #[test]
    fn page_values() {
        let n = 20;
        assert!((page_law(10, n).unwrap() - (10.0 * LN_2 - 0.5)).abs() < 1e-15);
        assert!((page_law(0, n).unwrap() + 0.5f64.powi(21)).abs() < 1e-20);
        assert!(page_law(11, n).is_err());
    }

    #[test]
    fn ensemble_is_reproducible() {
        let a = sample_ensemble(16, 8, &[4, 8], 12, 99).unwrap();
        let b = sample_ensemble(16, 8, &[4, 8], 12, 99).unwrap();
        assert_eq!(a.entropies, b.entropies);
        assert_eq!(a.lambdas[0].len(), 12 * 4);
    }
}
