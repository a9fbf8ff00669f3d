use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use stirred_vacuum::entanglement::subset_spectrum;
use stirred_vacuum::harness::stats::Histogram;
use stirred_vacuum::quad::integrate;
use stirred_vacuum::rse::{entropy_variance, jacobi_density, jacobi_edge, sample_ensemble, sample_random_slater};
use stirred_vacuum::{ModeMatrix, C64};

#[test]
fn ensemble_average_kernel_is_uniform() {
    let (n, m, samples) = (16, 8, 10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut sum = DMatrix::<C64>::zeros(n, n);
    let mut sum_sq = DMatrix::<f64>::zeros(n, n);
    for _ in 0..samples {
        let k = sample_random_slater(n, m, &mut rng).unwrap().correlation();
        sum_sq += k.map(|z| z.norm_sqr());
        sum += k;
    }
    let s = samples as f64;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mean = sum[(i, j)] / s;
            let target = if i == j { m as f64 / n as f64 } else { 0.0 };
            let var = (sum_sq[(i, j)] / s - mean.norm_sqr()).max(1e-300);
            let se = (var / s).sqrt();
            worst = worst.max((mean - C64::new(target, 0.0)).norm() / se);
        }
    }
    assert!(worst < 4.5, "largest deviation {worst} standard errors");
}

fn pooled_spectrum(states: &[ModeMatrix], sites: &[usize]) -> Vec<f64> {
    states.iter().flat_map(|s| subset_spectrum(s, sites)).collect()
}

#[test]
fn rotated_samples_have_the_same_block_statistics() {
    let (n, m) = (16, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let plain: Vec<ModeMatrix> = (0..500).map(|_| sample_random_slater(n, m, &mut rng).unwrap()).collect();
    let u = sample_random_slater(n, n, &mut ChaCha8Rng::seed_from_u64(99)).unwrap().into_inner();
    let rotated: Vec<ModeMatrix> = (0..500)
        .map(|_| {
            let s = sample_random_slater(n, m, &mut rng).unwrap();
            ModeMatrix::new(&u * s.phi()).unwrap()
        })
        .collect();
    let sites: Vec<usize> = (0..6).collect();
    let edges: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    let a = Histogram::with_edges(&pooled_spectrum(&plain, &sites), edges.clone());
    let b = Histogram::with_edges(&pooled_spectrum(&rotated, &sites), edges);
    assert_eq!(a.total(), 3000);
    assert_eq!(b.total(), 3000);
    // two-sample homogeneity test with equal totals
    let (stat, bins) = a
        .counts
        .iter()
        .zip(&b.counts)
        .filter(|(x, y)| **x + **y > 0)
        .fold((0.0, 0usize), |(acc, k), (&x, &y)| {
            (acc + (x as f64 - y as f64).powi(2) / (x + y) as f64, k + 1)
        });
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.01, "chi2 = {stat} over {bins} bins, p = {p}");
}

#[test]
fn jacobi_second_moment_matches_sampling() {
    let (n, ell, samples) = (256, 64, 60);
    let mu = ell as f64 / n as f64;
    let a = jacobi_edge(mu);
    let theory = integrate(|x| x * x * jacobi_density(mu, x).unwrap(), -a, a, 1e-11).unwrap();
    let ens = sample_ensemble(n, n / 2, &[ell], samples, 8).unwrap();
    let per_sample: Vec<f64> = ens.lambdas[0]
        .chunks(ell)
        .map(|c| c.iter().map(|x| x * x).sum::<f64>() / ell as f64)
        .collect();
    let k = per_sample.len() as f64;
    let mean = per_sample.iter().sum::<f64>() / k;
    let var = per_sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let se = (var / k).sqrt();
    assert!((mean - theory).abs() < 3.0 * se, "MC {mean} ± {se} vs {theory}");
}

#[test]
fn variance_law_tracks_sampling() {
    let (n, m) = (64, 32);
    let ells = [8, 16, 32];
    let ens = sample_ensemble(n, m, &ells, 2000, 31).unwrap();
    for (b, &ell) in ells.iter().enumerate() {
        let x = &ens.entropies[b];
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (x.len() - 1) as f64;
        let theory = entropy_variance(ell, n, m).unwrap();
        // sampling error of a variance over 2000 draws is about 3%
        assert!((var - theory).abs() / theory < 0.12, "ell={ell}: MC {var} vs {theory}");
    }
}
