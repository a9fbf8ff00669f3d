//! Reference generators and reporting helpers for the acceptance suite.

use std::io::Write;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use stirred_vacuum::floquet::{spacing_statistics, SpacingOptions};

/// Prints one verdict line straight to stdout, bypassing test capture.
pub fn report(id: u32, pass: bool, detail: &str) -> bool {
    let verdict = if pass { "PASS" } else { "FAIL" };
    line(&format!("criterion {id:>2}: {verdict}  {detail}"));
    pass
}

/// Supplementary line that carries no verdict.
pub fn info(id: u32, detail: &str) {
    line(&format!("criterion {id:>2}: info  {detail}"));
}

fn line(s: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{s}");
    let _ = out.flush();
}

/// Eigenvalues of a `n × n` GOE matrix (off-diagonal variance 1, diagonal 2).
pub fn goe_levels(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        a[(i, i)] = d * std::f64::consts::SQRT_2;
        for j in i + 1..n {
            let x: f64 = StandardNormal.sample(rng);
            a[(i, j)] = x;
            a[(j, i)] = x;
        }
    }
    a.symmetric_eigenvalues().as_slice().to_vec()
}

/// Mean `r̃` over `count` GOE matrices of size `n`.
pub fn goe_r_tilde(n: usize, count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals: Vec<f64> = (0..count)
        .map(|_| {
            spacing_statistics(&goe_levels(n, &mut rng), SpacingOptions::default())
                .expect("spectrum long enough")
                .r_tilde_mean
        })
        .collect();
    vals.iter().sum::<f64>() / count as f64
}

/// Mean `r̃` of a Poisson spectrum with `n` levels.
pub fn poisson_r_tilde(n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0;
    let levels: Vec<f64> = (0..n)
        .map(|_| {
            let s: f64 = Exp1.sample(&mut rng);
            x += s;
            x
        })
        .collect();
    spacing_statistics(&levels, SpacingOptions::default())
        .expect("spectrum long enough")
        .r_tilde_mean
}

/// Time after which the growth rate of a sampled curve drops the most,
/// comparing mean slopes over `window` samples on each side.
pub fn knee_time(times: &[f64], values: &[f64], window: usize) -> Option<f64> {
    if values.len() < 2 * window + 1 || window == 0 {
        return None;
    }
    let slope = |a: usize, b: usize| (values[b] - values[a]) / (times[b] - times[a]);
    (window..values.len() - window)
        .map(|k| (k, slope(k - window, k) - slope(k, k + window)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| times[k])
}
