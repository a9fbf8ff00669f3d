//! Block entanglement of Slater states and the entanglement-link matrix.

use std::ops::Range;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{range_err, Error, Result};
use crate::evolve::ModeMatrix;
use crate::linalg::hermitian_eigenvalues;
use crate::C64;

/// Eigenvalues closer than this to 0 or 1 contribute nothing to the entropy.
pub const CLAMP: f64 = 1e-12;

/// Slack allowed outside `[0, 1]` before an occupation is rejected.
const WINDOW: f64 = 1e-10;

/// Natural-log binary entropy `−x log x − (1−x) log(1−x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(x >= -WINDOW && x <= 1.0 + WINDOW) {
        return Err(range_err("occupation", format!("{x} outside [0, 1]")));
    }
    Ok(h2_clamped(x))
}

fn h2_clamped(x: f64) -> f64 {
    if x <= CLAMP || x >= 1.0 - CLAMP {
        0.0
    } else {
        -x * x.ln() - (1.0 - x) * (1.0 - x).ln()
    }
}

/// Sum of binary entropies of a block spectrum, clamping roundoff excursions.
pub fn entropy_of_spectrum(nus: &[f64]) -> f64 {
    nus.iter().map(|&v| h2_clamped(v.clamp(0.0, 1.0))).sum()
}

/// Spectrum of the correlation kernel restricted to a contiguous block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpectrum {
    pub block: Range<usize>,
    /// Ascending eigenvalues `ν_k`.
    pub nus: Vec<f64>,
}

impl BlockSpectrum {
    pub fn entropy(&self) -> f64 {
        entropy_of_spectrum(&self.nus)
    }
}

/// Eigenvalues of the principal submatrix of `M = φ φ†` on `sites`, ascending.
pub fn subset_spectrum(state: &ModeMatrix, sites: &[usize]) -> Vec<f64> {
    let phi = state.phi();
    let m = phi.ncols();
    let rows = DMatrix::<C64>::from_fn(sites.len(), m, |a, k| phi[(sites[a], k)]);
    hermitian_eigenvalues(&rows * rows.adjoint())
}

fn check_block(state: &ModeMatrix, block: &Range<usize>) -> Result<()> {
    if block.start > block.end || block.end > state.n_sites() {
        return Err(range_err(
            "block",
            format!("{}..{} not inside 0..{}", block.start, block.end, state.n_sites()),
        ));
    }
    Ok(())
}

/// Block spectrum of the sites `block` (0-based, half-open).
pub fn block_spectrum(state: &ModeMatrix, block: Range<usize>) -> Result<BlockSpectrum> {
    check_block(state, &block)?;
    let sites: Vec<usize> = block.clone().collect();
    Ok(BlockSpectrum {
        nus: subset_spectrum(state, &sites),
        block,
    })
}

/// Entanglement entropy `Σ_k H₂(ν_k)` of a contiguous block.
pub fn block_entropy(state: &ModeMatrix, block: Range<usize>) -> Result<f64> {
    Ok(block_spectrum(state, block)?.entropy())
}

/// Entropy of the sites in `start..end`, evaluated on whichever of the block
/// and its complement is smaller.
fn contiguous_entropy(state: &ModeMatrix, start: usize, end: usize) -> f64 {
    let n = state.n_sites();
    let len = end - start;
    if len == 0 || len == n {
        return 0.0;
    }
    let sites: Vec<usize> = if 2 * len <= n {
        (start..end).collect()
    } else {
        (0..start).chain(end..n).collect()
    };
    entropy_of_spectrum(&subset_spectrum(state, &sites))
}

/// Entropies of the left blocks `0..ℓ` for `ℓ = 0..=n`.
pub fn entropy_profile(state: &ModeMatrix) -> Vec<f64> {
    let n = state.n_sites();
    (0..=n).map(|ell| contiguous_entropy(state, 0, ell)).collect()
}

/// Block entropies, entanglement links and their subdiagonal fractions.
#[derive(Debug, Clone)]
pub struct EntropyTable {
    /// `entropies[(i, j)]` is the entropy of `{i, …, j−1}` with periodic
    /// indices; wrapped blocks carry the entropy of their complement.
    pub entropies: DMatrix<f64>,
    /// Symmetric link matrix with zero diagonal. Summing it over `i ∈ A`,
    /// `j ∉ A` reproduces the entropy of any contiguous block `A`.
    pub links: DMatrix<f64>,
    /// `fractions[r]` is the share of the links on the `r`-th subdiagonal;
    /// `fractions[0] = 0`.
    pub fractions: Vec<f64>,
}

impl EntropyTable {
    pub fn n(&self) -> usize {
        self.links.nrows()
    }

    /// `Σ_{i ∈ A, j ∉ A} J_ij` for a contiguous block `A`.
    pub fn cut_weight(&self, block: Range<usize>) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for i in block.clone() {
            for j in (0..n).filter(|j| !block.contains(j)) {
                acc += self.links[(i, j)];
            }
        }
        acc
    }
}

/// Builds the full periodic-index entropy table and the entanglement links.
///
/// The raw second difference `S_{i,j} − S_{i+1,j} − S_{i,j+1} + S_{i+1,j+1}`
/// summed across the cut of a contiguous block telescopes to `S_A + S_Ā`;
/// the stored links are half of it so that the cut sum equals `S_A`.
pub fn entanglement_links(state: &ModeMatrix) -> Result<EntropyTable> {
    let n = state.n_sites();
    if n < 2 {
        return Err(range_err("site count", "links need at least two sites"));
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| if j > i { contiguous_entropy(state, i, j) } else { 0.0 })
                .collect()
        })
        .collect();
    let mut entropies = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            entropies[(i, j)] = rows[i][j];
            // {j, …, n−1, 0, …, i−1} is the complement of {i, …, j−1}
            entropies[(j, i)] = rows[i][j];
        }
    }
    let s = |i: usize, j: usize| entropies[(i % n, j % n)];
    let mut links = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (s(i, j) - s(i + 1, j) - s(i, j + 1) + s(i + 1, j + 1));
            links[(i, j)] = v;
            links[(j, i)] = v;
        }
    }
    let fractions = subdiagonal_fractions(&links)?;
    Ok(EntropyTable {
        entropies,
        links,
        fractions,
    })
}

/// `f_r = Σ_i J_{i,i+r} / Σ_{i<j} J_ij` for `r = 0..n`, with `f_0 = 0`.
pub fn subdiagonal_fractions(links: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = links.nrows();
    let mut per_r = vec![0.0; n];
    for (r, slot) in per_r.iter_mut().enumerate().skip(1) {
        *slot = (0..n - r).map(|i| links[(i, i + r)]).sum();
    }
    let total: f64 = per_r.iter().sum();
    if total.abs() < f64::MIN_POSITIVE || !total.is_finite() {
        return Err(Error::Numerical("entanglement links sum to zero".into()));
    }
    Ok(per_r.into_iter().map(|v| v / total).collect())
}
