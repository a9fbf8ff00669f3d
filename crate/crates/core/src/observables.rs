//! Energy, site densities and clean-chain mode occupations of a Slater state.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::ModeMatrix;
use crate::lattice::HoppingMatrix;
use crate::linalg::real_tr_mul_complex;
use crate::C64;

/// Energy expectation at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySample {
    pub t: f64,
    pub energy: f64,
}

/// Occupation numbers of a set of modes, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationVector(pub Vec<f64>);

impl OccupationVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// `E = −Σ_ij h_ij M_ij` against the given hopping matrix.
pub fn energy(state: &ModeMatrix, h: &HoppingMatrix) -> Result<f64> {
    let n = h.n();
    if state.n_sites() != n {
        return Err(Error::Dimension(format!(
            "state on {} sites, hopping matrix on {n}",
            state.n_sites()
        )));
    }
    let phi = state.phi();
    let hm = h.matrix();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            let hij = hm[(i, j)];
            if hij != 0.0 {
                // M_ij = Σ_k φ_ik conj(φ_jk)
                let mij = phi.row(i).iter().zip(phi.row(j).iter()).map(|(a, b)| a * b.conj()).sum::<C64>();
                acc -= mij * hij;
            }
        }
    }
    if acc.im.abs() > 1e-8 {
        return Err(Error::Numerical(format!("energy has imaginary part {:e}", acc.im)));
    }
    Ok(acc.re)
}

/// Diagonal of the correlation kernel, `⟨n_i⟩`.
pub fn site_densities(state: &ModeMatrix) -> Vec<f64> {
    state
        .phi()
        .row_iter()
        .map(|row| row.iter().map(|z| z.norm_sqr()).sum())
        .collect()
}

/// Standing-wave eigenmodes of the clean open chain,
/// `φ_k(i) = √(2/(n+1)) sin(π i k / (n+1))` with 1-based `i, k`.
#[derive(Debug, Clone)]
pub struct SineModes {
    basis: DMatrix<f64>,
}

impl SineModes {
    pub fn new(n: usize) -> Self {
        let norm = (2.0 / (n as f64 + 1.0)).sqrt();
        let basis = DMatrix::from_fn(n, n, |i, k| {
            norm * (PI * ((i + 1) * (k + 1)) as f64 / (n as f64 + 1.0)).sin()
        });
        SineModes { basis }
    }

    pub fn n(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Single-particle energy `−cos(π k / (n+1))` of mode `k` (1-based).
    pub fn energy(&self, k: usize) -> f64 {
        -(PI * k as f64 / (self.n() as f64 + 1.0)).cos()
    }
}

/// `n_k = φ_kᵀ M φ_k` for every clean-chain mode, lowest energy first.
pub fn mode_occupations(state: &ModeMatrix, modes: &SineModes) -> Result<OccupationVector> {
    if state.n_sites() != modes.n() {
        return Err(Error::Dimension(format!(
            "state on {} sites, modes on {}",
            state.n_sites(),
            modes.n()
        )));
    }
    let overlaps = real_tr_mul_complex(modes.basis(), state.phi());
    Ok(OccupationVector(
        overlaps
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum())
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{evolve_cycles, ground_state, EvolveOptions, PropagatorCache};
    use crate::lattice::{single_body_matrix, ChainParams};

    #[test]
    fn vacuum_has_zero_density() {
        assert!(site_densities(&ModeMatrix::vacuum(6)).iter().all(|&d| d == 0.0));
    }

    #[test]
    fn sine_modes_diagonalize_clean_chain() {
        let n = 10;
        let modes = SineModes::new(n);
        let h = HoppingMatrix::open_chain(n, None).unwrap();
        let b = modes.basis();
        let d = b.transpose() * h.matrix() * b;
        for k in 0..n {
            for l in 0..n {
                let want = if k == l { -modes.energy(k + 1) } else { 0.0 };
                assert!((d[(k, l)] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn ground_state_occupations_are_a_step() {
        let n = 32;
        let gs = ground_state(&HoppingMatrix::open_chain(n, None).unwrap(), n / 2).unwrap();
        let occ = mode_occupations(&gs, &SineModes::new(n)).unwrap();
        for (k, &v) in occ.values().iter().enumerate() {
            let want = if k < n / 2 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-10, "k={k} n_k={v}");
        }
        assert!((occ.total() - (n / 2) as f64).abs() < 1e-10);
    }

    #[test]
    fn occupations_bounded_and_conserved_under_drive() {
        let p = ChainParams::new(16, 1.3).unwrap();
        let cache = PropagatorCache::new(p).unwrap();
        let gs = ground_state(&single_body_matrix(&p, None).unwrap(), 8).unwrap();
        let modes = SineModes::new(16);
        let state = evolve_cycles(gs, &cache, 7, EvolveOptions::default(), |_| {}).unwrap();
        let occ = mode_occupations(&state, &modes).unwrap();
        assert!(occ.values().iter().all(|&v| (-1e-10..=1.0 + 1e-10).contains(&v)));
        assert!((occ.total() - 8.0).abs() < 1e-10);
        for d in site_densities(&state) {
            assert!((d - 0.5).abs() < 1e-8);
        }
        let h = cache.hamiltonian(0);
        assert!(energy(&state, h).is_ok());
    }
}
