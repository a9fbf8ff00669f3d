//! One-period propagator, quasi-energies and their level statistics.
//!
//! The Floquet Hamiltonian is never formed as a matrix logarithm: all
//! quantities come from the eigendecomposition of the one-period unitary,
//! obtained through a complex Schur factorization (diagonal for a normal
//! matrix, with orthonormal Schur vectors even inside degenerate multiplets).

use std::f64::consts::PI;

use nalgebra::{linalg::Schur, DMatrix};

use crate::error::{range_err, Error, Result};
use crate::evolve::{ModeMatrix, PropagatorCache};
use crate::linalg::{hermitian_eigenvalues, isometry_defect};
use crate::observables::OccupationVector;
use crate::C64;

/// Literature values of the mean double ratio `⟨r̃⟩`.
pub const R_TILDE_POISSON: f64 = 0.38;
pub const R_TILDE_GOE: f64 = 0.54;
pub const R_TILDE_GUE: f64 = 0.59;

/// Eigenvalues of the one-period unitary closer than this are one multiplet.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct FloquetData {
    pub u_period: DMatrix<C64>,
    /// Quasi-energies in `(−π/T, π/T]`, ascending.
    pub quasi: Vec<f64>,
    /// Floquet modes as columns, in the order of `quasi`.
    pub modes: DMatrix<C64>,
    /// Unitary eigenvalues `exp(−i ε_k T)`, in the order of `quasi`.
    pub eigenvalues: Vec<C64>,
    pub period: f64,
}

/// One-period propagator `G_{n−3} ⋯ G_1` of the obstacle schedule.
pub fn period_propagator(cache: &PropagatorCache) -> DMatrix<C64> {
    cache.period().clone()
}

/// Propagator, quasi-energies and Floquet modes for the cached schedule.
pub fn floquet_data(cache: &PropagatorCache) -> Result<FloquetData> {
    let u = period_propagator(cache);
    let period = cache.params().period();
    let defect = isometry_defect(&u);
    if defect > 1e-10 {
        return Err(Error::Numerical(format!("period propagator unitarity defect {defect:e}")));
    }
    let (quasi, modes, eigenvalues) = quasi_energies(&u, period)?;
    Ok(FloquetData {
        u_period: u,
        quasi,
        modes,
        eigenvalues,
        period,
    })
}

/// Diagonalizes a unitary and maps its eigenphases to quasi-energies
/// `ε = −arg(λ)/T` in `(−π/T, π/T]`, sorted ascending.
pub fn quasi_energies(u: &DMatrix<C64>, period: f64) -> Result<(Vec<f64>, DMatrix<C64>, Vec<C64>)> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(range_err("period", format!("need T > 0, got {period}")));
    }
    if !u.is_square() {
        return Err(Error::Dimension(format!("{}×{} propagator", u.nrows(), u.ncols())));
    }
    let defect = isometry_defect(u);
    if defect > 1e-8 {
        return Err(Error::Numerical(format!("input not unitary, defect {defect:e}")));
    }
    let n = u.nrows();
    let schur = Schur::try_new(u.clone(), f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let mut off = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            off = off.max(t[(i, j)].norm());
        }
    }
    if off > 1e-8 {
        return Err(Error::Numerical(format!("Schur form not diagonal, residue {off:e}")));
    }
    let mut entries: Vec<(f64, usize)> = (0..n)
        .map(|k| {
            let mut e = -t[(k, k)].arg();
            if e <= -PI {
                e = PI;
            }
            (e / period, k)
        })
        .collect();
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let quasi = entries.iter().map(|e| e.0).collect();
    let modes = DMatrix::from_fn(n, n, |i, k| q[(i, entries[k].1)]);
    let eigenvalues = entries.iter().map(|e| t[(e.1, e.1)]).collect();
    Ok((quasi, modes, eigenvalues))
}

/// How spacings are scaled to unit mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Unfolding {
    /// One global mean over the trimmed spectrum.
    Global,
    /// Each spacing divided by the mean over a centred window of this width.
    LocalWindow(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct SpacingOptions {
    /// Levels dropped at each end; `None` means `len / 32`.
    pub edge_trim: Option<usize>,
    pub unfolding: Unfolding,
}

impl Default for SpacingOptions {
    fn default() -> Self {
        SpacingOptions {
            edge_trim: None,
            unfolding: Unfolding::Global,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpacingStats {
    pub spacings: Vec<f64>,
    /// Spacings scaled to unit mean.
    pub normalized: Vec<f64>,
    /// `r̃_n = min(s_n, s_{n−1}) / max(s_n, s_{n−1})`.
    pub ratios: Vec<f64>,
    pub r_tilde_mean: f64,
}

impl SpacingStats {
    /// Empirical CDF of the normalized spacings as `(s, F(s))` steps.
    pub fn empirical_cdf(&self) -> Vec<(f64, f64)> {
        let mut s = self.normalized.clone();
        s.sort_by(f64::total_cmp);
        let len = s.len() as f64;
        s.into_iter()
            .enumerate()
            .map(|(k, v)| (v, (k + 1) as f64 / len))
            .collect()
    }
}

/// Level-spacing statistics of a spectrum.
pub fn spacing_statistics(levels: &[f64], opts: SpacingOptions) -> Result<SpacingStats> {
    if levels.len() < 10 {
        return Err(Error::TooShort {
            need: 10,
            got: levels.len(),
        });
    }
    let mut sorted = levels.to_vec();
    sorted.sort_by(f64::total_cmp);
    let trim = opts.edge_trim.unwrap_or(sorted.len() / 32);
    if sorted.len() < 2 * trim + 3 {
        return Err(Error::TooShort {
            need: 2 * trim + 3,
            got: sorted.len(),
        });
    }
    let kept = &sorted[trim..sorted.len() - trim];
    let spacings: Vec<f64> = kept.windows(2).map(|w| w[1] - w[0]).collect();

    let normalized = match opts.unfolding {
        Unfolding::Global => {
            let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
            if mean <= 0.0 {
                return Err(Error::Numerical("spectrum is fully degenerate".into()));
            }
            spacings.iter().map(|s| s / mean).collect()
        }
        Unfolding::LocalWindow(width) => {
            let half = width.max(2) / 2;
            (0..spacings.len())
                .map(|k| {
                    let lo = k.saturating_sub(half);
                    let hi = (k + half).min(spacings.len());
                    let local = spacings[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
                    if local > 0.0 {
                        spacings[k] / local
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    };

    let ratios: Vec<f64> = spacings
        .windows(2)
        .filter_map(|w| {
            let (lo, hi) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
            (hi > 0.0).then(|| lo / hi)
        })
        .collect();
    if ratios.is_empty() {
        return Err(Error::Numerical("no nonzero spacings".into()));
    }
    let r_tilde_mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(SpacingStats {
        spacings,
        normalized,
        ratios,
        r_tilde_mean,
    })
}

/// Reference spacing distributions at unit mean spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceEnsemble {
    Poisson,
    Goe,
}

impl ReferenceEnsemble {
    /// Spacing density: `e^{−s}` or the Wigner surmise `(π/2) s e^{−π s²/4}`.
    pub fn density(self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        match self {
            ReferenceEnsemble::Poisson => (-s).exp(),
            ReferenceEnsemble::Goe => 0.5 * PI * s * (-0.25 * PI * s * s).exp(),
        }
    }

    pub fn cdf(self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self {
            ReferenceEnsemble::Poisson => -(-s).exp_m1(),
            ReferenceEnsemble::Goe => -(-0.25 * PI * s * s).exp_m1(),
        }
    }

    pub fn r_tilde_mean(self) -> f64 {
        match self {
            ReferenceEnsemble::Poisson => R_TILDE_POISSON,
            ReferenceEnsemble::Goe => R_TILDE_GOE,
        }
    }
}

/// CDF of the reference spacing distribution as a plain function.
pub fn reference_spacing_cdf(kind: ReferenceEnsemble) -> fn(f64) -> f64 {
    match kind {
        ReferenceEnsemble::Poisson => |s| ReferenceEnsemble::Poisson.cdf(s),
        ReferenceEnsemble::Goe => |s| ReferenceEnsemble::Goe.cdf(s),
    }
}

/// Groups of Floquet-mode indices whose unitary eigenvalues coincide within
/// [`DEGENERACY_TOL`], including multiplets straddling the `±π/T` cut.
pub fn multiplets(data: &FloquetData) -> Vec<Vec<usize>> {
    let n = data.eigenvalues.len();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match groups.last_mut() {
            Some(g) if (data.eigenvalues[k] - data.eigenvalues[*g.last().unwrap()]).norm() < DEGENERACY_TOL => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    if groups.len() > 1 {
        let first = groups[0][0];
        let last = *groups.last().unwrap().last().unwrap();
        if (data.eigenvalues[first] - data.eigenvalues[last]).norm() < DEGENERACY_TOL {
            let tail = groups.pop().unwrap();
            groups[0].extend(tail);
        }
    }
    groups
}

/// Floquet occupations `n^F_k = f_k† M f_k`, in quasi-energy order. Inside a
/// degenerate multiplet the values are the (ascending) eigenvalues of `M`
/// projected on the multiplet, which do not depend on the chosen basis.
pub fn floquet_occupations(data: &FloquetData, state: &ModeMatrix) -> Result<OccupationVector> {
    let n = data.modes.nrows();
    if state.n_sites() != n {
        return Err(Error::Dimension(format!(
            "state on {} sites, Floquet modes on {n}",
            state.n_sites()
        )));
    }
    let overlaps = data.modes.ad_mul(state.phi());
    let mut occ = vec![0.0; n];
    for group in multiplets(data) {
        if group.len() == 1 {
            let k = group[0];
            occ[k] = overlaps.row(k).iter().map(|z| z.norm_sqr()).sum();
        } else {
            let rows = DMatrix::from_fn(group.len(), overlaps.ncols(), |a, c| overlaps[(group[a], c)]);
            let vals = hermitian_eigenvalues(&rows * rows.adjoint());
            let mut slots = group.clone();
            slots.sort_unstable();
            for (slot, v) in slots.into_iter().zip(vals) {
                occ[slot] = v;
            }
        }
    }
    Ok(OccupationVector(occ))
}
