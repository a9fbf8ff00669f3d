//! Slater-state propagation under the piecewise-constant obstacle drive.
//!
//! A Slater determinant is stored as its `n × m` matrix of occupied modes.
//! The correlation kernel `M = φ φ†` is the transpose of `C_ij = ⟨c†_i c_j⟩`;
//! both share diagonals and the spectra of principal submatrices, so every
//! observable here is computed from `M`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{range_err, Error, Result};
use crate::lattice::{schedule, ChainParams, HoppingMatrix};
use crate::linalg::{isometry_defect, qr_positive, real_mul_complex, real_tr_mul_complex, sorted_symmetric_eigen};
use crate::C64;

/// Occupied single-particle modes of a Slater determinant, one per column.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMatrix {
    phi: DMatrix<C64>,
}

impl ModeMatrix {
    /// Wraps `phi` after checking its columns are orthonormal to `1e-10`.
    pub fn new(phi: DMatrix<C64>) -> Result<Self> {
        if phi.ncols() > phi.nrows() {
            return Err(Error::Dimension(format!(
                "{} modes on {} sites",
                phi.ncols(),
                phi.nrows()
            )));
        }
        let defect = isometry_defect(&phi);
        if defect > 1e-10 {
            return Err(Error::Numerical(format!("modes not orthonormal, defect {defect:e}")));
        }
        Ok(ModeMatrix { phi })
    }

    pub(crate) fn from_raw(phi: DMatrix<C64>) -> Self {
        ModeMatrix { phi }
    }

    /// The empty (zero-particle) state on `n` sites.
    pub fn vacuum(n: usize) -> Self {
        ModeMatrix {
            phi: DMatrix::zeros(n, 0),
        }
    }

    pub fn phi(&self) -> &DMatrix<C64> {
        &self.phi
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.phi
    }

    pub fn n_sites(&self) -> usize {
        self.phi.nrows()
    }

    pub fn n_particles(&self) -> usize {
        self.phi.ncols()
    }

    /// Correlation kernel `M = φ φ†`.
    pub fn correlation(&self) -> DMatrix<C64> {
        &self.phi * self.phi.adjoint()
    }

    /// Max-norm of `φ† φ − I`.
    pub fn orthonormality_defect(&self) -> f64 {
        isometry_defect(&self.phi)
    }

    /// Re-orthonormalizes the modes by QR with a positive triangular diagonal.
    /// The spanned subspace, and hence the physical state, is unchanged.
    pub fn reorthonormalize(&mut self) {
        if self.phi.ncols() == 0 {
            return;
        }
        let phi = std::mem::replace(&mut self.phi, DMatrix::zeros(0, 0));
        self.phi = qr_positive(phi);
    }
}

/// Ground state with `m` particles: the `m` eigenvectors of `h` with the
/// largest eigenvalues, i.e. the lowest levels of `h_sp = −h`.
pub fn ground_state(h: &HoppingMatrix, m: usize) -> Result<ModeMatrix> {
    let n = h.n();
    if m > n {
        return Err(range_err("particle number", format!("m = {m} exceeds n = {n}")));
    }
    let (_, vectors) = sorted_symmetric_eigen(h.matrix());
    let mut phi = DMatrix::<C64>::zeros(n, m);
    for k in 0..m {
        let src = n - 1 - k;
        for i in 0..n {
            phi[(i, k)] = C64::new(vectors[(i, src)], 0.0);
        }
    }
    Ok(ModeMatrix { phi })
}

/// Exact evolution operator `exp(−i h_sp τ) = exp(i h τ)` for one dwell interval.
#[derive(Debug, Clone)]
pub struct StepPropagator {
    g: DMatrix<C64>,
    basis: DMatrix<f64>,
    phases: DVector<C64>,
    obstacle: Option<usize>,
    tau: f64,
}

impl StepPropagator {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.g
    }

    pub fn obstacle(&self) -> Option<usize> {
        self.obstacle
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    /// `g · a` through the real eigenbasis: two real products and a phase.
    pub fn apply(&self, a: &DMatrix<C64>) -> DMatrix<C64> {
        let mut coeffs = real_tr_mul_complex(&self.basis, a);
        for (i, mut row) in coeffs.row_iter_mut().enumerate() {
            let p = self.phases[i];
            row.iter_mut().for_each(|z| *z *= p);
        }
        real_mul_complex(&self.basis, &coeffs)
    }
}

/// Builds the step propagator for `h` held fixed during `tau`.
pub fn step_propagator(h: &HoppingMatrix, tau: f64) -> Result<StepPropagator> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(range_err("dwell time", format!("need tau >= 0, got {tau}")));
    }
    let (values, basis) = sorted_symmetric_eigen(h.matrix());
    let phases = DVector::from_iterator(values.len(), values.iter().map(|&e| C64::from_polar(1.0, e * tau)));
    let right = DMatrix::from_fn(basis.ncols(), basis.nrows(), |k, j| phases[k] * basis[(j, k)]);
    let g = real_mul_complex(&basis, &right);
    Ok(StepPropagator {
        g,
        basis,
        phases,
        obstacle: h.obstacle(),
        tau,
    })
}

/// Applies one step propagator to the state.
pub fn advance(state: &ModeMatrix, g: &StepPropagator) -> Result<ModeMatrix> {
    if state.n_sites() != g.n() {
        return Err(Error::Dimension(format!(
            "state on {} sites, propagator on {}",
            state.n_sites(),
            g.n()
        )));
    }
    Ok(ModeMatrix {
        phi: g.apply(&state.phi),
    })
}

/// Ordered product of step propagators, the first element applied first.
pub fn compose(n: usize, steps: &[StepPropagator]) -> DMatrix<C64> {
    steps.iter().fold(DMatrix::identity(n, n), |u, g| g.apply(&u))
}

/// Step propagators of every obstacle position for one `(n, tau)`, plus the
/// lazily built one-period propagator.
#[derive(Debug)]
pub struct PropagatorCache {
    params: ChainParams,
    steps: Vec<StepPropagator>,
    hamiltonians: Vec<HoppingMatrix>,
    period: OnceLock<DMatrix<C64>>,
}

impl PropagatorCache {
    pub fn new(params: ChainParams) -> Result<Self> {
        let hamiltonians = schedule(&params);
        let steps = hamiltonians
            .iter()
            .map(|h| step_propagator(h, params.tau()))
            .collect::<Result<Vec<_>>>()?;
        Ok(PropagatorCache {
            params,
            steps,
            hamiltonians,
            period: OnceLock::new(),
        })
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    /// Step propagator for schedule slot `s` (obstacle position `s + 1`).
    pub fn step(&self, s: usize) -> &StepPropagator {
        &self.steps[s]
    }

    pub fn steps(&self) -> &[StepPropagator] {
        &self.steps
    }

    /// Hopping matrix active in schedule slot `s`.
    pub fn hamiltonian(&self, s: usize) -> &HoppingMatrix {
        &self.hamiltonians[s]
    }

    /// One-period propagator `G_{n−3} ⋯ G_2 G_1`.
    pub fn period(&self) -> &DMatrix<C64> {
        self.period.get_or_init(|| compose(self.params.n(), &self.steps))
    }
}

/// When observer hooks fire during [`evolve_cycles`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cadence {
    /// At the start of every dwell interval (after the switch).
    PerStep,
    /// At the start of every cycle, `t = k T`.
    CycleStart,
}

/// How a cycle is applied to the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Propagation {
    /// Use the cached one-period propagator whenever the cadence allows it.
    Auto,
    /// Always apply the `n − 3` step propagators in order.
    Stepwise,
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub cadence: Cadence,
    /// Re-orthonormalize every this many cycles; `0` disables it.
    pub reorthonormalize_every: usize,
    pub propagation: Propagation,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            cadence: Cadence::CycleStart,
            reorthonormalize_every: 1,
            propagation: Propagation::Auto,
        }
    }
}

/// Read-only view of the state handed to observer hooks.
#[derive(Debug, Clone, Copy)]
pub struct Snapshot<'a> {
    pub cycle: usize,
    /// Schedule slot about to be applied, `0..n−3`.
    pub step: usize,
    pub time: f64,
    /// Active obstacle position (1-based).
    pub obstacle: usize,
    pub hamiltonian: &'a HoppingMatrix,
    pub state: &'a ModeMatrix,
}

/// Evolves `state` through `n_cycles` full periods, calling `hook` at the
/// instants selected by the cadence, and returns the final state.
pub fn evolve_cycles<F>(
    mut state: ModeMatrix,
    cache: &PropagatorCache,
    n_cycles: usize,
    opts: EvolveOptions,
    mut hook: F,
) -> Result<ModeMatrix>
where
    F: FnMut(&Snapshot<'_>),
{
    if n_cycles == 0 {
        return Err(range_err("cycle count", "need at least one cycle"));
    }
    let params = cache.params();
    if state.n_sites() != params.n() {
        return Err(Error::Dimension(format!(
            "state on {} sites, chain has {}",
            state.n_sites(),
            params.n()
        )));
    }
    let positions = params.positions();
    let tau = params.tau();
    let use_period = opts.propagation == Propagation::Auto && opts.cadence == Cadence::CycleStart;

    for cycle in 0..n_cycles {
        if use_period {
            hook(&Snapshot {
                cycle,
                step: 0,
                time: (cycle * positions) as f64 * tau,
                obstacle: 1,
                hamiltonian: cache.hamiltonian(0),
                state: &state,
            });
            state.phi = cache.period() * &state.phi;
        } else {
            for s in 0..positions {
                if s == 0 || opts.cadence == Cadence::PerStep {
                    hook(&Snapshot {
                        cycle,
                        step: s,
                        time: (cycle * positions + s) as f64 * tau,
                        obstacle: s + 1,
                        hamiltonian: cache.hamiltonian(s),
                        state: &state,
                    });
                }
                state.phi = cache.step(s).apply(&state.phi);
            }
        }
        if opts.reorthonormalize_every > 0 && (cycle + 1) % opts.reorthonormalize_every == 0 {
            state.reorthonormalize();
        }
    }
    Ok(state)
}
