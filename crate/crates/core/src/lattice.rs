//! Open hopping chain and the moving-obstacle schedule.
//!
//! Sites are indexed `0..n` in code. Obstacle positions keep the 1-based
//! numbering `1..=n-3` of the drive schedule: obstacle `i` removes the link
//! between the 0-based sites `i` and `i + 1`, so the chain is split into a
//! left part of `i + 1` sites and a right part of `n - i - 1` sites, neither
//! of which is a single site.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{range_err, Error, Result};
use crate::linalg::sorted_symmetric_eigen;

/// Hopping amplitude on every intact link.
pub const HOPPING: f64 = 0.5;

/// Size, dwell time and filling of a stirred chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ChainParams {
    n: usize,
    tau: f64,
    m: usize,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: usize,
    tau: f64,
    m: usize,
}

impl TryFrom<RawParams> for ChainParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        ChainParams::with_particles(raw.n, raw.tau, raw.m)
    }
}

impl From<ChainParams> for RawParams {
    fn from(p: ChainParams) -> Self {
        RawParams {
            n: p.n,
            tau: p.tau,
            m: p.m,
        }
    }
}

impl ChainParams {
    /// Half-filled chain of `n` sites with dwell time `tau`.
    pub fn new(n: usize, tau: f64) -> Result<Self> {
        Self::with_particles(n, tau, n / 2)
    }

    pub fn with_particles(n: usize, tau: f64, m: usize) -> Result<Self> {
        if n < 6 || n % 2 != 0 {
            return Err(range_err("site count", format!("need an even n >= 6, got {n}")));
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(range_err("dwell time", format!("need tau >= 0, got {tau}")));
        }
        if m > n {
            return Err(range_err("particle number", format!("m = {m} exceeds n = {n}")));
        }
        Ok(ChainParams { n, tau, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of obstacle positions visited per period, `n - 3`.
    pub fn positions(&self) -> usize {
        self.n - 3
    }

    /// Drive period `T = (n - 3) tau`.
    pub fn period(&self) -> f64 {
        self.positions() as f64 * self.tau
    }

    /// Mean obstacle velocity `1 / tau`.
    pub fn velocity(&self) -> f64 {
        1.0 / self.tau
    }
}

/// Real symmetric single-body matrix `h` with `H = -Σ h_ij c†_i c_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoppingMatrix {
    matrix: DMatrix<f64>,
    obstacle: Option<usize>,
}

impl HoppingMatrix {
    /// Open chain of `n` sites, optionally with the obstacle link removed.
    pub fn open_chain(n: usize, obstacle: Option<usize>) -> Result<Self> {
        if n < 2 {
            return Err(range_err("site count", format!("need n >= 2, got {n}")));
        }
        if let Some(i) = obstacle {
            if i < 1 || i + 3 > n {
                return Err(range_err(
                    "obstacle position",
                    format!("{i} not in 1..={}", n.saturating_sub(3)),
                ));
            }
        }
        let mut matrix = DMatrix::zeros(n, n);
        for k in 0..n - 1 {
            if obstacle == Some(k) {
                continue;
            }
            matrix[(k, k + 1)] = HOPPING;
            matrix[(k + 1, k)] = HOPPING;
        }
        Ok(HoppingMatrix { matrix, obstacle })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn obstacle(&self) -> Option<usize> {
        self.obstacle
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Eigenvalues of `h`, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        sorted_symmetric_eigen(&self.matrix).0
    }

    /// True when every nonzero entry couples an even site to an odd one.
    pub fn is_bipartite(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| self.matrix[(i, j)] == 0.0 || (i + j) % 2 == 1))
    }

    /// Sizes of the connected components of the hopping graph, left to right.
    pub fn component_sizes(&self) -> Vec<usize> {
        let n = self.n();
        let mut sizes = Vec::new();
        let mut current = 1;
        for k in 0..n - 1 {
            if self.matrix[(k, k + 1)] != 0.0 {
                current += 1;
            } else {
                sizes.push(current);
                current = 1;
            }
        }
        sizes.push(current);
        sizes
    }
}

/// Single-body matrix of the chain described by `params`.
pub fn single_body_matrix(params: &ChainParams, obstacle: Option<usize>) -> Result<HoppingMatrix> {
    HoppingMatrix::open_chain(params.n(), obstacle)
}

/// Obstacle position active at time `t`: `1 + floor(t / tau) mod (n - 3)`.
///
/// Dwell intervals are half-open, so at `t = k tau` the new position is
/// already active.
pub fn obstacle_at(t: f64, params: &ChainParams) -> Result<usize> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(range_err("time", format!("need t >= 0, got {t}")));
    }
    if params.tau() <= 0.0 {
        return Err(range_err("dwell time", "obstacle schedule needs tau > 0"));
    }
    let step = (t / params.tau()).floor() as usize;
    Ok(1 + step % params.positions())
}

/// The `n - 3` obstacle Hamiltonians of one period, in schedule order.
pub fn schedule(params: &ChainParams) -> Vec<HoppingMatrix> {
    (1..=params.positions())
        .map(|i| single_body_matrix(params, Some(i)).expect("position in range"))
        .collect()
}
