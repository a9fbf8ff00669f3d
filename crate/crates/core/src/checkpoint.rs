//! JSON checkpoint of an evolving Slater state.
//!
//! The mode matrix is stored row-major as `[re, im]` pairs. Doubles are
//! written in shortest round-trip form and parsed exactly, so a save/load
//! cycle reproduces the state bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::ModeMatrix;
use crate::lattice::ChainParams;
use crate::C64;

pub const FORMAT: &str = "stirred-vacuum-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub params: ChainParams,
    /// Completed cycles at the time of the snapshot.
    pub cycle: u64,
    pub rows: usize,
    pub cols: usize,
    pub phi: Vec<[f64; 2]>,
}

impl Checkpoint {
    pub fn new(params: ChainParams, cycle: u64, state: &ModeMatrix) -> Self {
        let p = state.phi();
        let mut phi = Vec::with_capacity(p.len());
        for i in 0..p.nrows() {
            for j in 0..p.ncols() {
                let z = p[(i, j)];
                phi.push([z.re, z.im]);
            }
        }
        Checkpoint {
            format: FORMAT.to_string(),
            version: VERSION,
            params,
            cycle,
            rows: p.nrows(),
            cols: p.ncols(),
            phi,
        }
    }

    /// Rebuilds the mode matrix, checking shape and orthonormality.
    pub fn state(&self) -> Result<ModeMatrix> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::Config(format!(
                "unsupported checkpoint {} v{}",
                self.format, self.version
            )));
        }
        if self.rows != self.params.n() || self.phi.len() != self.rows * self.cols {
            return Err(Error::Dimension(format!(
                "checkpoint holds {} entries for a {}×{} matrix on {} sites",
                self.phi.len(),
                self.rows,
                self.cols,
                self.params.n()
            )));
        }
        let cols = self.cols;
        let phi = DMatrix::from_fn(self.rows, cols, |i, j| {
            let [re, im] = self.phi[i * cols + j];
            C64::new(re, im)
        });
        ModeMatrix::new(phi)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, self)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let r = BufReader::new(File::open(path)?);
        Ok(serde_json::from_reader(r)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rse::sample_random_slater;
    use proptest::prelude::*;
    use rand::SeedableRng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), half in 3usize..12, cycle in any::<u64>()) {
            let n = 2 * half;
            let params = ChainParams::new(n, 1.25).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let state = sample_random_slater(n, half, &mut rng).unwrap();
            let cp = Checkpoint::new(params, cycle, &state);
            let text = serde_json::to_string(&cp).unwrap();
            let back: Checkpoint = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(&back, &cp);
            let restored = back.state().unwrap();
            for (a, b) in restored.phi().iter().zip(state.phi().iter()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }

    #[test]
    fn file_round_trip_and_shape_check() {
        let params = ChainParams::new(8, 2.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let state = sample_random_slater(8, 4, &mut rng).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cp.json");
        let cp = Checkpoint::new(params, 17, &state);
        cp.save(&path).unwrap();
        assert_eq!(Checkpoint::load(&path).unwrap(), cp);

        let mut broken = cp.clone();
        broken.phi.pop();
        assert!(matches!(broken.state(), Err(Error::Dimension(_))));
        let mut wrong = cp;
        wrong.version = 99;
        assert!(wrong.state().is_err());
    }
}
