use nalgebra::DMatrix;
use proptest::prelude::*;
use stirred_vacuum::entanglement::{block_spectrum, entropy_of_spectrum};
use stirred_vacuum::evolve::{evolve_cycles, ground_state, Cadence, EvolveOptions, PropagatorCache, Propagation};
use stirred_vacuum::floquet::{floquet_data, floquet_occupations, spacing_statistics, SpacingOptions};
use stirred_vacuum::lattice::{single_body_matrix, HoppingMatrix};
use stirred_vacuum::observables::{energy, mode_occupations, site_densities, SineModes};
use stirred_vacuum::{ChainParams, C64};

fn gs_for(p: &ChainParams) -> stirred_vacuum::ModeMatrix {
    ground_state(&single_body_matrix(p, None).unwrap(), p.m()).unwrap()
}

#[test]
fn trajectory_keeps_half_density_and_particle_number() {
    let p = ChainParams::new(24, 1.3).unwrap();
    let cache = PropagatorCache::new(p).unwrap();
    let modes = SineModes::new(24);
    let opts = EvolveOptions {
        cadence: Cadence::PerStep,
        ..Default::default()
    };
    let mut worst_density: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    let mut occ_range = (f64::MAX, f64::MIN);
    evolve_cycles(gs_for(&p), &cache, 60, opts, |s| {
        for d in site_densities(s.state) {
            worst_density = worst_density.max((d - 0.5).abs());
        }
        let tr: C64 = s.state.correlation().trace();
        worst_trace = worst_trace.max((tr.re - 12.0).abs()).max(tr.im.abs());
        // energy() itself rejects an imaginary residue above 1e-8
        energy(s.state, s.hamiltonian).unwrap();
        for &o in mode_occupations(s.state, &modes).unwrap().values() {
            occ_range = (occ_range.0.min(o), occ_range.1.max(o));
        }
    })
    .unwrap();
    assert!(worst_density <= 1e-8, "{worst_density}");
    assert!(worst_trace <= 1e-10, "{worst_trace}");
    assert!(occ_range.0 >= -1e-10 && occ_range.1 <= 1.0 + 1e-10, "{occ_range:?}");
}

#[test]
fn transposed_kernel_gives_same_block_spectrum() {
    let p = ChainParams::new(20, 0.7).unwrap();
    let cache = PropagatorCache::new(p).unwrap();
    let state = evolve_cycles(gs_for(&p), &cache, 7, EvolveOptions::default(), |_| {}).unwrap();
    let m = state.correlation();
    let c = m.transpose();
    for block in [0..5, 3..11, 0..10, 12..20] {
        let len = block.len();
        let sub = DMatrix::from_fn(len, len, |i, j| c[(block.start + i, block.start + j)]);
        let mut from_c: Vec<f64> = sub.symmetric_eigenvalues().iter().copied().collect();
        from_c.sort_by(f64::total_cmp);
        let mut from_m = block_spectrum(&state, block.clone()).unwrap().nus;
        from_m.sort_by(f64::total_cmp);
        for (a, b) in from_c.iter().zip(&from_m) {
            assert!((a - b).abs() < 1e-10, "{block:?}: {a} vs {b}");
        }
        assert!((entropy_of_spectrum(&from_c) - entropy_of_spectrum(&from_m)).abs() < 1e-10);
    }
}

#[test]
fn floquet_occupations_sum_to_particle_number_and_are_conserved() {
    for tau in [0.25, 2.5, 10.0] {
        let p = ChainParams::new(20, tau).unwrap();
        let cache = PropagatorCache::new(p).unwrap();
        let data = floquet_data(&cache).unwrap();
        let gs = gs_for(&p);
        let before = floquet_occupations(&data, &gs).unwrap();
        assert!((before.total() - 10.0).abs() < 1e-10);
        let later = evolve_cycles(gs, &cache, 30, EvolveOptions::default(), |_| {}).unwrap();
        let after = floquet_occupations(&data, &later).unwrap();
        for (a, b) in before.values().iter().zip(after.values()) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}

#[test]
fn quasi_energies_pair_up() {
    for (n, tau) in [(16, 0.3), (30, 1.0), (48, 5.0)] {
        let cache = PropagatorCache::new(ChainParams::new(n, tau).unwrap()).unwrap();
        let data = floquet_data(&cache).unwrap();
        let w = 2.0 * std::f64::consts::PI / data.period;
        for &e in &data.quasi {
            let d = data
                .quasi
                .iter()
                .map(|&f| {
                    let r = (e + f).rem_euclid(w);
                    r.min(w - r)
                })
                .fold(f64::MAX, f64::min);
            assert!(d < 1e-8, "n={n} tau={tau}: {e} unpaired ({d})");
        }
    }
}

#[test]
fn stepwise_and_period_propagation_agree_over_many_cycles() {
    let p = ChainParams::new(16, 0.9).unwrap();
    let cache = PropagatorCache::new(p).unwrap();
    let fast = evolve_cycles(gs_for(&p), &cache, 50, EvolveOptions::default(), |_| {}).unwrap();
    let slow_opts = EvolveOptions {
        propagation: Propagation::Stepwise,
        ..Default::default()
    };
    let slow = evolve_cycles(gs_for(&p), &cache, 50, slow_opts, |_| {}).unwrap();
    let diff = (fast.correlation() - slow.correlation()).map(|z| z.norm()).max();
    assert!(diff < 1e-9, "{diff}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn obstacle_splits_chain_into_two_nontrivial_parts(half in 3usize..20, pick in 0usize..1000) {
        let n = 2 * half;
        let obstacle = 1 + pick % (n - 3);
        let h = HoppingMatrix::open_chain(n, Some(obstacle)).unwrap();
        let sizes = h.component_sizes();
        prop_assert_eq!(sizes.len(), 2);
        prop_assert!(sizes.iter().all(|&s| s >= 2));
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
        let spec = h.spectrum();
        for (a, b) in spec.iter().zip(spec.iter().rev()) {
            prop_assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn evolution_preserves_isometry(half in 3usize..10, tau in 0.05f64..6.0, cycles in 1usize..6) {
        let p = ChainParams::new(2 * half, tau).unwrap();
        let cache = PropagatorCache::new(p).unwrap();
        let opts = EvolveOptions { reorthonormalize_every: 0, ..Default::default() };
        let s = evolve_cycles(gs_for(&p), &cache, cycles, opts, |_| {}).unwrap();
        prop_assert!(s.orthonormality_defect() < 1e-10);
    }

    #[test]
    fn r_tilde_is_affine_invariant(
        levels in proptest::collection::vec(-50.0f64..50.0, 40..80),
        scale in 0.01f64..100.0,
        shift in -10.0f64..10.0,
    ) {
        let base = spacing_statistics(&levels, SpacingOptions::default());
        prop_assume!(base.is_ok());
        let moved: Vec<f64> = levels.iter().map(|x| scale * x + shift).collect();
        let a = base.unwrap().r_tilde_mean;
        let b = spacing_statistics(&moved, SpacingOptions::default()).unwrap().r_tilde_mean;
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    }
}
