//! Fermion-to-qubit mappings: spectra and term-count scaling.

use std::time::Instant;

use hamsim_core::fermion::{bravyi_kitaev, jordan_wigner, pauli_count, FermionTensors};
use hamsim_core::sim::eigendecompose;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn mappings_are_isospectral(seed in any::<u64>(), n in 1usize..=5, real in any::<bool>()) {
        let t = FermionTensors::random(n, &mut ChaCha8Rng::seed_from_u64(seed), real);
        let a = eigendecompose(&jordan_wigner(&t).unwrap()).unwrap().values;
        let b = eigendecompose(&bravyi_kitaev(&t).unwrap()).unwrap().values;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }
}

#[test]
fn term_count_grows_quartically() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sizes = [4usize, 6, 8, 10, 12];
    let counts: Vec<usize> = sizes
        .iter()
        .map(|&n| pauli_count(&jordan_wigner(&FermionTensors::random(n, &mut rng, false)).unwrap()))
        .collect();
    let lx: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let slope = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    // Independent oracle: dense matrices of the fermion operators expanded in
    // the Pauli basis give 99 and 562 strings at 4 and 6 modes.
    assert_eq!(&counts[..2], &[99, 562]);
    assert!((slope - 4.0).abs() <= 0.3, "slope {slope}");
    assert!(start.elapsed().as_secs() < 60);
}
