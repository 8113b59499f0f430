use crc_core::codec::{
    collective_rotation, make_code, random_pure_state, simulate_noise, DensityMatrix, NoiseMode, SimulationConfig,
};
use crc_core::structure::construct_irrep_basis;
use crc_core::{Budget, Complex, Matrix, System, Tol};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mixed_state(dim: usize, seed: u64) -> DensityMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Matrix::zeros(dim, dim);
    for w in [0.5, 0.3, 0.2] {
        let v = random_pure_state::<f64>(dim, &mut rng);
        m += &v * v.adjoint() * Complex::new(w, 0.0);
    }
    let h = (&m + m.adjoint()) * Complex::new(0.5, 0.0);
    DensityMatrix::new(h).unwrap()
}

#[test]
fn immunity_for_every_block() {
    let tol = Tol::default();
    let budget = Budget::default();
    for (n, d) in [(2, 2), (3, 2), (4, 2), (2, 3)] {
        let sys = System::new(n, d).unwrap();
        let dec = construct_irrep_basis(&sys, &tol, &budget).unwrap();
        for b in &dec.blocks {
            let code = make_code(&dec, b.j).unwrap();
            for mode in [NoiseMode::RandomRotations, NoiseMode::Channel] {
                let cfg = SimulationConfig {
                    mode,
                    trials: 15,
                    seed: 9,
                    logical: None,
                    thetas: None,
                };
                let r = simulate_noise(&code, &sys, &cfg, &tol, &budget).unwrap();
                assert!(r.min_fidelity >= 1.0 - tol.verify_tol, "n={n} d={d} j={} {mode:?}", b.j);
                assert!(r.max_leakage <= tol.verify_tol);
                assert!(r.gauge_deviation <= tol.verify_tol);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decode_ignores_gauge_and_rotation(
        seed in any::<u64>(),
        r in proptest::array::uniform3(-0.57f64..0.57),
    ) {
        let tol = Tol::default();
        let budget = Budget::default();
        let sys = System::new(3, 2).unwrap();
        let dec = construct_irrep_basis(&sys, &tol, &budget).unwrap();
        let code = make_code(&dec, crc_core::HalfInt::HALF).unwrap();
        let sigma = mixed_state(2, seed);
        let u = collective_rotation(&sys, r, &tol).unwrap();
        let mut outs = Vec::new();
        for g in 0..3u64 {
            let tau = mixed_state(2, seed.wrapping_add(g + 1));
            let rho = code.encode(&sigma, &tau).unwrap();
            let noisy = &u * rho * u.adjoint();
            let out = code.decode(&DensityMatrix::new(noisy).unwrap()).unwrap();
            prop_assert!(out.leakage <= tol.verify_tol);
            prop_assert!((&out.logical - sigma.matrix()).norm() <= tol.verify_tol);
            outs.push(out.logical);
        }
        prop_assert!((&outs[0] - &outs[1]).norm() <= tol.verify_tol);
        prop_assert!((&outs[0] - &outs[2]).norm() <= tol.verify_tol);
    }

    #[test]
    fn simulation_is_reproducible(seed in any::<u64>()) {
        let tol = Tol::default();
        let budget = Budget::default();
        let sys = System::new(3, 2).unwrap();
        let dec = construct_irrep_basis(&sys, &tol, &budget).unwrap();
        let code = make_code(&dec, crc_core::HalfInt::HALF).unwrap();
        let cfg = SimulationConfig { mode: NoiseMode::RandomRotations, trials: 5, seed, logical: None, thetas: None };
        let a = simulate_noise(&code, &sys, &cfg, &tol, &budget).unwrap();
        let b = simulate_noise(&code, &sys, &cfg, &tol, &budget).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
