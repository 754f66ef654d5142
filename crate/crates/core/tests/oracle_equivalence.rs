//! The tableau engine against the dense state-vector oracle on lattices
//! small enough to hold the full wave function.

use proptest::prelude::*;
use rand::Rng;
use toric_moc::oracle;
use toric_moc::protocol::{trajectory_rng, LayerMode, Protocol, ProtocolConfig, RecoveryMenu};
use toric_moc::{Outcome, PauliString, StabilizerTableau};

mod common;

fn config(width: usize, p_s: f64, p_x: f64, p_z: f64, sweep: bool, interior: bool, seed: u64) -> ProtocolConfig {
    let mut c = ProtocolConfig::new(width, 2, p_s, p_x);
    c.p_z = p_z;
    c.seed = seed;
    if sweep {
        c.layer_mode = LayerMode::Sweep;
    }
    if interior {
        c.recovery_menu = RecoveryMenu::InteriorStars;
    }
    c
}

/// Replays `steps` protocol steps into both simulators and checks every
/// measurement, `regions` random entropies and `probes` membership queries per step.
fn check_agreement(config: ProtocolConfig, steps: usize, regions: usize, probes: usize) -> Result<(), TestCaseError> {
    let protocol = Protocol::new(config.clone()).unwrap();
    let g = protocol.geometry();
    let n = g.num_qubits();
    let mut rng = trajectory_rng(config.seed, 0);
    let mut tableau = StabilizerTableau::initial_state(g).unwrap();
    let mut dense = oracle::prepare(g).unwrap();
    for _ in 0..steps {
        for op in protocol.draw_step(&mut rng) {
            let p = protocol.operator(op);
            let e = dense.expectation(&p).unwrap();
            let outcome = protocol.apply(&mut tableau, op);
            match outcome {
                Outcome::Deterministic => prop_assert!((e.abs() - 1.0).abs() < 1e-8, "{op:?} <P>={e}"),
                Outcome::Random => prop_assert!(e.abs() < 1e-8, "{op:?} <P>={e}"),
            }
            dense = dense.measure(&p, &mut rng).unwrap().1;
        }
        for _ in 0..regions {
            let r = common::random_region(n, &mut rng);
            let s = tableau.subsystem_entropy(&r).unwrap() as f64;
            prop_assert!((dense.entropy(&r).unwrap() - s).abs() < 1e-8, "region {r:?}");
        }
        let gens: Vec<PauliString> = tableau.generators().collect();
        for k in 0..probes {
            let p = if k % 2 == 0 {
                common::random_pauli(n, &mut rng)
            } else {
                // a random group element, perturbed half of the time
                let mut p = PauliString::identity(n);
                for gen in &gens {
                    if rng.random::<bool>() {
                        p.mul_assign(gen);
                    }
                }
                if rng.random::<bool>() {
                    p.mul_assign(&common::random_pauli(n, &mut rng));
                }
                if p.is_identity() {
                    continue;
                }
                p
            };
            let e = dense.expectation(&p).unwrap();
            prop_assert_eq!(tableau.contains(&p), (e * e - 1.0).abs() < 1e-8, "{} <P>={}", p, e);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn single_site_steps_agree(
        seed in any::<u64>(),
        width in 2usize..=3,
        p_s in 0.0f64..=1.0,
        p_x in 0.0f64..=1.0,
        idle in 0.0f64..=0.3,
        interior in any::<bool>(),
    ) {
        let p_z = (1.0 - p_x - idle).max(0.0);
        check_agreement(config(width, p_s, p_x, p_z, false, interior, seed), 60, 8, 8)?;
    }

    #[test]
    fn sweep_layers_agree(seed in any::<u64>(), p_s in 0.0f64..=1.0, p_x in 0.0f64..=1.0) {
        check_agreement(config(2, p_s, p_x, 1.0 - p_x, true, false, seed), 10, 8, 8)?;
    }
}

#[test]
fn open_strings_are_group_elements_of_the_initial_state() {
    use toric_moc::observables::{rough_string, smooth_string};
    let g = toric_moc::LatticeGeometry::new(3, 3).unwrap();
    let dense = oracle::prepare(&g);
    // 3x3 has 18 qubits, beyond the oracle; use the tallest lattice that fits.
    assert!(dense.is_err());
    let g = toric_moc::LatticeGeometry::new(3, 2).unwrap();
    let dense = oracle::prepare(&g).unwrap();
    let t = StabilizerTableau::initial_state(&g).unwrap();
    for op in [rough_string(&g, 0, 1, 1), smooth_string(&g, 0, 1, 1)] {
        let p = op.unwrap().to_pauli(&g).unwrap();
        let e = dense.expectation(&p).unwrap();
        assert!((e * e - 1.0).abs() < 1e-10, "{p}: <P>={e}");
        assert!(t.contains(&p));
    }
}
