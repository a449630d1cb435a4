use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ising_core::circuit::gates;
use ising_core::classify::{self, ClassifyOptions};
use ising_core::dynamics::greedy_descend;
use ising_core::hamiltonian::Couplings;
use ising_core::lp::SolverOptions;
use ising_core::residual::check_affine_solution;
use ising_core::synth::{self, AuxOptions, Mode, Strategy as Search, SynthOptions};
use ising_core::voronoi;
use ising_core::{oracle, Circuit, Execution, Hamiltonian, SpinState};

fn small_circuit() -> impl Strategy<Value = Circuit> {
    prop_oneof![Just((2usize, 2usize)), Just((3, 1)), Just((2, 3)), Just((3, 2))].prop_flat_map(|(n, m)| {
        prop::collection::vec(0u64..1 << m, 1 << n)
            .prop_map(move |t| Circuit::from_output_indices(n, m, t).unwrap())
    })
}

fn integer_hamiltonian() -> impl Strategy<Value = Hamiltonian> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(n, m)| {
        let p = m + n * m + m * (m - 1) / 2;
        prop::collection::vec(-3i8..=3, p)
            .prop_map(move |v| Hamiltonian::unpack(&v.iter().map(|&x| f64::from(x) / 2.0).collect::<Vec<_>>(), n, m).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn phase_one_agrees_with_l1(c in small_circuit()) {
        let opts = SynthOptions::default();
        let feasible = synth::is_feasible(&c, &opts.solver).unwrap();
        let r = synth::synthesize_with(&c, Mode::Global, &opts).unwrap();
        prop_assert_eq!(feasible, r.feasible());
        if let Some(h) = r.hamiltonian {
            prop_assert!(oracle::encodes(&h, &c, 1e-9).unwrap());
            prop_assert!(r.encoding_margin >= 1.0 - 1e-7);
            prop_assert!((h.l1_norm() - r.l1_norm).abs() < 1e-7);
            let linear = h.linear_part();
            prop_assert!(check_affine_solution(&c, &linear, h.biases(), h.couplings()).unwrap());
        }
    }

    #[test]
    fn local_free_solutions_have_single_minimum(c in small_circuit()) {
        let r = synth::synthesize(&c, Mode::LocalFree).unwrap();
        if let Some(h) = r.hamiltonian {
            for (x, fx) in c.rows() {
                prop_assert_eq!(oracle::local_minima(&h, x).unwrap(), vec![fx]);
            }
            let global = synth::synthesize(&c, Mode::Global).unwrap();
            prop_assert!(global.feasible());
            prop_assert!(global.l1_norm <= r.l1_norm + 1e-7);
        }
    }

    #[test]
    fn every_argmin_circuit_is_feasible(h in integer_hamiltonian()) {
        // A Hamiltonian with unique ground states encodes the circuit they define.
        let mut table = Vec::new();
        for x in SpinState::all(h.n()) {
            let g = oracle::ground_level(&h, x, 1e-9).unwrap();
            if g.degenerate() {
                return Ok(());
            }
            table.push(g.minimizers[0]);
        }
        let c = Circuit::new(h.n(), h.m(), table).unwrap();
        prop_assert!(oracle::encodes(&h, &c, 1e-9).unwrap());
        prop_assert!(synth::is_feasible(&c, &SolverOptions::default()).unwrap());
    }

    #[test]
    fn greedy_stops_at_local_minimum(h in integer_hamiltonian(), xi in 0u64..8, yi in 0u64..8) {
        let x = SpinState::from_index(xi % (1 << h.n()), h.n());
        let y0 = SpinState::from_index(yi % (1 << h.m()), h.m());
        let t = greedy_descend(&h, x, y0, 64).unwrap();
        prop_assert!(oracle::local_minima(&h, x).unwrap().contains(&t.final_state()));
        prop_assert!(t.energies.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn voronoi_circuits_are_feasible(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = voronoi::random_embedding(n, m, 1.5, &mut rng);
        if let Some(c) = e.induced_circuit(1e-6) {
            prop_assert!(voronoi::is_voronoi_solution(&c, &e).unwrap());
            prop_assert!(synth::is_feasible(&c, &SolverOptions::default()).unwrap());
        }
    }
}

#[test]
fn local_free_feasibility_implies_global_on_2x2() {
    for idx in 0..256 {
        let c = Circuit::from_index(2, 2, idx).unwrap();
        let global = synth::synthesize(&c, Mode::Global).unwrap().feasible();
        let local = synth::synthesize(&c, Mode::LocalFree).unwrap().feasible();
        assert!(!local || global, "circuit {idx}");
    }
}

#[test]
fn xor_with_one_auxiliary_spin() {
    let xor = gates::xor(2);
    let opts = AuxOptions::default();
    assert!(synth::auxiliary_search(&xor, 0, Search::Exhaustive, &opts).unwrap().is_none());
    let found = synth::auxiliary_search(&xor, 1, Search::Exhaustive, &opts).unwrap().unwrap();
    let glued = xor.glue(&found.map).unwrap();
    let h = found.result.hamiltonian.unwrap();
    synth::certify(&h, &glued, Mode::Global, &opts.synth).unwrap();
    // Any auxiliary bit works only if it breaks the XOR symmetry, so it cannot be constant.
    assert_eq!(classify::circuit_type(&found.map).unwrap().number(), 0);
    assert_ne!(found.map, gates::constant(2, 1));
    assert_ne!(found.map, gates::constant(2, -1));
}

#[test]
fn classification_is_execution_independent() {
    let run = |execution| {
        let opts = ClassifyOptions {
            execution,
            ..ClassifyOptions::default()
        };
        classify::classify_records(2, 2, &opts).unwrap()
    };
    assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
}

#[test]
fn residual_cells_contain_synthesized_fields() {
    let c = gates::xor(2).glue(&gates::and(2)).unwrap();
    let h = synth::synthesize(&c, Mode::Global).unwrap().hamiltonian.unwrap();
    let part = ising_core::residual::ResidualPartition::new(h.couplings().clone());
    for (x, fx) in c.rows() {
        let a = h.local_fields(x);
        assert!(part.in_cell(fx, &a));
        assert_eq!(part.ground_state_map(&a, 1e-9), vec![fx]);
    }
    let mut j = Couplings::zeros(2);
    j.set(0, 1, h.couplings().get(0, 1));
    assert_eq!(&j, h.couplings());
}
