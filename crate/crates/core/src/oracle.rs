//! Exhaustive ground truth for small Hamiltonians.
//!
//! Everything here enumerates all `2^m` outputs of an input level, so it is
//! exact (up to the stated tolerance) and independent of the LP machinery.

use crate::circuit::{Circuit, SpinState};
use crate::constraints::EnergyGraph;
use crate::hamiltonian::{Couplings, Hamiltonian};
use crate::{Error, Result};

/// Largest output count accepted by exhaustive scans.
pub const MAX_SCAN_OUTPUTS: usize = 24;

fn check_scan(h: &Hamiltonian, x: SpinState) -> Result<()> {
    if h.m() > MAX_SCAN_OUTPUTS {
        return Err(Error::Budget {
            what: "exhaustive output scan",
            bits: h.m() as u32,
            cap: MAX_SCAN_OUTPUTS as u32,
        });
    }
    if x.dim() != h.n() {
        return Err(Error::Dimension {
            expected: h.n(),
            got: x.dim(),
        });
    }
    Ok(())
}

fn check_circuit(h: &Hamiltonian, c: &Circuit) -> Result<()> {
    if h.shape() != c.shape() {
        return Err(Error::Shape(format!(
            "Hamiltonian shape {:?} does not match circuit shape {:?}",
            h.shape(),
            c.shape()
        )));
    }
    if h.m() > MAX_SCAN_OUTPUTS {
        return Err(Error::Budget {
            what: "exhaustive output scan",
            bits: h.m() as u32,
            cap: MAX_SCAN_OUTPUTS as u32,
        });
    }
    Ok(())
}

/// Ground states of one input level.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundLevel {
    pub input: SpinState,
    /// All outputs within `tol` of the minimum, in canonical order.
    pub minimizers: Vec<SpinState>,
    pub min_energy: f64,
}

impl GroundLevel {
    pub fn degenerate(&self) -> bool {
        self.minimizers.len() > 1
    }
}

/// All outputs whose energy at `x` is within `tol` of the minimum.
pub fn ground_states(h: &Hamiltonian, x: SpinState, tol: f64) -> Result<Vec<SpinState>> {
    Ok(ground_level(h, x, tol)?.minimizers)
}

pub fn ground_level(h: &Hamiltonian, x: SpinState, tol: f64) -> Result<GroundLevel> {
    check_scan(h, x)?;
    let energies = h.level_energies(x);
    let min_energy = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let minimizers = energies
        .iter()
        .enumerate()
        .filter(|(_, &e)| e - min_energy <= tol)
        .map(|(i, _)| SpinState::from_index(i as u64, h.m()))
        .collect();
    Ok(GroundLevel {
        input: x,
        minimizers,
        min_energy,
    })
}

/// Ground levels for every input, in canonical input order.
pub fn ground_state_report(h: &Hamiltonian, tol: f64) -> Result<Vec<GroundLevel>> {
    SpinState::all(h.n()).map(|x| ground_level(h, x, tol)).collect()
}

/// `true` iff every level has `f(x)` as its unique minimum by more than `tol`.
pub fn encodes(h: &Hamiltonian, c: &Circuit, tol: f64) -> Result<bool> {
    check_circuit(h, c)?;
    Ok(encoding_margin(h, c) > tol)
}

/// `min_x min_{y ≠ f(x)} H(x, y) - H(x, f(x))`.
pub fn encoding_margin(h: &Hamiltonian, c: &Circuit) -> f64 {
    crate::hamiltonian::solution_gap(h, c)
}

/// Inputs whose level does not have `f(x)` as strict unique minimum.
pub fn encoding_failures(h: &Hamiltonian, c: &Circuit, tol: f64) -> Result<Vec<SpinState>> {
    check_circuit(h, c)?;
    Ok(c
        .rows()
        .filter(|&(x, fx)| {
            let base = h.energy(x, fx);
            SpinState::all(h.m()).any(|y| y != fx && h.energy(x, y) - base <= tol)
        })
        .map(|(x, _)| x)
        .collect())
}

/// Outputs `y` with `H(x, z) ≥ H(x, y)` for every single-flip neighbour `z`.
pub fn local_minima(h: &Hamiltonian, x: SpinState) -> Result<Vec<SpinState>> {
    check_scan(h, x)?;
    let energies = h.level_energies(x);
    Ok(local_minima_of_levels(&energies, h.m()))
}

fn local_minima_of_levels(energies: &[f64], m: usize) -> Vec<SpinState> {
    (0..energies.len())
        .filter(|&y| (0..m).all(|i| energies[y ^ (1 << i)] >= energies[y]))
        .map(|y| SpinState::from_index(y as u64, m))
        .collect()
}

/// `E_J(a, y) = a·y + Σ_{i<j} J_ij y_i y_j`.
pub fn coupled_energy(j: &Couplings, a: &[f64], y: SpinState) -> f64 {
    let mut acc = 0.0;
    for (i, &ai) in a.iter().enumerate() {
        acc += ai * y.spin_f64(i);
    }
    acc + j.quadratic(y)
}

/// Local minima of `E_J(a, ·)` by neighbour scan.
pub fn local_minima_of(j: &Couplings, a: &[f64]) -> Vec<SpinState> {
    let m = a.len();
    let energies: Vec<f64> = SpinState::all(m).map(|y| coupled_energy(j, a, y)).collect();
    local_minima_of_levels(&energies, m)
}

/// Closed-form local-minimum test: `a_i y_i + 2 Σ_j J̃_ij y_i y_j ≤ 0` for
/// every `i`, with `J̃ = (J + Jᵀ) / 2`.
pub fn local_minimum_via_lemma(j: &Couplings, a: &[f64], y: SpinState) -> bool {
    let sym = j.symmetric();
    (0..a.len()).all(|i| {
        let yi = y.spin_f64(i);
        let coupling: f64 = (0..a.len()).map(|k| sym[i][k] * y.spin_f64(k)).sum();
        a[i] * yi + 2.0 * yi * coupling <= 0.0
    })
}

/// `true` iff `f(x)` is the only local minimum of every input level.
pub fn has_no_spurious_minima(h: &Hamiltonian, c: &Circuit) -> Result<bool> {
    Ok(spurious_minimum(h, c)?.is_none())
}

/// The first `(x, y)` with `y ≠ f(x)` a local minimum at `x`, if any.
pub fn spurious_minimum(h: &Hamiltonian, c: &Circuit) -> Result<Option<(SpinState, SpinState)>> {
    check_circuit(h, c)?;
    for (x, fx) in c.rows() {
        if let Some(y) = local_minima(h, x)?.into_iter().find(|&y| y != fx) {
            return Ok(Some((x, y)));
        }
    }
    Ok(None)
}

/// The energy graph of level `x`: an edge `(z, y)` for every pair with
/// `H(x, z) > H(x, y) + tol`.
pub fn energy_graph(h: &Hamiltonian, x: SpinState, tol: f64) -> Result<EnergyGraph> {
    check_scan(h, x)?;
    let energies = h.level_energies(x);
    let m = h.m();
    let mut edges = Vec::new();
    for (z, &ez) in energies.iter().enumerate() {
        for (y, &ey) in energies.iter().enumerate() {
            if ez > ey + tol {
                edges.push((SpinState::from_index(z as u64, m), SpinState::from_index(y as u64, m)));
            }
        }
    }
    EnergyGraph::new(x, m, edges)
}

/// Spanning tree of level `x` made of the steepest single-flip descent edges.
///
/// Ties go to the lowest neighbour index. Fails if some `y ≠ f(x)` has no
/// strictly lower neighbour.
pub fn extract_tree(h: &Hamiltonian, c: &Circuit, x: SpinState) -> Result<EnergyGraph> {
    check_circuit(h, c)?;
    check_scan(h, x)?;
    let m = h.m();
    let root = c.output(x);
    let energies = h.level_energies(x);
    let mut edges = Vec::with_capacity(energies.len().saturating_sub(1));
    for y in SpinState::all(m).filter(|&y| y != root) {
        let z = steepest_of_levels(&energies, y).ok_or_else(|| Error::SpuriousMinimum {
            input: x.to_string(),
            state: y.to_string(),
        })?;
        edges.push((y, z));
    }
    let tree = EnergyGraph::new(x, m, edges)?;
    tree.validate_spanning_tree(root)?;
    Ok(tree)
}

/// The single-flip neighbour of `y` with the lowest energy at input `x`,
/// provided it is strictly lower than `H(x, y)`; ties go to the lowest index.
pub fn steepest_neighbor(h: &Hamiltonian, x: SpinState, y: SpinState) -> Result<Option<SpinState>> {
    check_scan(h, x)?;
    if y.dim() != h.m() {
        return Err(Error::Dimension {
            expected: h.m(),
            got: y.dim(),
        });
    }
    Ok(steepest_of_levels(&h.level_energies(x), y))
}

fn steepest_of_levels(energies: &[f64], y: SpinState) -> Option<SpinState> {
    let yi = y.index() as usize;
    let best = (0..y.dim())
        .map(|i| yi ^ (1 << i))
        .min_by(|&a, &b| energies[a].total_cmp(&energies[b]).then(a.cmp(&b)))?;
    (energies[best] < energies[yi]).then(|| SpinState::from_index(best as u64, y.dim()))
}

/// Steepest-descent trees for every input, in canonical order.
pub fn extract_trees(h: &Hamiltonian, c: &Circuit) -> Result<Vec<EnergyGraph>> {
    SpinState::all(c.n()).map(|x| extract_tree(h, c, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gates;
    use proptest::prelude::*;

    fn s(spins: &[i8]) -> SpinState {
        SpinState::from_spins(spins).unwrap()
    }

    fn xor_and_hamiltonian() -> Hamiltonian {
        let mut j = Couplings::zeros(2);
        j.set(0, 1, 1.0);
        Hamiltonian::from_affine(&[vec![-0.3, -0.5], vec![-1.0, -1.0]], &[0.5, 1.0], j).unwrap()
    }

    fn pair_coupling(v: f64) -> Couplings {
        let mut j = Couplings::zeros(2);
        j.set(0, 1, v);
        j
    }

    #[test]
    fn ground_states_examples() {
        let zero = Hamiltonian::zeros(1, 2);
        assert_eq!(ground_states(&zero, s(&[1]), 1e-9).unwrap().len(), 4);
        let h = xor_and_hamiltonian();
        assert_eq!(ground_states(&h, s(&[1, 1]), 1e-9).unwrap(), vec![s(&[-1, 1])]);
        assert_eq!(ground_states(&h, s(&[-1, -1]), 1e-9).unwrap(), vec![s(&[-1, -1])]);
        let e = h.level_energies(s(&[-1, -1]));
        let expect = [-3.3, -2.7, 0.7, 5.3];
        assert!(e.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-12), "{e:?}");
    }

    #[test]
    fn encodes_examples() {
        let c = gates::xor(2).glue(&gates::and(2)).unwrap();
        assert!(encodes(&xor_and_hamiltonian(), &c, 1e-9).unwrap());
        assert!(!encodes(&Hamiltonian::zeros(2, 2), &c, 1e-9).unwrap());
        let mut copy = Hamiltonian::zeros(1, 1);
        copy.set_input_coupling(0, 0, -0.5);
        assert!(encodes(&copy, &gates::copy(), 1e-9).unwrap());
        assert!(encodes(&copy, &c, 1e-9).is_err());
    }

    #[test]
    fn local_minima_examples() {
        assert_eq!(local_minima_of(&Couplings::zeros(2), &[2.0, -3.0]), vec![s(&[-1, 1])]);
        assert_eq!(local_minima_of(&pair_coupling(1.0), &[1.3, 3.0]), vec![s(&[-1, -1])]);
        assert!(local_minimum_via_lemma(&pair_coupling(1.0), &[1.3, 3.0], s(&[-1, -1])));
        assert!(!local_minimum_via_lemma(&pair_coupling(1.0), &[1.3, 3.0], s(&[-1, 1])));
    }

    #[test]
    fn energy_graph_and_tree() {
        let h = xor_and_hamiltonian();
        let c = gates::xor(2).glue(&gates::and(2)).unwrap();
        let x = s(&[1, 1]);
        let g = energy_graph(&h, x, 1e-9).unwrap();
        assert!(g.edges.contains(&(s(&[1, 1]), s(&[-1, 1]))));
        // energies -0.3, -0.3, -1.7, 2.3: one tie, so 5 strictly ordered pairs
        assert_eq!(g.edges.len(), 5);
        assert_eq!(steepest_neighbor(&h, x, s(&[1, 1])).unwrap(), Some(s(&[-1, 1])));
        // (1,-1) ties with (-1,-1) and so counts as a (non-strict) local minimum.
        assert!(matches!(extract_tree(&h, &c, x), Err(Error::SpuriousMinimum { .. })));
        let lf = crate::synth::synthesize(&c, crate::synth::Mode::LocalFree).unwrap();
        for t in extract_trees(lf.hamiltonian.as_ref().unwrap(), &c).unwrap() {
            assert_eq!(t.edges.len(), 3);
        }
        let copy_tree = {
            let mut h = Hamiltonian::zeros(1, 1);
            h.set_input_coupling(0, 0, -0.5);
            extract_tree(&h, &gates::copy(), s(&[1])).unwrap()
        };
        assert_eq!(copy_tree.edges, vec![(s(&[-1]), s(&[1]))]);
    }

    #[test]
    fn spurious_minimum_reported() {
        // Strong ferromagnetic coupling with f(x) = (1, -1) leaves (1, 1) and (-1, -1) as traps.
        let j = pair_coupling(-5.0);
        let h = Hamiltonian::new(vec![-1.0, 1.0], vec![], j).unwrap();
        let c = Circuit::from_fn(0, 2, |_| s(&[1, -1])).unwrap();
        assert!(matches!(
            extract_tree(&h, &c, SpinState::from_index(0, 0)),
            Err(Error::SpuriousMinimum { .. })
        ));
        assert!(!has_no_spurious_minima(&h, &c).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        /// Dyadic fields keep every energy exact, so agreement must be exact.
        #[test]
        fn lemma_agrees_with_neighbour_scan(
            m in 1usize..=4,
            a_raw in proptest::collection::vec(-64i32..=64, 4),
            j_raw in proptest::collection::vec(-64i32..=64, 6),
            y_idx in any::<u64>(),
        ) {
            let a: Vec<f64> = a_raw[..m].iter().map(|&k| f64::from(k) / 16.0).collect();
            let packed: Vec<f64> = j_raw[..m * (m - 1) / 2].iter().map(|&k| f64::from(k) / 16.0).collect();
            let j = Couplings::from_packed(m, packed).unwrap();
            let y = SpinState::from_index(y_idx % (1 << m), m);
            let scan = local_minima_of(&j, &a).contains(&y);
            prop_assert_eq!(local_minimum_via_lemma(&j, &a, y), scan);
        }

        #[test]
        fn strict_global_minimum_is_local(
            m in 1usize..=4,
            raw in proptest::collection::vec(-100.0f64..100.0, 10),
        ) {
            let a = raw[..m].to_vec();
            let j = Couplings::from_packed(m, raw[4..4 + m * (m - 1) / 2].to_vec()).unwrap();
            let energies: Vec<f64> = SpinState::all(m).map(|y| coupled_energy(&j, &a, y)).collect();
            let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
            let argmin = energies.iter().position(|&e| e == min).unwrap();
            prop_assert!(local_minima_of(&j, &a).contains(&SpinState::from_index(argmin as u64, m)));
        }
    }
}
