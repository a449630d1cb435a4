//! Synthesis drivers: build a constraint system, solve it, certify the answer.
//!
//! The exhaustive oracle, not the LP, decides whether a result is reported
//! as feasible. If the solver claims a solution that the oracle rejects,
//! synthesis fails loudly with [`Error::Certification`].

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{table_bits, Circuit, SpinState};
use crate::constraints::{self, ConstraintSystem, EnergyGraph};
use crate::hamiltonian::Hamiltonian;
use crate::lp::{self, L1Outcome, SolverOptions};
use crate::oracle;
use crate::par::{self, Execution};
use crate::{Error, Result, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `f(x)` must be the strict global minimum of every input level.
    Global,
    /// Additionally, `f(x)` must be the only local minimum of every level.
    LocalFree,
    /// Spanning-tree refinement iterate.
    Tree,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Global => "global",
            Mode::LocalFree => "local_free",
            Mode::Tree => "tree",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub solver: SolverOptions,
    /// Energy comparison tolerance used by certification.
    pub tol: f64,
    /// Right-hand side of every constraint row.
    pub margin: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            tol: DEFAULT_TOL,
            margin: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub mode: Mode,
    /// `None` when the constraint system is infeasible.
    pub hamiltonian: Option<Hamiltonian>,
    pub l1_norm: f64,
    /// Smallest `H(x, y) - H(x, f(x))` over all competitors, as measured by the oracle.
    pub encoding_margin: f64,
}

impl SynthesisResult {
    pub fn feasible(&self) -> bool {
        self.hamiltonian.is_some()
    }

    fn infeasible(mode: Mode) -> Self {
        Self {
            mode,
            hamiltonian: None,
            l1_norm: f64::NAN,
            encoding_margin: f64::NAN,
        }
    }
}

/// Builds the constraint system for `mode` (without rescaling).
pub fn system_for(c: &Circuit, mode: Mode) -> Result<ConstraintSystem> {
    match mode {
        Mode::Global => Ok(constraints::global_min_rows(c)),
        Mode::LocalFree => Ok(constraints::local_min_free_rows(c)),
        Mode::Tree => Err(Error::Invalid(
            "tree systems need explicit trees; use refine_spanning_trees".into(),
        )),
    }
}

/// L1-optimal synthesis with default options.
pub fn synthesize(c: &Circuit, mode: Mode) -> Result<SynthesisResult> {
    synthesize_with(c, mode, &SynthOptions::default())
}

pub fn synthesize_with(c: &Circuit, mode: Mode, opts: &SynthOptions) -> Result<SynthesisResult> {
    let system = system_for(c, mode)?.with_margin(opts.margin);
    solve_system(c, &system, mode, opts)
}

fn solve_system(c: &Circuit, system: &ConstraintSystem, mode: Mode, opts: &SynthOptions) -> Result<SynthesisResult> {
    let (n, m) = c.shape();
    let u = match lp::l1_minimize(&system.rows, &system.rhs, &opts.solver)? {
        L1Outcome::Infeasible => return Ok(SynthesisResult::infeasible(mode)),
        L1Outcome::Optimal { u, .. } => u,
    };
    let h = constraints::decode(&u, n, m)?;
    certify(&h, c, mode, opts)?;
    Ok(SynthesisResult {
        mode,
        l1_norm: h.l1_norm(),
        encoding_margin: oracle::encoding_margin(&h, c),
        hamiltonian: Some(h),
    })
}

/// Independent exhaustive check of an LP answer.
pub fn certify(h: &Hamiltonian, c: &Circuit, mode: Mode, opts: &SynthOptions) -> Result<()> {
    let margin = oracle::encoding_margin(h, c);
    if margin <= opts.tol {
        return Err(Error::Certification {
            detail: format!("solver returned a Hamiltonian with encoding margin {margin:e}"),
            feas_tol: opts.solver.feas_tol,
            tol: opts.tol,
        });
    }
    if mode != Mode::Global {
        if let Some((x, y)) = oracle::spurious_minimum(h, c)? {
            return Err(Error::Certification {
                detail: format!("spurious local minimum {y} at input {x}"),
                feas_tol: opts.solver.feas_tol,
                tol: opts.tol,
            });
        }
    }
    Ok(())
}

/// Whether the global-minimum system is feasible (phase 1 only).
pub fn is_feasible(c: &Circuit, solver: &SolverOptions) -> Result<bool> {
    let sys = constraints::global_min_rows(c);
    Ok(lp::find_feasible(&sys.rows, &sys.rhs, solver)?.is_some())
}

/// Why spanning-tree refinement stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The extracted tree set repeated an earlier one.
    TreesRepeated,
    IterationCap,
}

#[derive(Debug, Clone)]
pub struct Refinement {
    /// `H_0` (local-free synthesis) followed by every tree iterate.
    pub iterates: Vec<SynthesisResult>,
    /// Hash of the sorted tree-edge set extracted from each iterate that was refined.
    pub fingerprints: Vec<u64>,
    pub stop: StopReason,
}

impl Refinement {
    pub fn last(&self) -> &SynthesisResult {
        self.iterates.last().expect("at least H_0")
    }

    pub fn l1_history(&self) -> Vec<f64> {
        self.iterates.iter().map(|r| r.l1_norm).collect()
    }
}

fn tree_fingerprint(trees: &[EnergyGraph]) -> Vec<Vec<(u64, u64)>> {
    trees.iter().map(EnergyGraph::sorted_edges).collect()
}

fn hash_of<T: Hash>(v: &T) -> u64 {
    let mut h = DefaultHasher::new();
    v.hash(&mut h);
    h.finish()
}

/// Iterated spanning-tree refinement starting from a local-free solution.
///
/// Each round extracts the steepest-descent tree of every input level from
/// the current Hamiltonian and re-solves the L1 program over exactly those
/// tree edges. Stops when a tree set repeats or after `max_iters` rounds.
pub fn refine_spanning_trees(c: &Circuit, max_iters: usize, opts: &SynthOptions) -> Result<Refinement> {
    let h0 = synthesize_with(c, Mode::LocalFree, opts)?;
    if !h0.feasible() {
        return Err(Error::Invalid(
            "local-minimum-free system is infeasible; no starting Hamiltonian for refinement".into(),
        ));
    }
    let mut iterates = vec![h0];
    let mut seen: Vec<Vec<Vec<(u64, u64)>>> = Vec::new();
    let mut fingerprints = Vec::new();
    let mut stop = StopReason::IterationCap;
    for _ in 0..=max_iters {
        let current = iterates.last().unwrap().hamiltonian.as_ref().expect("certified");
        let trees = oracle::extract_trees(current, c)?;
        let fp = tree_fingerprint(&trees);
        fingerprints.push(hash_of(&fp));
        if seen.contains(&fp) {
            stop = StopReason::TreesRepeated;
            break;
        }
        seen.push(fp);
        if iterates.len() > max_iters {
            break;
        }
        let sys = constraints::tree_rows(c, &trees)?.with_margin(opts.margin);
        let next = solve_system(c, &sys, Mode::Tree, opts)?;
        if !next.feasible() {
            return Err(Error::Numerical(
                "tree system of a certified Hamiltonian reported infeasible".into(),
            ));
        }
        iterates.push(next);
    }
    Ok(Refinement {
        iterates,
        fingerprints,
        stop,
    })
}

/// How candidate auxiliary maps are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Every map `Σⁿ → Σᵏ` in canonical order.
    Exhaustive,
    /// Uniformly random maps from a seeded generator.
    Random { seed: u64, trials: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxOptions {
    pub synth: SynthOptions,
    /// Maximum number of candidates an exhaustive search may enumerate.
    pub max_candidates: u64,
    pub execution: Execution,
}

impl Default for AuxOptions {
    fn default() -> Self {
        Self {
            synth: SynthOptions::default(),
            max_candidates: 1 << 20,
            execution: Execution::default(),
        }
    }
}

/// A successful auxiliary search: the map `g` and the synthesis of `f × g`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryFound {
    /// `g` as a shape-`(n, k)` circuit.
    pub map: Circuit,
    /// Canonical index of `g` (exhaustive) or the trial number (random).
    pub candidate: u64,
    pub result: SynthesisResult,
}

/// Searches for `g: Σⁿ → Σᵏ` making `f × g` feasible.
///
/// Exhaustive search returns the first success in canonical order (or
/// `None` after trying every map); random search fails with
/// [`Error::TrialsExhausted`] if no trial succeeds.
pub fn auxiliary_search(c: &Circuit, k: usize, strategy: Strategy, opts: &AuxOptions) -> Result<Option<AuxiliaryFound>> {
    let n = c.n();
    let bits = table_bits(n, k);
    let attempt = |g: Circuit, candidate: u64| -> Option<Result<AuxiliaryFound>> {
        let glued = match c.glue(&g) {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        match is_feasible(&glued, &opts.synth.solver) {
            Ok(false) => None,
            Ok(true) => Some(synthesize_with(&glued, Mode::Global, &opts.synth).and_then(|result| {
                if result.feasible() {
                    Ok(AuxiliaryFound {
                        map: g,
                        candidate,
                        result,
                    })
                } else {
                    Err(Error::Numerical("phase 1 and L1 solve disagree on feasibility".into()))
                }
            })),
            Err(e) => Some(Err(e)),
        }
    };
    match strategy {
        Strategy::Exhaustive => {
            let total = if bits < 64 { 1u64 << bits } else { u64::MAX };
            if bits >= 64 || total > opts.max_candidates {
                return Err(Error::Budget {
                    what: "auxiliary maps",
                    bits,
                    cap: 63 - opts.max_candidates.leading_zeros(),
                });
            }
            par::find_first(opts.execution, 0..total, |i| {
                let g = Circuit::from_index(n, k, i).expect("index below 2^bits");
                attempt(g, i)
            })
            .transpose()
        }
        Strategy::Random { seed, trials } => {
            let found = par::find_first(opts.execution, 0..trials, |t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t);
                let table: Vec<SpinState> = (0..1u64 << n)
                    .map(|_| SpinState::from_index(rng.gen_range(0..1u64 << k), k))
                    .collect();
                let g = Circuit::new(n, k, table).expect("well-formed table");
                attempt(g, t)
            })
            .transpose()?;
            found.map(Some).ok_or(Error::TrialsExhausted(trials as usize))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gates;
    use crate::dynamics;

    #[test]
    fn copy_global() {
        let r = synthesize(&gates::copy(), Mode::Global).unwrap();
        assert!(r.feasible());
        assert!((r.l1_norm - 0.5).abs() < 1e-9);
        let h = r.hamiltonian.unwrap();
        assert!(h.bias(0).abs() < 1e-9 && (h.input_coupling(0, 0) + 0.5).abs() < 1e-9);
    }

    #[test]
    fn xor_is_infeasible() {
        let r = synthesize(&gates::xor(2), Mode::Global).unwrap();
        assert!(!r.feasible());
        assert!(!is_feasible(&gates::xor(2), &SolverOptions::default()).unwrap());
    }

    #[test]
    fn xor_and_both_modes() {
        let c = gates::xor(2).glue(&gates::and(2)).unwrap();
        let g = synthesize(&c, Mode::Global).unwrap();
        assert!(g.feasible() && g.encoding_margin >= 1.0 - 1e-9);
        let l = synthesize(&c, Mode::LocalFree).unwrap();
        let h = l.hamiltonian.as_ref().unwrap();
        assert!(oracle::has_no_spurious_minima(h, &c).unwrap());
        for (x, fx) in c.rows() {
            for y0 in SpinState::all(2) {
                let t = dynamics::greedy_descend(h, x, y0, 64).unwrap();
                assert_eq!(t.final_state(), fx);
            }
        }
    }

    #[test]
    fn margin_rescales_solution() {
        let opts = SynthOptions {
            margin: 2.0,
            ..SynthOptions::default()
        };
        let r = synthesize_with(&gates::copy(), Mode::Global, &opts).unwrap();
        assert!((r.l1_norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn refinement_single_output_converges_immediately() {
        let r = refine_spanning_trees(&gates::and(2), 20, &SynthOptions::default()).unwrap();
        assert_eq!(r.stop, StopReason::TreesRepeated);
        assert_eq!(r.iterates.len(), 2);
    }

    #[test]
    fn refinement_keeps_certification() {
        let c = gates::xor(2).glue(&gates::and(2)).unwrap();
        let r = refine_spanning_trees(&c, 20, &SynthOptions::default()).unwrap();
        for it in &r.iterates {
            let h = it.hamiltonian.as_ref().unwrap();
            assert!(oracle::encodes(h, &c, 1e-9).unwrap());
            assert!(oracle::has_no_spurious_minima(h, &c).unwrap());
        }
        assert!(r.last().l1_norm <= r.iterates[0].l1_norm + 1e-9);
    }

    #[test]
    fn xor_needs_one_auxiliary() {
        let opts = AuxOptions::default();
        assert_eq!(auxiliary_search(&gates::xor(2), 0, Strategy::Exhaustive, &opts).unwrap(), None);
        let found = auxiliary_search(&gates::xor(2), 1, Strategy::Exhaustive, &opts)
            .unwrap()
            .unwrap();
        assert_eq!(found.map.shape(), (2, 1));
        let glued = gates::xor(2).glue(&found.map).unwrap();
        let h = found.result.hamiltonian.as_ref().unwrap();
        assert!(oracle::encodes(h, &glued, 1e-9).unwrap());
        let seq = AuxOptions {
            execution: Execution::Sequential,
            ..AuxOptions::default()
        };
        let again = auxiliary_search(&gates::xor(2), 1, Strategy::Exhaustive, &seq).unwrap().unwrap();
        assert_eq!(again.candidate, found.candidate);
    }

    #[test]
    fn feasible_circuit_with_no_auxiliaries() {
        let found = auxiliary_search(&gates::and(2), 0, Strategy::Exhaustive, &AuxOptions::default())
            .unwrap()
            .unwrap();
        assert_eq!(found.map.m(), 0);
    }

    #[test]
    fn random_search() {
        let strategy = Strategy::Random { seed: 7, trials: 200 };
        let found = auxiliary_search(&gates::xor(2), 1, strategy, &AuxOptions::default()).unwrap();
        assert!(found.is_some());
        let none = Strategy::Random { seed: 7, trials: 50 };
        let xx = gates::xor(2).glue(&gates::xor(2)).unwrap();
        assert!(matches!(
            auxiliary_search(&xx, 0, none, &AuxOptions::default()),
            Err(Error::TrialsExhausted(50))
        ));
    }

    #[test]
    fn exhaustive_budget() {
        let opts = AuxOptions {
            max_candidates: 1 << 10,
            ..AuxOptions::default()
        };
        assert!(matches!(
            auxiliary_search(&gates::xor(3), 2, Strategy::Exhaustive, &opts),
            Err(Error::Budget { bits: 16, .. })
        ));
    }
}
