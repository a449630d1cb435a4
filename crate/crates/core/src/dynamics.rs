//! Single-spin-flip dynamics on the outputs with the inputs pinned.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::SpinState;
use crate::hamiltonian::Hamiltonian;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// No single flip lowers the energy.
    LocalMinimum,
    /// The requested number of steps was taken.
    StepCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub input: SpinState,
    pub states: Vec<SpinState>,
    pub energies: Vec<f64>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn final_state(&self) -> SpinState {
        *self.states.last().expect("trajectories start with y0")
    }

    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    /// One line per state: `step state_index energy`.
    pub fn to_text(&self) -> String {
        let mut out = format!("# input {} ({} steps)\n", self.input, self.steps());
        for (k, (s, e)) in self.states.iter().zip(&self.energies).enumerate() {
            writeln!(out, "{k} {} {e}", s.index()).unwrap();
        }
        out
    }
}

fn check(h: &Hamiltonian, x: SpinState, y0: SpinState) -> Result<()> {
    if x.dim() != h.n() {
        return Err(Error::Dimension {
            expected: h.n(),
            got: x.dim(),
        });
    }
    if y0.dim() != h.m() {
        return Err(Error::Dimension {
            expected: h.m(),
            got: y0.dim(),
        });
    }
    Ok(())
}

/// Steepest descent: move to the lowest single-flip neighbour while that
/// strictly lowers the energy (ties go to the lowest flipped index).
///
/// Fails with [`Error::StepCap`] if more than `step_cap` moves are needed.
pub fn greedy_descend(h: &Hamiltonian, x: SpinState, y0: SpinState, step_cap: usize) -> Result<Trajectory> {
    check(h, x, y0)?;
    let mut y = y0;
    let mut e = h.energy(x, y);
    let mut states = vec![y];
    let mut energies = vec![e];
    loop {
        let mut best: Option<(SpinState, f64)> = None;
        for i in 0..h.m() {
            let z = y.flip(i);
            let ez = h.energy(x, z);
            if ez < e && best.is_none_or(|(b, eb)| ez < eb || (ez == eb && z.index() < b.index())) {
                best = Some((z, ez));
            }
        }
        let Some((z, ez)) = best else {
            return Ok(Trajectory {
                input: x,
                states,
                energies,
                termination: Termination::LocalMinimum,
            });
        };
        if states.len() > step_cap {
            return Err(Error::StepCap(step_cap));
        }
        y = z;
        e = ez;
        states.push(y);
        energies.push(e);
    }
}

/// Outcome of a Glauber run.
#[derive(Debug, Clone, PartialEq)]
pub struct GlauberRun {
    pub trajectory: Trajectory,
    /// Number of steps ending in each output state (indexed by output index).
    pub occupancy: Vec<u64>,
    /// `flips[y][i]`: accepted flips of spin `i` from state `y`.
    pub flips: Vec<Vec<u64>>,
    /// `proposals[y][i]`: proposed flips of spin `i` from state `y`.
    pub proposals: Vec<Vec<u64>>,
}

impl GlauberRun {
    /// Fraction of recorded steps spent in `target`.
    pub fn occupancy_of(&self, target: SpinState) -> f64 {
        let total: u64 = self.occupancy.iter().sum();
        if total == 0 {
            return 0.0;
        }
        self.occupancy[target.index() as usize] as f64 / total as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlauberOptions {
    pub beta: f64,
    pub steps: usize,
    /// Steps discarded from occupancy statistics.
    pub burn_in: usize,
    pub seed: u64,
    /// Whether to keep the full state sequence (otherwise only the final state).
    pub record: bool,
}

/// Glauber dynamics at inverse temperature `beta`: pick a uniform output
/// spin and flip it with probability `1 / (1 + exp(β ΔE))`.
pub fn glauber_sample(h: &Hamiltonian, x: SpinState, y0: SpinState, opts: &GlauberOptions) -> Result<GlauberRun> {
    check(h, x, y0)?;
    if !(opts.beta >= 0.0) {
        return Err(Error::Invalid(format!("inverse temperature must be ≥ 0, got {}", opts.beta)));
    }
    let m = h.m();
    if m == 0 {
        return Err(Error::Invalid("Glauber dynamics needs at least one output spin".into()));
    }
    let size = 1usize << m;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut y = y0;
    let mut e = h.energy(x, y);
    let mut states = vec![y];
    let mut energies = vec![e];
    let mut occupancy = vec![0u64; size];
    let mut flips = vec![vec![0u64; m]; size];
    let mut proposals = vec![vec![0u64; m]; size];
    for step in 0..opts.steps {
        let i = rng.gen_range(0..m);
        let z = y.flip(i);
        let ez = h.energy(x, z);
        let accept = 1.0 / (1.0 + (opts.beta * (ez - e)).exp());
        let counted = step >= opts.burn_in;
        if counted {
            proposals[y.index() as usize][i] += 1;
        }
        if rng.gen::<f64>() < accept {
            if counted {
                flips[y.index() as usize][i] += 1;
            }
            y = z;
            e = ez;
        }
        if counted {
            occupancy[y.index() as usize] += 1;
        }
        if opts.record {
            states.push(y);
            energies.push(e);
        }
    }
    if !opts.record && opts.steps > 0 {
        states.push(y);
        energies.push(e);
    }
    Ok(GlauberRun {
        trajectory: Trajectory {
            input: x,
            states,
            energies,
            termination: Termination::StepCap,
        },
        occupancy,
        flips,
        proposals,
    })
}
