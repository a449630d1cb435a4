//! Linear constraint systems whose feasible sets are encoding Hamiltonians.
//!
//! Every row `r` is a linear functional on the packed coefficient vector `u`
//! and is constrained by `⟨u, r⟩ ≥ rhs` (`rhs = 1` unless rescaled). Rows
//! are emitted in canonical order: input index major, competitor index minor.

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use crate::circuit::{Circuit, SpinState};
use crate::hamiltonian::{coefficient_len, feature_vector, pair_index, Hamiltonian};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    /// `H(x, y) - H(x, f(x)) ≥ 1`.
    Global,
    /// The global row plus `⟨J, (f(x) - y)^{⊗2}⟩_F`, which rules out spurious local minima.
    LocalFree,
    /// `H(x, y) - H(x, z) ≥ 1` for a spanning-tree edge `y → z`.
    TreeEdge,
}

impl RowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RowKind::Global => "global",
            RowKind::LocalFree => "local_free",
            RowKind::TreeEdge => "tree_edge",
        }
    }
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a row came from: at input `input`, `higher` must sit above `lower`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowTag {
    pub input: SpinState,
    pub higher: SpinState,
    pub lower: SpinState,
    pub kind: RowKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub n: usize,
    pub m: usize,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub tags: Vec<RowTag>,
}

impl ConstraintSystem {
    fn empty(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            rows: Vec::new(),
            rhs: Vec::new(),
            tags: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<f64>, tag: RowTag) {
        self.rows.push(row);
        self.rhs.push(1.0);
        self.tags.push(tag);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of coefficients per row.
    pub fn width(&self) -> usize {
        coefficient_len(self.n, self.m)
    }

    /// Replaces every right-hand side by `margin`.
    pub fn with_margin(mut self, margin: f64) -> Self {
        self.rhs.iter_mut().for_each(|b| *b = margin);
        self
    }

    /// Smallest slack `⟨u, r⟩ - rhs` over all rows (`+∞` for an empty system).
    pub fn min_slack(&self, u: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, b)| r.iter().zip(u).map(|(a, x)| a * x).sum::<f64>() - b)
            .fold(f64::INFINITY, f64::min)
    }

    /// Plain-text dump: one row per line, `coeffs >= rhs # provenance`.
    pub fn to_text(&self) -> String {
        let mut out = format!("# constraints n={} m={} rows={} width={}\n", self.n, self.m, self.len(), self.width());
        for ((row, b), tag) in self.rows.iter().zip(&self.rhs).zip(&self.tags) {
            let coeffs: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(
                out,
                "{} >= {b} # x={} higher={} lower={} kind={}",
                coeffs.join(" "),
                tag.input,
                tag.higher,
                tag.lower,
                tag.kind
            )
            .unwrap();
        }
        out
    }
}

fn difference(x: SpinState, higher: SpinState, lower: SpinState) -> Vec<f64> {
    let a = feature_vector(x, higher);
    let b = feature_vector(x, lower);
    a.iter().zip(&b).map(|(p, q)| p - q).collect()
}

/// Rows `⟨u, v(x, y) - v(x, f(x))⟩ ≥ 1` for every input `x` and output `y ≠ f(x)`.
pub fn global_min_rows(c: &Circuit) -> ConstraintSystem {
    let mut sys = ConstraintSystem::empty(c.n(), c.m());
    for (x, fx) in c.rows() {
        for y in SpinState::all(c.m()).filter(|&y| y != fx) {
            sys.push(
                difference(x, y, fx),
                RowTag {
                    input: x,
                    higher: y,
                    lower: fx,
                    kind: RowKind::Global,
                },
            );
        }
    }
    sys
}

/// Global rows with `⟨J, (f(x) - y)^{⊗2}⟩_F` added on the coupling coordinates.
///
/// Any feasible Hamiltonian encodes the circuit and has `f(x)` as the only
/// local minimum of every input level.
pub fn local_min_free_rows(c: &Circuit) -> ConstraintSystem {
    let (n, m) = c.shape();
    let offset = m + n * m;
    let mut sys = ConstraintSystem::empty(n, m);
    for (x, fx) in c.rows() {
        for y in SpinState::all(m).filter(|&y| y != fx) {
            let mut row = difference(x, y, fx);
            for i in 0..m {
                let di = f64::from(fx.get(i) - y.get(i));
                for j in i + 1..m {
                    let dj = f64::from(fx.get(j) - y.get(j));
                    row[offset + pair_index(i, j, m)] += di * dj;
                }
            }
            sys.push(
                row,
                RowTag {
                    input: x,
                    higher: y,
                    lower: fx,
                    kind: RowKind::LocalFree,
                },
            );
        }
    }
    sys
}

/// One row `⟨u, v(x, y) - v(x, z)⟩ ≥ 1` per tree edge `y → z`.
///
/// `trees[i]` must be a spanning tree for the input with index `i`, rooted at its output.
pub fn tree_rows(c: &Circuit, trees: &[EnergyGraph]) -> Result<ConstraintSystem> {
    let (n, m) = c.shape();
    if trees.len() != 1usize << n {
        return Err(Error::Dimension {
            expected: 1 << n,
            got: trees.len(),
        });
    }
    let mut sys = ConstraintSystem::empty(n, m);
    for ((x, fx), tree) in c.rows().zip(trees) {
        if tree.input != x {
            return Err(Error::InvalidTree(format!(
                "tree for input {} supplied at position of input {x}",
                tree.input
            )));
        }
        tree.validate_spanning_tree(fx)?;
        let mut edges = tree.edges.clone();
        edges.sort_by_key(|(y, z)| (y.index(), z.index()));
        for (y, z) in edges {
            sys.push(
                difference(x, y, z),
                RowTag {
                    input: x,
                    higher: y,
                    lower: z,
                    kind: RowKind::TreeEdge,
                },
            );
        }
    }
    Ok(sys)
}

/// Unpacks an LP solution into a Hamiltonian.
pub fn decode(u: &[f64], n: usize, m: usize) -> Result<Hamiltonian> {
    Hamiltonian::unpack(u, n, m)
}

/// A directed graph on the outputs of one input level; an edge `(z, y)`
/// asserts `H(x, z) > H(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGraph {
    pub input: SpinState,
    pub m: usize,
    pub edges: Vec<(SpinState, SpinState)>,
}

impl EnergyGraph {
    pub fn new(input: SpinState, m: usize, edges: Vec<(SpinState, SpinState)>) -> Result<Self> {
        for &(z, y) in &edges {
            if z.dim() != m || y.dim() != m {
                return Err(Error::Dimension {
                    expected: m,
                    got: if z.dim() != m { z.dim() } else { y.dim() },
                });
            }
            if z == y {
                return Err(Error::InvalidTree(format!("self-loop at {z}")));
            }
        }
        Ok(Self { input, m, edges })
    }

    /// Checks the spanning-tree invariant: `2^m - 1` edges, out-degree one
    /// everywhere except the root, Hamming-distance-1 edges, no cycles.
    pub fn validate_spanning_tree(&self, root: SpinState) -> Result<()> {
        let size = 1usize << self.m;
        if self.edges.len() != size - 1 {
            return Err(Error::InvalidTree(format!(
                "expected {} edges, found {}",
                size - 1,
                self.edges.len()
            )));
        }
        let mut parent: Vec<Option<usize>> = vec![None; size];
        for &(from, to) in &self.edges {
            if from.hamming(to) != 1 {
                return Err(Error::InvalidTree(format!("edge {from} -> {to} is not a single flip")));
            }
            if from == root {
                return Err(Error::InvalidTree(format!("root {root} has an outgoing edge")));
            }
            let slot = &mut parent[from.index() as usize];
            if slot.is_some() {
                return Err(Error::InvalidTree(format!("{from} has more than one outgoing edge")));
            }
            *slot = Some(to.index() as usize);
        }
        for start in 0..size {
            let mut node = start;
            let mut steps = 0;
            while node != root.index() as usize {
                match parent[node] {
                    Some(next) => node = next,
                    None => {
                        return Err(Error::InvalidTree(format!(
                            "{} does not reach the root",
                            SpinState::from_index(start as u64, self.m)
                        )))
                    }
                }
                steps += 1;
                if steps > size {
                    return Err(Error::InvalidTree("cycle".into()));
                }
            }
        }
        Ok(())
    }

    /// Sorted edge list, usable as a fingerprint.
    pub fn sorted_edges(&self) -> Vec<(u64, u64)> {
        let mut e: Vec<(u64, u64)> = self.edges.iter().map(|(a, b)| (a.index(), b.index())).collect();
        e.sort_unstable();
        e
    }

    /// Graphviz DOT rendering, one edge per line.
    pub fn to_dot(&self) -> String {
        let mut out = format!("digraph energy {{\n  label=\"x = {}\";\n", self.input);
        for y in SpinState::all(self.m) {
            writeln!(out, "  n{} [label=\"{y}\"];", y.index()).unwrap();
        }
        for (z, y) in &self.edges {
            writeln!(out, "  n{} -> n{};", z.index(), y.index()).unwrap();
        }
        out.push_str("}\n");
        out
    }

    /// Edges as a set of index pairs.
    pub fn edge_set(&self) -> HashSet<(u64, u64)> {
        self.sorted_edges().into_iter().collect()
    }
}
