//! Geometry of the residual Hamiltonian `E_J(a, y) = a·y + Σ_{i<j} J_ij y_i y_j`.
//!
//! For fixed couplings `J`, the space of local fields `a ∈ ℝᵐ` splits into
//! open convex cells `C_J(y)` where `y` is the unique minimizer, plus the
//! boundary set where two or more outputs tie. A Hamiltonian with affine
//! fields `A(x)` encodes a circuit exactly when every `A(x)` lands in the
//! cell of `f(x)`.

use std::fmt::Write as _;

use crate::circuit::{Circuit, SpinState};
use crate::hamiltonian::{Couplings, Hamiltonian};
use crate::oracle::coupled_energy;
use crate::par::{self, Execution};
use crate::{Error, Result};

/// An open half-space `{a | normal·a + offset > 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn value(&self, a: &[f64]) -> f64 {
        self.normal.iter().zip(a).map(|(n, x)| n * x).sum::<f64>() + self.offset
    }

    pub fn contains(&self, a: &[f64]) -> bool {
        self.value(a) > 0.0
    }
}

/// The minimizing partition of `a`-space for fixed couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualPartition {
    pub couplings: Couplings,
}

impl ResidualPartition {
    pub fn new(couplings: Couplings) -> Self {
        Self { couplings }
    }

    /// Two outputs with a single coupling `J_12`.
    pub fn pair(j12: f64) -> Self {
        let mut j = Couplings::zeros(2);
        j.set(0, 1, j12);
        Self::new(j)
    }

    pub fn m(&self) -> usize {
        self.couplings.m()
    }

    pub fn energy(&self, a: &[f64], y: SpinState) -> f64 {
        coupled_energy(&self.couplings, a, y)
    }

    fn energies(&self, a: &[f64]) -> Vec<f64> {
        SpinState::all(self.m()).map(|y| self.energy(a, y)).collect()
    }

    /// All outputs within `tol` of the minimum of `E_J(a, ·)`.
    pub fn ground_state_map(&self, a: &[f64], tol: f64) -> Vec<SpinState> {
        let e = self.energies(a);
        let min = e.iter().copied().fold(f64::INFINITY, f64::min);
        e.iter()
            .enumerate()
            .filter(|(_, &v)| v - min <= tol)
            .map(|(i, _)| SpinState::from_index(i as u64, self.m()))
            .collect()
    }

    /// `Q_{y,z} = {a | ⟨a, z - y⟩ + ⟨J, z^{⊗2} - y^{⊗2}⟩_F > 0}` for every `z ≠ y`,
    /// whose intersection is the cell `C_J(y)`.
    pub fn cell_halfspaces(&self, y: SpinState) -> Vec<HalfSpace> {
        let m = self.m();
        SpinState::all(m)
            .filter(|&z| z != y)
            .map(|z| HalfSpace {
                normal: (0..m).map(|i| f64::from(z.get(i) - y.get(i))).collect(),
                offset: self.couplings.quadratic(z) - self.couplings.quadratic(y),
            })
            .collect()
    }

    /// `a ∈ C_J(y)`, decided by the half-space representation.
    pub fn in_cell(&self, y: SpinState, a: &[f64]) -> bool {
        self.cell_halfspaces(y).iter().all(|q| q.contains(a))
    }

    /// `true` iff the unique minimizer at `a` starts with the bits of `fixed`.
    ///
    /// This is membership in the union of the cells of every completion of
    /// `fixed` by auxiliary bits.
    pub fn cell_union_membership(&self, a: &[f64], fixed: SpinState, tol: f64) -> Result<bool> {
        if fixed.dim() > self.m() {
            return Err(Error::Dimension {
                expected: self.m(),
                got: fixed.dim(),
            });
        }
        let g = self.ground_state_map(a, tol);
        Ok(g.len() == 1 && g[0].slice(0, fixed.dim()) == fixed)
    }

    /// Premise of the local-minimum elimination theorem:
    /// `E_J(a, z) - E_J(a, y) < E_J(0, z - y)` for every `y ≠ z`.
    pub fn local_free_premise(&self, a: &[f64], z: SpinState) -> bool {
        let m = self.m();
        let ez = self.energy(a, z);
        SpinState::all(m).filter(|&y| y != z).all(|y| {
            let d: Vec<f64> = (0..m).map(|i| f64::from(z.get(i) - y.get(i))).collect();
            ez - self.energy(a, y) < self.couplings.frobenius_outer(&d, &d)
        })
    }

    /// Labels an `N × N` grid over `[-R, R]²` (requires `m = 2`).
    ///
    /// Pixel `(r, c)` samples `a = (-R + (c + ½)·2R/N, R - (r + ½)·2R/N)`, so
    /// rows run top to bottom in decreasing `a₂`. A pixel is boundary when
    /// its two lowest energies differ by less than `tol·(1 + |E_min|)`.
    pub fn rasterize(&self, radius: f64, resolution: usize, tol: f64, exec: Execution) -> Result<Raster> {
        if self.m() != 2 {
            return Err(Error::Shape(format!("rasterization needs m = 2, got m = {}", self.m())));
        }
        if resolution == 0 || !(radius > 0.0) {
            return Err(Error::Invalid("raster needs a positive radius and resolution".into()));
        }
        let step = 2.0 * radius / resolution as f64;
        let n = resolution as u64;
        let labels = par::map_range(exec, 0..n * n, |p| {
            let (r, c) = (p / n, p % n);
            let a = [-radius + (c as f64 + 0.5) * step, radius - (r as f64 + 0.5) * step];
            let e = self.energies(&a);
            let mut order: Vec<usize> = (0..e.len()).collect();
            order.sort_by(|&i, &j| e[i].total_cmp(&e[j]).then(i.cmp(&j)));
            let (lo, next) = (e[order[0]], e[order[1]]);
            (next - lo >= tol * (1.0 + lo.abs())).then_some(order[0] as u8)
        });
        Ok(Raster {
            size: resolution,
            radius,
            labels,
        })
    }
}

/// `true` iff every `A(x) = linear·x + offset` lies strictly inside `C_J(f(x))`.
pub fn check_affine_solution(c: &Circuit, linear: &[Vec<f64>], offset: &[f64], couplings: &Couplings) -> Result<bool> {
    let h = Hamiltonian::from_affine(linear, offset, couplings.clone())?;
    if h.shape() != c.shape() {
        return Err(Error::Shape(format!(
            "affine map of shape {:?} does not match circuit shape {:?}",
            h.shape(),
            c.shape()
        )));
    }
    let part = ResidualPartition::new(couplings.clone());
    Ok(c.rows().all(|(x, fx)| part.in_cell(fx, &h.local_fields(x))))
}

/// Cell labels of a rasterized `m = 2` partition; `None` marks boundary pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub size: usize,
    pub radius: f64,
    /// Row-major, row 0 at the top.
    pub labels: Vec<Option<u8>>,
}

/// RGB colour of each output index, plus black for the boundary.
pub const CELL_COLORS: [(u8, u8, u8); 4] = [
    (255, 165, 0), // (-1,-1) orange
    (128, 0, 128), // (1,-1) purple
    (0, 128, 0),   // (-1,1) green
    (0, 0, 255),   // (1,1) blue
];
pub const BOUNDARY_COLOR: (u8, u8, u8) = (0, 0, 0);

impl Raster {
    pub fn label(&self, row: usize, col: usize) -> Option<u8> {
        self.labels[row * self.size + col]
    }

    /// Distinct cell labels present on the grid.
    pub fn cells_present(&self) -> Vec<u8> {
        let mut v: Vec<u8> = self.labels.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Whether cells `a` and `b` touch on the grid: some pixel of `a` is
    /// 4-adjacent to a pixel of `b`, or a boundary pixel has 4-neighbours in both.
    pub fn cells_adjacent(&self, a: u8, b: u8) -> bool {
        let n = self.size;
        let neighbours = |r: usize, c: usize| {
            let mut v = Vec::with_capacity(4);
            if r > 0 {
                v.push(self.label(r - 1, c));
            }
            if r + 1 < n {
                v.push(self.label(r + 1, c));
            }
            if c > 0 {
                v.push(self.label(r, c - 1));
            }
            if c + 1 < n {
                v.push(self.label(r, c + 1));
            }
            v
        };
        for r in 0..n {
            for c in 0..n {
                let around = neighbours(r, c);
                let touches = match self.label(r, c) {
                    Some(l) if l == a => around.contains(&Some(b)),
                    Some(_) => false,
                    None => around.contains(&Some(a)) && around.contains(&Some(b)),
                };
                if touches {
                    return true;
                }
            }
        }
        false
    }

    /// Plain-text PPM (P3).
    pub fn to_ppm(&self) -> String {
        let mut out = format!("P3\n{} {}\n255\n", self.size, self.size);
        for r in 0..self.size {
            let row: Vec<String> = (0..self.size)
                .map(|c| {
                    let (red, g, b) = self.label(r, c).map_or(BOUNDARY_COLOR, |l| CELL_COLORS[l as usize]);
                    format!("{red} {g} {b}")
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Legend mapping colours to output states.
    pub fn legend(&self) -> String {
        let mut out = format!("# window [-{r}, {r}]^2, {n}x{n} pixels, rows top to bottom in decreasing a2\n", r = self.radius, n = self.size);
        for (i, (r, g, b)) in CELL_COLORS.iter().enumerate() {
            writeln!(out, "{i} {} {r} {g} {b}", SpinState::from_index(i as u64, 2)).unwrap();
        }
        let (r, g, b) = BOUNDARY_COLOR;
        writeln!(out, "boundary - {r} {g} {b}").unwrap();
        out
    }
}
