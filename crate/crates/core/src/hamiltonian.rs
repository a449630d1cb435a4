//! Reduced Ising Hamiltonians with pinned inputs.
//!
//! A shape-`(n, m)` Hamiltonian is
//!
//! ```text
//! H(x, y) = Σ_i A_i(x) y_i + Σ_{i<j} J_ij y_i y_j,   A_i(x) = h_i + Σ_k W_ki x_k
//! ```
//!
//! Terms involving only input spins are not represented: inputs are pinned,
//! so such terms shift every output level of an input equally.
//!
//! The coefficient vector has length `p = m + n·m + m(m-1)/2` and is laid out
//! as `[h | W row-major by input k | J by (i<j) lexicographic]`.

use std::fmt::Write as _;

use crate::circuit::{Circuit, SpinState};
use crate::{Error, Result};

/// Number of unordered pairs `i < j` among `m` spins.
#[inline]
pub fn pair_count(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// Position of the pair `(i, j)`, `i < j`, in lexicographic order.
#[inline]
pub fn pair_index(i: usize, j: usize, m: usize) -> usize {
    debug_assert!(i < j && j < m);
    i * (2 * m - i - 1) / 2 + (j - i - 1)
}

/// Length of the coefficient vector for shape `(n, m)`.
pub fn coefficient_len(n: usize, m: usize) -> usize {
    m + n * m + pair_count(m)
}

/// A strictly upper-triangular coupling matrix, stored packed.
#[derive(Debug, Clone, PartialEq)]
pub struct Couplings {
    m: usize,
    values: Vec<f64>,
}

impl Couplings {
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            values: vec![0.0; pair_count(m)],
        }
    }

    /// From packed `(i<j)` lexicographic values.
    pub fn from_packed(m: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != pair_count(m) {
            return Err(Error::Dimension {
                expected: pair_count(m),
                got: values.len(),
            });
        }
        Ok(Self { m, values })
    }

    /// From a dense `m × m` matrix; entries on or below the diagonal must be zero.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let mut c = Self::zeros(m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Dimension {
                    expected: m,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if j <= i {
                    if v != 0.0 {
                        return Err(Error::Invalid(format!(
                            "coupling ({i},{j}) is not strictly upper-triangular"
                        )));
                    }
                } else {
                    c.set(i, j, v);
                }
            }
        }
        Ok(c)
    }

    /// Strictly upper-triangular part of an arbitrary square matrix.
    pub fn upper_part(rows: &[Vec<f64>]) -> Self {
        let m = rows.len();
        let mut c = Self::zeros(m);
        for i in 0..m {
            for j in i + 1..m {
                c.set(i, j, rows[i][j]);
            }
        }
        c
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn packed(&self) -> &[f64] {
        &self.values
    }

    /// `J_ij` for any `i, j`; zero on and below the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i < j {
            self.values[pair_index(i, j, self.m)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < j && j < self.m, "coupling ({i},{j}) outside the strict upper triangle");
        let k = pair_index(i, j, self.m);
        self.values[k] = v;
    }

    /// Iterates `(i, j, J_ij)` over `i < j` in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let m = self.m;
        (0..m)
            .flat_map(move |i| (i + 1..m).map(move |j| (i, j)))
            .zip(&self.values)
            .map(|((i, j), &v)| (i, j, v))
    }

    /// `⟨J, v ⊗ w⟩_F = Σ_{i<j} J_ij v_i w_j`.
    pub fn frobenius_outer(&self, v: &[f64], w: &[f64]) -> f64 {
        self.iter().map(|(i, j, c)| c * v[i] * w[j]).sum()
    }

    /// `⟨J, y^{⊗2}⟩_F` for a spin state.
    pub fn quadratic(&self, y: SpinState) -> f64 {
        let mut acc = 0.0;
        for (i, j, c) in self.iter() {
            acc += c * f64::from(y.get(i) * y.get(j));
        }
        acc
    }

    /// The symmetric hollow matrix `sym(J) = (J + Jᵀ) / 2`.
    pub fn symmetric(&self) -> Vec<Vec<f64>> {
        let mut s = vec![vec![0.0; self.m]; self.m];
        for (i, j, c) in self.iter() {
            s[i][j] = c / 2.0;
            s[j][i] = c / 2.0;
        }
        s
    }
}

/// A reduced Hamiltonian for a shape-`(n, m)` circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n: usize,
    m: usize,
    /// Output biases `h_i`.
    h: Vec<f64>,
    /// Input–output couplings, `w[k * m + i] = W_ki`.
    w: Vec<f64>,
    j: Couplings,
}

impl Hamiltonian {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            h: vec![0.0; m],
            w: vec![0.0; n * m],
            j: Couplings::zeros(m),
        }
    }

    /// `w` is indexed `w[k][i] = W_ki` (input `k`, output `i`).
    pub fn new(h: Vec<f64>, w: Vec<Vec<f64>>, j: Couplings) -> Result<Self> {
        let m = h.len();
        let n = w.len();
        if j.m() != m {
            return Err(Error::Dimension {
                expected: m,
                got: j.m(),
            });
        }
        let mut flat = Vec::with_capacity(n * m);
        for row in &w {
            if row.len() != m {
                return Err(Error::Dimension {
                    expected: m,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Ok(Self {
            n,
            m,
            h,
            w: flat,
            j,
        })
    }

    /// Assembles `H(x, y) = (T x + b)·y + yᵀ J y` from an affine map given
    /// by its `m × n` matrix `linear` and offset `b`.
    pub fn from_affine(linear: &[Vec<f64>], offset: &[f64], j: Couplings) -> Result<Self> {
        let m = offset.len();
        if linear.len() != m {
            return Err(Error::Dimension {
                expected: m,
                got: linear.len(),
            });
        }
        let n = linear.first().map_or(0, Vec::len);
        let mut w = vec![vec![0.0; m]; n];
        for (i, row) in linear.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: row.len(),
                });
            }
            for (k, &v) in row.iter().enumerate() {
                w[k][i] = v;
            }
        }
        let mut ham = Self::new(offset.to_vec(), w, j)?;
        ham.n = n;
        Ok(ham)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn biases(&self) -> &[f64] {
        &self.h
    }

    pub fn bias(&self, i: usize) -> f64 {
        self.h[i]
    }

    pub fn set_bias(&mut self, i: usize, v: f64) {
        self.h[i] = v;
    }

    /// `W_ki`, coupling between input `k` and output `i`.
    pub fn input_coupling(&self, k: usize, i: usize) -> f64 {
        self.w[k * self.m + i]
    }

    pub fn set_input_coupling(&mut self, k: usize, i: usize, v: f64) {
        self.w[k * self.m + i] = v;
    }

    pub fn couplings(&self) -> &Couplings {
        &self.j
    }

    pub fn couplings_mut(&mut self) -> &mut Couplings {
        &mut self.j
    }

    /// The local fields `A(x)`.
    pub fn local_fields(&self, x: SpinState) -> Vec<f64> {
        let mut a = self.h.clone();
        for k in 0..self.n {
            let xk = x.spin_f64(k);
            for (i, ai) in a.iter_mut().enumerate() {
                *ai += self.w[k * self.m + i] * xk;
            }
        }
        a
    }

    /// Linear part of `A` as an `m × n` matrix.
    pub fn linear_part(&self) -> Vec<Vec<f64>> {
        (0..self.m)
            .map(|i| (0..self.n).map(|k| self.input_coupling(k, i)).collect())
            .collect()
    }

    fn check(&self, x: SpinState, y: SpinState) -> Result<()> {
        if x.dim() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: x.dim(),
            });
        }
        if y.dim() != self.m {
            return Err(Error::Dimension {
                expected: self.m,
                got: y.dim(),
            });
        }
        Ok(())
    }

    /// `H(x, y)`, with dimension checks.
    pub fn evaluate(&self, x: SpinState, y: SpinState) -> Result<f64> {
        self.check(x, y)?;
        Ok(self.energy(x, y))
    }

    /// `H(x, y)` without dimension checks.
    ///
    /// Terms are accumulated in coefficient-vector order, so the result is
    /// bit-identical to `⟨pack(H), feature_vector(x, y)⟩`.
    #[inline]
    pub fn energy(&self, x: SpinState, y: SpinState) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.m {
            acc += self.h[i] * y.spin_f64(i);
        }
        for k in 0..self.n {
            let xk = x.get(k);
            for i in 0..self.m {
                acc += self.w[k * self.m + i] * f64::from(xk * y.get(i));
            }
        }
        for (i, j, c) in self.j.iter() {
            acc += c * f64::from(y.get(i) * y.get(j));
        }
        acc
    }

    /// Energy of the full state with index `x + (y << n)`.
    pub fn energy_full(&self, s: u64) -> f64 {
        let x = SpinState::from_index(s & crate::circuit::mask(self.n), self.n);
        let y = SpinState::from_index(s >> self.n, self.m);
        self.energy(x, y)
    }

    /// Energies of every output at input `x`, indexed by output index.
    pub fn level_energies(&self, x: SpinState) -> Vec<f64> {
        SpinState::all(self.m).map(|y| self.energy(x, y)).collect()
    }

    /// The coefficient vector in canonical order.
    pub fn pack(&self) -> Vec<f64> {
        let mut u = Vec::with_capacity(coefficient_len(self.n, self.m));
        u.extend_from_slice(&self.h);
        u.extend_from_slice(&self.w);
        u.extend_from_slice(self.j.packed());
        u
    }

    /// Inverse of [`pack`](Self::pack).
    pub fn unpack(u: &[f64], n: usize, m: usize) -> Result<Self> {
        let p = coefficient_len(n, m);
        if u.len() != p {
            return Err(Error::Dimension {
                expected: p,
                got: u.len(),
            });
        }
        Ok(Self {
            n,
            m,
            h: u[..m].to_vec(),
            w: u[m..m + n * m].to_vec(),
            j: Couplings::from_packed(m, u[m + n * m..].to_vec())?,
        })
    }

    /// `‖pack(H)‖₁`.
    pub fn l1_norm(&self) -> f64 {
        self.pack().iter().map(|v| v.abs()).sum()
    }

    /// `H + other`.
    pub fn add(&self, other: &Hamiltonian) -> Result<Hamiltonian> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "cannot add Hamiltonians of shapes {:?} and {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let u: Vec<f64> = self.pack().iter().zip(other.pack()).map(|(a, b)| a + b).collect();
        Self::unpack(&u, self.n, self.m)
    }

    pub fn scale(&self, factor: f64) -> Hamiltonian {
        let u: Vec<f64> = self.pack().iter().map(|v| v * factor).collect();
        Self::unpack(&u, self.n, self.m).expect("same shape")
    }

    /// The full polynomial over `d = n + m` spins `s = (x, y)` in spin convention.
    pub fn to_polynomial(&self) -> QuadraticPolynomial {
        let d = self.n + self.m;
        let mut p = QuadraticPolynomial::zeros(d);
        for i in 0..self.m {
            p.linear[self.n + i] = self.h[i];
        }
        for k in 0..self.n {
            for i in 0..self.m {
                p.set_quadratic(k, self.n + i, self.input_coupling(k, i));
            }
        }
        for (i, j, c) in self.j.iter() {
            p.set_quadratic(self.n + i, self.n + j, c);
        }
        p
    }

    /// Reduces a full polynomial over `(x, y)` to the pinned-input form.
    ///
    /// The constant, input biases and input–input couplings are dropped
    /// (with a warning when nonzero).
    pub fn from_polynomial(n: usize, m: usize, poly: &QuadraticPolynomial) -> Result<Self> {
        if poly.dim != n + m {
            return Err(Error::Dimension {
                expected: n + m,
                got: poly.dim,
            });
        }
        let mut dropped = poly.constant != 0.0;
        let mut ham = Self::zeros(n, m);
        for s in 0..poly.dim {
            if s < n {
                dropped |= poly.linear[s] != 0.0;
            } else {
                ham.h[s - n] = poly.linear[s];
            }
        }
        for a in 0..poly.dim {
            for b in a + 1..poly.dim {
                let c = poly.quadratic(a, b);
                match (a < n, b < n) {
                    (true, true) => dropped |= c != 0.0,
                    (true, false) => ham.set_input_coupling(a, b - n, c),
                    (false, false) => ham.j.set(a - n, b - n, c),
                    (false, true) => unreachable!("a < b"),
                }
            }
        }
        if dropped {
            log::warn!("dropping input-only terms of the Hamiltonian (inputs are pinned)");
        }
        Ok(ham)
    }

    /// Coefficients of `H̃` on `{0, 1}^{n+m}` with `H̃((s + 1) / 2) = H(s)`.
    pub fn to_boolean_polynomial(&self) -> QuadraticPolynomial {
        self.to_polynomial().spin_to_boolean()
    }

    /// Renders the text format (`ham <n> <m>` plus nonzero `h`/`w`/`j` lines, 0-based indices).
    pub fn to_text(&self) -> String {
        let mut out = format!("ham {} {}\n", self.n, self.m);
        for (i, &v) in self.h.iter().enumerate() {
            if v != 0.0 {
                writeln!(out, "h {i} {v:?}").unwrap();
            }
        }
        for k in 0..self.n {
            for i in 0..self.m {
                let v = self.input_coupling(k, i);
                if v != 0.0 {
                    writeln!(out, "w {k} {i} {v:?}").unwrap();
                }
            }
        }
        for (i, j, v) in self.j.iter() {
            if v != 0.0 {
                writeln!(out, "j {i} {j} {v:?}").unwrap();
            }
        }
        out
    }

    /// Parses the text format. Omitted entries are zero; `#` starts a comment.
    ///
    /// Lines `x <k> <val>` (input bias) and `xx <k> <l> <val>` (input–input
    /// coupling) are accepted and dropped with a warning.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let (hl, header) = lines.next().ok_or(perr(0, "empty Hamiltonian".into()))?;
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 3 || f[0] != "ham" {
            return Err(perr(hl, "expected `ham <n> <m>`".into()));
        }
        let n: usize = f[1].parse().map_err(|_| perr(hl, "bad input count".into()))?;
        let m: usize = f[2].parse().map_err(|_| perr(hl, "bad output count".into()))?;
        let mut ham = Self::zeros(n, m);
        let mut dropped = false;
        for (line, body) in lines {
            let f: Vec<&str> = body.split_whitespace().collect();
            let idx = |s: &str, bound: usize| -> Result<usize> {
                let v: usize = s.parse().map_err(|_| perr(line, format!("bad index `{s}`")))?;
                if v >= bound {
                    return Err(perr(line, format!("index {v} out of range (< {bound})")));
                }
                Ok(v)
            };
            let val = |s: &str| -> Result<f64> {
                let v: f64 = s.parse().map_err(|_| perr(line, format!("bad value `{s}`")))?;
                if !v.is_finite() {
                    return Err(perr(line, format!("non-finite value `{s}`")));
                }
                Ok(v)
            };
            match f.as_slice() {
                ["h", i, v] => ham.h[idx(i, m)?] = val(v)?,
                ["w", k, i, v] => {
                    let (k, i) = (idx(k, n)?, idx(i, m)?);
                    ham.set_input_coupling(k, i, val(v)?);
                }
                ["j", i, j, v] => {
                    let (i, j) = (idx(i, m)?, idx(j, m)?);
                    if i >= j {
                        return Err(perr(line, format!("coupling j {i} {j} needs i < j")));
                    }
                    ham.j.set(i, j, val(v)?);
                }
                ["x", k, v] => {
                    idx(k, n)?;
                    dropped |= val(v)? != 0.0;
                }
                ["xx", k, l, v] => {
                    idx(k, n)?;
                    idx(l, n)?;
                    dropped |= val(v)? != 0.0;
                }
                _ => return Err(perr(line, format!("unrecognized line `{body}`"))),
            }
        }
        if dropped {
            log::warn!("dropping input-only terms of the Hamiltonian (inputs are pinned)");
        }
        Ok(ham)
    }
}

/// The feature vector `v(x, y) = [y | x_k y_i (k-major) | y_i y_j (i<j)]`.
pub fn feature_vector(x: SpinState, y: SpinState) -> Vec<f64> {
    let (n, m) = (x.dim(), y.dim());
    let mut v = Vec::with_capacity(coefficient_len(n, m));
    v.extend((0..m).map(|i| y.spin_f64(i)));
    for k in 0..n {
        v.extend((0..m).map(|i| f64::from(x.get(k) * y.get(i))));
    }
    for i in 0..m {
        for j in i + 1..m {
            v.push(f64::from(y.get(i) * y.get(j)));
        }
    }
    v
}

/// Sequential dot product; the accumulation order matches [`Hamiltonian::energy`].
pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in u.iter().zip(v) {
        acc += a * b;
    }
    acc
}

/// A quadratic polynomial `b + Σ h_i s_i + Σ_{i<j} J_ij s_i s_j` over `d` variables.
///
/// Used both for spin-convention Hamiltonians over all `n + m` spins and for
/// their Boolean-convention counterparts.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPolynomial {
    pub dim: usize,
    pub constant: f64,
    pub linear: Vec<f64>,
    /// Packed `(i<j)` lexicographic.
    pub quadratic: Vec<f64>,
}

impl QuadraticPolynomial {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            constant: 0.0,
            linear: vec![0.0; dim],
            quadratic: vec![0.0; pair_count(dim)],
        }
    }

    pub fn quadratic(&self, i: usize, j: usize) -> f64 {
        if i < j {
            self.quadratic[pair_index(i, j, self.dim)]
        } else if j < i {
            self.quadratic[pair_index(j, i, self.dim)]
        } else {
            0.0
        }
    }

    pub fn set_quadratic(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        assert!(i != j, "diagonal quadratic term");
        let k = pair_index(i, j, self.dim);
        self.quadratic[k] = v;
    }

    pub fn evaluate(&self, s: &[f64]) -> f64 {
        assert_eq!(s.len(), self.dim);
        let mut acc = self.constant;
        for (h, v) in self.linear.iter().zip(s) {
            acc += h * v;
        }
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                acc += self.quadratic(i, j) * s[i] * s[j];
            }
        }
        acc
    }

    /// Substitutes `s = 2σ - 1`, giving the Boolean-convention polynomial:
    ///
    /// `b̃ = b - Σ h_i + Σ J_ij`, `h̃_i = 2h_i - 2 Σ_{j≠i} J_ij`, `J̃_ij = 4 J_ij`.
    pub fn spin_to_boolean(&self) -> QuadraticPolynomial {
        let d = self.dim;
        let mut out = QuadraticPolynomial::zeros(d);
        out.constant = self.constant - self.linear.iter().sum::<f64>() + self.quadratic.iter().sum::<f64>();
        for i in 0..d {
            let incident: f64 = (0..d).filter(|&j| j != i).map(|j| self.quadratic(i, j)).sum();
            out.linear[i] = 2.0 * self.linear[i] - 2.0 * incident;
        }
        for (t, v) in out.quadratic.iter_mut().zip(&self.quadratic) {
            *t = 4.0 * v;
        }
        out
    }
}

/// Degeneracy statistics of a Hamiltonian over all `2^(n+m)` full states.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    /// Ordered pairs of distinct full states with equal energy (within `tol`).
    pub degenerate_pairs: usize,
    /// `min_x min_{y ≠ f(x)} H(x, y) - H(x, f(x))`; non-positive means "does not encode".
    pub solution_gap: f64,
    /// Smallest energy difference exceeding `tol`, if any two levels differ.
    pub min_gap: Option<f64>,
}

impl DegeneracyReport {
    pub fn encodes(&self) -> bool {
        self.solution_gap > 0.0
    }
}

/// Full states sorted by energy, grouped into ties (adjacent gaps ≤ `tol`).
fn tie_groups(h: &Hamiltonian, tol: f64) -> (Vec<(f64, u64)>, Vec<std::ops::Range<usize>>) {
    let total = 1u64 << (h.n + h.m);
    let mut levels: Vec<(f64, u64)> = (0..total).map(|s| (h.energy_full(s), s)).collect();
    levels.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=levels.len() {
        if i == levels.len() || levels[i].0 - levels[i - 1].0 > tol {
            groups.push(start..i);
            start = i;
        }
    }
    (levels, groups)
}

fn check_shapes(h: &Hamiltonian, c: &Circuit) -> Result<()> {
    if h.shape() != c.shape() {
        return Err(Error::Shape(format!(
            "Hamiltonian shape {:?} does not match circuit shape {:?}",
            h.shape(),
            c.shape()
        )));
    }
    Ok(())
}

/// Computes `D(H)`, the solution gap `δ` and the minimum gap `ε`.
pub fn degeneracy_report(h: &Hamiltonian, c: &Circuit, tol: f64) -> Result<DegeneracyReport> {
    check_shapes(h, c)?;
    let (levels, groups) = tie_groups(h, tol);
    let degenerate_pairs = groups.iter().map(|g| g.len() * (g.len() - 1)).sum();
    let min_gap = levels
        .windows(2)
        .map(|w| w[1].0 - w[0].0)
        .filter(|&d| d > tol)
        .min_by(f64::total_cmp);
    Ok(DegeneracyReport {
        degenerate_pairs,
        solution_gap: solution_gap(h, c),
        min_gap,
    })
}

/// `δ = min_x min_{y ≠ f(x)} H(x, y) - H(x, f(x))`; `+∞` when `m = 0`.
pub fn solution_gap(h: &Hamiltonian, c: &Circuit) -> f64 {
    let mut gap = f64::INFINITY;
    for (x, fx) in c.rows() {
        let base = h.energy(x, fx);
        for y in SpinState::all(h.m) {
            if y != fx {
                gap = gap.min(h.energy(x, y) - base);
            }
        }
    }
    gap
}

/// Result of [`make_generic_traced`].
#[derive(Debug, Clone)]
pub struct GenericTrace {
    pub hamiltonian: Hamiltonian,
    /// `D` before the first and after every perturbation step.
    pub degeneracy_history: Vec<usize>,
}

/// Perturbs an encoding Hamiltonian until no two full states share an energy.
pub fn make_generic(h: &Hamiltonian, c: &Circuit, tol: f64) -> Result<Hamiltonian> {
    make_generic_traced(h, c, tol).map(|t| t.hamiltonian)
}

/// [`make_generic`] that also records `D` at every iteration.
///
/// Each step picks the lowest degenerate pair `(a, b)` in canonical order
/// and adds `(ε/3)·R`, where `R` is the single coordinate separating them:
/// the bias of the first differing output spin, or, when only the inputs
/// differ, the coupling between the first differing input and output 0.
/// `|R| = 1`, so no strict ordering is reversed and `D` drops by at least 2.
pub fn make_generic_traced(h: &Hamiltonian, c: &Circuit, tol: f64) -> Result<GenericTrace> {
    check_shapes(h, c)?;
    let gap = solution_gap(h, c);
    if gap <= tol {
        return Err(Error::NotEncoding { gap });
    }
    if h.m == 0 {
        // With no outputs every state has energy 0; only D = 0 (n = 0) is reachable.
        let report = degeneracy_report(h, c, tol)?;
        if report.degenerate_pairs > 0 {
            return Err(Error::GenericityStalled(report.degenerate_pairs));
        }
    }
    let mut current = h.clone();
    let mut history = Vec::new();
    loop {
        let (levels, groups) = tie_groups(&current, tol);
        let d: usize = groups.iter().map(|g| g.len() * (g.len() - 1)).sum();
        if let Some(&prev) = history.last() {
            if d >= prev {
                return Err(Error::GenericityStalled(d));
            }
        }
        history.push(d);
        if d == 0 {
            break;
        }
        let eps = levels
            .windows(2)
            .map(|w| w[1].0 - w[0].0)
            .filter(|&g| g > tol)
            .min_by(f64::total_cmp)
            // every state tied: any step below the solution gap keeps the order
            .unwrap_or(gap);
        let (a, b) = groups
            .iter()
            .filter(|g| g.len() > 1)
            .map(|g| {
                let mut members: Vec<u64> = levels[g.clone()].iter().map(|l| l.1).collect();
                members.sort_unstable();
                (members[0], members[1])
            })
            .min()
            .expect("D > 0 implies a tied group");
        let step = eps / 3.0;
        let n = current.n;
        let (ya, yb) = (a >> n, b >> n);
        if ya != yb {
            let i = (ya ^ yb).trailing_zeros() as usize;
            let v = current.bias(i) + step;
            current.set_bias(i, v);
        } else {
            let k = (a ^ b).trailing_zeros() as usize;
            let v = current.input_coupling(k, 0) + step;
            current.set_input_coupling(k, 0, v);
        }
    }
    Ok(GenericTrace {
        hamiltonian: current,
        degeneracy_history: history,
    })
}
