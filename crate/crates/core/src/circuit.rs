//! Boolean functions on the spin hypercube.

use std::fmt;
use std::str::FromStr;

use crate::constraints;
use crate::lp::{self, L1Outcome, SolverOptions};
use crate::{Error, Result};

/// Largest state dimension representable by [`SpinState`].
pub const MAX_DIM: usize = 63;

/// A point of `{-1, +1}^d`, stored as its canonical index.
///
/// Spin `i` is `+1` iff bit `i` of the index is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinState {
    index: u64,
    dim: u8,
}

impl SpinState {
    pub fn from_index(index: u64, dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "spin dimension {dim} exceeds {MAX_DIM}");
        assert!(
            dim == 64 || index >> dim == 0,
            "index {index} out of range for dimension {dim}"
        );
        Self {
            index,
            dim: dim as u8,
        }
    }

    /// Builds a state from explicit spins; every entry must be `-1` or `+1`.
    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        if spins.len() > MAX_DIM {
            return Err(Error::Invalid(format!(
                "spin dimension {} exceeds {MAX_DIM}",
                spins.len()
            )));
        }
        let mut index = 0u64;
        for (i, &s) in spins.iter().enumerate() {
            match s {
                1 => index |= 1 << i,
                -1 => {}
                other => return Err(Error::Invalid(format!("spin value {other} is not ±1"))),
            }
        }
        Ok(Self::from_index(index, spins.len()))
    }

    pub fn all_down(dim: usize) -> Self {
        Self::from_index(0, dim)
    }

    pub fn all_up(dim: usize) -> Self {
        Self::from_index(mask(dim), dim)
    }

    #[inline]
    pub fn index(self) -> u64 {
        self.index
    }

    #[inline]
    pub fn dim(self) -> usize {
        self.dim as usize
    }

    /// Spin `i` as `-1` or `+1`.
    #[inline]
    pub fn get(self, i: usize) -> i8 {
        debug_assert!(i < self.dim());
        if self.index >> i & 1 == 1 {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn spin_f64(self, i: usize) -> f64 {
        f64::from(self.get(i))
    }

    pub fn spins(self) -> Vec<i8> {
        (0..self.dim()).map(|i| self.get(i)).collect()
    }

    pub fn to_f64(self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.spin_f64(i)).collect()
    }

    /// The state with spin `i` reversed.
    #[inline]
    pub fn flip(self, i: usize) -> Self {
        debug_assert!(i < self.dim());
        Self {
            index: self.index ^ (1 << i),
            dim: self.dim,
        }
    }

    /// Global spin reversal `s -> -s`.
    pub fn negate(self) -> Self {
        Self {
            index: self.index ^ mask(self.dim()),
            dim: self.dim,
        }
    }

    pub fn hamming(self, other: Self) -> u32 {
        (self.index ^ other.index).count_ones()
    }

    /// Concatenation `(self, other)`; `self` occupies the low bits.
    pub fn concat(self, other: Self) -> Self {
        Self::from_index(self.index | other.index << self.dim, self.dim() + other.dim())
    }

    /// Spins `start..start + len`.
    pub fn slice(self, start: usize, len: usize) -> Self {
        Self::from_index(self.index >> start & mask(len), len)
    }

    /// Every state of dimension `dim` in canonical order.
    pub fn all(dim: usize) -> impl DoubleEndedIterator<Item = SpinState> + ExactSizeIterator {
        assert!(dim < 32, "refusing to enumerate 2^{dim} states");
        (0..1usize << dim).map(move |i| SpinState::from_index(i as u64, dim))
    }
}

impl fmt::Display for SpinState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for i in 0..self.dim() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", self.get(i))?;
        }
        f.write_str(")")
    }
}

#[inline]
pub(crate) fn mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// A total function `f: {-1,+1}^n -> {-1,+1}^m` given by its truth table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    n: usize,
    m: usize,
    /// Output state index for every input index.
    table: Vec<u64>,
}

impl Circuit {
    /// Largest input count accepted.
    pub const MAX_INPUTS: usize = 24;

    pub fn new(n: usize, m: usize, table: Vec<SpinState>) -> Result<Self> {
        check_shape(n, m)?;
        if table.len() != 1 << n {
            return Err(Error::Dimension {
                expected: 1 << n,
                got: table.len(),
            });
        }
        if let Some(bad) = table.iter().find(|s| s.dim() != m) {
            return Err(Error::Dimension {
                expected: m,
                got: bad.dim(),
            });
        }
        Ok(Self {
            n,
            m,
            table: table.into_iter().map(SpinState::index).collect(),
        })
    }

    pub fn from_fn(n: usize, m: usize, f: impl Fn(SpinState) -> SpinState) -> Result<Self> {
        check_shape(n, m)?;
        let table = SpinState::all(n).map(f).collect();
        Self::new(n, m, table)
    }

    /// Builds a circuit from a table of output indices.
    pub fn from_output_indices(n: usize, m: usize, table: Vec<u64>) -> Result<Self> {
        check_shape(n, m)?;
        if table.len() != 1 << n {
            return Err(Error::Dimension {
                expected: 1 << n,
                got: table.len(),
            });
        }
        if let Some(&bad) = table.iter().find(|&&y| y >> m != 0) {
            return Err(Error::OutOfRange {
                index: bad as usize,
                size: 1 << m,
            });
        }
        Ok(Self { n, m, table })
    }

    /// The circuit with canonical index `index`: output of input `x` is
    /// digit `x` of `index` written in base `2^m`.
    pub fn from_index(n: usize, m: usize, index: u64) -> Result<Self> {
        let bits = table_bits(n, m);
        if bits > 64 || (bits < 64 && index >> bits != 0) {
            return Err(Error::OutOfRange {
                index: index as usize,
                size: 1usize.checked_shl(bits).unwrap_or(usize::MAX),
            });
        }
        let table = (0..1usize << n)
            .map(|x| index >> (x * m) & mask(m))
            .collect();
        Ok(Self { n, m, table })
    }

    /// Canonical index, if `m * 2^n <= 64`.
    pub fn index(&self) -> Option<u64> {
        if table_bits(self.n, self.m) > 64 {
            return None;
        }
        Some(
            self.table
                .iter()
                .enumerate()
                .fold(0u64, |acc, (x, &y)| acc | y << (x * self.m)),
        )
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    #[inline]
    pub fn output(&self, x: SpinState) -> SpinState {
        debug_assert_eq!(x.dim(), self.n);
        SpinState::from_index(self.table[x.index() as usize], self.m)
    }

    pub fn output_indices(&self) -> &[u64] {
        &self.table
    }

    /// `(x, f(x))` pairs in canonical input order.
    pub fn rows(&self) -> impl Iterator<Item = (SpinState, SpinState)> + '_ {
        SpinState::all(self.n).map(move |x| (x, self.output(x)))
    }

    /// The shape-`(n, 1)` circuit computing output bit `i`.
    pub fn component(&self, i: usize) -> Result<Circuit> {
        if i >= self.m {
            return Err(Error::OutOfRange {
                index: i,
                size: self.m,
            });
        }
        let table = self.table.iter().map(|&y| y >> i & 1).collect();
        Ok(Circuit {
            n: self.n,
            m: 1,
            table,
        })
    }

    pub fn components(&self) -> Vec<Circuit> {
        (0..self.m)
            .map(|i| self.component(i).expect("index in range"))
            .collect()
    }

    /// The product circuit `f1 × f2`; outputs of `self` come first.
    pub fn glue(&self, other: &Circuit) -> Result<Circuit> {
        if self.n != other.n {
            return Err(Error::Shape(format!(
                "cannot glue circuits with {} and {} inputs",
                self.n, other.n
            )));
        }
        check_shape(self.n, self.m + other.m)?;
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(&a, &b)| a | b << self.m)
            .collect();
        Ok(Circuit {
            n: self.n,
            m: self.m + other.m,
            table,
        })
    }

    /// Output-wise negation `-f`.
    pub fn negate_outputs(&self) -> Circuit {
        let table = self.table.iter().map(|&y| y ^ mask(self.m)).collect();
        Circuit {
            n: self.n,
            m: self.m,
            table,
        }
    }

    pub fn to_table(&self, convention: Convention) -> TruthTable {
        let rows = self
            .rows()
            .map(|(x, y)| (x.spins(), y.spins()))
            .collect();
        TruthTable {
            n: self.n,
            m: self.m,
            convention: Convention::Spin,
            rows,
        }
        .convert(convention)
    }

    /// Decides whether a single-output circuit is a threshold function.
    ///
    /// Returns a witness `(w0, w)` with `f(x) * (w0 + w·x) >= 1` on every
    /// input, obtained from the L1-minimal LP solution.
    pub fn is_threshold(&self) -> Result<Option<ThresholdWitness>> {
        if self.m != 1 {
            return Err(Error::Shape(format!(
                "threshold test needs one output, circuit has {}",
                self.m
            )));
        }
        let system = constraints::global_min_rows(self);
        match lp::l1_minimize(&system.rows, &system.rhs, &SolverOptions::default())? {
            L1Outcome::Infeasible => Ok(None),
            L1Outcome::Optimal { u, .. } => {
                // u = (h, W_1, ..., W_n) and f(x) = -sgn(A(x)), so w = -2A.
                let bias = -2.0 * u[0];
                let weights = u[1..].iter().map(|w| -2.0 * w).collect();
                Ok(Some(ThresholdWitness { bias, weights }))
            }
        }
    }
}

fn check_shape(n: usize, m: usize) -> Result<()> {
    if n > Circuit::MAX_INPUTS {
        return Err(Error::Invalid(format!(
            "{n} inputs exceeds the supported maximum of {}",
            Circuit::MAX_INPUTS
        )));
    }
    if m > MAX_DIM {
        return Err(Error::Invalid(format!(
            "{m} outputs exceeds the supported maximum of {MAX_DIM}"
        )));
    }
    Ok(())
}

/// `m * 2^n`, the base-2 logarithm of the number of shape-`(n, m)` circuits.
pub fn table_bits(n: usize, m: usize) -> u32 {
    (m << n) as u32
}

/// Separating hyperplane for a threshold function: `f(x) = sgn(bias + weights·x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdWitness {
    pub bias: f64,
    pub weights: Vec<f64>,
}

impl ThresholdWitness {
    pub fn value(&self, x: SpinState) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .fold(self.bias, |acc, (k, w)| acc + w * x.spin_f64(k))
    }
}

/// Iterates every shape-`(n, m)` circuit in canonical index order.
///
/// Fails when the `2^(m * 2^n)` circuits exceed `2^max_bits`.
pub fn enumerate_circuits(
    n: usize,
    m: usize,
    max_bits: u32,
) -> Result<impl ExactSizeIterator<Item = Circuit>> {
    let bits = table_bits(n, m);
    if bits > max_bits || bits >= 64 {
        return Err(Error::Budget {
            what: "circuit enumeration",
            bits,
            cap: max_bits,
        });
    }
    Ok((0..1usize << bits).map(move |i| Circuit::from_index(n, m, i as u64).expect("index within range")))
}

/// Small library of named gates, in spin convention.
pub mod gates {
    use super::{Circuit, SpinState};

    fn bit(v: bool) -> SpinState {
        SpinState::from_index(u64::from(v), 1)
    }

    /// `+1` iff every input is `+1`.
    pub fn and(n: usize) -> Circuit {
        Circuit::from_fn(n, 1, |x| bit(x == SpinState::all_up(n))).expect("valid shape")
    }

    /// `+1` iff an odd number of inputs are `+1`.
    pub fn xor(n: usize) -> Circuit {
        Circuit::from_fn(n, 1, |x| bit(x.index().count_ones() % 2 == 1)).expect("valid shape")
    }

    pub fn or(n: usize) -> Circuit {
        Circuit::from_fn(n, 1, |x| bit(x.index() != 0)).expect("valid shape")
    }

    pub fn constant(n: usize, value: i8) -> Circuit {
        Circuit::from_fn(n, 1, |_| bit(value > 0)).expect("valid shape")
    }

    /// `f(x) = x_i`.
    pub fn projection(n: usize, i: usize) -> Circuit {
        Circuit::from_fn(n, 1, |x| bit(x.get(i) > 0)).expect("valid shape")
    }

    /// Shape `(1, 1)` identity.
    pub fn copy() -> Circuit {
        projection(1, 0)
    }

    pub fn identity(n: usize) -> Circuit {
        Circuit::from_fn(n, n, |x| x).expect("valid shape")
    }
}

/// Value convention used for truth-table I/O.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Convention {
    /// Values in `{-1, +1}`.
    Spin,
    /// Values in `{0, 1}`.
    Boolean,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Spin => "spin",
            Convention::Boolean => "bool",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spin" => Ok(Convention::Spin),
            "bool" | "boolean" => Ok(Convention::Boolean),
            other => Err(Error::Invalid(format!("unknown convention `{other}`"))),
        }
    }
}

/// Spin to Boolean relabeling `s -> (s + 1) / 2`.
pub fn spin_to_bool(s: i8) -> i8 {
    (s + 1) / 2
}

/// Boolean to spin relabeling `b -> 2b - 1`.
pub fn bool_to_spin(b: i8) -> i8 {
    2 * b - 1
}

/// A truth table with explicit values in one convention.
///
/// Rows are stored in canonical input order. This is the value-level view
/// used for I/O; [`Circuit`] is always spin-valued.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    pub n: usize,
    pub m: usize,
    pub convention: Convention,
    pub rows: Vec<(Vec<i8>, Vec<i8>)>,
}

impl TruthTable {
    /// Relabels every input and output value into `to`.
    pub fn convert(mut self, to: Convention) -> TruthTable {
        let relabel: fn(i8) -> i8 = match (self.convention, to) {
            (a, b) if a == b => return self,
            (Convention::Spin, Convention::Boolean) => spin_to_bool,
            (Convention::Boolean, Convention::Spin) => bool_to_spin,
            _ => unreachable!(),
        };
        for (x, y) in &mut self.rows {
            x.iter_mut().for_each(|v| *v = relabel(*v));
            y.iter_mut().for_each(|v| *v = relabel(*v));
        }
        self.convention = to;
        self
    }

    pub fn to_circuit(&self) -> Result<Circuit> {
        let spin = self.clone().convert(Convention::Spin);
        let mut table = vec![None; 1 << spin.n];
        for (x, y) in &spin.rows {
            let x = SpinState::from_spins(x)?;
            let y = SpinState::from_spins(y)?;
            table[x.index() as usize] = Some(y);
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(i, y)| {
                y.ok_or_else(|| Error::Invalid(format!("truth table has no row for input {i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Circuit::new(spin.n, spin.m, table)
    }

    /// Renders the text format: a `shape <n> <m> <spin|bool>` header and one
    /// `<inputs> -> <outputs>` line per input in canonical order.
    pub fn to_text(&self) -> String {
        let token = |v: i8| match self.convention {
            Convention::Spin if v > 0 => "+1".to_string(),
            _ => v.to_string(),
        };
        let mut out = format!("shape {} {} {}\n", self.n, self.m, self.convention);
        for (x, y) in &self.rows {
            let xs: Vec<String> = x.iter().map(|&v| token(v)).collect();
            let ys: Vec<String> = y.iter().map(|&v| token(v)).collect();
            let lhs = xs.join(" ");
            if lhs.is_empty() {
                out.push_str("-> ");
            } else {
                out.push_str(&lhs);
                out.push_str(" -> ");
            }
            out.push_str(&ys.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the text format. Blank lines and `#` comments are ignored;
    /// rows may appear in any order but every input must appear once.
    pub fn parse(text: &str) -> Result<TruthTable> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "empty truth table".into(),
        })?;
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "shape" {
            return Err(perr(hline, "expected `shape <n> <m> <spin|bool>`".into()));
        }
        let n: usize = fields[1]
            .parse()
            .map_err(|_| perr(hline, format!("bad input count `{}`", fields[1])))?;
        let m: usize = fields[2]
            .parse()
            .map_err(|_| perr(hline, format!("bad output count `{}`", fields[2])))?;
        let convention: Convention = fields[3]
            .parse()
            .map_err(|_| perr(hline, format!("bad convention `{}`", fields[3])))?;
        check_shape(n, m).map_err(|e| perr(hline, e.to_string()))?;

        let parse_token = |line: usize, tok: &str| -> Result<i8> {
            let v = match (convention, tok) {
                (Convention::Spin, "-1") => -1,
                (Convention::Spin, "+1" | "1") => 1,
                (Convention::Boolean, "0") => 0,
                (Convention::Boolean, "1") => 1,
                _ => {
                    return Err(perr(
                        line,
                        format!("token `{tok}` invalid in {convention} convention"),
                    ))
                }
            };
            Ok(v)
        };

        let mut seen = vec![false; 1 << n];
        let mut rows = vec![(Vec::new(), Vec::new()); 1 << n];
        for (line, body) in lines {
            let (lhs, rhs) = body
                .split_once("->")
                .ok_or_else(|| perr(line, "missing `->`".into()))?;
            let x = lhs
                .split_whitespace()
                .map(|t| parse_token(line, t))
                .collect::<Result<Vec<_>>>()?;
            let y = rhs
                .split_whitespace()
                .map(|t| parse_token(line, t))
                .collect::<Result<Vec<_>>>()?;
            if x.len() != n || y.len() != m {
                return Err(perr(
                    line,
                    format!("expected {n} inputs and {m} outputs, got {} and {}", x.len(), y.len()),
                ));
            }
            let spins: Vec<i8> = match convention {
                Convention::Spin => x.clone(),
                Convention::Boolean => x.iter().map(|&b| bool_to_spin(b)).collect(),
            };
            let idx = SpinState::from_spins(&spins)?.index() as usize;
            if seen[idx] {
                return Err(perr(line, format!("duplicate row for input index {idx}")));
            }
            seen[idx] = true;
            rows[idx] = (x, y);
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(perr(
                hline,
                format!("missing row for input index {missing}"),
            ));
        }
        Ok(TruthTable {
            n,
            m,
            convention,
            rows,
        })
    }
}

impl Circuit {
    pub fn to_text(&self, convention: Convention) -> String {
        self.to_table(convention).to_text()
    }

    pub fn parse(text: &str) -> Result<Circuit> {
        TruthTable::parse(text)?.to_circuit()
    }
}
